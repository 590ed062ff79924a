//! Performance-cost trade-off optimization.
//!
//! Each function is placed on exactly one platform. A placement's cost is the
//! workflow cost of that assignment and its latency the critical path through
//! the workflow. The optimizer first solves the two single-objective anchors
//! (minimum cost `C*`, minimum latency `T*`), derives the weights
//! `alpha = 1/C*` and `beta = 1/T*`, then minimizes `alpha*cost + beta*latency`
//! subject to a budget and a latency SLO.
//!
//! The solver is exhaustive enumeration in lexicographic order, which keeps
//! results exact and deterministic for the instance sizes this crate targets
//! (up to [`DEFAULT_ENUMERATION_CAP`] placements).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rust_decimal::Decimal;

use crate::cost::{function_cost_lines, CostError};
use crate::money::{to_f64, Money};
use crate::pricing::CatalogSet;
use crate::workflow::{LatencyTable, Placement, WorkflowError, WorkflowSpec};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Objective values closer than this are ties.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TradeoffError {
    #[error("enumeration would generate {count} placements (cap {cap})")]
    CapExceeded { count: u128, cap: u64 },
    #[error("no candidate platforms")]
    NoPlatforms,
    #[error("no cost/latency entry for function `{function}` on `{platform}`")]
    MissingEntry { function: String, platform: String },
    #[error("anchor is zero (C* = {c_star}, T* = {t_star}); automatic weights are undefined")]
    DegenerateAnchor { c_star: Decimal, t_star: Decimal },
    #[error("invalid optimization config: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Infeasible(Box<Infeasibility>),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Why no placement met the constraints, and how close the best attempt came.
#[derive(Debug, Clone, PartialEq)]
pub struct Infeasibility {
    pub budget: Option<Money>,
    pub latency_slo: Option<Decimal>,
    pub c_star: Money,
    pub t_star: Decimal,
    /// The placement with the smallest relative constraint violation.
    pub nearest: Option<Candidate>,
    pub total_count: u64,
}

impl core::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "no placement satisfies the constraints (C* = {}, T* = {} ms",
            self.c_star, self.t_star
        )?;
        if let Some(n) = &self.nearest {
            write!(f, "; nearest: cost {} latency {} ms", n.cost, n.latency)?;
        }
        write!(f, ")")
    }
}

/// A placement together with its cost and latency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub placement: Placement,
    pub cost: Money,
    pub latency: Decimal,
}

/// Iterator over every total assignment in lexicographic order of
/// (function order, platform order).
#[derive(Debug, Clone)]
pub struct Assignments {
    radix: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Assignments {
    fn new(functions: usize, platforms: usize) -> Self {
        Assignments {
            radix: platforms,
            digits: vec![0; functions],
            done: platforms == 0,
        }
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.digits.clone();
        self.done = true;
        for digit in self.digits.iter_mut().rev() {
            *digit += 1;
            if *digit < self.radix {
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(current)
    }
}

/// `platforms^functions`, or `CapExceeded` when it exceeds `cap`.
pub fn placement_count(functions: usize, platforms: usize, cap: u64) -> Result<u64, TradeoffError> {
    if platforms == 0 {
        return Err(TradeoffError::NoPlatforms);
    }
    let count = (platforms as u128)
        .checked_pow(functions as u32)
        .unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(TradeoffError::CapExceeded { count, cap });
    }
    Ok(count as u64)
}

/// Every placement of `workflow` over `platforms`.
pub fn enumerate_placements<'a>(
    workflow: &'a WorkflowSpec,
    platforms: &'a [String],
    cap: u64,
) -> Result<impl Iterator<Item = Placement> + 'a, TradeoffError> {
    let ids: Vec<&str> = workflow.function_ids().collect();
    placement_count(ids.len(), platforms.len(), cap)?;
    Ok(
        Assignments::new(ids.len(), platforms.len()).map(move |choice| {
            ids.iter()
                .zip(&choice)
                .map(|(f, &p)| (f.to_string(), platforms[p].clone()))
                .collect()
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    cost: Money,
    latency: Option<Decimal>,
    // Fixed monthly charges by component id, paid once per platform.
    fixed: Vec<(String, Money)>,
}

/// Per-(function, platform) costs and latencies of a placement problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffProblem {
    functions: Vec<String>,
    platforms: Vec<String>,
    cells: Vec<Vec<Cell>>,
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    shared_fixed: bool,
    cap: u64,
}

impl TradeoffProblem {
    /// Prices every (function, platform) pair with the cost engine. Latencies
    /// are taken from `latencies` where present.
    pub fn from_catalogs(
        workflow: &WorkflowSpec,
        platforms: &[String],
        catalogs: &CatalogSet,
        latencies: &LatencyTable,
    ) -> Result<Self, TradeoffError> {
        let mut cells = Vec::with_capacity(workflow.functions().len());
        for profile in workflow.functions() {
            let mut row = Vec::with_capacity(platforms.len());
            for platform in platforms {
                let catalog = catalogs
                    .get(platform)
                    .ok_or_else(|| CostError::UnknownPlatform(platform.clone()))?;
                let latency = latencies.get(&profile.function_id, platform);
                let fc = function_cost_lines(profile, catalog, latency)?;
                row.push(Cell {
                    cost: fc.breakdown.total,
                    latency,
                    fixed: fc
                        .fixed_charges()
                        .map(|l| (l.component_id.clone(), l.amount))
                        .collect(),
                });
            }
            cells.push(row);
        }
        Self::assemble(workflow, platforms, cells)
    }

    /// Uses given (cost, latency) values per (function, platform), e.g.
    /// measured points. Every pair must be present.
    pub fn from_table(
        workflow: &WorkflowSpec,
        platforms: &[String],
        table: &BTreeMap<(String, String), (Money, Decimal)>,
    ) -> Result<Self, TradeoffError> {
        let mut cells = Vec::new();
        for f in workflow.function_ids() {
            let mut row = Vec::new();
            for p in platforms {
                let &(cost, latency) = table.get(&(f.to_string(), p.clone())).ok_or_else(|| {
                    TradeoffError::MissingEntry {
                        function: f.to_string(),
                        platform: p.clone(),
                    }
                })?;
                row.push(Cell {
                    cost,
                    latency: Some(latency),
                    fixed: Vec::new(),
                });
            }
            cells.push(row);
        }
        Self::assemble(workflow, platforms, cells)
    }

    fn assemble(
        workflow: &WorkflowSpec,
        platforms: &[String],
        cells: Vec<Vec<Cell>>,
    ) -> Result<Self, TradeoffError> {
        if platforms.is_empty() {
            return Err(TradeoffError::NoPlatforms);
        }
        let n = workflow.functions().len();
        let mut seen: BTreeMap<(usize, &str), usize> = BTreeMap::new();
        for row in &cells {
            for (p, cell) in row.iter().enumerate() {
                for (component, _) in &cell.fixed {
                    *seen.entry((p, component.as_str())).or_default() += 1;
                }
            }
        }
        let shared_fixed = seen.values().any(|&c| c > 1);
        Ok(TradeoffProblem {
            functions: workflow.function_ids().map(str::to_string).collect(),
            platforms: platforms.to_vec(),
            cells,
            order: workflow.topological_order().to_vec(),
            preds: (0..n).map(|i| workflow.predecessors(i).to_vec()).collect(),
            shared_fixed,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn functions(&self) -> &[String] {
        &self.functions
    }

    pub fn platforms(&self) -> &[String] {
        &self.platforms
    }

    /// Cost of function `f` alone on platform `p`.
    pub fn cell_cost(&self, f: usize, p: usize) -> Money {
        self.cells[f][p].cost
    }

    pub fn cell_latency(&self, f: usize, p: usize) -> Result<Decimal, TradeoffError> {
        self.cells[f][p].latency.ok_or_else(|| {
            WorkflowError::MissingLatency {
                function: self.functions[f].clone(),
                platform: self.platforms[p].clone(),
            }
            .into()
        })
    }

    /// Number of placements, checked against the enumeration cap.
    pub fn count(&self) -> Result<u64, TradeoffError> {
        placement_count(self.functions.len(), self.platforms.len(), self.cap)
    }

    /// All assignments as platform indices per function, lexicographically.
    pub fn assignments(&self) -> Result<Assignments, TradeoffError> {
        self.count()?;
        Ok(Assignments::new(self.functions.len(), self.platforms.len()))
    }

    pub fn placement(&self, choice: &[usize]) -> Placement {
        self.functions
            .iter()
            .zip(choice)
            .map(|(f, &p)| (f.clone(), self.platforms[p].clone()))
            .collect()
    }

    /// Workflow cost of an assignment; fixed monthly charges for the same
    /// component on the same platform are paid once.
    pub fn cost(&self, choice: &[usize]) -> Money {
        let sum: Money = choice
            .iter()
            .enumerate()
            .map(|(f, &p)| self.cells[f][p].cost)
            .sum();
        if !self.shared_fixed {
            return sum;
        }
        let mut groups: BTreeMap<(usize, &str), (Decimal, Decimal)> = BTreeMap::new();
        for (f, &p) in choice.iter().enumerate() {
            for (component, amount) in &self.cells[f][p].fixed {
                let g = groups.entry((p, component.as_str())).or_default();
                g.0 += amount.value();
                g.1 = g.1.max(amount.value());
            }
        }
        let duplicate: Decimal = groups.values().map(|(s, m)| s - m).sum();
        Money::new(sum.value() - duplicate).unwrap_or(Money::ZERO)
    }

    /// Critical-path latency of an assignment.
    pub fn latency(&self, choice: &[usize]) -> Result<Decimal, TradeoffError> {
        let mut finish = vec![Decimal::ZERO; self.functions.len()];
        let mut longest = Decimal::ZERO;
        for &v in &self.order {
            let start = self.preds[v]
                .iter()
                .map(|&p| finish[p])
                .max()
                .unwrap_or(Decimal::ZERO);
            finish[v] = start + self.cell_latency(v, choice[v])?;
            longest = longest.max(finish[v]);
        }
        Ok(longest)
    }

    pub fn candidate(&self, choice: &[usize]) -> Result<Candidate, TradeoffError> {
        Ok(Candidate {
            placement: self.placement(choice),
            cost: self.cost(choice),
            latency: self.latency(choice)?,
        })
    }

    /// One point per (function, platform), labelled `function (platform)`.
    pub fn function_points(&self) -> Result<Vec<ParetoPoint>, TradeoffError> {
        let mut points = Vec::new();
        for (f, function) in self.functions.iter().enumerate() {
            for (p, platform) in self.platforms.iter().enumerate() {
                let mut placement = Placement::default();
                placement.assign(function, platform);
                points.push(ParetoPoint {
                    label: format!("{function} ({platform})"),
                    cost: self.cell_cost(f, p),
                    latency: self.cell_latency(f, p)?,
                    placement: Some(placement),
                });
            }
        }
        Ok(points)
    }
}

/// An optimal value and the lexicographically first placement attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor<T> {
    pub value: T,
    pub placement: Placement,
}

/// `C*`: the minimum workflow cost over all placements.
pub fn min_cost(problem: &TradeoffProblem) -> Result<Anchor<Money>, TradeoffError> {
    let mut best: Option<(Money, Vec<usize>)> = None;
    for choice in problem.assignments()? {
        let cost = problem.cost(&choice);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, choice));
        }
    }
    let (value, choice) = best.ok_or(TradeoffError::NoPlatforms)?;
    Ok(Anchor {
        value,
        placement: problem.placement(&choice),
    })
}

/// `T*`: the minimum workflow latency over all placements.
pub fn min_time(problem: &TradeoffProblem) -> Result<Anchor<Decimal>, TradeoffError> {
    let mut best: Option<(Decimal, Vec<usize>)> = None;
    for choice in problem.assignments()? {
        let latency = problem.latency(&choice)?;
        if best.as_ref().is_none_or(|(b, _)| latency < *b) {
            best = Some((latency, choice));
        }
    }
    let (value, choice) = best.ok_or(TradeoffError::NoPlatforms)?;
    Ok(Anchor {
        value,
        placement: problem.placement(&choice),
    })
}

/// `(alpha, beta) = (1/C*, 1/T*)`.
pub fn auto_weights(c_star: Money, t_star: Decimal) -> Result<(f64, f64), TradeoffError> {
    if c_star.is_zero() || t_star <= Decimal::ZERO {
        return Err(TradeoffError::DegenerateAnchor {
            c_star: c_star.value(),
            t_star,
        });
    }
    Ok((1.0 / c_star.to_f64(), 1.0 / to_f64(t_star)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Weights from the anchors: `alpha = 1/C*`, `beta = 1/T*`.
    AutoPareto,
    Manual {
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// Budget and SLO bound the whole workflow.
    #[default]
    Workflow,
    /// Budget and SLO bound every function on its own.
    PerFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationConfig {
    /// `None` is an unlimited budget.
    pub budget: Option<Money>,
    /// `None` is an unlimited latency SLO.
    pub latency_slo: Option<Decimal>,
    pub weights: WeightMode,
    pub scope: Scope,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            budget: None,
            latency_slo: None,
            weights: WeightMode::AutoPareto,
            scope: Scope::Workflow,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<(), TradeoffError> {
        if self.budget.is_some_and(Money::is_zero) {
            return Err(TradeoffError::InvalidConfig(
                "budget must be positive".into(),
            ));
        }
        if self.latency_slo.is_some_and(|l| l <= Decimal::ZERO) {
            return Err(TradeoffError::InvalidConfig(
                "latency SLO must be positive".into(),
            ));
        }
        if let WeightMode::Manual { alpha, beta } = self.weights {
            let ok = |w: f64| w.is_finite() && w >= 0.0;
            if !ok(alpha) || !ok(beta) || (alpha == 0.0 && beta == 0.0) {
                return Err(TradeoffError::InvalidConfig(
                    "manual weights must be finite, non-negative and not both zero".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Placement,
    pub cost: Money,
    pub latency: Decimal,
    pub objective: f64,
    /// Weight on cost, 1/USD.
    pub alpha: f64,
    /// Weight on latency, 1/ms.
    pub beta: f64,
    pub c_star: Money,
    pub t_star: Decimal,
    pub c_star_placement: Placement,
    pub t_star_placement: Placement,
    pub feasible_count: u64,
    pub total_count: u64,
}

pub fn objective(alpha: f64, beta: f64, cost: Money, latency: Decimal) -> f64 {
    alpha * cost.to_f64() + beta * to_f64(latency)
}

// (objective, cost, latency); earlier enumeration order wins remaining ties.
fn better(a: (f64, Money, Decimal), b: (f64, Money, Decimal)) -> bool {
    if (a.0 - b.0).abs() > OBJECTIVE_TOLERANCE {
        return a.0 < b.0;
    }
    match a.1.cmp(&b.1) {
        Ordering::Equal => a.2 < b.2,
        other => other == Ordering::Less,
    }
}

/// Minimizes `alpha*cost + beta*latency` over placements within the budget
/// and latency SLO.
pub fn optimize(
    problem: &TradeoffProblem,
    config: &OptimizationConfig,
) -> Result<OptimizationResult, TradeoffError> {
    config.validate()?;
    let c_anchor = min_cost(problem)?;
    let t_anchor = min_time(problem)?;
    let (alpha, beta) = match config.weights {
        WeightMode::AutoPareto => auto_weights(c_anchor.value, t_anchor.value)?,
        WeightMode::Manual { alpha, beta } => (alpha, beta),
    };

    let within = |cost: Money, latency: Decimal| {
        config.budget.is_none_or(|b| cost <= b) && config.latency_slo.is_none_or(|l| latency <= l)
    };
    let violation = |cost: Money, latency: Decimal| {
        let over =
            |value: f64, bound: Option<f64>| bound.map_or(0.0, |b| ((value - b) / b).max(0.0));
        over(cost.to_f64(), config.budget.map(Money::to_f64))
            + over(to_f64(latency), config.latency_slo.map(to_f64))
    };

    let mut best: Option<((f64, Money, Decimal), Vec<usize>)> = None;
    let mut nearest: Option<(f64, Vec<usize>)> = None;
    let mut feasible_count = 0u64;
    let mut total_count = 0u64;
    for choice in problem.assignments()? {
        total_count += 1;
        let cost = problem.cost(&choice);
        let latency = problem.latency(&choice)?;
        let (feasible, miss) = match config.scope {
            Scope::Workflow => (within(cost, latency), violation(cost, latency)),
            Scope::PerFunction => {
                let mut ok = true;
                let mut miss = 0.0;
                for (f, &p) in choice.iter().enumerate() {
                    let (c, l) = (problem.cell_cost(f, p), problem.cell_latency(f, p)?);
                    ok &= within(c, l);
                    miss += violation(c, l);
                }
                (ok, miss)
            }
        };
        if !feasible {
            if nearest.as_ref().is_none_or(|(m, _)| miss < *m) {
                nearest = Some((miss, choice));
            }
            continue;
        }
        feasible_count += 1;
        let key = (objective(alpha, beta, cost, latency), cost, latency);
        if best.as_ref().is_none_or(|(b, _)| better(key, *b)) {
            best = Some((key, choice));
        }
    }

    match best {
        Some(((objective, cost, latency), choice)) => Ok(OptimizationResult {
            best: problem.placement(&choice),
            cost,
            latency,
            objective,
            alpha,
            beta,
            c_star: c_anchor.value,
            t_star: t_anchor.value,
            c_star_placement: c_anchor.placement,
            t_star_placement: t_anchor.placement,
            feasible_count,
            total_count,
        }),
        None => Err(TradeoffError::Infeasible(Box::new(Infeasibility {
            budget: config.budget,
            latency_slo: config.latency_slo,
            c_star: c_anchor.value,
            t_star: t_anchor.value,
            nearest: nearest
                .map(|(_, choice)| problem.candidate(&choice))
                .transpose()?,
            total_count,
        }))),
    }
}

/// A (cost, latency) point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoPoint {
    pub label: String,
    pub cost: Money,
    /// Milliseconds.
    pub latency: Decimal,
    pub placement: Option<Placement>,
}

impl ParetoPoint {
    pub fn new(label: &str, latency: Decimal, cost: Money) -> Self {
        ParetoPoint {
            label: label.to_string(),
            cost,
            latency,
            placement: None,
        }
    }

    /// At least as good in both coordinates and strictly better in one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.cost <= other.cost
            && self.latency <= other.latency
            && (self.cost < other.cost || self.latency < other.latency)
    }

    fn same_position(&self, other: &ParetoPoint) -> bool {
        self.cost == other.cost && self.latency == other.latency
    }
}

/// The points no other point dominates, by ascending latency. Points at the
/// same (cost, latency) collapse to the first one given.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        (points[a].latency, points[a].cost, a).cmp(&(points[b].latency, points[b].cost, b))
    });
    let mut front = Vec::new();
    let mut cheapest: Option<Money> = None;
    for i in order {
        let p = &points[i];
        if cheapest.is_none_or(|c| p.cost < c) {
            cheapest = Some(p.cost);
            front.push(p.clone());
        }
    }
    front
}

/// The front points on the lower convex hull of the point set: those that
/// minimize `alpha*cost + beta*latency` for some positive weights. Points in
/// a concave dent of the front are dropped; collinear ones are kept.
pub fn supported_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut hull: Vec<ParetoPoint> = Vec::new();
    for p in pareto_front(points) {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let cross = (b.latency - a.latency) * (p.cost.value() - a.cost.value())
                - (b.cost.value() - a.cost.value()) * (p.latency - a.latency);
            if cross < Decimal::ZERO {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Incrementally maintained Pareto front, for streams too large to collect.
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    points: Vec<ParetoPoint>,
}

impl ParetoArchive {
    pub fn insert(&mut self, point: ParetoPoint) {
        if self
            .points
            .iter()
            .any(|q| q.dominates(&point) || q.same_position(&point))
        {
            return;
        }
        self.points.retain(|q| !point.dominates(q));
        self.points.push(point);
    }

    pub fn into_front(mut self) -> Vec<ParetoPoint> {
        self.points.sort_by_key(|p| (p.latency, p.cost));
        self.points
    }
}

/// Pareto front over whole-workflow placements, labelled by their platforms
/// in function order.
pub fn placement_front(problem: &TradeoffProblem) -> Result<Vec<ParetoPoint>, TradeoffError> {
    let mut archive = ParetoArchive::default();
    for choice in problem.assignments()? {
        let c = problem.candidate(&choice)?;
        let label = choice
            .iter()
            .map(|&p| problem.platforms[p].as_str())
            .collect::<Vec<_>>()
            .join("/");
        archive.insert(ParetoPoint {
            label,
            cost: c.cost,
            latency: c.latency,
            placement: Some(c.placement),
        });
    }
    Ok(archive.into_front())
}
