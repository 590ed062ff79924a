//! Per-driver cost engine.
//!
//! The five driver formulas are exposed as free functions
//! ([`invocation_cost`], [`compute_cost`], [`state_cost`], [`transfer_cost`],
//! [`baas_cost`]). [`function_cost`] applies them to every catalog component a
//! function consumes on one platform and [`workflow_cost`] sums a whole
//! placement. Costs are affine in request volume, so any workflow or function
//! reduces to a [`CostCurve`]; two curves meet at a [`crossover`] volume.
//!
//! The billing horizon is one month throughout: fixed monthly charges are paid
//! once regardless of volume and state is held for one month.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rust_decimal::Decimal;

use crate::money::{Money, NegativeAmount};
use crate::pricing::{CatalogSet, DriverCategory, PlatformCatalog, RateUnit};
use crate::workflow::{FunctionProfile, LatencyTable, Placement, WorkflowError, WorkflowSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostError {
    #[error("`{name}` must be non-negative, got {value}")]
    Domain { name: &'static str, value: Decimal },
    #[error("component `{component}` is not in the `{platform}` catalog")]
    UnknownComponent { component: String, platform: String },
    #[error("component `{component}` on `{platform}` is not a backend service")]
    NotBaas { component: String, platform: String },
    #[error("component `{component}` pairs `{driver}` with unit `{unit}`")]
    InvalidComponent {
        component: String,
        driver: DriverCategory,
        unit: RateUnit,
    },
    #[error("no catalog for platform `{0}`")]
    UnknownPlatform(String),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
}

impl From<NegativeAmount> for CostError {
    fn from(e: NegativeAmount) -> Self {
        CostError::Domain {
            name: "amount",
            value: e.0,
        }
    }
}

fn non_negative(inputs: &[(&'static str, Decimal)]) -> Result<(), CostError> {
    match inputs
        .iter()
        .find(|(_, v)| v.is_sign_negative() && !v.is_zero())
    {
        Some(&(name, value)) => Err(CostError::Domain { name, value }),
        None => Ok(()),
    }
}

fn money(value: Decimal) -> Result<Money, CostError> {
    Ok(Money::new(value)?)
}

/// `n * p_inv`: a fixed price per request.
pub fn invocation_cost(n: Decimal, p_inv: Decimal) -> Result<Money, CostError> {
    non_negative(&[("n", n), ("p_inv", p_inv)])?;
    money(n * p_inv)
}

/// `n * t * mem * p_gbs`, billed per GB-second.
pub fn compute_cost(
    n: Decimal,
    t: Decimal,
    mem: Decimal,
    p_gbs: Decimal,
) -> Result<Money, CostError> {
    non_negative(&[("n", n), ("t", t), ("mem", mem), ("p_gbs", p_gbs)])?;
    money(n * (t * mem * p_gbs))
}

/// `d * p_state` for one billing month.
pub fn state_cost(d: Decimal, p_state: Decimal) -> Result<Money, CostError> {
    non_negative(&[("d", d), ("p_state", p_state)])?;
    money(d * p_state)
}

/// `n * (r_in * p_in + r_out * p_out)`.
pub fn transfer_cost(
    n: Decimal,
    r_in: Decimal,
    p_in: Decimal,
    r_out: Decimal,
    p_out: Decimal,
) -> Result<Money, CostError> {
    non_negative(&[
        ("n", n),
        ("r_in", r_in),
        ("p_in", p_in),
        ("r_out", r_out),
        ("p_out", p_out),
    ])?;
    money(n * (r_in * p_in + r_out * p_out))
}

/// `t_fixed * p_fixed + n * r * p_dynamic`.
pub fn baas_cost(
    t_fixed: Decimal,
    p_fixed: Decimal,
    n: Decimal,
    r: Decimal,
    p_dynamic: Decimal,
) -> Result<Money, CostError> {
    non_negative(&[
        ("t_fixed", t_fixed),
        ("p_fixed", p_fixed),
        ("n", n),
        ("r", r),
        ("p_dynamic", p_dynamic),
    ])?;
    money(t_fixed * p_fixed + n * (r * p_dynamic))
}

/// The five driver subtotals and their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostBreakdown {
    pub invocation: Money,
    pub compute: Money,
    pub state: Money,
    pub transfer: Money,
    pub baas: Money,
    pub total: Money,
}

impl CostBreakdown {
    pub fn new(
        invocation: Money,
        compute: Money,
        state: Money,
        transfer: Money,
        baas: Money,
    ) -> Self {
        CostBreakdown {
            invocation,
            compute,
            state,
            transfer,
            baas,
            total: invocation + compute + state + transfer + baas,
        }
    }

    /// `(name, amount)` for the five drivers, in report column order.
    pub fn drivers(&self) -> [(&'static str, Money); 5] {
        [
            ("invocation", self.invocation),
            ("compute", self.compute),
            ("baas", self.baas),
            ("transfer", self.transfer),
            ("state", self.state),
        ]
    }

    fn add_line(&mut self, driver: DriverCategory, amount: Money) {
        match driver {
            DriverCategory::Invocation => self.invocation += amount,
            DriverCategory::Compute => self.compute += amount,
            DriverCategory::DataTransfer => self.transfer += amount,
            DriverCategory::StateManagement => self.state += amount,
            DriverCategory::BaasFixed | DriverCategory::BaasDynamic => self.baas += amount,
        }
        self.total += amount;
    }
}

impl core::ops::Add for CostBreakdown {
    type Output = CostBreakdown;
    fn add(self, rhs: CostBreakdown) -> CostBreakdown {
        CostBreakdown {
            invocation: self.invocation + rhs.invocation,
            compute: self.compute + rhs.compute,
            state: self.state + rhs.state,
            transfer: self.transfer + rhs.transfer,
            baas: self.baas + rhs.baas,
            total: self.total + rhs.total,
        }
    }
}

impl core::iter::Sum for CostBreakdown {
    fn sum<I: Iterator<Item = CostBreakdown>>(iter: I) -> Self {
        iter.fold(CostBreakdown::default(), core::ops::Add::add)
    }
}

/// The charge of one catalog component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostLine {
    pub component_id: String,
    pub driver: DriverCategory,
    pub amount: Money,
}

/// A function's cost on one platform, itemized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionCost {
    pub function_id: String,
    pub platform_id: String,
    pub lines: Vec<CostLine>,
    pub breakdown: CostBreakdown,
}

impl FunctionCost {
    /// Fixed monthly service charges, by component id.
    pub fn fixed_charges(&self) -> impl Iterator<Item = &CostLine> {
        self.lines
            .iter()
            .filter(|l| l.driver == DriverCategory::BaasFixed)
    }
}

/// Itemized cost of `profile` running on `catalog`'s platform.
///
/// `latency_ms` is required only when the catalog prices execution per
/// millisecond (space layer).
pub fn function_cost_lines(
    profile: &FunctionProfile,
    catalog: &PlatformCatalog,
    latency_ms: Option<Decimal>,
) -> Result<FunctionCost, CostError> {
    let platform = catalog.platform_id.as_str();
    let n = profile.n;
    let mut lines = Vec::new();
    let mut breakdown = CostBreakdown::default();
    let mut push = |c: &crate::pricing::PriceComponent, amount: Money| {
        breakdown.add_line(c.driver, amount);
        lines.push(CostLine {
            component_id: c.id.clone(),
            driver: c.driver,
            amount,
        });
    };
    let invalid = |c: &crate::pricing::PriceComponent| CostError::InvalidComponent {
        component: c.id.clone(),
        driver: c.driver,
        unit: c.unit,
    };

    for c in &catalog.components {
        let amount = match (c.driver, c.unit) {
            (DriverCategory::Invocation, RateUnit::PerRequest) => invocation_cost(n, c.rate)?,
            (DriverCategory::Invocation, RateUnit::PerMsPerRequest) => {
                let ms = latency_ms.ok_or_else(|| WorkflowError::MissingLatency {
                    function: profile.function_id.clone(),
                    platform: platform.to_string(),
                })?;
                non_negative(&[("latency_ms", ms)])?;
                invocation_cost(n, ms * c.rate)?
            }
            (DriverCategory::Compute, RateUnit::PerGbSecond) => {
                compute_cost(n, profile.seconds_on(platform), profile.mem, c.rate)?
            }
            // Read/retrieval operations are priced per request.
            (DriverCategory::DataTransfer, RateUnit::PerRequest) => {
                transfer_cost(n, Decimal::ONE, c.rate, Decimal::ZERO, Decimal::ZERO)?
            }
            (DriverCategory::DataTransfer, RateUnit::PerGbTransferredIn) => {
                transfer_cost(n, profile.r_in, c.rate, Decimal::ZERO, Decimal::ZERO)?
            }
            (DriverCategory::DataTransfer, RateUnit::PerGbTransferredOut) => {
                transfer_cost(n, Decimal::ZERO, Decimal::ZERO, profile.r_out, c.rate)?
            }
            (DriverCategory::StateManagement, RateUnit::PerGbMonth) => {
                state_cost(profile.stored_gb(), c.rate)?
            }
            (DriverCategory::BaasFixed, RateUnit::PerMonthFixed)
            | (DriverCategory::BaasDynamic, RateUnit::PerRequest | RateUnit::PerGbProcessed) => {
                continue
            }
            _ => return Err(invalid(c)),
        };
        push(c, amount);
    }

    for usage in profile.baas_on(platform) {
        let c =
            catalog
                .component(&usage.component_id)
                .ok_or_else(|| CostError::UnknownComponent {
                    component: usage.component_id.clone(),
                    platform: platform.to_string(),
                })?;
        let amount = match (c.driver, c.unit) {
            (DriverCategory::BaasFixed, RateUnit::PerMonthFixed) => baas_cost(
                usage.quantity,
                c.rate,
                Decimal::ZERO,
                Decimal::ZERO,
                Decimal::ZERO,
            )?,
            (DriverCategory::BaasDynamic, RateUnit::PerRequest | RateUnit::PerGbProcessed) => {
                baas_cost(Decimal::ZERO, Decimal::ZERO, n, usage.quantity, c.rate)?
            }
            (DriverCategory::BaasFixed | DriverCategory::BaasDynamic, _) => return Err(invalid(c)),
            _ => {
                return Err(CostError::NotBaas {
                    component: c.id.clone(),
                    platform: platform.to_string(),
                })
            }
        };
        push(c, amount);
    }

    Ok(FunctionCost {
        function_id: profile.function_id.clone(),
        platform_id: platform.to_string(),
        lines,
        breakdown,
    })
}

/// Per-driver cost of `profile` running on `catalog`'s platform.
pub fn function_cost(
    profile: &FunctionProfile,
    catalog: &PlatformCatalog,
    latency_ms: Option<Decimal>,
) -> Result<CostBreakdown, CostError> {
    function_cost_lines(profile, catalog, latency_ms).map(|fc| fc.breakdown)
}

/// Cost of a whole placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowCost {
    /// Per-function costs in workflow declaration order.
    pub functions: Vec<FunctionCost>,
    /// Fixed charges dropped because another function on the same platform
    /// already pays for that component this month.
    pub deduplicated: Money,
    pub total: CostBreakdown,
}

fn latency_for(
    latencies: Option<&LatencyTable>,
    catalog: &PlatformCatalog,
    function_id: &str,
) -> Option<Decimal> {
    if catalog.is_latency_priced() {
        latencies.and_then(|l| l.get(function_id, &catalog.platform_id))
    } else {
        None
    }
}

/// Sum of [`function_cost`] over the placement, with each fixed monthly
/// service charge paid once per (platform, component).
pub fn workflow_cost_lines(
    workflow: &WorkflowSpec,
    placement: &Placement,
    catalogs: &CatalogSet,
    latencies: Option<&LatencyTable>,
) -> Result<WorkflowCost, CostError> {
    let mut functions = Vec::with_capacity(workflow.functions().len());
    for profile in workflow.functions() {
        let platform = placement.require(&profile.function_id)?;
        let catalog = catalogs
            .get(platform)
            .ok_or_else(|| CostError::UnknownPlatform(platform.to_string()))?;
        let latency = latency_for(latencies, catalog, &profile.function_id);
        functions.push(function_cost_lines(profile, catalog, latency)?);
    }

    // (platform, component) -> (sum, max) of the fixed charges
    let mut fixed: BTreeMap<(&str, &str), (Money, Money)> = BTreeMap::new();
    for fc in &functions {
        for line in fc.fixed_charges() {
            let slot = fixed
                .entry((fc.platform_id.as_str(), line.component_id.as_str()))
                .or_default();
            slot.0 += line.amount;
            slot.1 = slot.1.max(line.amount);
        }
    }
    let deduplicated = money(
        fixed
            .values()
            .map(|(sum, max)| sum.value() - max.value())
            .sum(),
    )?;

    let mut total: CostBreakdown = functions.iter().map(|f| f.breakdown).sum();
    total.baas = money(total.baas.value() - deduplicated.value())?;
    total.total = money(total.total.value() - deduplicated.value())?;
    Ok(WorkflowCost {
        functions,
        deduplicated,
        total,
    })
}

pub fn workflow_cost(
    workflow: &WorkflowSpec,
    placement: &Placement,
    catalogs: &CatalogSet,
    latencies: Option<&LatencyTable>,
) -> Result<CostBreakdown, CostError> {
    workflow_cost_lines(workflow, placement, catalogs, latencies).map(|w| w.total)
}

/// Affine cost in monthly request volume: `fixed + slope * n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostCurve {
    pub fixed: Money,
    /// Marginal cost per request.
    pub slope: Money,
}

impl CostCurve {
    pub fn new(fixed: Money, slope: Money) -> Self {
        CostCurve { fixed, slope }
    }

    pub fn evaluate(&self, n: Decimal) -> Decimal {
        self.fixed.value() + self.slope.value() * n
    }

    /// `(n, cost)` at each requested volume.
    pub fn sample(&self, volumes: &[Decimal]) -> Vec<(Decimal, Decimal)> {
        volumes.iter().map(|&n| (n, self.evaluate(n))).collect()
    }
}

/// The cost curve of a placement: intercept at zero volume, slope equal to the
/// marginal cost of one request.
pub fn cost_curve(
    workflow: &WorkflowSpec,
    placement: &Placement,
    catalogs: &CatalogSet,
    latencies: Option<&LatencyTable>,
) -> Result<CostCurve, CostError> {
    let at = |n: Decimal| workflow_cost(&workflow.at_volume(n), placement, catalogs, latencies);
    let fixed = at(Decimal::ZERO)?.total;
    let one = at(Decimal::ONE)?.total;
    Ok(CostCurve {
        fixed,
        slope: money(one.value() - fixed.value())?,
    })
}

/// The cost curve of one function on one platform.
pub fn function_curve(
    profile: &FunctionProfile,
    catalog: &PlatformCatalog,
    latency_ms: Option<Decimal>,
) -> Result<CostCurve, CostError> {
    let fixed = function_cost(&profile.at_volume(Decimal::ZERO), catalog, latency_ms)?.total;
    let one = function_cost(&profile.at_volume(Decimal::ONE), catalog, latency_ms)?.total;
    Ok(CostCurve {
        fixed,
        slope: money(one.value() - fixed.value())?,
    })
}

/// Volume at which two cost curves are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossoverPoint {
    /// Requests per month.
    pub n_star: Decimal,
    pub cost_at_crossover: Decimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossover {
    At(CrossoverPoint),
    /// Parallel curves, or an intersection at negative volume.
    None,
    /// The curves are identical.
    Coincident,
}

impl Crossover {
    pub fn point(self) -> Option<CrossoverPoint> {
        match self {
            Crossover::At(p) => Some(p),
            _ => None,
        }
    }
}

/// Where `a` and `b` intersect at a non-negative volume.
pub fn crossover(a: &CostCurve, b: &CostCurve) -> Crossover {
    if a.slope == b.slope {
        return if a.fixed == b.fixed {
            Crossover::Coincident
        } else {
            Crossover::None
        };
    }
    let n_star = (b.fixed.value() - a.fixed.value()) / (a.slope.value() - b.slope.value());
    if n_star.is_sign_negative() && !n_star.is_zero() {
        return Crossover::None;
    }
    Crossover::At(CrossoverPoint {
        n_star,
        cost_at_crossover: a.evaluate(n_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{Layer, PriceComponent, Scale};
    use crate::workflow::{BaasUsage, StateBasis};
    use alloc::vec;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Money {
        Money::parse(s).unwrap()
    }

    const MILLION: &str = "1000000";

    #[test]
    fn invocation_examples() {
        assert_eq!(
            invocation_cost(d(MILLION), d("0.0000002")).unwrap(),
            m("0.20")
        );
        assert_eq!(
            invocation_cost(Decimal::ZERO, d("0.5")).unwrap(),
            Money::ZERO
        );
        assert_eq!(
            invocation_cost(d("60000000"), d("0.0000004")).unwrap(),
            m("24")
        );
        assert!(matches!(
            invocation_cost(d("-1"), d("1")),
            Err(CostError::Domain { name: "n", .. })
        ));
    }

    #[test]
    fn compute_examples() {
        assert_eq!(
            compute_cost(d("1000"), d("1"), d("1"), d("0.01")).unwrap(),
            m("10")
        );
        assert_eq!(
            compute_cost(Decimal::ZERO, d("1"), d("1"), d("0.01")).unwrap(),
            Money::ZERO
        );
        // Per-request cost 2.13e-7 with t = 0.2 s and mem = 0.5 GB back-solves
        // the GB-second price to 2.13e-6.
        let p_gbs = d("0.000000213") / (d("0.2") * d("0.5"));
        assert_eq!(p_gbs, d("0.00000213"));
        assert_eq!(
            compute_cost(d(MILLION), d("0.2"), d("0.5"), p_gbs).unwrap(),
            m("0.213")
        );
        assert!(compute_cost(d("1"), d("-0.1"), d("1"), d("1")).is_err());
    }

    #[test]
    fn state_examples() {
        assert_eq!(state_cost(d("1"), d("0.269")).unwrap(), m("0.269"));
        assert_eq!(state_cost(Decimal::ZERO, d("0.269")).unwrap(), Money::ZERO);
        assert_eq!(state_cost(d("1"), d("0.231")).unwrap(), m("0.231"));
        assert!(state_cost(d("1"), d("-0.231")).is_err());
    }

    #[test]
    fn transfer_examples() {
        let rate = d("0.0000005645");
        assert_eq!(
            transfer_cost(d(MILLION), d("1"), rate, Decimal::ZERO, Decimal::ZERO).unwrap(),
            m("0.5645")
        );
        assert_eq!(
            transfer_cost(d(MILLION), Decimal::ZERO, rate, Decimal::ZERO, rate).unwrap(),
            Money::ZERO
        );
        assert_eq!(
            transfer_cost(d("2000000"), d("1"), rate, Decimal::ZERO, Decimal::ZERO).unwrap(),
            m("1.129")
        );
    }

    #[test]
    fn baas_examples() {
        assert_eq!(
            baas_cost(d("1"), d("13.7376"), d(MILLION), d("1"), d("0.00000124")).unwrap(),
            m("14.9776")
        );
        assert_eq!(
            baas_cost(Decimal::ZERO, d("13.7376"), Decimal::ZERO, d("1"), d("1")).unwrap(),
            Money::ZERO
        );
        assert_eq!(
            baas_cost(d("1"), d("61.056"), d(MILLION), d("1"), d("0.0000002")).unwrap(),
            m("61.256")
        );
    }

    fn toy_catalog() -> PlatformCatalog {
        use DriverCategory::*;
        use RateUnit::*;
        PlatformCatalog::build(
            "toy",
            Layer::Cloud,
            false,
            vec![
                PriceComponent::new("inv", Invocation, PerRequest, d("1"), Scale::PerMillion),
                PriceComponent::new("cpu", Compute, PerGbSecond, d("10"), Scale::PerMillion),
                PriceComponent::new(
                    "in",
                    DataTransfer,
                    PerGbTransferredIn,
                    d("0.01"),
                    Scale::Unit,
                ),
                PriceComponent::new(
                    "out",
                    DataTransfer,
                    PerGbTransferredOut,
                    d("0.09"),
                    Scale::Unit,
                ),
                PriceComponent::new("store", StateManagement, PerGbMonth, d("0.02"), Scale::Unit),
                PriceComponent::new("ml", BaasFixed, PerMonthFixed, d("5"), Scale::Unit),
                PriceComponent::new("etl", BaasDynamic, PerGbProcessed, d("0.5"), Scale::Unit),
            ],
        )
        .unwrap()
    }

    fn toy_profile(id: &str) -> FunctionProfile {
        let mut f = FunctionProfile::new(id);
        f.n = d(MILLION);
        f.t = d("0.1");
        f.mem = d("0.5");
        f.d = d("2");
        f.r_in = d("0.001");
        f.r_out = d("0.002");
        f.baas_usage = vec![
            BaasUsage::new("ml", d("1")),
            BaasUsage::new("etl", d("0.0001")),
        ];
        f
    }

    #[test]
    fn function_cost_itemizes_each_driver() {
        let b = function_cost(&toy_profile("f"), &toy_catalog(), None).unwrap();
        assert_eq!(b.invocation, m("1"));
        assert_eq!(b.compute, m("0.5"));
        assert_eq!(b.transfer, m("10") + m("180"));
        assert_eq!(b.state, m("0.04"));
        assert_eq!(b.baas, m("5") + m("50"));
        assert_eq!(
            b.total,
            b.invocation + b.compute + b.transfer + b.state + b.baas
        );
    }

    #[test]
    fn unknown_and_non_baas_usage() {
        let mut f = toy_profile("f");
        f.baas_usage.push(BaasUsage::new("missing", d("1")));
        assert!(matches!(
            function_cost(&f, &toy_catalog(), None),
            Err(CostError::UnknownComponent { .. })
        ));
        let mut f = toy_profile("f");
        f.baas_usage = vec![BaasUsage::new("inv", d("1"))];
        assert!(matches!(
            function_cost(&f, &toy_catalog(), None),
            Err(CostError::NotBaas { .. })
        ));
        // Usage restricted to other platforms is ignored here.
        let mut f = toy_profile("f");
        f.baas_usage = vec![BaasUsage::new("missing", d("1")).on(&["elsewhere"])];
        assert!(function_cost(&f, &toy_catalog(), None).is_ok());
    }

    #[test]
    fn latency_priced_platform_needs_latency() {
        let leo = PlatformCatalog::build(
            "leo",
            Layer::Space,
            true,
            vec![PriceComponent::new(
                "exec",
                DriverCategory::Invocation,
                RateUnit::PerMsPerRequest,
                d("49"),
                Scale::PerMillion,
            )],
        )
        .unwrap();
        let mut f = FunctionProfile::new("retrieval");
        f.n = d(MILLION);
        assert!(matches!(
            function_cost(&f, &leo, None),
            Err(CostError::Workflow(WorkflowError::MissingLatency { .. }))
        ));
        let b = function_cost(&f, &leo, Some(d("69.6"))).unwrap();
        assert_eq!(b.total, m("3410.4"));
        assert_eq!(b.invocation, b.total);
    }

    #[test]
    fn fixed_charges_paid_once_per_platform() {
        let cats = CatalogSet::new([toy_catalog()]).unwrap();
        let wf = WorkflowSpec::chain("w", vec![toy_profile("a"), toy_profile("b")]).unwrap();
        let placement = Placement::uniform(&wf, "toy");
        let wc = workflow_cost_lines(&wf, &placement, &cats, None).unwrap();
        assert_eq!(wc.deduplicated, m("5"));
        let summed: CostBreakdown = wc.functions.iter().map(|f| f.breakdown).sum();
        assert_eq!(wc.total.total.value(), summed.total.value() - d("5"));
        assert_eq!(wc.total.baas.value(), summed.baas.value() - d("5"));
    }

    #[test]
    fn workflow_cost_errors() {
        let cats = CatalogSet::new([toy_catalog()]).unwrap();
        let wf = WorkflowSpec::chain("w", vec![toy_profile("a")]).unwrap();
        assert!(matches!(
            workflow_cost(&wf, &Placement::default(), &cats, None),
            Err(CostError::Workflow(WorkflowError::UnplacedFunction(_)))
        ));
        assert_eq!(
            workflow_cost(&wf, &Placement::uniform(&wf, "nowhere"), &cats, None),
            Err(CostError::UnknownPlatform("nowhere".into()))
        );
    }

    #[test]
    fn curve_matches_cost_at_volume() {
        let cats = CatalogSet::new([toy_catalog()]).unwrap();
        let mut p = toy_profile("a");
        p.state_basis = StateBasis::PerRequest;
        p.d = d("0.000001");
        let wf = WorkflowSpec::chain("w", vec![p]).unwrap();
        let placement = Placement::uniform(&wf, "toy");
        let curve = cost_curve(&wf, &placement, &cats, None).unwrap();
        assert_eq!(curve.fixed, m("5"));
        for n in ["0", "1", "12345", "2500000.5"] {
            let n = d(n);
            let direct = workflow_cost(&wf.at_volume(n), &placement, &cats, None)
                .unwrap()
                .total;
            assert_eq!(curve.evaluate(n), direct.value());
        }
    }

    #[test]
    fn crossover_examples() {
        let x86 = CostCurve::new(m("13.7376"), m("0.000003571"));
        let gcp = CostCurve::new(m("61.056"), m("0.000001378"));
        let p = crossover(&x86, &gcp).point().unwrap();
        assert!((p.n_star / d(MILLION) - d("21.5770")).abs() < d("0.001"));
        assert!((p.cost_at_crossover - d("90.7891")).abs() < d("0.001"));

        let parallel = CostCurve::new(m("1"), m("0.000003571"));
        assert_eq!(crossover(&x86, &parallel), Crossover::None);
        assert_eq!(crossover(&x86, &x86), Crossover::Coincident);
        // Lines that met at negative volume.
        let above = CostCurve::new(m("20"), m("0.000004"));
        assert_eq!(crossover(&x86, &above), Crossover::None);
        // Equal intercepts cross at zero.
        let fork = CostCurve::new(m("13.7376"), m("0.000001"));
        assert_eq!(
            crossover(&x86, &fork).point().unwrap().n_star,
            Decimal::ZERO
        );
    }
}
