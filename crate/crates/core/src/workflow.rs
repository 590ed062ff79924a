//! Workflow DAGs, per-function workload quantities, latencies and placements.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use rust_decimal::Decimal;

use crate::pricing::UnknownName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorkloadClass {
    #[default]
    DataIntensive,
    ComputeIntensive,
}

impl WorkloadClass {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadClass::DataIntensive => "data_intensive",
            WorkloadClass::ComputeIntensive => "compute_intensive",
        }
    }
}

impl FromStr for WorkloadClass {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "data_intensive" => Ok(WorkloadClass::DataIntensive),
            "compute_intensive" => Ok(WorkloadClass::ComputeIntensive),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

/// How the stored-state quantity `d` relates to request volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateBasis {
    /// `d` GB are retained for the billing month regardless of volume.
    #[default]
    Monthly,
    /// `d` GB are retained per request, so the stored volume is `n * d`.
    PerRequest,
}

impl StateBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            StateBasis::Monthly => "monthly",
            StateBasis::PerRequest => "per_request",
        }
    }
}

impl FromStr for StateBasis {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monthly" => Ok(StateBasis::Monthly),
            "per_request" => Ok(StateBasis::PerRequest),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

/// Use of one backend service by a function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaasUsage {
    pub component_id: String,
    /// Months for fixed-price components; GB (or request units) per request
    /// for dynamically priced ones.
    pub quantity: Decimal,
    /// Platforms on which the service is used. `None` means every platform.
    pub platforms: Option<Vec<String>>,
}

impl BaasUsage {
    pub fn new(component_id: &str, quantity: Decimal) -> Self {
        BaasUsage {
            component_id: component_id.to_string(),
            quantity,
            platforms: None,
        }
    }

    pub fn on(mut self, platforms: &[&str]) -> Self {
        self.platforms = Some(platforms.iter().map(|p| p.to_string()).collect());
        self
    }

    pub fn applies_to(&self, platform_id: &str) -> bool {
        self.platforms
            .as_ref()
            .is_none_or(|ps| ps.iter().any(|p| p == platform_id))
    }
}

/// Workload quantities of one function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionProfile {
    pub function_id: String,
    /// Requests per billing month (real-valued).
    pub n: Decimal,
    /// Compute seconds per request.
    pub t: Decimal,
    /// Per-platform compute seconds, overriding `t`.
    pub t_by_platform: BTreeMap<String, Decimal>,
    /// Allocated memory in GB.
    pub mem: Decimal,
    /// Stored state in GB, interpreted through `state_basis`.
    pub d: Decimal,
    pub state_basis: StateBasis,
    /// GB moved in per request.
    pub r_in: Decimal,
    /// GB moved out per request.
    pub r_out: Decimal,
    pub baas_usage: Vec<BaasUsage>,
    pub workload_class: WorkloadClass,
}

impl FunctionProfile {
    pub fn new(function_id: &str) -> Self {
        FunctionProfile {
            function_id: function_id.to_string(),
            n: Decimal::ZERO,
            t: Decimal::ZERO,
            t_by_platform: BTreeMap::new(),
            mem: Decimal::ZERO,
            d: Decimal::ZERO,
            state_basis: StateBasis::Monthly,
            r_in: Decimal::ZERO,
            r_out: Decimal::ZERO,
            baas_usage: Vec::new(),
            workload_class: WorkloadClass::DataIntensive,
        }
    }

    /// Compute seconds per request on `platform_id`.
    pub fn seconds_on(&self, platform_id: &str) -> Decimal {
        self.t_by_platform
            .get(platform_id)
            .copied()
            .unwrap_or(self.t)
    }

    /// GB of state retained for the billing month.
    pub fn stored_gb(&self) -> Decimal {
        match self.state_basis {
            StateBasis::Monthly => self.d,
            StateBasis::PerRequest => self.n * self.d,
        }
    }

    pub fn baas_on<'a>(&'a self, platform_id: &'a str) -> impl Iterator<Item = &'a BaasUsage> + 'a {
        self.baas_usage
            .iter()
            .filter(move |u| u.applies_to(platform_id))
    }

    /// The same profile at a different monthly request volume.
    pub fn at_volume(&self, n: Decimal) -> Self {
        FunctionProfile { n, ..self.clone() }
    }

    fn check_quantities(&self) -> Result<(), WorkflowError> {
        let mut fields: Vec<(&str, Decimal)> = vec![
            ("n", self.n),
            ("t", self.t),
            ("mem", self.mem),
            ("d", self.d),
            ("r_in", self.r_in),
            ("r_out", self.r_out),
        ];
        fields.extend(self.t_by_platform.values().map(|&t| ("t_by_platform", t)));
        fields.extend(
            self.baas_usage
                .iter()
                .map(|u| ("baas_usage.quantity", u.quantity)),
        );
        match fields
            .into_iter()
            .find(|(_, v)| v.is_sign_negative() && !v.is_zero())
        {
            Some((field, _)) => Err(WorkflowError::NegativeQuantity {
                function: self.function_id.clone(),
                field: field.to_string(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate function `{0}`")]
    DuplicateFunction(String),
    #[error("edge references unknown function `{0}`")]
    UnknownFunction(String),
    #[error("workflow has a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("function `{function}` has negative `{field}`")]
    NegativeQuantity { function: String, field: String },
    #[error("no latency for function `{function}` on platform `{platform}`")]
    MissingLatency { function: String, platform: String },
    #[error("function `{0}` is not placed")]
    UnplacedFunction(String),
}

/// A validated, acyclic workflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowSpec {
    workflow_id: String,
    functions: Vec<FunctionProfile>,
    edges: Vec<(String, String)>,
    // Indices into `functions` in a topological order.
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
}

impl WorkflowSpec {
    pub fn new(
        workflow_id: &str,
        functions: Vec<FunctionProfile>,
        edges: Vec<(String, String)>,
    ) -> Result<Self, WorkflowError> {
        if functions.is_empty() {
            return Err(WorkflowError::Schema(
                "workflow declares no functions".into(),
            ));
        }
        for (i, f) in functions.iter().enumerate() {
            if f.function_id.trim().is_empty() {
                return Err(WorkflowError::Schema("function id is empty".into()));
            }
            if functions[..i]
                .iter()
                .any(|g| g.function_id == f.function_id)
            {
                return Err(WorkflowError::DuplicateFunction(f.function_id.clone()));
            }
            f.check_quantities()?;
        }
        let index = |id: &str| {
            functions
                .iter()
                .position(|f| f.function_id == id)
                .ok_or_else(|| WorkflowError::UnknownFunction(id.to_string()))
        };
        let mut preds = vec![Vec::new(); functions.len()];
        let mut succs = vec![Vec::new(); functions.len()];
        for (from, to) in &edges {
            let (a, b) = (index(from)?, index(to)?);
            preds[b].push(a);
            succs[a].push(b);
        }

        // Kahn's algorithm, lowest declared index first for determinism.
        let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..functions.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(functions.len());
        while let Some(pos) = ready
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| i)
            .map(|(p, _)| p)
        {
            let v = ready.swap_remove(pos);
            order.push(v);
            for &w in &succs[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.push(w);
                }
            }
        }
        if order.len() != functions.len() {
            let stuck = (0..functions.len())
                .filter(|&i| indegree[i] > 0)
                .map(|i| functions[i].function_id.clone())
                .collect();
            return Err(WorkflowError::Cycle(stuck));
        }

        Ok(WorkflowSpec {
            workflow_id: workflow_id.to_string(),
            functions,
            edges,
            order,
            preds,
        })
    }

    /// A linear chain `f0 -> f1 -> ...` in declaration order.
    pub fn chain(
        workflow_id: &str,
        functions: Vec<FunctionProfile>,
    ) -> Result<Self, WorkflowError> {
        let edges = functions
            .windows(2)
            .map(|w| (w[0].function_id.clone(), w[1].function_id.clone()))
            .collect();
        WorkflowSpec::new(workflow_id, functions, edges)
    }

    pub fn workflow_id(&self) -> &str {
        &self.workflow_id
    }

    pub fn functions(&self) -> &[FunctionProfile] {
        &self.functions
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn function(&self, id: &str) -> Option<&FunctionProfile> {
        self.functions.iter().find(|f| f.function_id == id)
    }

    pub fn function_ids(&self) -> impl Iterator<Item = &str> {
        self.functions.iter().map(|f| f.function_id.as_str())
    }

    /// Indices of the functions in topological order.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Indices of the direct predecessors of function `index`.
    pub fn predecessors(&self, index: usize) -> &[usize] {
        &self.preds[index]
    }

    /// Every function at monthly request volume `n`.
    pub fn at_volume(&self, n: Decimal) -> Self {
        let mut out = self.clone();
        for f in &mut out.functions {
            f.n = n;
        }
        out
    }

    /// Replaces the profiles in place, keeping the structure. Ids must match.
    pub fn with_functions(&self, functions: Vec<FunctionProfile>) -> Result<Self, WorkflowError> {
        WorkflowSpec::new(&self.workflow_id, functions, self.edges.clone())
    }

    /// Length of the longest path through the DAG when node `i` weighs
    /// `weight(i)`.
    pub fn critical_path<E>(
        &self,
        mut weight: impl FnMut(usize) -> Result<Decimal, E>,
    ) -> Result<Decimal, E> {
        let mut finish = vec![Decimal::ZERO; self.functions.len()];
        let mut longest = Decimal::ZERO;
        for &v in &self.order {
            let start = self.preds[v]
                .iter()
                .map(|&p| finish[p])
                .max()
                .unwrap_or(Decimal::ZERO);
            finish[v] = start + weight(v)?;
            longest = longest.max(finish[v]);
        }
        Ok(longest)
    }
}

/// Assignment of every function to a platform.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Placement {
    pub assignments: BTreeMap<String, String>,
}

impl Placement {
    /// Every function of `workflow` on `platform_id`.
    pub fn uniform(workflow: &WorkflowSpec, platform_id: &str) -> Self {
        workflow
            .function_ids()
            .map(|f| (f.to_string(), platform_id.to_string()))
            .collect()
    }

    pub fn platform_of(&self, function_id: &str) -> Option<&str> {
        self.assignments.get(function_id).map(String::as_str)
    }

    pub fn assign(&mut self, function_id: &str, platform_id: &str) {
        self.assignments
            .insert(function_id.to_string(), platform_id.to_string());
    }

    /// The platform for `function_id`, or `UnplacedFunction`.
    pub fn require(&self, function_id: &str) -> Result<&str, WorkflowError> {
        self.platform_of(function_id)
            .ok_or_else(|| WorkflowError::UnplacedFunction(function_id.to_string()))
    }

    /// Platforms in workflow declaration order.
    pub fn ordered<'a>(
        &'a self,
        workflow: &'a WorkflowSpec,
    ) -> impl Iterator<Item = Option<&'a str>> + 'a {
        workflow.function_ids().map(move |f| self.platform_of(f))
    }
}

impl FromIterator<(String, String)> for Placement {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Placement {
            assignments: iter.into_iter().collect(),
        }
    }
}

/// Mean end-to-end latency in milliseconds per (function, platform).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LatencyTable {
    entries: BTreeMap<(String, String), Decimal>,
}

impl LatencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, function_id: &str, platform_id: &str, ms: Decimal) {
        self.entries
            .insert((function_id.to_string(), platform_id.to_string()), ms);
    }

    pub fn get(&self, function_id: &str, platform_id: &str) -> Option<Decimal> {
        self.entries
            .get(&(function_id.to_string(), platform_id.to_string()))
            .copied()
    }

    pub fn require(&self, function_id: &str, platform_id: &str) -> Result<Decimal, WorkflowError> {
        self.get(function_id, platform_id)
            .ok_or_else(|| WorkflowError::MissingLatency {
                function: function_id.to_string(),
                platform: platform_id.to_string(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, Decimal)> {
        self.entries
            .iter()
            .map(|((f, p), &ms)| (f.as_str(), p.as_str(), ms))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fills `platform` entries as `factor * latency on reference_platform`
    /// for every function that has a reference entry. Entries already present
    /// are kept.
    pub fn apply_factors<'a>(
        &mut self,
        reference_platform: &str,
        factors: impl IntoIterator<Item = (&'a str, Decimal)>,
    ) {
        let reference: Vec<(String, Decimal)> = self
            .entries
            .iter()
            .filter(|((_, p), _)| p == reference_platform)
            .map(|((f, _), &ms)| (f.clone(), ms))
            .collect();
        for (platform, factor) in factors {
            for (function, ms) in &reference {
                self.entries
                    .entry((function.clone(), platform.to_string()))
                    .or_insert_with(|| (*ms * factor).normalize());
            }
        }
    }

    /// The (function, platform) pairs from `pairs` that have no entry.
    pub fn missing<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Vec<(String, String)> {
        pairs
            .into_iter()
            .filter(|(f, p)| self.get(f, p).is_none())
            .map(|(f, p)| (f.to_string(), p.to_string()))
            .collect()
    }
}

/// End-to-end latency of `workflow` under `placement`: the longest path through
/// the DAG weighted by each function's latency on its assigned platform. On a
/// chain this is the plain sum.
pub fn workflow_latency(
    workflow: &WorkflowSpec,
    placement: &Placement,
    latencies: &LatencyTable,
) -> Result<Decimal, WorkflowError> {
    let functions = workflow.functions();
    workflow.critical_path(|i| {
        let id = &functions[i].function_id;
        latencies.require(id, placement.require(id)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn ids(names: &[&str]) -> Vec<FunctionProfile> {
        names.iter().map(|n| FunctionProfile::new(n)).collect()
    }

    fn edge(a: &str, b: &str) -> (String, String) {
        (a.into(), b.into())
    }

    #[test]
    fn chain_of_three() {
        let wf =
            WorkflowSpec::chain("deter", ids(&["retrieval", "processing", "inference"])).unwrap();
        assert_eq!(wf.functions().len(), 3);
        assert_eq!(wf.edges().len(), 2);
        assert_eq!(wf.topological_order(), &[0, 1, 2]);
    }

    #[test]
    fn single_function_no_edges() {
        let wf = WorkflowSpec::new("one", ids(&["a"]), vec![]).unwrap();
        assert_eq!(wf.functions().len(), 1);
    }

    #[test]
    fn two_cycle_rejected() {
        let err = WorkflowSpec::new("c", ids(&["a", "b"]), vec![edge("a", "b"), edge("b", "a")])
            .unwrap_err();
        assert!(matches!(err, WorkflowError::Cycle(ref nodes) if nodes.len() == 2));
    }

    #[test]
    fn self_loop_rejected() {
        let err = WorkflowSpec::new("c", ids(&["a"]), vec![edge("a", "a")]).unwrap_err();
        assert!(matches!(err, WorkflowError::Cycle(_)));
    }

    #[test]
    fn dangling_edge_rejected() {
        let err = WorkflowSpec::new("c", ids(&["a"]), vec![edge("a", "ghost")]).unwrap_err();
        assert_eq!(err, WorkflowError::UnknownFunction("ghost".into()));
    }

    #[test]
    fn duplicate_and_negative_rejected() {
        assert!(matches!(
            WorkflowSpec::new("c", ids(&["a", "a"]), vec![]),
            Err(WorkflowError::DuplicateFunction(_))
        ));
        let mut f = FunctionProfile::new("a");
        f.r_in = d("-0.1");
        assert!(matches!(
            WorkflowSpec::new("c", vec![f], vec![]),
            Err(WorkflowError::NegativeQuantity { .. })
        ));
    }

    #[test]
    fn chain_latency_is_sum() {
        let wf = WorkflowSpec::chain("deter", ids(&["r", "p", "i"])).unwrap();
        let mut lat = LatencyTable::new();
        lat.insert("r", "aws-x86", d("232"));
        lat.insert("p", "aws-x86", d("164"));
        lat.insert("i", "aws-x86", d("84"));
        let placement = Placement::uniform(&wf, "aws-x86");
        assert_eq!(workflow_latency(&wf, &placement, &lat).unwrap(), d("480"));
    }

    #[test]
    fn single_function_latency() {
        let wf = WorkflowSpec::new("one", ids(&["r"]), vec![]).unwrap();
        let mut lat = LatencyTable::new();
        lat.insert("r", "gcp", d("215"));
        assert_eq!(
            workflow_latency(&wf, &Placement::uniform(&wf, "gcp"), &lat).unwrap(),
            d("215")
        );
    }

    #[test]
    fn parallel_branches_take_max() {
        let wf = WorkflowSpec::new("par", ids(&["a", "b"]), vec![]).unwrap();
        let mut lat = LatencyTable::new();
        lat.insert("a", "x", d("100"));
        lat.insert("b", "x", d("300"));
        assert_eq!(
            workflow_latency(&wf, &Placement::uniform(&wf, "x"), &lat).unwrap(),
            d("300")
        );
    }

    #[test]
    fn missing_latency_and_unplaced() {
        let wf = WorkflowSpec::chain("c", ids(&["a", "b"])).unwrap();
        let mut lat = LatencyTable::new();
        lat.insert("a", "x", d("1"));
        let err = workflow_latency(&wf, &Placement::uniform(&wf, "x"), &lat).unwrap_err();
        assert_eq!(
            err,
            WorkflowError::MissingLatency {
                function: "b".into(),
                platform: "x".into()
            }
        );
        let mut partial = Placement::default();
        partial.assign("a", "x");
        assert_eq!(
            workflow_latency(&wf, &partial, &lat).unwrap_err(),
            WorkflowError::UnplacedFunction("b".into())
        );
    }

    #[test]
    fn factors_scale_reference_and_explicit_entries_win() {
        let mut lat = LatencyTable::new();
        lat.insert("r", "aws-x86", d("232"));
        lat.insert("p", "aws-x86", d("164"));
        lat.insert("p", "leo", d("49"));
        lat.apply_factors(
            "aws-x86",
            [("aws-lambda-edge", d("0.54")), ("leo", d("0.30"))],
        );
        assert_eq!(lat.get("r", "aws-lambda-edge"), Some(d("125.28")));
        assert_eq!(lat.get("p", "aws-lambda-edge"), Some(d("88.56")));
        assert_eq!(lat.get("r", "leo"), Some(d("69.6")));
        assert_eq!(lat.get("p", "leo"), Some(d("49")));
    }

    #[test]
    fn per_request_state_scales_with_volume() {
        let mut f = FunctionProfile::new("r");
        f.d = d("0.000001");
        f.state_basis = StateBasis::PerRequest;
        assert_eq!(f.at_volume(d("1000000")).stored_gb(), d("1"));
        f.state_basis = StateBasis::Monthly;
        assert_eq!(f.at_volume(d("1000000")).stored_gb(), d("0.000001"));
    }
}
