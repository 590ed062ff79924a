//! The `cosmos` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cosmos_core::cost::{
    cost_curve, crossover, function_curve, workflow_cost_lines, CostCurve, CostError, Crossover,
};
use cosmos_core::pricing::CatalogSet;
use cosmos_core::telemetry::{calibrate, group_stats, TelemetryError};
use cosmos_core::tradeoff::{
    optimize, pareto_front, placement_front, supported_front, Candidate, OptimizationConfig,
    ParetoPoint, Scope, TradeoffError, TradeoffProblem, WeightMode,
};
use cosmos_core::workflow::{LatencyTable, Placement, WorkflowError, WorkflowSpec};
use cosmos_core::{Decimal, Money};
use serde_json::{json, Value};

use crate::doc::{
    catalog_file_source, default_catalog_sources, load_catalogs, parse_decimal, to_pretty_json,
    CatalogSource, DocError, TradeoffTableDoc, WorkflowDoc,
};
use crate::manifest::RunManifest;
use crate::report::{scatter_svg, Cell, Format, PlotPoint, Precision, Table};
use crate::usage_log::{parse_usage_log, UsageLogError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Computation(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Computation(_) => EXIT_COMPUTATION,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl From<DocError> for CliError {
    fn from(e: DocError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<WorkflowError> for CliError {
    fn from(e: WorkflowError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CostError> for CliError {
    fn from(e: CostError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TradeoffError> for CliError {
    fn from(e: TradeoffError) -> Self {
        match e {
            TradeoffError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            TradeoffError::CapExceeded { .. } | TradeoffError::DegenerateAnchor { .. } => {
                CliError::Computation(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::NoData { .. } => CliError::Computation(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<UsageLogError> for CliError {
    fn from(e: UsageLogError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Computation(format!("{}: {e}", path.display()))
}

/// Cost, latency and placement analysis for serverless workflows across
/// edge, cloud and space platforms.
#[derive(Debug, Parser)]
#[command(name = "cosmos", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total cost per function and for the workflow.
    Cost(CostArgs),
    /// Cost per driver, with the individual price components.
    Breakdown(CostArgs),
    /// Cost as a function of monthly request volume.
    Curve(CurveArgs),
    /// Volume at which two platforms cost the same.
    Crossover(CrossoverArgs),
    /// Latency/cost points and their Pareto front.
    Pareto(ParetoArgs),
    /// Best placement under a budget and latency SLO.
    Optimize(OptimizeArgs),
    /// Latency statistics from an invocation log.
    Ingest(IngestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Workflow document.
    #[arg(long)]
    pub workflow: Option<PathBuf>,
    /// Catalog document; replaces a default catalog with the same platform id.
    #[arg(long = "catalog")]
    pub catalogs: Vec<PathBuf>,
    /// Platform id. Repeat to compare or choose between several.
    #[arg(long = "platform")]
    pub platforms: Vec<String>,
    /// Monthly requests per function, e.g. `1000000`, `1M` or `2.5M`.
    #[arg(long, value_parser = parse_volume)]
    pub volume: Option<Decimal>,
    /// Directory for full-precision reports and the run manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub common: Common,
    /// Place one function explicitly: `function=platform`.
    #[arg(long = "assign", value_parser = parse_assignment)]
    pub assign: Vec<(String, String)>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Restrict to one function.
    #[arg(long)]
    pub function: Option<String>,
    /// Largest volume sampled into the plot data.
    #[arg(long, value_parser = parse_volume, default_value = "25M")]
    pub max_volume: Decimal,
    /// Number of intervals between 0 and the largest volume.
    #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u32).range(1..=100_000))]
    pub steps: u32,
}

#[derive(Debug, Clone, Args)]
pub struct CrossoverArgs {
    #[command(flatten)]
    pub common: Common,
    /// Restrict to one function.
    #[arg(long)]
    pub function: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TradeoffInput {
    /// Tabulated (function, platform, latency, cost) points to use instead
    /// of pricing a workflow.
    #[arg(long, alias = "points")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: TradeoffInput,
    /// Evaluate whole-workflow placements instead of single functions.
    #[arg(long)]
    pub placements: bool,
    /// Also render the points as an SVG chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Workflow,
    PerFunction,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub input: TradeoffInput,
    /// Budget in USD.
    #[arg(long, value_parser = parse_positive)]
    pub budget: Option<Decimal>,
    /// Latency SLO in milliseconds.
    #[arg(long, value_parser = parse_positive)]
    pub latency_slo: Option<Decimal>,
    #[arg(long, value_enum, default_value_t = ScopeArg::Workflow)]
    pub scope: ScopeArg,
    /// Weight on cost (1/USD). Needs --beta; otherwise weights are 1/C* and 1/T*.
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    /// Weight on latency (1/ms).
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Invocation log CSV.
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

pub fn parse_volume(s: &str) -> Result<Decimal, String> {
    let t = s.trim();
    let (digits, factor) = match t.chars().last() {
        Some('M' | 'm') => (&t[..t.len() - 1], Decimal::from(1_000_000)),
        Some('K' | 'k') => (&t[..t.len() - 1], Decimal::from(1_000)),
        _ => (t, Decimal::ONE),
    };
    let v = parse_decimal(digits).ok_or_else(|| format!("`{s}` is not a request volume"))?;
    if v.is_sign_negative() && !v.is_zero() {
        return Err(format!("volume {s} is negative"));
    }
    Ok(v * factor)
}

fn parse_positive(s: &str) -> Result<Decimal, String> {
    match parse_decimal(s) {
        Some(v) if v > Decimal::ZERO => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((f, p)) if !f.is_empty() && !p.is_empty() => Ok((f.to_string(), p.to_string())),
        _ => Err(format!("`{s}` is not function=platform")),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut out = Output::default();
    let (name, common) = match command {
        Command::Cost(a) => ("cost", &a.common),
        Command::Breakdown(a) => ("breakdown", &a.common),
        Command::Curve(a) => ("curve", &a.common),
        Command::Crossover(a) => ("crossover", &a.common),
        Command::Pareto(a) => ("pareto", &a.common),
        Command::Optimize(a) => ("optimize", &a.common),
        Command::Ingest(a) => ("ingest", &a.common),
    };
    out.manifest = RunManifest::new(name);
    let result = match command {
        Command::Cost(a) => cmd_cost(a, false, &mut out),
        Command::Breakdown(a) => cmd_cost(a, true, &mut out),
        Command::Curve(a) => cmd_curve(a, &mut out),
        Command::Crossover(a) => cmd_crossover(a, &mut out),
        Command::Pareto(a) => cmd_pareto(a, &mut out),
        Command::Optimize(a) => cmd_optimize(a, &mut out),
        Command::Ingest(a) => cmd_ingest(a, &mut out),
    };
    // Reports are written even when optimization is infeasible.
    if let Some(dir) = &common.out {
        out.write_files(dir)?;
    }
    stdout
        .write_all(out.stdout.as_bytes())
        .map_err(|e| CliError::Computation(format!("stdout: {e}")))?;
    result
}

#[derive(Debug, Default)]
struct Output {
    stdout: String,
    files: Vec<(String, String)>,
    manifest: RunManifest,
}

impl Output {
    fn print(&mut self, s: &str) {
        self.stdout.push_str(s);
    }

    fn table(&mut self, table: &Table, format: Format) {
        self.print(&table.render(format, Precision::Display));
    }

    fn file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn write_files(&mut self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for (name, _) in &self.files {
            self.manifest.outputs.push(name.clone());
        }
        self.manifest.outputs.push("manifest.json".into());
        let manifest = self.manifest.to_json();
        for (name, content) in self
            .files
            .iter()
            .chain([&("manifest.json".to_string(), manifest)])
        {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| io_error(&path, e))?;
        }
        Ok(())
    }
}

struct Loaded {
    workflow: WorkflowSpec,
    latencies: LatencyTable,
    catalogs: CatalogSet,
}

fn catalog_sources(common: &Common) -> Result<Vec<CatalogSource>, CliError> {
    let mut sources = default_catalog_sources()?;
    for path in &common.catalogs {
        sources.push(catalog_file_source(path)?);
    }
    Ok(sources)
}

fn load_catalog_set(common: &Common, out: &mut Output) -> Result<CatalogSet, CliError> {
    let sources = catalog_sources(common)?;
    for s in &sources {
        out.manifest.add_input(&s.origin, s.text.as_bytes());
    }
    let catalogs = load_catalogs(&sources)?;
    out.manifest.catalogs = catalogs.platform_ids().map(str::to_string).collect();
    Ok(catalogs)
}

fn load(common: &Common, out: &mut Output) -> Result<Loaded, CliError> {
    let path = common
        .workflow
        .as_ref()
        .ok_or_else(|| CliError::Validation("--workflow is required".into()))?;
    let (doc, text) = WorkflowDoc::load(path)?;
    out.manifest
        .add_input(&path.display().to_string(), text.as_bytes());
    let input = doc.to_input(&path.display().to_string())?;
    let catalogs = load_catalog_set(common, out)?;
    let workflow = match common.volume {
        Some(n) => input.spec.at_volume(n),
        None => input.spec,
    };
    Ok(Loaded {
        workflow,
        latencies: input.latencies,
        catalogs,
    })
}

fn check_platforms(platforms: &[String], catalogs: &CatalogSet) -> Result<(), CliError> {
    for p in platforms {
        if catalogs.get(p).is_none() {
            let known: Vec<&str> = catalogs.platform_ids().collect();
            return Err(CliError::Validation(format!(
                "unknown platform `{p}` (known: {})",
                known.join(", ")
            )));
        }
    }
    Ok(())
}

/// The requested platforms, or every catalog when none were named.
fn platforms_or_all(common: &Common, catalogs: &CatalogSet) -> Result<Vec<String>, CliError> {
    check_platforms(&common.platforms, catalogs)?;
    Ok(if common.platforms.is_empty() {
        catalogs.platform_ids().map(str::to_string).collect()
    } else {
        common.platforms.clone()
    })
}

fn placements(args: &CostArgs, loaded: &Loaded) -> Result<Vec<Placement>, CliError> {
    let wf = &loaded.workflow;
    check_platforms(&args.common.platforms, &loaded.catalogs)?;
    let explicit: Vec<String> = args.assign.iter().map(|(_, p)| p.clone()).collect();
    check_platforms(&explicit, &loaded.catalogs)?;
    for (f, _) in &args.assign {
        if wf.function(f).is_none() {
            return Err(WorkflowError::UnknownFunction(f.clone()).into());
        }
    }
    let mut bases: Vec<Placement> = args
        .common
        .platforms
        .iter()
        .map(|p| Placement::uniform(wf, p))
        .collect();
    if bases.is_empty() {
        if args.assign.is_empty() {
            return Err(CliError::Validation("give --platform or --assign".into()));
        }
        bases.push(Placement::default());
    }
    for placement in &mut bases {
        for (f, p) in &args.assign {
            placement.assign(f, p);
        }
        for f in wf.function_ids() {
            placement.require(f)?;
        }
    }
    Ok(bases)
}

fn placement_label(wf: &WorkflowSpec, placement: &Placement) -> String {
    let platforms: Vec<&str> = placement.ordered(wf).map(|p| p.unwrap_or("?")).collect();
    let first = platforms.first().copied().unwrap_or("");
    if platforms.iter().all(|p| *p == first) {
        first.to_string()
    } else {
        platforms.join("/")
    }
}

const BREAKDOWN_COLUMNS: [&str; 8] = [
    "function",
    "platform",
    "invocation",
    "compute",
    "baas",
    "transfer",
    "state",
    "total",
];

fn breakdown_row(
    function: &str,
    platform: &str,
    b: &cosmos_core::cost::CostBreakdown,
) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![function.into(), platform.into()];
    row.extend(b.drivers().iter().map(|(_, m)| Cell::from(*m)));
    row.push(b.total.into());
    row
}

fn breakdown_json(b: &cosmos_core::cost::CostBreakdown) -> Value {
    let mut obj = serde_json::Map::new();
    for (name, m) in b.drivers() {
        obj.insert(name.into(), json!(m.to_string()));
    }
    obj.insert("total".into(), json!(b.total.to_string()));
    Value::Object(obj)
}

fn cmd_cost(args: &CostArgs, itemized: bool, out: &mut Output) -> Result<(), CliError> {
    let loaded = load(&args.common, out)?;
    let wf = &loaded.workflow;
    let mut breakdown = Table::new(&BREAKDOWN_COLUMNS);
    let mut totals = Table::new(&["function", "platform", "total"]);
    let mut lines = Table::new(&["function", "platform", "component", "driver", "amount"]);
    let mut reports = Vec::new();
    for placement in placements(args, &loaded)? {
        let cost = workflow_cost_lines(wf, &placement, &loaded.catalogs, Some(&loaded.latencies))?;
        let label = placement_label(wf, &placement);
        let mut functions = Vec::new();
        for fc in &cost.functions {
            breakdown.push(breakdown_row(
                &fc.function_id,
                &fc.platform_id,
                &fc.breakdown,
            ));
            totals.push(vec![
                fc.function_id.as_str().into(),
                fc.platform_id.as_str().into(),
                fc.breakdown.total.into(),
            ]);
            for l in &fc.lines {
                lines.push(vec![
                    fc.function_id.as_str().into(),
                    fc.platform_id.as_str().into(),
                    l.component_id.as_str().into(),
                    l.driver.as_str().into(),
                    l.amount.into(),
                ]);
            }
            functions.push(json!({
                "function": fc.function_id,
                "platform": fc.platform_id,
                "breakdown": breakdown_json(&fc.breakdown),
                "lines": fc.lines.iter().map(|l| json!({
                    "component": l.component_id,
                    "driver": l.driver.as_str(),
                    "amount": l.amount.to_string(),
                })).collect::<Vec<_>>(),
            }));
        }
        breakdown.push(breakdown_row("workflow", &label, &cost.total));
        totals.push(vec![
            "workflow".into(),
            label.as_str().into(),
            cost.total.total.into(),
        ]);
        reports.push(json!({
            "placement": placement.assignments,
            "functions": functions,
            "shared_fixed_deduplicated": cost.deduplicated.to_string(),
            "total": breakdown_json(&cost.total),
        }));
    }

    if itemized {
        out.table(&breakdown, args.common.format);
        if args.common.format == Format::Text {
            out.print("\n");
            out.table(&lines, Format::Text);
        }
    } else {
        out.table(&totals, args.common.format);
    }
    out.file("breakdown.csv", breakdown.to_csv(Precision::Full));
    out.file("lines.csv", lines.to_csv(Precision::Full));
    let volume = args.common.volume.map(|v| v.to_string());
    out.file(
        "report.json",
        to_pretty_json(&json!({
            "workflow_id": wf.workflow_id(),
            "currency": "USD",
            "volume": volume,
            "placements": reports,
        })),
    );
    Ok(())
}

struct NamedCurve {
    name: String,
    curve: CostCurve,
}

fn curves(
    common: &Common,
    function: Option<&str>,
    out: &mut Output,
) -> Result<Vec<NamedCurve>, CliError> {
    let loaded = load(common, out)?;
    let platforms = platforms_or_all(common, &loaded.catalogs)?;
    let wf = &loaded.workflow;
    let mut result = Vec::new();
    for p in &platforms {
        let curve = match function {
            Some(f) => {
                let profile = wf
                    .function(f)
                    .ok_or_else(|| CliError::from(WorkflowError::UnknownFunction(f.to_string())))?;
                let catalog = loaded.catalogs.get(p).expect("checked platform");
                let latency = loaded.latencies.get(f, p);
                function_curve(profile, catalog, latency)?
            }
            None => cost_curve(
                wf,
                &Placement::uniform(wf, p),
                &loaded.catalogs,
                Some(&loaded.latencies),
            )?,
        };
        result.push(NamedCurve {
            name: p.clone(),
            curve,
        });
    }
    Ok(result)
}

fn million() -> Decimal {
    Decimal::from(1_000_000)
}

fn cmd_curve(args: &CurveArgs, out: &mut Output) -> Result<(), CliError> {
    let curves = curves(&args.common, args.function.as_deref(), out)?;
    let mut summary = Table::new(&["platform", "fixed", "slope_per_million"]);
    let mut full = Table::new(&[
        "platform",
        "fixed",
        "slope_per_request",
        "slope_per_million",
    ]);
    for c in &curves {
        let per_million = c.curve.slope.value() * million();
        summary.push(vec![
            c.name.as_str().into(),
            c.curve.fixed.into(),
            per_million.into(),
        ]);
        full.push(vec![
            c.name.as_str().into(),
            c.curve.fixed.into(),
            c.curve.slope.into(),
            per_million.into(),
        ]);
    }
    let mut columns = vec!["requests"];
    columns.extend(curves.iter().map(|c| c.name.as_str()));
    let mut plot = Table::new(&columns);
    let steps = Decimal::from(args.steps);
    for i in 0..=args.steps {
        let n = args.max_volume * Decimal::from(i) / steps;
        let mut row = vec![Cell::Num(n)];
        row.extend(curves.iter().map(|c| Cell::Num(c.curve.evaluate(n))));
        plot.push(row);
    }
    if args.common.format == Format::Tsv {
        out.table(&plot, Format::Tsv);
    } else {
        out.table(&summary, args.common.format);
    }
    out.file("curves.csv", full.to_csv(Precision::Full));
    out.file("curve.tsv", plot.to_tsv(Precision::Full));
    Ok(())
}

fn cmd_crossover(args: &CrossoverArgs, out: &mut Output) -> Result<(), CliError> {
    if args.common.platforms.len() != 2 {
        return Err(CliError::Validation(
            "crossover needs exactly two --platform values".into(),
        ));
    }
    let curves = curves(&args.common, args.function.as_deref(), out)?;
    let (a, b) = (&curves[0], &curves[1]);
    let mut table = Table::new(&["a", "b", "result", "n_star", "n_star_millions", "cost"]);
    let mut row = vec![Cell::from(a.name.as_str()), Cell::from(b.name.as_str())];
    let message = match crossover(&a.curve, &b.curve) {
        Crossover::At(p) => {
            row.extend([
                Cell::from("crossover"),
                p.n_star.into(),
                (p.n_star / million()).into(),
                p.cost_at_crossover.into(),
            ]);
            None
        }
        Crossover::None => {
            row.extend(["none".into(), "".into(), "".into(), "".into()]);
            Some("the curves do not cross at any non-negative volume\n")
        }
        Crossover::Coincident => {
            row.extend(["coincident".into(), "".into(), "".into(), "".into()]);
            Some("the curves coincide: both platforms cost the same at every volume\n")
        }
    };
    table.push(row);
    out.table(&table, args.common.format);
    if let (Some(m), Format::Text) = (message, args.common.format) {
        out.print(m);
    }
    out.file("crossover.csv", table.to_csv(Precision::Full));
    Ok(())
}

struct Problem {
    problem: TradeoffProblem,
    workflow_id: String,
}

fn tradeoff_problem(
    common: &Common,
    input: &TradeoffInput,
    out: &mut Output,
) -> Result<Problem, CliError> {
    match &input.table {
        Some(path) => {
            if common.workflow.is_some() {
                return Err(CliError::Validation(
                    "give either --table or --workflow, not both".into(),
                ));
            }
            let (doc, text) = TradeoffTableDoc::load(path)?;
            out.manifest
                .add_input(&path.display().to_string(), text.as_bytes());
            let platforms = (!common.platforms.is_empty()).then_some(common.platforms.as_slice());
            if let Some(ps) = platforms {
                for p in ps {
                    if !doc.platforms.contains(p) {
                        return Err(CliError::Validation(format!("unknown platform `{p}`")));
                    }
                }
            }
            Ok(Problem {
                problem: doc.to_problem(&path.display().to_string(), platforms)?,
                workflow_id: doc.workflow_id,
            })
        }
        None => {
            let loaded = load(common, out)?;
            let platforms = platforms_or_all(common, &loaded.catalogs)?;
            let pairs: Vec<(&str, &str)> = loaded
                .workflow
                .function_ids()
                .flat_map(|f| platforms.iter().map(move |p| (f, p.as_str())))
                .collect();
            let missing = loaded.latencies.missing(pairs);
            if !missing.is_empty() {
                let names: Vec<String> =
                    missing.iter().map(|(f, p)| format!("({f}, {p})")).collect();
                return Err(CliError::Validation(format!(
                    "no latency for {}",
                    names.join(", ")
                )));
            }
            Ok(Problem {
                problem: TradeoffProblem::from_catalogs(
                    &loaded.workflow,
                    &platforms,
                    &loaded.catalogs,
                    &loaded.latencies,
                )?,
                workflow_id: loaded.workflow.workflow_id().to_string(),
            })
        }
    }
}

fn same_position(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.cost == b.cost && a.latency == b.latency
}

fn cmd_pareto(args: &ParetoArgs, out: &mut Output) -> Result<(), CliError> {
    let Problem { problem, .. } = tradeoff_problem(&args.common, &args.input, out)?;
    let mut points = if args.placements {
        let mut all = Vec::new();
        for choice in problem.assignments()? {
            let c = problem.candidate(&choice)?;
            let label = choice
                .iter()
                .map(|&p| problem.platforms()[p].as_str())
                .collect::<Vec<_>>()
                .join("/");
            all.push(ParetoPoint {
                label,
                cost: c.cost,
                latency: c.latency,
                placement: Some(c.placement),
            });
        }
        all
    } else {
        problem.function_points()?
    };
    let front = pareto_front(&points);
    let supported = supported_front(&points);

    // Per-function series fronts, for single-function views.
    let mut series: BTreeMap<String, Vec<ParetoPoint>> = BTreeMap::new();
    if !args.placements {
        for p in &points {
            let f = problem.functions()[points_function(&problem, p)].clone();
            series.entry(f).or_default().push(p.clone());
        }
    }
    let series_fronts: BTreeMap<String, Vec<ParetoPoint>> = series
        .iter()
        .map(|(f, ps)| (f.clone(), pareto_front(ps)))
        .collect();

    // Stable sort keeps input order among equal positions.
    points.sort_by_key(|p| (p.latency, p.cost));
    let mut table = Table::new(&[
        "label",
        "latency_ms",
        "cost_usd",
        "front",
        "supported",
        "series_front",
    ]);
    let flag = |b: bool| Cell::from(if b { "1" } else { "0" });
    for p in &points {
        let on = |set: &[ParetoPoint]| {
            set.iter()
                .any(|q| q.label == p.label && same_position(q, p))
        };
        let in_series = if args.placements {
            on(&front)
        } else {
            let f = &problem.functions()[points_function(&problem, p)];
            on(&series_fronts[f])
        };
        table.push(vec![
            p.label.as_str().into(),
            p.latency.into(),
            p.cost.into(),
            flag(on(&front)),
            flag(on(&supported)),
            flag(in_series),
        ]);
    }
    let mut front_table = Table::new(&["label", "latency_ms", "cost_usd"]);
    for p in &front {
        front_table.push(vec![
            p.label.as_str().into(),
            p.latency.into(),
            p.cost.into(),
        ]);
    }
    out.table(&table, args.common.format);
    if args.common.format == Format::Text {
        out.print(&format!(
            "\n{} points, {} on the Pareto front, {} on its convex (weighted-sum) part\n",
            points.len(),
            front.len(),
            supported.len()
        ));
    }
    out.file("pareto.tsv", table.to_tsv(Precision::Full));
    out.file("front.tsv", front_table.to_tsv(Precision::Full));
    if let Some(svg_path) = &args.svg {
        let plot: Vec<PlotPoint> = points
            .iter()
            .map(|p| PlotPoint {
                label: p.label.clone(),
                x: p.latency.try_into().unwrap_or(f64::NAN),
                y: p.cost.to_f64(),
                highlighted: supported
                    .iter()
                    .any(|q| q.label == p.label && same_position(q, p)),
            })
            .collect();
        let svg = scatter_svg("Latency vs cost", "Latency (ms)", "Cost (USD)", &plot);
        std::fs::write(svg_path, svg).map_err(|e| io_error(svg_path, e))?;
    }
    Ok(())
}

// Index of the function a single-function point belongs to.
fn points_function(problem: &TradeoffProblem, p: &ParetoPoint) -> usize {
    let placement = p
        .placement
        .as_ref()
        .expect("function points carry a placement");
    let (f, _) = placement.assignments.iter().next().expect("one assignment");
    problem
        .functions()
        .iter()
        .position(|x| x == f)
        .expect("known function")
}

fn candidate_json(c: &Candidate) -> Value {
    json!({
        "placement": c.placement.assignments,
        "cost": c.cost.to_string(),
        "latency_ms": c.latency.to_string(),
    })
}

fn cmd_optimize(args: &OptimizeArgs, out: &mut Output) -> Result<(), CliError> {
    let Problem {
        problem,
        workflow_id,
    } = tradeoff_problem(&args.common, &args.input, out)?;
    let config = OptimizationConfig {
        budget: args
            .budget
            .map(|b| Money::new(b).expect("parsed as positive")),
        latency_slo: args.latency_slo,
        weights: match (args.alpha, args.beta) {
            (Some(alpha), Some(beta)) => WeightMode::Manual { alpha, beta },
            _ => WeightMode::AutoPareto,
        },
        scope: match args.scope {
            ScopeArg::Workflow => Scope::Workflow,
            ScopeArg::PerFunction => Scope::PerFunction,
        },
    };
    let front = placement_front(&problem)?;
    let mut front_table = Table::new(&["label", "latency_ms", "cost_usd"]);
    for p in &front {
        front_table.push(vec![
            p.label.as_str().into(),
            p.latency.into(),
            p.cost.into(),
        ]);
    }
    out.file("front.tsv", front_table.to_tsv(Precision::Full));
    let constraints = json!({
        "budget": config.budget.map(|b| b.to_string()),
        "latency_slo_ms": config.latency_slo.map(|l| l.to_string()),
        "scope": match config.scope { Scope::Workflow => "workflow", Scope::PerFunction => "per_function" },
    });

    match optimize(&problem, &config) {
        Ok(r) => {
            let mut table = Table::new(&["function", "platform", "cost", "latency_ms"]);
            for (f, name) in problem.functions().iter().enumerate() {
                let platform = r.best.platform_of(name).expect("total placement");
                let p = problem
                    .platforms()
                    .iter()
                    .position(|x| x == platform)
                    .expect("known platform");
                table.push(vec![
                    name.as_str().into(),
                    platform.into(),
                    problem.cell_cost(f, p).into(),
                    problem.cell_latency(f, p)?.into(),
                ]);
            }
            let mut summary = Table::new(&["quantity", "value"]);
            let f64_cell = |v: f64| Cell::Num(Decimal::try_from(v).unwrap_or_default());
            summary.push(vec!["cost".into(), r.cost.into()]);
            summary.push(vec!["latency_ms".into(), r.latency.into()]);
            summary.push(vec!["objective".into(), f64_cell(r.objective)]);
            summary.push(vec!["alpha".into(), f64_cell(r.alpha)]);
            summary.push(vec!["beta".into(), f64_cell(r.beta)]);
            summary.push(vec!["c_star".into(), r.c_star.into()]);
            summary.push(vec!["t_star_ms".into(), r.t_star.into()]);
            summary.push(vec![
                "feasible".into(),
                Decimal::from(r.feasible_count).into(),
            ]);
            summary.push(vec![
                "evaluated".into(),
                Decimal::from(r.total_count).into(),
            ]);
            match args.common.format {
                Format::Json => out.print(&to_pretty_json(&json!({
                    "placement": table.to_json_value(Precision::Display),
                    "summary": summary.to_json_value(Precision::Display),
                }))),
                format => {
                    out.table(&table, format);
                    if format == Format::Text {
                        out.print("\n");
                    }
                    out.table(&summary, format);
                }
            }
            out.file(
                "optimize.json",
                to_pretty_json(&json!({
                    "workflow_id": workflow_id,
                    "feasible": true,
                    "constraints": constraints,
                    "placement": r.best.assignments,
                    "cost": r.cost.to_string(),
                    "latency_ms": r.latency.to_string(),
                    "objective": r.objective,
                    "alpha": r.alpha,
                    "beta": r.beta,
                    "c_star": r.c_star.to_string(),
                    "c_star_placement": r.c_star_placement.assignments,
                    "t_star_ms": r.t_star.to_string(),
                    "t_star_placement": r.t_star_placement.assignments,
                    "feasible_count": r.feasible_count,
                    "evaluated": r.total_count,
                })),
            );
            Ok(())
        }
        Err(TradeoffError::Infeasible(info)) => {
            let mut message = format!(
                "no placement meets the constraints; C* = {} USD, T* = {} ms",
                info.c_star.rounded(),
                cosmos_core::money::round_display(info.t_star)
            );
            if let Some(n) = &info.nearest {
                message.push_str(&format!(
                    "; nearest {} costs {} USD at {} ms",
                    placement_text(&problem, &n.placement),
                    n.cost.rounded(),
                    cosmos_core::money::round_display(n.latency)
                ));
            }
            out.file(
                "optimize.json",
                to_pretty_json(&json!({
                    "workflow_id": workflow_id,
                    "feasible": false,
                    "constraints": constraints,
                    "c_star": info.c_star.to_string(),
                    "t_star_ms": info.t_star.to_string(),
                    "nearest": info.nearest.as_ref().map(candidate_json),
                    "evaluated": info.total_count,
                })),
            );
            Err(CliError::Infeasible(message))
        }
        Err(e) => Err(e.into()),
    }
}

fn placement_text(problem: &TradeoffProblem, placement: &Placement) -> String {
    let parts: Vec<String> = problem
        .functions()
        .iter()
        .map(|f| format!("{f}={}", placement.platform_of(f).unwrap_or("?")))
        .collect();
    format!("({})", parts.join(", "))
}

fn cmd_ingest(args: &IngestArgs, out: &mut Output) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.log)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.log.display())))?;
    out.manifest
        .add_input(&args.log.display().to_string(), &bytes);
    let records = parse_usage_log(bytes.as_slice())?;
    let (stats, failed_only) = group_stats(&records);
    if stats.is_empty() {
        return Err(CliError::Computation(format!(
            "{}: no ok-status records to aggregate",
            args.log.display()
        )));
    }

    let mut table = Table::new(&[
        "function",
        "platform",
        "count",
        "mean_ms",
        "min_ms",
        "max_ms",
        "p90_ms",
        "errors",
        "mean_bytes_in",
        "mean_bytes_out",
    ]);
    let mut keys: Vec<&(String, String)> = stats.keys().chain(failed_only.keys()).collect();
    keys.sort();
    for key in keys {
        let (f, p) = key;
        let row = match stats.get(key) {
            Some(s) => vec![
                f.as_str().into(),
                p.as_str().into(),
                Decimal::from(s.latency.count).into(),
                s.latency.mean.into(),
                s.latency.min.into(),
                s.latency.max.into(),
                s.latency.p90.into(),
                Decimal::from(s.errors).into(),
                s.mean_bytes_in.into(),
                s.mean_bytes_out.into(),
            ],
            None => {
                let mut row: Vec<Cell> =
                    vec![f.as_str().into(), p.as_str().into(), Decimal::ZERO.into()];
                row.extend(std::iter::repeat_n(Cell::from(""), 4));
                row.push(Decimal::from(failed_only[key]).into());
                row.extend([Cell::from(""), Cell::from("")]);
                row
            }
        };
        table.push(row);
    }
    out.table(&table, args.common.format);
    let errors: u64 =
        stats.values().map(|s| s.errors).sum::<u64>() + failed_only.values().sum::<u64>();
    if args.common.format == Format::Text {
        out.print(&format!(
            "\n{} records, {} ok, {} error (excluded)\n",
            records.len(),
            records.len() as u64 - errors,
            errors
        ));
    }
    out.file("stats.csv", table.to_csv(Precision::Full));

    if let Some(path) = &args.common.workflow {
        let (doc, text) = WorkflowDoc::load(path)?;
        out.manifest
            .add_input(&path.display().to_string(), text.as_bytes());
        let input = doc.to_input(&path.display().to_string())?;
        let platforms = if args.common.platforms.is_empty() {
            let mut ps: Vec<String> = stats.keys().map(|(_, p)| p.clone()).collect();
            ps.sort();
            ps.dedup();
            ps
        } else {
            args.common.platforms.clone()
        };
        let (spec, measured) = calibrate(&input.spec, &stats, &platforms)?;
        let mut merged = input.latencies.clone();
        for (f, p, ms) in measured.iter() {
            merged.insert(f, p, ms);
        }
        let calibrated = WorkflowDoc::from_input(&spec, &merged, &doc.description);
        out.file("calibrated-workflow.json", to_pretty_json(&calibrated));
    }
    Ok(())
}
