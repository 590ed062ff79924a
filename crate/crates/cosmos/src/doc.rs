//! JSON documents for catalogs, workflows and tabulated trade-off points.
//!
//! Decimal fields are written as strings so that rates such as `0.0000002`
//! survive a round trip unchanged. Plain JSON numbers are accepted on input.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cosmos_core::pricing::{
    CatalogError, CatalogSet, Layer, PlatformCatalog, PriceComponent, CURRENCY,
};
use cosmos_core::tradeoff::{TradeoffError, TradeoffProblem};
use cosmos_core::workflow::{
    BaasUsage, FunctionProfile, LatencyTable, WorkflowError, WorkflowSpec,
};
use cosmos_core::{Decimal, Money};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{path}: {source}")]
    Catalog { path: String, source: CatalogError },
    #[error("{path}: {source}")]
    Workflow { path: String, source: WorkflowError },
    #[error("{path}: {source}")]
    Table { path: String, source: TradeoffError },
}

/// A decimal that serializes as a string.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Num(pub Decimal);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0.normalize())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal number or numeric string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                parse_decimal(v)
                    .map(Num)
                    .ok_or_else(|| E::custom(format!("`{v}` is not a decimal number")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(Decimal::from(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(Decimal::from(v)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                // Shortest round-trip formatting recovers the literal as written.
                self.visit_str(&v.to_string())
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

/// Parses plain or scientific decimal notation.
pub fn parse_decimal(s: &str) -> Option<Decimal> {
    let s = s.trim();
    Decimal::from_str(s)
        .ok()
        .or_else(|| Decimal::from_scientific(s).ok())
}

fn field_err(path: &str, message: impl Into<String>) -> DocError {
    DocError::Field {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse_name<T: FromStr>(path: &str, what: &str, value: &str) -> Result<T, DocError> {
    value
        .parse()
        .map_err(|_| field_err(path, format!("unknown {what} `{value}`")))
}

pub fn read_text(path: &Path) -> Result<String, DocError> {
    std::fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn from_json<'a, T: Deserialize<'a>>(origin: &str, text: &'a str) -> Result<T, DocError> {
    serde_json::from_str(text).map_err(|source| DocError::Json {
        path: origin.to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    pub driver: String,
    pub unit: String,
    pub rate: Num,
    /// Quantity the rate is quoted for: `1`, `1M`, `hour` or `month`.
    #[serde(default = "unit_scale")]
    pub scale: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

fn unit_scale() -> String {
    "1".into()
}

fn usd() -> String {
    CURRENCY.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDoc {
    pub platform_id: String,
    pub layer: String,
    #[serde(default)]
    pub hypothetical: bool,
    #[serde(default = "usd")]
    pub currency: String,
    pub components: Vec<ComponentDoc>,
}

impl CatalogDoc {
    pub fn parse(origin: &str, text: &str) -> Result<Self, DocError> {
        from_json(origin, text)
    }

    pub fn to_catalog(&self, origin: &str) -> Result<PlatformCatalog, DocError> {
        if self.currency != CURRENCY {
            return Err(field_err(
                origin,
                format!("currency `{}` is not {CURRENCY}", self.currency),
            ));
        }
        let layer: Layer = parse_name(origin, "layer", &self.layer)?;
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(PriceComponent::new(
                    &c.id,
                    parse_name(origin, "driver", &c.driver)?,
                    parse_name(origin, "unit", &c.unit)?,
                    c.rate.0,
                    parse_name(origin, "scale", &c.scale)?,
                )
                .with_description(&c.description))
            })
            .collect::<Result<Vec<_>, DocError>>()?;
        PlatformCatalog::build(&self.platform_id, layer, self.hypothetical, components).map_err(
            |source| DocError::Catalog {
                path: origin.to_string(),
                source,
            },
        )
    }

    /// The document of a built catalog; rates are per single unit.
    pub fn from_catalog(catalog: &PlatformCatalog) -> Self {
        CatalogDoc {
            platform_id: catalog.platform_id.clone(),
            layer: catalog.layer.as_str().into(),
            hypothetical: catalog.hypothetical,
            currency: CURRENCY.into(),
            components: catalog
                .components
                .iter()
                .map(|c| ComponentDoc {
                    id: c.id.clone(),
                    driver: c.driver.as_str().into(),
                    unit: c.unit.as_str().into(),
                    rate: Num(c.rate),
                    scale: c.scale.as_str().into(),
                    description: c.description.clone(),
                })
                .collect(),
        }
    }
}

/// Where a catalog came from, with its raw text for digests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogSource {
    pub origin: String,
    pub text: String,
}

const BUNDLED: [(&str, &str); 5] = [
    (
        "aws-x86.json",
        include_str!("../../../catalogs/aws-x86.json"),
    ),
    (
        "aws-arm.json",
        include_str!("../../../catalogs/aws-arm.json"),
    ),
    (
        "aws-lambda-edge.json",
        include_str!("../../../catalogs/aws-lambda-edge.json"),
    ),
    ("gcp.json", include_str!("../../../catalogs/gcp.json")),
    ("leo.json", include_str!("../../../catalogs/leo.json")),
];

pub const CATALOG_DIR_ENV: &str = "COSMOS_CATALOG_DIR";

/// The default catalogs: every `*.json` in `$COSMOS_CATALOG_DIR` if set,
/// otherwise the catalogs compiled into the binary.
pub fn default_catalog_sources() -> Result<Vec<CatalogSource>, DocError> {
    match std::env::var_os(CATALOG_DIR_ENV) {
        Some(dir) => catalog_dir_sources(Path::new(&dir)),
        None => Ok(BUNDLED
            .iter()
            .map(|(name, text)| CatalogSource {
                origin: format!("bundled:{name}"),
                text: text.to_string(),
            })
            .collect()),
    }
}

pub fn catalog_dir_sources(dir: &Path) -> Result<Vec<CatalogSource>, DocError> {
    let io = |source| DocError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths.iter().map(|p| catalog_file_source(p)).collect()
}

pub fn catalog_file_source(path: &Path) -> Result<CatalogSource, DocError> {
    Ok(CatalogSource {
        origin: path.display().to_string(),
        text: read_text(path)?,
    })
}

/// Builds a catalog set. Later sources replace earlier ones with the same
/// platform id.
pub fn load_catalogs(sources: &[CatalogSource]) -> Result<CatalogSet, DocError> {
    let mut by_id = BTreeMap::new();
    for s in sources {
        let catalog = CatalogDoc::parse(&s.origin, &s.text)?.to_catalog(&s.origin)?;
        by_id.insert(catalog.platform_id.clone(), catalog);
    }
    CatalogSet::new(by_id.into_values()).map_err(|source| DocError::Catalog {
        path: "catalogs".into(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaasUsageDoc {
    pub component_id: String,
    pub quantity: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platforms: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub function_id: String,
    pub n: Num,
    pub t: Num,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub t_by_platform: BTreeMap<String, Num>,
    pub mem: Num,
    #[serde(default)]
    pub d: Num,
    #[serde(default = "monthly")]
    pub state_basis: String,
    #[serde(default)]
    pub r_in: Num,
    #[serde(default)]
    pub r_out: Num,
    #[serde(default)]
    pub baas_usage: Vec<BaasUsageDoc>,
    #[serde(default = "data_intensive")]
    pub workload_class: String,
}

fn monthly() -> String {
    "monthly".into()
}

fn data_intensive() -> String {
    "data_intensive".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyEntryDoc {
    pub function: String,
    pub platform: String,
    pub ms: Num,
}

/// Mean latencies. Explicit entries win over values derived from the
/// reference platform with a per-platform factor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_platform: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub factors: BTreeMap<String, Num>,
    #[serde(default)]
    pub entries: Vec<LatencyEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowDoc {
    pub workflow_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub functions: Vec<FunctionDoc>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub latency: LatencyDoc,
}

/// A loaded workflow document.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowInput {
    pub spec: WorkflowSpec,
    pub latencies: LatencyTable,
}

impl WorkflowDoc {
    pub fn parse(origin: &str, text: &str) -> Result<Self, DocError> {
        from_json(origin, text)
    }

    pub fn load(path: &Path) -> Result<(Self, String), DocError> {
        let text = read_text(path)?;
        Ok((Self::parse(&path.display().to_string(), &text)?, text))
    }

    pub fn to_input(&self, origin: &str) -> Result<WorkflowInput, DocError> {
        let mut functions = Vec::new();
        for f in &self.functions {
            let mut p = FunctionProfile::new(&f.function_id);
            p.n = f.n.0;
            p.t = f.t.0;
            p.t_by_platform = f
                .t_by_platform
                .iter()
                .map(|(k, v)| (k.clone(), v.0))
                .collect();
            p.mem = f.mem.0;
            p.d = f.d.0;
            p.state_basis = parse_name(origin, "state basis", &f.state_basis)?;
            p.r_in = f.r_in.0;
            p.r_out = f.r_out.0;
            p.workload_class = parse_name(origin, "workload class", &f.workload_class)?;
            p.baas_usage = f
                .baas_usage
                .iter()
                .map(|u| BaasUsage {
                    component_id: u.component_id.clone(),
                    quantity: u.quantity.0,
                    platforms: u.platforms.clone(),
                })
                .collect();
            functions.push(p);
        }
        let spec = WorkflowSpec::new(&self.workflow_id, functions, self.edges.clone()).map_err(
            |source| DocError::Workflow {
                path: origin.to_string(),
                source,
            },
        )?;

        let mut latencies = LatencyTable::new();
        for e in &self.latency.entries {
            if spec.function(&e.function).is_none() {
                return Err(DocError::Workflow {
                    path: origin.to_string(),
                    source: WorkflowError::UnknownFunction(e.function.clone()),
                });
            }
            if e.ms.0.is_sign_negative() && !e.ms.0.is_zero() {
                return Err(field_err(
                    origin,
                    format!("negative latency for ({}, {})", e.function, e.platform),
                ));
            }
            latencies.insert(&e.function, &e.platform, e.ms.0);
        }
        if !self.latency.factors.is_empty() {
            let reference =
                self.latency.reference_platform.as_deref().ok_or_else(|| {
                    field_err(origin, "latency factors need a reference_platform")
                })?;
            latencies.apply_factors(
                reference,
                self.latency.factors.iter().map(|(p, f)| (p.as_str(), f.0)),
            );
        }
        Ok(WorkflowInput { spec, latencies })
    }

    /// The document for a workflow and latency table. Latencies are written as
    /// explicit entries.
    pub fn from_input(spec: &WorkflowSpec, latencies: &LatencyTable, description: &str) -> Self {
        WorkflowDoc {
            workflow_id: spec.workflow_id().to_string(),
            description: description.to_string(),
            functions: spec
                .functions()
                .iter()
                .map(|p| FunctionDoc {
                    function_id: p.function_id.clone(),
                    n: Num(p.n),
                    t: Num(p.t),
                    t_by_platform: p
                        .t_by_platform
                        .iter()
                        .map(|(k, v)| (k.clone(), Num(*v)))
                        .collect(),
                    mem: Num(p.mem),
                    d: Num(p.d),
                    state_basis: p.state_basis.as_str().into(),
                    r_in: Num(p.r_in),
                    r_out: Num(p.r_out),
                    baas_usage: p
                        .baas_usage
                        .iter()
                        .map(|u| BaasUsageDoc {
                            component_id: u.component_id.clone(),
                            quantity: Num(u.quantity),
                            platforms: u.platforms.clone(),
                        })
                        .collect(),
                    workload_class: p.workload_class.as_str().into(),
                })
                .collect(),
            edges: spec.edges().to_vec(),
            latency: LatencyDoc {
                reference_platform: None,
                factors: BTreeMap::new(),
                entries: latencies
                    .iter()
                    .map(|(f, p, ms)| LatencyEntryDoc {
                        function: f.into(),
                        platform: p.into(),
                        ms: Num(ms),
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub function: String,
    pub platform: String,
    pub latency_ms: Num,
    pub cost_usd: Num,
}

/// Measured (latency, cost) per (function, platform), optimized as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffTableDoc {
    pub workflow_id: String,
    pub functions: Vec<String>,
    pub platforms: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    pub points: Vec<PointDoc>,
}

impl TradeoffTableDoc {
    pub fn parse(origin: &str, text: &str) -> Result<Self, DocError> {
        from_json(origin, text)
    }

    pub fn load(path: &Path) -> Result<(Self, String), DocError> {
        let text = read_text(path)?;
        Ok((Self::parse(&path.display().to_string(), &text)?, text))
    }

    /// The workflow the points belong to, with default profiles.
    pub fn workflow(&self, origin: &str) -> Result<WorkflowSpec, DocError> {
        let functions = self
            .functions
            .iter()
            .map(|f| FunctionProfile::new(f))
            .collect();
        WorkflowSpec::new(&self.workflow_id, functions, self.edges.clone()).map_err(|source| {
            DocError::Workflow {
                path: origin.to_string(),
                source,
            }
        })
    }

    /// Restricted to `platforms` when given, in that order.
    pub fn to_problem(
        &self,
        origin: &str,
        platforms: Option<&[String]>,
    ) -> Result<TradeoffProblem, DocError> {
        let workflow = self.workflow(origin)?;
        let mut table = BTreeMap::new();
        for p in &self.points {
            let cost = Money::new(p.cost_usd.0).map_err(|_| {
                field_err(
                    origin,
                    format!("negative cost for ({}, {})", p.function, p.platform),
                )
            })?;
            if p.latency_ms.0.is_sign_negative() && !p.latency_ms.0.is_zero() {
                return Err(field_err(
                    origin,
                    format!("negative latency for ({}, {})", p.function, p.platform),
                ));
            }
            if table
                .insert(
                    (p.function.clone(), p.platform.clone()),
                    (cost, p.latency_ms.0),
                )
                .is_some()
            {
                return Err(field_err(
                    origin,
                    format!("duplicate point ({}, {})", p.function, p.platform),
                ));
            }
        }
        let platforms = platforms.unwrap_or(&self.platforms);
        TradeoffProblem::from_table(&workflow, platforms, &table).map_err(|source| {
            DocError::Table {
                path: origin.to_string(),
                source,
            }
        })
    }
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}
