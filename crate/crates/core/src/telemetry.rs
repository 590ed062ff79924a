//! Aggregation of measured invocations into latency statistics, and
//! calibration of workflows from them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rust_decimal::Decimal;

use crate::workflow::{LatencyTable, WorkflowError, WorkflowSpec};

/// Bytes per GB (decimal, as billed).
pub const BYTES_PER_GB: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Error => "error",
        }
    }
}

impl core::str::FromStr for Status {
    type Err = crate::pricing::UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "error" => Ok(Status::Error),
            other => Err(crate::pricing::UnknownName(other.to_string())),
        }
    }
}

/// One logged invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageRecord {
    /// ISO-8601 instant, kept verbatim.
    pub timestamp: String,
    pub function_id: String,
    pub platform_id: String,
    pub duration_ms: Decimal,
    pub bytes_in: u64,
    pub bytes_out: u64,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyStats {
    pub count: u64,
    pub mean: Decimal,
    pub min: Decimal,
    pub max: Decimal,
    /// Nearest-rank 90th percentile.
    pub p90: Decimal,
}

/// Latency plus payload statistics for one (function, platform) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UsageStats {
    pub latency: LatencyStats,
    pub mean_bytes_in: Decimal,
    pub mean_bytes_out: Decimal,
    /// Error-status records seen for the pair; they do not enter any statistic.
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TelemetryError {
    #[error("no ok-status records for function `{function}` on `{platform}`")]
    NoData { function: String, platform: String },
    #[error("no statistics for {}", list_pairs(.0))]
    Coverage(Vec<(String, String)>),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
}

fn list_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(f, p)| alloc::format!("({f}, {p})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Value at 1-based rank `ceil(q * count)` of an ascending slice.
pub fn nearest_rank(sorted: &[Decimal], percent: u64) -> Option<Decimal> {
    let n = sorted.len() as u64;
    if n == 0 {
        return None;
    }
    let rank = (percent * n).div_ceil(100).max(1);
    Some(sorted[(rank - 1) as usize])
}

fn stats_of(mut durations: Vec<Decimal>) -> Option<LatencyStats> {
    durations.sort_unstable();
    let count = durations.len() as u64;
    let sum: Decimal = durations.iter().sum();
    Some(LatencyStats {
        count,
        mean: sum / Decimal::from(count.max(1)),
        min: *durations.first()?,
        max: *durations.last()?,
        p90: nearest_rank(&durations, 90)?,
    })
}

fn usage_stats(records: &[&UsageRecord]) -> Option<UsageStats> {
    let ok: Vec<&UsageRecord> = records
        .iter()
        .copied()
        .filter(|r| r.status == Status::Ok)
        .collect();
    let latency = stats_of(ok.iter().map(|r| r.duration_ms).collect())?;
    let count = Decimal::from(latency.count);
    let bytes = |f: fn(&UsageRecord) -> u64| {
        ok.iter().map(|r| Decimal::from(f(r))).sum::<Decimal>() / count
    };
    Some(UsageStats {
        latency,
        mean_bytes_in: bytes(|r| r.bytes_in),
        mean_bytes_out: bytes(|r| r.bytes_out),
        errors: (records.len() - ok.len()) as u64,
    })
}

/// Statistics over the ok-status records of one (function, platform) pair.
pub fn aggregate_stats(
    records: &[UsageRecord],
    function_id: &str,
    platform_id: &str,
) -> Result<UsageStats, TelemetryError> {
    let matching: Vec<&UsageRecord> = records
        .iter()
        .filter(|r| r.function_id == function_id && r.platform_id == platform_id)
        .collect();
    usage_stats(&matching).ok_or_else(|| TelemetryError::NoData {
        function: function_id.to_string(),
        platform: platform_id.to_string(),
    })
}

pub type PairMap<T> = BTreeMap<(String, String), T>;

/// Statistics for every (function, platform) pair with at least one record.
/// Pairs with only error records are omitted from the map but their error
/// counts are returned separately.
pub fn group_stats(records: &[UsageRecord]) -> (PairMap<UsageStats>, PairMap<u64>) {
    let mut groups: BTreeMap<(String, String), Vec<&UsageRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.function_id.clone(), r.platform_id.clone()))
            .or_default()
            .push(r);
    }
    let mut stats = BTreeMap::new();
    let mut failed_only = BTreeMap::new();
    for (key, rs) in groups {
        match usage_stats(&rs) {
            Some(s) => {
                stats.insert(key, s);
            }
            None => {
                failed_only.insert(key, rs.len() as u64);
            }
        }
    }
    (stats, failed_only)
}

/// Sets latency entries to measured means and each function's `r_in`/`r_out`
/// to its mean payload in GB, pooled over the platforms it was measured on.
/// Every function must have statistics on every platform in `platforms`.
pub fn calibrate(
    workflow: &WorkflowSpec,
    stats: &PairMap<UsageStats>,
    platforms: &[String],
) -> Result<(WorkflowSpec, LatencyTable), TelemetryError> {
    let missing: Vec<(String, String)> = workflow
        .function_ids()
        .flat_map(|f| platforms.iter().map(move |p| (f.to_string(), p.clone())))
        .filter(|key| !stats.contains_key(key))
        .collect();
    if !missing.is_empty() {
        return Err(TelemetryError::Coverage(missing));
    }

    let gb = Decimal::from(BYTES_PER_GB);
    let mut table = LatencyTable::new();
    let mut functions = Vec::new();
    for profile in workflow.functions() {
        let mut profile = profile.clone();
        let mut count = Decimal::ZERO;
        let (mut bytes_in, mut bytes_out) = (Decimal::ZERO, Decimal::ZERO);
        for ((f, p), s) in stats.range((profile.function_id.clone(), String::new())..) {
            if *f != profile.function_id {
                break;
            }
            table.insert(f, p, s.latency.mean);
            let n = Decimal::from(s.latency.count);
            count += n;
            bytes_in += s.mean_bytes_in * n;
            bytes_out += s.mean_bytes_out * n;
        }
        if !count.is_zero() {
            profile.r_in = bytes_in / count / gb;
            profile.r_out = bytes_out / count / gb;
        }
        functions.push(profile);
    }
    Ok((workflow.with_functions(functions)?, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::FunctionProfile;

    fn record(f: &str, p: &str, ms: i64, status: Status) -> UsageRecord {
        UsageRecord {
            timestamp: "2024-05-01T00:00:00Z".into(),
            function_id: f.into(),
            platform_id: p.into(),
            duration_ms: Decimal::from(ms),
            bytes_in: 0,
            bytes_out: 0,
            status,
        }
    }

    #[test]
    fn three_samples() {
        let rs: Vec<_> = [100, 200, 300]
            .iter()
            .map(|&d| record("f", "p", d, Status::Ok))
            .collect();
        let s = aggregate_stats(&rs, "f", "p").unwrap().latency;
        assert_eq!(
            (s.count, s.mean, s.min, s.max, s.p90),
            (
                3,
                Decimal::from(200),
                Decimal::from(100),
                Decimal::from(300),
                Decimal::from(300)
            )
        );
    }

    #[test]
    fn p90_of_one_to_ten() {
        let rs: Vec<_> = (1..=10).map(|d| record("f", "p", d, Status::Ok)).collect();
        assert_eq!(
            aggregate_stats(&rs, "f", "p").unwrap().latency.p90,
            Decimal::from(9)
        );
    }

    #[test]
    fn errors_are_excluded() {
        let mut rs: Vec<_> = [100, 200, 300]
            .iter()
            .map(|&d| record("f", "p", d, Status::Ok))
            .collect();
        let before = aggregate_stats(&rs, "f", "p").unwrap();
        rs.push(record("f", "p", 99_999, Status::Error));
        let after = aggregate_stats(&rs, "f", "p").unwrap();
        assert_eq!(before.latency, after.latency);
        assert_eq!(after.errors, 1);
    }

    #[test]
    fn no_data() {
        let rs = [record("f", "p", 1, Status::Error)];
        assert!(matches!(
            aggregate_stats(&rs, "f", "p"),
            Err(TelemetryError::NoData { .. })
        ));
        assert!(matches!(
            aggregate_stats(&[], "f", "p"),
            Err(TelemetryError::NoData { .. })
        ));
        let (stats, failed) = group_stats(&rs);
        assert!(stats.is_empty());
        assert_eq!(failed.values().sum::<u64>(), 1);
    }

    #[test]
    fn calibration_sets_means_and_payloads() {
        let wf = WorkflowSpec::chain("w", alloc::vec![FunctionProfile::new("retrieval")]).unwrap();
        let mut r = record("retrieval", "aws-x86", 232, Status::Ok);
        r.bytes_in = BYTES_PER_GB;
        r.bytes_out = BYTES_PER_GB / 2;
        let (stats, _) = group_stats(&[r]);
        let (wf2, table) = calibrate(&wf, &stats, &["aws-x86".to_string()]).unwrap();
        assert_eq!(table.get("retrieval", "aws-x86"), Some(Decimal::from(232)));
        assert_eq!(wf2.functions()[0].r_in, Decimal::ONE);
        assert_eq!(wf2.functions()[0].r_out, Decimal::new(5, 1));

        match calibrate(&wf, &stats, &["aws-x86".to_string(), "gcp".to_string()]) {
            Err(TelemetryError::Coverage(missing)) => {
                assert_eq!(
                    missing,
                    alloc::vec![("retrieval".to_string(), "gcp".to_string())]
                )
            }
            other => panic!("expected coverage error, got {other:?}"),
        }
    }
}
