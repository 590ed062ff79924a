#![allow(dead_code)]

use std::collections::BTreeMap;

use cosmos_core::pricing::{
    DriverCategory, Layer, PlatformCatalog, PriceComponent, RateUnit, Scale,
};
use cosmos_core::tradeoff::TradeoffProblem;
use cosmos_core::workflow::{BaasUsage, FunctionProfile, WorkflowSpec};
use cosmos_core::{Decimal, Money};
use proptest::prelude::*;

pub fn d(s: &str) -> Decimal {
    s.parse().unwrap()
}

pub fn m(s: &str) -> Money {
    Money::parse(s).unwrap()
}

/// Non-negative decimal with up to `scale` fractional digits.
pub fn decimal(max: u32, scale: u32) -> impl Strategy<Value = Decimal> {
    (0..=max, 0..=scale).prop_map(|(v, s)| Decimal::new(v as i64, s))
}

pub fn money(max: u32, scale: u32) -> impl Strategy<Value = Money> {
    decimal(max, scale).prop_map(|v| Money::new(v).unwrap())
}

/// A catalog touching every driver, with the given rates per 1M units.
pub fn full_catalog(id: &str, rates: [Decimal; 7]) -> PlatformCatalog {
    use DriverCategory::*;
    use RateUnit::*;
    PlatformCatalog::build(
        id,
        Layer::Cloud,
        false,
        vec![
            PriceComponent::new("inv", Invocation, PerRequest, rates[0], Scale::PerMillion),
            PriceComponent::new("cpu", Compute, PerGbSecond, rates[1], Scale::PerMillion),
            PriceComponent::new(
                "in",
                DataTransfer,
                PerGbTransferredIn,
                rates[2],
                Scale::Unit,
            ),
            PriceComponent::new(
                "out",
                DataTransfer,
                PerGbTransferredOut,
                rates[3],
                Scale::Unit,
            ),
            PriceComponent::new("store", StateManagement, PerGbMonth, rates[4], Scale::Unit),
            PriceComponent::new("ml", BaasFixed, PerMonthFixed, rates[5], Scale::Unit),
            PriceComponent::new("etl", BaasDynamic, PerGbProcessed, rates[6], Scale::Unit),
        ],
    )
    .unwrap()
}

pub fn catalog_strategy(id: &'static str) -> impl Strategy<Value = PlatformCatalog> {
    proptest::array::uniform7(decimal(100_000, 4)).prop_map(move |r| full_catalog(id, r))
}

pub fn profile_strategy(id: String) -> impl Strategy<Value = FunctionProfile> {
    (
        decimal(10_000_000, 0),
        decimal(5_000, 3),
        decimal(10_240, 3),
        decimal(1_000, 2),
        decimal(1_000, 6),
        decimal(1_000, 6),
        decimal(3, 0),
        decimal(1_000, 6),
    )
        .prop_map(move |(n, t, mem, dd, r_in, r_out, q_fixed, q_dyn)| {
            let mut f = FunctionProfile::new(&id);
            f.n = n;
            f.t = t;
            f.mem = mem;
            f.d = dd;
            f.r_in = r_in;
            f.r_out = r_out;
            f.baas_usage = vec![BaasUsage::new("ml", q_fixed), BaasUsage::new("etl", q_dyn)];
            f
        })
}

pub fn chain(names: &[String]) -> WorkflowSpec {
    WorkflowSpec::chain("w", names.iter().map(|n| FunctionProfile::new(n)).collect()).unwrap()
}

pub fn names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// A random tabulated problem of `functions` x `platforms` with positive entries.
pub fn table_problem(functions: usize, platforms: usize) -> impl Strategy<Value = TradeoffProblem> {
    proptest::collection::vec((1u32..100_000, 1u32..100_000), functions * platforms).prop_map(
        move |cells| {
            let fs = names("f", functions);
            let ps = names("p", platforms);
            let wf = chain(&fs);
            let mut table = BTreeMap::new();
            for (i, (c, l)) in cells.into_iter().enumerate() {
                table.insert(
                    (fs[i / platforms].clone(), ps[i % platforms].clone()),
                    (
                        Money::new(Decimal::new(c as i64, 2)).unwrap(),
                        Decimal::new(l as i64, 1),
                    ),
                );
            }
            TradeoffProblem::from_table(&wf, &ps, &table).unwrap()
        },
    )
}
