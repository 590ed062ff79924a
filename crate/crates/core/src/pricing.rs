//! Provider rate cards.
//!
//! A [`PlatformCatalog`] lists the billable [`PriceComponent`]s of one platform
//! (for example `aws-x86` or a hypothetical LEO constellation). Components are
//! declared at the scale providers quote them ("0.20 per 1M requests") and
//! normalized to base units before any cost is computed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rust_decimal::Decimal;

/// Billing hours in one month.
pub const HOURS_PER_MONTH: u32 = 730;
pub const CURRENCY: &str = "USD";

/// The billing category a price component is charged under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DriverCategory {
    Invocation,
    Compute,
    DataTransfer,
    StateManagement,
    BaasFixed,
    BaasDynamic,
}

impl DriverCategory {
    pub const ALL: [DriverCategory; 6] = [
        DriverCategory::Invocation,
        DriverCategory::Compute,
        DriverCategory::DataTransfer,
        DriverCategory::StateManagement,
        DriverCategory::BaasFixed,
        DriverCategory::BaasDynamic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DriverCategory::Invocation => "invocation",
            DriverCategory::Compute => "compute",
            DriverCategory::DataTransfer => "data_transfer",
            DriverCategory::StateManagement => "state_management",
            DriverCategory::BaasFixed => "baas_fixed",
            DriverCategory::BaasDynamic => "baas_dynamic",
        }
    }

    /// Whether `unit` is a legal billing unit for this driver.
    pub fn accepts(self, unit: RateUnit) -> bool {
        use RateUnit::*;
        match self {
            DriverCategory::Invocation => matches!(unit, PerRequest | PerMsPerRequest),
            DriverCategory::Compute => unit == PerGbSecond,
            DriverCategory::StateManagement => unit == PerGbMonth,
            DriverCategory::DataTransfer => {
                matches!(unit, PerGbTransferredIn | PerGbTransferredOut | PerRequest)
            }
            DriverCategory::BaasFixed => unit == PerMonthFixed,
            DriverCategory::BaasDynamic => matches!(unit, PerRequest | PerGbProcessed),
        }
    }
}

impl fmt::Display for DriverCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DriverCategory {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DriverCategory::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// Base billing unit of a rate, after normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateUnit {
    PerRequest,
    PerGbSecond,
    PerGbMonth,
    PerGbTransferredIn,
    PerGbTransferredOut,
    PerGbProcessed,
    PerMonthFixed,
    /// Space-layer only: price per request per millisecond executed.
    PerMsPerRequest,
}

impl RateUnit {
    pub const ALL: [RateUnit; 8] = [
        RateUnit::PerRequest,
        RateUnit::PerGbSecond,
        RateUnit::PerGbMonth,
        RateUnit::PerGbTransferredIn,
        RateUnit::PerGbTransferredOut,
        RateUnit::PerGbProcessed,
        RateUnit::PerMonthFixed,
        RateUnit::PerMsPerRequest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RateUnit::PerRequest => "per_request",
            RateUnit::PerGbSecond => "per_gb_second",
            RateUnit::PerGbMonth => "per_gb_month",
            RateUnit::PerGbTransferredIn => "per_gb_transferred_in",
            RateUnit::PerGbTransferredOut => "per_gb_transferred_out",
            RateUnit::PerGbProcessed => "per_gb_processed",
            RateUnit::PerMonthFixed => "per_month_fixed",
            RateUnit::PerMsPerRequest => "per_ms_per_request",
        }
    }
}

impl fmt::Display for RateUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateUnit {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RateUnit::ALL
            .into_iter()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// The quantity a declared rate is quoted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scale {
    /// Already in base units.
    #[default]
    Unit,
    /// Per one million base units ("per 1M requests").
    PerMillion,
    /// Per hour of wall-clock time.
    PerHour,
    /// Per billing month.
    PerMonth,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Unit => "1",
            Scale::PerMillion => "1M",
            Scale::PerHour => "hour",
            Scale::PerMonth => "month",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scale {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(Scale::Unit),
            "1M" | "1000000" => Ok(Scale::PerMillion),
            "hour" => Ok(Scale::PerHour),
            "month" => Ok(Scale::PerMonth),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Edge,
    Cloud,
    Space,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Edge => "edge",
            Layer::Cloud => "cloud",
            Layer::Space => "space",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(Layer::Edge),
            "cloud" => Ok(Layer::Cloud),
            "space" => Ok(Layer::Space),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

/// One billable rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceComponent {
    pub id: String,
    pub driver: DriverCategory,
    pub unit: RateUnit,
    /// Rate per `scale` units of `unit`. Kept as a raw decimal so that invalid
    /// (negative) documents can still be reported on.
    pub rate: Decimal,
    pub scale: Scale,
    pub description: String,
}

impl PriceComponent {
    pub fn new(
        id: &str,
        driver: DriverCategory,
        unit: RateUnit,
        rate: Decimal,
        scale: Scale,
    ) -> Self {
        PriceComponent {
            id: id.to_string(),
            driver,
            unit,
            rate,
            scale,
            description: String::new(),
        }
    }

    pub fn with_description(mut self, description: &str) -> Self {
        self.description = description.to_string();
        self
    }

    /// The component with its rate expressed in base units.
    pub fn normalized(&self) -> Result<PriceComponent, CatalogError> {
        normalize_rate(self, self.scale)
    }
}

/// Re-expresses `component.rate`, quoted per `declared_scale`, in base units.
///
/// The result carries [`Scale::Unit`], so normalizing twice is a no-op.
pub fn normalize_rate(
    component: &PriceComponent,
    declared_scale: Scale,
) -> Result<PriceComponent, CatalogError> {
    use RateUnit::*;
    let hours = Decimal::from(HOURS_PER_MONTH);
    let rate = component.rate;
    let unsupported = || CatalogError::Unit {
        component: component.id.clone(),
        detail: format!(
            "scale `{}` is not supported for unit `{}`",
            declared_scale, component.unit
        ),
    };
    let normalized = match declared_scale {
        Scale::Unit => rate,
        Scale::PerMillion => {
            if component.unit == PerMonthFixed {
                return Err(unsupported());
            }
            rate / Decimal::from(1_000_000u32)
        }
        Scale::PerHour => match component.unit {
            PerGbSecond => rate / Decimal::from(3600u32),
            PerMonthFixed | PerGbMonth => rate * hours,
            _ => return Err(unsupported()),
        },
        Scale::PerMonth => match component.unit {
            PerMonthFixed | PerGbMonth => rate,
            PerGbSecond => rate / (hours * Decimal::from(3600u32)),
            _ => return Err(unsupported()),
        },
    };
    Ok(PriceComponent {
        rate: normalized.normalize(),
        scale: Scale::Unit,
        ..component.clone()
    })
}

/// A platform's full rate card.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatformCatalog {
    pub platform_id: String,
    pub layer: Layer,
    /// Set for catalogs whose prices are assumptions rather than published rates.
    pub hypothetical: bool,
    pub components: Vec<PriceComponent>,
}

impl PlatformCatalog {
    /// Normalizes every component and validates the result, failing on the
    /// first violation.
    pub fn build(
        platform_id: &str,
        layer: Layer,
        hypothetical: bool,
        components: Vec<PriceComponent>,
    ) -> Result<Self, CatalogError> {
        let components = components
            .iter()
            .map(PriceComponent::normalized)
            .collect::<Result<Vec<_>, _>>()?;
        let catalog = PlatformCatalog {
            platform_id: platform_id.to_string(),
            layer,
            hypothetical,
            components,
        };
        match validate_catalog(&catalog).into_iter().next() {
            Some(violation) => Err(violation.into_error()),
            None => Ok(catalog),
        }
    }

    pub fn currency(&self) -> &'static str {
        CURRENCY
    }

    pub fn component(&self, id: &str) -> Option<&PriceComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn by_driver(&self, driver: DriverCategory) -> impl Iterator<Item = &PriceComponent> {
        self.components.iter().filter(move |c| c.driver == driver)
    }

    /// True when the catalog bills execution by the millisecond per request.
    pub fn is_latency_priced(&self) -> bool {
        self.components
            .iter()
            .any(|c| c.unit == RateUnit::PerMsPerRequest)
    }
}

/// Catalogs keyed by platform id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogSet {
    catalogs: BTreeMap<String, PlatformCatalog>,
}

impl CatalogSet {
    pub fn new(catalogs: impl IntoIterator<Item = PlatformCatalog>) -> Result<Self, CatalogError> {
        let mut set = CatalogSet::default();
        for catalog in catalogs {
            set.insert(catalog)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, catalog: PlatformCatalog) -> Result<(), CatalogError> {
        if self.catalogs.contains_key(&catalog.platform_id) {
            return Err(CatalogError::Schema(format!(
                "platform `{}` is defined twice",
                catalog.platform_id
            )));
        }
        self.catalogs.insert(catalog.platform_id.clone(), catalog);
        Ok(())
    }

    pub fn get(&self, platform_id: &str) -> Option<&PlatformCatalog> {
        self.catalogs.get(platform_id)
    }

    pub fn platform_ids(&self) -> impl Iterator<Item = &str> {
        self.catalogs.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PlatformCatalog> {
        self.catalogs.values()
    }

    pub fn len(&self) -> usize {
        self.catalogs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catalogs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Schema,
    Unit,
    Value,
    DuplicateId,
}

/// One broken catalog invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub component_id: Option<String>,
    pub message: String,
}

impl Violation {
    pub fn into_error(self) -> CatalogError {
        let component = self.component_id.unwrap_or_default();
        match self.kind {
            ViolationKind::Schema => CatalogError::Schema(self.message),
            ViolationKind::Unit => CatalogError::Unit {
                component,
                detail: self.message,
            },
            ViolationKind::Value => CatalogError::Value {
                component,
                detail: self.message,
            },
            ViolationKind::DuplicateId => CatalogError::DuplicateId(component),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unit error in component `{component}`: {detail}")]
    Unit { component: String, detail: String },
    #[error("value error in component `{component}`: {detail}")]
    Value { component: String, detail: String },
    #[error("duplicate component id `{0}`")]
    DuplicateId(String),
}

/// Lists every invariant violation in `catalog`. An empty report means the
/// catalog is valid.
pub fn validate_catalog(catalog: &PlatformCatalog) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut push = |kind, component: Option<&str>, message: String| {
        report.push(Violation {
            kind,
            component_id: component.map(str::to_string),
            message,
        })
    };

    if catalog.platform_id.trim().is_empty() {
        push(ViolationKind::Schema, None, "platform_id is empty".into());
    }
    if catalog.components.is_empty() {
        push(
            ViolationKind::Schema,
            None,
            "catalog has no components".into(),
        );
    }

    for (i, c) in catalog.components.iter().enumerate() {
        if catalog.components[..i].iter().any(|prev| prev.id == c.id) {
            push(
                ViolationKind::DuplicateId,
                Some(&c.id),
                format!("component id `{}` repeats", c.id),
            );
        }
        if c.rate.is_sign_negative() && !c.rate.is_zero() {
            push(
                ViolationKind::Value,
                Some(&c.id),
                format!("rate {} is negative", c.rate),
            );
        }
        if !c.driver.accepts(c.unit) {
            push(
                ViolationKind::Unit,
                Some(&c.id),
                format!("driver `{}` cannot be billed `{}`", c.driver, c.unit),
            );
        }
        if c.unit == RateUnit::PerMsPerRequest && catalog.layer != Layer::Space {
            push(
                ViolationKind::Unit,
                Some(&c.id),
                format!("`{}` is only legal on space-layer platforms", c.unit),
            );
        }
    }

    // A per-ms-per-request rate covers invocation and compute together.
    if !catalog.components.is_empty() && !catalog.is_latency_priced() {
        for driver in [DriverCategory::Invocation, DriverCategory::Compute] {
            if catalog.by_driver(driver).next().is_none() {
                push(
                    ViolationKind::Schema,
                    None,
                    format!("catalog has no `{driver}` component"),
                );
            }
        }
    }
    report
}
