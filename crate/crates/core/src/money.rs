//! Exact decimal USD amounts.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul};

pub use rust_decimal::Decimal;
use rust_decimal::RoundingStrategy;

/// Fractional digits used when presenting amounts.
pub const DISPLAY_DP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("amount {0} is negative")]
pub struct NegativeAmount(pub Decimal);

/// A non-negative USD amount backed by a 96-bit decimal (28 significant
/// digits), so rates such as `0.0000002` per request are exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(Decimal);

impl Money {
    pub const ZERO: Money = Money(Decimal::ZERO);

    pub fn new(value: Decimal) -> Result<Self, NegativeAmount> {
        if value.is_sign_negative() && !value.is_zero() {
            Err(NegativeAmount(value))
        } else {
            Ok(Money(value.normalize()))
        }
    }

    /// Parses a decimal string such as `"0.213"`.
    pub fn parse(s: &str) -> Option<Self> {
        s.trim()
            .parse::<Decimal>()
            .ok()
            .and_then(|d| Money::new(d).ok())
    }

    pub fn value(self) -> Decimal {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    /// Product with a non-negative quantity.
    pub fn times(self, quantity: Decimal) -> Result<Self, NegativeAmount> {
        Money::new(self.0 * quantity)
    }

    /// Rounded half-even to [`DISPLAY_DP`] fractional digits.
    pub fn rounded(self) -> Decimal {
        round_display(self.0)
    }

    pub fn to_f64(self) -> f64 {
        to_f64(self.0)
    }
}

/// Half-even presentation rounding used by every report.
pub fn round_display(value: Decimal) -> Decimal {
    value
        .round_dp_with_strategy(DISPLAY_DP, RoundingStrategy::MidpointNearestEven)
        .normalize()
}

pub fn to_f64(value: Decimal) -> f64 {
    use rust_decimal::prelude::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money((self.0 + rhs.0).normalize())
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl Mul<Money> for Decimal {
    type Output = Decimal;
    fn mul(self, rhs: Money) -> Decimal {
        self * rhs.0
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<Decimal> for Money {
    type Error = NegativeAmount;
    fn try_from(value: Decimal) -> Result<Self, Self::Error> {
        Money::new(value)
    }
}
