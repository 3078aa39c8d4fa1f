//! Numeric backends shared by every integrator in the crate.
//!
//! All coordinates (grid points, line offsets, slopes, region radii) are
//! dyadic rationals, so a single generic code path can run either on exact
//! rationals (`num_rational::BigRational`) or on `f64`. The exact backend is
//! the reference; the float backend is the fast mirror cross-checked against
//! it in the test suite.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A dyadic rational `mantissa / 2^log2_denom`.
///
/// Kept normalized (odd mantissa or zero denominator exponent) so that
/// equality and hashing are structural.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicRat {
    mantissa: i64,
    log2_denom: u32,
}

impl DyadicRat {
    pub fn new(mantissa: i64, log2_denom: u32) -> Self {
        let mut m = mantissa;
        let mut e = log2_denom;
        if m == 0 {
            e = 0;
        }
        while e > 0 && m % 2 == 0 {
            m /= 2;
            e -= 1;
        }
        DyadicRat {
            mantissa: m,
            log2_denom: e,
        }
    }

    pub fn from_int(v: i64) -> Self {
        DyadicRat::new(v, 0)
    }

    /// Exact conversion: every finite f64 is a dyadic rational. Errors only
    /// when the mantissa or exponent leaves the i64 representation.
    pub fn try_from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let mut m = v;
        let mut e = 0u32;
        while m.fract() != 0.0 && e < 62 {
            m *= 2.0;
            e += 1;
        }
        if m.fract() != 0.0 || m.abs() > i64::MAX as f64 / 2.0 {
            return None;
        }
        Some(DyadicRat::new(m as i64, e))
    }

    pub fn zero() -> Self {
        DyadicRat::from_int(0)
    }

    pub fn mantissa(&self) -> i64 {
        self.mantissa
    }

    pub fn log2_denom(&self) -> u32 {
        self.log2_denom
    }

    /// Exact as long as |mantissa| < 2^53, which holds for every grid this
    /// crate produces.
    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 / (self.log2_denom as f64).exp2()
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.mantissa),
            BigInt::from(1u64) << self.log2_denom,
        )
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < 0
    }

    fn with_common_denom(a: Self, b: Self) -> (i128, i128, u32) {
        let e = a.log2_denom.max(b.log2_denom);
        let ma = (a.mantissa as i128) << (e - a.log2_denom);
        let mb = (b.mantissa as i128) << (e - b.log2_denom);
        (ma, mb, e)
    }

    pub fn checked_add(self, other: Self) -> Option<Self> {
        let (ma, mb, e) = Self::with_common_denom(self, other);
        let m = ma.checked_add(mb)?;
        i64::try_from(m).ok().map(|m| DyadicRat::new(m, e))
    }

    pub fn checked_mul(self, other: Self) -> Option<Self> {
        let m = (self.mantissa as i128).checked_mul(other.mantissa as i128)?;
        i64::try_from(m)
            .ok()
            .map(|m| DyadicRat::new(m, self.log2_denom + other.log2_denom))
    }
}

impl Add for DyadicRat {
    type Output = DyadicRat;
    fn add(self, other: Self) -> Self {
        self.checked_add(other).expect("dyadic add overflow")
    }
}

impl Sub for DyadicRat {
    type Output = DyadicRat;
    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl Mul for DyadicRat {
    type Output = DyadicRat;
    fn mul(self, other: Self) -> Self {
        self.checked_mul(other).expect("dyadic mul overflow")
    }
}

impl Neg for DyadicRat {
    type Output = DyadicRat;
    fn neg(self) -> Self {
        DyadicRat {
            mantissa: -self.mantissa,
            log2_denom: self.log2_denom,
        }
    }
}

impl PartialOrd for DyadicRat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (ma, mb, _) = Self::with_common_denom(*self, *other);
        ma.cmp(&mb)
    }
}

impl fmt::Debug for DyadicRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.log2_denom)
    }
}

impl fmt::Display for DyadicRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Arithmetic backend for the generic integrators.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when the backend carries no rounding error.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_dyadic(d: DyadicRat) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// floor(self * 2^level); the cell index of a point on the level grid.
    fn floor_scaled(&self, level: u32) -> i64;
    fn abs(self) -> Self;
    fn half(self) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_dyadic(d: DyadicRat) -> Self {
        d.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn floor_scaled(&self, level: u32) -> i64 {
        (self * (level as f64).exp2()).floor() as i64
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn half(self) -> Self {
        0.5 * self
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_dyadic(d: DyadicRat) -> Self {
        d.to_rational()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn floor_scaled(&self, level: u32) -> i64 {
        let scaled = self * BigRational::from_integer(BigInt::from(1u64) << level);
        scaled
            .floor()
            .to_integer()
            .to_i64()
            .expect("scaled index out of i64 range")
    }
    fn abs(self) -> Self {
        Signed::abs(&self)
    }
    fn half(self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }
}
