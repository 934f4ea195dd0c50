//! Closed-form LHV bounds for the two-setting functionals.
//!
//! | functional        | Holder (lossy)          | MABK            |
//! |-------------------|-------------------------|-----------------|
//! | CHSH / Ardehali   | `2^((n+1)/2) · √W`      | `2^(n/2)`       |
//! | Mermin            | `2^(n/2) · √W`          | `2^((n-1)/2)`   |
//! | Svetlichny        | as Ardehali             | `2^(n-1)`       |
//!
//! The Holder bound follows from `|⟨z⟩|² ≤ ⟨∏(A_k² + B_k²)⟩ = 2^n W`; the
//! Ardehali form pays an extra `√2` for `x + y ≤ √2 |x + iy|`. Both families
//! meet at `W = 1/2`.
//!
//! Efficiency thresholds with more than two settings per site (`η_k > 1/m`
//! for an `m`-setting inequality) are not computed here.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BellFunctional, EfficiencyProfile, FunctionalKind, Rational, SiteCount};

/// Exact value `coeff · 2^(half_exp / 2)`, normalized so `coeff` is odd (or
/// zero with `half_exp = 0`). Two values are equal iff their fields are.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sqrt2Power {
    pub coeff: i64,
    pub half_exp: i32,
}

impl Sqrt2Power {
    pub fn new(coeff: i64, half_exp: i32) -> Self {
        if coeff == 0 {
            return Sqrt2Power {
                coeff: 0,
                half_exp: 0,
            };
        }
        let (mut c, mut h) = (coeff, half_exp);
        while c % 2 == 0 {
            c /= 2;
            h += 2;
        }
        Sqrt2Power {
            coeff: c,
            half_exp: h,
        }
    }

    /// `2^(half_exp / 2)`.
    pub fn sqrt2_pow(half_exp: i32) -> Self {
        Self::new(1, half_exp)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.coeff * other.coeff, self.half_exp + other.half_exp)
    }

    pub fn to_f64(self) -> f64 {
        let whole = 2f64.powi(self.half_exp.div_euclid(2));
        let odd = if self.half_exp.rem_euclid(2) == 1 {
            SQRT_2
        } else {
            1.0
        };
        self.coeff as f64 * whole * odd
    }

    /// The square, as an exact rational.
    pub fn squared(self) -> Rational {
        let c2 = Rational::from_integer((self.coeff as i128).pow(2));
        let p = Rational::from_integer(2).pow(self.half_exp);
        c2 * p
    }
}

impl fmt::Display for Sqrt2Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff == 0 {
            return f.write_str("0");
        }
        let whole = self.half_exp.div_euclid(2);
        let root = if self.half_exp.rem_euclid(2) == 1 {
            "√2"
        } else {
            ""
        };
        let (num, den) = if whole >= 0 {
            (self.coeff as i128 * (1i128 << whole), 1i128)
        } else {
            (self.coeff as i128, 1i128 << -whole)
        };
        match num {
            1 if !root.is_empty() => f.write_str(root)?,
            -1 if !root.is_empty() => write!(f, "-{root}")?,
            _ => write!(f, "{num}{root}")?,
        }
        if den != 1 {
            write!(f, "/{den}")?;
        }
        Ok(())
    }
}

fn check_w(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::Domain(format!("w = {w} outside [0, 1]")))
    }
}

/// Holder bound as `K · √W`, with `K` exact.
pub fn holder_coefficient(n: SiteCount, f: &BellFunctional) -> Sqrt2Power {
    let n = n.get() as i32;
    match f.kind {
        FunctionalKind::Mermin => Sqrt2Power::sqrt2_pow(n),
        _ => Sqrt2Power::sqrt2_pow(n + 1),
    }
}

pub fn holder_bound(n: SiteCount, f: &BellFunctional, w: f64) -> Result<f64> {
    check_w(w)?;
    Ok(holder_coefficient(n, f).to_f64() * w.sqrt())
}

/// Holder bound at a dyadic `w = 2^-k` (or 0), exactly. Returns `None` for
/// other rationals, whose square roots are not powers of `√2`.
pub fn holder_bound_exact(
    n: SiteCount,
    f: &BellFunctional,
    w: Rational,
) -> Result<Option<Sqrt2Power>> {
    if w.is_negative() || w > Rational::from_integer(1) {
        return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
    }
    if w.is_zero() {
        return Ok(Some(Sqrt2Power::new(0, 0)));
    }
    let (num, den) = (*w.numer(), *w.denom());
    if num != 1 || den <= 0 || den & (den - 1) != 0 {
        return Ok(None);
    }
    let k = den.trailing_zeros() as i32;
    Ok(Some(
        holder_coefficient(n, f).mul(Sqrt2Power::sqrt2_pow(-k)),
    ))
}

/// MABK-family bound (Svetlichny's for that kind), exactly.
pub fn mabk_bound_exact(n: SiteCount, f: &BellFunctional) -> Sqrt2Power {
    let n = n.get() as i32;
    match f.kind {
        FunctionalKind::Chsh => Sqrt2Power::new(2, 0),
        FunctionalKind::Ardehali => Sqrt2Power::sqrt2_pow(n),
        FunctionalKind::Mermin => Sqrt2Power::sqrt2_pow(n - 1),
        FunctionalKind::Svetlichny => Sqrt2Power::sqrt2_pow(2 * (n - 1)),
    }
}

pub fn mabk_bound(n: SiteCount, f: &BellFunctional) -> f64 {
    mabk_bound_exact(n, f).to_f64()
}

/// `min(Holder, MABK)`, the melded analytic bound.
pub fn tight_analytic_bound(n: SiteCount, f: &BellFunctional, w: f64) -> Result<f64> {
    Ok(holder_bound(n, f, w)?.min(mabk_bound(n, f)))
}

/// Whether a nonnegative value `v` lies at or below both analytic bounds at
/// `w`, decided exactly by comparing squares.
pub fn within_analytic_bounds_exact(
    n: SiteCount,
    f: &BellFunctional,
    w: Rational,
    v: Rational,
) -> Result<bool> {
    if w.is_negative() || w > Rational::from_integer(1) {
        return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
    }
    if v.is_negative() {
        return Ok(true);
    }
    let v2 = v * v;
    let holder2 = holder_coefficient(n, f).squared() * w;
    let mabk2 = mabk_bound_exact(n, f).squared();
    Ok(v2 <= holder2 && v2 <= mabk2)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// `W ≥ 1/2`: the MABK bound is the tighter one.
    #[serde(rename = "MABK")]
    Mabk,
    /// `2^-n ≤ W < 1/2`: the Holder bound dominates.
    #[serde(rename = "Holder")]
    Holder,
    /// `W < 2^-n`: no two-setting violation is possible.
    #[serde(rename = "LHV_no_violation")]
    LhvNoViolation,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::Mabk => "MABK",
            RegionLabel::Holder => "Holder",
            RegionLabel::LhvNoViolation => "LHV_no_violation",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Region of `w`. Boundaries go to the higher-`w` region: `w = 1/2` is MABK
/// and `w = 2^-n` is Holder.
pub fn classify_region(n: SiteCount, w: f64) -> Result<RegionLabel> {
    check_w(w)?;
    Ok(if w >= 0.5 {
        RegionLabel::Mabk
    } else if w < 0.5f64.powi(n.get() as i32) {
        RegionLabel::LhvNoViolation
    } else {
        RegionLabel::Holder
    })
}

/// Exact-rational variant of [`classify_region`].
pub fn classify_region_exact(n: SiteCount, w: Rational) -> Result<RegionLabel> {
    if w.is_negative() || w > Rational::from_integer(1) {
        return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
    }
    Ok(if w >= Rational::new(1, 2) {
        RegionLabel::Mabk
    } else if w < Rational::new(1, n.pow2() as i128) {
        RegionLabel::LhvNoViolation
    } else {
        RegionLabel::Holder
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticThreshold {
    /// Smallest `∏η_k` above which the optimal GHZ prediction violates the
    /// melded analytic bound.
    pub w_star: f64,
    /// `w_star^(1/n)`.
    pub eta_symmetric: f64,
    /// False for two sites, where the quantum line only crosses the flat
    /// CHSH bound and never the Holder curve.
    pub crosses_holder: bool,
}

/// `∏η_k > 2^(2-n)`, i.e. symmetric `η > 2^(2/n - 1)`.
pub fn analytic_threshold(n: SiteCount) -> AnalyticThreshold {
    let k = n.get() as f64;
    if n.get() == 2 {
        return AnalyticThreshold {
            w_star: FRAC_1_SQRT_2,
            eta_symmetric: 2f64.powf(-0.25),
            crosses_holder: false,
        };
    }
    AnalyticThreshold {
        w_star: 2f64.powf(2.0 - k),
        eta_symmetric: 2f64.powf(2.0 / k - 1.0),
        crosses_holder: true,
    }
}

/// Symmetric threshold `2^((1-n)/(2n))` from the MABK bound alone.
pub fn braunstein_mann_threshold(n: SiteCount) -> f64 {
    let k = n.get() as f64;
    2f64.powf((1.0 - k) / (2.0 * k))
}

/// True iff `∏η_k > 2^(2-n)` (strict).
pub fn asymmetric_threshold_check(etas: &EfficiencyProfile) -> bool {
    let n = etas.sites().get() as i32;
    etas.product() > 2f64.powi(2 - n)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvetlichnyRequirement {
    /// `W` above which the optimal GHZ `Ar_N = 2^(n-1/2) W` exceeds `2^(n-1)`.
    pub w_threshold: f64,
    /// `2^(-1/(2n))`.
    pub eta_symmetric: f64,
}

pub fn svetlichny_requirement(n: SiteCount) -> SvetlichnyRequirement {
    SvetlichnyRequirement {
        w_threshold: FRAC_1_SQRT_2,
        eta_symmetric: 2f64.powf(-1.0 / (2.0 * n.get() as f64)),
    }
}
