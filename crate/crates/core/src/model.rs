//! Shared domain types: site counts, efficiency profiles, deterministic
//! strategies, exact moment points and the Bell functional selector.
//!
//! Every LHV quantity in this crate is carried exactly. For a strategy that
//! assigns `(a_k, b_k) ∈ {-1, 0, 1}²` to each site, the moment point holds
//!
//! ```text
//! w = ∏ (|a_k| + |b_k|) / 2^n          (dyadic rational)
//! z = ∏ (a_k + i b_k)                  (Gaussian integer)
//! ```
//!
//! and every Bell functional handled here is a signed combination of
//! `Re z` and `Im z`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for W values, envelope ordinates and queries.
pub type Rational = Ratio<i128>;

/// Gaussian integer `re + i im`.
pub type Gaussian = Complex<i64>;

pub const MIN_SITES: u32 = 2;
pub const MAX_SITES: u32 = 16;

/// Number of spatially separated sites, `2 ≤ n ≤ 16`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SiteCount(u32);

impl SiteCount {
    pub fn new(n: u32) -> Result<Self> {
        if (MIN_SITES..=MAX_SITES).contains(&n) {
            Ok(SiteCount(n))
        } else {
            Err(Error::Domain(format!(
                "site count {n} outside supported range {MIN_SITES}..={MAX_SITES}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// `2^n`, the denominator of every pure-strategy W value.
    #[inline]
    pub fn pow2(self) -> u64 {
        1u64 << self.0
    }
}

impl TryFrom<u32> for SiteCount {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        SiteCount::new(n)
    }
}

impl From<SiteCount> for u32 {
    fn from(n: SiteCount) -> u32 {
        n.0
    }
}

impl fmt::Display for SiteCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Per-site detection efficiencies, identical for both settings at a site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyProfile {
    etas: Vec<f64>,
}

impl EfficiencyProfile {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        SiteCount::new(etas.len() as u32)?;
        if let Some(bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Domain(format!("efficiency {bad} outside [0, 1]")));
        }
        Ok(EfficiencyProfile { etas })
    }

    pub fn symmetric(n: SiteCount, eta: f64) -> Result<Self> {
        Self::new(vec![eta; n.as_usize()])
    }

    pub fn perfect(n: SiteCount) -> Self {
        EfficiencyProfile {
            etas: vec![1.0; n.as_usize()],
        }
    }

    pub fn sites(&self) -> SiteCount {
        SiteCount(self.etas.len() as u32)
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    /// `∏ η_k`, which is the quantum prediction for `W_N`.
    pub fn product(&self) -> f64 {
        self.etas.iter().product()
    }
}

/// A three-valued local outcome: `+1`, `-1`, or `0` for no detection.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Minus,
    Zero,
    Plus,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Minus, Outcome::Zero, Outcome::Plus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::Zero => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn from_value(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Outcome::Minus),
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::Plus),
            _ => Err(Error::Domain(format!("outcome {v} not in {{-1, 0, 1}}"))),
        }
    }
}

/// Local deterministic response `(a_k, b_k)` at every site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    assignments: Vec<(Outcome, Outcome)>,
}

impl DeterministicStrategy {
    pub fn new(assignments: Vec<(Outcome, Outcome)>) -> Result<Self> {
        SiteCount::new(assignments.len() as u32)?;
        Ok(DeterministicStrategy { assignments })
    }

    /// Builds a strategy from raw `(a, b)` values in `{-1, 0, 1}`.
    pub fn from_values(values: &[(i8, i8)]) -> Result<Self> {
        let assignments = values
            .iter()
            .map(|&(a, b)| Ok((Outcome::from_value(a)?, Outcome::from_value(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(assignments)
    }

    pub fn sites(&self) -> SiteCount {
        SiteCount(self.assignments.len() as u32)
    }

    pub fn assignments(&self) -> &[(Outcome, Outcome)] {
        &self.assignments
    }

    pub fn moment_point(&self) -> MomentPoint {
        let mut w_num: u64 = 1;
        let mut z = Gaussian::new(1, 0);
        for &(a, b) in &self.assignments {
            let (a, b) = (a.value() as i64, b.value() as i64);
            w_num *= (a.abs() + b.abs()) as u64;
            z *= Gaussian::new(a, b);
        }
        MomentPoint::from_parts(self.sites(), w_num, z)
    }
}

/// Exact `(W, Re z, Im z)` for a deterministic strategy.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentPoint {
    pub sites: SiteCount,
    pub w: Rational,
    pub re_z: i64,
    pub im_z: i64,
}

impl MomentPoint {
    /// `w_num` is `∏(|a_k| + |b_k|)`, i.e. W scaled by `2^n`.
    pub fn from_parts(sites: SiteCount, w_num: u64, z: Gaussian) -> Self {
        MomentPoint {
            sites,
            w: Rational::new(w_num as i128, sites.pow2() as i128),
            re_z: z.re,
            im_z: z.im,
        }
    }

    pub fn null(sites: SiteCount) -> Self {
        Self::from_parts(sites, 0, Gaussian::new(0, 0))
    }

    pub fn z(&self) -> Gaussian {
        Gaussian::new(self.re_z, self.im_z)
    }

    /// W scaled by `2^n`; always an integer for pure strategies.
    pub fn w_scaled(&self) -> i128 {
        (self.w * Rational::from_integer(self.sites.pow2() as i128)).to_integer()
    }

    /// `|z|²`.
    pub fn norm_sqr(&self) -> i64 {
        self.re_z * self.re_z + self.im_z * self.im_z
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalKind {
    Chsh,
    Mermin,
    Ardehali,
    Svetlichny,
}

impl FunctionalKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::Chsh => "chsh",
            FunctionalKind::Mermin => "mermin",
            FunctionalKind::Ardehali => "ardehali",
            FunctionalKind::Svetlichny => "svetlichny",
        }
    }
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chsh" | "s" => Ok(FunctionalKind::Chsh),
            "mermin" | "m" => Ok(FunctionalKind::Mermin),
            "ardehali" | "ar" => Ok(FunctionalKind::Ardehali),
            "svetlichny" | "sv" => Ok(FunctionalKind::Svetlichny),
            _ => Err(Error::Domain(format!("unknown functional '{s}'"))),
        }
    }
}

/// Conventional pairing that a functional is usually quoted with.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Advisory {
    /// Mermin's bound `2^((n-1)/2)` is only an LHV bound for odd `n`.
    MerminWithEvenSites,
    /// Ardehali's bound `2^(n/2)` is only an LHV bound for even `n`.
    ArdehaliWithOddSites,
}

/// One of the two-setting functionals `S`, `M_N`, `Ar_N` or Svetlichny's,
/// all evaluated on `z = ∏(A_k + i B_k)`.
///
/// CHSH, Ardehali and Svetlichny evaluate `s_R Re z + s_I Im z`; Mermin
/// evaluates `Re z`. The `Im z` variant of Mermin is reached by the global
/// relabel `A ↔ B`, which sends `z` to `i^n z̄` on the strategy set.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellFunctional {
    pub kind: FunctionalKind,
    pub s_r: i8,
    pub s_i: i8,
}

impl BellFunctional {
    pub fn new(kind: FunctionalKind, s_r: i8, s_i: i8) -> Result<Self> {
        if s_r.abs() != 1 || s_i.abs() != 1 {
            return Err(Error::Domain(format!(
                "signs must be ±1, got ({s_r}, {s_i})"
            )));
        }
        Ok(BellFunctional { kind, s_r, s_i })
    }

    pub fn chsh() -> Self {
        BellFunctional {
            kind: FunctionalKind::Chsh,
            s_r: 1,
            s_i: 1,
        }
    }

    pub fn mermin() -> Self {
        BellFunctional {
            kind: FunctionalKind::Mermin,
            s_r: 1,
            s_i: 1,
        }
    }

    pub fn ardehali() -> Self {
        BellFunctional {
            kind: FunctionalKind::Ardehali,
            s_r: 1,
            s_i: 1,
        }
    }

    pub fn svetlichny() -> Self {
        BellFunctional {
            kind: FunctionalKind::Svetlichny,
            s_r: 1,
            s_i: 1,
        }
    }

    pub fn of_kind(kind: FunctionalKind) -> Self {
        BellFunctional {
            kind,
            s_r: 1,
            s_i: 1,
        }
    }

    /// The functional whose MABK bound is valid at `n`: CHSH for two sites,
    /// Mermin for odd `n`, Ardehali for even `n`.
    pub fn natural(n: SiteCount) -> Self {
        match n.get() {
            2 => Self::chsh(),
            k if k % 2 == 1 => Self::mermin(),
            _ => Self::ardehali(),
        }
    }

    /// Checks the functional can be evaluated at `n` sites. Returns an
    /// advisory when the pairing is unconventional.
    pub fn check_sites(&self, n: SiteCount) -> Result<Option<Advisory>> {
        match self.kind {
            FunctionalKind::Chsh if n.get() != 2 => Err(Error::Dimension(format!(
                "CHSH is a two-site functional, got n = {n}"
            ))),
            FunctionalKind::Mermin if n.get() % 2 == 0 => Ok(Some(Advisory::MerminWithEvenSites)),
            FunctionalKind::Ardehali if n.get() % 2 == 1 => {
                Ok(Some(Advisory::ArdehaliWithOddSites))
            }
            _ => Ok(None),
        }
    }

    /// Real weights `(c_re, c_im)` so that the functional equals
    /// `c_re Re z + c_im Im z`.
    pub fn weights(&self) -> (i64, i64) {
        match self.kind {
            FunctionalKind::Mermin => (1, 0),
            _ => (self.s_r as i64, self.s_i as i64),
        }
    }

    /// Evaluates on an integer `z`; no site-count check.
    #[inline]
    pub fn apply(&self, re: i64, im: i64) -> i64 {
        let (cr, ci) = self.weights();
        cr * re + ci * im
    }

    /// Evaluates on a real-valued `z`.
    #[inline]
    pub fn apply_f64(&self, re: f64, im: f64) -> f64 {
        let (cr, ci) = self.weights();
        cr as f64 * re + ci as f64 * im
    }

    pub fn label(&self) -> String {
        match self.kind {
            FunctionalKind::Mermin => "mermin".to_string(),
            k => {
                let sign = |s: i8| if s > 0 { '+' } else { '-' };
                format!("{}{}{}", k.name(), sign(self.s_r), sign(self.s_i))
            }
        }
    }
}

impl fmt::Display for BellFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Value of `f` at the moment point `p`, exactly.
pub fn functional_value(p: &MomentPoint, f: &BellFunctional) -> Result<Rational> {
    f.check_sites(p.sites)?;
    Ok(Rational::from_integer(f.apply(p.re_z, p.im_z) as i128))
}
