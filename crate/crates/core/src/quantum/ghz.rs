//! GHZ predictions for the two-setting functionals, with detection loss.
//!
//! With settings `σ_{α_k}` (A) and `σ_{β_k}` (B) in the x–y plane, every full
//! correlator of `(|↑…↑⟩ − |↓…↓⟩)/√2` is `−cos(Σ θ_k)`. Summing the
//! expansion of `∏(A_k + i B_k)` gives the product form
//!
//! ```text
//! ⟨∏(A_k + i B_k)⟩ = −½ [ ∏(e^{iα_k} + i e^{iβ_k}) + ∏(e^{−iα_k} + i e^{−iβ_k}) ]
//! ```
//!
//! which the settings search uses as its objective. Reported values go
//! through the statevector instead.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expansion::{expand_functional, SettingWord};
use super::statevector::{sigma_theta, Mat2, StateVector, MAX_STATEVECTOR_SITES};
use crate::bounds::{holder_coefficient, mabk_bound};
use crate::error::{Error, Result};
use crate::lhv::EnvelopePolyline;
use crate::model::{BellFunctional, EfficiencyProfile, SiteCount};

/// Measurement angles of settings A and B at each site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingProfile {
    pub thetas_a: Vec<f64>,
    pub thetas_b: Vec<f64>,
}

impl SettingProfile {
    pub fn new(thetas_a: Vec<f64>, thetas_b: Vec<f64>) -> Result<Self> {
        if thetas_a.len() != thetas_b.len() || thetas_a.is_empty() {
            return Err(Error::Dimension(format!(
                "setting lists of length {} and {}",
                thetas_a.len(),
                thetas_b.len()
            )));
        }
        let reduce = |v: Vec<f64>| v.into_iter().map(|t| t.rem_euclid(TAU)).collect();
        Ok(SettingProfile {
            thetas_a: reduce(thetas_a),
            thetas_b: reduce(thetas_b),
        })
    }

    pub fn sites(&self) -> usize {
        self.thetas_a.len()
    }

    /// Angles measured under `word`.
    pub fn angles(&self, word: SettingWord) -> Vec<f64> {
        (0..self.sites() as u32)
            .map(|k| {
                if word.is_b(k) {
                    self.thetas_b[k as usize]
                } else {
                    self.thetas_a[k as usize]
                }
            })
            .collect()
    }
}

/// `⟨∏_k σ_{θ_k}⟩` on the GHZ state, by statevector.
pub fn ghz_correlator(n: usize, thetas: &[f64]) -> Result<f64> {
    if thetas.len() != n {
        return Err(Error::Dimension(format!(
            "{} angles for {n} sites",
            thetas.len()
        )));
    }
    let psi = StateVector::ghz(n)?;
    let ops: Vec<Mat2> = thetas.iter().map(|&t| sigma_theta(t)).collect();
    Ok(psi.expectation(&ops)?.re)
}

/// `−cos(Σθ_k)`.
pub fn ghz_correlator_closed_form(thetas: &[f64]) -> f64 {
    -thetas.iter().sum::<f64>().cos()
}

fn check_profile(n: SiteCount, settings: &SettingProfile) -> Result<()> {
    if settings.sites() != n.as_usize() {
        return Err(Error::Dimension(format!(
            "{}-site settings for n = {n}",
            settings.sites()
        )));
    }
    Ok(())
}

/// Lossless value of `f`: the expansion terms weighted by statevector
/// correlators.
pub fn functional_from_correlators(
    n: SiteCount,
    f: &BellFunctional,
    settings: &SettingProfile,
) -> Result<f64> {
    check_profile(n, settings)?;
    if n.as_usize() > MAX_STATEVECTOR_SITES {
        return Err(Error::Capacity(format!(
            "statevector supports n ≤ {MAX_STATEVECTOR_SITES}, got {n}"
        )));
    }
    let psi = StateVector::ghz(n.as_usize())?;
    expand_functional(n, f)?
        .iter()
        .map(|t| {
            let ops: Vec<Mat2> = settings
                .angles(t.word)
                .into_iter()
                .map(sigma_theta)
                .collect();
            Ok(t.coefficient as f64 * psi.expectation(&ops)?.re)
        })
        .sum()
}

/// Lossless value of `f` from `⟨ψ|⊗_k (σ_{α_k} + i σ_{β_k})|ψ⟩`, without
/// expanding into correlators.
pub fn functional_from_operator(
    n: SiteCount,
    f: &BellFunctional,
    settings: &SettingProfile,
) -> Result<f64> {
    check_profile(n, settings)?;
    f.check_sites(n)?;
    let psi = StateVector::ghz(n.as_usize())?;
    let i = Complex64::new(0.0, 1.0);
    let ops: Vec<Mat2> = settings
        .thetas_a
        .iter()
        .zip(&settings.thetas_b)
        .map(|(&a, &b)| {
            let (sa, sb) = (sigma_theta(a), sigma_theta(b));
            let mut m = sa;
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] = sa[r][c] + i * sb[r][c];
                }
            }
            m
        })
        .collect();
    let z = psi.expectation(&ops)?;
    Ok(f.apply_f64(z.re, z.im))
}

/// Lossless value of `f` from the product form; valid for any `n`.
pub fn functional_closed_form(f: &BellFunctional, settings: &SettingProfile) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(1.0, 0.0);
    for (&a, &b) in settings.thetas_a.iter().zip(&settings.thetas_b) {
        p *= Complex64::from_polar(1.0, a) + i * Complex64::from_polar(1.0, b);
        q *= Complex64::from_polar(1.0, -a) + i * Complex64::from_polar(1.0, -b);
    }
    let z = -0.5 * (p + q);
    f.apply_f64(z.re, z.im)
}

/// Either explicit angles or the optimum found by [`optimal_settings`].
#[derive(Clone, Debug, PartialEq)]
pub enum Settings {
    Optimal,
    Explicit(SettingProfile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalSettings {
    pub settings: SettingProfile,
    /// Lossless functional value at `settings`.
    pub value: f64,
}

const COARSE_ANGLES: usize = 8;
const REFINEMENT_PASSES: u32 = 3;
const IMPROVEMENT_EPS: f64 = 1e-12;

fn coarse_angle(k: usize) -> f64 {
    k as f64 * FRAC_PI_4
}

fn uniform_profile(n: usize, shared: (f64, f64), last: (f64, f64)) -> SettingProfile {
    let mut a = vec![shared.0; n];
    let mut b = vec![shared.1; n];
    a[n - 1] = last.0;
    b[n - 1] = last.1;
    SettingProfile {
        thetas_a: a,
        thetas_b: b,
    }
}

/// Deterministic search for the settings maximizing the lossless value of
/// `f`.
///
/// The coarse stage fixes one `(α, β)` pair for sites `1..n-1` and a
/// separate pair for site `n`, each angle on the grid `kπ/4`, `k < 8`; ties
/// keep the lexicographically first angle tuple. Three coordinate-ascent
/// passes with step `π/8`, `π/16`, `π/32` then refine every angle.
pub fn optimal_settings(n: SiteCount, f: &BellFunctional) -> Result<OptimalSettings> {
    f.check_sites(n)?;
    let sites = n.as_usize();

    let mut best: Option<(f64, SettingProfile)> = None;
    for sa in 0..COARSE_ANGLES {
        for sb in 0..COARSE_ANGLES {
            for la in 0..COARSE_ANGLES {
                for lb in 0..COARSE_ANGLES {
                    let p = uniform_profile(
                        sites,
                        (coarse_angle(sa), coarse_angle(sb)),
                        (coarse_angle(la), coarse_angle(lb)),
                    );
                    let v = functional_closed_form(f, &p);
                    if best.as_ref().is_none_or(|(bv, _)| v > bv + IMPROVEMENT_EPS) {
                        best = Some((v, p));
                    }
                }
            }
        }
    }
    let (mut value, mut profile) = best.expect("nonempty grid");

    for pass in 0..REFINEMENT_PASSES {
        let step = PI / 8.0 / f64::from(1u32 << pass);
        loop {
            let mut improved = false;
            for k in 0..2 * sites {
                for delta in [-step, step] {
                    let mut cand = profile.clone();
                    let slot = if k < sites {
                        &mut cand.thetas_a[k]
                    } else {
                        &mut cand.thetas_b[k - sites]
                    };
                    *slot = (*slot + delta).rem_euclid(TAU);
                    let v = functional_closed_form(f, &cand);
                    if v > value + IMPROVEMENT_EPS {
                        value = v;
                        profile = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    Ok(OptimalSettings {
        settings: profile,
        value,
    })
}

/// Closed-form optimum: `2^(n-1)` for Mermin, `2^(n-1/2)` for the
/// Ardehali-type functionals (`2√2` for CHSH).
pub fn optimal_value_closed_form(n: SiteCount, f: &BellFunctional) -> f64 {
    let k = n.get() as f64;
    match f.kind {
        crate::model::FunctionalKind::Mermin => 2f64.powf(k - 1.0),
        _ => 2f64.powf(k - 0.5),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumPrediction {
    /// `∏η_k` times the lossless value.
    pub value: f64,
    /// `W_N = ∏η_k`.
    pub w: f64,
    pub lossless_value: f64,
    pub settings: SettingProfile,
}

/// GHZ prediction of `f` and `W_N` with per-site erasure efficiencies.
pub fn quantum_prediction(
    n: SiteCount,
    f: &BellFunctional,
    etas: &EfficiencyProfile,
    settings: &Settings,
) -> Result<QuantumPrediction> {
    f.check_sites(n)?;
    if etas.sites() != n {
        return Err(Error::Dimension(format!(
            "{}-site efficiency profile for n = {n}",
            etas.sites()
        )));
    }
    let profile = match settings {
        Settings::Optimal => optimal_settings(n, f)?.settings,
        Settings::Explicit(p) => {
            check_profile(n, p)?;
            p.clone()
        }
    };
    let lossless = if n.as_usize() <= MAX_STATEVECTOR_SITES {
        functional_from_correlators(n, f, &profile)?
    } else if matches!(settings, Settings::Optimal) {
        functional_closed_form(f, &profile)
    } else {
        return Err(Error::Capacity(format!(
            "statevector supports n ≤ {MAX_STATEVECTOR_SITES}, got {n}"
        )));
    };
    let w = etas.product();
    Ok(QuantumPrediction {
        value: w * lossless,
        w,
        lossless_value: lossless,
        settings: profile,
    })
}

#[derive(Clone, Copy, Debug)]
pub enum CrossingTarget<'a> {
    /// `min(Holder, MABK)`.
    Analytic,
    /// The exact LHV envelope.
    Envelope(&'a EnvelopePolyline),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Smallest `W` above which the optimal quantum line exceeds the bound,
    /// or `None` when it never does in `(0, 1]`.
    pub w_star: Option<f64>,
    /// `w_star^(1/n)`.
    pub eta_symmetric: Option<f64>,
    /// Lossless optimum; the quantum line is `slope · W`.
    pub quantum_slope: f64,
}

fn crossing_from(n: SiteCount, w_star: Option<f64>, slope: f64) -> Crossing {
    Crossing {
        w_star,
        eta_symmetric: w_star.map(|w| w.powf(1.0 / n.get() as f64)),
        quantum_slope: slope,
    }
}

/// Where the optimal lossy GHZ line `c · W` first exceeds the bound.
pub fn threshold_crossing(
    n: SiteCount,
    f: &BellFunctional,
    target: CrossingTarget<'_>,
) -> Result<Crossing> {
    let c = optimal_settings(n, f)?.value;
    threshold_crossing_with_slope(n, f, target, c)
}

/// As [`threshold_crossing`], with the quantum slope supplied.
pub fn threshold_crossing_with_slope(
    n: SiteCount,
    f: &BellFunctional,
    target: CrossingTarget<'_>,
    c: f64,
) -> Result<Crossing> {
    f.check_sites(n)?;
    if c <= 0.0 {
        return Ok(crossing_from(n, None, c));
    }
    match target {
        CrossingTarget::Analytic => {
            let h = holder_coefficient(n, f).to_f64();
            let m = mabk_bound(n, f);
            let w = ((h / c).powi(2)).min(m / c);
            Ok(crossing_from(n, (w < 1.0).then_some(w), c))
        }
        CrossingTarget::Envelope(env) => {
            if env.sites() != n || env.functional() != *f {
                return Err(Error::Dimension(format!(
                    "envelope for n = {} ({}) used with n = {n} ({f})",
                    env.sites(),
                    env.functional()
                )));
            }
            // envelope(w) - c w is concave and zero at the origin, so it
            // changes sign at most once.
            let v = env.vertices();
            for pair in v.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let (aw, af, bw, bf) = (a.w_f64(), a.f_f64(), b.w_f64(), b.f_f64());
                if c * bw > bf {
                    let slope = (bf - af) / (bw - aw);
                    let w = (af - slope * aw) / (c - slope);
                    return Ok(crossing_from(n, Some(w), c));
                }
            }
            Ok(crossing_from(n, None, c))
        }
    }
}

/// True iff the optimal GHZ prediction stays at or below the envelope for
/// every symmetric `η` on the grid `0, step, 2·step, …` up to and including
/// `1/2`.
pub fn no_violation_check(env: &EnvelopePolyline, step: f64) -> Result<bool> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!("grid step {step} outside (0, 1/2]")));
    }
    let n = env.sites();
    let c = optimal_settings(n, &env.functional())?.value;
    let count = (0.5 / step + 1e-9).floor() as usize;
    let mut etas: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if etas.last().is_some_and(|e| (e - 0.5).abs() > 1e-12) {
        etas.push(0.5);
    }
    for eta in etas {
        let w = eta.powi(n.get() as i32);
        let bound = env.query_f64(w)?;
        if c * w > bound * (1.0 + 1e-12) + 1e-15 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the optimal lossy GHZ `Ar_N = 2^(n-1/2) W` exceeds Svetlichny's
/// bound `2^(n-1)` at `W = w`.
pub fn svetlichny_violated(n: SiteCount, w: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
    }
    let f = BellFunctional::svetlichny();
    Ok(optimal_value_closed_form(n, &f) * w > mabk_bound(n, &f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn n(k: u32) -> SiteCount {
        SiteCount::new(k).unwrap()
    }

    #[test]
    fn correlator_examples() {
        assert!((ghz_correlator(2, &[0.0, 0.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(ghz_correlator(3, &[FRAC_PI_2; 3]).unwrap().abs() < 1e-12);
        assert!(matches!(
            ghz_correlator(13, &[0.0; 13]),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn single_site_marginal_vanishes() {
        // Reduced state of one GHZ qubit is maximally mixed.
        let psi = StateVector::ghz(3).unwrap();
        let id: Mat2 = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        for t in [0.0, 0.4, 2.0] {
            let e = psi.expectation(&[sigma_theta(t), id, id]).unwrap();
            assert!(e.norm() < 1e-12);
        }
    }

    #[test]
    fn optimal_mermin_and_ardehali() {
        let m = optimal_settings(n(3), &BellFunctional::mermin()).unwrap();
        assert!((m.value - 4.0).abs() < 1e-9);
        let a = optimal_settings(n(4), &BellFunctional::ardehali()).unwrap();
        assert!((a.value - 2f64.powf(3.5)).abs() < 1e-9);
        let s = optimal_settings(n(2), &BellFunctional::chsh()).unwrap();
        assert!((s.value - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn lossy_prediction() {
        let etas = EfficiencyProfile::symmetric(n(3), 0.9).unwrap();
        let q =
            quantum_prediction(n(3), &BellFunctional::mermin(), &etas, &Settings::Optimal).unwrap();
        assert!((q.value - 2.916).abs() < 1e-9);
        assert!((q.w - 0.729).abs() < 1e-12);
    }

    #[test]
    fn analytic_crossings() {
        let c =
            threshold_crossing(n(3), &BellFunctional::mermin(), CrossingTarget::Analytic).unwrap();
        assert!((c.w_star.unwrap() - 0.5).abs() < 1e-12);
        assert!((c.eta_symmetric.unwrap() - 0.7937).abs() < 1e-4);
        let c2 =
            threshold_crossing(n(2), &BellFunctional::chsh(), CrossingTarget::Analytic).unwrap();
        assert!((c2.w_star.unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn svetlichny_gate() {
        assert!(!svetlichny_violated(n(4), 0.70).unwrap());
        assert!(svetlichny_violated(n(4), 0.71).unwrap());
    }

    #[test]
    fn profile_validation() {
        assert!(SettingProfile::new(vec![0.0], vec![0.0, 1.0]).is_err());
        let p = SettingProfile::new(vec![-FRAC_PI_2, 7.0], vec![0.0, 0.0]).unwrap();
        assert!((p.thetas_a[0] - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert!(p.thetas_a[1] < TAU);
    }
}
