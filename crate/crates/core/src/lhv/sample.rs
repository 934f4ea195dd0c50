//! Random LHV predictions for figure scatter and for probing stochastic
//! (non-deterministic) local response functions against the envelope.

use num_complex::Complex;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::MomentPointSet;
use super::envelope::EnvelopePolyline;
use crate::error::{Error, Result};
use crate::model::{BellFunctional, Rational};

/// Identifier of the generator behind every seeded stream in this crate.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64+stream";

/// Largest site count the exact stochastic probe accepts.
pub const MAX_PROBE_SITES: u32 = 8;

/// Resolution of the dyadic grid the probe draws per-site values from.
const PROBE_GRID: i128 = 256;

const MAX_MIXTURE_WEIGHT: i128 = 64;

/// Seeded ChaCha8 stream `stream` of `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One LHV prediction `(⟨W⟩, ⟨F⟩)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub w: Rational,
    pub f: Rational,
    /// Number of deterministic strategies mixed; 1 for a pure strategy.
    pub components: u32,
}

impl ScatterPoint {
    pub fn w_f64(&self) -> f64 {
        self.w.to_f64().unwrap_or(f64::NAN)
    }

    pub fn f_f64(&self) -> f64 {
        self.f.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact mixture `Σ weight_i (w_i, f_i) / Σ weight_i`.
pub fn mix(points: &[(Rational, Rational)], weights: &[i128]) -> Result<(Rational, Rational)> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::Domain("mixture needs one weight per point".into()));
    }
    if weights.iter().any(|w| *w < 0) || weights.iter().all(|w| *w == 0) {
        return Err(Error::Domain(
            "mixture weights must be nonnegative, not all zero".into(),
        ));
    }
    let total = Rational::from_integer(weights.iter().sum());
    let (mut w, mut f) = (Rational::zero(), Rational::zero());
    for (&(pw, pf), &k) in points.iter().zip(weights) {
        let k = Rational::from_integer(k);
        w += pw * k;
        f += pf * k;
    }
    Ok((w / total, f / total))
}

/// Every distinct deterministic `(w, F)` followed by `count` random finite
/// mixtures of two to four of them, drawn from a seeded stream.
pub fn scatter_sample(
    points: &MomentPointSet,
    f: &BellFunctional,
    count: usize,
    seed: u64,
) -> Result<Vec<ScatterPoint>> {
    if count == 0 {
        return Err(Error::Domain("scatter count must be at least 1".into()));
    }
    f.check_sites(points.sites())?;
    let mut pure: Vec<(Rational, Rational)> = points
        .iter()
        .map(|p| (p.w, Rational::from_integer(f.apply(p.re_z, p.im_z) as i128)))
        .collect();
    pure.sort();
    pure.dedup();

    let mut out: Vec<ScatterPoint> = pure
        .iter()
        .map(|&(w, f)| ScatterPoint {
            w,
            f,
            components: 1,
        })
        .collect();

    let mut rng = seeded_stream(seed, 0);
    for _ in 0..count {
        let k = rng.random_range(2..=4usize);
        let chosen: Vec<(Rational, Rational)> = (0..k)
            .map(|_| *pure.choose(&mut rng).expect("nonempty"))
            .collect();
        let weights: Vec<i128> = (0..k)
            .map(|_| rng.random_range(1..=MAX_MIXTURE_WEIGHT))
            .collect();
        let (w, fv) = mix(&chosen, &weights)?;
        out.push(ScatterPoint {
            w,
            f: fv,
            components: k as u32,
        });
    }
    Ok(out)
}

/// A stochastic local response at one site: detection probabilities
/// `η_A, η_B` and conditional means `⟨A⟩, ⟨B⟩` with `|⟨A⟩| ≤ η_A`,
/// `|⟨B⟩| ≤ η_B`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteResponse {
    pub eta_a: Rational,
    pub eta_b: Rational,
    pub mean_a: Rational,
    pub mean_b: Rational,
}

impl SiteResponse {
    pub fn new(
        eta_a: Rational,
        eta_b: Rational,
        mean_a: Rational,
        mean_b: Rational,
    ) -> Result<Self> {
        let unit = Rational::from_integer(1);
        let ok = |eta: Rational, mean: Rational| {
            eta >= Rational::zero() && eta <= unit && mean.abs() <= eta
        };
        if !ok(eta_a, mean_a) || !ok(eta_b, mean_b) {
            return Err(Error::Domain(
                "site response outside its efficiency rectangle".into(),
            ));
        }
        Ok(SiteResponse {
            eta_a,
            eta_b,
            mean_a,
            mean_b,
        })
    }

    /// The deterministic response `(a, b)`.
    pub fn deterministic(a: i8, b: i8) -> Self {
        let r = |x: i8| Rational::from_integer(x as i128);
        SiteResponse {
            eta_a: r(a.abs()),
            eta_b: r(b.abs()),
            mean_a: r(a),
            mean_b: r(b),
        }
    }
}

/// `(W_λ, F_λ)` of a product of local responses.
pub fn response_moment(responses: &[SiteResponse], f: &BellFunctional) -> (Rational, Rational) {
    let half = Rational::new(1, 2);
    let mut w = Rational::from_integer(1);
    let mut z = Complex::new(Rational::from_integer(1), Rational::zero());
    for s in responses {
        w *= (s.eta_a + s.eta_b) * half;
        z = z * Complex::new(s.mean_a, s.mean_b);
    }
    let (cr, ci) = f.weights();
    let fv = z.re * Rational::from_integer(cr as i128) + z.im * Rational::from_integer(ci as i128);
    (w, fv)
}

/// Outcome of [`stochastic_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Largest `F − F_max(W)` observed, exactly.
    pub max_excess: Rational,
    pub worst_w: Rational,
    pub worst_f: Rational,
    pub trials: u64,
}

impl ProbeResult {
    pub fn max_excess_f64(&self) -> f64 {
        self.max_excess.to_f64().unwrap_or(f64::NAN)
    }
}

fn random_response<R: Rng>(rng: &mut R) -> SiteResponse {
    let draw = |rng: &mut R| {
        let eta = rng.random_range(0..=PROBE_GRID);
        let mean = rng.random_range(-eta..=eta);
        (
            Rational::new(eta, PROBE_GRID),
            Rational::new(mean, PROBE_GRID),
        )
    };
    let (eta_a, mean_a) = draw(rng);
    let (eta_b, mean_b) = draw(rng);
    SiteResponse {
        eta_a,
        eta_b,
        mean_a,
        mean_b,
    }
}

const PROBE_CHUNK: u64 = 4096;

/// Samples random product responses `∏_k (⟨A_k⟩_λ + i⟨B_k⟩_λ)` with each
/// site inside its efficiency rectangle and reports the largest excess of
/// `F_λ` over the envelope at `W_λ`. A positive value would exhibit a
/// stochastic LHV model the deterministic hull misses.
pub fn stochastic_probe(env: &EnvelopePolyline, trials: u64, seed: u64) -> Result<ProbeResult> {
    let n = env.sites();
    if n.get() > MAX_PROBE_SITES {
        return Err(Error::Capacity(format!(
            "stochastic probe supports n ≤ {MAX_PROBE_SITES}, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("probe needs at least one trial".into()));
    }
    let f = env.functional();
    let chunks = trials.div_ceil(PROBE_CHUNK);

    let best = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(Rational, Rational, Rational)> {
            let mut rng = seeded_stream(seed, c);
            let len = PROBE_CHUNK.min(trials - c * PROBE_CHUNK);
            let mut best: Option<(Rational, Rational, Rational)> = None;
            for _ in 0..len {
                let sites: Vec<SiteResponse> =
                    (0..n.get()).map(|_| random_response(&mut rng)).collect();
                let (w, fv) = response_moment(&sites, &f);
                let excess = fv - env.query(w)?;
                if best.is_none_or(|b| excess > b.0) {
                    best = Some((excess, w, fv));
                }
            }
            Ok(best.expect("chunk has at least one trial"))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        // Ties keep the earliest chunk, so the result is schedule independent.
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one chunk");

    Ok(ProbeResult {
        max_excess: best.0,
        worst_w: best.1,
        worst_f: best.2,
        trials,
    })
}

/// Probe a single response profile.
pub fn probe_point(env: &EnvelopePolyline, responses: &[SiteResponse]) -> Result<Rational> {
    if responses.len() != env.sites().as_usize() {
        return Err(Error::Dimension(format!(
            "{} responses for a {}-site envelope",
            responses.len(),
            env.sites()
        )));
    }
    let (w, f) = response_moment(responses, &env.functional());
    Ok(f - env.query(w)?)
}
