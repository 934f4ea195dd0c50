//! Heralded Monte Carlo of the lossy GHZ experiment and the estimators for
//! the functionals and `W_N`.
//!
//! Each trial draws joint `±1` outcomes from the exact GHZ distribution for
//! the chosen setting word, then erases each site to `0` independently with
//! probability `1 − η_k`. Every emission is heralded, so erased sites are
//! recorded rather than dropped. The design is balanced: all `2^n` words get
//! the same number of trials, and the same trials feed both `F̂` and `Ŵ`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{classify_region, tight_analytic_bound, RegionLabel};
use crate::error::{Error, Result};
use crate::lhv::{seeded_stream, EnvelopePolyline};
use crate::model::{BellFunctional, EfficiencyProfile, SiteCount};
use crate::quantum::{expand_functional, SettingProfile, SettingWord, StateVector};

/// Trials per seeded substream; fixes the merge order independently of the
/// number of worker threads.
const CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub word: SettingWord,
    /// `+1`, `−1`, or `0` for no detection, one per site.
    pub outcomes: Vec<i8>,
    pub herald: bool,
}

/// Trials grouped by setting word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    sites: SiteCount,
    seed: u64,
    records: BTreeMap<SettingWord, Vec<TrialRecord>>,
}

impl TrialSet {
    pub fn new(sites: SiteCount, seed: u64) -> Self {
        TrialSet {
            sites,
            seed,
            records: BTreeMap::new(),
        }
    }

    pub fn sites(&self) -> SiteCount {
        self.sites
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn insert(&mut self, word: SettingWord, records: Vec<TrialRecord>) {
        self.records.insert(word, records);
    }

    pub fn get(&self, word: &SettingWord) -> Option<&[TrialRecord]> {
        self.records.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &SettingWord> {
        self.records.keys()
    }

    /// Records in `(word, trial)` order.
    pub fn iter(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_inputs(n: SiteCount, etas: &EfficiencyProfile, settings: &SettingProfile) -> Result<()> {
    if etas.sites() != n || settings.sites() != n.as_usize() {
        return Err(Error::Dimension(format!(
            "efficiencies for {} sites and settings for {} with n = {n}",
            etas.sites(),
            settings.sites()
        )));
    }
    Ok(())
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn sample_chunk(
    word: SettingWord,
    cdf: &[f64],
    etas: &[f64],
    count: usize,
    seed: u64,
    stream: u64,
) -> Vec<TrialRecord> {
    let mut rng = seeded_stream(seed, stream);
    let last = cdf.len() - 1;
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let joint = cdf.partition_point(|&c| c <= u).min(last);
            let outcomes = etas
                .iter()
                .enumerate()
                .map(|(k, &eta)| {
                    let detected = rng.random_bool(eta);
                    match (detected, joint >> k & 1) {
                        (false, _) => 0,
                        (true, 0) => 1,
                        (true, _) => -1,
                    }
                })
                .collect();
            TrialRecord {
                word,
                outcomes,
                herald: true,
            }
        })
        .collect()
}

/// `count` heralded trials of setting word `word`.
pub fn simulate_trials(
    n: SiteCount,
    etas: &EfficiencyProfile,
    settings: &SettingProfile,
    word: SettingWord,
    count: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    check_inputs(n, etas, settings)?;
    if count == 0 {
        return Err(Error::Domain("trial count must be at least 1".into()));
    }
    if word.sites() != n.get() {
        return Err(Error::Dimension(format!(
            "{}-site word for n = {n}",
            word.sites()
        )));
    }
    let psi = StateVector::ghz(n.as_usize())?;
    let cdf = cumulative(&psi.outcome_probabilities(&settings.angles(word))?);
    let chunks = count.div_ceil(CHUNK);
    let out: Vec<Vec<TrialRecord>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(count - c * CHUNK);
            let stream = (u64::from(word.mask()) << 32) | c as u64;
            sample_chunk(word, &cdf, etas.etas(), len, seed, stream)
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Balanced design: `trials_per_word` trials of every one of the `2^n` words.
pub fn simulate_design(
    n: SiteCount,
    etas: &EfficiencyProfile,
    settings: &SettingProfile,
    trials_per_word: usize,
    seed: u64,
) -> Result<TrialSet> {
    let words: Vec<SettingWord> = SettingWord::all(n.get()).collect();
    let runs = words
        .par_iter()
        .map(|&w| {
            Ok((
                w,
                simulate_trials(n, etas, settings, w, trials_per_word, seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = TrialSet::new(n, seed);
    for (w, r) in runs {
        set.insert(w, r);
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub sites: SiteCount,
    pub functional: BellFunctional,
    pub w_hat: f64,
    pub f_hat: f64,
    pub se_w: f64,
    pub se_f: f64,
    pub trials_per_word: usize,
    pub seed: u64,
}

/// Sample mean and variance (unbiased) of a slice of small integers.
fn mean_var(values: impl Iterator<Item = i64>) -> (f64, f64, usize) {
    let (mut n, mut s, mut s2) = (0usize, 0i64, 0i64);
    for v in values {
        n += 1;
        s += v;
        s2 += v * v;
    }
    let nf = n as f64;
    let mean = s as f64 / nf;
    let var = if n > 1 {
        (s2 as f64 - nf * mean * mean) / (nf - 1.0)
    } else {
        0.0
    };
    (mean, var.max(0.0), n)
}

fn word_records<'a>(trials: &'a TrialSet, word: &SettingWord) -> Result<&'a [TrialRecord]> {
    match trials.get(word) {
        Some(r) if !r.is_empty() => Ok(r),
        _ => Err(Error::IncompleteDesign(format!(
            "no trials for setting word {word}"
        ))),
    }
}

/// `F̂ = Σ c_w · mean(∏ outcomes | w)` and `Ŵ = 2^-n Σ_w mean(∏|outcomes| | w)`,
/// with standard errors propagated from per-word sample variances.
pub fn estimate_functionals(trials: &TrialSet, f: &BellFunctional) -> Result<EstimateReport> {
    let n = trials.sites();
    let terms = expand_functional(n, f)?;

    let mut min_count = usize::MAX;
    let (mut w_sum, mut w_var) = (0.0, 0.0);
    for word in SettingWord::all(n.get()) {
        let recs = word_records(trials, &word)?;
        let (m, v, c) = mean_var(
            recs.iter()
                .map(|r| r.outcomes.iter().map(|o| o.abs() as i64).product()),
        );
        w_sum += m;
        w_var += v / c as f64;
        min_count = min_count.min(c);
    }
    let scale = 0.5f64.powi(n.get() as i32);

    let (mut f_hat, mut f_var) = (0.0, 0.0);
    for t in &terms {
        let recs = word_records(trials, &t.word)?;
        let (m, v, c) = mean_var(
            recs.iter()
                .map(|r| r.outcomes.iter().map(|&o| o as i64).product()),
        );
        let coeff = t.coefficient as f64;
        f_hat += coeff * m;
        f_var += coeff * coeff * v / c as f64;
    }

    Ok(EstimateReport {
        sites: n,
        functional: *f,
        w_hat: w_sum * scale,
        f_hat,
        se_w: w_var.sqrt() * scale,
        se_f: f_var.sqrt(),
        trials_per_word: min_count,
        seed: trials.seed(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub region: RegionLabel,
    /// `F̂ − F_max(Ŵ)`.
    pub excess_over_envelope: f64,
    /// `F̂ − min(Holder, MABK)(Ŵ)`.
    pub excess_over_analytic: f64,
    /// `excess_over_envelope / se_f`.
    pub significance: f64,
}

impl ViolationReport {
    pub fn violates(&self) -> bool {
        self.excess_over_envelope > 0.0
    }
}

/// Compares an estimate against the envelope and the melded analytic bound.
pub fn violation_report(
    report: &EstimateReport,
    env: &EnvelopePolyline,
) -> Result<ViolationReport> {
    let n = report.sites;
    let f = report.functional;
    if env.sites() != n || env.functional() != f {
        return Err(Error::Dimension(format!(
            "envelope for n = {} ({}) used with an n = {n} ({f}) estimate",
            env.sites(),
            env.functional()
        )));
    }
    let w = report.w_hat.clamp(0.0, 1.0);
    let excess_env = report.f_hat - env.query_f64(w)?;
    let excess_analytic = report.f_hat - tight_analytic_bound(n, &f, w)?;
    let significance = if report.se_f > 0.0 {
        excess_env / report.se_f
    } else {
        excess_env.signum() * f64::MAX
    };
    Ok(ViolationReport {
        region: classify_region(n, w)?,
        excess_over_envelope: excess_env,
        excess_over_analytic: excess_analytic,
        significance,
    })
}

/// Empirical mean of site `site`'s outcome over the trials of `word`.
pub fn marginal_mean(trials: &TrialSet, word: &SettingWord, site: usize) -> Result<(f64, f64)> {
    let recs = word_records(trials, word)?;
    let (m, v, c) = mean_var(recs.iter().map(|r| r.outcomes[site] as i64));
    Ok((m, (v / c as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::optimal_settings;

    fn n(k: u32) -> SiteCount {
        SiteCount::new(k).unwrap()
    }

    #[test]
    fn certain_erasure() {
        let etas = EfficiencyProfile::symmetric(n(3), 0.0).unwrap();
        let s = SettingProfile::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let recs =
            simulate_trials(n(3), &etas, &s, SettingWord::new(3, 0b101).unwrap(), 500, 1).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.outcomes.iter().all(|&o| o == 0) && r.herald));
    }

    #[test]
    fn perfect_anticorrelation() {
        // θ = (0, 0) on two sites gives ⟨σ_x σ_x⟩ = −1.
        let etas = EfficiencyProfile::perfect(n(2));
        let s = SettingProfile::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let recs =
            simulate_trials(n(2), &etas, &s, SettingWord::new(2, 0).unwrap(), 2000, 3).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.outcomes[0] == -r.outcomes[1] && r.outcomes[0] != 0));
    }

    #[test]
    fn deterministic_under_seed() {
        let etas = EfficiencyProfile::symmetric(n(3), 0.8).unwrap();
        let s = SettingProfile::new(vec![0.1, 0.2, 0.3], vec![1.0, 1.1, 1.2]).unwrap();
        let w = SettingWord::new(3, 0b010).unwrap();
        let a = simulate_trials(n(3), &etas, &s, w, 70_000, 11).unwrap();
        let b = simulate_trials(n(3), &etas, &s, w, 70_000, 11).unwrap();
        let c = simulate_trials(n(3), &etas, &s, w, 70_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn missing_word_is_incomplete() {
        let etas = EfficiencyProfile::perfect(n(2));
        let s = SettingProfile::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut set = simulate_design(n(2), &etas, &s, 10, 0).unwrap();
        set.insert(SettingWord::new(2, 0b11).unwrap(), vec![]);
        assert!(matches!(
            estimate_functionals(&set, &BellFunctional::chsh()),
            Err(Error::IncompleteDesign(_))
        ));
    }

    #[test]
    fn w_hat_tracks_efficiency_product() {
        let k = n(3);
        let etas = EfficiencyProfile::symmetric(k, 0.8).unwrap();
        let f = BellFunctional::mermin();
        let s = optimal_settings(k, &f).unwrap().settings;
        let set = simulate_design(k, &etas, &s, 20_000, 5).unwrap();
        let r = estimate_functionals(&set, &f).unwrap();
        assert!((r.w_hat - 0.512).abs() <= 3.0 * r.se_w, "{r:?}");
    }
}
