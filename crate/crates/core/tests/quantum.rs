use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use lossbell::quantum::{
    functional_closed_form, functional_from_correlators, functional_from_operator, ghz_correlator,
    ghz_correlator_closed_form, optimal_settings, optimal_value_closed_form, quantum_prediction,
    sigma_theta, Mat2, SettingProfile, Settings, StateVector,
};
use lossbell::{BellFunctional, EfficiencyProfile, SiteCount};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn n(k: u32) -> SiteCount {
    SiteCount::new(k).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, sites: usize) -> SettingProfile {
    let mut draw = || {
        (0..sites)
            .map(|_| rng.random_range(0.0..TAU))
            .collect::<Vec<_>>()
    };
    let a = draw();
    let b = draw();
    SettingProfile::new(a, b).unwrap()
}

fn functionals(sites: u32) -> Vec<BellFunctional> {
    let mut v = vec![
        BellFunctional::mermin(),
        BellFunctional::ardehali(),
        BellFunctional::svetlichny(),
    ];
    if sites == 2 {
        v.push(BellFunctional::chsh());
    }
    v
}

#[test]
fn three_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 2..=6u32 {
        for _ in 0..200 {
            let p = random_profile(&mut rng, k as usize);
            for f in functionals(k) {
                let a = functional_from_correlators(n(k), &f, &p).unwrap();
                let b = functional_from_operator(n(k), &f, &p).unwrap();
                let c = functional_closed_form(&f, &p);
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                assert_abs_diff_eq!(a, c, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn correlators_follow_angle_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 1..=8usize {
        for _ in 0..50 {
            let thetas: Vec<f64> = (0..k).map(|_| rng.random_range(-TAU..TAU)).collect();
            assert_abs_diff_eq!(
                ghz_correlator(k, &thetas).unwrap(),
                ghz_correlator_closed_form(&thetas),
                epsilon = 1e-12
            );
        }
    }
}

#[test]
fn search_reaches_closed_form_optimum() {
    for k in 2..=12u32 {
        for f in functionals(k) {
            let opt = optimal_settings(n(k), &f).unwrap();
            let want = optimal_value_closed_form(n(k), &f);
            assert_abs_diff_eq!(opt.value, want, epsilon = 1e-9 * want);
            if k <= 8 {
                let sv = functional_from_correlators(n(k), &f, &opt.settings).unwrap();
                assert_abs_diff_eq!(sv, want, epsilon = 1e-9 * want);
            }
        }
    }
}

#[test]
fn optimum_beats_random_settings() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 2..=5u32 {
        for f in functionals(k) {
            let best = optimal_settings(n(k), &f).unwrap().value;
            for _ in 0..1000 {
                let p = random_profile(&mut rng, k as usize);
                assert!(functional_closed_form(&f, &p) <= best + 1e-9);
            }
        }
    }
}

/// Erasure with probability `1 - η` turns an outcome's mean into `η` times
/// its lossless mean, so the lossy functional is the expectation of
/// `⊗_k η_k (σ_α + iσ_β)`.
#[test]
fn loss_scales_by_efficiency_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 2..=5u32 {
        let sites = k as usize;
        let etas: Vec<f64> = (0..sites).map(|_| rng.random_range(0.3..1.0)).collect();
        let p = random_profile(&mut rng, sites);
        let psi = StateVector::ghz(sites).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let ops: Vec<Mat2> = (0..sites)
            .map(|s| {
                let (sa, sb) = (sigma_theta(p.thetas_a[s]), sigma_theta(p.thetas_b[s]));
                let mut m = sa;
                for r in 0..2 {
                    for c in 0..2 {
                        m[r][c] = etas[s] * (sa[r][c] + i * sb[r][c]);
                    }
                }
                m
            })
            .collect();
        let z = psi.expectation(&ops).unwrap();
        let profile = EfficiencyProfile::new(etas.clone()).unwrap();
        for f in functionals(k) {
            let q = quantum_prediction(n(k), &f, &profile, &Settings::Explicit(p.clone())).unwrap();
            assert_abs_diff_eq!(q.value, f.apply_f64(z.re, z.im), epsilon = 1e-10);
            assert_abs_diff_eq!(q.w, etas.iter().product::<f64>(), epsilon = 1e-15);
        }
    }
}

#[test]
fn large_sites_use_closed_form_only_for_optimal() {
    let f = BellFunctional::mermin();
    let etas = EfficiencyProfile::symmetric(n(14), 0.9).unwrap();
    let q = quantum_prediction(n(14), &f, &etas, &Settings::Optimal).unwrap();
    assert_abs_diff_eq!(q.lossless_value, 8192.0, epsilon = 1e-6);
    let p = SettingProfile::new(vec![0.0; 14], vec![0.0; 14]).unwrap();
    assert!(matches!(
        quantum_prediction(n(14), &f, &etas, &Settings::Explicit(p)),
        Err(lossbell::Error::Capacity(_))
    ));
}
