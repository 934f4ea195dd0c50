use lossbell::lhv::envelope_for;
use lossbell::quantum::{optimal_settings, SettingWord};
use lossbell::sim::{estimate_functionals, marginal_mean, simulate_design, violation_report};
use lossbell::{BellFunctional, EfficiencyProfile, SiteCount};

fn n(k: u32) -> SiteCount {
    SiteCount::new(k).unwrap()
}

#[test]
fn estimates_cover_prediction() {
    let f = BellFunctional::mermin();
    let settings = optimal_settings(n(3), &f).unwrap().settings;
    let etas = EfficiencyProfile::symmetric(n(3), 0.8).unwrap();
    let (want_w, want_f) = (0.512, 0.512 * 4.0);
    let mut misses = 0;
    for seed in 0..50 {
        let trials = simulate_design(n(3), &etas, &settings, 4000, seed).unwrap();
        let r = estimate_functionals(&trials, &f).unwrap();
        if (r.f_hat - want_f).abs() > 4.0 * r.se_f || (r.w_hat - want_w).abs() > 4.0 * r.se_w {
            misses += 1;
        }
    }
    assert!(misses <= 2, "{misses} of 50 runs outside 4 se");
}

#[test]
fn marginals_do_not_signal() {
    let f = BellFunctional::ardehali();
    let settings = optimal_settings(n(4), &f).unwrap().settings;
    let etas = EfficiencyProfile::new(vec![0.9, 0.7, 0.8, 0.95]).unwrap();
    let trials = simulate_design(n(4), &etas, &settings, 20_000, 3).unwrap();
    // GHZ marginals vanish whatever the other sites measure.
    for word in SettingWord::all(4) {
        for site in 0..4 {
            let (m, se) = marginal_mean(&trials, &word, site).unwrap();
            assert!(
                m.abs() <= 5.0 * se.max(1e-3),
                "{word} site {site}: {m} ± {se}"
            );
        }
    }
}

#[test]
fn lossless_violation_is_significant() {
    let f = BellFunctional::chsh();
    let settings = optimal_settings(n(2), &f).unwrap().settings;
    let trials = simulate_design(
        n(2),
        &EfficiencyProfile::perfect(n(2)),
        &settings,
        20_000,
        8,
    )
    .unwrap();
    let r = estimate_functionals(&trials, &f).unwrap();
    assert_eq!(r.w_hat, 1.0);
    let v = violation_report(&r, &envelope_for(n(2), &f).unwrap()).unwrap();
    assert!(v.violates() && v.significance > 10.0);
}

#[test]
fn heavy_loss_shows_no_violation() {
    let f = BellFunctional::mermin();
    let settings = optimal_settings(n(3), &f).unwrap().settings;
    let etas = EfficiencyProfile::symmetric(n(3), 0.5).unwrap();
    let trials = simulate_design(n(3), &etas, &settings, 20_000, 4).unwrap();
    let r = estimate_functionals(&trials, &f).unwrap();
    let v = violation_report(&r, &envelope_for(n(3), &f).unwrap()).unwrap();
    assert!(v.significance < 4.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let f = BellFunctional::mermin();
    let settings = optimal_settings(n(3), &f).unwrap().settings;
    let etas = EfficiencyProfile::symmetric(n(3), 0.85).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_design(n(3), &etas, &settings, 150_000, 21).unwrap())
    };
    assert_eq!(run(1), run(4));
}
