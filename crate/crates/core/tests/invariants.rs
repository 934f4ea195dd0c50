use std::collections::BTreeMap;

use lossbell::bounds::{holder_coefficient, mabk_bound_exact, within_analytic_bounds_exact};
use lossbell::export::{read_points_csv, write_points_csv, Metadata};
use lossbell::lhv::{
    enumerate_moment_points, envelope_for, scatter_sample, upper_envelope, EnumerationMode,
    MomentPointSet,
};
use lossbell::{BellFunctional, FunctionalKind, Rational, SiteCount};
use proptest::prelude::*;

fn n(k: u32) -> SiteCount {
    SiteCount::new(k).unwrap()
}

fn functional(kind: u8, sites: u32) -> BellFunctional {
    match kind % 3 {
        0 if sites == 2 => BellFunctional::chsh(),
        0 | 1 => BellFunctional::mermin(),
        _ => BellFunctional::ardehali(),
    }
}

#[test]
fn dp_matches_direct_up_to_eight_sites() {
    for k in 2..=8 {
        let dp = enumerate_moment_points(n(k), EnumerationMode::Dp).unwrap();
        let direct = enumerate_moment_points(n(k), EnumerationMode::Direct).unwrap();
        assert_eq!(dp, direct, "n = {k}");
        assert_eq!(dp.len(), 4 * (k as usize + 1) + 1);
    }
}

#[test]
fn dp_reaches_sixteen_sites() {
    let set = enumerate_moment_points(n(16), EnumerationMode::Dp).unwrap();
    assert_eq!(set.len(), 4 * 17 + 1);
    let env = envelope_for(n(16), &BellFunctional::ardehali()).unwrap();
    env.validate().unwrap();
    assert_eq!(
        env.query(Rational::from_integer(1)).unwrap(),
        Rational::from_integer(256)
    );
}

#[test]
fn points_csv_round_trip() {
    for k in 2..=8 {
        let set = enumerate_moment_points(n(k), EnumerationMode::Dp).unwrap();
        let meta = Metadata::new(
            "envelope",
            BTreeMap::from([("n".to_string(), k.to_string())]),
            None,
        );
        let mut buf = Vec::new();
        write_points_csv(&set, &meta, &mut buf).unwrap();
        let back = read_points_csv(n(k), buf.as_slice()).unwrap();
        assert_eq!(back, set);
        // Re-reading the same file gives identical bytes on re-export.
        let mut again = Vec::new();
        write_points_csv(&back, &meta, &mut again).unwrap();
        assert_eq!(buf, again);
    }
}

#[test]
fn envelope_lies_below_holder_for_every_functional() {
    for k in 2..=10 {
        for kind in [
            FunctionalKind::Mermin,
            FunctionalKind::Ardehali,
            FunctionalKind::Svetlichny,
        ] {
            let f = BellFunctional::of_kind(kind);
            let env = envelope_for(n(k), &f).unwrap();
            let h2 = holder_coefficient(n(k), &f).squared();
            for v in env.vertices() {
                assert!(
                    v.f * v.f <= h2 * v.w,
                    "n = {k}, {f}, vertex ({}, {})",
                    v.w,
                    v.f
                );
            }
        }
    }
}

#[test]
fn hull_meets_mabk_at_half() {
    for k in 2..=8 {
        let f = BellFunctional::natural(n(k));
        let env = envelope_for(n(k), &f).unwrap();
        let v = env.query(Rational::new(1, 2)).unwrap();
        assert_eq!(v * v, mabk_bound_exact(n(k), &f).squared(), "n = {k}, {f}");
    }
}

#[test]
fn straight_line_below_two_to_minus_n() {
    // Below W = 2^-n the envelope is one segment through the origin.
    for k in 2..=10 {
        for kind in [
            FunctionalKind::Mermin,
            FunctionalKind::Ardehali,
            FunctionalKind::Svetlichny,
        ] {
            let env = envelope_for(n(k), &BellFunctional::of_kind(kind)).unwrap();
            assert!(env.vertices()[1].w >= Rational::new(1, 1 << k));
            let slope = env.initial_slope();
            for i in 1..=8 {
                let w = Rational::new(i, 8 << k);
                assert_eq!(env.query(w).unwrap(), slope * w);
            }
        }
    }
}

#[test]
fn scatter_stays_under_envelope() {
    for k in 2..=6 {
        let f = BellFunctional::natural(n(k));
        let set = enumerate_moment_points(n(k), EnumerationMode::Dp).unwrap();
        let env = upper_envelope(&set, &f).unwrap();
        let pts = scatter_sample(&set, &f, 2000, 11).unwrap();
        for p in &pts {
            assert!(p.f <= env.query(p.w).unwrap());
        }
        assert_eq!(pts, scatter_sample(&set, &f, 2000, 11).unwrap());
    }
}

proptest! {
    #[test]
    fn star_shaped(k in 2u32..=10, kind in 0u8..3, a in 1i128..=1024, b in 1i128..=1024) {
        let f = functional(kind, k);
        let env = envelope_for(n(k), &f).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let (w1, w2) = (Rational::new(lo, 1024), Rational::new(hi, 1024));
        // Concave through the origin: F(w)/w is nonincreasing.
        prop_assert!(env.query(w1).unwrap() / w1 >= env.query(w2).unwrap() / w2);
        // Monotone.
        prop_assert!(env.query(w1).unwrap() <= env.query(w2).unwrap());
    }

    #[test]
    fn concave(k in 2u32..=10, kind in 0u8..3, a in 0i128..=1024, b in 0i128..=1024, t in 0i128..=16) {
        let f = functional(kind, k);
        let env = envelope_for(n(k), &f).unwrap();
        let (w1, w2) = (Rational::new(a, 1024), Rational::new(b, 1024));
        let lam = Rational::new(t, 16);
        let one = Rational::from_integer(1);
        let mid = lam * w1 + (one - lam) * w2;
        let chord = lam * env.query(w1).unwrap() + (one - lam) * env.query(w2).unwrap();
        prop_assert!(env.query(mid).unwrap() >= chord);
    }

    #[test]
    fn natural_envelope_within_analytic_bounds(k in 2u32..=8, a in 0i128..=4096) {
        let f = BellFunctional::natural(n(k));
        let env = envelope_for(n(k), &f).unwrap();
        let w = Rational::new(a, 4096);
        prop_assert!(within_analytic_bounds_exact(n(k), &f, w, env.query(w).unwrap()).unwrap());
    }

    #[test]
    fn point_set_closed_under_relabel(k in 2u32..=8) {
        // Swapping A and B at every site maps z to i^n conj(z).
        let set: MomentPointSet = enumerate_moment_points(n(k), EnumerationMode::Dp).unwrap();
        for p in set.iter() {
            let mut q = *p;
            let (re, im) = (p.re_z, -p.im_z);
            let (re, im) = match k % 4 {
                0 => (re, im),
                1 => (-im, re),
                2 => (-re, -im),
                _ => (im, -re),
            };
            q.re_z = re;
            q.im_z = im;
            prop_assert!(set.contains(&q));
        }
    }
}
