//! Brute-force check of the envelope: every one of the `9^n` deterministic
//! strategies is scored directly, and the concave majorant at a query `w`
//! is the best chord between any two scored points straddling it.

use std::collections::BTreeSet;

use lossbell::lhv::{enumerate_moment_points, envelope_for, EnumerationMode};
use lossbell::{BellFunctional, FunctionalKind, Rational, SiteCount};
use num_complex::Complex;

fn n(k: u32) -> SiteCount {
    SiteCount::new(k).unwrap()
}

/// Every `(a_k, b_k) ∈ {-1,0,1}²` assignment, as a list of sites.
fn all_strategies(sites: u32) -> Vec<Vec<(i64, i64)>> {
    let vals = [-1i64, 0, 1];
    let mut out = vec![Vec::new()];
    for _ in 0..sites {
        let mut next = Vec::with_capacity(out.len() * 9);
        for s in &out {
            for &a in &vals {
                for &b in &vals {
                    let mut t = s.clone();
                    t.push((a, b));
                    next.push(t);
                }
            }
        }
        out = next;
    }
    out
}

/// Distinct `(W, F)` pairs, scored straight from the outcome values.
fn scored_points(sites: u32, f: &BellFunctional) -> Vec<(Rational, Rational)> {
    let (cr, ci) = match f.kind {
        FunctionalKind::Mermin => (1, 0),
        _ => (f.s_r as i64, f.s_i as i64),
    };
    let mut set = BTreeSet::new();
    for s in all_strategies(sites) {
        let mut z = Complex::new(1i64, 0);
        let mut w = Rational::from_integer(1);
        for &(a, b) in &s {
            z *= Complex::new(a, b);
            w *= Rational::new((a.abs() + b.abs()) as i128, 2);
        }
        set.insert((w, Rational::from_integer((cr * z.re + ci * z.im) as i128)));
    }
    set.into_iter().collect()
}

/// Concave majorant at `w` via pairwise chords.
fn chord_max(points: &[(Rational, Rational)], w: Rational) -> Rational {
    let mut best: Option<Rational> = None;
    for &(pw, pf) in points {
        for &(qw, qf) in points {
            let v = if pw == w {
                pf
            } else if pw < w && w < qw {
                pf + (qf - pf) * (w - pw) / (qw - pw)
            } else {
                continue;
            };
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    best.expect("w covered by the point range")
}

fn functionals_for(sites: u32) -> Vec<BellFunctional> {
    let mut out = Vec::new();
    for kind in [
        FunctionalKind::Chsh,
        FunctionalKind::Mermin,
        FunctionalKind::Ardehali,
        FunctionalKind::Svetlichny,
    ] {
        if kind == FunctionalKind::Chsh && sites != 2 {
            continue;
        }
        for (sr, si) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let f = BellFunctional::new(kind, sr, si).unwrap();
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
    out
}

#[test]
fn envelope_matches_pairwise_chords() {
    for sites in 2..=4 {
        for f in functionals_for(sites) {
            let env = envelope_for(n(sites), &f).unwrap();
            env.validate().unwrap();
            let pts = scored_points(sites, &f);

            let mut queries: BTreeSet<Rational> = pts.iter().map(|p| p.0).collect();
            for k in 0..=128 {
                queries.insert(Rational::new(k, 128));
            }
            for w in queries {
                assert_eq!(
                    env.query(w).unwrap(),
                    chord_max(&pts, w),
                    "n = {sites}, {f}, w = {w}"
                );
            }

            // Vertices are attained by deterministic strategies.
            for v in env.vertices() {
                assert!(
                    pts.contains(&(v.w, v.f)),
                    "n = {sites}, {f}: vertex ({}, {}) not attained",
                    v.w,
                    v.f
                );
            }
        }
    }
}

#[test]
fn point_set_matches_direct_scoring() {
    for sites in 2..=5 {
        let set = enumerate_moment_points(n(sites), EnumerationMode::Dp).unwrap();
        let mut brute = BTreeSet::new();
        for s in all_strategies(sites) {
            let mut z = Complex::new(1i64, 0);
            let mut w = Rational::from_integer(1);
            for &(a, b) in &s {
                z *= Complex::new(a, b);
                w *= Rational::new((a.abs() + b.abs()) as i128, 2);
            }
            brute.insert((w, z.re, z.im));
        }
        let got: BTreeSet<_> = set.iter().map(|p| (p.w, p.re_z, p.im_z)).collect();
        assert_eq!(got, brute, "n = {sites}");
    }
}
