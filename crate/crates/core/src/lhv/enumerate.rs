use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Gaussian, MomentPoint, SiteCount};

/// Largest site count the full `9^n` product enumeration accepts.
pub const MAX_DIRECT_SITES: u32 = 8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationMode {
    /// Walk all `9^n` assignments.
    Direct,
    /// Fold sites in ascending order, deduplicating after each fold.
    Dp,
}

impl std::str::FromStr for EnumerationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(EnumerationMode::Direct),
            "dp" => Ok(EnumerationMode::Dp),
            _ => Err(Error::Domain(format!("unknown enumeration mode '{s}'"))),
        }
    }
}

/// Scaled key `(∏(|a|+|b|), Re z, Im z)` used while enumerating.
type Key = (u64, i64, i64);

/// The nine single-site factors `(|a|+|b|, a + i b)`.
fn site_factors() -> impl Iterator<Item = (u64, Gaussian)> {
    (-1i64..=1)
        .flat_map(|a| (-1i64..=1).map(move |b| ((a.abs() + b.abs()) as u64, Gaussian::new(a, b))))
}

/// Deduplicated moment points of every deterministic strategy on `n` sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPointSet {
    n: SiteCount,
    points: BTreeSet<MomentPoint>,
}

impl MomentPointSet {
    pub fn sites(&self) -> SiteCount {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &MomentPoint) -> bool {
        self.points.contains(p)
    }

    /// Points in ascending `(w, Re z, Im z)` order.
    pub fn iter(&self) -> impl Iterator<Item = &MomentPoint> {
        self.points.iter()
    }

    /// Builds a set from arbitrary points, checking the site count matches.
    pub fn from_points(
        n: SiteCount,
        points: impl IntoIterator<Item = MomentPoint>,
    ) -> Result<Self> {
        let points: BTreeSet<_> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.sites != n) {
            return Err(Error::Dimension(format!(
                "point with {} sites in a {n}-site set",
                p.sites
            )));
        }
        Ok(MomentPointSet { n, points })
    }

    fn from_keys(n: SiteCount, keys: impl IntoIterator<Item = Key>) -> Self {
        let points = keys
            .into_iter()
            .map(|(w, re, im)| MomentPoint::from_parts(n, w, Gaussian::new(re, im)))
            .collect();
        MomentPointSet { n, points }
    }
}

/// Every distinct `(W, z)` reachable by a deterministic strategy on `n` sites.
pub fn enumerate_moment_points(n: SiteCount, mode: EnumerationMode) -> Result<MomentPointSet> {
    match mode {
        EnumerationMode::Direct => {
            if n.get() > MAX_DIRECT_SITES {
                return Err(Error::Capacity(format!(
                    "direct enumeration supports n ≤ {MAX_DIRECT_SITES}, got {n}"
                )));
            }
            Ok(MomentPointSet::from_keys(n, enumerate_direct(n.get())))
        }
        EnumerationMode::Dp => Ok(MomentPointSet::from_keys(n, enumerate_dp(n.get()))),
    }
}

/// The nine points of a single site, for inspection and tests.
pub fn single_site_points() -> Vec<(u64, Gaussian)> {
    let mut v: Vec<_> = site_factors().collect();
    v.sort_by_key(|(w, z)| (*w, z.re, z.im));
    v.dedup();
    v
}

fn enumerate_direct(n: u32) -> HashSet<Key> {
    fn walk(depth: u32, w: u64, z: Gaussian, out: &mut HashSet<Key>) {
        if depth == 0 {
            out.insert((w, z.re, z.im));
            return;
        }
        for (sw, sz) in site_factors() {
            walk(depth - 1, w * sw, z * sz, out);
        }
    }

    // The first site's nine branches are independent workers; set union
    // is associative, so the reduction order does not matter.
    let factors: Vec<_> = site_factors().collect();
    factors
        .into_par_iter()
        .map(|(w, z)| {
            let mut out = HashSet::new();
            walk(n - 1, w, z, &mut out);
            out
        })
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

fn enumerate_dp(n: u32) -> HashSet<Key> {
    let mut states: HashSet<Key> = HashSet::from([(1, 1, 0)]);
    for _ in 0..n {
        let mut next = HashSet::with_capacity(states.len() * 4);
        for &(w, re, im) in &states {
            let z = Gaussian::new(re, im);
            for (sw, sz) in site_factors() {
                let p = z * sz;
                next.insert((w * sw, p.re, p.im));
            }
        }
        states = next;
    }
    states
}
