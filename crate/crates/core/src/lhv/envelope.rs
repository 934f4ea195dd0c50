use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::enumerate::MomentPointSet;
use crate::error::{Error, Result};
use crate::model::{BellFunctional, Rational, SiteCount};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub w: Rational,
    pub f: Rational,
}

impl Vertex {
    pub fn w_f64(&self) -> f64 {
        self.w.to_f64().unwrap_or(f64::NAN)
    }

    pub fn f_f64(&self) -> f64 {
        self.f.to_f64().unwrap_or(f64::NAN)
    }
}

/// Concave piecewise-linear upper envelope `F_max(W)` with exact vertices.
///
/// Vertices are strictly increasing in `w`, start at the origin, and no three
/// consecutive vertices are collinear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopePolyline {
    sites: SiteCount,
    functional: BellFunctional,
    vertices: Vec<Vertex>,
}

/// `(b - o) × (c - o)` on exact rationals.
fn cross(o: &Vertex, b: &Vertex, c: &Vertex) -> Rational {
    (b.w - o.w) * (c.f - o.f) - (b.f - o.f) * (c.w - o.w)
}

impl EnvelopePolyline {
    pub fn sites(&self) -> SiteCount {
        self.sites
    }

    pub fn functional(&self) -> BellFunctional {
        self.functional
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Checks every structural invariant of the polyline.
    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        let first = v
            .first()
            .ok_or_else(|| Error::Invariant("envelope has no vertices".into()))?;
        if !first.w.is_zero() || !first.f.is_zero() {
            return Err(Error::Invariant("envelope must start at the origin".into()));
        }
        for pair in v.windows(2) {
            if pair[1].w <= pair[0].w {
                return Err(Error::Invariant("vertex w not strictly increasing".into()));
            }
            if pair[1].f < pair[0].f {
                return Err(Error::Invariant("envelope decreases".into()));
            }
        }
        for t in v.windows(3) {
            if !cross(&t[0], &t[1], &t[2]).is_negative() {
                return Err(Error::Invariant(
                    "envelope not strictly concave at a vertex".into(),
                ));
            }
        }
        Ok(())
    }

    /// `F_max(w)` by linear interpolation between the bracketing vertices.
    pub fn query(&self, w: Rational) -> Result<Rational> {
        if w.is_negative() || w > Rational::from_integer(1) {
            return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
        }
        let v = &self.vertices;
        let idx = v.partition_point(|x| x.w < w);
        if idx < v.len() && v[idx].w == w {
            return Ok(v[idx].f);
        }
        if idx == 0 || idx == v.len() {
            return Err(Error::Domain(format!(
                "w = {w} outside the envelope support"
            )));
        }
        let (a, b) = (&v[idx - 1], &v[idx]);
        Ok(a.f + (b.f - a.f) * (w - a.w) / (b.w - a.w))
    }

    /// Floating-point evaluation for presentation and root finding.
    pub fn query_f64(&self, w: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!("w = {w} outside [0, 1]")));
        }
        let v = &self.vertices;
        let idx = v.partition_point(|x| x.w_f64() < w).clamp(1, v.len() - 1);
        let (a, b) = (&v[idx - 1], &v[idx]);
        let (aw, af, bw, bf) = (a.w_f64(), a.f_f64(), b.w_f64(), b.f_f64());
        Ok(af + (bf - af) * (w - aw) / (bw - aw))
    }

    /// Slope of the segment leaving the origin.
    pub fn initial_slope(&self) -> Rational {
        let v = &self.vertices[1];
        v.f / v.w
    }
}

/// Concave majorant of `{(w, f(p))} ∪ {(0, 0)}`: the largest `⟨F⟩` any
/// mixture of deterministic strategies reaches at `⟨W⟩ = w`.
pub fn upper_envelope(points: &MomentPointSet, f: &BellFunctional) -> Result<EnvelopePolyline> {
    if points.is_empty() {
        return Err(Error::Invariant("empty moment point set".into()));
    }
    let n = points.sites();
    f.check_sites(n)?;

    // Best functional value at each distinct w.
    let mut best: BTreeMap<Rational, i64> = BTreeMap::new();
    best.insert(Rational::zero(), 0);
    for p in points.iter() {
        let v = f.apply(p.re_z, p.im_z);
        best.entry(p.w)
            .and_modify(|b| *b = (*b).max(v))
            .or_insert(v);
    }

    // Monotone chain over increasing w; non-right turns are popped, which
    // also removes collinear interior vertices.
    let mut hull: Vec<Vertex> = Vec::with_capacity(best.len());
    for (w, v) in best {
        let c = Vertex {
            w,
            f: Rational::from_integer(v as i128),
        };
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &c).is_negative()
        {
            hull.pop();
        }
        hull.push(c);
    }

    let env = EnvelopePolyline {
        sites: n,
        functional: *f,
        vertices: hull,
    };
    env.validate()?;
    Ok(env)
}
