//! Exhaustive LHV machinery: deterministic strategy enumeration, the exact
//! concave envelope over their mixtures, and random sampling for figures
//! and stochastic-model probes.

mod enumerate;
mod envelope;
mod sample;

pub use enumerate::{
    enumerate_moment_points, single_site_points, EnumerationMode, MomentPointSet, MAX_DIRECT_SITES,
};
pub use envelope::{upper_envelope, EnvelopePolyline, Vertex};
pub use sample::{
    mix, probe_point, response_moment, scatter_sample, seeded_stream, stochastic_probe,
    ProbeResult, ScatterPoint, SiteResponse, MAX_PROBE_SITES, RNG_ALGORITHM,
};

use crate::error::Result;
use crate::model::{BellFunctional, SiteCount};

/// Enumerates with the DP fold and builds the envelope of `f` in one step.
pub fn envelope_for(n: SiteCount, f: &BellFunctional) -> Result<EnvelopePolyline> {
    upper_envelope(&enumerate_moment_points(n, EnumerationMode::Dp)?, f)
}
