//! Tight local-hidden-variable bounds for two-setting, `N`-site Bell
//! functionals under detection loss.
//!
//! Outcomes are `±1`, or `0` when a detector misses, and every emission is
//! heralded. The overall efficiency functional
//! `W_N = 2^-N ⟨∏(|A_k| + |B_k|)⟩` is the conditioning variable. The crate
//! provides:
//!
//! * [`lhv`]: exhaustive enumeration of deterministic strategies and the exact
//!   concave envelope `F_max(W)` that bounds every LHV mixture at a given `W`;
//! * [`bounds`]: the Holder, MABK and Svetlichny closed forms, the three
//!   `W` regions, and efficiency thresholds;
//! * [`quantum`]: lossy GHZ predictions backed by a statevector oracle;
//! * [`sim`]: a Monte Carlo of the heralded experiment and its estimators;
//! * [`export`]: the CSV/JSON formats shared by the CLI and bindings.

pub mod bounds;
pub mod error;
pub mod export;
pub mod lhv;
pub mod model;
pub mod quantum;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    functional_value, Advisory, BellFunctional, DeterministicStrategy, EfficiencyProfile,
    FunctionalKind, MomentPoint, Outcome, Rational, SiteCount,
};
