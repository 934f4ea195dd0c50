//! GHZ quantum predictions: a dense statevector oracle, the correlator
//! expansion of each functional, loss scaling, the optimal-settings search
//! and threshold crossings against the analytic bounds and the envelope.

mod expansion;
mod ghz;
mod statevector;

pub use expansion::{
    complex_product_terms, expand_functional, format_terms, CorrelatorTerm, SettingWord,
};
pub use ghz::{
    functional_closed_form, functional_from_correlators, functional_from_operator, ghz_correlator,
    ghz_correlator_closed_form, no_violation_check, optimal_settings, optimal_value_closed_form,
    quantum_prediction, svetlichny_violated, threshold_crossing, threshold_crossing_with_slope,
    Crossing, CrossingTarget, OptimalSettings, QuantumPrediction, SettingProfile, Settings,
};
pub use statevector::{eigenbasis_rows, sigma_theta, Mat2, StateVector, MAX_STATEVECTOR_SITES};
