//! Fibering analysis, energy thresholds and Sobolev quotients.

pub mod fiber;
pub mod quotient;
pub mod threshold;

pub use fiber::{
    closed_form_t, fiber_derivative, fiber_max, fiber_value, FiberCurve, FunctionalParams,
};
pub use quotient::{bubble_quotient, bubble_theta, sobolev_quotient, test_function_quotient};
pub use threshold::{
    classify_regime, deep_ladder, threshold_a, threshold_a_lambda, verify_threshold, MuMode,
    Regime, ThresholdReport, ThresholdRung,
};
