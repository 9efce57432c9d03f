//! Pass thresholds and fixed experiment constants. These are desk-scale
//! calibrations; tighten them here to make every experiment stricter at once.

/// Minimum fraction of paths reaching the top level in the blowup experiment.
pub const HIT_FRACTION: f64 = 0.99;
/// Minimum fraction of exploded paths where `|Y|` also passed `L/10`.
pub const INTERLEAVE_FRACTION: f64 = 0.95;
/// Maximum `median σ_{L_max} / median σ_{L_max/100}`.
pub const MEDIAN_RATIO: f64 = 1.5;
/// Maximum fraction of blowup paths ending in step underflow.
pub const OVERFLOW_FRACTION: f64 = 0.01;
/// Maximum hit fraction for the linear-growth control.
pub const CONTROL_FRACTION: f64 = 0.01;
/// Minimum gap between explosive and control hit fractions.
pub const SEPARATION: f64 = 0.9;
/// Stop level for blowup runs, as a multiple of the top level.
pub const BLOWUP_STOP_FACTOR: f64 = 1e4;

/// Slack on the quadratic shrinkage of the coupling divergence.
pub const SCALING_SLACK: f64 = 10.0;
/// Quantile of the path-minimum distance to the origin.
pub const ORIGIN_QUANTILE: f64 = 0.05;
/// Smallest allowed `q(dt/2) / q(dt)`.
pub const REFINEMENT_GUARD: f64 = 0.5;

/// Minimum fraction of constructed solutions away from the origin.
pub const NONUNIQUE_FRACTION: f64 = 0.99;
/// "Away from the origin" means `|X| > NONZERO_FACTOR · origin_eps`.
pub const NONZERO_FACTOR: f64 = 10.0;

/// Growth exponent of the transience threshold `max(T^e, 1)`.
pub const TRANSIENCE_EXPONENT: f64 = 0.4;
/// Minimum transient fraction at the last checkpoint.
pub const TRANSIENCE_FRACTION: f64 = 0.95;

/// Standard errors allowed for Monte Carlo moment checks.
pub const SE_MULTIPLE: f64 = 3.0;
/// Standard errors allowed for the heavy-tailed fractional moment check.
pub const HEAVY_SE_MULTIPLE: f64 = 4.0;
/// Relative tolerance of quadrature against the closed form.
pub const CLOSED_FORM_REL: f64 = 1e-8;
/// Relative tolerance between the two quadrature representations.
pub const MELLIN_REL: f64 = 1e-6;
/// Relative tolerance of the mean origin integral against its closed form.
pub const LEMMA2_REL: f64 = 0.05;
/// Minimum fraction of paths flagged divergent above the critical exponent.
pub const DIVERGENT_FRACTION: f64 = 0.95;
/// Maximum relative change of the long-horizon integral when the horizon doubles.
pub const LEMMA4_REL: f64 = 0.02;

/// Stop level that only catches numerical runaway in non-blowup experiments.
pub const RUNAWAY_LEVEL: f64 = 1e12;

pub(crate) const REFINE_TAG: u64 = 0x0217_0000;
pub(crate) const ZERO_TAG: u64 = 0x2E20;
