//! Centralized numeric tolerances.
//!
//! Floating-point checks throughout the crate use these constants rather
//! than ad-hoc magic numbers. Exact (rational-mode) checks never consult
//! them.

/// General agreement tolerance for norm values, Parseval sums, and
/// cross-method comparisons. Desk-scale averages accumulate well under
/// 1e-12 of rounding; 1e-9 leaves headroom.
pub const FLOAT_EQ: f64 = 1e-9;

/// Fast-transform vs direct-sum cross-check tolerance.
pub const DFT_CROSS: f64 = 1e-10;

/// Slack used when scanning for an argmax over floating-point magnitudes.
/// Candidates within this slack of the incumbent are treated as ties and
/// resolved toward the smaller index, keeping tie-breaking deterministic
/// in the presence of rounding noise.
pub const ARGMAX_SLACK: f64 = 1e-12;

/// Bound on the imaginary part allowed to survive an average that is
/// provably real; beyond this the computation is treated as broken.
pub const NORM_IMAG: f64 = 1e-9;

/// Zero test for additive derivatives of float-valued functions.
pub const FLOAT_ZERO: f64 = 1e-9;
