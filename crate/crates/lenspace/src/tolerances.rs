//! Pinned tolerances and reference values for the validation suites.
//!
//! Every threshold used by the experiment verdicts and the acceptance suite
//! is defined here, not inline, so the gates are auditable in one place.

/// Default grid step of the collapsing-strip experiment.
pub const COUNTEREXAMPLE_H: f64 = 1.0 / 4096.0; // 2^-12

/// Default profile indices for the collapsing-strip experiment. At
/// `h = 2^-12` the strip of `n = 9` is resolved by exactly 4 cells, the
/// resolution precondition's floor; `n = 10` would be under-resolved.
pub const COUNTEREXAMPLE_N_VALUES: [u32; 8] = [2, 3, 4, 5, 6, 7, 8, 9];

/// Strips must be resolved by at least this many grid cells.
pub const STRIP_MIN_CELLS: f64 = 4.0;

/// Upper bound the staircase curves certify for every profile distance.
pub const COUNTEREXAMPLE_BOUND: f64 = 11.0 / 8.0;

/// Slack on the staircase bound (absolute).
pub const COUNTEREXAMPLE_BOUND_SLACK: f64 = 0.007;

/// Monotonicity slack for the profile distance table (absolute).
pub const MONOTONE_SLACK: f64 = 1e-3;

/// Reference distance for the constant weight 2 between the probe points.
pub const REFERENCE_D_AB: f64 = 7.0 / 4.0;

/// Relative tolerance on the reference run.
pub const REFERENCE_REL_TOL: f64 = 0.01;

/// Relative tolerance for the limit-value check against the refraction
/// oracle.
pub const LIMIT_REL_TOL: f64 = 0.015;

/// Relative tolerance for the fine-grid (h/2) cross-check of the limit value.
pub const LIMIT_CROSS_CHECK_REL_TOL: f64 = 0.005;

/// Floor on the minimal candidate-curve length under the limit proxy.
pub const NOT_LENGTH_MIN_LENGTH: f64 = REFERENCE_D_AB - 0.02;

/// Certified gap between curve lengths and the proxy distance.
pub const NOT_LENGTH_MIN_GAP: f64 = 0.34;

/// Sandwich constant of the collapsing-strip family.
pub const MEMBERSHIP_ALPHA: f64 = 2.0;

/// Pair sample size for the sandwich part of membership validation.
pub const MEMBERSHIP_PAIRS: usize = 512;

/// Relative tolerance of the sandwich check (after discounting the certified
/// grid enclosure).
pub const MEMBERSHIP_REL_TOL: f64 = 1e-6;

/// Quadruple sample size for the equi-Lipschitz estimate.
pub const EQUI_LIPSCHITZ_QUADS: usize = 1024;

/// Additive slack of the equi-Lipschitz estimate.
pub const EQUI_LIPSCHITZ_SLACK: f64 = 1e-6;

/// Trials for the McShane generator-monotonicity audit.
pub const MCSHANE_TRIALS: usize = 100;

/// Slack for McShane gaps at generator targets.
pub const MCSHANE_TOL: f64 = 1e-9;

/// Margin ceiling for the degenerate (constant-sequence) convergence checks.
pub const GAMMA_DEGENERATE_TOL: f64 = 1e-9;
