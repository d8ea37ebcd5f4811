//! Numeric thresholds shared by the kernels.
//!
//! The geometry gives exact zero conditions only (flat, umbilic, collinear,
//! ...); every predicate here compares against a scale-aware slack.

/// `EG - F^2 > IMMERSION * max(E, G)^2`.
pub const IMMERSION: f64 = 1e-12;

/// Flat point: `max(|L|,|M|,|N|) < FLAT * (1 + scale^2)`; also the parabolic band for `|k|`.
pub const FLAT: f64 = 1e-10;

/// Relative slack for equal lengths / equal curvatures: `|a-b| < EQUAL * (|a|+|b|+1)`.
pub const EQUAL: f64 = 1e-8;

/// Rank test for the half-diameters of the curvature ellipse.
pub const SEGMENT_RANK: f64 = 1e-10;

/// Refuse the geometric frame when `κ²-k < UMBILIC * (κ² + |k| + 1)`.
pub const UMBILIC: f64 = 1e-10;

/// Central-difference step for frame derivatives, as a fraction of the domain scale.
pub const FRAME_STEP: f64 = 1e-4;

/// Default compatibility threshold for reconstruction (absolute, O(1) fields).
pub const COMPATIBILITY: f64 = 1e-3;

/// Net holonomy abort threshold relative to the patch diameter.
pub const HOLONOMY: f64 = 1e-3;

/// Default finite-difference step: `eps^(1/4)` times the domain scale.
pub fn default_fd_step(domain_scale: f64) -> f64 {
    f64::EPSILON.powf(0.25) * domain_scale
}

pub fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() < EQUAL * (a.abs() + b.abs() + 1.0)
}
