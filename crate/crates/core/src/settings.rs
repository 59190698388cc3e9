//! Numeric settings threaded through the geometry, word and certification layers.
//!
//! Every tolerance and budget lives here so the CLI config and the library
//! agree on one set of defaults.

/// Default tolerance on `|tr² − 4|` and `|Im tr²|` when classifying isometries.
pub const CLASS_TOL: f64 = 1e-9;
/// Two H³ points closer than this are treated as the same point.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Slack on inversive products when deciding whether two planes cross.
pub const PLANE_TOL: f64 = 1e-10;
/// `|tr² − 4|` below this flags a primitive as a parabolic suspect.
pub const PARABOLIC_TOL: f64 = 1e-6;
/// Minimum bisector gap `c` required by the plane criterion.
pub const CERT_GAP: f64 = 1e-4;
/// L∞ trace-fingerprint distance below which two characters are identified.
pub const FINGERPRINT_TOL: f64 = 1e-6;
/// Largest relator residual accepted by certifier consumers.
pub const RESIDUAL_BOUND: f64 = 1e-6;
/// Chordal distance below which two boundary points coincide.
pub const SAME_AXIS_TOL: f64 = 1e-8;
/// Radius cap for Cayley balls.
pub const BALL_RADIUS: usize = 16;
/// Primitive word-length cap used by scans.
pub const SCAN_MAX_LEN: usize = 10;
/// Primitive word-length cap used by single certifications.
pub const CERT_MAX_LEN: usize = 12;
/// Radius of the conjugator ball used by the axis-linking simplicity test.
pub const CONJUGATOR_DEPTH: usize = 3;
/// Largest stride tried by the auto-tuner.
pub const MAX_STRIDE: usize = 4;
/// Periods of a quasi-axis materialised on each side of the identity.
pub const WINDOW: usize = 3;
/// Cap on candidate words examined by primitive enumeration.
pub const CANDIDATE_BUDGET: usize = 1_000_000;
/// Cap on words explored while searching for equal-length geodesic rewrites.
pub const REWRITE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSettings {
    pub class_tol: f64,
    pub degenerate_tol: f64,
    pub plane_tol: f64,
    pub parabolic_tol: f64,
    pub cert_gap: f64,
    pub fingerprint_tol: f64,
    pub residual_bound: f64,
    pub same_axis_tol: f64,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            class_tol: CLASS_TOL,
            degenerate_tol: DEGENERATE_TOL,
            plane_tol: PLANE_TOL,
            parabolic_tol: PARABOLIC_TOL,
            cert_gap: CERT_GAP,
            fingerprint_tol: FINGERPRINT_TOL,
            residual_bound: RESIDUAL_BOUND,
            same_axis_tol: SAME_AXIS_TOL,
        }
    }
}
