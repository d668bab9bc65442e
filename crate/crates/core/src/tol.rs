//! Tolerance configuration.
//!
//! None of the thresholds below come from the underlying theory; they are
//! artifact settings sized for double precision arithmetic on jets of order
//! up to 4.  Every report that quotes one of them carries
//! [`TOLERANCE_NOTE`] so downstream consumers know the basis.

/// Stamped onto reports next to any quoted threshold.
pub const TOLERANCE_NOTE: &str =
    "tolerances are artifact defaults (configurable), not constants of the underlying theory";

/// Relative tolerances used across the crate.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Relative rank cutoff for SVD-based rank and conditioning decisions.
    pub rank: f64,
    /// Relative tolerance for closed-form identity residuals.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        // Double-precision headroom for 4th-order jets.
        Tolerances {
            rank: 1e-9,
            residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn max_condition(&self) -> f64 {
        1.0 / self.rank
    }
}
