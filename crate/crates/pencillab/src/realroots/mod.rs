//! Real root counting for the critical-point equations: a grid/bisection
//! counter on RP¹ with two independent oracles (exact Sturm sequences and
//! companion-matrix eigenvalues), and a certified Bernstein-subdivision
//! counter for the critical system on RP².

mod circle;
mod eigen;
mod rp2;
mod sturm;

pub use circle::{count_roots_circle, critical_angles, critical_angles_rootcheck, CircleOpts};
pub use eigen::{eigen_real_count, eigen_roots};
pub use rp2::{count_crit_rp2, Rp2Opts};
pub use sturm::sturm_count;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RootError {
    #[error("zero form rejected")]
    ZeroForm,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("nonempty base locus: |resultant| below threshold")]
    BaseLocus,
    #[error("proportional forms define no pencil")]
    ProportionalForms,
    #[error("degenerate critical system (non-isolated solutions suspected)")]
    DegenerateSystem,
}

impl From<crate::forms::FormError> for RootError {
    fn from(e: crate::forms::FormError) -> Self {
        match e {
            crate::forms::FormError::ZeroForm => RootError::ZeroForm,
            crate::forms::FormError::DegreeMismatch(a, b) => RootError::DegreeMismatch(a, b),
        }
    }
}

/// Region of parameter space on which a count could not be certified.
#[derive(Debug, Clone, PartialEq)]
pub enum UncertainRegion {
    /// Angle interval on RP¹.
    Interval(f64, f64),
    /// Box in an affine chart of RP²; `chart` is the coordinate set to 1.
    Box {
        chart: usize,
        lo: [f64; 2],
        hi: [f64; 2],
    },
}

/// Count of distinct real projective solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCount {
    pub count: usize,
    pub certified: bool,
    pub uncertain_regions: Vec<UncertainRegion>,
    pub method: &'static str,
}

/// Sorted critical angles in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleList {
    pub angles: Vec<f64>,
    pub certified: bool,
}
