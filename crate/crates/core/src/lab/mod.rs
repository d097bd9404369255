//! Experiment registry: seeded sweeps that stress the boundedness statements
//! empirically and emit reproducible JSON reports.
//!
//! Every experiment is a pure function of its parameters and seed; rerunning
//! with the same inputs reproduces the report except for wall-clock runtime,
//! which the canonical serialization zeroes out.

pub mod experiments;
pub mod norm;
pub mod report;
pub mod specs;

pub use experiments::{
    carleson_counterexample, check_necessary_condition, gap_sequence, square_function_probe,
    verify_fefferman_stein, verify_pointwise_g, verify_theorem_a, verify_theorem_b,
    verify_theorem_b_weak, PsiSpec,
};
pub use norm::{estimate_multiplier_norm, NormBudget, NormEstimate};
pub use report::{ExperimentReport, GridMeta, RatioEntry};
pub use specs::{FamilySpec, SignalSpec, SymbolSpec, WeightSpec};

use crate::lattice::Grid;
use crate::Result;

/// Shared knobs for a sweep: grid shape, seed, and trial count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub period: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 4096,
            period: 4096.0,
            seed: 17,
            trials: 20,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.period)
    }

    /// The same configuration on a grid with doubled resolution.
    pub fn doubled(&self) -> ExperimentConfig {
        ExperimentConfig {
            n: self.n * 2,
            ..*self
        }
    }
}
