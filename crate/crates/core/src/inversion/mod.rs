//! Reconstruction formulas as truncated cone integrals over (εI, ρI) with
//! convergence reports: Calderón, Riesz inversion, both Radon inversions and
//! the ridgelet reproducing formula.

pub mod grid;
pub mod multiplier;
pub mod schedule;
pub mod spectral;

pub use grid::{calderon_reconstruct, definition_sum, radon_invert_method1, radon_invert_method2, ridgelet_identity_gap, ridgelet_reproduce, riesz_invert, Reconstruction};
pub use multiplier::{calderon_multiplier, radon_inversion_multiplier, riesz_inversion_multiplier, scale_multiplier, scale_multiplier_cone};
pub use schedule::{ConvergenceReport, ReportStep, TruncationSchedule, Verdict, CAUCHY_TOL};
pub use spectral::{calderon_spectral, radon_invert_spectral, radon_methods_gap, riesz_invert_spectral, PowerNodes, RadonMethod};
