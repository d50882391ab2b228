//! Slice interpolation by symmetric curvature-regularized registration.
//!
//! Given two neighbouring slices `R1` and `R2`, the crate estimates a dense
//! displacement field `u` that carries `R1` onto `R2` by minimizing a sum of
//! squared differences between the two images, each warped part of the way,
//! plus a curvature penalty on `u`. The missing slice is the average of the
//! two warped inputs.
//!
//! ```
//! use slicereg::{
//!     generate_phantom_pair, interpolate_midpoint, linear_interpolate, msd,
//!     register_symmetric, PhantomSpec, RegistrationConfig,
//! };
//!
//! let spec = PhantomSpec::disk(48, 48, 8.0)
//!     .with_center(21.5, 23.5)
//!     .with_translation(4.0, 0.0);
//! let (r1, r2, truth) = generate_phantom_pair(&spec)?;
//!
//! let result = register_symmetric(&r1, &r2, &RegistrationConfig::default())?;
//! let mid = interpolate_midpoint(&r1, &r2, &result.field)?;
//! let blend = linear_interpolate(&r1, &r2, 0.5)?;
//! assert!(msd(&truth, &mid)? < msd(&truth, &blend)?);
//! # Ok::<(), slicereg::Error>(())
//! ```
//!
//! Modules:
//!
//! * [`grid`], [`image`], [`pgm`]: images, sampling, warping, metrics, PGM I/O.
//! * [`curvature`]: mirrored Laplacian, biharmonic operator and the
//!   cosine-transform solver for `(I + α τ Δ²) u = rhs`.
//! * [`registration`]: symmetric and single-direction registration.
//! * [`interpolation`]: slice synthesis and baselines.
//! * [`phantom`]: synthetic test pairs with exact midpoints.
//! * [`field`]: displacement fields and the `DF2` file format.

pub mod curvature;
pub mod error;
pub mod field;
pub mod grid;
pub mod image;
pub mod interpolation;
pub mod pgm;
pub mod phantom;
pub mod registration;

pub use curvature::{biharmonic, laplacian, CurvatureSolver};
pub use error::{Error, Result};
pub use field::DisplacementField;
pub use grid::{Grid, Image2D, ScalarGrid};
pub use image::{gradient, msd, sample_bilinear, ssd, warp};
pub use interpolation::{
    interpolate_at_ratio, interpolate_midpoint, interpolate_single_direction, interpolate_stack,
    linear_interpolate,
};
pub use pgm::{load_pgm, save_pgm};
pub use phantom::{
    corpus_config, generate_phantom_pair, standard_corpus, PhantomShape, PhantomSpec,
    CORPUS_MSD_RATIO_BOUND,
};
pub use registration::{
    energy, energy_single_direction, force_single_direction, force_symmetric,
    register_single_direction, register_symmetric, smoothness_energy, RegistrationConfig,
    RegistrationResult,
};

/// `(I + α τ Δ²)` solver for a `width x height` grid.
pub fn build_solver(width: usize, height: usize, alpha: f64, tau: f64) -> Result<CurvatureSolver> {
    CurvatureSolver::new(width, height, alpha, tau)
}

/// Solves `(I + α τ Δ²) u = rhs` with a prebuilt solver.
pub fn solve_semi_implicit(solver: &CurvatureSolver, rhs: &ScalarGrid) -> Result<ScalarGrid> {
    solver.solve(rhs)
}
