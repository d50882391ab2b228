//! Curvature-regularized registration of two slices.
//!
//! The symmetric model deforms both inputs toward an intermediate position:
//! with a displacement `u` carrying slice 1 onto slice 2 and a ratio `r`,
//! the compared images are `R1(x - r u)` and `R2(x + (1 - r) u)`. The
//! objective is
//!
//! ```text
//! E[u] = ½ Σ (R1(x - r u) - R2(x + (1 - r) u))²  +  α ½ Σ_l Σ (Δ u_l)²
//! ```
//!
//! and is minimized by the semi-implicit iteration
//!
//! ```text
//! (I + α τ Δ²) u_l^{k+1} = u_l^k + τ F_l^k,   u^0 = 0,
//! ```
//!
//! where `F` is the negative gradient of the distance term. The
//! single-direction model keeps the reference fixed and moves only the
//! template, `½ Σ (R(x) - T(x + u))²`.

use log::debug;
use rayon::prelude::*;

use crate::curvature::{laplacian_unchecked, CurvatureSolver, MIN_OPERATOR_SIZE};
use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::grid::{Grid, Image2D};
use crate::image::{sample_with_gradient, ssd_unchecked, warp_unchecked};

/// Parameters of a registration run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegistrationConfig {
    /// Weight of the curvature term.
    pub alpha: f64,
    /// Time step of the semi-implicit iteration.
    pub tau: f64,
    /// Relative position `r = d1 / (d1 + d2)` of the slice being matched.
    pub ratio: f64,
    pub max_iters: usize,
    /// Stop once the largest per-pixel update falls below this (pixels).
    pub tol: f64,
}

impl RegistrationConfig {
    pub const DEFAULT_ALPHA: f64 = 100.0;
    pub const DEFAULT_TAU: f64 = 0.03;
    pub const DEFAULT_RATIO: f64 = 0.5;
    pub const DEFAULT_MAX_ITERS: usize = 500;
    pub const DEFAULT_TOL: f64 = 1e-4;

    pub fn new(alpha: f64, tau: f64) -> Self {
        Self {
            alpha,
            tau,
            ..Self::default()
        }
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be finite and > 0, got {}",
                self.tau
            )));
        }
        check_open_ratio(self.ratio)?;
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!(
                "tol must be finite and > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
            tau: Self::DEFAULT_TAU,
            ratio: Self::DEFAULT_RATIO,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
        }
    }
}

/// Outcome of a registration run. Histories hold one entry per iterate,
/// starting with `u^0 = 0`.
#[derive(Clone, Debug)]
pub struct RegistrationResult {
    pub field: DisplacementField,
    pub iterations: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub ssd_history: Vec<f64>,
}

impl RegistrationResult {
    pub fn initial_energy(&self) -> f64 {
        self.energy_history[0]
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_history.last().unwrap()
    }

    pub fn initial_ssd(&self) -> f64 {
        self.ssd_history[0]
    }

    pub fn final_ssd(&self) -> f64 {
        *self.ssd_history.last().unwrap()
    }
}

fn check_open_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )))
    }
}

fn check_pair(a: &Image2D, b: &Image2D, field: &DisplacementField) -> Result<()> {
    a.ensure_same_shape(b)?;
    field.ensure_matches(a)
}

/// Evaluates a per-pixel force over the grid, row-parallel. The closure
/// returns the two force components and the image residual at that pixel;
/// the distance `½ Σ residual²` is returned alongside the force.
fn pixel_force(
    width: usize,
    height: usize,
    f: impl Fn(usize, usize) -> (f64, f64, f64) + Sync,
) -> (DisplacementField, f64) {
    let n = width * height;
    let (mut f1, mut f2, mut res) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    f1.par_chunks_mut(width)
        .zip(f2.par_chunks_mut(width))
        .zip(res.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, ((row1, row2), row_res))| {
            for x in 0..width {
                (row1[x], row2[x], row_res[x]) = f(x, y);
            }
        });
    let distance = 0.5 * res.iter().map(|d| d * d).sum::<f64>();
    let field = DisplacementField {
        u1: Grid::from_raw(width, height, f1),
        u2: Grid::from_raw(width, height, f2),
    };
    (field, distance)
}

fn symmetric_force_unchecked(
    r1: &Image2D,
    r2: &Image2D,
    field: &DisplacementField,
    ratio: f64,
) -> (DisplacementField, f64) {
    let (w, h) = (r1.width(), r1.height());
    let fwd = 1.0 - ratio;
    let (u1, u2) = (field.u1.data(), field.u2.data());
    pixel_force(w, h, |x, y| {
        let i = y * w + x;
        let (px, py) = (x as f64, y as f64);
        let (a, ax, ay) = sample_with_gradient(r1, px - ratio * u1[i], py - ratio * u2[i]);
        let (b, bx, by) = sample_with_gradient(r2, px + fwd * u1[i], py + fwd * u2[i]);
        let d = a - b;
        (d * (ratio * ax + fwd * bx), d * (ratio * ay + fwd * by), d)
    })
}

/// Descent direction of the symmetric distance term:
/// `F = (R1(x - r u) - R2(x + (1-r) u)) (r ∇R1(x - r u) + (1-r) ∇R2(x + (1-r) u))`.
///
/// Gradients are those of the bilinear interpolants, so `-F` is the exact
/// derivative of the discrete distance with respect to each `u(x)`.
pub fn force_symmetric(
    r1: &Image2D,
    r2: &Image2D,
    field: &DisplacementField,
    ratio: f64,
) -> Result<DisplacementField> {
    check_pair(r1, r2, field)?;
    check_open_ratio(ratio)?;
    Ok(symmetric_force_unchecked(r1, r2, field, ratio).0)
}

fn single_force_unchecked(
    reference: &Image2D,
    template: &Image2D,
    field: &DisplacementField,
) -> (DisplacementField, f64) {
    let w = reference.width();
    let (u1, u2) = (field.u1.data(), field.u2.data());
    pixel_force(w, reference.height(), |x, y| {
        let i = y * w + x;
        let (t, tx, ty) = sample_with_gradient(template, x as f64 + u1[i], y as f64 + u2[i]);
        let d = reference.get(x, y) - t;
        (d * tx, d * ty, d)
    })
}

/// Descent direction of the single-direction distance term:
/// `F = (R(x) - T(x + u)) ∇T(x + u)`.
pub fn force_single_direction(
    reference: &Image2D,
    template: &Image2D,
    field: &DisplacementField,
) -> Result<DisplacementField> {
    check_pair(reference, template, field)?;
    Ok(single_force_unchecked(reference, template, field).0)
}

fn smoothness_unchecked(field: &DisplacementField) -> f64 {
    let sq = |g: &Grid| {
        laplacian_unchecked(g)
            .data()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
    };
    0.5 * (sq(&field.u1) + sq(&field.u2))
}

/// Curvature smoothness `½ Σ_l Σ (Δ u_l)²`.
pub fn smoothness_energy(field: &DisplacementField) -> Result<f64> {
    if field.width() < MIN_OPERATOR_SIZE || field.height() < MIN_OPERATOR_SIZE {
        return Err(Error::invalid(format!(
            "smoothness needs at least a 3x3 field, got {}x{}",
            field.width(),
            field.height()
        )));
    }
    Ok(smoothness_unchecked(field))
}

/// Symmetric objective `SSD(R1(x - r u), R2(x + (1-r) u)) + α S[u]`.
pub fn energy(
    r1: &Image2D,
    r2: &Image2D,
    field: &DisplacementField,
    alpha: f64,
    ratio: f64,
) -> Result<f64> {
    check_pair(r1, r2, field)?;
    check_open_ratio(ratio)?;
    smoothness_energy(field)?;
    let a = warp_unchecked(r1, field, -ratio);
    let b = warp_unchecked(r2, field, 1.0 - ratio);
    Ok(ssd_unchecked(&a, &b) + alpha * smoothness_unchecked(field))
}

/// Single-direction objective `SSD(R, T(x + u)) + α S[u]`.
pub fn energy_single_direction(
    reference: &Image2D,
    template: &Image2D,
    field: &DisplacementField,
    alpha: f64,
) -> Result<f64> {
    check_pair(reference, template, field)?;
    smoothness_energy(field)?;
    let moved = warp_unchecked(template, field, 1.0);
    Ok(ssd_unchecked(reference, &moved) + alpha * smoothness_unchecked(field))
}

/// Runs the semi-implicit fixed-point loop from `u = 0`.
///
/// `force` gives the descent direction at the current field together with
/// the distance term there, which feeds the histories.
fn iterate(
    width: usize,
    height: usize,
    cfg: &RegistrationConfig,
    force: impl Fn(&DisplacementField) -> (DisplacementField, f64),
) -> Result<RegistrationResult> {
    let solver = CurvatureSolver::new(width, height, cfg.alpha, cfg.tau)?;
    let mut field = DisplacementField::zeros(width, height);
    let (mut f, d0) = force(&field);
    let mut energy_history = vec![d0 + cfg.alpha * smoothness_unchecked(&field)];
    let mut ssd_history = vec![d0];
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=cfg.max_iters {
        let step = |u: &Grid, g: &Grid| {
            let rhs: Vec<f64> = u
                .data()
                .iter()
                .zip(g.data())
                .map(|(u, g)| u + cfg.tau * g)
                .collect();
            solver.solve_unchecked(&Grid::from_raw(width, height, rhs))
        };
        let (n1, n2) = rayon::join(|| step(&field.u1, &f.u1), || step(&field.u2, &f.u2));
        let next = DisplacementField { u1: n1, u2: n2 };
        if !next.all_finite() {
            return Err(Error::Divergence { iteration: k });
        }
        let delta = next.max_abs_diff(&field);
        field = next;
        iterations = k;

        let (next_force, d) = force(&field);
        f = next_force;
        let e = d + cfg.alpha * smoothness_unchecked(&field);
        if !e.is_finite() {
            return Err(Error::Divergence { iteration: k });
        }
        energy_history.push(e);
        ssd_history.push(d);
        debug!("iteration {k}: energy={e:.6e} ssd={d:.6e} max_update={delta:.3e}");

        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(RegistrationResult {
        field,
        iterations,
        converged,
        energy_history,
        ssd_history,
    })
}

fn check_registration_inputs(a: &Image2D, b: &Image2D, cfg: &RegistrationConfig) -> Result<()> {
    cfg.validate()?;
    a.ensure_same_shape(b)?;
    if a.width() < MIN_OPERATOR_SIZE || a.height() < MIN_OPERATOR_SIZE {
        return Err(Error::invalid(format!(
            "registration needs images of at least 3x3, got {}x{}",
            a.width(),
            a.height()
        )));
    }
    Ok(())
}

/// Symmetric registration of `r1` and `r2` at `cfg.ratio`.
pub fn register_symmetric(
    r1: &Image2D,
    r2: &Image2D,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult> {
    check_registration_inputs(r1, r2, cfg)?;
    let ratio = cfg.ratio;
    iterate(r1.width(), r1.height(), cfg, |u| {
        symmetric_force_unchecked(r1, r2, u, ratio)
    })
}

/// Single-direction registration: `reference` stays fixed and `template`
/// is warped by `T(x + u)`. `cfg.ratio` is validated but unused.
pub fn register_single_direction(
    reference: &Image2D,
    template: &Image2D,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult> {
    check_registration_inputs(reference, template, cfg)?;
    iterate(reference.width(), reference.height(), cfg, |u| {
        single_force_unchecked(reference, template, u)
    })
}
