//! Curvature regularization operators and the implicit smoothing solve.
//!
//! The Laplacian is the 5-point stencil with unit spacing and mirrored
//! (homogeneous Neumann) borders, `g(-1) := g(0)`, `g(n) := g(n - 1)`. The
//! biharmonic operator is that Laplacian applied twice. Both are
//! diagonalized by the type-II discrete cosine transform: mode `(i, j)` has
//! Laplacian eigenvalue
//!
//! ```text
//! λ(i, j) = 2 cos(π i / height) + 2 cos(π j / width) - 4
//! ```
//!
//! so `(I + α τ Δ²) u = rhs` is solved exactly by a forward transform, a
//! per-mode division by `1 + α τ λ²`, and an inverse transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarGrid};

/// Smallest grid side accepted by the stencil operators.
pub const MIN_OPERATOR_SIZE: usize = 3;

fn check_operator_dims(width: usize, height: usize) -> Result<()> {
    if width < MIN_OPERATOR_SIZE || height < MIN_OPERATOR_SIZE {
        return Err(Error::invalid(format!(
            "curvature operators need at least a {MIN_OPERATOR_SIZE}x{MIN_OPERATOR_SIZE} grid, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Mirrored 5-point Laplacian.
pub fn laplacian(g: &ScalarGrid) -> Result<ScalarGrid> {
    check_operator_dims(g.width(), g.height())?;
    Ok(laplacian_unchecked(g))
}

pub(crate) fn laplacian_unchecked(g: &Grid) -> Grid {
    let (w, h) = (g.width(), g.height());
    let v = g.data();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let up = if y == 0 { 0 } else { y - 1 };
        let down = if y + 1 == h { y } else { y + 1 };
        for x in 0..w {
            let left = if x == 0 { 0 } else { x - 1 };
            let right = if x + 1 == w { x } else { x + 1 };
            let c = v[y * w + x];
            out[y * w + x] =
                v[y * w + right] + v[y * w + left] + v[down * w + x] + v[up * w + x] - 4.0 * c;
        }
    }
    Grid::from_raw(w, h, out)
}

/// `Δ²g`, the mirrored Laplacian applied twice.
pub fn biharmonic(g: &ScalarGrid) -> Result<ScalarGrid> {
    check_operator_dims(g.width(), g.height())?;
    Ok(laplacian_unchecked(&laplacian_unchecked(g)))
}

/// Eigenvalue of the mirrored Laplacian for row mode `i` and column mode `j`.
#[inline]
pub fn laplacian_eigenvalue(i: usize, j: usize, width: usize, height: usize) -> f64 {
    2.0 * (PI * i as f64 / height as f64).cos() + 2.0 * (PI * j as f64 / width as f64).cos() - 4.0
}

/// Solver for `(I + α τ Δ²) u = rhs` on a fixed grid.
///
/// Immutable once built; one instance serves both displacement components
/// and every iteration of a registration run, and may be shared between
/// threads.
#[derive(Clone)]
pub struct CurvatureSolver {
    width: usize,
    height: usize,
    alpha: f64,
    tau: f64,
    /// `1 + α τ λ(i, j)²`, row mode major.
    denominators: Vec<f64>,
    row_dct: Arc<dyn TransformType2And3<f64>>,
    col_dct: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for CurvatureSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureSolver")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("alpha", &self.alpha)
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}

impl CurvatureSolver {
    pub fn new(width: usize, height: usize, alpha: f64, tau: f64) -> Result<Self> {
        check_operator_dims(width, height)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be finite and > 0, got {tau}"
            )));
        }
        let at = alpha * tau;
        let mut denominators = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                let lambda = laplacian_eigenvalue(i, j, width, height);
                denominators.push(1.0 + at * lambda * lambda);
            }
        }
        let mut planner = DctPlanner::new();
        let row_dct = planner.plan_dct2(width);
        let col_dct = planner.plan_dct2(height);
        Ok(Self {
            width,
            height,
            alpha,
            tau,
            denominators,
            row_dct,
            col_dct,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Per-mode denominators, indexed `[i * width + j]` for row mode `i`
    /// and column mode `j`.
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    pub fn denominator(&self, i: usize, j: usize) -> f64 {
        self.denominators[i * self.width + j]
    }

    /// Returns `u` with `(I + α τ Δ²) u = rhs`.
    pub fn solve(&self, rhs: &ScalarGrid) -> Result<ScalarGrid> {
        if rhs.width() != self.width || rhs.height() != self.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: rhs.width(),
                right_height: rhs.height(),
            });
        }
        Ok(self.solve_unchecked(rhs))
    }

    pub(crate) fn solve_unchecked(&self, rhs: &Grid) -> Grid {
        let (w, h) = (self.width, self.height);
        let mut scratch = vec![
            0.0;
            self.row_dct
                .get_scratch_len()
                .max(self.col_dct.get_scratch_len())
        ];

        let mut rows = rhs.data().to_vec();
        for row in rows.chunks_exact_mut(w) {
            self.row_dct.process_dct2_with_scratch(row, &mut scratch);
        }
        let mut cols = transpose(&rows, w, h);
        for col in cols.chunks_exact_mut(h) {
            self.col_dct.process_dct2_with_scratch(col, &mut scratch);
        }

        // cols[j * h + i] holds mode (i, j)
        for j in 0..w {
            for i in 0..h {
                cols[j * h + i] /= self.denominators[i * w + j];
            }
        }

        for col in cols.chunks_exact_mut(h) {
            self.col_dct.process_dct3_with_scratch(col, &mut scratch);
        }
        let mut out = transpose(&cols, h, w);
        for row in out.chunks_exact_mut(w) {
            self.row_dct.process_dct3_with_scratch(row, &mut scratch);
        }
        // DCT-III of DCT-II scales by n/2 along each axis
        let norm = 4.0 / (w * h) as f64;
        for v in &mut out {
            *v *= norm;
        }
        Grid::from_raw(w, h, out)
    }
}

/// Transposes a row-major `rows x cols` block (`cols` values per row).
fn transpose(src: &[f64], cols: usize, rows: usize) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
    dst
}
