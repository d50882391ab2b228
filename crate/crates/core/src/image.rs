//! Bilinear sampling, finite-difference gradients, backward warping and
//! image-space distances.
//!
//! Coordinates are in pixels with unit spacing: `x` runs over columns
//! `0..width`, `y` over rows `0..height`. Samples outside the grid are
//! clamped to the border (replicate extension).

use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::grid::{Grid, Image2D, ScalarGrid};

/// Scale factor between normalized intensities and the 8-bit range.
pub const INTENSITY_MAX: f64 = 255.0;

/// Cell lookup along one axis: lower node, upper node, fractional offset.
#[inline]
fn axis_cell(c: f64, len: usize) -> (usize, usize, f64) {
    if len == 1 {
        return (0, 0, 0.0);
    }
    let c = c.clamp(0.0, (len - 1) as f64);
    // c >= 0, so truncation is floor
    let i0 = (c as usize).min(len - 2);
    (i0, i0 + 1, c - i0 as f64)
}

/// Bilinear sample without argument checks. Exact at integer coordinates.
#[inline]
pub(crate) fn sample(img: &Grid, x: f64, y: f64) -> f64 {
    let (x0, x1, tx) = axis_cell(x, img.width());
    let (y0, y1, ty) = axis_cell(y, img.height());
    let top = (1.0 - tx) * img.get(x0, y0) + tx * img.get(x1, y0);
    let bottom = (1.0 - tx) * img.get(x0, y1) + tx * img.get(x1, y1);
    (1.0 - ty) * top + ty * bottom
}

/// Samples `img` at the real-valued position `(x, y)` by bilinear
/// interpolation of the four surrounding pixels, after clamping the
/// position into the grid.
pub fn sample_bilinear(img: &Image2D, x: f64, y: f64) -> Result<f64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::invalid(format!(
            "sample coordinate must be finite, got ({x}, {y})"
        )));
    }
    Ok(sample(img, x, y))
}

/// Derivative of the bilinear interpolant along one axis, given the cell
/// lookup `(i0, _, t)` for `pos` and the slopes of the previous, current
/// and next cells.
///
/// Inside a cell this is the cell slope. On a node the left and right
/// one-sided slopes are averaged (a central difference in the interior);
/// beyond the clamped border the interpolant is flat.
#[inline]
fn interpolant_slope(pos: f64, len: usize, i0: usize, t: f64, slope: impl Fn(usize) -> f64) -> f64 {
    if len < 2 || pos < 0.0 || pos > (len - 1) as f64 {
        return 0.0;
    }
    if t == 0.0 {
        // on node i0
        let left = if i0 > 0 { slope(i0 - 1) } else { 0.0 };
        0.5 * (left + slope(i0))
    } else if t == 1.0 {
        // on the last node
        0.5 * slope(i0)
    } else {
        slope(i0)
    }
}

/// Value and gradient of the bilinear interpolant of `img` at `(x, y)`.
///
/// The gradient is the exact derivative of [`sample_bilinear`] wherever
/// that is differentiable, and the mean of the one-sided derivatives on
/// grid lines, so it agrees with central finite differences of the
/// sampled values everywhere.
#[inline]
pub(crate) fn sample_with_gradient(img: &Grid, x: f64, y: f64) -> (f64, f64, f64) {
    let (w, h) = (img.width(), img.height());
    let d = img.data();
    let (x0, x1, tx) = axis_cell(x, w);
    let (y0, y1, ty) = axis_cell(y, h);
    let (r0, r1) = (&d[y0 * w..y0 * w + w], &d[y1 * w..y1 * w + w]);
    let (p00, p10, p01, p11) = (r0[x0], r0[x1], r1[x0], r1[x1]);
    let top = (1.0 - tx) * p00 + tx * p10;
    let bottom = (1.0 - tx) * p01 + tx * p11;
    let value = (1.0 - ty) * top + ty * bottom;

    let gx = interpolant_slope(x, w, x0, tx, |c| {
        (1.0 - ty) * (r0[c + 1] - r0[c]) + ty * (r1[c + 1] - r1[c])
    });
    let gy = interpolant_slope(y, h, y0, ty, |r| {
        let (a, b) = (&d[r * w..r * w + w], &d[(r + 1) * w..(r + 1) * w + w]);
        (1.0 - tx) * (b[x0] - a[x0]) + tx * (b[x1] - a[x1])
    });
    (value, gx, gy)
}

/// Central-difference gradient `(d/dx, d/dy)` with one-sided differences on
/// the border rows and columns. Requires at least a 2x2 image.
pub fn gradient(img: &Image2D) -> Result<(ScalarGrid, ScalarGrid)> {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!(
            "gradient needs at least a 2x2 image, got {w}x{h}"
        )));
    }
    let diff = |lo: f64, hi: f64, span: usize| (hi - lo) / span as f64;
    let gx = Grid::from_fn(w, h, |x, y| {
        let lo = x.saturating_sub(1);
        let hi = (x + 1).min(w - 1);
        diff(img.get(lo, y), img.get(hi, y), hi - lo)
    });
    let gy = Grid::from_fn(w, h, |x, y| {
        let lo = y.saturating_sub(1);
        let hi = (y + 1).min(h - 1);
        diff(img.get(x, lo), img.get(x, hi), hi - lo)
    });
    Ok((gx, gy))
}

/// Backward warp: `out(x) = img(x + scale * u(x))`.
///
/// With a displacement `u` from slice 1 to slice 2, `scale = -r` produces
/// slice 1 moved a fraction `r` of the way and `scale = 1 - r` produces
/// slice 2 moved back by `1 - r`.
pub fn warp(img: &Image2D, field: &DisplacementField, scale: f64) -> Result<Image2D> {
    field.ensure_matches(img)?;
    if !scale.is_finite() {
        return Err(Error::invalid(format!(
            "warp scale must be finite, got {scale}"
        )));
    }
    Ok(warp_unchecked(img, field, scale))
}

pub(crate) fn warp_unchecked(img: &Grid, field: &DisplacementField, scale: f64) -> Grid {
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(w * h);
    let (u1, u2) = (field.u1.data(), field.u2.data());
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            data.push(sample(
                img,
                x as f64 + scale * u1[i],
                y as f64 + scale * u2[i],
            ));
        }
    }
    Grid::from_raw(w, h, data)
}

/// Sum-of-squared-differences distance, `½ Σ (a - b)²`.
pub fn ssd(a: &Image2D, b: &Image2D) -> Result<f64> {
    a.ensure_same_shape(b)?;
    Ok(ssd_unchecked(a, b))
}

pub(crate) fn ssd_unchecked(a: &Grid, b: &Grid) -> f64 {
    0.5 * a
        .data()
        .iter()
        .zip(b.data())
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
}

/// Mean squared difference on the 8-bit intensity scale:
/// `1/(m n) Σ (255 a - 255 b)²`.
pub fn msd(original: &Image2D, candidate: &Image2D) -> Result<f64> {
    original.ensure_same_shape(candidate)?;
    let sum: f64 = original
        .data()
        .iter()
        .zip(candidate.data())
        .map(|(p, q)| {
            let d = INTENSITY_MAX * p - INTENSITY_MAX * q;
            d * d
        })
        .sum();
    Ok(sum / original.len() as f64)
}
