//! Synthesis of in-between slices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::grid::{Grid, Image2D};
use crate::image::warp_unchecked;
use crate::registration::{register_symmetric, RegistrationConfig};

/// Linear blend, exact at both endpoints and for `a == b`.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t < 0.5 {
        a + t * (b - a)
    } else {
        b - (1.0 - t) * (b - a)
    }
}

fn check_closed_ratio(ratio: f64) -> Result<()> {
    if (0.0..=1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "ratio must lie in [0, 1], got {ratio}"
        )))
    }
}

fn blend(a: &Grid, b: &Grid, ratio: f64) -> Grid {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&p, &q)| lerp(p, q, ratio))
        .collect();
    Grid::from_raw(a.width(), a.height(), data)
}

/// Slice at relative position `ratio` between `r1` (0) and `r2` (1):
/// `(1 - r) R1(x - r u) + r R2(x + (1 - r) u)`.
pub fn interpolate_at_ratio(
    r1: &Image2D,
    r2: &Image2D,
    field: &DisplacementField,
    ratio: f64,
) -> Result<Image2D> {
    check_closed_ratio(ratio)?;
    r1.ensure_same_shape(r2)?;
    field.ensure_matches(r1)?;
    let a = warp_unchecked(r1, field, -ratio);
    let b = warp_unchecked(r2, field, 1.0 - ratio);
    Ok(blend(&a, &b, ratio))
}

/// Average of the two half-warped inputs.
pub fn interpolate_midpoint(
    r1: &Image2D,
    r2: &Image2D,
    field: &DisplacementField,
) -> Result<Image2D> {
    interpolate_at_ratio(r1, r2, field, 0.5)
}

/// Intensity-only baseline `(1 - r) r1 + r r2`.
pub fn linear_interpolate(r1: &Image2D, r2: &Image2D, ratio: f64) -> Result<Image2D> {
    check_closed_ratio(ratio)?;
    r1.ensure_same_shape(r2)?;
    Ok(blend(r1, r2, ratio))
}

/// Midpoint from a single-direction field (reference fixed, template
/// warped by `T(x + u)`): both images are moved half-way along `u` and
/// averaged.
pub fn interpolate_single_direction(
    reference: &Image2D,
    template: &Image2D,
    field: &DisplacementField,
) -> Result<Image2D> {
    interpolate_at_ratio(reference, template, field, 0.5)
}

/// Inserts `per_gap` slices between each adjacent pair, at ratios
/// `j / (per_gap + 1)`. Each gap is registered once and the field reused
/// for all of its slices. Gaps are processed in parallel; output order is
/// the Z order of the input.
pub fn interpolate_stack(
    slices: &[Image2D],
    per_gap: usize,
    cfg: &RegistrationConfig,
) -> Result<Vec<Image2D>> {
    if slices.len() < 2 {
        return Err(Error::invalid(format!(
            "stack interpolation needs at least 2 slices, got {}",
            slices.len()
        )));
    }
    for s in &slices[1..] {
        slices[0].ensure_same_shape(s)?;
    }
    if per_gap == 0 {
        return Ok(slices.to_vec());
    }
    cfg.validate()?;

    let gaps: Vec<Vec<Image2D>> = slices
        .par_windows(2)
        .map(|pair| {
            let result = register_symmetric(&pair[0], &pair[1], cfg)?;
            (1..=per_gap)
                .map(|j| {
                    let ratio = j as f64 / (per_gap + 1) as f64;
                    interpolate_at_ratio(&pair[0], &pair[1], &result.field, ratio)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(slices.len() + (slices.len() - 1) * per_gap);
    for (slice, inserted) in slices.iter().zip(gaps) {
        out.push(slice.clone());
        out.extend(inserted);
    }
    out.push(slices[slices.len() - 1].clone());
    Ok(out)
}
