//! Dense 2-D displacement fields and the `DF2` binary container.
//!
//! `DF2` layout: the ASCII header `DF2\n<width> <height>\n`, followed by
//! `width * height` records of two little-endian IEEE-754 `f32` values
//! (`u1` then `u2`), row-major, top row first.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarGrid};

/// Per-pixel displacement in pixel units. `u1` is horizontal (columns),
/// `u2` vertical (rows).
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField {
    pub u1: ScalarGrid,
    pub u2: ScalarGrid,
}

impl DisplacementField {
    pub fn new(u1: ScalarGrid, u2: ScalarGrid) -> Result<Self> {
        u1.ensure_same_shape(&u2)?;
        if !u1.all_finite() || !u2.all_finite() {
            return Err(Error::invalid(
                "displacement field contains non-finite values",
            ));
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            u1: Grid::zeros(width, height),
            u2: Grid::zeros(width, height),
        }
    }

    /// A spatially constant displacement.
    pub fn uniform(width: usize, height: usize, d1: f64, d2: f64) -> Self {
        Self {
            u1: Grid::filled(width, height, d1),
            u2: Grid::filled(width, height, d2),
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.u1.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.u1.height()
    }

    /// Largest absolute value over both components.
    pub fn max_abs(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    /// Largest per-component absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &DisplacementField) -> f64 {
        let d1 = self.u1.data().iter().zip(other.u1.data());
        let d2 = self.u2.data().iter().zip(other.u2.data());
        d1.chain(d2).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn negated(&self) -> DisplacementField {
        DisplacementField {
            u1: self.u1.map(|v| -v),
            u2: self.u2.map(|v| -v),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.u1.all_finite() && self.u2.all_finite()
    }

    pub fn ensure_matches(&self, img: &Grid) -> Result<()> {
        img.ensure_same_shape(&self.u1)
    }

    /// Encodes the field as `DF2`. Components are narrowed to `f32`.
    pub fn to_df2(&self) -> Vec<u8> {
        let header = format!("DF2\n{} {}\n", self.width(), self.height());
        let mut out = Vec::with_capacity(header.len() + 8 * self.u1.len());
        out.extend_from_slice(header.as_bytes());
        for (a, b) in self.u1.data().iter().zip(self.u2.data()) {
            out.extend_from_slice(&(*a as f32).to_le_bytes());
            out.extend_from_slice(&(*b as f32).to_le_bytes());
        }
        out
    }

    /// Decodes a `DF2` byte stream.
    pub fn from_df2(bytes: &[u8]) -> Result<Self> {
        let rest = bytes
            .strip_prefix(b"DF2\n")
            .ok_or_else(|| Error::decode("magic", "expected \"DF2\\n\""))?;
        let eol = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::decode("dimensions", "missing header line terminator"))?;
        let line = std::str::from_utf8(&rest[..eol])
            .map_err(|_| Error::decode("dimensions", "header is not ASCII"))?;
        let mut parts = line.split(' ');
        let parse = |tok: Option<&str>, field: &'static str| -> Result<usize> {
            let tok = tok.ok_or_else(|| Error::decode(field, "missing value"))?;
            match tok.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(Error::decode(field, format!("invalid value {tok:?}"))),
            }
        };
        let width = parse(parts.next(), "width")?;
        let height = parse(parts.next(), "height")?;
        if parts.next().is_some() {
            return Err(Error::decode("dimensions", "trailing tokens in header"));
        }
        let payload = &rest[eol + 1..];
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::decode("dimensions", "size overflow"))?;
        if payload.len() != n * 8 {
            return Err(Error::decode(
                "field data",
                format!("expected {} bytes, found {}", n * 8, payload.len()),
            ));
        }
        let mut u1 = Vec::with_capacity(n);
        let mut u2 = Vec::with_capacity(n);
        for rec in payload.chunks_exact(8) {
            u1.push(f32::from_le_bytes(rec[0..4].try_into().unwrap()) as f64);
            u2.push(f32::from_le_bytes(rec[4..8].try_into().unwrap()) as f64);
        }
        let u1 =
            Grid::new(width, height, u1).map_err(|e| Error::decode("field data", e.to_string()))?;
        let u2 =
            Grid::new(width, height, u2).map_err(|e| Error::decode("field data", e.to_string()))?;
        Ok(Self { u1, u2 })
    }
}
