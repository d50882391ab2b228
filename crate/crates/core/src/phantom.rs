//! Synthetic slice pairs with known in-between ground truth.
//!
//! A shape is rendered at pose 0 (slice 1), pose 1 (slice 2) and the
//! halfway pose. Between poses the center moves linearly along
//! `translation` and the size changes linearly from 1 to `scale`, so the
//! halfway rendering is the exact midpoint of a linear motion.

use crate::error::{Error, Result};
use crate::grid::{Grid, Image2D};
use crate::registration::RegistrationConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhantomShape {
    Disk { radius: f64 },
    Rectangle { half_width: f64, half_height: f64 },
    GaussianBlob { sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhantomSpec {
    pub shape: PhantomShape,
    pub width: usize,
    pub height: usize,
    /// Shape center at pose 0, `(x, y)` in pixels.
    pub center: (f64, f64),
    /// Center displacement from pose 0 to pose 1.
    pub translation: (f64, f64),
    /// Isotropic size factor of pose 1 relative to pose 0.
    pub scale: f64,
    /// Width of the linear intensity ramp across hard edges, in pixels.
    pub edge_softness: f64,
}

/// Gaussian blobs are considered to end at this many standard deviations.
const BLOB_EXTENT_SIGMAS: f64 = 3.0;

impl PhantomSpec {
    /// A disk centered in a `width x height` grid, no motion, unit softness.
    pub fn disk(width: usize, height: usize, radius: f64) -> Self {
        Self {
            shape: PhantomShape::Disk { radius },
            width,
            height,
            center: ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
            translation: (0.0, 0.0),
            scale: 1.0,
            edge_softness: 1.0,
        }
    }

    pub fn with_shape(mut self, shape: PhantomShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_center(mut self, x: f64, y: f64) -> Self {
        self.center = (x, y);
        self
    }

    pub fn with_translation(mut self, dx: f64, dy: f64) -> Self {
        self.translation = (dx, dy);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_edge_softness(mut self, softness: f64) -> Self {
        self.edge_softness = softness;
        self
    }

    /// Center and size factor at pose `t` (0 = slice 1, 1 = slice 2).
    pub fn pose(&self, t: f64) -> ((f64, f64), f64) {
        let c = (
            self.center.0 + t * self.translation.0,
            self.center.1 + t * self.translation.1,
        );
        (c, 1.0 + t * (self.scale - 1.0))
    }

    /// Half extents of the rendered support at the given size factor.
    fn extent(&self, size: f64) -> (f64, f64) {
        let pad = 0.5 * self.edge_softness;
        match self.shape {
            PhantomShape::Disk { radius } => (radius * size + pad, radius * size + pad),
            PhantomShape::Rectangle {
                half_width,
                half_height,
            } => (half_width * size + pad, half_height * size + pad),
            PhantomShape::GaussianBlob { sigma } => {
                let r = BLOB_EXTENT_SIGMAS * sigma * size;
                (r, r)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("phantom grid must be at least 1x1"));
        }
        let finite = [
            self.center.0,
            self.center.1,
            self.translation.0,
            self.translation.1,
            self.scale,
            self.edge_softness,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("phantom parameters must be finite"));
        }
        if self.edge_softness < 0.0 {
            return Err(Error::invalid(format!(
                "edge softness must be >= 0, got {}",
                self.edge_softness
            )));
        }
        if self.scale <= 0.0 {
            return Err(Error::invalid(format!(
                "scale must be > 0, got {}",
                self.scale
            )));
        }
        let sizes = match self.shape {
            PhantomShape::Disk { radius } => vec![radius],
            PhantomShape::Rectangle {
                half_width,
                half_height,
            } => vec![half_width, half_height],
            PhantomShape::GaussianBlob { sigma } => vec![sigma],
        };
        if sizes.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::invalid("shape dimensions must be finite and > 0"));
        }
        let (xmax, ymax) = ((self.width - 1) as f64, (self.height - 1) as f64);
        for t in [0.0, 1.0] {
            let ((cx, cy), size) = self.pose(t);
            let (ex, ey) = self.extent(size);
            if cx - ex < 0.0 || cx + ex > xmax || cy - ey < 0.0 || cy + ey > ymax {
                return Err(Error::invalid(format!(
                    "shape at pose {t} spans x [{:.2}, {:.2}], y [{:.2}, {:.2}], outside the {}x{} grid",
                    cx - ex,
                    cx + ex,
                    cy - ey,
                    cy + ey,
                    self.width,
                    self.height
                )));
            }
        }
        Ok(())
    }

    /// Renders the shape at pose `t`.
    pub fn render(&self, t: f64) -> Image2D {
        let ((cx, cy), size) = self.pose(t);
        let soft = self.edge_softness;
        // signed distance inside the boundary mapped to coverage
        let ramp = |inside: f64| {
            if soft == 0.0 {
                if inside >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (inside / soft + 0.5).clamp(0.0, 1.0)
            }
        };
        let shape = self.shape;
        Grid::from_fn(self.width, self.height, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            match shape {
                PhantomShape::Disk { radius } => ramp(radius * size - dx.hypot(dy)),
                PhantomShape::Rectangle {
                    half_width,
                    half_height,
                } => ramp(half_width * size - dx.abs()).min(ramp(half_height * size - dy.abs())),
                PhantomShape::GaussianBlob { sigma } => {
                    let s = sigma * size;
                    (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
                }
            }
        })
    }
}

/// The fixed benchmark set: disks, rectangles and a blob on 64x64 grids,
/// translated by 2 to 8 pixels, plus one pure isotropic scaling. Each pose
/// pair is centered on the grid so the halfway slice sits in the middle.
pub fn standard_corpus() -> Vec<PhantomSpec> {
    let centered = |shape: PhantomShape, dx: f64, dy: f64, scale: f64, soft: f64| PhantomSpec {
        shape,
        width: 64,
        height: 64,
        center: (31.5 - dx / 2.0, 31.5 - dy / 2.0),
        translation: (dx, dy),
        scale,
        edge_softness: soft,
    };
    let disk = |radius| PhantomShape::Disk { radius };
    let rect = |half_width, half_height| PhantomShape::Rectangle {
        half_width,
        half_height,
    };
    vec![
        centered(disk(10.0), 6.0, 0.0, 1.0, 1.5),
        centered(disk(10.0), 2.0, 0.0, 1.0, 1.5),
        centered(rect(12.0, 8.0), 0.0, 4.0, 1.0, 1.5),
        centered(
            PhantomShape::GaussianBlob { sigma: 6.0 },
            5.0,
            3.0,
            1.0,
            0.0,
        ),
        centered(disk(12.0), 3.0, -3.0, 1.0, 1.0),
        centered(disk(8.0), 0.0, 0.0, 1.4, 1.5),
        centered(rect(10.0, 10.0), 8.0, 0.0, 1.0, 2.0),
    ]
}

/// Parameters used to benchmark [`standard_corpus`]. The curvature weight
/// and step suit displacements of a few pixels on `[0, 1]` intensities;
/// the tolerance is one that both registration models reach on every
/// instance.
pub fn corpus_config() -> RegistrationConfig {
    RegistrationConfig::new(3.0, 1.0)
        .with_max_iters(5000)
        .with_tol(1e-3)
}

/// Upper bound on the corpus mean of
/// `msd(truth, symmetric midpoint) / msd(truth, linear midpoint)` under
/// [`corpus_config`]. The measured mean is about 0.024.
pub const CORPUS_MSD_RATIO_BOUND: f64 = 0.05;

/// Renders `(slice 1, slice 2, exact halfway slice)`.
pub fn generate_phantom_pair(spec: &PhantomSpec) -> Result<(Image2D, Image2D, Image2D)> {
    spec.validate()?;
    Ok((spec.render(0.0), spec.render(1.0), spec.render(0.5)))
}
