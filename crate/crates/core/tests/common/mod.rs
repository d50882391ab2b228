//! Reference implementations written independently of the library, used as
//! test oracles.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicereg::Grid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform noise in [0, 1] smoothed by two 3x3 box filters.
pub fn smooth_random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Grid {
    let mut v: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
    for _ in 0..2 {
        let src = v.clone();
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                let mut n = 0.0;
                for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        s += src[yy * w + xx];
                        n += 1.0;
                    }
                }
                v[y * w + x] = s / n;
            }
        }
    }
    Grid::new(w, h, v).unwrap()
}

pub fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, amp: f64) -> Grid {
    Grid::new(
        w,
        h,
        (0..w * h).map(|_| rng.random_range(-amp..amp)).collect(),
    )
    .unwrap()
}

/// Bilinear interpolation with replicate extension, written from the
/// four-neighbour weight formula.
pub fn bilinear(img: &Grid, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let x = x.max(0.0).min(w - 1.0);
    let y = y.max(0.0).min(h - 1.0);
    let fx = x.floor();
    let fy = y.floor();
    let (dx, dy) = (x - fx, y - fy);
    let px = |i: f64, j: f64| {
        let i = i.min(w - 1.0) as usize;
        let j = j.min(h - 1.0) as usize;
        img.get(i, j)
    };
    px(fx, fy) * (1.0 - dx) * (1.0 - dy)
        + px(fx + 1.0, fy) * dx * (1.0 - dy)
        + px(fx, fy + 1.0) * (1.0 - dx) * dy
        + px(fx + 1.0, fy + 1.0) * dx * dy
}

/// `½ (R1(x - r u) - R2(x + (1 - r) u))²` at one pixel.
pub fn pixel_distance(r1: &Grid, r2: &Grid, x: usize, y: usize, u: (f64, f64), r: f64) -> f64 {
    let (px, py) = (x as f64, y as f64);
    let a = bilinear(r1, px - r * u.0, py - r * u.1);
    let b = bilinear(r2, px + (1.0 - r) * u.0, py + (1.0 - r) * u.1);
    0.5 * (a - b) * (a - b)
}

/// Five-point Laplacian with mirrored (zero-flux) borders.
pub fn mirrored_laplacian(g: &Grid) -> Grid {
    let (w, h) = (g.width() as isize, g.height() as isize);
    let at = |x: isize, y: isize| {
        let mx = if x < 0 {
            -x - 1
        } else if x >= w {
            2 * w - x - 1
        } else {
            x
        };
        let my = if y < 0 {
            -y - 1
        } else if y >= h {
            2 * h - y - 1
        } else {
            y
        };
        g.get(mx as usize, my as usize)
    };
    Grid::from_fn(g.width(), g.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * at(x, y)
    })
}

/// `(I + α τ Δ²) u`.
pub fn apply_system(u: &Grid, alpha: f64, tau: f64) -> Grid {
    let bi = mirrored_laplacian(&mirrored_laplacian(u));
    Grid::from_fn(u.width(), u.height(), |x, y| {
        u.get(x, y) + alpha * tau * bi.get(x, y)
    })
}

pub fn max_abs_diff(a: &Grid, b: &Grid) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}
