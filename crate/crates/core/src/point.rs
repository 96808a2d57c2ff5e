//! Points, rectangular domains with exclusion masks, and deterministic
//! low-discrepancy point clouds.

use crate::{Error, Result};

/// A point of the 2-dimensional base manifold, coordinates (x, y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2 { x, y })
        } else {
            Err(Error::Parse {
                message: format!("non-finite point ({x}, {y})"),
            })
        }
    }
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x1 > x0 && y1 > y0, "empty rectangle");
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn center(&self) -> Point2 {
        Point2 {
            x: 0.5 * (self.x0 + self.x1),
            y: 0.5 * (self.y0 + self.y1),
        }
    }
}

/// Static exclusion masks attached to a domain, on top of the dynamic masks
/// (rho ~ 0, log/power domain) applied at evaluation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mask {
    None,
    /// Exclude the strip |x| < cutoff (helicoid axis).
    MinAbsX(f64),
}

impl Mask {
    pub fn admits(&self, p: Point2) -> bool {
        match *self {
            Mask::None => true,
            Mask::MinAbsX(cutoff) => p.x.abs() >= cutoff,
        }
    }
}

/// Evaluation domain: rectangle plus exclusion mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub rect: Rect,
    pub mask: Mask,
}

impl Domain {
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Domain {
            rect: Rect::new(x0, x1, y0, y1),
            mask: Mask::None,
        }
    }

    pub fn with_mask(mut self, mask: Mask) -> Self {
        self.mask = mask;
        self
    }

    pub fn admits(&self, p: Point2) -> bool {
        self.rect.contains(p) && self.mask.admits(p)
    }
}

/// Deterministic cloud request: `count` points derived from `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudSpec {
    pub count: usize,
    pub seed: u64,
}

impl CloudSpec {
    pub fn new(count: usize, seed: u64) -> Self {
        CloudSpec { count, seed }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

// Additive recurrence over the plastic constant: the standard 2D
// low-discrepancy sequence, seed-shifted for reproducible variety.
const R2_A1: f64 = 0.754_877_666_246_692_8;
const R2_A2: f64 = 0.569_840_290_998_053_2;

/// Quasi-random points inside `domain`, filtered by the static mask and an
/// extra acceptance predicate (dynamic masks). Deterministic in `spec`.
pub fn sample_cloud<F>(domain: &Domain, spec: CloudSpec, accept: F) -> Vec<Point2>
where
    F: Fn(Point2) -> bool,
{
    let mut state = spec.seed ^ 0xa076_1d64_78bd_642f;
    let u0 = splitmix64(&mut state) as f64 / u64::MAX as f64;
    let v0 = splitmix64(&mut state) as f64 / u64::MAX as f64;
    let r = domain.rect;
    let mut out = Vec::with_capacity(spec.count);
    let cap = spec.count.saturating_mul(200).max(1000);
    for i in 0..cap {
        if out.len() == spec.count {
            break;
        }
        let t = i as f64;
        let u = (u0 + t * R2_A1).fract();
        let v = (v0 + t * R2_A2).fract();
        let p = Point2 {
            x: r.x0 + u * (r.x1 - r.x0),
            y: r.y0 + v * (r.y1 - r.y0),
        };
        if domain.mask.admits(p) && accept(p) {
            out.push(p);
        }
    }
    out
}

/// Closed square loop of side `side` centered at `c`, counter-clockwise,
/// starting and ending at the lower-left corner.
pub fn square_loop(c: Point2, side: f64) -> Vec<Point2> {
    let s = 0.5 * side;
    vec![
        Point2 { x: c.x - s, y: c.y - s },
        Point2 { x: c.x + s, y: c.y - s },
        Point2 { x: c.x + s, y: c.y + s },
        Point2 { x: c.x - s, y: c.y + s },
        Point2 { x: c.x - s, y: c.y - s },
    ]
}
