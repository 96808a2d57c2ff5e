//! Uniform rectangular grids of scalar samples, finite-difference jets, and
//! the CSV exchange format.
//!
//! Stencil orders: centered order 4 for first and second derivatives,
//! centered order 2 for third derivatives. The orders are returned alongside
//! every jet so downstream truncation bounds are never silent. Nodes closer
//! than three cells to a boundary cannot be differentiated.

use crate::jet::Jet3;
use crate::point::Point2;
use crate::{Error, Result};

pub const BOUNDARY_MARGIN: usize = 3;

/// Accuracy orders of the stencils behind a finite-difference jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StencilOrders {
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
}

pub const FD_ORDERS: StencilOrders = StencilOrders { d1: 4, d2: 4, d3: 2 };

/// Scalar samples on a uniform rectangular lattice, row-major in y:
/// `values[j * nx + i]` holds the sample at `(x0 + i hx, y0 + j hy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64, values: Vec<f64>) -> Result<Self> {
        if nx < 7 || ny < 7 {
            return Err(Error::Parse {
                message: format!("grid must be at least 7x7, got {nx}x{ny}"),
            });
        }
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::Parse {
                message: "grid spacings must be positive".into(),
            });
        }
        if values.len() != nx * ny {
            return Err(Error::Parse {
                message: format!("expected {} values, got {}", nx * ny, values.len()),
            });
        }
        Ok(GridField { nx, ny, x0, y0, hx, hy, values })
    }

    /// Sample a closed-form field on the lattice covering `[x0, x0+(nx-1)hx] x ...`.
    pub fn sample(
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        hx: f64,
        hy: f64,
        f: impl Fn(Point2) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(Point2 {
                    x: x0 + i as f64 * hx,
                    y: y0 + j as f64 * hy,
                })?);
            }
        }
        GridField::new(nx, ny, x0, y0, hx, hy, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn origin(&self) -> Point2 {
        Point2 { x: self.x0, y: self.y0 }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        Point2 {
            x: self.x0 + i as f64 * self.hx,
            y: self.y0 + j as f64 * self.hy,
        }
    }

    /// Index of the node nearest to `p`, if `p` lies on the lattice within
    /// a small snapping tolerance.
    pub fn nearest_node(&self, p: Point2) -> (usize, usize) {
        let i = ((p.x - self.x0) / self.hx).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.y0) / self.hy).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// Interior nodes at least `BOUNDARY_MARGIN` cells from every edge.
    pub fn differentiable_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = BOUNDARY_MARGIN;
        (m..self.ny - m).flat_map(move |j| (m..self.nx - m).map(move |i| (i, j)))
    }

    /// Finite-difference jet at a lattice node, with the stencil orders.
    pub fn jet_at_node(&self, i: usize, j: usize) -> Result<(Jet3, StencilOrders)> {
        let m = BOUNDARY_MARGIN;
        if i < m || j < m || i >= self.nx - m || j >= self.ny - m {
            return Err(Error::BoundaryMargin { i, j, margin: m });
        }
        let f = |di: i64, dj: i64| self.get((i as i64 + di) as usize, (j as i64 + dj) as usize);
        let (hx, hy) = (self.hx, self.hy);

        // order-4 centered first and second derivative weights on +-2
        let d1 = |s: &dyn Fn(i64) -> f64, h: f64| {
            (s(-2) - 8.0 * s(-1) + 8.0 * s(1) - s(2)) / (12.0 * h)
        };
        let d2 = |s: &dyn Fn(i64) -> f64, h: f64| {
            (-s(-2) + 16.0 * s(-1) - 30.0 * s(0) + 16.0 * s(1) - s(2)) / (12.0 * h * h)
        };
        // order-2 centered third derivative on +-2
        let d3 = |s: &dyn Fn(i64) -> f64, h: f64| {
            (s(2) - 2.0 * s(1) + 2.0 * s(-1) - s(-2)) / (2.0 * h * h * h)
        };
        // order-2 building blocks for mixed third derivatives
        let d1c = |s: &dyn Fn(i64) -> f64, h: f64| (s(1) - s(-1)) / (2.0 * h);
        let d2c = |s: &dyn Fn(i64) -> f64, h: f64| (s(1) - 2.0 * s(0) + s(-1)) / (h * h);

        let fx = d1(&|a| f(a, 0), hx);
        let fy = d1(&|b| f(0, b), hy);
        let fxx = d2(&|a| f(a, 0), hx);
        let fyy = d2(&|b| f(0, b), hy);
        // mixed second derivative: tensor product of the order-4 d1 stencils
        let fxy = d1(&|b| d1(&|a| f(a, b), hx), hy);
        let fxxx = d3(&|a| f(a, 0), hx);
        let fyyy = d3(&|b| f(0, b), hy);
        let fxxy = d1c(&|b| d2c(&|a| f(a, b), hx), hy);
        let fxyy = d1c(&|a| d2c(&|b| f(a, b), hy), hx);

        let mut jet = Jet3 {
            v: f(0, 0),
            d1: [fx, fy],
            d2: [[fxx, fxy], [fxy, fyy]],
            ..Default::default()
        };
        let d3t = &mut jet.d3;
        for (idx, val) in [
            ([0, 0, 0], fxxx),
            ([0, 0, 1], fxxy),
            ([0, 1, 1], fxyy),
            ([1, 1, 1], fyyy),
        ] {
            // fill all permutations to keep full symmetry
            let [a, b, c] = idx;
            for perm in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                d3t[perm[0]][perm[1]][perm[2]] = val;
            }
        }
        if !jet.is_finite() {
            return Err(Error::SingularPoint {
                what: "non-finite grid jet".into(),
                at: self.node(i, j),
            });
        }
        Ok((jet, FD_ORDERS))
    }

    /// CSV export: header `nx,ny,x0,y0,hx,hy`, then one row of comma-separated
    /// values per grid row. Doubles are printed with 17 significant digits so
    /// the round trip is bit-faithful.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            self.nx,
            self.ny,
            fmt17(self.x0),
            fmt17(self.y0),
            fmt17(self.hx),
            fmt17(self.hy)
        ));
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx).map(|i| fmt17(self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse {
            message: "empty grid file".into(),
        })?;
        let head: Vec<&str> = header.split(',').collect();
        if head.len() != 6 {
            return Err(Error::Parse {
                message: format!("grid header must have 6 fields, got {}", head.len()),
            });
        }
        let nx: usize = head[0].trim().parse().map_err(|_| Error::Parse {
            message: "bad nx".into(),
        })?;
        let ny: usize = head[1].trim().parse().map_err(|_| Error::Parse {
            message: "bad ny".into(),
        })?;
        let nums: Result<Vec<f64>> = head[2..]
            .iter()
            .map(|s| {
                s.trim().parse().map_err(|_| Error::Parse {
                    message: format!("bad header number `{s}`"),
                })
            })
            .collect();
        let nums = nums?;
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines {
            for tok in line.split(',') {
                values.push(tok.trim().parse().map_err(|_| Error::Parse {
                    message: format!("bad value `{tok}`"),
                })?);
            }
        }
        GridField::new(nx, ny, nums[0], nums[1], nums[2], nums[3], values)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Fornberg weights: coefficients of the derivative of order `m` at `z`
/// from samples at `offsets` (in units of the grid spacing). Used by the
/// Newton solver for one-sided stencils near boundaries.
pub fn fd_weights(z: f64, offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(m < n, "need more points than the derivative order");
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i] - z;
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}
