//! Truncated Taylor (jet) arithmetic in two variables.
//!
//! `Jet3` carries a value and all partial derivatives through order three and
//! is the record type produced by differentiating a scalar field. Quantities
//! derived from first derivatives of that field (metric entries, rho, the
//! scalar catalog) can only be known through order two, so their algebra runs
//! on `Jet2`; one more derivative shift lands on `Jet1`. Keeping the orders
//! in the types prevents silently wrong high-order terms.
//!
//! Derivative tensors are stored dense and symmetric; symmetry is enforced by
//! construction (Leibniz and chain-rule formulas are manifestly symmetric).

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::{Error, Result};

/// Value and gradient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet1 {
    pub v: f64,
    pub d: [f64; 2],
}

/// Value, gradient, and symmetric Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub dd: [[f64; 2]; 2],
}

/// Value and all partial derivatives through order three.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet3 {
    pub v: f64,
    pub d1: [f64; 2],
    pub d2: [[f64; 2]; 2],
    pub d3: [[[f64; 2]; 2]; 2],
}

impl Jet1 {
    pub fn constant(v: f64) -> Self {
        Jet1 { v, d: [0.0; 2] }
    }

    /// Chain rule through a scalar function with derivatives `f = [f(u), f'(u)]`.
    pub fn compose(self, f: [f64; 2]) -> Self {
        Jet1 {
            v: f[0],
            d: [f[1] * self.d[0], f[1] * self.d[1]],
        }
    }

    pub fn recip(self) -> Self {
        let u = self.v;
        self.compose([1.0 / u, -1.0 / (u * u)])
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d.iter().all(|t| t.is_finite())
    }
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            d: [0.0; 2],
            dd: [[0.0; 2]; 2],
        }
    }

    pub fn truncate(self) -> Jet1 {
        Jet1 { v: self.v, d: self.d }
    }

    /// Jet of the partial derivative along `mu`, one order lower.
    pub fn partial(self, mu: usize) -> Jet1 {
        Jet1 {
            v: self.d[mu],
            d: self.dd[mu],
        }
    }

    /// Chain rule through f with `f = [f(u), f'(u), f''(u)]`.
    pub fn compose(self, f: [f64; 3]) -> Self {
        let u1 = self.d;
        let mut dd = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dd[i][j] = f[2] * u1[i] * u1[j] + f[1] * self.dd[i][j];
            }
        }
        Jet2 {
            v: f[0],
            d: [f[1] * u1[0], f[1] * u1[1]],
            dd,
        }
    }

    pub fn recip(self) -> Self {
        let u = self.v;
        self.compose([1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)])
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose([e, e, e])
    }

    /// log |u|; errors when |u| is numerically zero. The derivative jets are
    /// those of log u regardless of sign (d log|u| = du/u away from zero).
    pub fn ln_abs(self, what: &'static str) -> Result<Self> {
        let u = self.v;
        if u.abs() < 1e-300 {
            return Err(Error::LogDomain { what, value: u });
        }
        Ok(self.compose([u.abs().ln(), 1.0 / u, -1.0 / (u * u)]))
    }

    /// sqrt |u|; caller tracks the sign separately.
    pub fn sqrt_abs(self) -> Self {
        let a = self.v.abs();
        let s = a.sqrt();
        let sgn = if self.v < 0.0 { -1.0 } else { 1.0 };
        // d sqrt|u| = sgn(u) du / (2 sqrt|u|)
        self.compose([s, sgn * 0.5 / s, -0.25 / (a * s)])
    }

    /// |u|^c with the sign of the result for negative bases under integer
    /// exponents; masked otherwise.
    pub fn powf_signed(self, c: f64) -> Result<Self> {
        if c == 0.0 {
            return Ok(Jet2::constant(1.0));
        }
        let u = self.v;
        if u.abs() < 1e-300 {
            return Err(Error::PowerDomain { base: u, exponent: c });
        }
        let sign = if u > 0.0 {
            1.0
        } else if (c - c.round()).abs() < 1e-9 {
            if (c.round() as i64).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        } else {
            return Err(Error::PowerDomain { base: u, exponent: c });
        };
        let a = u.abs();
        let p = a.powf(c);
        // derivatives of u^c in terms of u, valid with the sign factor folded in
        let f1 = sign * c * p / a * if u < 0.0 { -1.0 } else { 1.0 };
        let f2 = sign * c * (c - 1.0) * p / (a * a);
        Ok(self.compose([sign * p, f1, f2]))
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.d.iter().all(|t| t.is_finite())
            && self.dd.iter().flatten().all(|t| t.is_finite())
    }
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        Jet3 {
            v,
            ..Default::default()
        }
    }

    /// Coordinate seed: `axis` 0 for x, 1 for y.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Jet3::constant(v);
        j.d1[axis] = 1.0;
        j
    }

    pub fn truncate(self) -> Jet2 {
        Jet2 {
            v: self.v,
            d: self.d1,
            dd: self.d2,
        }
    }

    /// Jet of phi_, mu as an order-2 jet: exact, no information invented.
    pub fn partial(self, mu: usize) -> Jet2 {
        Jet2 {
            v: self.d1[mu],
            d: self.d2[mu],
            dd: self.d3[mu],
        }
    }

    /// Chain rule through f with derivatives `[f, f', f'', f''']` at self.v.
    pub fn compose(self, f: [f64; 4]) -> Self {
        let u1 = self.d1;
        let u2 = self.d2;
        let u3 = self.d3;
        let mut d2 = [[0.0; 2]; 2];
        let mut d3 = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d2[i][j] = f[2] * u1[i] * u1[j] + f[1] * u2[i][j];
                for k in 0..2 {
                    d3[i][j][k] = f[3] * u1[i] * u1[j] * u1[k]
                        + f[2] * (u2[i][j] * u1[k] + u2[i][k] * u1[j] + u2[j][k] * u1[i])
                        + f[1] * u3[i][j][k];
                }
            }
        }
        Jet3 {
            v: f[0],
            d1: [f[1] * u1[0], f[1] * u1[1]],
            d2,
            d3,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.d1.iter().all(|t| t.is_finite())
            && self.d2.iter().flatten().all(|t| t.is_finite())
            && self.d3.iter().flatten().flatten().all(|t| t.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.v.abs();
        for i in 0..2 {
            m = m.max(self.d1[i].abs());
            for j in 0..2 {
                m = m.max(self.d2[i][j].abs());
                for k in 0..2 {
                    m = m.max(self.d3[i][j][k].abs());
                }
            }
        }
        m
    }
}

macro_rules! impl_linear_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                self.lin(rhs, 1.0)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                self.lin(rhs, -1.0)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scale(-1.0)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                self.scale(s)
            }
        }
    };
}

impl Jet1 {
    fn lin(self, rhs: Self, s: f64) -> Self {
        Jet1 {
            v: self.v + s * rhs.v,
            d: [self.d[0] + s * rhs.d[0], self.d[1] + s * rhs.d[1]],
        }
    }
    fn scale(self, s: f64) -> Self {
        Jet1 {
            v: s * self.v,
            d: [s * self.d[0], s * self.d[1]],
        }
    }
}

impl Jet2 {
    fn lin(self, rhs: Self, s: f64) -> Self {
        let mut out = self;
        out.v += s * rhs.v;
        for i in 0..2 {
            out.d[i] += s * rhs.d[i];
            for j in 0..2 {
                out.dd[i][j] += s * rhs.dd[i][j];
            }
        }
        out
    }
    fn scale(self, s: f64) -> Self {
        let mut out = self;
        out.v *= s;
        for i in 0..2 {
            out.d[i] *= s;
            for j in 0..2 {
                out.dd[i][j] *= s;
            }
        }
        out
    }
}

impl Jet3 {
    fn lin(self, rhs: Self, s: f64) -> Self {
        let mut out = self;
        out.v += s * rhs.v;
        for i in 0..2 {
            out.d1[i] += s * rhs.d1[i];
            for j in 0..2 {
                out.d2[i][j] += s * rhs.d2[i][j];
                for k in 0..2 {
                    out.d3[i][j][k] += s * rhs.d3[i][j][k];
                }
            }
        }
        out
    }
    fn scale(self, s: f64) -> Self {
        let mut out = self;
        out.v *= s;
        for i in 0..2 {
            out.d1[i] *= s;
            for j in 0..2 {
                out.d2[i][j] *= s;
                for k in 0..2 {
                    out.d3[i][j][k] *= s;
                }
            }
        }
        out
    }
}

impl_linear_ops!(Jet1);
impl_linear_ops!(Jet2);
impl_linear_ops!(Jet3);

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, b: Jet1) -> Jet1 {
        Jet1 {
            v: self.v * b.v,
            d: [
                self.d[0] * b.v + self.v * b.d[0],
                self.d[1] * b.v + self.v * b.d[1],
            ],
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, b: Jet2) -> Jet2 {
        let a = self;
        let mut dd = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dd[i][j] =
                    a.dd[i][j] * b.v + a.d[i] * b.d[j] + a.d[j] * b.d[i] + a.v * b.dd[i][j];
            }
        }
        Jet2 {
            v: a.v * b.v,
            d: [
                a.d[0] * b.v + a.v * b.d[0],
                a.d[1] * b.v + a.v * b.d[1],
            ],
            dd,
        }
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, b: Jet3) -> Jet3 {
        let a = self;
        let mut d2 = [[0.0; 2]; 2];
        let mut d3 = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d2[i][j] =
                    a.d2[i][j] * b.v + a.d1[i] * b.d1[j] + a.d1[j] * b.d1[i] + a.v * b.d2[i][j];
                for k in 0..2 {
                    d3[i][j][k] = a.d3[i][j][k] * b.v
                        + a.d2[i][j] * b.d1[k]
                        + a.d2[i][k] * b.d1[j]
                        + a.d2[j][k] * b.d1[i]
                        + a.d1[i] * b.d2[j][k]
                        + a.d1[j] * b.d2[i][k]
                        + a.d1[k] * b.d2[i][j]
                        + a.v * b.d3[i][j][k];
                }
            }
        }
        Jet3 {
            v: a.v * b.v,
            d1: [
                a.d1[0] * b.v + a.v * b.d1[0],
                a.d1[1] * b.v + a.v * b.d1[1],
            ],
            d2,
            d3,
        }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, b: Jet1) -> Jet1 {
        self * b.recip()
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, b: Jet2) -> Jet2 {
        self * b.recip()
    }
}
