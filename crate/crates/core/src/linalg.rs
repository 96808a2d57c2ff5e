//! Small linear-algebra kernels: generic 2x2 matrix algebra over jet scalars,
//! a dense LU for the block-metric inverses (dim <= 16), and a banded LU with
//! partial pivoting for the Newton solver's Jacobians.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// Scalar ring shared by f64 and the jet types, enough for 2x2 algebra.
pub trait Ring:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
}
impl Ring for crate::jet::Jet1 {
    fn zero() -> Self {
        Self::default()
    }
}
impl Ring for crate::jet::Jet2 {
    fn zero() -> Self {
        Self::default()
    }
}
impl Ring for crate::jet::Jet3 {
    fn zero() -> Self {
        Self::default()
    }
}

pub type Mat2<T> = [[T; 2]; 2];

pub fn mat2<T: Ring>(f: impl Fn(usize, usize) -> T) -> Mat2<T> {
    [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
}

pub fn det2<T: Ring>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn matmul2<T: Ring>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    mat2(|i, j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
}

pub fn mat_add2<T: Ring>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    mat2(|i, j| a[i][j] + b[i][j])
}

pub fn mat_sub2<T: Ring>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    mat2(|i, j| a[i][j] - b[i][j])
}

pub fn mat_scale2<T: Ring>(a: &Mat2<T>, s: T) -> Mat2<T> {
    mat2(|i, j| a[i][j] * s)
}

pub fn trace2<T: Ring>(a: &Mat2<T>) -> T {
    a[0][0] + a[1][1]
}

pub fn commutator2<T: Ring>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    mat_sub2(&matmul2(a, b), &matmul2(b, a))
}

/// Inverse via the adjugate; `inv_det` must be the reciprocal of `det2(m)`.
pub fn inv2_with<T: Ring>(m: &Mat2<T>, inv_det: T) -> Mat2<T> {
    [
        [m[1][1] * inv_det, -m[0][1] * inv_det],
        [-m[1][0] * inv_det, m[0][0] * inv_det],
    ]
}

pub fn inv2_jet1(m: &Mat2<crate::jet::Jet1>) -> Mat2<crate::jet::Jet1> {
    inv2_with(m, det2(m).recip())
}

pub fn inv2_jet2(m: &Mat2<crate::jet::Jet2>) -> Mat2<crate::jet::Jet2> {
    inv2_with(m, det2(m).recip())
}

pub fn max_abs2(m: &Mat2<f64>) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Dense LU solve with partial pivoting, in place. For the small systems of
/// the curvature engine (n <= 16); the Newton solver uses the banded variant.
pub fn lu_solve_dense(a: &mut [f64], n: usize, rhs: &mut [f64]) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(rhs.len(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[perm[col] * n + col].abs();
        for row in col + 1..n {
            let cand = a[perm[row] * n + col].abs();
            if cand > best {
                best = cand;
                piv = row;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularMetric { det: 0.0 });
        }
        perm.swap(col, piv);
        let d = a[perm[col] * n + col];
        for row in col + 1..n {
            let f = a[perm[row] * n + col] / d;
            a[perm[row] * n + col] = f;
            for k in col + 1..n {
                a[perm[row] * n + k] -= f * a[perm[col] * n + k];
            }
        }
    }
    // forward then back substitution on the permuted system
    let b: Vec<f64> = perm.iter().map(|&r| rhs[r]).collect();
    let mut y = b;
    for row in 1..n {
        for col in 0..row {
            y[row] = y[row] - a[perm[row] * n + col] * y[col];
        }
    }
    for row in (0..n).rev() {
        for col in row + 1..n {
            y[row] = y[row] - a[perm[row] * n + col] * y[col];
        }
        y[row] /= a[perm[row] * n + row];
    }
    rhs.copy_from_slice(&y);
    Ok(())
}

/// Dense inverse; returns None when numerically singular.
pub fn invert_dense(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    for col in 0..n {
        let mut work = a.to_vec();
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        lu_solve_dense(&mut work, n, &mut e)?;
        for row in 0..n {
            out[row * n + col] = e[row];
        }
    }
    Ok(out)
}

/// Band matrix in LAPACK-style storage with room for pivoting fill-in.
/// Row index `i`, column `j` with |i - j| <= kl (lower) / ku (upper).
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// (2*kl + ku + 1) x n: entry (i, j) lives at band[kl + ku + i - j][j].
    /// The kl extra upper diagonals hold pivoting fill-in.
    band: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            band: vec![0.0; rows * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let r = self.kl + self.ku + i - j;
        r * self.n + j
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j <= i + self.ku && i <= j + self.kl, "entry outside band");
        let k = self.idx(i, j);
        self.band[k] += v;
    }

    /// LU factorization with partial pivoting followed by the solve, both in
    /// place. Standard banded Gaussian elimination; pivot rows stay within
    /// `kl` of the diagonal so fill stays inside the widened storage.
    pub fn solve(&mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        assert_eq!(rhs.len(), n);
        let kv = kl + ku; // row offset of the diagonal in band storage
        let get = |band: &Vec<f64>, i: usize, j: usize| band[(kv + i - j) * n + j];
        let set = |band: &mut Vec<f64>, i: usize, j: usize, v: f64| {
            band[(kv + i - j) * n + j] = v;
        };
        for col in 0..n {
            let last_row = (col + kl).min(n - 1);
            let mut piv = col;
            let mut best = get(&self.band, col, col).abs();
            for row in col + 1..=last_row {
                let cand = get(&self.band, row, col).abs();
                if cand > best {
                    best = cand;
                    piv = row;
                }
            }
            if best < 1e-300 {
                return Err(Error::SingularMetric { det: 0.0 });
            }
            if piv != col {
                // swap rows col and piv; piv <= col + kl keeps both rows'
                // entries for columns col..col+kv inside the widened band
                let last_col = (col + kv).min(n - 1);
                for j in col..=last_col {
                    let a = get(&self.band, col, j);
                    let b = get(&self.band, piv, j);
                    set(&mut self.band, col, j, b);
                    set(&mut self.band, piv, j, a);
                }
                rhs.swap(col, piv);
            }
            let d = get(&self.band, col, col);
            let last_col = (col + kv).min(n - 1);
            for row in col + 1..=last_row {
                let f = get(&self.band, row, col) / d;
                if f != 0.0 {
                    for j in col + 1..=last_col {
                        let v = get(&self.band, row, j) - f * get(&self.band, col, j);
                        set(&mut self.band, row, j, v);
                    }
                    rhs[row] -= f * rhs[col];
                }
                set(&mut self.band, row, col, 0.0);
            }
        }
        for row in (0..n).rev() {
            let last_col = (row + kv).min(n - 1);
            let mut acc = rhs[row];
            for j in row + 1..=last_col {
                acc -= get(&self.band, row, j) * rhs[j];
            }
            rhs[row] = acc / get(&self.band, row, row);
        }
        Ok(())
    }
}
