//! Curvature engine for metrics on 2+2n dimensional manifolds that depend on
//! (x, y) only: Christoffel symbols, Ricci tensor and scalar, from order-2
//! metric jets (closed-form mode) or from gridded metric entries (grid mode,
//! where Christoffels are formed on the grid and differenced once).

use crate::grid::GridField;
use crate::linalg;
use crate::point::Point2;
use crate::report::ResidualStat;
use crate::{Error, Result};

/// Order-2 jet of a dim x dim metric at a point. Derivatives run over the
/// two base coordinates only; all y-block derivatives vanish identically.
#[derive(Clone, Debug)]
pub struct MetricJet2 {
    pub dim: usize,
    /// Row-major metric values.
    pub g: Vec<f64>,
    /// dg[e] = derivative along x^e (e = 0, 1).
    pub dg: [Vec<f64>; 2],
    /// d2g[e][f], symmetric in (e, f).
    pub d2g: [[Vec<f64>; 2]; 2],
}

impl MetricJet2 {
    pub fn zero(dim: usize) -> Self {
        let z = vec![0.0; dim * dim];
        MetricJet2 {
            dim,
            g: z.clone(),
            dg: [z.clone(), z.clone()],
            d2g: [[z.clone(), z.clone()], [z.clone(), z]],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.dim + j]
    }

    /// Partial derivative of G_{ij} along coordinate a (zero off the base).
    #[inline]
    pub fn d(&self, a: usize, i: usize, j: usize) -> f64 {
        if a < 2 {
            self.dg[a][i * self.dim + j]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn dd(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        if a < 2 && b < 2 {
            self.d2g[a][b][i * self.dim + j]
        } else {
            0.0
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Structure tag carried by a block metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureTag {
    General,
    /// diag(e^{2 Phi} g, eps_1 g, ..., eps_n g) built from a minimal surface.
    PaperBlock,
}

type MetricFn = dyn Fn(Point2) -> Result<MetricJet2> + Send + Sync;

/// A metric on M_{2+2n} given either by exact jets or by gridded entries.
pub struct BlockMetric {
    dim: usize,
    tag: StructureTag,
    source: MetricSource,
}

enum MetricSource {
    ClosedForm(Box<MetricFn>),
    /// Row-major list of dim*dim entry grids sharing one lattice.
    Grid(Vec<GridField>),
}

impl BlockMetric {
    pub fn from_fn(
        dim: usize,
        tag: StructureTag,
        f: impl Fn(Point2) -> Result<MetricJet2> + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 2 && dim % 2 == 0 && dim <= 16, "dim must be even, 2..=16");
        BlockMetric {
            dim,
            tag,
            source: MetricSource::ClosedForm(Box::new(f)),
        }
    }

    pub fn from_grids(dim: usize, tag: StructureTag, entries: Vec<GridField>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::ConfigInvalid {
                message: format!("expected {} entry grids, got {}", dim * dim, entries.len()),
            });
        }
        Ok(BlockMetric {
            dim,
            tag,
            source: MetricSource::Grid(entries),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> StructureTag {
        self.tag
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.source, MetricSource::Grid(_))
    }

    /// Metric jets at a point. Grid sources snap to the nearest lattice node
    /// and use the stencils of `grid::jet_at_node` (order 4 for G and dG).
    pub fn jets(&self, p: Point2) -> Result<MetricJet2> {
        match &self.source {
            MetricSource::ClosedForm(f) => f(p),
            MetricSource::Grid(entries) => {
                let (i, j) = entries[0].nearest_node(p);
                let dim = self.dim;
                let mut m = MetricJet2::zero(dim);
                for (idx, e) in entries.iter().enumerate() {
                    let (jet, _) = e.jet_at_node(i, j)?;
                    m.g[idx] = jet.v;
                    for a in 0..2 {
                        m.dg[a][idx] = jet.d1[a];
                        for b in 0..2 {
                            m.d2g[a][b][idx] = jet.d2[a][b];
                        }
                    }
                }
                Ok(m)
            }
        }
    }

    pub fn grids(&self) -> Option<&[GridField]> {
        match &self.source {
            MetricSource::Grid(e) => Some(e),
            MetricSource::ClosedForm(_) => None,
        }
    }
}

/// Christoffel symbols and curvature at a point.
#[derive(Clone, Debug)]
pub struct CurvatureTensors {
    pub dim: usize,
    /// Gamma^a_{bc} at (a*dim + b)*dim + c; symmetric in (b, c).
    pub gamma: Vec<f64>,
    /// Ric_{ab}, row-major.
    pub ric: Vec<f64>,
    pub r_scalar: f64,
}

impl CurvatureTensors {
    pub fn ric_at(&self, a: usize, b: usize) -> f64 {
        self.ric[a * self.dim + b]
    }

    pub fn max_abs_ric(&self) -> f64 {
        self.ric.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest |Ric| over mixed (base, block) index pairs.
    pub fn max_abs_ric_mixed(&self) -> f64 {
        let mut m = 0.0_f64;
        for a in 0..2 {
            for b in 2..self.dim {
                m = m.max(self.ric_at(a, b).abs());
            }
        }
        m
    }
}

fn inverse_checked(m: &MetricJet2) -> Result<Vec<f64>> {
    let scale = m.max_abs().max(1e-300);
    let det = determinant(&m.g, m.dim);
    if det.abs() < 1e-12 * scale.powi(m.dim as i32) {
        return Err(Error::SingularMetric { det });
    }
    linalg::invert_dense(&m.g, m.dim)
}

fn determinant(a: &[f64], n: usize) -> f64 {
    let mut work = a.to_vec();
    let mut parity = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = work[col * n + col].abs();
        for row in col + 1..n {
            let c = work[row * n + col].abs();
            if c > best {
                best = c;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                work.swap(col * n + k, piv * n + k);
            }
            parity = -parity;
        }
        let d = work[col * n + col];
        for row in col + 1..n {
            let f = work[row * n + col] / d;
            for k in col..n {
                work[row * n + k] -= f * work[col * n + k];
            }
        }
    }
    (0..n).map(|i| work[i * n + i]).product::<f64>() * parity
}

/// Gamma^a_{bc} = 1/2 G^{ad} (d_b G_{dc} + d_c G_{db} - d_d G_{bc}).
pub fn christoffel(m: &MetricJet2) -> Result<Vec<f64>> {
    let inv = inverse_checked(m)?;
    Ok(christoffel_with_inverse(m, &inv))
}

fn christoffel_with_inverse(m: &MetricJet2, inv: &[f64]) -> Vec<f64> {
    let n = m.dim;
    let mut gamma = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += inv[a * n + d] * (m.d(b, d, c) + m.d(c, d, b) - m.d(d, b, c));
                }
                let v = 0.5 * s;
                gamma[(a * n + b) * n + c] = v;
                gamma[(a * n + c) * n + b] = v;
            }
        }
    }
    gamma
}

/// Ricci tensor by the direct formula
/// `Ric_{ab} = d_c Gamma^c_{ab} - d_a Gamma^c_{cb} + Gamma^c_{cd} Gamma^d_{ab}
///  - Gamma^c_{ad} Gamma^d_{cb}`, with the Gamma derivative taken analytically
/// from the order-2 metric jets (no nested differencing).
pub fn ricci(m: &MetricJet2) -> Result<CurvatureTensors> {
    let n = m.dim;
    let inv = inverse_checked(m)?;
    let gamma = christoffel_with_inverse(m, &inv);
    // d_e G^{ad} = -G^{ap} (d_e G_{pq}) G^{qd}, e over base coordinates
    let mut dinv = [vec![0.0; n * n], vec![0.0; n * n]];
    for (e, di) in dinv.iter_mut().enumerate() {
        for a in 0..n {
            for d in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        s -= inv[a * n + p] * m.d(e, p, q) * inv[q * n + d];
                    }
                }
                di[a * n + d] = s;
            }
        }
    }
    // d_e Gamma^a_{bc}, e = 0, 1
    let dgamma = |e: usize, a: usize, b: usize, c: usize| -> f64 {
        let mut s = 0.0;
        for d in 0..n {
            s += dinv[e][a * n + d] * (m.d(b, d, c) + m.d(c, d, b) - m.d(d, b, c))
                + inv[a * n + d] * (m.dd(e, b, d, c) + m.dd(e, c, d, b) - m.dd(e, d, b, c));
        }
        0.5 * s
    };
    let gam = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c];

    let mut ric = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for c in 0..2 {
                // d_c Gamma^c_{ab}: only base derivatives survive
                s += dgamma(c, c, a, b);
            }
            if a < 2 {
                for c in 0..n {
                    s -= dgamma(a, c, c, b);
                }
            }
            for c in 0..n {
                for d in 0..n {
                    s += gam(c, c, d) * gam(d, a, b) - gam(c, a, d) * gam(d, c, b);
                }
            }
            ric[a * n + b] = s;
        }
    }
    let mut r_scalar = 0.0;
    for a in 0..n {
        for b in 0..n {
            r_scalar += inv[a * n + b] * ric[a * n + b];
        }
    }
    Ok(CurvatureTensors {
        dim: n,
        gamma,
        ric,
        r_scalar,
    })
}

/// Ricci via contraction of the full Riemann tensor
/// `R^c_{acb}`; independent route used to cross-check `ricci`.
pub fn ricci_via_riemann(m: &MetricJet2) -> Result<Vec<f64>> {
    let n = m.dim;
    let inv = inverse_checked(m)?;
    let gamma = christoffel_with_inverse(m, &inv);
    let mut dinv = [vec![0.0; n * n], vec![0.0; n * n]];
    for (e, di) in dinv.iter_mut().enumerate() {
        for a in 0..n {
            for d in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        s -= inv[a * n + p] * m.d(e, p, q) * inv[q * n + d];
                    }
                }
                di[a * n + d] = s;
            }
        }
    }
    let dgamma = |e: usize, a: usize, b: usize, c: usize| -> f64 {
        if e >= 2 {
            return 0.0;
        }
        let mut s = 0.0;
        for d in 0..n {
            s += dinv[e][a * n + d] * (m.d(b, d, c) + m.d(c, d, b) - m.d(d, b, c))
                + inv[a * n + d] * (m.dd(e, b, d, c) + m.dd(e, c, d, b) - m.dd(e, d, b, c));
        }
        0.5 * s
    };
    let gam = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c];
    // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
    //           + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                let mut r = dgamma(a, a, d, b) - dgamma(d, a, a, b);
                for e in 0..n {
                    r += gam(a, a, e) * gam(e, d, b) - gam(a, d, e) * gam(e, a, b);
                }
                s += r;
            }
            ric[b * n + d] = s;
        }
    }
    Ok(ric)
}

/// Grid-mode Ricci at a lattice node: Christoffels are assembled at the node
/// and its four neighbors from order-4 metric-entry stencils, then
/// differenced once with the order-2 centered stencil. Truncation is O(h^2).
pub fn ricci_grid_at_node(bm: &BlockMetric, i: usize, j: usize) -> Result<CurvatureTensors> {
    let entries = bm.grids().ok_or_else(|| Error::ConfigInvalid {
        message: "grid-mode ricci needs a grid-backed metric".into(),
    })?;
    let n = bm.dim;
    let gamma_at = |ii: usize, jj: usize| -> Result<(Vec<f64>, MetricJet2)> {
        let mut m = MetricJet2::zero(n);
        for (idx, e) in entries.iter().enumerate() {
            let (jet, _) = e.jet_at_node(ii, jj)?;
            m.g[idx] = jet.v;
            for a in 0..2 {
                m.dg[a][idx] = jet.d1[a];
            }
        }
        let inv = inverse_checked(&m)?;
        Ok((christoffel_with_inverse(&m, &inv), m))
    };
    let (gamma0, m0) = gamma_at(i, j)?;
    let (gxp, _) = gamma_at(i + 1, j)?;
    let (gxm, _) = gamma_at(i - 1, j)?;
    let (gyp, _) = gamma_at(i, j + 1)?;
    let (gym, _) = gamma_at(i, j - 1)?;
    let hx = entries[0].hx();
    let hy = entries[0].hy();
    let dgamma = |e: usize, a: usize, b: usize, c: usize| -> f64 {
        let idx = (a * n + b) * n + c;
        match e {
            0 => (gxp[idx] - gxm[idx]) / (2.0 * hx),
            1 => (gyp[idx] - gym[idx]) / (2.0 * hy),
            _ => 0.0,
        }
    };
    let gam = |a: usize, b: usize, c: usize| gamma0[(a * n + b) * n + c];
    let inv = inverse_checked(&m0)?;
    let mut ric = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for c in 0..2 {
                s += dgamma(c, c, a, b);
            }
            if a < 2 {
                for c in 0..n {
                    s -= dgamma(a, c, c, b);
                }
            }
            for c in 0..n {
                for d in 0..n {
                    s += gam(c, c, d) * gam(d, a, b) - gam(c, a, d) * gam(d, c, b);
                }
            }
            ric[a * n + b] = s;
        }
    }
    let mut r_scalar = 0.0;
    for a in 0..n {
        for b in 0..n {
            r_scalar += inv[a * n + b] * ric[a * n + b];
        }
    }
    Ok(CurvatureTensors {
        dim: n,
        gamma: gamma0,
        ric,
        r_scalar,
    })
}

/// Ricci-flatness report over a point cloud: max and RMS of |Ric_{ab}| over
/// all components and points, with the worst offender recorded.
pub struct RicciReport {
    pub stat: ResidualStat,
    pub worst_component: (usize, usize),
}

pub fn ricci_flat_report(bm: &BlockMetric, points: &[Point2]) -> Result<RicciReport> {
    use rayon::prelude::*;
    let rows: Vec<(Point2, f64, (usize, usize), f64)> = points
        .par_iter()
        .map(|&p| {
            let t = ricci(&bm.jets(p)?)?;
            let mut worst = (0usize, 0usize);
            let mut max = 0.0_f64;
            let mut sq = 0.0_f64;
            for a in 0..t.dim {
                for b in 0..t.dim {
                    let v = t.ric_at(a, b).abs();
                    sq += v * v;
                    if v > max {
                        max = v;
                        worst = (a, b);
                    }
                }
            }
            Ok((p, max, worst, sq / (t.dim * t.dim) as f64))
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::ConfigInvalid {
            message: "empty point cloud".into(),
        });
    }
    let mut max = -1.0;
    let mut worst_point = rows[0].0;
    let mut worst_component = (0, 0);
    let mut sq = 0.0;
    for (p, m, w, s) in &rows {
        if *m > max {
            max = *m;
            worst_point = *p;
            worst_component = *w;
        }
        sq += s;
    }
    Ok(RicciReport {
        stat: ResidualStat {
            label: "ricci_flat".into(),
            max_abs: max,
            rms: (sq / rows.len() as f64).sqrt(),
            worst: worst_point,
            samples: rows.len(),
            masked: 0,
        },
        worst_component,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn diag_metric(f: impl Fn(Point2) -> ([f64; 2], [[f64; 2]; 2], [[[f64; 2]; 2]; 2])) -> impl Fn(Point2) -> Result<MetricJet2> {
        move |p| {
            let (vals, d1, d2) = f(p);
            let mut m = MetricJet2::zero(2);
            for i in 0..2 {
                m.g[i * 2 + i] = vals[i];
                for a in 0..2 {
                    m.dg[a][i * 2 + i] = d1[i][a];
                    for b in 0..2 {
                        m.d2g[a][b][i * 2 + i] = d2[i][a][b];
                    }
                }
            }
            Ok(m)
        }
    }

    #[test]
    fn constant_metric_is_flat() {
        let f = diag_metric(|_| ([2.0, 3.0], [[0.0; 2]; 2], [[[0.0; 2]; 2]; 2]));
        let t = ricci(&f(Point2 { x: 0.3, y: 0.7 }).unwrap()).unwrap();
        assert!(t.gamma.iter().all(|v| *v == 0.0));
        assert!(t.max_abs_ric() == 0.0);
    }

    #[test]
    fn christoffel_of_diag_one_x_squared() {
        // G = diag(1, x^2): Gamma^2_{12} = 1/x, Gamma^1_{22} = -x
        let f = diag_metric(|p| {
            (
                [1.0, p.x * p.x],
                [[0.0, 0.0], [2.0 * p.x, 0.0]],
                [[[0.0; 2]; 2], [[2.0, 0.0], [0.0, 0.0]]],
            )
        });
        let m = f(Point2 { x: 2.0, y: 0.0 }).unwrap();
        let g = christoffel(&m).unwrap();
        let at = |a: usize, b: usize, c: usize| g[(a * 2 + b) * 2 + c];
        assert_relative_eq!(at(1, 0, 1), 0.5);
        assert_relative_eq!(at(1, 1, 0), 0.5);
        assert_relative_eq!(at(0, 1, 1), -2.0);
    }

    #[test]
    fn unit_sphere_patch() {
        // G = diag(1, sin^2 x): Ric = G, R = 2
        let f = diag_metric(|p| {
            let (s, c) = p.x.sin_cos();
            (
                [1.0, s * s],
                [[0.0, 0.0], [2.0 * s * c, 0.0]],
                [[[0.0; 2]; 2], [[2.0 * (c * c - s * s), 0.0], [0.0, 0.0]]],
            )
        });
        let m = f(Point2 { x: 0.9, y: 0.4 }).unwrap();
        let t = ricci(&m).unwrap();
        assert_relative_eq!(t.ric_at(0, 0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.ric_at(1, 1), 0.9_f64.sin().powi(2), max_relative = 1e-12);
        assert_abs_diff_eq!(t.ric_at(0, 1), 0.0, epsilon = 1e-13);
        assert_relative_eq!(t.r_scalar, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn riemann_contraction_matches_direct_formula() {
        let f = diag_metric(|p| {
            let e = (0.3 * p.x + 0.1 * p.y).exp();
            (
                [e, 1.0 / e],
                [
                    [0.3 * e, 0.1 * e],
                    [-0.3 / e, -0.1 / e],
                ],
                [
                    [[0.09 * e, 0.03 * e], [0.03 * e, 0.01 * e]],
                    [[0.09 / e, 0.03 / e], [0.03 / e, 0.01 / e]],
                ],
            )
        });
        let m = f(Point2 { x: 0.6, y: -0.2 }).unwrap();
        let t = ricci(&m).unwrap();
        let viarie = ricci_via_riemann(&m).unwrap();
        for (a, b) in viarie.iter().zip(&t.ric) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
    }

    #[test]
    fn coordinate_rescaling_leaves_r_scalar_invariant() {
        // pull the sphere patch back through x -> x/lambda
        let lam = 2.0;
        let sphere = diag_metric(|p| {
            let (s, c) = p.x.sin_cos();
            (
                [1.0, s * s],
                [[0.0, 0.0], [2.0 * s * c, 0.0]],
                [[[0.0; 2]; 2], [[2.0 * (c * c - s * s), 0.0], [0.0, 0.0]]],
            )
        });
        let scaled = move |p: Point2| -> Result<MetricJet2> {
            let q = Point2 { x: p.x / lam, y: p.y };
            let base = sphere(q)?;
            let mut m = MetricJet2::zero(2);
            // G'_{ab}(p) = S_a S_b G_{ab}(q), d/dx picks 1/lam per x-derivative
            let scale = [1.0 / lam, 1.0];
            for i in 0..2 {
                for j in 0..2 {
                    let idx = i * 2 + j;
                    m.g[idx] = scale[i] * scale[j] * base.g[idx];
                    for a in 0..2 {
                        m.dg[a][idx] = scale[i] * scale[j] * base.dg[a][idx] * scale[a];
                        for b in 0..2 {
                            m.d2g[a][b][idx] =
                                scale[i] * scale[j] * base.d2g[a][b][idx] * scale[a] * scale[b];
                        }
                    }
                }
            }
            Ok(m)
        };
        let p = Point2 { x: 1.8, y: 0.4 };
        let t = ricci(&scaled(p).unwrap()).unwrap();
        assert_relative_eq!(t.r_scalar, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn singular_metric_is_rejected() {
        let f = diag_metric(|_| ([1.0, 0.0], [[0.0; 2]; 2], [[[0.0; 2]; 2]; 2]));
        assert!(matches!(
            ricci(&f(Point2 { x: 0.0, y: 0.0 }).unwrap()),
            Err(Error::SingularMetric { .. })
        ));
    }
}
