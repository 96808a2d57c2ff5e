//! The ambient flat 3-geometry, the generalized minimal-surface equation,
//! intrinsic curvatures of graph surfaces, and the catalog of exact solutions.
//!
//! The ambient metric is `ds^2 = g0_{mu nu} dx^mu dx^nu + eps (dx^3)^2` with
//! `g0` a constant symmetric invertible 2x2 matrix and `eps = +-1`. A graph
//! `x^3 = phi(x, y)` is minimal when
//!
//! ```text
//! [k2 + eps phi_y^2] phi_xx - 2 [k0 + eps phi_x phi_y] phi_xy
//!                             + [k1 + eps phi_x^2] phi_yy = 0
//! ```
//!
//! which reduces to the classical equation for `g0 = I`, `eps = +1`.

pub mod solve;

use crate::expr::{build, ScalarExpr};
use crate::grid::GridField;
use crate::jet::Jet3;
use crate::linalg::{det2, mat2, Mat2};
use crate::point::{Domain, Mask, Point2};
use crate::{Error, Result};

/// Constant ambient metric: g0 entries (k1 k0 / k0 k2) and the sign eps of
/// the (dx^3)^2 term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientMetric {
    k1: f64,
    k0: f64,
    k2: f64,
    eps: f64,
}

impl AmbientMetric {
    pub fn new(k1: f64, k0: f64, k2: f64, eps: i8) -> Result<Self> {
        if !(eps == 1 || eps == -1) {
            return Err(Error::ConstraintViolation {
                message: format!("eps must be +1 or -1, got {eps}"),
            });
        }
        let det = k1 * k2 - k0 * k0;
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::ConstraintViolation {
                message: format!("det g0 = k1 k2 - k0^2 = {det:e} must be nonzero"),
            });
        }
        Ok(AmbientMetric {
            k1,
            k0,
            k2,
            eps: eps as f64,
        })
    }

    pub fn euclidean() -> Self {
        AmbientMetric::new(1.0, 0.0, 1.0, 1).unwrap()
    }

    /// diag(1, -1) in the surface directions, eps = +1.
    pub fn split() -> Self {
        AmbientMetric::new(1.0, 0.0, -1.0, 1).unwrap()
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn g0(&self) -> Mat2<f64> {
        [[self.k1, self.k0], [self.k0, self.k2]]
    }

    pub fn det_g0(&self) -> f64 {
        self.k1 * self.k2 - self.k0 * self.k0
    }

    pub fn g0_inv(&self) -> Mat2<f64> {
        let d = self.det_g0();
        [[self.k2 / d, -self.k0 / d], [-self.k0 / d, self.k1 / d]]
    }
}

/// The graph function, evaluable to third-order jets from either source.
#[derive(Clone, Debug)]
pub enum PhiField {
    Expr(ScalarExpr),
    Grid(GridField),
}

impl PhiField {
    pub fn jet(&self, p: Point2) -> Result<Jet3> {
        match self {
            PhiField::Expr(e) => e.jet_eval(p),
            PhiField::Grid(g) => {
                let (i, j) = g.nearest_node(p);
                Ok(g.jet_at_node(i, j)?.0)
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, PhiField::Grid(_))
    }
}

/// A graph surface: phi, its ambient geometry, and the evaluation domain.
#[derive(Clone, Debug)]
pub struct SurfaceSolution {
    pub phi: PhiField,
    pub ambient: AmbientMetric,
    pub domain: Domain,
    /// Largest |minimal residual| observed when the solution was validated.
    pub residual_bound: f64,
}

impl SurfaceSolution {
    pub fn phi_jet(&self, p: Point2) -> Result<Jet3> {
        self.phi.jet(p)
    }
}

/// Left-hand side of the minimal-surface equation, exactly as displayed.
pub fn minimal_residual(phi: &Jet3, ambient: &AmbientMetric) -> f64 {
    let e = ambient.eps;
    let (px, py) = (phi.d1[0], phi.d1[1]);
    (ambient.k2 + e * py * py) * phi.d2[0][0] - 2.0 * (ambient.k0 + e * px * py) * phi.d2[0][1]
        + (ambient.k1 + e * px * px) * phi.d2[1][1]
}

/// Scale of the three coefficient brackets, for relative residual reporting.
pub fn minimal_residual_scale(phi: &Jet3, ambient: &AmbientMetric) -> f64 {
    let e = ambient.eps;
    let (px, py) = (phi.d1[0], phi.d1[1]);
    let coeff = (ambient.k2 + e * py * py).abs()
        + 2.0 * (ambient.k0 + e * px * py).abs()
        + (ambient.k1 + e * px * px).abs();
    coeff.max(1.0)
}

/// rho = 1 + eps g0^{mu nu} phi_mu phi_nu, the graph density.
pub fn rho_value(phi: &Jet3, ambient: &AmbientMetric) -> f64 {
    let gi = ambient.g0_inv();
    let d = phi.d1;
    let mut q = 0.0;
    for m in 0..2 {
        for n in 0..2 {
            q += gi[m][n] * d[m] * d[n];
        }
    }
    1.0 + ambient.eps * q
}

/// Intrinsic curvature data of the graph surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceCurvature {
    /// Curvature scalar of h (twice the sectional curvature).
    pub k: f64,
    /// Mean curvature; computed with sqrt|rho|, sign of rho recorded below.
    pub h_mean: f64,
    /// lambda0 = 1/2 [phi^{ab} phi_{ab} - (phi^a_a)^2].
    pub lambda0: f64,
    /// Ricci tensor of the induced metric h.
    pub r: Mat2<f64>,
    pub rho: f64,
    pub sgn_rho: f64,
}

/// K, H, lambda0 and the Ricci tensor of h at a point.
///
/// K is the displayed expression `(eps/rho^2)[(phi^a_a)^2 - phi^{ab} phi_{ab}]`,
/// which equals the curvature scalar of h (twice the classical Gaussian
/// curvature of a Euclidean graph); the sign convention is cross-checked in
/// tests against a shape-operator oracle with upward normal.
pub fn surface_curvature(phi: &Jet3, ambient: &AmbientMetric) -> Result<SurfaceCurvature> {
    let rho = rho_value(phi, ambient);
    if rho.abs() < 1e-12 {
        return Err(Error::DegeneratePoint { rho });
    }
    let e = ambient.eps;
    let gi = ambient.g0_inv();
    let hess = phi.d2;
    // A = g0^{-1} H, traces of A and A^2
    let a = mat2(|i, j| gi[i][0] * hess[0][j] + gi[i][1] * hess[1][j]);
    let tr = a[0][0] + a[1][1];
    let tr2 = a[0][0] * a[0][0] + 2.0 * a[0][1] * a[1][0] + a[1][1] * a[1][1];
    let k = e / (rho * rho) * (tr * tr - tr2);
    let lambda0 = 0.5 * (tr2 - tr * tr);

    // H = (1/sqrt|rho|) h^{mu nu} phi_{mu nu}
    let sgn_rho = if rho < 0.0 { -1.0 } else { 1.0 };
    let dphi_up = [
        gi[0][0] * phi.d1[0] + gi[0][1] * phi.d1[1],
        gi[1][0] * phi.d1[0] + gi[1][1] * phi.d1[1],
    ];
    let h_inv = mat2(|m, n| gi[m][n] - e / rho * dphi_up[m] * dphi_up[n]);
    let lap = (0..2)
        .flat_map(|m| (0..2).map(move |n| (m, n)))
        .map(|(m, n)| h_inv[m][n] * hess[m][n])
        .sum::<f64>();
    let h_mean = lap / rho.abs().sqrt();

    // Ricci of h: (eps/rho) (nabla^2 phi) phi_{mn} - (eps/rho) phi_m^a phi_{na}
    //             + rho_m rho_n / (4 rho^2)
    let drho = rho_gradient(phi, ambient);
    let r = mat2(|m, n| {
        let quad: f64 = (0..2)
            .map(|al| {
                let up = gi[al][0] * hess[0][m] + gi[al][1] * hess[1][m];
                up * hess[n][al]
            })
            .sum();
        e / rho * lap * hess[m][n] - e / rho * quad + drho[m] * drho[n] / (4.0 * rho * rho)
    });
    Ok(SurfaceCurvature {
        k,
        h_mean,
        lambda0,
        r,
        rho,
        sgn_rho,
    })
}

fn rho_gradient(phi: &Jet3, ambient: &AmbientMetric) -> [f64; 2] {
    let gi = ambient.g0_inv();
    let e = ambient.eps;
    let mut out = [0.0; 2];
    for c in 0..2 {
        let mut s = 0.0;
        for m in 0..2 {
            for n in 0..2 {
                s += gi[m][n] * (phi.d2[m][c] * phi.d1[n] + phi.d1[m] * phi.d2[n][c]);
            }
        }
        out[c] = e * s;
    }
    out
}

/// The two-dimensional identity
/// `phi_{am} phi_{bg} - phi_{ab} phi_{mg} + lambda0 (g0_{am} g0_{bg} - g0_{ab} g0_{gm})`,
/// componentwise; vanishes for every smooth phi in 2D.
pub fn id1_residual(phi: &Jet3, ambient: &AmbientMetric) -> [[[[f64; 2]; 2]; 2]; 2] {
    let g0 = ambient.g0();
    let gi = ambient.g0_inv();
    let hess = phi.d2;
    let a = mat2(|i, j| gi[i][0] * hess[0][j] + gi[i][1] * hess[1][j]);
    let tr = a[0][0] + a[1][1];
    let tr2 = a[0][0] * a[0][0] + 2.0 * a[0][1] * a[1][0] + a[1][1] * a[1][1];
    let lambda0 = 0.5 * (tr2 - tr * tr);
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for al in 0..2 {
        for mu in 0..2 {
            for be in 0..2 {
                for ga in 0..2 {
                    out[al][mu][be][ga] = hess[al][mu] * hess[be][ga]
                        - hess[al][be] * hess[mu][ga]
                        + lambda0 * (g0[al][mu] * g0[be][ga] - g0[al][be] * g0[ga][mu]);
                }
            }
        }
    }
    out
}

pub fn max_abs_id1(res: &[[[[f64; 2]; 2]; 2]; 2]) -> f64 {
    let mut m = 0.0_f64;
    for a in res.iter().flatten().flatten().flatten() {
        m = m.max(a.abs());
    }
    m
}

/// Catalog of exact minimal graphs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogSurface<'a> {
    /// phi = a x + b y; minimal for every ambient.
    Plane { a: f64, b: f64 },
    /// phi = log(cos y) - log(cos x) on (-pi/2, pi/2)^2 minus a margin.
    Scherk,
    /// phi = atan(y/x), excluding a strip around x = 0.
    Helicoid,
    /// phi = f(x + y) with g0 = diag(1, -1): rho = 1 identically.
    NullWave { profile: &'a str },
}

/// Names understood by `catalog_surface`.
pub const CATALOG_NAMES: [&str; 4] = ["plane", "scherk", "helicoid", "null_wave"];

/// Build a catalog surface by name. `plane` takes slope parameters, and
/// `null_wave` a one-variable profile expression f(u) written in `x`.
pub fn catalog_surface(name: &str, params: &[f64], profile: Option<&str>) -> Result<SurfaceSolution> {
    match name {
        "plane" => {
            let (a, b) = match params {
                [] => (1.0, 2.0),
                [a, b] => (*a, *b),
                _ => {
                    return Err(Error::ConfigInvalid {
                        message: "plane takes two parameters (a, b)".into(),
                    })
                }
            };
            let phi = build::add(
                build::mul(build::c(a), build::x()),
                build::mul(build::c(b), build::y()),
            );
            Ok(SurfaceSolution {
                phi: PhiField::Expr(phi),
                ambient: AmbientMetric::euclidean(),
                domain: Domain::rect(-1.0, 1.0, -1.0, 1.0),
                residual_bound: 0.0,
            })
        }
        "scherk" => {
            let phi = ScalarExpr::parse("log(cos(y)) - log(cos(x))").expect("static expr");
            let m = std::f64::consts::FRAC_PI_2 - 0.2;
            Ok(SurfaceSolution {
                phi: PhiField::Expr(phi),
                ambient: AmbientMetric::euclidean(),
                domain: Domain::rect(-m, m, -m, m),
                residual_bound: 1e-12,
            })
        }
        "helicoid" => {
            let phi = ScalarExpr::parse("atan(y / x)").expect("static expr");
            Ok(SurfaceSolution {
                phi: PhiField::Expr(phi),
                ambient: AmbientMetric::euclidean(),
                domain: Domain::rect(-1.2, 1.2, -0.6, 0.6).with_mask(Mask::MinAbsX(0.15)),
                residual_bound: 1e-12,
            })
        }
        "null_wave" => {
            let f = ScalarExpr::parse(profile.unwrap_or("x^3"))?;
            let u = ScalarExpr::parse("x + y").expect("static expr");
            let phi = f.substitute(&u, &build::c(0.0));
            Ok(SurfaceSolution {
                phi: PhiField::Expr(phi),
                ambient: AmbientMetric::split(),
                domain: Domain::rect(0.75, 1.75, 0.75, 1.75),
                residual_bound: 1e-11,
            })
        }
        other => Err(Error::UnknownSurface { name: other.into() }),
    }
}

/// Shape-operator curvature oracle for Euclidean ambient: det(II)/det(I)
/// with upward normal. Independent of the displayed K expression; used by
/// tests to pin the sign convention.
pub fn gaussian_curvature_oracle(phi: &Jet3) -> f64 {
    let (px, py) = (phi.d1[0], phi.d1[1]);
    let w = 1.0 + px * px + py * py;
    let det_ii = (phi.d2[0][0] * phi.d2[1][1] - phi.d2[0][1] * phi.d2[0][1]) / w;
    let det_i = w; // det h for g0 = I
    det_ii / det_i
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_6;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2 { x, y }
    }

    #[test]
    fn plane_is_exactly_minimal() {
        let s = catalog_surface("plane", &[1.0, 2.0], None).unwrap();
        let j = s.phi_jet(pt(0.37, -0.81)).unwrap();
        assert_eq!(minimal_residual(&j, &s.ambient), 0.0);
    }

    #[test]
    fn scherk_residual_cancels_exactly() {
        let s = catalog_surface("scherk", &[], None).unwrap();
        let j = s.phi_jet(pt(FRAC_PI_6, FRAC_PI_6)).unwrap();
        // sec^2 y sec^2 x - sec^2 x sec^2 y
        assert_abs_diff_eq!(minimal_residual(&j, &s.ambient), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn null_wave_cubic_profile_minimal_everywhere() {
        let s = catalog_surface("null_wave", &[], Some("x^3")).unwrap();
        for (x, y) in [(0.8, 0.9), (1.1, 1.6), (1.74, 0.76)] {
            let j = s.phi_jet(pt(x, y)).unwrap();
            let r = minimal_residual(&j, &s.ambient);
            let scale = minimal_residual_scale(&j, &s.ambient) * j.max_abs().max(1.0);
            assert!(r.abs() / scale < 1e-14, "residual {r} at ({x}, {y})");
        }
    }

    #[test]
    fn scherk_curvature_against_shape_oracle() {
        let s = catalog_surface("scherk", &[], None).unwrap();
        let p = pt(FRAC_PI_6, FRAC_PI_6);
        let j = s.phi_jet(p).unwrap();
        let c = surface_curvature(&j, &s.ambient).unwrap();
        assert_relative_eq!(c.rho, 5.0 / 3.0, max_relative = 1e-14);
        assert_abs_diff_eq!(c.h_mean, 0.0, epsilon = 1e-14);
        // displayed K is exactly twice the shape-operator curvature
        let k_oracle = gaussian_curvature_oracle(&j);
        assert_relative_eq!(c.k, 2.0 * k_oracle, max_relative = 1e-13);
        assert_relative_eq!(c.k, -32.0 / 25.0, max_relative = 1e-13);
        assert!(c.k.signum() == k_oracle.signum());
    }

    #[test]
    fn plane_curvature_is_zero() {
        let s = catalog_surface("plane", &[1.0, 2.0], None).unwrap();
        let j = s.phi_jet(pt(0.0, 0.0)).unwrap();
        let c = surface_curvature(&j, &s.ambient).unwrap();
        assert_eq!(c.k, 0.0);
        assert_eq!(c.h_mean, 0.0);
        assert_eq!(c.lambda0, 0.0);
        assert_eq!(c.r, [[0.0; 2]; 2]);
        assert_relative_eq!(c.rho, 6.0);
    }

    #[test]
    fn zero_graph_has_unit_rho() {
        let phi = Jet3::constant(0.0);
        let c = surface_curvature(&phi, &AmbientMetric::euclidean()).unwrap();
        assert_eq!(c.rho, 1.0);
        assert_eq!(c.k, 0.0);
        assert_eq!(c.h_mean, 0.0);
    }

    #[test]
    fn degenerate_rho_is_rejected() {
        // eps = -1, g0 = I, phi = x: rho = 1 - 1 = 0
        let ambient = AmbientMetric::new(1.0, 0.0, 1.0, -1).unwrap();
        let phi = ScalarExpr::parse("x").unwrap().jet_eval(pt(0.2, 0.1)).unwrap();
        assert!(matches!(
            surface_curvature(&phi, &ambient),
            Err(Error::DegeneratePoint { .. })
        ));
    }

    #[test]
    fn curvature_identities_hold_for_nonminimal_phi() {
        // r = (K/2) h and lambda0 = -(eps/2) rho^2 K are 2D identities
        let e = ScalarExpr::parse("x^2*y + 0.3*cos(x) - y^3").unwrap();
        let ambient = AmbientMetric::new(1.3, 0.2, 0.9, 1).unwrap();
        let p = pt(0.4, -0.7);
        let j = e.jet_eval(p).unwrap();
        let c = surface_curvature(&j, &ambient).unwrap();
        assert_relative_eq!(
            c.lambda0,
            -(ambient.eps() / 2.0) * c.rho * c.rho * c.k,
            max_relative = 1e-12
        );
        let dphi = j.d1;
        let h = mat2(|m, n| ambient.g0()[m][n] + ambient.eps() * dphi[m] * dphi[n]);
        for m in 0..2 {
            for n in 0..2 {
                assert_abs_diff_eq!(c.r[m][n], 0.5 * c.k * h[m][n], epsilon = 1e-12);
            }
        }
        // det h = det g0 rho
        assert_relative_eq!(det2(&h), ambient.det_g0() * c.rho, max_relative = 1e-13);
    }

    #[test]
    fn id1_vanishes_for_arbitrary_phi() {
        let e = ScalarExpr::parse("sin(x)*y^2 + exp(x/3) - x*y").unwrap();
        let ambient = AmbientMetric::new(0.8, -0.3, 1.7, -1).unwrap();
        let j = e.jet_eval(pt(0.9, 0.35)).unwrap();
        assert!(max_abs_id1(&id1_residual(&j, &ambient)) < 1e-13);
    }

    #[test]
    fn unknown_surface_errors() {
        assert!(matches!(
            catalog_surface("catenoid", &[], None),
            Err(Error::UnknownSurface { .. })
        ));
    }

    #[test]
    fn ambient_validation() {
        assert!(AmbientMetric::new(1.0, 1.0, 1.0, 1).is_err()); // det = 0
        assert!(AmbientMetric::new(1.0, 0.0, 1.0, 2).is_err());
    }
}
