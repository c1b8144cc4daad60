//! Second fundamental form, tension field and the totally-geodesic
//! conditions for slant submersions.
//!
//! For point vectors `X, Y` at `p`,
//! `(∇F_*)(X, Y) = (∂_X dF)Y + Γ₂(F(p))[dF X, dF Y] − dF Γ₁(p)[X, Y]`,
//! which is the pullback-connection formula with the derivative terms of
//! `Y` cancelled. It is therefore tensorial and symmetric by construction.

mod checks;

pub use checks::{
    cor31_check, harmonicity_check, lemma31_check, second_fundamental_form_check, tension_routes_check,
    thm33_check, thm34_check, thm35_check, Hypotheses,
};

use crate::linalg::Vector;
use crate::submersion::{Extension, Factor, LocalSubmersion};

/// `(∇F_*)(X, Y)` at the point of `l`, a vector at `F(p)`.
pub fn second_fundamental_form(l: &LocalSubmersion, x: &Vector, y: &Vector) -> Vector {
    let mut d = Vector::zeros(l.jac.nrows());
    for (i, dj) in l.djac.iter().enumerate() {
        if x[i] != 0.0 {
            d += dj * y * x[i];
        }
    }
    let fx = l.pushforward(x);
    let fy = l.pushforward(y);
    d + l.base.christoffels.contract(&fx, &fy) - l.pushforward(&l.metric().christoffels.contract(x, y))
}

/// Tension field by two routes.
#[derive(Debug, Clone)]
pub struct TensionValue {
    pub point: Vector,
    /// Trace of `∇F_*` over a g₁-orthonormal frame.
    pub route1: Vector,
    /// `−Σ F_*(T_{ẽᵢ}ẽᵢ)` over the vertical orthonormal basis.
    pub route2: Vector,
    /// `‖route1 − route2‖_{g₂}`.
    pub discrepancy: f64,
    /// `‖(∇F_*)(Zᵢ, Zᵢ)‖_{g₂}` over the horizontal basis.
    pub horizontal_terms: Vec<f64>,
}

impl TensionValue {
    pub fn norm(&self, l: &LocalSubmersion) -> f64 {
        l.base_norm(&self.route1)
    }
}

pub fn tension_field(l: &LocalSubmersion) -> TensionValue {
    let n = l.jac.nrows();
    let mut route1 = Vector::zeros(n);
    for e in l.metric().orthonormal_frame() {
        route1 += second_fundamental_form(l, &e, &e);
    }
    let mut route2 = Vector::zeros(n);
    for v in l.vertical_basis() {
        route2 -= l.pushforward(&l.oneill_t(v, v));
    }
    let horizontal_terms =
        l.horizontal_basis().iter().map(|z| l.base_norm(&second_fundamental_form(l, z, z))).collect();
    let discrepancy = l.base_norm(&(&route1 - &route2));
    TensionValue { point: l.point().clone(), route1, route2, discrepancy, horizontal_terms }
}

/// Residuals of the displayed theorem conditions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicResiduals {
    pub thm33: f64,
    pub thm34: f64,
    pub thm35_a: f64,
    pub thm35_b: f64,
}

const OMEGA_PHI: [Factor; 5] =
    [Factor::Horizontal, Factor::Complex, Factor::Vertical, Factor::Complex, Factor::Vertical];
const OMEGA: [Factor; 3] = [Factor::Horizontal, Factor::Complex, Factor::Vertical];
const C: [Factor; 3] = [Factor::Horizontal, Factor::Complex, Factor::Horizontal];

fn h_nabla(l: &LocalSubmersion, factors: &[Factor], seed: &Vector, dir: &Vector) -> Vector {
    let field = l.compose(factors, &l.seed(seed, Extension::Projector));
    l.horizontal_part(&l.nabla(&field, dir))
}

/// `|g(H∇_X ωφY, Z) − g(H∇_X ωY, CZ) − g(T_X ωY, BZ)|` for vertical X, Y
/// and horizontal Z.
pub fn thm33_residual(l: &LocalSubmersion, x: &Vector, y: &Vector, z: &Vector) -> f64 {
    let lhs = l.inner(&h_nabla(l, &OMEGA_PHI, y, x), z);
    let r1 = l.inner(&h_nabla(l, &OMEGA, y, x), &l.c(z));
    let r2 = l.inner(&l.oneill_t(x, &l.omega(y)), &l.b(z));
    (lhs - r1 - r2).abs()
}

fn a_b_plus_h_nabla_c(l: &LocalSubmersion, z1: &Vector, z2: &Vector) -> Vector {
    l.oneill_a(z1, &l.b(z2)) + h_nabla(l, &C, z2, z1)
}

/// `|g(H∇_{Z₁}Z₂, ωφX) − g(A_{Z₁}BZ₂ + H∇_{Z₁}CZ₂, ωX)|` for vertical X
/// and horizontal Z₁, Z₂.
pub fn thm34_residual(l: &LocalSubmersion, x: &Vector, z1: &Vector, z2: &Vector) -> f64 {
    let hz2 = [Factor::Horizontal];
    let lhs = l.inner(&h_nabla(l, &hz2, z2, z1), &l.omega(&l.phi(x)));
    let rhs = l.inner(&a_b_plus_h_nabla_c(l, z1, z2), &l.omega(x));
    (lhs - rhs).abs()
}

/// The two conditions of the totally-geodesic characterization, evaluated
/// literally with projector extensions.
pub fn thm35_residuals(l: &LocalSubmersion, x: &Vector, y: &Vector, z1: &Vector, z2: &Vector) -> (f64, f64) {
    let a = thm33_residual(l, x, y, z1);
    let lhs = l.inner(&a_b_plus_h_nabla_c(l, z1, z2), &l.omega(x));
    let rhs = l.inner(&h_nabla(l, &OMEGA_PHI, x, z1), z2);
    (a, (lhs + rhs).abs())
}

pub fn geodesic_residuals(
    l: &LocalSubmersion,
    x: &Vector,
    y: &Vector,
    z1: &Vector,
    z2: &Vector,
) -> GeodesicResiduals {
    let (thm35_a, thm35_b) = thm35_residuals(l, x, y, z1, z2);
    GeodesicResiduals { thm33: thm35_a, thm34: thm34_residual(l, x, z1, z2), thm35_a, thm35_b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_vector;
    use crate::submersion::SubmersionInstance;

    fn flat(components: &[&str]) -> SubmersionInstance {
        use crate::expr::ScalarField;
        use crate::geometry::{Chart, HermitianChart};
        use crate::sampling::Region;
        let c: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
        let b = Default::default();
        SubmersionInstance::new(
            "t",
            HermitianChart::standard_flat(c.clone()).unwrap(),
            Chart::euclidean(vec!["y1".into(), "y2".into()]),
            components.iter().map(|t| ScalarField::parse(t, &c, &b).unwrap()).collect(),
            Region::cube(4, -1.0, 1.0),
            1,
            Default::default(),
        )
        .unwrap()
    }

    fn curved() -> SubmersionInstance {
        crate::submersion::test_support::curved_instance()
    }

    fn e(i: usize) -> Vector {
        basis_vector(4, i)
    }

    #[test]
    fn sff_of_linear_flat_map_vanishes() {
        let l = flat(&["(x1 - x4)/sqrt(2)", "x2"]).local(&Vector::from_vec(vec![0.3, 0.1, 0.2, 0.0])).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(second_fundamental_form(&l, &e(i), &e(j)).norm(), 0.0);
            }
        }
    }

    #[test]
    fn polar_sff_on_fibre() {
        // oracle: F¹ = r has Hessian (δ − r̂r̂ᵀ)/r, so (∇F_*)(θ̂, θ̂) = (1/r, 0)
        let inst = crate::submersion::test_support::polar_instance();
        let p = Vector::from_vec(vec![0.6, 0.8, 0.0, 0.0]);
        let l = inst.local(&p).unwrap();
        let theta_hat = Vector::from_vec(vec![-0.8, 0.6, 0.0, 0.0]);
        let s = second_fundamental_form(&l, &theta_hat, &theta_hat);
        assert!((s - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);
        let t = tension_field(&l);
        assert!((&t.route1 - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);
        assert!(t.discrepancy < 1e-14);
        assert!(t.horizontal_terms.iter().all(|h| *h < 1e-14));
    }

    #[test]
    fn curved_tension_at_origin() {
        // τ = 2e^{−2x1} ∂y1 from Γ¹₃₃ = Γ¹₄₄ = −1 and the frame e^{−x1}∂ᵢ
        let l = curved().local(&Vector::zeros(4)).unwrap();
        let t = tension_field(&l);
        assert!((&t.route2 - Vector::from_vec(vec![2.0, 0.0])).norm() < 1e-14);
        assert!(t.discrepancy < 1e-12, "{t:?}");
        let p = Vector::from_vec(vec![0.4, 0.0, 0.1, 0.0]);
        let t = tension_field(&curved().local(&p).unwrap());
        assert!((t.route1[0] - 2.0 * (-0.8f64).exp()).abs() < 1e-13);
        // (∇F_*)(∂3, ∂3) = −F_*(∇_{∂3}∂3) = (1, 0) at 0
        let s = second_fundamental_form(&l, &e(2), &e(2));
        assert!((s - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn residuals_vanish_on_linear_examples() {
        for comps in [&["x1", "x2"][..], &["x1", "x3"], &["(x1 - x4)/sqrt(2)", "x2"], &["x1*0.6 - x3*0.8", "x4"]] {
            let l = flat(comps).local(&Vector::from_vec(vec![0.2, -0.1, 0.4, 0.3])).unwrap();
            let (v, h) = (l.vertical_basis().to_vec(), l.horizontal_basis().to_vec());
            for x in &v {
                for y in &v {
                    for z1 in &h {
                        for z2 in &h {
                            let r = geodesic_residuals(&l, x, y, z1, z2);
                            assert!(r.thm33 < 1e-15 && r.thm34 < 1e-15 && r.thm35_b < 1e-15, "{comps:?} {r:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn polar_thm33_detects_curved_fibres() {
        // anti-invariant: the residual equals |g(T_X Y, Z)|
        let inst = crate::submersion::test_support::polar_instance();
        let l = inst.local(&Vector::from_vec(vec![0.6, 0.8, 0.0, 0.0])).unwrap();
        let theta_hat = Vector::from_vec(vec![-0.8, 0.6, 0.0, 0.0]);
        let r_hat = Vector::from_vec(vec![0.6, 0.8, 0.0, 0.0]);
        let r = thm33_residual(&l, &theta_hat, &theta_hat, &r_hat);
        let direct = l.inner(&l.oneill_t(&theta_hat, &theta_hat), &r_hat).abs();
        assert!((direct - 1.0).abs() < 1e-14);
        assert!((r - direct).abs() < 1e-12);
    }
}
