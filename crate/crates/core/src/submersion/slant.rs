use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{LocalSubmersion, Samples};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::report::{reduce_ordered_many, CheckReport, Residuals, Status, Witness};
use crate::sampling;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlantClass {
    /// θ ≡ 0: invariant fibres.
    Hermitian,
    /// θ ≡ π/2.
    AntiInvariant,
    /// Constant θ strictly between the two.
    ProperSlant(f64),
    NotSlant,
}

impl SlantClass {
    pub fn is_slant(self) -> bool {
        !matches!(self, SlantClass::NotSlant)
    }

    pub fn is_proper(self) -> bool {
        matches!(self, SlantClass::ProperSlant(_))
    }

    pub fn label(self) -> String {
        match self {
            SlantClass::Hermitian => "Hermitian".into(),
            SlantClass::AntiInvariant => "AntiInvariant".into(),
            SlantClass::ProperSlant(t) => format!("ProperSlant({t:.6})"),
            SlantClass::NotSlant => "NotSlant".into(),
        }
    }
}

/// Sampled slant angles and their classification.
#[derive(Debug, Clone)]
pub struct SlantReport {
    /// Angles in (point, direction) order.
    pub angles: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// max |θ − θ̄|.
    pub max_deviation: f64,
    pub classification: SlantClass,
    deviation: Residuals,
}

impl SlantReport {
    /// Constancy is `max − min < angle_tol`; the class then follows from θ̄.
    fn classify(mean: f64, min: f64, max: f64, tol: &Tolerances) -> SlantClass {
        if !(max - min < tol.angle) {
            SlantClass::NotSlant
        } else if mean < tol.angle {
            SlantClass::Hermitian
        } else if (mean - FRAC_PI_2).abs() < tol.angle {
            SlantClass::AntiInvariant
        } else {
            SlantClass::ProperSlant(mean)
        }
    }

    /// Mean angle when the instance is slant.
    pub fn theta(&self) -> Option<f64> {
        self.classification.is_slant().then_some(self.mean)
    }

    pub fn to_check(&self) -> CheckReport {
        let mut r = CheckReport::from_families(
            "slant",
            Status::from_bool(self.classification.is_slant()),
            &[("deviation", &self.deviation)],
        )
        .with_value("theta_mean", self.mean)
        .with_value("theta_min", self.min)
        .with_value("theta_max", self.max)
        .with_value("spread", self.max - self.min);
        r.values.remove("deviation_max");
        r.values.insert("max_deviation".into(), self.max_deviation);
        r.classification = Some(self.classification.label());
        r
    }
}

/// θ for `dirs` random unit vertical vectors at every sample point.
pub fn slant_scan(samples: &Samples) -> SlantReport {
    use rayon::prelude::*;
    let per_point: Vec<Vec<(f64, Witness)>> = samples
        .locals
        .par_iter()
        .enumerate()
        .map(|(idx, l)| {
            let mut rng = sampling::stream(samples.seed, "slant", idx);
            (0..samples.dirs)
                .map(|_| {
                    let x = l.random_vertical(&mut rng);
                    let theta = l.slant_angle(&x).unwrap_or(f64::NAN);
                    (theta, Witness::new(l.point(), &[&x], "θ(X)"))
                })
                .collect()
        })
        .collect();
    let angles: Vec<f64> = per_point.iter().flatten().map(|(t, _)| *t).collect();
    let n = angles.len().max(1) as f64;
    let mean = angles.iter().sum::<f64>() / n;
    let fold = |init: f64, f: fn(f64, f64) -> f64| angles.iter().fold(init, |a, &b| if b.is_nan() { b } else { f(a, b) });
    let min = fold(f64::INFINITY, f64::min);
    let max = fold(f64::NEG_INFINITY, f64::max);
    let mut deviation = Residuals::new();
    for (t, w) in per_point.into_iter().flatten() {
        deviation.record(t - mean, || w);
    }
    let (mean, min, max) = if angles.is_empty() { (0.0, 0.0, 0.0) } else { (mean, min, max) };
    let classification = if angles.iter().any(|t| t.is_nan()) {
        SlantClass::NotSlant
    } else {
        SlantReport::classify(mean, min, max, &samples.tol)
    };
    SlantReport { angles, mean, min, max, max_deviation: deviation.max(), classification, deviation }
}

/// φ² = −cos²θ·Id on the vertical space. Reports the mean, min and max
/// eigenvalue of φ² over all points.
pub fn phi_squared_check(samples: &Samples, theta: f64) -> CheckReport {
    use rayon::prelude::*;
    let c2 = theta.cos().powi(2);
    let parts: Vec<(Residuals, Vec<f64>)> = samples
        .locals
        .par_iter()
        .map(|l| {
            let phi = l.phi_matrix();
            let k = phi.nrows();
            let phi2 = &phi * &phi;
            let mut r = Residuals::new();
            r.record(linalg::max_abs(&(&phi2 + Matrix::identity(k, k) * c2)), || {
                Witness::new(l.point(), &[], "max |φ² + cos²θ·Id|")
            });
            let sym = (&phi2 + phi2.transpose()) * 0.5;
            (r, linalg::symmetric_eigenvalues(&sym))
        })
        .collect();
    let mut res = Residuals::new();
    let mut eigs = Vec::new();
    for (r, e) in parts {
        res.merge(r);
        eigs.extend(e);
    }
    let lambda = eigs.iter().sum::<f64>() / eigs.len().max(1) as f64;
    let lo = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CheckReport::from_families("phi_squared", Status::from_bool(res.below(samples.tol.alg)), &[("phi_squared", &res)])
        .with_value("lambda", lambda)
        .with_value("lambda_min", lo)
        .with_value("lambda_max", hi)
        .with_value("expected_lambda", -c2)
}

fn vertical_pairs(l: &LocalSubmersion, rng: &mut rand_chacha::ChaCha8Rng, dirs: usize) -> Vec<(Vector, Vector)> {
    let basis = l.vertical_basis();
    let mut pairs: Vec<(Vector, Vector)> =
        basis.iter().flat_map(|a| basis.iter().map(move |b| (a.clone(), b.clone()))).collect();
    for _ in 0..dirs {
        pairs.push((l.random_vertical(rng), l.random_vertical(rng)));
    }
    pairs
}

/// g₁(φX, φY) = cos²θ g₁(X, Y) and g₁(ωX, ωY) = sin²θ g₁(X, Y).
pub fn metric_relation_check(samples: &Samples, theta: f64) -> CheckReport {
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let [phi, omega] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "metric-relation", idx);
        let mut phi = Residuals::new();
        let mut omega = Residuals::new();
        for (x, y) in vertical_pairs(l, &mut rng, samples.dirs) {
            let g = l.inner(&x, &y);
            phi.record(l.inner(&l.phi(&x), &l.phi(&y)) - c2 * g, || {
                Witness::new(l.point(), &[&x, &y], "g(φX,φY) − cos²θ g(X,Y)")
            });
            omega.record(l.inner(&l.omega(&x), &l.omega(&y)) - s2 * g, || {
                Witness::new(l.point(), &[&x, &y], "g(ωX,ωY) − sin²θ g(X,Y)")
            });
        }
        [phi, omega]
    });
    let ok = phi.below(samples.tol.alg) && omega.below(samples.tol.alg);
    CheckReport::from_families("metric_relations", Status::from_bool(ok), &[("phi", &phi), ("omega", &omega)])
}

/// Vertical frame `{e₁, secθ·φe₁, e₂, secθ·φe₂, …}` and the horizontal
/// frame `{cscθ·ωv}` over the vertical frame vectors `v`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub vertical: Vec<Vector>,
    pub omega: Vec<Vector>,
}

impl LocalSubmersion {
    /// Greedy construction from the splitting basis. Requires proper slant
    /// and even vertical dimension.
    pub fn adapted_frame(&self, theta: f64) -> Result<AdaptedFrame> {
        let tol = self.tol();
        if theta < tol.angle_guard || (FRAC_PI_2 - theta).abs() < tol.angle_guard {
            return Err(Error::DegenerateAngle(theta));
        }
        let basis = self.vertical_basis();
        let k = basis.len();
        if k % 2 == 1 {
            return Err(Error::InstanceInconsistent(format!(
                "proper slant requires even vertical dimension, found {k}"
            )));
        }
        let sec = 1.0 / theta.cos();
        let mut frame: Vec<Vector> = Vec::with_capacity(k);
        for b in basis {
            if frame.len() == k {
                break;
            }
            let mut e = b.clone();
            for f in &frame {
                e -= f * self.inner(f, &e);
            }
            let n = self.norm(&e);
            if n < 1e-6 {
                continue;
            }
            let e = e / n;
            let partner = self.phi(&e) * sec;
            frame.push(e);
            frame.push(partner);
        }
        if frame.len() != k {
            return Err(Error::InstanceInconsistent(format!(
                "adapted frame spans {} of {k} vertical directions",
                frame.len()
            )));
        }
        let csc = 1.0 / theta.sin();
        let omega = frame.iter().map(|v| self.omega(v) * csc).collect();
        Ok(AdaptedFrame { vertical: frame, omega })
    }
}

/// Gram matrices of both adapted frames against the identity.
pub fn adapted_frame_check(samples: &Samples, theta: f64) -> CheckReport {
    let [vert, omega] = reduce_ordered_many(&samples.locals, |_, l| {
        let mut vert = Residuals::new();
        let mut omega = Residuals::new();
        match l.adapted_frame(theta) {
            Ok(f) => {
                let g = &l.metric().g;
                let k = f.vertical.len();
                let id = Matrix::identity(k, k);
                vert.record(linalg::max_abs(&(linalg::gram(g, &f.vertical) - &id)), || {
                    Witness::new(l.point(), &[], "vertical Gram − Id")
                });
                omega.record(linalg::max_abs(&(linalg::gram(g, &f.omega) - &id)), || {
                    Witness::new(l.point(), &[], "ω-frame Gram − Id")
                });
            }
            Err(e) => vert.record(f64::INFINITY, || Witness::new(l.point(), &[], e.to_string())),
        }
        [vert, omega]
    });
    let ok = vert.below(samples.tol.alg) && omega.below(samples.tol.alg);
    CheckReport::from_families("adapted_frame", Status::from_bool(ok), &[("vertical_gram", &vert), ("omega_gram", &omega)])
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::sampling::halton_points;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn samples(inst: &super::super::SubmersionInstance) -> Samples {
        inst.sample(&halton_points(&inst.region, 30, 1), 8, 1).unwrap()
    }

    fn slant_alpha(alpha: f64) -> super::super::SubmersionInstance {
        flat_instance(&["x1*sin(alpha) - x3*cos(alpha)", "x4"], &[("alpha", alpha)])
    }

    #[test]
    fn scan_classifies_examples() {
        let s = slant_scan(&samples(&slant_alpha(FRAC_PI_3)));
        assert!(matches!(s.classification, SlantClass::ProperSlant(_)));
        assert!((s.mean - FRAC_PI_3).abs() < 1e-12);
        assert!(s.max_deviation < 1e-12);
        assert_eq!(s.angles.len(), 240);

        let s = slant_scan(&samples(&flat_instance(&["x1", "x3"], &[])));
        assert_eq!(s.classification, SlantClass::AntiInvariant);
        let s = slant_scan(&samples(&flat_instance(&["x1", "x2"], &[])));
        assert_eq!(s.classification, SlantClass::Hermitian);
        // oracle: kernel {∂2, ∂3} is mapped by J into span{∂1, ∂4}
        let s = slant_scan(&samples(&flat_instance(&["x1", "x4"], &[])));
        assert_eq!(s.classification, SlantClass::AntiInvariant);
    }

    #[test]
    fn scan_detects_non_slant() {
        // F = (x1, x2 + x3²/2): kernel {∂4, x3∂2 − ∂3}, so cos θ = (1 + x3²)^(-1/2)
        let s = slant_scan(&samples(&flat_instance(&["x1", "x2 + x3^2/2"], &[])));
        assert_eq!(s.classification, SlantClass::NotSlant);
        assert_eq!(s.to_check().status, Status::Fail);
    }

    #[test]
    fn slant_angle_scale_invariant() {
        let l = slant_alpha(0.3).local(&v(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let x = l.vertical_basis()[0].clone() + &l.vertical_basis()[1] * 0.4;
        let t = l.slant_angle(&x).unwrap();
        for c in [-3.0, 1e-3, 7.5] {
            assert!((l.slant_angle(&(&x * c)).unwrap() - t).abs() < 1e-15);
        }
        // ‖φX‖/‖JX‖ stays within the clamp margin
        let ratio = l.norm(&l.phi(&x)) / l.norm(&(l.j() * &x));
        assert!(ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn phi_squared_values() {
        let r = phi_squared_check(&samples(&flat_instance(&["(x1 - x4)/sqrt(2)", "x2"], &[])), FRAC_PI_4);
        assert_eq!(r.status, Status::Pass);
        assert!((r.value("lambda").unwrap() + 0.5).abs() < 1e-12);
        let r = phi_squared_check(&samples(&flat_instance(&["x1", "x2"], &[])), 0.0);
        assert!((r.value("lambda").unwrap() + 1.0).abs() < 1e-12);
        let r = phi_squared_check(&samples(&slant_alpha(FRAC_PI_3)), FRAC_PI_3);
        assert!((r.value("lambda").unwrap() + 0.25).abs() < 1e-12);
    }

    #[test]
    fn metric_relations_hold() {
        let inst = slant_alpha(FRAC_PI_3);
        let r = metric_relation_check(&samples(&inst), FRAC_PI_3);
        assert_eq!(r.status, Status::Pass);
        let l = inst.local(&v(&[0.0; 4])).unwrap();
        let x = &l.vertical_basis()[0];
        assert!((l.inner(&l.phi(x), &l.phi(x)) - 0.25).abs() < 1e-15);
        assert!((l.inner(&l.omega(x), &l.omega(x)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn adapted_frames() {
        let l = flat_instance(&["(x1 - x4)/sqrt(2)", "x2"], &[]).local(&v(&[0.0; 4])).unwrap();
        let f = l.adapted_frame(FRAC_PI_4).unwrap();
        assert_eq!(f.vertical.len(), 2);
        let g = linalg::gram(&l.metric().g, &f.vertical);
        assert!((g - Matrix::identity(2, 2)).abs().max() < 1e-12);
        let l1 = flat_instance(&["x1", "x2"], &[]).local(&v(&[0.0; 4])).unwrap();
        assert!(matches!(l1.adapted_frame(0.0), Err(Error::DegenerateAngle(_))));
        let r = adapted_frame_check(&samples(&slant_alpha(FRAC_PI_3)), FRAC_PI_3);
        assert_eq!(r.status, Status::Pass);
        assert!(r.max_residual() < 1e-12);
    }

    #[test]
    fn odd_vertical_dimension_is_inconsistent() {
        // R⁴ → R³: one-dimensional fibres cannot be properly slant
        use crate::geometry::{Chart, HermitianChart};
        use crate::sampling::Region;
        let c = coords(4, "x");
        let inst = super::super::SubmersionInstance::new(
            "odd",
            HermitianChart::standard_flat(c.clone()).unwrap(),
            Chart::euclidean(coords(3, "y")),
            fields(&["x1", "x2", "x3"], &c, &Default::default()),
            Region::cube(4, -1.0, 1.0),
            0,
            Tolerances::default(),
        )
        .unwrap();
        let l = inst.local(&v(&[0.0; 4])).unwrap();
        assert!(matches!(l.adapted_frame(0.5), Err(Error::InstanceInconsistent(_))));
    }
}
