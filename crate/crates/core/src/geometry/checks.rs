use rand_chacha::ChaCha8Rng;

use super::{HermitianChart, LocalMetric};
use crate::linalg::{self, Matrix, Vector};
use crate::report::{reduce_ordered_many, CheckReport, Residuals, Status, Witness};
use crate::sampling;
use crate::tolerance::Tolerances;

fn unit_random(rng: &mut ChaCha8Rng, local: &LocalMetric) -> Vector {
    let v = sampling::gaussian_vector(rng, local.dim());
    let n = local.norm(&v);
    v / n
}

fn error_residual(p: &Vector, err: &crate::Error) -> Residuals {
    let mut r = Residuals::new();
    r.record(f64::INFINITY, || Witness::new(p, &[], err.to_string()));
    r
}

/// J² = −Id and g(JX, JY) = g(X, Y) at every sample point, over the
/// orthonormal-frame pairs and `dirs` random unit pairs.
pub fn validate_almost_hermitian(
    hchart: &HermitianChart,
    points: &[Vector],
    dirs: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckReport {
    let [j2, compat] = reduce_ordered_many(points, |idx, p| {
        let local = match hchart.local(p, tol) {
            Ok(l) => l,
            Err(e) => return [error_residual(p, &e), Residuals::new()],
        };
        let m = local.dim();
        let mut j2 = Residuals::new();
        let defect = &local.j * &local.j + Matrix::identity(m, m);
        j2.record(linalg::max_abs(&defect), || Witness::new(p, &[], "max |J² + Id|"));

        let mut compat = Residuals::new();
        let g = &local.metric;
        let mut pairs: Vec<(Vector, Vector)> = Vec::new();
        let frame = g.orthonormal_frame();
        for a in &frame {
            for b in &frame {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let mut rng = sampling::stream(seed, "almost-hermitian", idx);
        for _ in 0..dirs {
            let x = unit_random(&mut rng, g);
            let y = unit_random(&mut rng, g);
            pairs.push((x, y));
        }
        for (x, y) in &pairs {
            let r = g.inner(&(&local.j * x), &(&local.j * y)) - g.inner(x, y);
            compat.record(r, || Witness::new(p, &[x, y], "g(JX,JY) − g(X,Y)"));
        }
        [j2, compat]
    });
    let ok = j2.below(tol.alg) && compat.below(tol.alg);
    CheckReport::from_families(
        "almost_hermitian",
        Status::from_bool(ok),
        &[("j_squared", &j2), ("compatibility", &compat)],
    )
}

/// ‖(∇_X J)Y‖_g over orthonormal-frame pairs and random unit pairs.
pub fn kaehler_check(
    hchart: &HermitianChart,
    points: &[Vector],
    dirs: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckReport {
    let [res] = reduce_ordered_many(points, |idx, p| {
        let local = match hchart.local(p, tol) {
            Ok(l) => l,
            Err(e) => return [error_residual(p, &e)],
        };
        let g = &local.metric;
        let mut r = Residuals::new();
        let frame = g.orthonormal_frame();
        let mut rng = sampling::stream(seed, "kaehler", idx);
        let mut pairs: Vec<(Vector, Vector)> = Vec::new();
        for a in &frame {
            for b in &frame {
                pairs.push((a.clone(), b.clone()));
            }
        }
        for _ in 0..dirs {
            pairs.push((unit_random(&mut rng, g), unit_random(&mut rng, g)));
        }
        for (x, y) in &pairs {
            let d = local.nabla_j(x, y);
            r.record(g.norm(&d), || Witness::new(p, &[x, y], "‖(∇_X J)Y‖"));
        }
        [r]
    });
    let ok = res.below(tol.alg);
    CheckReport::from_families("kaehler", Status::from_bool(ok), &[("nabla_j", &res)])
}
