//! Pointwise identity checks on the splitting, the O'Neill tensors and the
//! φ/ω operators.

use rand_chacha::ChaCha8Rng;

use super::{Extension, LocalSubmersion, Samples, SubmersionInstance};
use crate::geometry::bracket;
use crate::linalg::{self, Matrix, Vector};
use crate::report::{reduce_ordered_many, CheckReport, Residuals, Status, Witness};
use crate::sampling;

fn pairs(basis: &[Vector]) -> Vec<(Vector, Vector)> {
    basis.iter().flat_map(|a| basis.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

fn with_random(
    mut base: Vec<(Vector, Vector)>,
    dirs: usize,
    rng: &mut ChaCha8Rng,
    draw: impl Fn(&mut ChaCha8Rng) -> (Vector, Vector),
) -> Vec<(Vector, Vector)> {
    for _ in 0..dirs {
        base.push(draw(rng));
    }
    base
}

fn vertical_pairs(l: &LocalSubmersion, dirs: usize, rng: &mut ChaCha8Rng) -> Vec<(Vector, Vector)> {
    with_random(pairs(l.vertical_basis()), dirs, rng, |r| (l.random_vertical(r), l.random_vertical(r)))
}

fn horizontal_pairs(l: &LocalSubmersion, dirs: usize, rng: &mut ChaCha8Rng) -> Vec<(Vector, Vector)> {
    with_random(pairs(l.horizontal_basis()), dirs, rng, |r| (l.random_horizontal(r), l.random_horizontal(r)))
}

/// S1: whitened singular-value ratio `σ_min/σ_max > rank_tol` at every
/// point. S2: `‖F_*X‖₂ = ‖X‖₁` for horizontal basis and random horizontal X.
pub fn check_submersion_axioms(inst: &SubmersionInstance, points: &[Vector], dirs: usize, seed: u64) -> CheckReport {
    use rayon::prelude::*;
    let tol = inst.tol;
    let parts: Vec<(f64, Witness, Residuals)> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let ratio = match inst.singular_values(p) {
                Ok(s) => {
                    let hi = s.first().copied().unwrap_or(0.0);
                    let lo = s.last().copied().unwrap_or(0.0);
                    if hi > 0.0 { lo / hi } else { 0.0 }
                }
                Err(_) => 0.0,
            };
            let mut s2 = Residuals::new();
            if let Ok(l) = inst.local(p) {
                let mut rng = sampling::stream(seed, "axioms", idx);
                let mut xs: Vec<Vector> = l.horizontal_basis().to_vec();
                xs.extend((0..dirs).map(|_| l.random_horizontal(&mut rng)));
                for x in &xs {
                    let r = l.base_norm(&l.pushforward(x)) - l.norm(x);
                    s2.record(r, || Witness::new(p, &[x], "‖F_*X‖₂ − ‖X‖₁"));
                }
            }
            (ratio, Witness::new(p, &[], "σ_min/σ_max"), s2)
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut ratio_witness = None;
    let mut s2 = Residuals::new();
    for (ratio, w, r) in parts {
        if ratio_witness.is_none() || ratio < min_ratio {
            min_ratio = ratio;
            ratio_witness = Some(w);
        }
        s2.merge(r);
    }
    let s1_ok = min_ratio > tol.rank;
    let s2_ok = s1_ok && s2.below(tol.alg);
    let mut r = CheckReport::from_families("submersion_axioms", Status::from_bool(s1_ok && s2_ok), &[("s2", &s2)])
        .with_value("s1_min_ratio", min_ratio);
    if !s1_ok {
        r.witness = ratio_witness;
        r = r.with_message(format!("S1 fails: dF has σ_min/σ_max = {min_ratio:.3e}"));
    } else if !s2_ok {
        r = r.with_message("S2 fails: F_* does not preserve horizontal lengths");
    }
    r
}

/// Projector algebra and splitting bases.
pub fn projector_check(samples: &Samples) -> CheckReport {
    let [algebra, orth, kernel, basis] = reduce_ordered_many(&samples.locals, |_, l| {
        let p = l.point();
        let m = l.dim();
        let (pv, ph) = (l.p_v(), l.p_h());
        let mut algebra = Residuals::new();
        let defect = linalg::max_abs(&(pv * pv - pv))
            .max(linalg::max_abs(&(pv * ph)))
            .max(linalg::max_abs(&(pv + ph - Matrix::identity(m, m))));
        algebra.record(defect, || Witness::new(p, &[], "P_V² − P_V, P_V P_H, P_V + P_H − Id"));
        let mut orth = Residuals::new();
        for (x, y) in pairs(&l.metric().orthonormal_frame()) {
            let r = l.inner(&(pv * &x), &(ph * &y));
            orth.record(r, || Witness::new(p, &[&x, &y], "g(P_V X, P_H Y)"));
        }
        let mut kernel = Residuals::new();
        for v in l.vertical_basis() {
            kernel.record(l.pushforward(v).amax(), || Witness::new(p, &[v], "dF·v"));
        }
        let mut basis = Residuals::new();
        let mut all: Vec<Vector> = l.vertical_basis().to_vec();
        all.extend(l.horizontal_basis().iter().cloned());
        let gram = linalg::gram(&l.metric().g, &all);
        basis.record(linalg::max_abs(&(gram - Matrix::identity(m, m))), || {
            Witness::new(p, &[], "splitting Gram − Id")
        });
        [algebra, orth, kernel, basis]
    });
    let tol = &samples.tol;
    let ok = algebra.below(tol.projector) && orth.below(tol.projector) && kernel.below(tol.alg) && basis.below(tol.alg);
    CheckReport::from_families(
        "projectors",
        Status::from_bool(ok),
        &[("algebra", &algebra), ("orthogonality", &orth), ("kernel", &kernel), ("orthonormality", &basis)],
    )
}

/// `T_U W = T_W U` for vertical U, W.
pub fn oneill_symmetry_check(samples: &Samples) -> CheckReport {
    let [res] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "t-symmetry", idx);
        let mut r = Residuals::new();
        for (u, w) in vertical_pairs(l, samples.dirs, &mut rng) {
            let d = l.oneill_t(&u, &w) - l.oneill_t(&w, &u);
            r.record(l.norm(&d), || Witness::new(l.point(), &[&u, &w], "T_U W − T_W U"));
        }
        [r]
    });
    CheckReport::from_families("oneill_symmetry", Status::from_bool(res.below(samples.tol.diff)), &[("t_symmetry", &res)])
}

/// `A_X Y = −A_Y X = ½V[X, Y]` for horizontal X, Y with horizontal
/// projector extensions.
pub fn oneill_alternation_check(samples: &Samples) -> CheckReport {
    let [alt, half] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "a-alternation", idx);
        let mut alt = Residuals::new();
        let mut half = Residuals::new();
        for (x, y) in horizontal_pairs(l, samples.dirs, &mut rng) {
            let axy = l.oneill_a(&x, &y);
            let d = &axy + l.oneill_a(&y, &x);
            alt.record(l.norm(&d), || Witness::new(l.point(), &[&x, &y], "A_X Y + A_Y X"));
            let xf = l.horizontal_field(&x, Extension::Projector);
            let yf = l.horizontal_field(&y, Extension::Projector);
            let b = l.vertical_part(&bracket(&xf, &yf)) * 0.5;
            half.record(l.norm(&(axy - b)), || Witness::new(l.point(), &[&x, &y], "A_X Y − ½V[X,Y]"));
        }
        [alt, half]
    });
    let ok = alt.below(samples.tol.diff) && half.below(samples.tol.diff);
    CheckReport::from_families("oneill_alternation", Status::from_bool(ok), &[("alternation", &alt), ("half_bracket", &half)])
}

/// Reconstruction of `∇` from its T, A, ∇̂ and H parts for every
/// combination of vertical and horizontal arguments.
pub fn connection_decomposition_check(samples: &Samples) -> CheckReport {
    let fams = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "decomposition", idx);
        let mut out: [Residuals; 4] = std::array::from_fn(|_| Residuals::new());
        for _ in 0..samples.dirs.max(1) {
            let u = l.random_vertical(&mut rng);
            let w = l.random_vertical(&mut rng);
            let x = l.random_horizontal(&mut rng);
            let y = l.random_horizontal(&mut rng);
            let vf = |a: &Vector| l.vertical_field(a, Extension::Projector);
            let hf = |a: &Vector| l.horizontal_field(a, Extension::Projector);
            let p = l.point();
            // ∇_U W = T_U W + ∇̂_U W
            let n = l.nabla(&vf(&w), &u);
            let d = &n - l.oneill_t(&u, &w) - l.nabla_hat(&u, &w, Extension::Projector);
            out[0].record(l.norm(&d), || Witness::new(p, &[&u, &w], "∇_U W − T_U W − ∇̂_U W"));
            // ∇_U X = H∇_U X + T_U X
            let n = l.nabla(&hf(&x), &u);
            let d = &n - l.horizontal_part(&n) - l.oneill_t(&u, &x);
            out[1].record(l.norm(&d), || Witness::new(p, &[&u, &x], "∇_U X − H∇_U X − T_U X"));
            // ∇_X U = A_X U + V∇_X U
            let n = l.nabla(&vf(&u), &x);
            let d = &n - l.oneill_a(&x, &u) - l.vertical_part(&n);
            out[2].record(l.norm(&d), || Witness::new(p, &[&x, &u], "∇_X U − A_X U − V∇_X U"));
            // ∇_X Y = H∇_X Y + A_X Y
            let n = l.nabla(&hf(&y), &x);
            let d = &n - l.horizontal_part(&n) - l.oneill_a(&x, &y);
            out[3].record(l.norm(&d), || Witness::new(p, &[&x, &y], "∇_X Y − H∇_X Y − A_X Y"));
        }
        out
    });
    let ok = fams.iter().all(|f| f.below(samples.tol.diff));
    CheckReport::from_families(
        "connection_decomposition",
        Status::from_bool(ok),
        &[("vv", &fams[0]), ("vh", &fams[1]), ("hv", &fams[2]), ("hh", &fams[3])],
    )
}

/// `g(T_E F₁, F₂) = −g(F₁, T_E F₂)` and likewise for A.
pub fn oneill_skew_check(samples: &Samples) -> CheckReport {
    let [t, a] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "skew", idx);
        let mut t = Residuals::new();
        let mut a = Residuals::new();
        let frame = l.metric().orthonormal_frame();
        let mut triples: Vec<[Vector; 3]> = Vec::new();
        for e in &frame {
            for (f1, f2) in pairs(&frame) {
                triples.push([e.clone(), f1, f2]);
            }
        }
        for _ in 0..samples.dirs {
            triples.push([l.random_tangent(&mut rng), l.random_tangent(&mut rng), l.random_tangent(&mut rng)]);
        }
        for [e, f1, f2] in &triples {
            let w = || Witness::new(l.point(), &[e, f1, f2], "g(S_E F₁, F₂) + g(F₁, S_E F₂)");
            t.record(l.inner(&l.oneill_t(e, f1), f2) + l.inner(f1, &l.oneill_t(e, f2)), w);
            a.record(l.inner(&l.oneill_a(e, f1), f2) + l.inner(f1, &l.oneill_a(e, f2)), w);
        }
        [t, a]
    });
    let ok = t.below(samples.tol.diff) && a.below(samples.tol.diff);
    CheckReport::from_families("oneill_skew", Status::from_bool(ok), &[("t", &t), ("a", &a)])
}

/// T, A, ∇ω and ∇φ evaluated with the projector extension and with an
/// affinely perturbed extension must agree.
pub fn tensoriality_check(samples: &Samples) -> CheckReport {
    let fams = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "tensoriality", idx);
        let mut out: [Residuals; 4] = std::array::from_fn(|_| Residuals::new());
        let (pr, pt) = (Extension::Projector, Extension::Perturbed);
        for _ in 0..samples.dirs.max(1) {
            let e = l.random_tangent(&mut rng);
            let w = l.random_tangent(&mut rng);
            let p = l.point();
            let d = l.oneill_t_ext(&e, &w, pr) - l.oneill_t_ext(&e, &w, pt);
            out[0].record(l.norm(&d), || Witness::new(p, &[&e, &w], "T_E W"));
            let d = l.oneill_a_ext(&e, &w, pr) - l.oneill_a_ext(&e, &w, pt);
            out[1].record(l.norm(&d), || Witness::new(p, &[&e, &w], "A_E W"));
            let x = l.random_vertical(&mut rng);
            let y = l.random_vertical(&mut rng);
            let d = l.nabla_omega_ext(&x, &y, pr) - l.nabla_omega_ext(&x, &y, pt);
            out[2].record(l.norm(&d), || Witness::new(p, &[&x, &y], "(∇_X ω)Y"));
            let d = l.nabla_phi_ext(&x, &y, pr) - l.nabla_phi_ext(&x, &y, pt);
            out[3].record(l.norm(&d), || Witness::new(p, &[&x, &y], "(∇_X φ)Y"));
        }
        out
    });
    let ok = fams.iter().all(|f| f.below(samples.tol.diff));
    CheckReport::from_families(
        "tensoriality",
        Status::from_bool(ok),
        &[("t", &fams[0]), ("a", &fams[1]), ("nabla_omega", &fams[2]), ("nabla_phi", &fams[3])],
    )
}

/// `(∇_X ω)Y = CT_X Y − T_X φY` and `(∇_X φ)Y = BT_X Y − T_X ωY`, valid
/// on Kähler total spaces.
pub fn kaehler_identities_check(samples: &Samples) -> CheckReport {
    let [omega, phi] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "kaehler-identities", idx);
        let mut omega = Residuals::new();
        let mut phi = Residuals::new();
        for (x, y) in vertical_pairs(l, samples.dirs, &mut rng) {
            let txy = l.oneill_t(&x, &y);
            let d = l.nabla_omega(&x, &y) - l.c(&txy) + l.oneill_t(&x, &l.phi(&y));
            omega.record(l.norm(&d), || Witness::new(l.point(), &[&x, &y], "(∇_X ω)Y − CT_X Y + T_X φY"));
            let d = l.nabla_phi(&x, &y) - l.b(&txy) + l.oneill_t(&x, &l.omega(&y));
            phi.record(l.norm(&d), || Witness::new(l.point(), &[&x, &y], "(∇_X φ)Y − BT_X Y + T_X ωY"));
        }
        [omega, phi]
    });
    let ok = omega.below(samples.tol.diff) && phi.below(samples.tol.diff);
    CheckReport::from_families("kaehler_identities", Status::from_bool(ok), &[("nabla_omega", &omega), ("nabla_phi", &phi)])
}

/// max ‖(∇_X ω)Y‖ over vertical pairs; ω is parallel iff below diff_tol.
pub fn omega_parallel_scan(samples: &Samples) -> CheckReport {
    let [res] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "omega-parallel", idx);
        let mut r = Residuals::new();
        for (x, y) in vertical_pairs(l, samples.dirs, &mut rng) {
            r.record(l.norm(&l.nabla_omega(&x, &y)), || Witness::new(l.point(), &[&x, &y], "(∇_X ω)Y"));
        }
        [r]
    });
    let parallel = res.below(samples.tol.diff);
    let mut r = CheckReport::from_families("omega_parallel", Status::Pass, &[("nabla_omega", &res)]);
    r.classification = Some(if parallel { "parallel" } else { "not-parallel" }.into());
    r
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::sampling::halton_points;

    fn samples(inst: &SubmersionInstance, n: usize) -> Samples {
        inst.sample(&halton_points(&inst.region, n, 2), 6, 2).unwrap()
    }

    fn all_instances() -> Vec<SubmersionInstance> {
        vec![
            flat_instance(&["x1", "x2"], &[]),
            flat_instance(&["x1", "x3"], &[]),
            flat_instance(&["x1*sin(alpha) - x3*cos(alpha)", "x4"], &[("alpha", 1.0)]),
            flat_instance(&["(x1 - x4)/sqrt(2)", "x2"], &[]),
            curved_instance(),
            polar_instance(),
        ]
    }

    #[test]
    fn axioms_examples() {
        let inst = flat_instance(&["x1*sin(alpha) - x3*cos(alpha)", "x4"], &[("alpha", std::f64::consts::FRAC_PI_3)]);
        let pts = halton_points(&inst.region, 20, 1);
        let r = check_submersion_axioms(&inst, &pts, 4, 1);
        assert_eq!(r.status, Status::Pass);
        assert!((r.value("s1_min_ratio").unwrap() - 1.0).abs() < 1e-12);

        let r = check_submersion_axioms(&flat_instance(&["x1", "x1"], &[]), &pts, 4, 1);
        assert_eq!(r.status, Status::Fail);
        assert!(r.value("s1_min_ratio").unwrap() < 1e-8);

        let r = check_submersion_axioms(&flat_instance(&["2*x1", "x2"], &[]), &pts, 4, 1);
        assert_eq!(r.status, Status::Fail);
        assert!(r.value("s1_min_ratio").unwrap() > 0.4);
        assert!((r.value("s2_max").unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(check_submersion_axioms(&curved_instance(), &pts, 4, 1).status, Status::Pass);
        let polar = polar_instance();
        let pp = halton_points(&polar.region, 20, 1);
        assert_eq!(check_submersion_axioms(&polar, &pp, 4, 1).status, Status::Pass);
    }

    #[test]
    fn structural_suite_passes_everywhere() {
        for inst in all_instances() {
            let s = samples(&inst, 12);
            for r in [
                projector_check(&s),
                oneill_symmetry_check(&s),
                oneill_alternation_check(&s),
                connection_decomposition_check(&s),
                oneill_skew_check(&s),
                tensoriality_check(&s),
            ] {
                assert_eq!(r.status, Status::Pass, "{} {}: {:?}", inst.name, r.name, r);
            }
        }
    }

    #[test]
    fn kaehler_identities_on_kaehler_instances() {
        for inst in all_instances().into_iter().filter(|i| i.name != "curved") {
            let r = kaehler_identities_check(&samples(&inst, 12));
            assert_eq!(r.status, Status::Pass, "{}: {:?}", inst.name, r);
        }
    }

    #[test]
    fn polar_fibres_are_curved_yet_omega_parallel() {
        // anti-invariant and Kähler: φ = 0 and C = 0, so (∇_X ω)Y = CT_X Y − T_X φY = 0
        let s = samples(&polar_instance(), 12);
        let l = &s.locals[0];
        let t = l.oneill_t(&l.vertical_basis()[0], &l.vertical_basis()[0]);
        let u = l.vertical_basis().iter().fold(0.0f64, |m, v| m.max(l.norm(&l.oneill_t(v, v))));
        assert!(u > 0.1, "{t}");
        let r = omega_parallel_scan(&s);
        assert_eq!(r.classification.as_deref(), Some("parallel"));
        assert!(r.max_residual() < 1e-9);
        for inst in all_instances().into_iter().take(4) {
            let r = omega_parallel_scan(&samples(&inst, 8));
            assert_eq!(r.classification.as_deref(), Some("parallel"), "{}", inst.name);
            assert!(r.max_residual() < 1e-14);
        }
    }

    #[test]
    fn perturbed_extension_changes_fields_not_tensors() {
        let inst = polar_instance();
        let l = inst.local(&v(&[1.2, 0.8, 0.1, 0.0])).unwrap();
        let x = l.vertical_basis()[0].clone();
        let a = l.vertical_field(&x, Extension::Projector);
        let b = l.vertical_field(&x, Extension::Perturbed);
        assert_eq!(a.value, b.value);
        assert!((&a.jacobian - &b.jacobian).abs().max() > 0.1);
        let y = l.vertical_basis()[1].clone();
        let d = l.oneill_t_ext(&x, &y, Extension::Projector) - l.oneill_t_ext(&x, &y, Extension::Perturbed);
        assert!(d.norm() < 1e-12);
    }
}
