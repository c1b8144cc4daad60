use std::f64::consts::FRAC_PI_2;

use rand_chacha::ChaCha8Rng;

use super::{second_fundamental_form, tension_field, thm33_residual, thm34_residual, thm35_residuals};
use crate::linalg::Vector;
use crate::report::{reduce_ordered_many, CheckReport, Residuals, Status, Witness};
use crate::sampling;
use crate::submersion::{LocalSubmersion, Samples, SlantClass};

/// Outcomes of the prerequisite checks that gate the theorem checks.
#[derive(Debug, Clone, Copy)]
pub struct Hypotheses {
    pub kaehler: bool,
    pub slant: SlantClass,
    /// Mean slant angle.
    pub theta: f64,
    pub omega_parallel: bool,
}

impl Hypotheses {
    /// Message explaining why a Kähler-slant theorem does not apply.
    fn unmet(&self) -> Option<&'static str> {
        if !self.kaehler {
            Some("total space is not Kähler")
        } else if !self.slant.is_slant() {
            Some("submersion is not slant")
        } else {
            None
        }
    }
}

fn not_met(name: &str, why: &str) -> CheckReport {
    CheckReport::new(name, Status::HypothesisNotMet).with_message(why)
}

type Triple = (Vector, Vector, Vector);

/// All basis triples drawn from the given bases plus `dirs` random triples.
fn triples(
    l: &LocalSubmersion,
    bases: [&[Vector]; 3],
    dirs: usize,
    rng: &mut ChaCha8Rng,
    draw: [fn(&LocalSubmersion, &mut ChaCha8Rng) -> Vector; 3],
) -> Vec<Triple> {
    let mut out = Vec::new();
    for a in bases[0] {
        for b in bases[1] {
            for c in bases[2] {
                out.push((a.clone(), b.clone(), c.clone()));
            }
        }
    }
    for _ in 0..dirs {
        out.push((draw[0](l, rng), draw[1](l, rng), draw[2](l, rng)));
    }
    out
}

fn vert(l: &LocalSubmersion, r: &mut ChaCha8Rng) -> Vector {
    l.random_vertical(r)
}

fn horiz(l: &LocalSubmersion, r: &mut ChaCha8Rng) -> Vector {
    l.random_horizontal(r)
}

fn tangent(l: &LocalSubmersion, r: &mut ChaCha8Rng) -> Vector {
    l.random_tangent(r)
}

/// `(∇F_*)(Z₁, Z₂) = 0` on horizontal pairs, and symmetry of `∇F_*`.
pub fn second_fundamental_form_check(samples: &Samples) -> CheckReport {
    let [horizontal, symmetry] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "sff", idx);
        let h = l.horizontal_basis();
        let mut horizontal = Residuals::new();
        for (a, b, _) in triples(l, [h, h, &h[..1]], samples.dirs, &mut rng, [horiz, horiz, horiz]) {
            let s = second_fundamental_form(l, &a, &b);
            horizontal.record(l.base_norm(&s), || Witness::new(l.point(), &[&a, &b], "(∇F_*)(Z₁,Z₂)"));
        }
        let mut symmetry = Residuals::new();
        let frame = l.metric().orthonormal_frame();
        for (a, b, _) in triples(l, [&frame, &frame, &frame[..1]], samples.dirs, &mut rng, [tangent, tangent, tangent]) {
            let d = second_fundamental_form(l, &a, &b) - second_fundamental_form(l, &b, &a);
            symmetry.record(l.base_norm(&d), || Witness::new(l.point(), &[&a, &b], "(∇F_*)(E₁,E₂) − (∇F_*)(E₂,E₁)"));
        }
        [horizontal, symmetry]
    });
    let ok = horizontal.below(samples.tol.diff) && symmetry.below(samples.tol.diff);
    CheckReport::from_families(
        "second_fundamental_form",
        Status::from_bool(ok),
        &[("horizontal", &horizontal), ("symmetry", &symmetry)],
    )
}

/// Agreement of the frame-trace and fibre-trace tension routes, with the
/// horizontal trace terms checked separately.
pub fn tension_routes_check(samples: &Samples) -> CheckReport {
    let [disc, horizontal, tau] = reduce_ordered_many(&samples.locals, |_, l| {
        let t = tension_field(l);
        let p = l.point();
        let mut disc = Residuals::new();
        disc.record(t.discrepancy, || Witness::new(p, &[], "‖route1 − route2‖"));
        let mut horizontal = Residuals::new();
        for (z, h) in l.horizontal_basis().iter().zip(&t.horizontal_terms) {
            horizontal.record(*h, || Witness::new(p, &[z], "(∇F_*)(Z,Z)"));
        }
        let mut tau = Residuals::new();
        tau.record(t.norm(l), || Witness::new(p, &[], "‖τ‖"));
        [disc, horizontal, tau]
    });
    let ok = disc.below(samples.tol.route) && horizontal.below(samples.tol.diff);
    let mut r = CheckReport::from_families(
        "tension_routes",
        Status::from_bool(ok),
        &[("discrepancy", &disc), ("horizontal", &horizontal)],
    );
    r.values.insert("tau_max".into(), tau.max());
    r
}

/// ω parallel ⇒ τ = 0, plus the adapted-frame cancellation
/// `Σ F_*(T_{eᵢ}eᵢ + sec²θ T_{φeᵢ}φeᵢ) = 0` on proper slant instances.
pub fn harmonicity_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    let name = "harmonicity";
    if let Some(why) = hyp.unmet() {
        return not_met(name, why);
    }
    let theta = hyp.theta;
    let proper = hyp.slant.is_proper();
    let [tau, display] = reduce_ordered_many(&samples.locals, |_, l| {
        let p = l.point();
        let mut tau = Residuals::new();
        tau.record(tension_field(l).norm(l), || Witness::new(p, &[], "‖τ‖"));
        let mut display = Residuals::new();
        if proper {
            match l.adapted_frame(theta) {
                Ok(frame) => {
                    let sec2 = 1.0 / theta.cos().powi(2);
                    let mut sum = Vector::zeros(l.jac.nrows());
                    for pair in frame.vertical.chunks(2) {
                        let e = &pair[0];
                        let phi_e = l.phi(e);
                        sum += l.pushforward(&(l.oneill_t(e, e) + l.oneill_t(&phi_e, &phi_e) * sec2));
                    }
                    display.record(l.base_norm(&sum), || {
                        Witness::new(p, &[], "Σ F_*(T_{eᵢ}eᵢ + sec²θ T_{φeᵢ}φeᵢ)")
                    });
                }
                Err(e) => display.record(f64::INFINITY, || Witness::new(p, &[], e.to_string())),
            }
        }
        [tau, display]
    });
    let mut families = vec![("tau", &tau)];
    if proper {
        families.push(("adapted_display", &display));
    }
    if !hyp.omega_parallel {
        let mut r = CheckReport::from_families(name, Status::HypothesisNotMet, &families);
        r.message = Some("ω is not parallel; the implication is vacuous".into());
        r.classification = Some(if tau.below(samples.tol.diff) { "harmonic" } else { "not-harmonic" }.into());
        return r;
    }
    let ok = tau.below(samples.tol.diff) && (!proper || display.below(samples.tol.diff));
    let mut r = CheckReport::from_families(name, Status::from_bool(ok), &families);
    r.classification = Some(if tau.below(samples.tol.diff) { "harmonic" } else { "not-harmonic" }.into());
    if !ok && (theta - FRAC_PI_2).abs() < samples.tol.angle_guard {
        r.message = Some("ω parallel but τ ≠ 0 at θ = π/2, where the adapted-frame argument is unavailable".into());
    }
    r
}

/// `T_{φX}φX = −cos²θ T_X X` and `T_X φY = T_Y φX`, under Kähler with ω
/// parallel.
pub fn lemma31_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    let name = "lemma31";
    if let Some(why) = hyp.unmet() {
        return not_met(name, why);
    }
    if !hyp.omega_parallel {
        return not_met(name, "ω is not parallel");
    }
    let c2 = hyp.theta.cos().powi(2);
    let [phi_phi, phi_swap] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "lemma31", idx);
        let v = l.vertical_basis();
        let mut phi_phi = Residuals::new();
        let mut phi_swap = Residuals::new();
        for (x, y, _) in triples(l, [v, v, &v[..1]], samples.dirs, &mut rng, [vert, vert, vert]) {
            let px = l.phi(&x);
            let d = l.oneill_t(&px, &px) + l.oneill_t(&x, &x) * c2;
            phi_phi.record(l.norm(&d), || Witness::new(l.point(), &[&x], "T_{φX}φX + cos²θ T_X X"));
            let d = l.oneill_t(&x, &l.phi(&y)) - l.oneill_t(&y, &px);
            phi_swap.record(l.norm(&d), || Witness::new(l.point(), &[&x, &y], "T_X φY − T_Y φX"));
        }
        [phi_phi, phi_swap]
    });
    let ok = phi_phi.below(samples.tol.diff) && phi_swap.below(samples.tol.diff);
    CheckReport::from_families(name, Status::from_bool(ok), &[("phi_phi", &phi_phi), ("phi_swap", &phi_swap)])
}

/// Report for an "if and only if" pair: the check passes when the
/// condition and the direct property hold or fail together.
fn coherence(name: &str, condition: &Residuals, direct: &Residuals, tol: f64, label: &str) -> CheckReport {
    let cond = condition.below(tol);
    let holds = direct.below(tol);
    let mut r = CheckReport::from_families(
        name,
        Status::from_bool(cond == holds),
        &[("condition", condition), ("direct", direct)],
    )
    .with_value("condition_holds", f64::from(u8::from(cond)))
    .with_value("direct_holds", f64::from(u8::from(holds)));
    r.classification = Some(if holds { label.to_string() } else { format!("not {label}") });
    if cond != holds {
        r.message = Some(format!("condition {} but property {}", verdict(cond), verdict(holds)));
    }
    r
}

fn verdict(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn thm33_families(samples: &Samples) -> [Residuals; 2] {
    reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "thm33", idx);
        let (v, h) = (l.vertical_basis(), l.horizontal_basis());
        let mut cond = Residuals::new();
        for (x, y, z) in triples(l, [v, v, h], samples.dirs, &mut rng, [vert, vert, horiz]) {
            cond.record(thm33_residual(l, &x, &y, &z), || Witness::new(l.point(), &[&x, &y, &z], "thm33"));
        }
        let mut direct = Residuals::new();
        for (x, y, _) in triples(l, [v, v, &v[..1]], samples.dirs, &mut rng, [vert, vert, vert]) {
            direct.record(l.norm(&l.oneill_t(&x, &y)), || Witness::new(l.point(), &[&x, &y], "‖H∇_X Y‖"));
        }
        [cond, direct]
    })
}

fn thm34_families(samples: &Samples) -> [Residuals; 2] {
    reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "thm34", idx);
        let (v, h) = (l.vertical_basis(), l.horizontal_basis());
        let mut cond = Residuals::new();
        for (x, z1, z2) in triples(l, [v, h, h], samples.dirs, &mut rng, [vert, horiz, horiz]) {
            cond.record(thm34_residual(l, &x, &z1, &z2), || Witness::new(l.point(), &[&x, &z1, &z2], "thm34"));
        }
        let mut direct = Residuals::new();
        for (z1, z2, _) in triples(l, [h, h, &h[..1]], samples.dirs, &mut rng, [horiz, horiz, horiz]) {
            direct.record(l.norm(&l.oneill_a(&z1, &z2)), || Witness::new(l.point(), &[&z1, &z2], "‖V∇_{Z₁}Z₂‖"));
        }
        [cond, direct]
    })
}

/// Vertical foliation totally geodesic ⇔ the first displayed condition.
pub fn thm33_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    if let Some(why) = hyp.unmet() {
        return not_met("thm33", why);
    }
    let [cond, direct] = thm33_families(samples);
    coherence("thm33", &cond, &direct, samples.tol.diff, "vertical foliation totally geodesic")
}

/// Horizontal distribution totally geodesic ⇔ the second displayed
/// condition.
pub fn thm34_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    if let Some(why) = hyp.unmet() {
        return not_met("thm34", why);
    }
    let [cond, direct] = thm34_families(samples);
    coherence("thm34", &cond, &direct, samples.tol.diff, "horizontal distribution totally geodesic")
}

/// F totally geodesic ⇔ both displayed conditions.
pub fn thm35_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    let name = "thm35";
    if let Some(why) = hyp.unmet() {
        return not_met(name, why);
    }
    let [cond_a, cond_b, direct] = reduce_ordered_many(&samples.locals, |idx, l| {
        let mut rng = sampling::stream(samples.seed, "thm35", idx);
        let (v, h) = (l.vertical_basis(), l.horizontal_basis());
        let mut a = Residuals::new();
        let mut b = Residuals::new();
        for (x, y, z1) in triples(l, [v, v, h], samples.dirs, &mut rng, [vert, vert, horiz]) {
            for z2 in h {
                let (ra, rb) = thm35_residuals(l, &x, &y, &z1, z2);
                a.record(ra, || Witness::new(l.point(), &[&x, &y, &z1], "thm35 (a)"));
                b.record(rb, || Witness::new(l.point(), &[&x, &z1, z2], "thm35 (b)"));
            }
        }
        let mut direct = Residuals::new();
        let mut pairs: Vec<(Vector, Vector)> = Vec::new();
        let frame = l.metric().orthonormal_frame();
        for e1 in &frame {
            for e2 in &frame {
                pairs.push((e1.clone(), e2.clone()));
            }
        }
        for x in v {
            for z in h {
                pairs.push((x.clone(), z.clone()));
            }
        }
        for _ in 0..samples.dirs {
            pairs.push((l.random_tangent(&mut rng), l.random_tangent(&mut rng)));
        }
        for (e1, e2) in &pairs {
            let s = second_fundamental_form(l, e1, e2);
            direct.record(l.base_norm(&s), || Witness::new(l.point(), &[e1, e2], "‖(∇F_*)(E₁,E₂)‖"));
        }
        [a, b, direct]
    });
    let tol = samples.tol.diff;
    let mut cond = cond_a.clone();
    cond.merge(cond_b.clone());
    let mut r = coherence(name, &cond, &direct, tol, "totally geodesic map");
    r.values.insert("condition_a_max".into(), cond_a.max());
    r.values.insert("condition_b_max".into(), cond_b.max());
    r
}

/// Both foliations totally geodesic, evaluated pointwise through the two
/// displayed conditions.
pub fn cor31_check(samples: &Samples, hyp: &Hypotheses) -> CheckReport {
    let name = "cor31";
    if let Some(why) = hyp.unmet() {
        return not_met(name, why);
    }
    let [c33, _] = thm33_families(samples);
    let [c34, _] = thm34_families(samples);
    let ok = c33.below(samples.tol.diff) && c34.below(samples.tol.diff);
    let mut r = CheckReport::from_families(name, Status::from_bool(ok), &[("thm33", &c33), ("thm34", &c34)]);
    r.classification = Some(
        if ok { "both foliations totally geodesic (pointwise)" } else { "not both foliations totally geodesic" }.into(),
    );
    r
}
