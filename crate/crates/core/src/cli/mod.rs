//! Manifests, built-in fixtures and the check-suite runner.
//!
//! Checks run in dependency order: almost Hermitian structure, Kähler
//! condition, submersion axioms, then the splitting, slant and theorem
//! checks. A failed structural prerequisite marks everything downstream as
//! skipped; a failed theorem hypothesis (Kähler, slant, ω parallel) marks
//! the theorem checks as hypothesis-not-met.

mod manifest;

pub use manifest::{constant_value, load_manifest, ChartSpec, Entry, Format, MapSpec, Manifest, MatrixSpec, Output, Sampling};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{kaehler_check, validate_almost_hermitian};
use crate::report::{CheckReport, Status};
use crate::sampling::halton_points;
use crate::submersion::{self, SlantClass};
use crate::theorems::{self, Hypotheses};
use crate::tolerance::Tolerances;

/// Every check in execution order.
pub const CHECKS: &[&str] = &[
    "almost_hermitian",
    "kaehler",
    "submersion_axioms",
    "projectors",
    "oneill_symmetry",
    "oneill_alternation",
    "connection_decomposition",
    "oneill_skew",
    "tensoriality",
    "slant",
    "phi_squared",
    "metric_relations",
    "adapted_frame",
    "kaehler_identities",
    "omega_parallel",
    "second_fundamental_form",
    "tension_routes",
    "harmonicity",
    "lemma31",
    "thm33",
    "thm34",
    "thm35",
    "cor31",
];

/// Checks a given check needs to have run first.
fn prerequisites(name: &str) -> &'static [&'static str] {
    const AXIOMS: &[&str] = &["almost_hermitian", "submersion_axioms"];
    const SLANT: &[&str] = &["almost_hermitian", "submersion_axioms", "slant"];
    const THEOREM: &[&str] = &["almost_hermitian", "kaehler", "submersion_axioms", "slant", "omega_parallel"];
    match name {
        "almost_hermitian" => &[],
        "kaehler" | "submersion_axioms" => &["almost_hermitian"],
        "phi_squared" | "metric_relations" | "adapted_frame" | "omega_parallel" => SLANT,
        "kaehler_identities" => &["almost_hermitian", "kaehler", "submersion_axioms"],
        "harmonicity" | "lemma31" | "thm33" | "thm34" | "thm35" | "cor31" => THEOREM,
        _ => AXIOMS,
    }
}

/// Requested checks plus their prerequisites, in execution order.
pub fn resolve_checks(requested: Option<&[String]>) -> Vec<&'static str> {
    let Some(req) = requested else {
        return CHECKS.to_vec();
    };
    let mut wanted: BTreeSet<&str> = BTreeSet::new();
    for r in req {
        if let Some(&c) = CHECKS.iter().find(|c| *c == r) {
            wanted.insert(c);
            wanted.extend(prerequisites(c));
        }
    }
    CHECKS.iter().copied().filter(|c| wanted.contains(c)).collect()
}

struct Fixture {
    name: &'static str,
    text: &'static str,
}

const FIXTURES: &[Fixture] = &[
    Fixture { name: "hermitian-projection", text: include_str!("../../fixtures/hermitian-projection.toml") },
    Fixture { name: "anti-invariant", text: include_str!("../../fixtures/anti-invariant.toml") },
    Fixture { name: "slant-alpha", text: include_str!("../../fixtures/slant-alpha.toml") },
    Fixture { name: "slant-pi4", text: include_str!("../../fixtures/slant-pi4.toml") },
    Fixture { name: "curved-non-kahler", text: include_str!("../../fixtures/curved-non-kahler.toml") },
    Fixture { name: "rank-deficient", text: include_str!("../../fixtures/rank-deficient.toml") },
];

/// Built-in fixture names with their one-line descriptions.
pub fn list_fixtures() -> Vec<(String, String)> {
    FIXTURES
        .iter()
        .map(|f| {
            let m = Manifest::from_toml(f.text).expect("built-in fixture parses");
            (f.name.to_string(), m.description)
        })
        .collect()
}

pub fn fixture(name: &str) -> Result<Manifest> {
    let f = FIXTURES.iter().find(|f| f.name == name).ok_or_else(|| {
        let names: Vec<&str> = FIXTURES.iter().map(|f| f.name).collect();
        crate::Error::manifest("fixture", format!("unknown fixture '{name}' (known: {})", names.join(", ")))
    })?;
    Manifest::from_toml(f.text)
}

/// Command-line overrides applied on top of a manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub points: Option<usize>,
    pub dirs: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub params: Vec<(String, String)>,
    pub tol_alg: Option<f64>,
    pub tol_diff: Option<f64>,
    pub tol_angle: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, m: &mut Manifest) -> Result<()> {
        if let Some(p) = self.points {
            if p == 0 {
                return Err(crate::Error::manifest("points", "must be positive"));
            }
            m.sampling.points = p;
        }
        if let Some(d) = self.dirs {
            m.sampling.dirs = d;
        }
        if let Some(s) = self.seed {
            m.seed = s;
        }
        if let Some(f) = self.format {
            m.output.format = f;
        }
        if let Some(o) = &self.out {
            m.output.path = Some(o.clone());
        }
        for (k, v) in &self.params {
            m.set_param(k, v)?;
        }
        if let Some(t) = self.tol_alg {
            m.tolerances.alg = t;
        }
        if let Some(t) = self.tol_diff {
            m.tolerances.diff = t;
        }
        if let Some(t) = self.tol_angle {
            m.tolerances.angle = t;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub hypothesis_not_met: usize,
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

/// Top-level report for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub instance: String,
    pub description: String,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub summary: Summary,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn any_fail(&self) -> bool {
        self.summary.fail > 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_fail())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance: {}  (seed {}, {} points × {} dirs)", self.instance, self.seed, self.sampling.points, self.sampling.dirs);
        if !self.description.is_empty() {
            let _ = writeln!(out, "  {}", self.description);
        }
        for c in &self.checks {
            let _ = write!(out, "{:<26} {:<19}", c.name, c.status.label());
            if let Some(r) = &c.residual {
                let _ = write!(out, " max={:.3e}", r.max);
            }
            if let Some(cl) = &c.classification {
                let _ = write!(out, "  [{cl}]");
            }
            if let Some(m) = &c.message {
                let _ = write!(out, "  {m}");
            }
            let _ = writeln!(out, "  ({:.1} ms)", c.wall_ms);
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "summary: {} pass, {} fail, {} hypothesis-not-met, {} skipped",
            s.pass, s.fail, s.hypothesis_not_met, s.skipped
        );
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }
}

struct Runner {
    wanted: Vec<&'static str>,
    checks: Vec<CheckReport>,
    blocked: Option<String>,
}

impl Runner {
    fn wants(&self, name: &str) -> bool {
        self.wanted.contains(&name)
    }

    /// Run `f` if requested and not blocked by a failed prerequisite.
    fn run(&mut self, name: &str, f: impl FnOnce() -> CheckReport) -> Option<Status> {
        if !self.wants(name) {
            return None;
        }
        if let Some(why) = &self.blocked {
            self.checks.push(CheckReport::skipped(name, why.clone()));
            return Some(Status::Skipped);
        }
        let start = Instant::now();
        let mut r = f();
        r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let status = r.status;
        self.checks.push(r);
        Some(status)
    }

    fn skip(&mut self, name: &str, why: &str) {
        if self.wants(name) {
            let why = self.blocked.clone().unwrap_or_else(|| why.to_string());
            self.checks.push(CheckReport::skipped(name, why));
        }
    }

    fn block(&mut self, why: String) {
        if self.blocked.is_none() {
            self.blocked = Some(why);
        }
    }
}

/// Build the instance and run the configured checks.
pub fn run_suite(manifest: &Manifest) -> Result<SuiteReport> {
    let inst = manifest.build()?;
    let params = manifest.param_values()?;
    let wanted = resolve_checks(manifest.checks.as_deref());
    let dirs = manifest.sampling.dirs;
    let seed = manifest.seed;
    let tol = inst.tol;
    let points = halton_points(&inst.region, manifest.sampling.points, seed);
    let mut run = Runner { wanted, checks: Vec::new(), blocked: None };

    let ah = run.run("almost_hermitian", || validate_almost_hermitian(&inst.total, &points, dirs, seed, &tol));
    if ah == Some(Status::Fail) {
        run.block("prerequisite almost_hermitian failed".into());
    }
    let kaehler = run.run("kaehler", || kaehler_check(&inst.total, &points, dirs, seed, &tol)) == Some(Status::Pass);
    let ax = run.run("submersion_axioms", || submersion::check_submersion_axioms(&inst, &points, dirs, seed));
    if ax == Some(Status::Fail) {
        run.block("prerequisite submersion_axioms failed".into());
    }
    let samples = if run.blocked.is_none() {
        match inst.sample(&points, dirs, seed) {
            Ok(s) => Some(s),
            Err(e) => {
                run.block(format!("local data unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut slant_class = None;
    if let Some(s) = &samples {
        run.run("projectors", || submersion::projector_check(s));
        run.run("oneill_symmetry", || submersion::oneill_symmetry_check(s));
        run.run("oneill_alternation", || submersion::oneill_alternation_check(s));
        run.run("connection_decomposition", || submersion::connection_decomposition_check(s));
        run.run("oneill_skew", || submersion::oneill_skew_check(s));
        run.run("tensoriality", || submersion::tensoriality_check(s));

        let scan = run.wants("slant").then(|| submersion::slant_scan(s));
        if let Some(scan) = &scan {
            run.run("slant", || scan.to_check());
        }
        let class = scan.as_ref().map_or(SlantClass::NotSlant, |s| s.classification);
        let theta = scan.as_ref().map_or(0.0, |s| s.mean);
        slant_class = scan.as_ref().map(|s| (s.classification, s.mean));

        if class.is_slant() {
            run.run("phi_squared", || submersion::phi_squared_check(s, theta));
            run.run("metric_relations", || submersion::metric_relation_check(s, theta));
            if class.is_proper() {
                run.run("adapted_frame", || submersion::adapted_frame_check(s, theta));
            } else {
                run.skip("adapted_frame", "requires proper slant");
            }
        } else {
            for c in ["phi_squared", "metric_relations", "adapted_frame"] {
                run.skip(c, "submersion is not slant");
            }
        }
        run.run("kaehler_identities", || {
            if kaehler {
                submersion::kaehler_identities_check(s)
            } else {
                CheckReport::new("kaehler_identities", Status::HypothesisNotMet)
                    .with_message("total space is not Kähler")
            }
        });
        let mut parallel = false;
        if class.is_slant() {
            run.run("omega_parallel", || {
                let r = submersion::omega_parallel_scan(s);
                parallel = r.classification.as_deref() == Some("parallel");
                r
            });
        } else {
            run.skip("omega_parallel", "submersion is not slant");
        }
        run.run("second_fundamental_form", || theorems::second_fundamental_form_check(s));
        run.run("tension_routes", || theorems::tension_routes_check(s));

        let hyp = Hypotheses { kaehler, slant: class, theta, omega_parallel: parallel };
        run.run("harmonicity", || theorems::harmonicity_check(s, &hyp));
        run.run("lemma31", || theorems::lemma31_check(s, &hyp));
        run.run("thm33", || theorems::thm33_check(s, &hyp));
        run.run("thm34", || theorems::thm34_check(s, &hyp));
        run.run("thm35", || theorems::thm35_check(s, &hyp));
        run.run("cor31", || theorems::cor31_check(s, &hyp));
    } else {
        for c in CHECKS.iter().skip(3) {
            run.skip(c, "prerequisites failed");
        }
    }

    let mut summary = Summary::default();
    for c in &run.checks {
        match c.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::HypothesisNotMet => summary.hypothesis_not_met += 1,
            Status::Skipped => summary.skipped += 1,
        }
    }
    if let Some((class, theta)) = slant_class {
        summary.classification = Some(class.label());
        summary.theta = class.is_slant().then_some(theta);
    }
    Ok(SuiteReport {
        schema_version: 1,
        tool: ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        instance: manifest.name.clone(),
        description: manifest.description.clone(),
        seed,
        params,
        sampling: manifest.sampling.clone(),
        tolerances: tol,
        summary,
        checks: run.checks,
    })
}
