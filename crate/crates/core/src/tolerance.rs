use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Algebraic identities (no differentiation involved).
    pub alg: f64,
    /// Identities involving one differentiation of projector fields.
    pub diff: f64,
    /// Spread allowed for a constant slant angle, radians.
    pub angle: f64,
    /// Distance from 0 and π/2 required before an adapted frame is built.
    pub angle_guard: f64,
    /// Smallest admissible metric eigenvalue.
    pub pd: f64,
    /// Relative singular-value cutoff for the rank test.
    pub rank: f64,
    /// Largest admissible metric condition number.
    pub cond_max: f64,
    /// Projector algebra.
    pub projector: f64,
    /// Agreement between the two tension-field routes.
    pub route: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            alg: 1e-9,
            diff: 1e-7,
            angle: 1e-6,
            angle_guard: 1e-4,
            pd: 1e-10,
            rank: 1e-8,
            cond_max: 1e12,
            projector: 1e-10,
            route: 1e-6,
        }
    }
}
