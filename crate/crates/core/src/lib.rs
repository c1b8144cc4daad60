//! Numerical verification of slant Riemannian submersions from almost
//! Hermitian manifolds.
//!
//! Every manifold is described by a single coordinate chart whose metric,
//! complex structure and submersion components are [`expr`] expressions.
//! All derivatives come from second-order forward-mode jets, so the
//! identities checked here hold to roundoff on exact instances.
//!
//! Module map:
//! - [`expr`]: expression parsing and jet evaluation
//! - [`geometry`]: charts, Christoffel symbols, covariant derivatives,
//!   almost Hermitian and Kähler checks
//! - [`submersion`]: Jacobians, vertical/horizontal splitting, φ/ω/B/C,
//!   slant angle, O'Neill tensors and their identities
//! - [`theorems`]: second fundamental form, tension field, harmonicity and
//!   the totally-geodesic conditions
//! - [`cli`]: manifests, built-in fixtures and the check-suite runner

pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod submersion;
pub mod theorems;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
