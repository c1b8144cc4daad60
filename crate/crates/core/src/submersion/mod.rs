//! Smooth maps between charts viewed as Riemannian submersions.
//!
//! At each sample point a [`LocalSubmersion`] holds everything the checks
//! need: metric and complex-structure jets of the total chart, the Jacobian
//! `dF` and its derivatives, the base metric at `F(p)`, the vertical and
//! horizontal projectors together with their coordinate derivatives, and an
//! orthonormal [`Splitting`].
//!
//! The horizontal projector is `P_H = G⁻¹Dᵀ(DG⁻¹Dᵀ)⁻¹D` with `D = dF(p)` and
//! `G = g₁(p)`; `P_V = Id − P_H`. Point vectors are extended to fields by
//! reprojection, `V(q) = P_V(q)v`, and every object built from `P_V`, `P_H`
//! and `J` is carried as a one-jet, so covariant derivatives at `p` are exact
//! to roundoff.

mod identities;
mod slant;

pub use identities::{
    check_submersion_axioms, connection_decomposition_check, kaehler_identities_check,
    oneill_alternation_check, oneill_skew_check, oneill_symmetry_check, omega_parallel_scan,
    projector_check, tensoriality_check,
};
pub use slant::{
    adapted_frame_check, metric_relation_check, phi_squared_check, slant_scan, AdaptedFrame,
    SlantClass, SlantReport,
};

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::geometry::{Chart, FieldJet, HermitianChart, LocalHermitian, LocalMetric, VectorFieldSpec};
use crate::linalg::{self, Matrix, Vector};
use crate::sampling::{self, Region};
use crate::tolerance::Tolerances;

/// Total almost Hermitian chart, base chart and map components.
#[derive(Debug, Clone)]
pub struct SubmersionInstance {
    pub name: String,
    pub total: HermitianChart,
    pub base: Chart,
    pub map: Vec<ScalarField>,
    pub region: Region,
    pub seed: u64,
    pub tol: Tolerances,
}

impl SubmersionInstance {
    pub fn new(
        name: impl Into<String>,
        total: HermitianChart,
        base: Chart,
        map: Vec<ScalarField>,
        region: Region,
        seed: u64,
        tol: Tolerances,
    ) -> Result<Self> {
        let m = total.dim();
        let n = base.dim();
        if n >= m {
            return Err(Error::InstanceInconsistent(format!(
                "base dimension {n} must be smaller than total dimension {m}"
            )));
        }
        if map.len() != n {
            return Err(Error::Dimension { expected: n, found: map.len() });
        }
        if let Some(f) = map.iter().find(|f| f.dim() != m) {
            return Err(Error::Dimension { expected: m, found: f.dim() });
        }
        if region.dim() != m {
            return Err(Error::Dimension { expected: m, found: region.dim() });
        }
        Ok(SubmersionInstance { name: name.into(), total, base, map, region, seed, tol })
    }

    pub fn total_dim(&self) -> usize {
        self.total.dim()
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn vertical_dim(&self) -> usize {
        self.total_dim() - self.base_dim()
    }

    /// `F(p)`, `dF(p)` and `∂_i dF(p)`.
    pub fn map_jets(&self, p: &Vector) -> Result<(Vector, Matrix, Vec<Matrix>)> {
        let m = self.total_dim();
        let n = self.base_dim();
        if p.len() != m {
            return Err(Error::Dimension { expected: m, found: p.len() });
        }
        let mut image = Vector::zeros(n);
        let mut jac = Matrix::zeros(n, m);
        let mut djac = vec![Matrix::zeros(n, m); m];
        for (a, f) in self.map.iter().enumerate() {
            let jet = f.eval_jet2(p.as_slice())?;
            image[a] = jet.value();
            for j in 0..m {
                jac[(a, j)] = jet.grad()[j];
                for (i, d) in djac.iter_mut().enumerate() {
                    d[(a, j)] = jet.hess(i, j);
                }
            }
        }
        Ok((image, jac, djac))
    }

    pub fn pushforward(&self, p: &Vector, x: &Vector) -> Result<Vector> {
        let (_, jac, _) = self.map_jets(p)?;
        Ok(jac * x)
    }

    /// Singular values of `dF(p)` measured in g₁-orthonormal coordinates,
    /// descending, `n` of them.
    pub fn singular_values(&self, p: &Vector) -> Result<Vec<f64>> {
        let local = self.total.chart().local(p, &self.tol)?;
        let (_, jac, _) = self.map_jets(p)?;
        let whitened = jac * inverse_transpose(&local.lower);
        let mut s: Vec<f64> = whitened.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    pub fn local(&self, p: &Vector) -> Result<LocalSubmersion> {
        LocalSubmersion::build(self, p)
    }

    pub fn split(&self, p: &Vector) -> Result<Splitting> {
        Ok(self.local(p)?.splitting)
    }

    /// Local data at every point, in order.
    pub fn sample(&self, points: &[Vector], dirs: usize, seed: u64) -> Result<Samples> {
        use rayon::prelude::*;
        let locals = points.par_iter().map(|p| self.local(p)).collect::<Result<Vec<_>>>()?;
        Ok(Samples { locals, dirs, seed, tol: self.tol })
    }
}

fn inverse_transpose(lower: &Matrix) -> Matrix {
    lower
        .transpose()
        .try_inverse()
        .expect("Cholesky factor of a positive definite metric is invertible")
}

/// Local data at a list of sample points plus the sampling parameters.
#[derive(Debug, Clone)]
pub struct Samples {
    pub locals: Vec<LocalSubmersion>,
    pub dirs: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

/// Orthonormal bases of `ker F_*` and its g₁-orthogonal complement at a
/// point, with the corresponding projectors.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub point: Vector,
    pub vertical: Vec<Vector>,
    pub horizontal: Vec<Vector>,
    /// Whitened singular values matching `horizontal`, ascending.
    pub singular_values: Vec<f64>,
    pub p_v: Matrix,
    pub p_h: Matrix,
}

/// Pointwise factors from which projected fields are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// `P_V`
    Vertical,
    /// `P_H`
    Horizontal,
    /// `J`
    Complex,
}

/// How a point vector is turned into a field before projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Constant coefficients, then reprojected: `V(q) = P(q)v`.
    Projector,
    /// Affine coefficients `v + L(q − p)` with a fixed matrix `L`, then
    /// reprojected. Agrees with [`Extension::Projector`] at `p` only.
    Perturbed,
}

/// φX and ωX for a vertical X.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiOmega {
    pub phi: Vector,
    pub omega: Vector,
}

/// BZ and CZ for a horizontal Z.
#[derive(Debug, Clone, PartialEq)]
pub struct BC {
    pub b: Vector,
    pub c: Vector,
}

fn perturbation(m: usize) -> Matrix {
    Matrix::from_fn(m, m, |k, i| 0.5 * (1.3 * k as f64 + 2.1 * i as f64 + 0.7).sin())
}

#[derive(Debug, Clone)]
pub struct LocalSubmersion {
    pub total: LocalHermitian,
    pub base: LocalMetric,
    pub image: Vector,
    pub jac: Matrix,
    /// `djac[i] = ∂_i dF`.
    pub djac: Vec<Matrix>,
    pub splitting: Splitting,
    /// `dp_h[i] = ∂_i P_H`; `∂_i P_V = −∂_i P_H`.
    pub dp_h: Vec<Matrix>,
    dp_v: Vec<Matrix>,
    tol: Tolerances,
}

impl LocalSubmersion {
    fn build(inst: &SubmersionInstance, p: &Vector) -> Result<Self> {
        let tol = inst.tol;
        let total = inst.total.local(p, &tol)?;
        let (image, jac, djac) = inst.map_jets(p)?;
        let base = inst.base.local(&image, &tol)?;
        let m = inst.total_dim();
        let k = inst.vertical_dim();

        let lt_inv = inverse_transpose(&total.metric.lower);
        let pairs = linalg::right_singular_pairs(&(&jac * &lt_inv));
        let sigma_max = pairs.last().map_or(0.0, |p| p.0);
        let sigma_min = pairs[k].0;
        if !(sigma_min > tol.rank * sigma_max) {
            let ratio = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
            return Err(Error::RankDeficient { point: p.iter().copied().collect(), ratio });
        }
        let lift = |y: &Vector| {
            let mut x = &lt_inv * y;
            linalg::sign_fix(&mut x);
            x
        };
        let vertical: Vec<Vector> = pairs[..k].iter().map(|(_, y)| lift(y)).collect();
        let horizontal: Vec<Vector> = pairs[k..].iter().map(|(_, y)| lift(y)).collect();
        let singular_values = pairs[k..].iter().map(|(s, _)| *s).collect();

        // P_H = G⁻¹Dᵀ M⁻¹ D, M = D G⁻¹ Dᵀ, and its coordinate derivatives
        let g_inv = &total.metric.g_inv;
        let dt = jac.transpose();
        let mmat = &jac * g_inv * &dt;
        let m_inv = mmat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::RankDeficient { point: p.iter().copied().collect(), ratio: 0.0 })?;
        let w = g_inv * &dt * &m_inv; // G⁻¹Dᵀ M⁻¹
        let p_h = &w * &jac;
        let p_v = Matrix::identity(m, m) - &p_h;
        let mut dp_h = Vec::with_capacity(m);
        for i in 0..m {
            let dg_inv = -(g_inv * &total.metric.dg[i] * g_inv);
            let dd = &djac[i];
            let dm = dd * g_inv * &dt + &jac * &dg_inv * &dt + &jac * g_inv * dd.transpose();
            let dm_inv = -(&m_inv * dm * &m_inv);
            let d = &dg_inv * &dt * &m_inv * &jac
                + g_inv * dd.transpose() * &m_inv * &jac
                + g_inv * &dt * dm_inv * &jac
                + &w * dd;
            dp_h.push(d);
        }
        let dp_v = dp_h.iter().map(|d| -d).collect();

        Ok(LocalSubmersion {
            total,
            base,
            image,
            jac,
            djac,
            splitting: Splitting {
                point: p.clone(),
                vertical,
                horizontal,
                singular_values,
                p_v,
                p_h,
            },
            dp_h,
            dp_v,
            tol,
        })
    }

    pub fn point(&self) -> &Vector {
        &self.splitting.point
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    pub fn metric(&self) -> &LocalMetric {
        &self.total.metric
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn p_v(&self) -> &Matrix {
        &self.splitting.p_v
    }

    pub fn p_h(&self) -> &Matrix {
        &self.splitting.p_h
    }

    pub fn j(&self) -> &Matrix {
        &self.total.j
    }

    pub fn vertical_basis(&self) -> &[Vector] {
        &self.splitting.vertical
    }

    pub fn horizontal_basis(&self) -> &[Vector] {
        &self.splitting.horizontal
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        self.metric().inner(x, y)
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.metric().norm(x)
    }

    pub fn base_norm(&self, y: &Vector) -> f64 {
        self.base.norm(y)
    }

    pub fn pushforward(&self, x: &Vector) -> Vector {
        &self.jac * x
    }

    pub fn vertical_part(&self, x: &Vector) -> Vector {
        self.p_v() * x
    }

    pub fn horizontal_part(&self, x: &Vector) -> Vector {
        self.p_h() * x
    }

    fn scale(&self, x: &Vector) -> f64 {
        self.norm(x).max(1.0)
    }

    pub fn ensure_vertical(&self, x: &Vector) -> Result<()> {
        let h = self.norm(&self.horizontal_part(x));
        if h > self.tol.alg * self.scale(x) {
            return Err(Error::NotVertical(h));
        }
        Ok(())
    }

    pub fn ensure_horizontal(&self, x: &Vector) -> Result<()> {
        let v = self.norm(&self.vertical_part(x));
        if v > self.tol.alg * self.scale(x) {
            return Err(Error::NotHorizontal(v));
        }
        Ok(())
    }

    /// `φX = P_V J X`.
    pub fn phi(&self, x: &Vector) -> Vector {
        self.p_v() * (self.j() * x)
    }

    /// `ωX = P_H J X`.
    pub fn omega(&self, x: &Vector) -> Vector {
        self.p_h() * (self.j() * x)
    }

    /// `BZ = P_V J Z`.
    pub fn b(&self, z: &Vector) -> Vector {
        self.phi(z)
    }

    /// `CZ = P_H J Z`.
    pub fn c(&self, z: &Vector) -> Vector {
        self.omega(z)
    }

    pub fn phi_omega(&self, x: &Vector) -> Result<PhiOmega> {
        self.ensure_vertical(x)?;
        Ok(PhiOmega { phi: self.phi(x), omega: self.omega(x) })
    }

    pub fn b_c(&self, z: &Vector) -> Result<BC> {
        self.ensure_horizontal(z)?;
        Ok(BC { b: self.b(z), c: self.c(z) })
    }

    /// Matrix of φ in the vertical basis, `Φ_ab = g₁(v_a, J v_b)`.
    pub fn phi_matrix(&self) -> Matrix {
        let v = self.vertical_basis();
        let k = v.len();
        Matrix::from_fn(k, k, |a, b| self.inner(&v[a], &(self.j() * &v[b])))
    }

    fn factor(&self, f: Factor) -> &Matrix {
        match f {
            Factor::Vertical => self.p_v(),
            Factor::Horizontal => self.p_h(),
            Factor::Complex => self.j(),
        }
    }

    fn factor_derivative(&self, f: Factor, i: usize) -> &Matrix {
        match f {
            Factor::Vertical => &self.dp_v[i],
            Factor::Horizontal => &self.dp_h[i],
            Factor::Complex => &self.total.dj[i],
        }
    }

    /// Field whose coefficients at `p` and first derivatives come from `v`
    /// under the extension rule `ext` (before any projection).
    pub fn seed(&self, v: &Vector, ext: Extension) -> FieldJet {
        match ext {
            Extension::Projector => FieldJet::constant(v.clone()),
            Extension::Perturbed => FieldJet { value: v.clone(), jacobian: perturbation(self.dim()) },
        }
    }

    /// One-jet of `M_1(q) ⋯ M_r(q) S(q)` at `p`, where `M_k` are the given
    /// factors (leftmost applied last) and `S` is the seed field.
    pub fn compose(&self, factors: &[Factor], seed: &FieldJet) -> FieldJet {
        let m = self.dim();
        let r = factors.len();
        // inputs[k] = M_{k+1} ⋯ M_r s (the vector factor k acts on)
        let mut inputs = vec![Vector::zeros(m); r];
        let mut acc = seed.value.clone();
        for k in (0..r).rev() {
            inputs[k] = acc.clone();
            acc = self.factor(factors[k]) * acc;
        }
        let value = acc;
        // prefixes[k] = M_1 ⋯ M_{k}, prefixes[0] = Id
        let mut prefixes = Vec::with_capacity(r + 1);
        prefixes.push(Matrix::identity(m, m));
        for k in 0..r {
            let next = &prefixes[k] * self.factor(factors[k]);
            prefixes.push(next);
        }
        let full = &prefixes[r];
        let mut jacobian = full * &seed.jacobian;
        for i in 0..m {
            let mut col = Vector::zeros(m);
            for k in 0..r {
                col += &prefixes[k] * (self.factor_derivative(factors[k], i) * &inputs[k]);
            }
            let mut c = jacobian.column_mut(i);
            c += col;
        }
        FieldJet { value, jacobian }
    }

    pub fn vertical_field(&self, v: &Vector, ext: Extension) -> FieldJet {
        self.compose(&[Factor::Vertical], &self.seed(v, ext))
    }

    pub fn horizontal_field(&self, v: &Vector, ext: Extension) -> FieldJet {
        self.compose(&[Factor::Horizontal], &self.seed(v, ext))
    }

    /// Projector extension `V(q) = P_V(q)v` of a vertical vector.
    pub fn vertical_extension(&self, v: &Vector) -> Result<VectorFieldSpec> {
        self.ensure_vertical(v)?;
        Ok(VectorFieldSpec::Jet(self.vertical_field(v, Extension::Projector)))
    }

    /// Projector extension `Z(q) = P_H(q)z` of a horizontal vector.
    pub fn horizontal_extension(&self, z: &Vector) -> Result<VectorFieldSpec> {
        self.ensure_horizontal(z)?;
        Ok(VectorFieldSpec::Jet(self.horizontal_field(z, Extension::Projector)))
    }

    /// Levi-Civita derivative of a field of the total chart.
    pub fn nabla(&self, field: &FieldJet, direction: &Vector) -> Vector {
        self.metric().covariant_derivative(field, direction)
    }

    /// `T_E W = H∇_{VE} VW + V∇_{VE} HW`.
    pub fn oneill_t_ext(&self, e: &Vector, w: &Vector, ext: Extension) -> Vector {
        let ve = self.vertical_part(e);
        let vw = self.vertical_field(w, ext);
        let hw = self.horizontal_field(w, ext);
        self.horizontal_part(&self.nabla(&vw, &ve)) + self.vertical_part(&self.nabla(&hw, &ve))
    }

    /// `A_E W = H∇_{HE} VW + V∇_{HE} HW`.
    pub fn oneill_a_ext(&self, e: &Vector, w: &Vector, ext: Extension) -> Vector {
        let he = self.horizontal_part(e);
        let vw = self.vertical_field(w, ext);
        let hw = self.horizontal_field(w, ext);
        self.horizontal_part(&self.nabla(&vw, &he)) + self.vertical_part(&self.nabla(&hw, &he))
    }

    pub fn oneill_t(&self, e: &Vector, w: &Vector) -> Vector {
        self.oneill_t_ext(e, w, Extension::Projector)
    }

    pub fn oneill_a(&self, e: &Vector, w: &Vector) -> Vector {
        self.oneill_a_ext(e, w, Extension::Projector)
    }

    /// `∇̂_X Y = V∇_X Y` with `Y` extended vertically.
    pub fn nabla_hat(&self, x: &Vector, y: &Vector, ext: Extension) -> Vector {
        self.vertical_part(&self.nabla(&self.vertical_field(y, ext), x))
    }

    /// `(∇_X ω)Y = H∇_X ωY − ω∇̂_X Y`.
    pub fn nabla_omega_ext(&self, x: &Vector, y: &Vector, ext: Extension) -> Vector {
        let omega_y = self.compose(&[Factor::Horizontal, Factor::Complex, Factor::Vertical], &self.seed(y, ext));
        self.horizontal_part(&self.nabla(&omega_y, x)) - self.omega(&self.nabla_hat(x, y, ext))
    }

    /// `(∇_X φ)Y = ∇̂_X φY − φ∇̂_X Y`.
    pub fn nabla_phi_ext(&self, x: &Vector, y: &Vector, ext: Extension) -> Vector {
        let phi_y = self.compose(&[Factor::Vertical, Factor::Complex, Factor::Vertical], &self.seed(y, ext));
        self.vertical_part(&self.nabla(&phi_y, x)) - self.phi(&self.nabla_hat(x, y, ext))
    }

    pub fn nabla_omega(&self, x: &Vector, y: &Vector) -> Vector {
        self.nabla_omega_ext(x, y, Extension::Projector)
    }

    pub fn nabla_phi(&self, x: &Vector, y: &Vector) -> Vector {
        self.nabla_phi_ext(x, y, Extension::Projector)
    }

    /// Angle between `JX` and the vertical space, in `[0, π/2]`.
    pub fn slant_angle(&self, x: &Vector) -> Result<f64> {
        if !(self.norm(x) > 0.0) {
            return Err(Error::ZeroVector);
        }
        let po = self.phi_omega(x)?;
        Ok(self.norm(&po.omega).atan2(self.norm(&po.phi)))
    }

    /// Unit vertical vector with Gaussian coefficients on the vertical basis.
    pub fn random_vertical(&self, rng: &mut ChaCha8Rng) -> Vector {
        self.random_unit(rng, self.vertical_basis())
    }

    pub fn random_horizontal(&self, rng: &mut ChaCha8Rng) -> Vector {
        self.random_unit(rng, self.horizontal_basis())
    }

    pub fn random_tangent(&self, rng: &mut ChaCha8Rng) -> Vector {
        let frame = self.metric().orthonormal_frame();
        self.random_unit(rng, &frame)
    }

    fn random_unit(&self, rng: &mut ChaCha8Rng, basis: &[Vector]) -> Vector {
        let v = sampling::random_combination(rng, basis, self.dim());
        let n = self.norm(&v);
        if n > 0.0 {
            v / n
        } else {
            basis[0].clone()
        }
    }
}
