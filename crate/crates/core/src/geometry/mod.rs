//! Riemannian and almost Hermitian charts.
//!
//! Conventions: the metric is `g_ij(x)` with only the upper triangle stored;
//! the complex structure is the mixed tensor `J^i_j(x)` acting on column
//! vectors, `(JX)^i = J^i_j X^j`. Christoffel symbols are those of the
//! Levi-Civita connection, `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.

mod checks;

pub use checks::{kaehler_check, validate_almost_hermitian};

use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::linalg::{self, Matrix, Vector};
use crate::tolerance::Tolerances;

#[inline]
fn packed(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

/// Single-chart Riemannian manifold.
#[derive(Debug, Clone)]
pub struct Chart {
    coords: Vec<String>,
    metric: Vec<ScalarField>,
}

impl Chart {
    /// `metric_upper` lists `g_ij` for `i ≤ j`, row by row.
    pub fn new(coords: Vec<String>, metric_upper: Vec<ScalarField>) -> Result<Self> {
        let m = coords.len();
        if m == 0 {
            return Err(Error::Dimension { expected: 1, found: 0 });
        }
        if metric_upper.len() != m * (m + 1) / 2 {
            return Err(Error::Dimension { expected: m * (m + 1) / 2, found: metric_upper.len() });
        }
        if let Some(f) = metric_upper.iter().find(|f| f.dim() != m) {
            return Err(Error::Dimension { expected: m, found: f.dim() });
        }
        Ok(Chart { coords, metric: metric_upper })
    }

    /// Take the upper triangle of a full `m×m` array of fields.
    pub fn from_rows(coords: Vec<String>, rows: Vec<Vec<ScalarField>>) -> Result<Self> {
        let m = coords.len();
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension { expected: m, found: rows.len() });
        }
        let mut upper = Vec::with_capacity(m * (m + 1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            upper.extend(row.into_iter().skip(i));
        }
        Chart::new(coords, upper)
    }

    pub fn euclidean(coords: Vec<String>) -> Self {
        let m = coords.len();
        let mut upper = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                upper.push(ScalarField::constant(if i == j { 1.0 } else { 0.0 }, &coords));
            }
        }
        Chart { coords, metric: upper }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric_field(&self, i: usize, j: usize) -> &ScalarField {
        &self.metric[packed(i, j, self.dim())]
    }

    fn check_point(&self, p: &Vector) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }

    pub fn metric_at(&self, p: &Vector) -> Result<Matrix> {
        self.check_point(p)?;
        let m = self.dim();
        let mut g = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.metric_field(i, j).eval_real(p.as_slice())?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Metric, inverse, first derivatives and Christoffel symbols at `p`.
    pub fn local(&self, p: &Vector, tol: &Tolerances) -> Result<LocalMetric> {
        self.check_point(p)?;
        let m = self.dim();
        let mut g = Matrix::zeros(m, m);
        let mut dg = vec![Matrix::zeros(m, m); m];
        for i in 0..m {
            for j in i..m {
                let jet = self.metric_field(i, j).eval_jet2(p.as_slice())?;
                g[(i, j)] = jet.value();
                g[(j, i)] = jet.value();
                for (k, d) in jet.grad().iter().enumerate() {
                    dg[k][(i, j)] = *d;
                    dg[k][(j, i)] = *d;
                }
            }
        }
        let point: Vec<f64> = p.iter().copied().collect();
        let (lo, hi) = linalg::eigen_range(&g);
        if !(lo > tol.pd) {
            return Err(Error::NotPositiveDefinite { point, eigenvalue: lo });
        }
        if hi / lo > tol.cond_max {
            return Err(Error::SingularMetric { point, condition: hi / lo });
        }
        let chol = g.clone().cholesky().ok_or(Error::NotPositiveDefinite { point, eigenvalue: lo })?;
        let g_inv = chol.inverse();
        let lower = chol.l();
        let christoffels = Christoffels::from_metric(&g_inv, &dg);
        Ok(LocalMetric { point: p.clone(), g, g_inv, dg, lower, christoffels })
    }

    pub fn christoffel(&self, p: &Vector, tol: &Tolerances) -> Result<Christoffels> {
        Ok(self.local(p, tol)?.christoffels)
    }
}

/// Christoffel symbols `Γ^k_ij` at a point, stored symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffels {
    fn from_metric(g_inv: &Matrix, dg: &[Matrix]) -> Self {
        let m = g_inv.nrows();
        let per = m * (m + 1) / 2;
        let mut data = vec![0.0; m * per];
        for i in 0..m {
            for j in i..m {
                // lowered symbol Γ_{l,ij}
                let lowered: Vec<f64> =
                    (0..m).map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).collect();
                for k in 0..m {
                    let v: f64 = (0..m).map(|l| g_inv[(k, l)] * lowered[l]).sum();
                    data[k * per + packed(i, j, m)] = v;
                }
            }
        }
        Christoffels { dim: m, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        let per = self.dim * (self.dim + 1) / 2;
        self.data[k * per + packed(i, j, self.dim)]
    }

    /// `Γ^k_ij x^i y^j`.
    pub fn contract(&self, x: &Vector, y: &Vector) -> Vector {
        let m = self.dim;
        Vector::from_fn(m, |k, _| {
            let mut s = 0.0;
            for i in 0..m {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// Local metric data at a point.
#[derive(Debug, Clone)]
pub struct LocalMetric {
    pub point: Vector,
    pub g: Matrix,
    pub g_inv: Matrix,
    /// `dg[i] = ∂_i g`.
    pub dg: Vec<Matrix>,
    /// Cholesky factor, `g = L Lᵀ`.
    pub lower: Matrix,
    pub christoffels: Christoffels,
}

impl LocalMetric {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        linalg::inner(&self.g, x, y)
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        linalg::norm(&self.g, x)
    }

    /// Directional derivative of the metric, `∂_X g`.
    pub fn metric_derivative(&self, x: &Vector) -> Matrix {
        let m = self.dim();
        let mut out = Matrix::zeros(m, m);
        for (i, d) in self.dg.iter().enumerate() {
            out += d * x[i];
        }
        out
    }

    /// g-orthonormal frame obtained from the Cholesky factor: the columns of
    /// `L⁻ᵀ`.
    pub fn orthonormal_frame(&self) -> Vec<Vector> {
        let m = self.dim();
        let lt_inv = self
            .lower
            .transpose()
            .try_inverse()
            .expect("Cholesky factor of a positive definite metric is invertible");
        (0..m).map(|i| lt_inv.column(i).into_owned()).collect()
    }

    /// `(∇_X V)^k = X^i ∂_i V^k + Γ^k_ij X^i V^j` at this point.
    pub fn covariant_derivative(&self, field: &FieldJet, direction: &Vector) -> Vector {
        &field.jacobian * direction + self.christoffels.contract(direction, &field.value)
    }
}

/// Value and coordinate Jacobian of a vector field at a point:
/// `jacobian[(k, i)] = ∂_i V^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub value: Vector,
    pub jacobian: Matrix,
}

impl FieldJet {
    pub fn constant(value: Vector) -> Self {
        let m = value.len();
        FieldJet { value, jacobian: Matrix::zeros(m, m) }
    }

    /// Derivative along `x`, `∂_X V`.
    pub fn derivative(&self, x: &Vector) -> Vector {
        &self.jacobian * x
    }
}

/// A vector field on a chart.
#[derive(Debug, Clone)]
pub enum VectorFieldSpec {
    /// Components given by expressions.
    Components(Vec<ScalarField>),
    /// Constant coefficients in the chart's coordinate frame.
    Constant(Vector),
    /// Precomputed one-jet at the evaluation point; produced by the
    /// projector extensions of the submersion module.
    Jet(FieldJet),
}

impl VectorFieldSpec {
    pub fn jet_at(&self, p: &Vector) -> Result<FieldJet> {
        match self {
            VectorFieldSpec::Constant(v) => Ok(FieldJet::constant(v.clone())),
            VectorFieldSpec::Jet(j) => Ok(j.clone()),
            VectorFieldSpec::Components(fs) => {
                let m = p.len();
                if fs.len() != m {
                    return Err(Error::Dimension { expected: m, found: fs.len() });
                }
                let mut value = Vector::zeros(m);
                let mut jacobian = Matrix::zeros(m, m);
                for (k, f) in fs.iter().enumerate() {
                    let jet = f.eval_jet2(p.as_slice())?;
                    value[k] = jet.value();
                    for (i, d) in jet.grad().iter().enumerate() {
                        jacobian[(k, i)] = *d;
                    }
                }
                Ok(FieldJet { value, jacobian })
            }
        }
    }
}

/// `∇_X V` at `p` for the Levi-Civita connection of `chart`.
pub fn covariant_derivative(
    chart: &Chart,
    field: &VectorFieldSpec,
    direction: &Vector,
    p: &Vector,
    tol: &Tolerances,
) -> Result<Vector> {
    let local = chart.local(p, tol)?;
    let jet = field.jet_at(p)?;
    Ok(local.covariant_derivative(&jet, direction))
}

/// Coordinate Lie bracket `[X, Y] = ∂_X Y − ∂_Y X`.
pub fn bracket(x: &FieldJet, y: &FieldJet) -> Vector {
    y.derivative(&x.value) - x.derivative(&y.value)
}

/// Almost Hermitian chart: a Riemannian chart of even dimension with a
/// complex structure field `J^i_j`.
#[derive(Debug, Clone)]
pub struct HermitianChart {
    chart: Chart,
    j: Vec<ScalarField>,
}

impl HermitianChart {
    /// `j_rows[i][k]` is `J^i_k`.
    pub fn new(chart: Chart, j_rows: Vec<Vec<ScalarField>>) -> Result<Self> {
        let m = chart.dim();
        if m % 2 != 0 {
            return Err(Error::InstanceInconsistent(format!(
                "almost Hermitian chart needs even dimension, got {m}"
            )));
        }
        if j_rows.len() != m || j_rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension { expected: m, found: j_rows.len() });
        }
        Ok(HermitianChart { chart, j: j_rows.into_iter().flatten().collect() })
    }

    /// Euclidean metric with `J∂_{2k-1} = ∂_{2k}`, `J∂_{2k} = −∂_{2k-1}`.
    pub fn standard_flat(coords: Vec<String>) -> Result<Self> {
        let chart = Chart::euclidean(coords.clone());
        let m = coords.len();
        let j = standard_complex_structure(m);
        let rows = (0..m)
            .map(|i| (0..m).map(|k| ScalarField::constant(j[(i, k)], &coords)).collect())
            .collect();
        HermitianChart::new(chart, rows)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn j_at(&self, p: &Vector) -> Result<Matrix> {
        let m = self.dim();
        let mut out = Matrix::zeros(m, m);
        for i in 0..m {
            for k in 0..m {
                out[(i, k)] = self.j[i * m + k].eval_real(p.as_slice())?;
            }
        }
        Ok(out)
    }

    pub fn local(&self, p: &Vector, tol: &Tolerances) -> Result<LocalHermitian> {
        let metric = self.chart.local(p, tol)?;
        let m = self.dim();
        let mut j = Matrix::zeros(m, m);
        let mut dj = vec![Matrix::zeros(m, m); m];
        for i in 0..m {
            for k in 0..m {
                let jet = self.j[i * m + k].eval_jet2(p.as_slice())?;
                j[(i, k)] = jet.value();
                for (l, d) in jet.grad().iter().enumerate() {
                    dj[l][(i, k)] = *d;
                }
            }
        }
        Ok(LocalHermitian { metric, j, dj })
    }
}

/// Standard complex structure on `R^m` (m even) in the sign convention
/// `J∂_1 = ∂_2`.
pub fn standard_complex_structure(m: usize) -> Matrix {
    let mut j = Matrix::zeros(m, m);
    for k in (0..m).step_by(2) {
        j[(k + 1, k)] = 1.0;
        j[(k, k + 1)] = -1.0;
    }
    j
}

/// Local data of an almost Hermitian chart at a point.
#[derive(Debug, Clone)]
pub struct LocalHermitian {
    pub metric: LocalMetric,
    pub j: Matrix,
    /// `dj[i] = ∂_i J`.
    pub dj: Vec<Matrix>,
}

impl LocalHermitian {
    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn j_derivative(&self, x: &Vector) -> Matrix {
        let m = self.dim();
        let mut out = Matrix::zeros(m, m);
        for (i, d) in self.dj.iter().enumerate() {
            out += d * x[i];
        }
        out
    }

    /// `(∇_X J)Y = ∇_X(JY) − J∇_X Y` with constant-coefficient extensions
    /// of `X` and `Y`.
    pub fn nabla_j(&self, x: &Vector, y: &Vector) -> Vector {
        let jy = FieldJet {
            value: &self.j * y,
            jacobian: Matrix::from_columns(&self.dj.iter().map(|d| d * y).collect::<Vec<_>>()),
        };
        let lhs = self.metric.covariant_derivative(&jy, x);
        let nabla_y = self.metric.christoffels.contract(x, y);
        lhs - &self.j * nabla_y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn names(n: usize, stem: &str) -> Vec<String> {
        (1..=n).map(|i| format!("{stem}{i}")).collect()
    }

    fn conformal_chart(m: usize) -> Chart {
        let coords = names(m, "x");
        let b = BTreeMap::new();
        let rows = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        ScalarField::parse(if i == j { "exp(2*x1)" } else { "0" }, &coords, &b).unwrap()
                    })
                    .collect()
            })
            .collect();
        Chart::from_rows(coords, rows).unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn flat_christoffels_vanish() {
        let c = Chart::euclidean(names(4, "x"));
        let g = c.christoffel(&v(&[0.3, 1.0, -2.0, 5.0]), &Tolerances::default()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn conformal_christoffels_at_origin() {
        // g = e^{2 x1} δ: Γ^k_ij = δ^k_i δ_j1 + δ^k_j δ_i1 − δ_ij δ^k1
        let c = conformal_chart(4);
        let g = c.christoffel(&v(&[0.0; 4]), &Tolerances::default()).unwrap();
        let expected = |k: usize, i: usize, j: usize| -> f64 {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            d(k, i) * d(j, 0) + d(k, j) * d(i, 0) - d(i, j) * d(k, 0)
        };
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert!((g.get(k, i, j) - expected(k, i, j)).abs() < 1e-15, "Γ^{k}_{i}{j}");
                }
            }
        }
        assert_eq!(g.get(0, 0, 0), 1.0);
        assert_eq!(g.get(0, 1, 1), -1.0);
        assert_eq!(g.get(1, 0, 1), 1.0);
        assert_eq!(g.get(0, 2, 2), -1.0);
    }

    #[test]
    fn conformal_christoffels_match_finite_differences() {
        // oracle: central differences of the metric values, plugged into the
        // Levi-Civita formula
        let c = conformal_chart(4);
        let p = v(&[0.2, -0.1, 0.4, 0.3]);
        let tol = Tolerances::default();
        let h = 1e-5;
        let dg: Vec<Matrix> = (0..4)
            .map(|i| {
                let mut a = p.clone();
                let mut b = p.clone();
                a[i] += h;
                b[i] -= h;
                (c.metric_at(&a).unwrap() - c.metric_at(&b).unwrap()) / (2.0 * h)
            })
            .collect();
        let g_inv = c.metric_at(&p).unwrap().try_inverse().unwrap();
        let gam = c.christoffel(&p, &tol).unwrap();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let fd: f64 = (0..4)
                        .map(|l| 0.5 * g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum();
                    assert!((fd - gam.get(k, i, j)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn sphere_chart() {
        let coords = names(2, "x");
        let b = BTreeMap::new();
        let f = |s: &str| ScalarField::parse(s, &coords, &b).unwrap();
        let chart = Chart::from_rows(coords.clone(), vec![vec![f("1"), f("0")], vec![f("0"), f("sin(x1)^2")]]).unwrap();
        let tol = Tolerances::default();
        let g = chart.christoffel(&v(&[std::f64::consts::FRAC_PI_2, 0.0]), &tol).unwrap();
        assert!(g.get(0, 1, 1).abs() < 1e-15);
        let q = v(&[0.7, 0.0]);
        let g = chart.christoffel(&q, &tol).unwrap();
        assert!((g.get(0, 1, 1) + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-14);
        assert!((g.get(1, 0, 1) - 0.7f64.cos() / 0.7f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn covariant_derivative_examples() {
        let tol = Tolerances::default();
        let coords = names(4, "x");
        let flat = Chart::euclidean(coords.clone());
        let p = v(&[1.0, 2.0, 3.0, 4.0]);
        let c = VectorFieldSpec::Constant(v(&[1.0, -1.0, 0.5, 2.0]));
        assert_eq!(covariant_derivative(&flat, &c, &v(&[0.3, 0.1, 0.0, 1.0]), &p, &tol).unwrap().norm(), 0.0);

        let b = BTreeMap::new();
        let f = |s: &str| ScalarField::parse(s, &coords, &b).unwrap();
        let x2 = VectorFieldSpec::Components(vec![f("x2"), f("0"), f("0"), f("0")]);
        let d = covariant_derivative(&flat, &x2, &linalg::basis_vector(4, 1), &p, &tol).unwrap();
        assert_eq!(d, v(&[1.0, 0.0, 0.0, 0.0]));

        let conf = conformal_chart(4);
        let e1 = linalg::basis_vector(4, 0);
        let d = covariant_derivative(&conf, &VectorFieldSpec::Constant(e1.clone()), &e1, &v(&[0.0; 4]), &tol)
            .unwrap();
        assert!((d - v(&[1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn singular_metric_rejected() {
        let coords = names(2, "x");
        let b = BTreeMap::new();
        let f = |s: &str| ScalarField::parse(s, &coords, &b).unwrap();
        let chart = Chart::from_rows(coords.clone(), vec![vec![f("1"), f("1")], vec![f("1"), f("1")]]).unwrap();
        assert!(matches!(chart.local(&v(&[0.0, 0.0]), &Tolerances::default()), Err(Error::NotPositiveDefinite { .. })));
        let chart = Chart::from_rows(coords.clone(), vec![vec![f("1"), f("0")], vec![f("0"), f("1e-13")]]).unwrap();
        let tol = Tolerances { pd: 1e-20, ..Tolerances::default() };
        assert!(matches!(chart.local(&v(&[0.0, 0.0]), &tol), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn frame_is_orthonormal() {
        let conf = conformal_chart(4);
        let local = conf.local(&v(&[0.4, 0.0, 0.0, 0.0]), &Tolerances::default()).unwrap();
        let frame = local.orthonormal_frame();
        let gm = linalg::gram(&local.g, &frame);
        assert!((gm - Matrix::identity(4, 4)).abs().max() < 1e-14);
    }

    #[test]
    fn conformal_kaehler_defect() {
        // (∇_X J)Y for g = e^{2 x1}δ with standard J: X = Y = ∂3 gives ∂2 at 0,
        // while X = ∂1, Y = ∂3 gives 0.
        let coords = names(4, "x");
        let j = standard_complex_structure(4);
        let rows = (0..4)
            .map(|i| (0..4).map(|k| ScalarField::constant(j[(i, k)], &coords)).collect())
            .collect();
        let h = HermitianChart::new(conformal_chart(4), rows).unwrap();
        let local = h.local(&v(&[0.0; 4]), &Tolerances::default()).unwrap();
        let e = |i| linalg::basis_vector(4, i);
        let r = local.nabla_j(&e(2), &e(2));
        assert!((r - e(1)).norm() < 1e-15);
        assert!(local.nabla_j(&e(0), &e(2)).norm() < 1e-15);
    }
}
