//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// `xᵀ G y`.
pub fn inner(g: &Matrix, x: &Vector, y: &Vector) -> f64 {
    (g * y).dot(x)
}

pub fn norm(g: &Matrix, x: &Vector) -> f64 {
    inner(g, x, x).max(0.0).sqrt()
}

pub fn basis_vector(dim: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Flip the sign so that the entry of largest magnitude (first one on ties)
/// is positive.
pub fn sign_fix(v: &mut Vector) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.len() > 0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Extreme eigenvalues of a symmetric matrix, `(min, max)`.
pub fn eigen_range(a: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Sorted (ascending) eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Right singular pairs of an `n×m` matrix with `n ≤ m`, sorted by ascending
/// singular value. The matrix is padded with zero rows so that the full set
/// of `m` right singular vectors (including the null space) is returned.
pub fn right_singular_pairs(a: &Matrix) -> Vec<(f64, Vector)> {
    let (n, m) = a.shape();
    let mut padded = Matrix::zeros(m.max(n), m);
    padded.view_mut((0, 0), (n, m)).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut pairs: Vec<(f64, Vector)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, s)| (*s, vt.row(k).transpose()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Modified Gram–Schmidt against the inner product `g`. Vectors whose
/// remainder has norm below `tol` are dropped.
pub fn gram_schmidt(g: &Matrix, vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            let c = inner(g, e, &w);
            w -= e * c;
        }
        let n = norm(g, &w);
        if n > tol {
            out.push(w / n);
        }
    }
    out
}

/// Gram matrix `[g(a_i, a_j)]`.
pub fn gram(g: &Matrix, vectors: &[Vector]) -> Matrix {
    let k = vectors.len();
    Matrix::from_fn(k, k, |i, j| inner(g, &vectors[i], &vectors[j]))
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
