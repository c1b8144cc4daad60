use std::ops::{Add, Mul, Neg, Sub};

/// Truncated second-order Taylor jet of a scalar function of `m` variables:
/// value, gradient and Hessian at a point. The Hessian is stored as its
/// packed upper triangle, so it is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(index: usize, value: f64, dim: usize) -> Self {
        let mut j = Jet2::constant(value, dim);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[packed(i, j, self.dim())]
    }

    /// Dense copy of the Hessian, row-major.
    pub fn hess_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..m).map(|i| (0..m).map(|j| self.hess(i, j)).collect()).collect()
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let m = self.dim();
        let grad: Vec<f64> = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in i..m {
                hess.push(f1 * self.hess[packed(i, j, m)] + f2 * self.grad[i] * self.grad[j]);
            }
        }
        Jet2 { value: f0, grad, hess }
    }

    pub fn scale(&self, c: f64) -> Self {
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: self.hess.iter().map(|h| c * h).collect(),
        }
    }

    /// `self / rhs`; caller guarantees `rhs.value != 0`.
    pub fn div(&self, rhs: &Jet2) -> Self {
        let m = self.dim();
        let b = rhs.value;
        let q = self.value / b;
        let grad: Vec<f64> = (0..m).map(|i| (self.grad[i] - q * rhs.grad[i]) / b).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in i..m {
                let k = packed(i, j, m);
                let cross = grad[i] * rhs.grad[j] + rhs.grad[i] * grad[j];
                hess.push((self.hess[k] - q * rhs.hess[k] - cross) / b);
            }
        }
        Jet2 { value: q, grad, hess }
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let m = self.dim();
        let (a, b) = (self.value, rhs.value);
        let grad = (0..m).map(|i| a * rhs.grad[i] + b * self.grad[i]).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in i..m {
                let k = packed(i, j, m);
                hess.push(
                    a * rhs.hess[k]
                        + b * self.hess[k]
                        + self.grad[i] * rhs.grad[j]
                        + rhs.grad[i] * self.grad[j],
                );
            }
        }
        Jet2 { value: a * b, grad, hess }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
}
