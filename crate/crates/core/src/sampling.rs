//! Deterministic sampling: shifted Halton points over a box, and seeded
//! random streams keyed by `(seed, stream name, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Axis-aligned box in coordinate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Region {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::Dimension { expected: min.len(), found: max.len() });
        }
        if min.iter().zip(&max).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::manifest("region", "every min must be finite and ≤ max"));
        }
        Ok(Region { min, max })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Region { min: vec![lo; dim], max: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.min.iter().zip(&self.max)).all(|(x, (a, b))| a <= x && x <= b)
    }
}

/// Radical inverse of `index` in base `base`.
fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while index > 0 {
        out += (index % u64::from(base)) as f64 * inv;
        index /= u64::from(base);
        inv /= b;
    }
    out
}

/// FNV-1a, used to turn stream names into seed material.
fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent random stream for `(seed, name, index)`.
pub fn stream(seed: u64, name: &str, index: usize) -> ChaCha8Rng {
    let key = splitmix(seed ^ splitmix(fnv1a(name) ^ splitmix(index as u64)));
    ChaCha8Rng::seed_from_u64(key)
}

/// `count` Halton points in `region`, shifted modulo 1 by a seed-derived
/// offset per axis (Cranley–Patterson rotation).
pub fn halton_points(region: &Region, count: usize, seed: u64) -> Vec<Vector> {
    let dim = region.dim();
    assert!(dim <= PRIMES.len(), "Halton sampling supports up to {} dimensions", PRIMES.len());
    let mut rng = stream(seed, "halton-shift", 0);
    let shift: Vec<f64> = (0..dim).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    (0..count)
        .map(|k| {
            Vector::from_iterator(
                dim,
                (0..dim).map(|d| {
                    let u = (radical_inverse(k as u64 + 1, PRIMES[d]) + shift[d]).fract();
                    region.min[d] + u * (region.max[d] - region.min[d])
                }),
            )
        })
        .collect()
}

/// Standard normal coefficients.
pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)))
}

/// Random combination of `basis` with standard normal coefficients.
pub fn random_combination(rng: &mut ChaCha8Rng, basis: &[Vector], dim: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    for b in basis {
        let c: f64 = StandardNormal.sample(rng);
        v += b * c;
    }
    v
}
