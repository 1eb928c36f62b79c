#![allow(dead_code)]

use annulus_core::numerics::{eigenvalues, Matrix};
use annulus_core::Complex64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rpow(x: &BigRational, k: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..k {
        out *= x;
    }
    out
}

/// Sums exact rational terms in fixed point with `bits` fractional bits.
pub struct FixedSum {
    acc: BigInt,
    scale: BigInt,
}

impl FixedSum {
    pub fn new(bits: u32) -> Self {
        Self { acc: BigInt::zero(), scale: BigInt::one() << bits }
    }

    pub fn add(&mut self, term: &BigRational) {
        let scaled = term * BigRational::from_integer(self.scale.clone());
        self.acc += scaled.to_integer();
    }

    pub fn to_f64(&self) -> f64 {
        BigRational::new(self.acc.clone(), self.scale.clone()).to_f64().unwrap()
    }
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn spectrum_union_distance(block: &Matrix<f64>, parts: &[&Matrix<f64>]) -> f64 {
    let got = eigenvalues(block).unwrap();
    let want: Vec<Complex64> = parts.iter().flat_map(|m| eigenvalues(m).unwrap()).collect();
    multiset_distance(&got, &want)
}

/// `Σ a_k T^k`.
pub fn poly_in(t: &Matrix<f64>, coeffs: &[Complex64]) -> Matrix<f64> {
    let mut acc = Matrix::zeros(t.dim());
    for &a in coeffs.iter().rev() {
        acc = &(&acc * t) + &Matrix::scalar(t.dim(), a);
    }
    acc
}
