use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, C};

/// Desk-scale guard on the dimension of user-supplied operators.
pub const DEFAULT_DIM_CAP: usize = 64;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<R: Real> {
    n: usize,
    data: Vec<C<R>>,
}

impl<R: Real> Matrix<R> {
    /// Builds an `n×n` matrix from row-major entries.
    pub fn new(n: usize, data: Vec<C<R>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n={}, got {}",
                n * n,
                n,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![czero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { cone() } else { czero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<R>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_diag(d: &[C<R>]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { czero() })
    }

    pub fn from_real_diag(d: &[R]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { C::new(d[i], R::zero()) } else { czero() })
    }

    /// `z·I`.
    pub fn scalar(n: usize, z: C<R>) -> Self {
        Self::from_fn(n, |i, j| if i == j { z } else { czero() })
    }

    /// Converts from a matrix over another real type.
    pub fn cast<S: Real>(other: &Matrix<S>) -> Self {
        Self {
            n: other.n,
            data: other
                .data
                .iter()
                .map(|z| C::new(R::lit(z.re.to_f64_lossy()), R::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[C<R>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C<R>> {
        self.data
    }

    /// Rejects dimensions above `cap`.
    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.n > cap {
            return Err(Error::Domain(format!("dimension {} exceeds cap {}", self.n, cap)));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn diagonal(&self) -> Vec<C<R>> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = R::lit(0.5);
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn scale(&self, z: C<R>) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a * z).collect() }
    }

    pub fn scale_real(&self, x: R) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a * x).collect() }
    }

    /// `self += z·other`.
    pub fn axpy(&mut self, z: C<R>, other: &Self) {
        assert_eq!(self.n, other.n, "axpy dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * z;
        }
    }

    pub fn frobenius_norm(&self) -> R {
        self.data.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt()
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().map(|z| z.norm()).fold(R::zero(), R::max)
    }

    /// `‖AB − BA‖_F`.
    pub fn commutator_norm(&self, other: &Self) -> R {
        (&(self * other) - &(other * self)).frobenius_norm()
    }

    /// Assembles `[[a, b], [c, d]]` from four `n×n` blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        let n = a.n;
        if [b.n, c.n, d.n].iter().any(|&m| m != n) {
            return Err(Error::DimensionMismatch("blocks must share a dimension".into()));
        }
        Ok(Self::from_fn(2 * n, |i, j| {
            let blk = match (i < n, j < n) {
                (true, true) => a,
                (true, false) => b,
                (false, true) => c,
                (false, false) => d,
            };
            blk[(i % n, j % n)]
        }))
    }

    /// Quadrant `(bi, bj)` of a `2n×2n` matrix, each index in `{0, 1}`.
    pub fn block(&self, bi: usize, bj: usize) -> Self {
        assert!(self.n % 2 == 0 && bi < 2 && bj < 2, "block() needs an even dimension");
        let h = self.n / 2;
        Self::from_fn(h, |i, j| self[(bi * h + i, bj * h + j)])
    }

    /// `A·x` for a column vector.
    pub fn mul_vec(&self, x: &[C<R>]) -> Vec<C<R>> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(czero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

impl<R: Real> Index<(usize, usize)> for Matrix<R> {
    type Output = C<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<R> {
        &self.data[i * self.n + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for Matrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<R> {
        &mut self.data[i * self.n + j]
    }
}

impl<'a, R: Real> Mul<&'a Matrix<R>> for &'a Matrix<R> {
    type Output = Matrix<R>;
    fn mul(self, rhs: &'a Matrix<R>) -> Matrix<R> {
        assert_eq!(self.n, rhs.n, "matrix product dimension mismatch");
        let n = self.n;
        let mut out = vec![czero(); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == R::zero() && a.im == R::zero() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Matrix { n, data: out }
    }
}

impl<'a, R: Real> Add<&'a Matrix<R>> for &'a Matrix<R> {
    type Output = Matrix<R>;
    fn add(self, rhs: &'a Matrix<R>) -> Matrix<R> {
        assert_eq!(self.n, rhs.n, "matrix sum dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<'a, R: Real> Sub<&'a Matrix<R>> for &'a Matrix<R> {
    type Output = Matrix<R>;
    fn sub(self, rhs: &'a Matrix<R>) -> Matrix<R> {
        assert_eq!(self.n, rhs.n, "matrix difference dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<'a, R: Real> Neg for &'a Matrix<R> {
    type Output = Matrix<R>;
    fn neg(self) -> Matrix<R> {
        Matrix { n: self.n, data: self.data.iter().map(|&a| -a).collect() }
    }
}

impl<R: Real> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:>12.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(Matrix::<f64>::new(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(Matrix::<f64>::new(0, vec![]).is_err());
        let mut d = vec![Complex64::new(1.0, 0.0); 4];
        d[2] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(Matrix::new(2, d), Err(Error::Domain(_))));
    }

    #[test]
    fn blocks_round_trip() {
        let a = Matrix::<f64>::from_fn(2, |i, j| Complex64::new(i as f64, j as f64));
        let z = Matrix::zeros(2);
        let i2 = Matrix::identity(2);
        let big = Matrix::from_blocks(&a, &i2, &z, &a).unwrap();
        assert_eq!(big.dim(), 4);
        assert_eq!(big.block(0, 0), a);
        assert_eq!(big.block(0, 1), i2);
        assert_eq!(big.block(1, 0), z);
        assert_eq!(big.block(1, 1), a);
    }

    #[test]
    fn product_against_hand_computation() {
        let i = Complex64::i();
        let a = Matrix::new(2, vec![1.0.into(), i, 0.0.into(), 2.0.into()]).unwrap();
        let b = Matrix::new(2, vec![0.0.into(), 1.0.into(), i, 0.0.into()]).unwrap();
        let p = &a * &b;
        assert_eq!(p[(0, 0)], i * i);
        assert_eq!(p[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(p[(1, 0)], i * 2.0);
        assert_eq!(p[(1, 1)], Complex64::new(0.0, 0.0));
    }
}
