use serde::{Deserialize, Serialize};

use super::eigen::{hermitian_eigen, singular_values, HermitianEigen};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

/// Relative slacks shared by every check in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<R> {
    /// PSD slack: `λ_min ≥ −psd_tol·(1+‖H‖)` counts as positive.
    pub psd_tol: R,
    /// Equality slack for residuals and Hermitian checks.
    pub eq_tol: R,
    /// Singular values below `rank_tol·σ_max` are treated as zero.
    pub rank_tol: R,
}

impl<R: Real> Default for Tolerances<R> {
    fn default() -> Self {
        Self {
            psd_tol: R::lit(R::DEFAULT_PSD_TOL),
            eq_tol: R::lit(R::DEFAULT_EQ_TOL),
            rank_tol: R::lit(R::DEFAULT_RANK_TOL),
        }
    }
}

impl<R: Real> Tolerances<R> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("psd_tol", self.psd_tol), ("eq_tol", self.eq_tol), ("rank_tol", self.rank_tol)] {
            if !(v > R::zero() && v < R::one()) {
                return Err(Error::Domain(format!("{} must lie in (0, 1), got {}", name, v)));
            }
        }
        Ok(())
    }
}

/// Largest singular value.
pub fn operator_norm<R: Real>(a: &Matrix<R>) -> Result<R> {
    Ok(singular_values(a)?[0])
}

fn check_hermitian<R: Real>(h: &Matrix<R>, tol: &Tolerances<R>, what: &str) -> Result<()> {
    let skew = (h - &h.adjoint()).frobenius_norm();
    let scale = R::one() + h.frobenius_norm();
    if skew > tol.eq_tol * scale {
        return Err(Error::ContractViolation(format!(
            "{} is not Hermitian: ‖H − H*‖ = {:e} exceeds {:e}",
            what,
            skew,
            tol.eq_tol * scale
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part `(H + H*)/2`.
///
/// Inputs farther than `eq_tol·(1+‖H‖)` from Hermitian are rejected so that a
/// caller cannot silently test the wrong operator.
pub fn hermitian_min_eig<R: Real>(h: &Matrix<R>, tol: &Tolerances<R>) -> Result<R> {
    check_hermitian(h, tol, "input")?;
    Ok(hermitian_eigen(h)?.min())
}

/// Eigen-decomposition of a Hermitian PSD matrix, with small negative
/// eigenvalues (inside the PSD slack) clamped to zero.
pub fn psd_eigen<R: Real>(h: &Matrix<R>, tol: &Tolerances<R>) -> Result<HermitianEigen<R>> {
    check_hermitian(h, tol, "PSD input")?;
    let mut eig = hermitian_eigen(h)?;
    let norm = eig.values.iter().fold(R::zero(), |m, v| m.max(v.abs()));
    let floor = -tol.psd_tol * (R::one() + norm);
    if eig.min() < floor {
        return Err(Error::Domain(format!(
            "matrix is not positive semidefinite: λ_min = {:e} < {:e}",
            eig.min(),
            floor
        )));
    }
    for v in eig.values.iter_mut() {
        if *v < R::zero() {
            *v = R::zero();
        }
    }
    Ok(eig)
}

/// Positive square root of a Hermitian PSD matrix.
pub fn sqrt_psd<R: Real>(h: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    Ok(psd_eigen(h, tol)?.map(|l| l.sqrt()))
}

/// Eigenvalue cutoff below which a PSD eigenvalue counts as zero.
fn rank_cutoff<R: Real>(eig: &HermitianEigen<R>, tol: &Tolerances<R>) -> R {
    tol.rank_tol * eig.max().max(R::zero())
}

/// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix.
pub fn pinv_psd<R: Real>(s: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    let eig = psd_eigen(s, tol)?;
    let cut = rank_cutoff(&eig, tol);
    Ok(eig.map(|l| if l > cut && l > R::zero() { R::one() / l } else { R::zero() }))
}

/// Orthogonal projector onto the range of a Hermitian PSD matrix.
pub fn range_projector<R: Real>(s: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    let eig = psd_eigen(s, tol)?;
    let cut = rank_cutoff(&eig, tol);
    Ok(eig.map(|l| if l > cut && l > R::zero() { R::one() } else { R::zero() }))
}

/// `S⁺·B` for Hermitian PSD `S`.
pub fn pinv_apply<R: Real>(s: &Matrix<R>, b: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    if s.dim() != b.dim() {
        return Err(Error::DimensionMismatch("pinv_apply operands differ in size".into()));
    }
    Ok(&pinv_psd(s, tol)? * b)
}

/// Fails with [`Error::Singular`] unless `σ_min > rank_tol·σ_max`.
pub fn check_invertible<R: Real>(a: &Matrix<R>, tol: &Tolerances<R>) -> Result<()> {
    let sv = singular_values(a)?;
    let smax = sv[0];
    let smin = *sv.last().expect("non-empty");
    if !(smin > tol.rank_tol * smax) {
        return Err(Error::Singular(format!("σ_min = {:e}, σ_max = {:e}", smin, smax)));
    }
    Ok(())
}

/// Inverse via LU with partial pivoting, after a singular-value check.
pub fn inverse<R: Real>(a: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    check_invertible(a, tol)?;
    lu_inverse(a)
}

fn lu_inverse<R: Real>(a: &Matrix<R>) -> Result<Matrix<R>> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, R::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == R::zero() {
            return Err(Error::Singular("zero pivot in LU".into()));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            perm.swap(k, piv);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            if f.re == R::zero() && f.im == R::zero() {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    let mut inv = Matrix::zeros(n);
    let mut col = vec![czero::<R>(); n];
    for c in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == c { C::new(R::one(), R::zero()) } else { czero() };
        }
        for i in 0..n {
            let mut s = col[i];
            for j in 0..i {
                s -= lu[(i, j)] * col[j];
            }
            col[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for j in i + 1..n {
                s -= lu[(i, j)] * col[j];
            }
            col[i] = s / lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, c)] = col[i];
        }
    }
    Ok(inv)
}

/// `A^k` for any integer `k`; negative powers go through the inverse.
pub fn int_power<R: Real>(a: &Matrix<R>, k: i64, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    let base = if k < 0 { inverse(a, tol)? } else { a.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = Matrix::identity(a.dim());
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    Ok(acc)
}
