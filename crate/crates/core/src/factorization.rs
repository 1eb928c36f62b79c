//! Positive 2×2 blocks versus contractive factorisations.
//!
//! `[[P, R], [R*, Q]] ≥ 0` holds exactly when `R = P^{1/2} K Q^{1/2}` for a
//! contraction `K`. The factor is extracted with pseudo-inverses, so `K` is
//! pinned down on `ran P × ran Q`; whatever part of `R` falls outside those
//! ranges shows up in `range_defect` instead of being silently dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_min_eig, operator_norm, pinv_psd, psd_eigen, range_projector, sqrt_psd, Matrix, Tolerances};
use crate::scalar::Real;

/// Outcome of [`douglas_factor`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorResult<R: Real> {
    #[serde(skip)]
    pub k: Option<Matrix<R>>,
    pub k_norm: R,
    /// `‖P^{1/2} K Q^{1/2} − R‖ / (1 + max(‖P‖, ‖Q‖))`.
    pub residual: R,
    /// `(‖(I−Π_P)R‖ + ‖R(I−Π_Q)‖) / (1 + max(‖P‖, ‖Q‖))`.
    pub range_defect: R,
    /// Block is positive: `k_norm ≤ 1+psd_tol` and both defects `≤ eq_tol`.
    pub verdict: bool,
}

impl<R: Real> FactorResult<R> {
    pub fn factor(&self) -> &Matrix<R> {
        self.k.as_ref().expect("factor is always populated by douglas_factor")
    }
}

fn block_scale<R: Real>(p: &Matrix<R>, q: &Matrix<R>) -> Result<R> {
    Ok(R::one() + operator_norm(p)?.max(operator_norm(q)?))
}

/// Extracts `K` from given square roots `sp = P^{1/2}`, `sq = Q^{1/2}`.
fn factor_from_roots<R: Real>(
    sp: &Matrix<R>,
    sq: &Matrix<R>,
    r: &Matrix<R>,
    scale: R,
    tol: &Tolerances<R>,
) -> Result<FactorResult<R>> {
    let n = r.dim();
    let k = &(&pinv_psd(sp, tol)? * r) * &pinv_psd(sq, tol)?;
    let k_norm = operator_norm(&k)?;
    let residual = operator_norm(&(&(&(sp * &k) * sq) - r))? / scale;
    let id = Matrix::identity(n);
    let left = &id - &range_projector(sp, tol)?;
    let right = &id - &range_projector(sq, tol)?;
    let range_defect = (operator_norm(&(&left * r))? + operator_norm(&(r * &right))?) / scale;
    let verdict = k_norm <= R::one() + tol.psd_tol && residual <= tol.eq_tol && range_defect <= tol.eq_tol;
    Ok(FactorResult { k: Some(k), k_norm, residual, range_defect, verdict })
}

/// `R = P^{1/2} K Q^{1/2}` with `K = (P^{1/2})⁺ R (Q^{1/2})⁺`.
pub fn douglas_factor<R: Real>(p: &Matrix<R>, q: &Matrix<R>, r: &Matrix<R>, tol: &Tolerances<R>) -> Result<FactorResult<R>> {
    if p.dim() != q.dim() || p.dim() != r.dim() {
        return Err(Error::DimensionMismatch("P, Q, R must share one dimension".into()));
    }
    let sp = sqrt_psd(p, tol)?;
    let sq = sqrt_psd(q, tol)?;
    factor_from_roots(&sp, &sq, r, block_scale(p, q)?, tol)
}

/// Positivity of `[[P, R], [R*, Q]]` by its smallest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPsd<R> {
    pub positive: bool,
    pub margin: R,
}

pub fn block_psd_check<R: Real>(p: &Matrix<R>, q: &Matrix<R>, r: &Matrix<R>, tol: &Tolerances<R>) -> Result<BlockPsd<R>> {
    if p.dim() != q.dim() || p.dim() != r.dim() {
        return Err(Error::DimensionMismatch("P, Q, R must share one dimension".into()));
    }
    let block = Matrix::from_blocks(p, r, &r.adjoint(), q)?;
    let margin = hermitian_min_eig(&block, tol)?;
    let scale = block_scale(p, q)?;
    Ok(BlockPsd { positive: margin >= -tol.psd_tol * scale, margin })
}

/// Defect operators `D = (I − K*K)^{1/2}` and `D* = (I − KK*)^{1/2}`.
#[derive(Clone, Debug)]
pub struct DefectPair<R: Real> {
    pub d: Matrix<R>,
    pub dstar: Matrix<R>,
}

fn check_contraction<R: Real>(k: &Matrix<R>, tol: &Tolerances<R>) -> Result<()> {
    let nk = operator_norm(k)?;
    if nk > R::one() + tol.psd_tol {
        return Err(Error::Domain(format!("not a contraction: ‖K‖ = {}", nk)));
    }
    Ok(())
}

/// `(I − A)^{1/2}` for PSD `A` with spectrum in `[0, 1]`, clamping rounding.
fn complement_root<R: Real>(a: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    Ok(psd_eigen(a, tol)?.map(|l| (R::one() - l).max(R::zero()).sqrt()))
}

pub fn defects<R: Real>(k: &Matrix<R>, tol: &Tolerances<R>) -> Result<DefectPair<R>> {
    check_contraction(k, tol)?;
    let kh = k.adjoint();
    Ok(DefectPair { d: complement_root(&(&kh * k), tol)?, dstar: complement_root(&(k * &kh), tol)? })
}

/// `U = [[K, D_{K*}], [D_K, −K*]]`, unitary for any contraction `K`.
pub fn halmos_unitary<R: Real>(k: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    let dp = defects(k, tol)?;
    Matrix::from_blocks(k, &dp.dstar, &dp.d, &(-&k.adjoint()))
}

/// `[S1 0]·U·[S2; 0]`, the top-left block of `diag(S1, 0)·U·diag(S2, 0)`.
pub fn compress<R: Real>(s1: &Matrix<R>, u: &Matrix<R>, s2: &Matrix<R>) -> Result<Matrix<R>> {
    let n = s1.dim();
    if u.dim() != 2 * n || s2.dim() != n {
        return Err(Error::DimensionMismatch("compression needs n×n roots and a 2n×2n unitary".into()));
    }
    let z = Matrix::zeros(n);
    let left = Matrix::from_blocks(s1, &z, &z, &z)?;
    let right = Matrix::from_blocks(s2, &z, &z, &z)?;
    Ok((&(&left * u) * &right).block(0, 0))
}

/// Contractivity of `[[T1, X], [0, T2]]` through `X = D_{T1*} C D_{T2}`.
#[derive(Clone, Debug)]
pub struct DiskCheck<R: Real> {
    pub verdict: bool,
    pub factor: Option<FactorResult<R>>,
    /// Direct test `‖[[T1, X], [0, T2]]‖ ≤ 1 + psd_tol`.
    pub norm_verdict: bool,
    pub block_norm: R,
}

impl<R: Real> DiskCheck<R> {
    pub fn agrees(&self) -> bool {
        self.verdict == self.norm_verdict
    }
}

pub fn disk_block_check<R: Real>(t1: &Matrix<R>, t2: &Matrix<R>, x: &Matrix<R>, tol: &Tolerances<R>) -> Result<DiskCheck<R>> {
    let n = t1.dim();
    if t2.dim() != n || x.dim() != n {
        return Err(Error::DimensionMismatch("T1, T2, X must share one dimension".into()));
    }
    let block_norm = operator_norm(&Matrix::from_blocks(t1, x, &Matrix::zeros(n), t2)?)?;
    let norm_verdict = block_norm <= R::one() + tol.psd_tol;

    let bound = R::one() + tol.psd_tol;
    if operator_norm(t1)? > bound || operator_norm(t2)? > bound {
        return Ok(DiskCheck { verdict: false, factor: None, norm_verdict, block_norm });
    }
    let d1_star = defects(t1, tol)?.dstar;
    let d2 = defects(t2, tol)?.d;
    let scale = R::one() + operator_norm(&(&d1_star * &d1_star))?.max(operator_norm(&(&d2 * &d2))?);
    let fr = factor_from_roots(&d1_star, &d2, x, scale, tol)?;
    Ok(DiskCheck { verdict: fr.verdict, factor: Some(fr), norm_verdict, block_norm })
}
