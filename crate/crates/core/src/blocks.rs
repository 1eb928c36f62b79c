//! Upper-triangular 2×2 block operators and their functional calculus.

use serde::{Deserialize, Serialize};

use crate::certifier::{spectrum_in_annulus, DEFAULT_SPECTRUM_TOL};
use crate::error::{Error, Result};
use crate::numerics::{pinv_psd, Matrix, Tolerances};
use crate::pencil::AnnulusParams;
use crate::rational::{poles_off_annulus, RationalFunction};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// `[[T, X], [0, T]]`
    Tx,
    /// `[[T1, X(T1−T2)], [0, T2]]`
    Hat,
    /// `[[T1, Y], [0, T2]]`
    General,
}

/// Blocks of one operator. For [`BlockKind::Tx`] only `t1` is used; for
/// [`BlockKind::General`] the `x` field holds `Y`.
#[derive(Clone, Debug)]
pub struct BlockSpec<R: Real> {
    pub kind: BlockKind,
    pub t1: Matrix<R>,
    pub t2: Option<Matrix<R>>,
    pub x: Matrix<R>,
}

impl<R: Real> BlockSpec<R> {
    pub fn tx(t: Matrix<R>, x: Matrix<R>) -> Self {
        Self { kind: BlockKind::Tx, t1: t, t2: None, x }
    }

    pub fn hat(t1: Matrix<R>, t2: Matrix<R>, x: Matrix<R>) -> Self {
        Self { kind: BlockKind::Hat, t1, t2: Some(t2), x }
    }

    pub fn general(t1: Matrix<R>, t2: Matrix<R>, y: Matrix<R>) -> Self {
        Self { kind: BlockKind::General, t1, t2: Some(t2), x: y }
    }

    fn second(&self) -> Result<&Matrix<R>> {
        self.t2.as_ref().ok_or_else(|| Error::ContractViolation(format!("{:?} block needs T2", self.kind)))
    }
}

/// Fails unless `‖AX − XA‖ ≤ eq_tol·(1 + ‖A‖‖X‖)` (Frobenius norms).
pub fn check_commutes<R: Real>(a: &Matrix<R>, x: &Matrix<R>, tol: &Tolerances<R>, what: &str) -> Result<()> {
    let c = a.commutator_norm(x);
    let bound = tol.eq_tol * (R::one() + a.frobenius_norm() * x.frobenius_norm());
    if c > bound {
        return Err(Error::ContractViolation(format!(
            "X does not commute with {}: ‖[{}, X]‖ = {:e} > {:e}",
            what, what, c, bound
        )));
    }
    Ok(())
}

fn check_dims<R: Real>(ms: &[&Matrix<R>]) -> Result<()> {
    let n = ms[0].dim();
    if ms.iter().any(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch("all blocks must share one dimension".into()));
    }
    Ok(())
}

/// Builds the `2n×2n` operator described by `spec`.
pub fn assemble<R: Real>(spec: &BlockSpec<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
    let n = spec.t1.dim();
    let zero = Matrix::zeros(n);
    match spec.kind {
        BlockKind::Tx => {
            check_dims(&[&spec.t1, &spec.x])?;
            check_commutes(&spec.t1, &spec.x, tol, "T")?;
            Matrix::from_blocks(&spec.t1, &spec.x, &zero, &spec.t1)
        }
        BlockKind::Hat => {
            let t2 = spec.second()?;
            check_dims(&[&spec.t1, t2, &spec.x])?;
            check_commutes(&spec.t1, &spec.x, tol, "T1")?;
            check_commutes(t2, &spec.x, tol, "T2")?;
            let corner = &spec.x * &(&spec.t1 - t2);
            Matrix::from_blocks(&spec.t1, &corner, &zero, t2)
        }
        BlockKind::General => {
            let t2 = spec.second()?;
            check_dims(&[&spec.t1, t2, &spec.x])?;
            Matrix::from_blocks(&spec.t1, &spec.x, &zero, t2)
        }
    }
}

/// Least-squares solution of `Y = X(T1 − T2)`.
#[derive(Clone, Debug)]
pub struct GeneralSolve<R: Real> {
    pub x: Matrix<R>,
    /// `‖X(T1−T2) − Y‖_F / (1 + ‖Y‖_F)`.
    pub residual: R,
    /// Whether `T1 − T2` is singular at `rank_tol`.
    pub singular: bool,
}

/// Rewrites a general block as a hat block where possible:
/// `X = Y·(DᴴD)⁺·Dᴴ` with `D = T1 − T2`.
pub fn solve_general<R: Real>(t1: &Matrix<R>, t2: &Matrix<R>, y: &Matrix<R>, tol: &Tolerances<R>) -> Result<GeneralSolve<R>> {
    check_dims(&[t1, t2, y])?;
    let d = t1 - t2;
    let dh = d.adjoint();
    let gram = &dh * &d;
    let x = &(y * &pinv_psd(&gram, tol)?) * &dh;
    let residual = (&(&x * &d) - y).frobenius_norm() / (R::one() + y.frobenius_norm());
    let singular = crate::numerics::check_invertible(&d, tol).is_err();
    Ok(GeneralSolve { x, residual, singular })
}

fn check_calculus_inputs<R: Real>(ts: &[&Matrix<R>], f: &RationalFunction<R>, ap: &AnnulusParams<R>) -> Result<()> {
    if !poles_off_annulus(f, ap)? {
        return Err(Error::ContractViolation("f has a pole on the closed annulus".into()));
    }
    for t in ts {
        if !spectrum_in_annulus(t, ap, R::lit(DEFAULT_SPECTRUM_TOL))? {
            return Err(Error::ContractViolation("operator spectrum leaves the closed annulus".into()));
        }
    }
    Ok(())
}

/// `f([[T, X], [0, T]]) = [[f(T), X f′(T)], [0, f(T)]]` for `X` commuting with `T`.
pub fn fcalc_tx<R: Real>(
    t: &Matrix<R>,
    x: &Matrix<R>,
    f: &RationalFunction<R>,
    ap: &AnnulusParams<R>,
    tol: &Tolerances<R>,
) -> Result<Matrix<R>> {
    check_dims(&[t, x])?;
    check_commutes(t, x, tol, "T")?;
    check_calculus_inputs(&[t], f, ap)?;
    let ft = f.eval_matrix(t, tol)?;
    let dft = f.derivative().eval_matrix(t, tol)?;
    Matrix::from_blocks(&ft, &(x * &dft), &Matrix::zeros(t.dim()), &ft)
}

/// `f([[T1, X(T1−T2)], [0, T2]]) = [[f(T1), X(f(T1) − f(T2))], [0, f(T2)]]`.
pub fn fcalc_hat<R: Real>(
    t1: &Matrix<R>,
    t2: &Matrix<R>,
    x: &Matrix<R>,
    f: &RationalFunction<R>,
    ap: &AnnulusParams<R>,
    tol: &Tolerances<R>,
) -> Result<Matrix<R>> {
    check_dims(&[t1, t2, x])?;
    check_commutes(t1, x, tol, "T1")?;
    check_commutes(t2, x, tol, "T2")?;
    check_calculus_inputs(&[t1, t2], f, ap)?;
    let f1 = f.eval_matrix(t1, tol)?;
    let f2 = f.eval_matrix(t2, tol)?;
    Matrix::from_blocks(&f1, &(x * &(&f1 - &f2)), &Matrix::zeros(t1.dim()), &f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Polynomial;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn t_sample() -> Matrix<f64> {
        Matrix::new(2, vec![c(0.7, 0.1), c(0.2, 0.0), c(0.0, 0.0), c(-0.6, 0.3)]).unwrap()
    }

    #[test]
    fn tx_with_zero_x_is_block_diagonal() {
        let t = t_sample();
        let big = assemble(&BlockSpec::tx(t.clone(), Matrix::zeros(2)), &tol()).unwrap();
        assert_eq!(big.block(0, 1), Matrix::zeros(2));
        assert_eq!(big.block(0, 0), t);
        assert_eq!(big.block(1, 1), t);
    }

    #[test]
    fn hat_with_equal_diagonals_is_block_diagonal() {
        let t = t_sample();
        let x = &t * &t;
        let big = assemble(&BlockSpec::hat(t.clone(), t.clone(), x), &tol()).unwrap();
        assert_eq!(big.block(0, 1), Matrix::zeros(2));
    }

    #[test]
    fn general_with_matching_y_equals_hat() {
        let t1 = Matrix::from_diag(&[c(0.6, 0.0), c(0.0, 0.9)]);
        let t2 = Matrix::from_diag(&[c(-0.8, 0.1), c(0.7, 0.0)]);
        let x = Matrix::from_diag(&[c(0.3, -0.2), c(1.5, 0.0)]);
        let y = &x * &(&t1 - &t2);
        let hat = assemble(&BlockSpec::hat(t1.clone(), t2.clone(), x), &tol()).unwrap();
        let gen = assemble(&BlockSpec::general(t1, t2, y), &tol()).unwrap();
        assert_eq!(hat, gen);
    }

    #[test]
    fn commutation_and_dimension_errors() {
        let t = t_sample();
        let x = Matrix::new(2, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(assemble(&BlockSpec::tx(t.clone(), x), &tol()), Err(Error::ContractViolation(_))));
        assert!(matches!(
            assemble(&BlockSpec::tx(t, Matrix::zeros(3)), &tol()),
            Err(Error::DimensionMismatch(_))
        ));
        let missing = BlockSpec { kind: BlockKind::Hat, t1: t_sample(), t2: None, x: Matrix::zeros(2) };
        assert!(assemble(&missing, &tol()).is_err());
    }

    #[test]
    fn identity_function_reproduces_blocks() {
        let ap = AnnulusParams::new(0.5).unwrap();
        let id = RationalFunction::polynomial(Polynomial::identity());
        let t = t_sample();
        let x = (&t * &t).scale(c(0.5, 0.0));
        let got = fcalc_tx(&t, &x, &id, &ap, &tol()).unwrap();
        let want = assemble(&BlockSpec::tx(t.clone(), x.clone()), &tol()).unwrap();
        assert!((&got - &want).frobenius_norm() < 1e-14);

        let t2 = Matrix::from_diag(&[c(0.55, 0.0), c(0.0, -0.9)]);
        let t1 = Matrix::from_diag(&[c(0.8, 0.0), c(0.6, 0.0)]);
        let xd = Matrix::from_diag(&[c(2.0, 0.0), c(-1.0, 1.0)]);
        let got = fcalc_hat(&t1, &t2, &xd, &id, &ap, &tol()).unwrap();
        let want = assemble(&BlockSpec::hat(t1, t2, xd), &tol()).unwrap();
        assert!((&got - &want).frobenius_norm() < 1e-14);
    }

    #[test]
    fn square_has_corner_two_xt() {
        let ap = AnnulusParams::new(0.5).unwrap();
        let sq = RationalFunction::polynomial(Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
        let t = t_sample();
        let x = &t + &Matrix::identity(2);
        let got = fcalc_tx(&t, &x, &sq, &ap, &tol()).unwrap();
        let want = (&x * &t).scale(c(2.0, 0.0));
        assert!((&got.block(0, 1) - &want).frobenius_norm() < 1e-14);
    }

    #[test]
    fn equal_diagonals_give_block_diagonal_calculus() {
        let ap = AnnulusParams::new(0.5).unwrap();
        let f = RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = t_sample();
        let got = fcalc_hat(&t, &t, &Matrix::identity(2), &f, &ap, &tol()).unwrap();
        assert_eq!(got.block(0, 1), Matrix::zeros(2));
        assert_eq!(got.block(0, 0), got.block(1, 1));
    }

    #[test]
    fn pole_inside_annulus_is_contract_error() {
        let ap = AnnulusParams::new(0.5).unwrap();
        let f = RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(-0.75, 0.0), c(1.0, 0.0)]).unwrap();
        let t = t_sample();
        assert!(matches!(fcalc_tx(&t, &Matrix::zeros(2), &f, &ap, &tol()), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn general_solve_recovers_x_when_invertible() {
        let t1 = Matrix::from_diag(&[c(0.6, 0.0), c(0.0, 0.9)]);
        let t2 = Matrix::from_diag(&[c(-0.8, 0.1), c(0.7, 0.0)]);
        let x = Matrix::from_diag(&[c(0.3, -0.2), c(1.5, 0.0)]);
        let y = &x * &(&t1 - &t2);
        let s = solve_general(&t1, &t2, &y, &tol()).unwrap();
        assert!(!s.singular);
        assert!(s.residual < 1e-12);
        assert!((&s.x - &x).frobenius_norm() < 1e-12);
    }

    #[test]
    fn general_solve_reports_singular_difference() {
        let t1 = Matrix::from_diag(&[c(0.6, 0.0), c(0.9, 0.0)]);
        let t2 = Matrix::from_diag(&[c(0.6, 0.0), c(0.7, 0.0)]);
        let y = Matrix::identity(2);
        let s = solve_general(&t1, &t2, &y, &tol()).unwrap();
        assert!(s.singular);
        assert!(s.residual > 0.1);
    }
}
