//! The annulus pencil `Γ_ε(z) = Σ_k c_k z^k`, a bilateral Laurent series with
//!
//! ```text
//! c_k = 2 (1−ε)^k / (1 + ((1−ε) r)^{2k})
//! ```
//!
//! Equivalently `Γ_ε(z) = 2 S_ρ((1−ε) z)` with `ρ = (1−ε) r` and
//! `S_ρ(z) = Σ z^k / (1 + ρ^{2k})`, whose real part is non-negative on
//! `ρ ≤ |z| ≤ 1`. Hence `Re Γ_ε ≥ 0` on the closed annulus `r ≤ |z| ≤ 1`,
//! and an operator is an annulus contraction exactly when this positivity
//! survives the functional calculus.
//!
//! The series is evaluated at scalars and matrices by summing both tails
//! until a geometric tail bound falls under `tail_tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, inverse, Matrix, Tolerances};
use crate::scalar::{cone, czero, Real, C};

/// Inner radius of the annulus `r < |z| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusParams<R> {
    pub r: R,
}

impl<R: Real> AnnulusParams<R> {
    pub fn new(r: R) -> Result<Self> {
        if !(r > R::zero() && r < R::one()) {
            return Err(Error::Domain(format!("inner radius must satisfy 0 < r < 1, got {}", r)));
        }
        Ok(Self { r })
    }
}

/// One `(ε, α)` sample of the pencil family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilPoint<R: Real> {
    pub eps: R,
    pub alpha: C<R>,
}

impl<R: Real> PencilPoint<R> {
    pub fn new(eps: R, alpha: C<R>) -> Result<Self> {
        if !(eps > R::zero() && eps < R::one()) {
            return Err(Error::Domain(format!("ε must lie in (0, 1), got {}", eps)));
        }
        let unit_slack = R::lit(1e-12).max(R::epsilon() * R::lit(8.0));
        if (alpha.norm() - R::one()).abs() > unit_slack {
            return Err(Error::Domain(format!("α must be unimodular, |α| = {}", alpha.norm())));
        }
        Ok(Self { eps, alpha })
    }
}

/// Controls how far each side of the bilateral sum is carried.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan<R> {
    /// Cap on the index summed on each side.
    pub n_max: usize,
    /// Target for the estimated tail relative to `1 + ‖partial sum‖`.
    pub tail_tol: R,
    /// When false, exactly `n_max` terms are summed on each side.
    pub adaptive: bool,
}

impl<R: Real> Default for TruncationPlan<R> {
    fn default() -> Self {
        Self {
            n_max: 8192,
            tail_tol: R::lit(1e-12).max(R::epsilon() * R::lit(16.0)),
            adaptive: true,
        }
    }
}

impl<R: Real> TruncationPlan<R> {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 8 {
            return Err(Error::Domain(format!("n_max must be at least 8, got {}", self.n_max)));
        }
        if !(self.tail_tol > R::zero()) {
            return Err(Error::Domain("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Laurent coefficient `c_k` of the pencil.
pub fn gamma_coeff<R: Real>(k: i64, eps: R, r: R) -> Result<R> {
    if !(eps > R::zero() && eps < R::one()) {
        return Err(Error::Domain(format!("ε must lie in (0, 1), got {}", eps)));
    }
    if !(r > R::zero() && r < R::one()) {
        return Err(Error::Domain(format!("r must lie in (0, 1), got {}", r)));
    }
    Ok(coeff_unchecked(k, eps, r))
}

#[inline]
fn coeff_unchecked<R: Real>(k: i64, eps: R, r: R) -> R {
    let t = R::one() - eps;
    let two = R::lit(2.0);
    let m = k.unsigned_abs() as i32;
    if k >= 0 {
        two * t.powi(m) / (R::one() + (t * r).powi(2 * m))
    } else {
        // multiply through by ((1−ε) r)^{2m} to stay finite
        two * (t * r * r).powi(m) / (R::one() + (t * r).powi(2 * m))
    }
}

/// `c_{±1}, c_{±2}, …` by running products.
struct CoeffSeq<R> {
    num: R,
    num_step: R,
    den: R,
    den_step: R,
}

impl<R: Real> CoeffSeq<R> {
    fn positive(eps: R, r: R) -> Self {
        let t = R::one() - eps;
        Self { num: R::lit(2.0), num_step: t, den: R::one(), den_step: (t * r) * (t * r) }
    }

    fn negative(eps: R, r: R) -> Self {
        let t = R::one() - eps;
        Self { num: R::lit(2.0), num_step: t * r * r, den: R::one(), den_step: (t * r) * (t * r) }
    }

    fn next(&mut self) -> R {
        self.num *= self.num_step;
        self.den *= self.den_step;
        self.num / (R::one() + self.den)
    }
}

/// Result of a truncated series together with the number of terms used.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSum<T> {
    pub value: T,
    /// Largest index reached on either side.
    pub terms: usize,
}

/// Pencil value and its `z`-derivative at a matrix, see [`PencilEvaluator`].
#[derive(Clone, Debug)]
pub struct PencilValue<R: Real> {
    /// `Γ_ε(αT)`.
    pub gamma: Matrix<R>,
    /// `d/dz Γ_ε(αz)` at `z = T`, i.e. `Σ k c_k α^k T^{k−1}`.
    pub derivative: Matrix<R>,
    pub terms: usize,
}

/// Stops a one-sided sum after three consecutive terms whose size and
/// geometric tail estimate both sit under `tail_tol·(1 + ‖acc‖)`.
struct TailMonitor<R> {
    tol: R,
    streak: usize,
    prev: Option<R>,
}

impl<R: Real> TailMonitor<R> {
    fn new(tol: R) -> Self {
        Self { tol, streak: 0, prev: None }
    }

    fn push(&mut self, term: R, acc: R) -> bool {
        let bound = self.tol * (R::one() + acc);
        let tail = match self.prev {
            Some(p) if p > R::zero() => {
                let rho = term / p;
                if rho < R::one() {
                    term * rho / (R::one() - rho)
                } else {
                    R::infinity()
                }
            }
            _ => term,
        };
        self.prev = Some(term);
        if term <= bound && tail <= bound {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= 3
    }
}

fn band_check<R: Real>(modulus: R, eps: R, r: R, what: &str) -> Result<()> {
    let t = R::one() - eps;
    let slack = R::lit(1e-9);
    let lo = t * r * (R::one() - slack);
    let hi = (R::one() + slack) / t;
    if modulus < lo || modulus > hi {
        return Err(Error::Domain(format!(
            "{} modulus {} outside the convergence band [{}, {}]",
            what, modulus, lo, hi
        )));
    }
    Ok(())
}

/// `Γ_ε(αz)` at a scalar `z`.
pub fn gamma_scalar<R: Real>(
    z: C<R>,
    pt: &PencilPoint<R>,
    ap: &AnnulusParams<R>,
    plan: &TruncationPlan<R>,
) -> Result<SeriesSum<C<R>>> {
    let (v, _, terms) = scalar_series(z, pt, ap, plan, false)?;
    Ok(SeriesSum { value: v, terms })
}

/// `Γ_ε(αz)` together with `d/dz Γ_ε(αz)`.
pub fn gamma_scalar_with_derivative<R: Real>(
    z: C<R>,
    pt: &PencilPoint<R>,
    ap: &AnnulusParams<R>,
    plan: &TruncationPlan<R>,
) -> Result<(C<R>, C<R>, usize)> {
    scalar_series(z, pt, ap, plan, true)
}

fn scalar_series<R: Real>(
    z: C<R>,
    pt: &PencilPoint<R>,
    ap: &AnnulusParams<R>,
    plan: &TruncationPlan<R>,
    with_derivative: bool,
) -> Result<(C<R>, C<R>, usize)> {
    plan.validate()?;
    let u = pt.alpha * z;
    band_check(u.norm(), pt.eps, ap.r, "argument")?;
    let (eps, r) = (pt.eps, ap.r);

    let mut val: C<R> = cone();
    let mut der: C<R> = czero();
    let mut used = 0usize;

    // k > 0
    let mut mon = TailMonitor::new(plan.tail_tol);
    let mut pow_prev: C<R> = cone();
    let mut done = false;
    let mut coeffs = CoeffSeq::positive(eps, r);
    for k in 1..=plan.n_max {
        let c = coeffs.next();
        let pow = pow_prev * u;
        let term = pow * c;
        val += term;
        let mut size = term.norm();
        if with_derivative {
            let dterm = pt.alpha * pow_prev * (c * R::lit(k as f64));
            der += dterm;
            size = size.max(dterm.norm());
        }
        pow_prev = pow;
        used = used.max(k);
        if plan.adaptive && mon.push(size, val.norm().max(der.norm())) {
            done = true;
            break;
        }
    }
    if plan.adaptive && !done {
        return Err(Error::Truncation(format!("positive tail above {:e} at n_max={}", plan.tail_tol, plan.n_max)));
    }

    // k < 0
    let uinv = cone::<R>() / u;
    let mut mon = TailMonitor::new(plan.tail_tol);
    let mut pow: C<R> = uinv;
    done = false;
    let mut coeffs = CoeffSeq::negative(eps, r);
    for m in 1..=plan.n_max {
        let c = coeffs.next();
        let term = pow * c;
        let next = pow * uinv;
        val += term;
        let mut size = term.norm();
        if with_derivative {
            let dterm = pt.alpha * next * (-c * R::lit(m as f64));
            der += dterm;
            size = size.max(dterm.norm());
        }
        pow = next;
        used = used.max(m);
        if plan.adaptive && mon.push(size, val.norm().max(der.norm())) {
            done = true;
            break;
        }
    }
    if plan.adaptive && !done {
        return Err(Error::Truncation(format!("negative tail above {:e} at n_max={}", plan.tail_tol, plan.n_max)));
    }
    if !(val.re.is_finite() && val.im.is_finite() && der.re.is_finite() && der.im.is_finite()) {
        return Err(Error::Truncation("pencil series overflowed".into()));
    }
    Ok((val, der, used))
}

/// Evaluates the pencil at one matrix for many `(ε, α)`.
///
/// Construction checks invertibility and caches `T⁻¹` and the spectrum, so
/// grid sweeps pay for them once.
#[derive(Clone, Debug)]
pub struct PencilEvaluator<R: Real> {
    t: Matrix<R>,
    t_inv: Matrix<R>,
    spectral_moduli: (R, R),
    ap: AnnulusParams<R>,
    plan: TruncationPlan<R>,
}

impl<R: Real> PencilEvaluator<R> {
    pub fn new(t: &Matrix<R>, ap: AnnulusParams<R>, plan: TruncationPlan<R>, tol: &Tolerances<R>) -> Result<Self> {
        plan.validate()?;
        let t_inv = inverse(t, tol)?;
        let (lo, hi) = eigenvalues(t)?
            .iter()
            .fold((R::infinity(), R::zero()), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm())));
        Ok(Self { t: t.clone(), t_inv, spectral_moduli: (lo, hi), ap, plan })
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    /// `Γ_ε(αT)` and `Σ k c_k α^k T^{k−1}`.
    pub fn eval(&self, pt: &PencilPoint<R>) -> Result<PencilValue<R>> {
        band_check(self.spectral_moduli.0, pt.eps, self.ap.r, "smallest eigenvalue")?;
        band_check(self.spectral_moduli.1, pt.eps, self.ap.r, "largest eigenvalue")?;
        let n = self.t.dim();
        let (eps, r, alpha) = (pt.eps, self.ap.r, pt.alpha);
        let plan = &self.plan;

        let at = self.t.scale(alpha);
        let at_inv = self.t_inv.scale(cone::<R>() / alpha);

        let mut gamma = Matrix::identity(n);
        let mut der = Matrix::zeros(n);
        let mut used = 0usize;

        let mut mon = TailMonitor::new(plan.tail_tol);
        let mut prev = Matrix::identity(n);
        let mut done = false;
        let mut coeffs = CoeffSeq::positive(eps, r);
        for k in 1..=plan.n_max {
            let c = coeffs.next();
            let pow = &prev * &at;
            let dc = alpha * (c * R::lit(k as f64));
            gamma.axpy(C::new(c, R::zero()), &pow);
            der.axpy(dc, &prev);
            let tn = c * pow.frobenius_norm();
            let dn = dc.norm() * prev.frobenius_norm();
            prev = pow;
            used = used.max(k);
            if !(tn.is_finite() && dn.is_finite()) {
                return Err(Error::Truncation(format!("positive powers overflowed at k={}", k)));
            }
            if plan.adaptive && mon.push(tn.max(dn), gamma.frobenius_norm().max(der.frobenius_norm())) {
                done = true;
                break;
            }
        }
        if plan.adaptive && !done {
            return Err(Error::Truncation(format!(
                "positive tail did not fall below {:e} within n_max={} (non-normal growth?)",
                plan.tail_tol, plan.n_max
            )));
        }

        let mut mon = TailMonitor::new(plan.tail_tol);
        let mut pow = at_inv.clone();
        done = false;
        let mut coeffs = CoeffSeq::negative(eps, r);
        for m in 1..=plan.n_max {
            let c = coeffs.next();
            let next = &pow * &at_inv;
            let dc = -alpha * (c * R::lit(m as f64));
            gamma.axpy(C::new(c, R::zero()), &pow);
            der.axpy(dc, &next);
            let tn = c * pow.frobenius_norm();
            let dn = dc.norm() * next.frobenius_norm();
            pow = next;
            used = used.max(m);
            if !(tn.is_finite() && dn.is_finite()) {
                return Err(Error::Truncation(format!("negative powers overflowed at k=-{}", m)));
            }
            if plan.adaptive && mon.push(tn.max(dn), gamma.frobenius_norm().max(der.frobenius_norm())) {
                done = true;
                break;
            }
        }
        if plan.adaptive && !done {
            return Err(Error::Truncation(format!(
                "negative tail did not fall below {:e} within n_max={} (non-normal growth?)",
                plan.tail_tol, plan.n_max
            )));
        }
        Ok(PencilValue { gamma, derivative: der, terms: used })
    }
}

/// `Γ_ε(αT)`.
pub fn gamma_matrix<R: Real>(
    t: &Matrix<R>,
    pt: &PencilPoint<R>,
    ap: &AnnulusParams<R>,
    plan: &TruncationPlan<R>,
    tol: &Tolerances<R>,
) -> Result<SeriesSum<Matrix<R>>> {
    let v = PencilEvaluator::new(t, *ap, *plan, tol)?.eval(pt)?;
    Ok(SeriesSum { value: v.gamma, terms: v.terms })
}

/// `d/dz Γ_ε(αz)` evaluated at `z = T`.
pub fn gamma_derivative_matrix<R: Real>(
    t: &Matrix<R>,
    pt: &PencilPoint<R>,
    ap: &AnnulusParams<R>,
    plan: &TruncationPlan<R>,
    tol: &Tolerances<R>,
) -> Result<SeriesSum<Matrix<R>>> {
    let v = PencilEvaluator::new(t, *ap, *plan, tol)?.eval(pt)?;
    Ok(SeriesSum { value: v.derivative, terms: v.terms })
}

/// `(A + A*)/2`.
pub fn re_part<R: Real>(a: &Matrix<R>) -> Matrix<R> {
    a.hermitian_part()
}
