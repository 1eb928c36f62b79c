//! The sampled annulus-contraction test and the block equivalence checks.
//!
//! `T` is certified when its spectrum lies in the closed annulus and
//! `λ_min(Re Γ_ε(αT)) ≥ −psd_tol·(1 + ‖Γ_ε(αT)‖)` at every grid point.
//! A certificate is only as strong as its grid; the grid and truncation plan
//! travel with it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{assemble, check_commutes, BlockSpec};
use crate::error::{Error, Result};
use crate::factorization::{compress, douglas_factor, halmos_unitary, FactorResult};
use crate::generators::random_rational_off_annulus;
use crate::numerics::{eigenvalues, hermitian_min_eig, operator_norm, sqrt_psd, Matrix, Tolerances};
use crate::pencil::{re_part, AnnulusParams, PencilEvaluator, PencilPoint, TruncationPlan};
use crate::rational::{sup_on_annulus, RationalFunction};
use crate::scalar::{unit_phase, Real, C};

/// Slack on eigenvalue moduli when testing `σ(T) ⊆ 𝔸̄_r`.
pub const DEFAULT_SPECTRUM_TOL: f64 = 1e-7;

/// Radius-independent ε ladder used by default.
pub const DEFAULT_EPS: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.02, 0.01];
pub const DEFAULT_ALPHA_COUNT: usize = 64;

/// True iff every eigenvalue satisfies `r − tol ≤ |λ| ≤ 1 + tol`.
pub fn spectrum_in_annulus<R: Real>(t: &Matrix<R>, ap: &AnnulusParams<R>, tol: R) -> Result<bool> {
    Ok(eigenvalues(t)?.iter().all(|z| {
        let m = z.norm();
        m >= ap.r - tol && m <= R::one() + tol
    }))
}

/// `ε` values crossed with `α = exp(2πi j / alpha_count)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilGrid<R> {
    pub eps_values: Vec<R>,
    pub alpha_count: usize,
}

impl<R: Real> Default for PencilGrid<R> {
    fn default() -> Self {
        Self { eps_values: DEFAULT_EPS.iter().map(|&e| R::lit(e)).collect(), alpha_count: DEFAULT_ALPHA_COUNT }
    }
}

impl<R: Real> PencilGrid<R> {
    pub fn validate(&self) -> Result<()> {
        if self.eps_values.is_empty() {
            return Err(Error::Domain("grid needs at least one ε".into()));
        }
        if let Some(e) = self.eps_values.iter().find(|&&e| !(e > R::zero() && e < R::one())) {
            return Err(Error::Domain(format!("grid ε must lie in (0, 1), got {}", e)));
        }
        if self.alpha_count < 8 {
            return Err(Error::Domain(format!("alpha_count must be at least 8, got {}", self.alpha_count)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eps_values.len() * self.alpha_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in ε-major order.
    pub fn points(&self) -> Vec<PencilPoint<R>> {
        let two_pi = R::PI() + R::PI();
        let mut out = Vec::with_capacity(self.len());
        for &eps in &self.eps_values {
            for j in 0..self.alpha_count {
                let theta = two_pi * R::lit(j as f64) / R::lit(self.alpha_count as f64);
                out.push(PencilPoint { eps, alpha: unit_phase(theta) });
            }
        }
        out
    }
}

/// Everything [`certify_ar`] needs besides the operator.
#[derive(Clone, Debug)]
pub struct CertifyConfig<R: Real> {
    pub grid: PencilGrid<R>,
    pub plan: TruncationPlan<R>,
    pub tol: Tolerances<R>,
    pub spectrum_tol: R,
}

impl<R: Real> Default for CertifyConfig<R> {
    fn default() -> Self {
        Self {
            grid: PencilGrid::default(),
            plan: TruncationPlan::default(),
            tol: Tolerances::default(),
            spectrum_tol: R::lit(DEFAULT_SPECTRUM_TOL),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// CLI exit status.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// Positivity margin at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord<R: Real> {
    pub point: PencilPoint<R>,
    /// `λ_min(Re Γ_ε(αT))`.
    pub lambda_min: R,
    /// `1 + ‖Γ_ε(αT)‖`.
    pub scale: R,
    pub trunc_n: usize,
}

impl<R: Real> PointRecord<R> {
    pub fn passes(&self, tol: &Tolerances<R>) -> bool {
        self.lambda_min >= -tol.psd_tol * self.scale
    }
}

#[derive(Clone, Debug)]
pub struct Certificate<R: Real> {
    pub verdict: Verdict,
    pub spectrum_ok: bool,
    /// Smallest `λ_min` over the evaluated points; `None` if none were evaluated.
    pub min_margin: Option<R>,
    pub worst_point: Option<PencilPoint<R>>,
    pub records: Vec<PointRecord<R>>,
    pub grid: PencilGrid<R>,
    pub plan: TruncationPlan<R>,
    pub psd_tol: R,
    pub diagnostics: Vec<String>,
}

/// Sampled decision of whether `T` is an annulus contraction.
pub fn certify_ar<R: Real>(t: &Matrix<R>, ap: &AnnulusParams<R>, cfg: &CertifyConfig<R>) -> Result<Certificate<R>> {
    cfg.grid.validate()?;
    cfg.plan.validate()?;
    cfg.tol.validate()?;
    let mut cert = Certificate {
        verdict: Verdict::Inconclusive,
        spectrum_ok: false,
        min_margin: None,
        worst_point: None,
        records: Vec::new(),
        grid: cfg.grid.clone(),
        plan: cfg.plan,
        psd_tol: cfg.tol.psd_tol,
        diagnostics: Vec::new(),
    };
    cert.spectrum_ok = spectrum_in_annulus(t, ap, cfg.spectrum_tol)?;
    if !cert.spectrum_ok {
        cert.verdict = Verdict::Refuted;
        cert.diagnostics.push("spectrum leaves the closed annulus".into());
        return Ok(cert);
    }
    let eval = match PencilEvaluator::new(t, *ap, cfg.plan, &cfg.tol) {
        Ok(e) => e,
        Err(e) => {
            cert.diagnostics.push(e.to_string());
            return Ok(cert);
        }
    };

    let outcomes: Vec<Result<PointRecord<R>>> = cfg
        .grid
        .points()
        .into_par_iter()
        .map(|pt| {
            let v = eval.eval(&pt)?;
            let lambda_min = hermitian_min_eig(&re_part(&v.gamma), &cfg.tol)?;
            let scale = R::one() + operator_norm(&v.gamma)?;
            Ok(PointRecord { point: pt, lambda_min, scale, trunc_n: v.terms })
        })
        .collect();

    let mut failed = 0usize;
    for (o, pt) in outcomes.into_iter().zip(cfg.grid.points()) {
        match o {
            Ok(rec) => cert.records.push(rec),
            Err(e) => {
                failed += 1;
                cert.diagnostics.push(format!("ε={} α=({}, {}): {}", pt.eps, pt.alpha.re, pt.alpha.im, e));
            }
        }
    }
    if let Some(worst) = cert
        .records
        .iter()
        .min_by(|a, b| a.lambda_min.partial_cmp(&b.lambda_min).unwrap_or(std::cmp::Ordering::Equal))
    {
        cert.min_margin = Some(worst.lambda_min);
        cert.worst_point = Some(worst.point);
    }
    let any_refuting = cert.records.iter().any(|r| !r.passes(&cfg.tol));
    cert.verdict = if any_refuting {
        Verdict::Refuted
    } else if failed == 0 {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    Ok(cert)
}

/// Worst von Neumann ratio found by [`vn_sample`].
#[derive(Clone, Debug)]
pub struct VnReport<R: Real> {
    pub worst_ratio: R,
    pub witness: RationalFunction<R>,
    pub count: usize,
    /// Samples with ratio above `1 + psd_tol`.
    pub violations: usize,
}

impl<R: Real> VnReport<R> {
    pub fn violated(&self) -> bool {
        self.violations > 0
    }
}

/// Samples random rational functions with poles off the annulus and returns
/// the largest `‖f(T)‖ / sup|f|`. A ratio above one disproves the annulus
/// being a spectral set for `T`; the converse is never implied.
pub fn vn_sample<R: Real>(
    t: &Matrix<R>,
    ap: &AnnulusParams<R>,
    count: usize,
    seed: u64,
    m: usize,
    tol: &Tolerances<R>,
) -> Result<VnReport<R>> {
    if count == 0 {
        return Err(Error::Domain("count must be positive".into()));
    }
    if !spectrum_in_annulus(t, ap, R::lit(DEFAULT_SPECTRUM_TOL))? {
        return Err(Error::Domain("von Neumann sampling needs σ(T) inside the closed annulus".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(R, RationalFunction<R>)> = None;
    let mut violations = 0usize;
    for _ in 0..count {
        let f = random_rational_off_annulus(&mut rng, ap);
        let sup = sup_on_annulus(&f, ap, m)?;
        let ratio = operator_norm(&f.eval_matrix(t, tol)?)? / sup;
        if ratio > R::one() + tol.psd_tol {
            violations += 1;
        }
        if best.as_ref().map_or(true, |(b, _)| ratio > *b) {
            best = Some((ratio, f));
        }
    }
    let (worst_ratio, witness) = best.expect("count > 0");
    Ok(VnReport { worst_ratio, witness, count, violations })
}

/// Agreement between a pointwise factorisation verdict and the certifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

impl Agreement {
    pub fn exit_code(self) -> i32 {
        match self {
            Agreement::Agree => 0,
            Agreement::Disagree => 1,
            Agreement::Inconclusive => 2,
        }
    }
}

/// Factorisation at one grid point.
#[derive(Clone, Debug)]
pub struct EquivalencePoint<R: Real> {
    pub point: PencilPoint<R>,
    pub factor: FactorResult<R>,
    /// `λ_min` of the assembled block's pencil at the same point.
    pub block_margin: Option<R>,
    /// `‖[S1 0]·U·[S2; 0] − R‖ / (1 + ‖R‖)` at passing points.
    pub reconstruction: Option<R>,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport<R: Real> {
    pub points: Vec<EquivalencePoint<R>>,
    /// Every grid point admits a contractive factor.
    pub factor_verdict: bool,
    pub certificate: Certificate<R>,
    pub agreement: Agreement,
    /// Points where the factor verdict and the block margin disagree.
    pub pointwise_disagreements: usize,
}

fn reconstruction_residual<R: Real>(
    s1: &Matrix<R>,
    s2: &Matrix<R>,
    fr: &FactorResult<R>,
    target: &Matrix<R>,
    tol: &Tolerances<R>,
) -> Result<R> {
    let u = halmos_unitary(fr.factor(), tol)?;
    let rebuilt = compress(s1, &u, s2)?;
    Ok(operator_norm(&(&rebuilt - target))? / (R::one() + operator_norm(target)?))
}

fn finish_report<R: Real>(points: Vec<EquivalencePoint<R>>, certificate: Certificate<R>, tol: &Tolerances<R>) -> EquivalenceReport<R> {
    let factor_verdict = points.iter().all(|p| p.factor.verdict);
    let mut pointwise_disagreements = 0;
    let mut points = points;
    for (p, rec) in points.iter_mut().zip(&certificate.records) {
        p.block_margin = Some(rec.lambda_min);
        if p.factor.verdict != rec.passes(tol) {
            pointwise_disagreements += 1;
        }
    }
    let agreement = match certificate.verdict {
        Verdict::Inconclusive => Agreement::Inconclusive,
        v if (v == Verdict::Certified) == factor_verdict => Agreement::Agree,
        _ => Agreement::Disagree,
    };
    EquivalenceReport { points, factor_verdict, certificate, agreement, pointwise_disagreements }
}

/// For `T_X = [[T, X], [0, T]]`: at each grid point factor
/// `X·Γ′/2 = (Re Γ)^{1/2} K (Re Γ)^{1/2}` and compare the all-points verdict
/// with [`certify_ar`] on `T_X`.
pub fn check_thm_block1<R: Real>(
    t: &Matrix<R>,
    x: &Matrix<R>,
    ap: &AnnulusParams<R>,
    cfg: &CertifyConfig<R>,
) -> Result<EquivalenceReport<R>> {
    check_commutes(t, x, &cfg.tol, "T")?;
    cfg.grid.validate()?;
    let eval = PencilEvaluator::new(t, *ap, cfg.plan, &cfg.tol)?;
    let half = C::new(R::lit(0.5), R::zero());
    let points = cfg
        .grid
        .points()
        .into_par_iter()
        .map(|pt| {
            let v = eval.eval(&pt)?;
            let p = re_part(&v.gamma);
            let r = (x * &v.derivative).scale(half);
            let factor = douglas_factor(&p, &p, &r, &cfg.tol)?;
            let reconstruction = if factor.verdict {
                let s = sqrt_psd(&p, &cfg.tol)?;
                Some(reconstruction_residual(&s, &s, &factor, &r, &cfg.tol)?)
            } else {
                None
            };
            Ok(EquivalencePoint { point: pt, factor, block_margin: None, reconstruction })
        })
        .collect::<Result<Vec<_>>>()?;
    let tx = assemble(&BlockSpec::tx(t.clone(), x.clone()), &cfg.tol)?;
    let certificate = certify_ar(&tx, ap, cfg)?;
    Ok(finish_report(points, certificate, &cfg.tol))
}

/// For `T̂_X = [[T1, X(T1−T2)], [0, T2]]`: factor
/// `X(Γ(αT1) − Γ(αT2))/2 = (Re Γ(αT1))^{1/2} K (Re Γ(αT2))^{1/2}` pointwise
/// and compare with [`certify_ar`] on `T̂_X`.
pub fn check_thm_block2<R: Real>(
    t1: &Matrix<R>,
    t2: &Matrix<R>,
    x: &Matrix<R>,
    ap: &AnnulusParams<R>,
    cfg: &CertifyConfig<R>,
) -> Result<EquivalenceReport<R>> {
    check_commutes(t1, x, &cfg.tol, "T1")?;
    check_commutes(t2, x, &cfg.tol, "T2")?;
    cfg.grid.validate()?;
    let e1 = PencilEvaluator::new(t1, *ap, cfg.plan, &cfg.tol)?;
    let e2 = PencilEvaluator::new(t2, *ap, cfg.plan, &cfg.tol)?;
    let half = C::new(R::lit(0.5), R::zero());
    let points = cfg
        .grid
        .points()
        .into_par_iter()
        .map(|pt| {
            let g1 = e1.eval(&pt)?.gamma;
            let g2 = e2.eval(&pt)?.gamma;
            let p = re_part(&g1);
            let q = re_part(&g2);
            let r = (x * &(&g1 - &g2)).scale(half);
            let factor = douglas_factor(&p, &q, &r, &cfg.tol)?;
            let reconstruction = if factor.verdict {
                let s1 = sqrt_psd(&p, &cfg.tol)?;
                let s2 = sqrt_psd(&q, &cfg.tol)?;
                Some(reconstruction_residual(&s1, &s2, &factor, &r, &cfg.tol)?)
            } else {
                None
            };
            Ok(EquivalencePoint { point: pt, factor, block_margin: None, reconstruction })
        })
        .collect::<Result<Vec<_>>>()?;
    let hat = assemble(&BlockSpec::hat(t1.clone(), t2.clone(), x.clone()), &cfg.tol)?;
    let certificate = certify_ar(&hat, ap, cfg)?;
    Ok(finish_report(points, certificate, &cfg.tol))
}
