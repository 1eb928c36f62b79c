//! Kernel threshold for `[[w, h], [0, w]]`, and its pencil counterpart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certifier::{certify_ar, CertifyConfig, PencilGrid, Verdict};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Tolerances};
use crate::pencil::{AnnulusParams, TruncationPlan};
use crate::scalar::{unit_phase, Real, C};

/// Tail target of [`misra_threshold`].
pub const KERNEL_TAIL_TOL: f64 = 1e-12;
const KERNEL_MAX_TRUNC: usize = 1 << 24;
/// Default absolute resolution of [`threshold_via_pencil`].
pub const DEFAULT_SEARCH_TOL: f64 = 1e-4;

/// Truncated kernel diagonal with a bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue<R> {
    pub value: R,
    pub tail: R,
    pub n_trunc: usize,
}

fn check_open_annulus<R: Real>(w: C<R>, r: R) -> Result<R> {
    AnnulusParams::new(r)?;
    let m = w.norm();
    if !(m > r && m < R::one()) {
        return Err(Error::Domain(format!("need r < |w| < 1, got |w| = {} with r = {}", m, r)));
    }
    Ok(m)
}

/// `Σ_{|n|≤n_trunc} |w|^{2n}/(1+r^{2n})`.
pub fn kernel_diag<R: Real>(w: C<R>, r: R, n_trunc: usize) -> Result<KernelValue<R>> {
    let m = check_open_annulus(w, r)?;
    if n_trunc < 8 {
        return Err(Error::Domain(format!("n_trunc must be at least 8, got {}", n_trunc)));
    }
    let one = R::one();
    let a = m * m;
    let b = (r / m) * (r / m);
    let r2 = r * r;
    let (mut pa, mut pb, mut pr) = (one, one, one);
    let mut pos = Vec::with_capacity(n_trunc);
    let mut neg = Vec::with_capacity(n_trunc);
    for _ in 0..n_trunc {
        pa *= a;
        pb *= b;
        pr *= r2;
        pos.push(pa / (one + pr));
        neg.push(pb / (one + pr));
    }
    // smallest first
    let value = pos.iter().rev().chain(neg.iter().rev()).fold(R::zero(), |s, &t| s + t) + R::lit(0.5);
    let tail = pa * a / (one - a) + pb * b / (one - b);
    Ok(KernelValue { value, tail, n_trunc })
}

/// Kernel diagonal with the truncation doubled until the tail bound is below
/// [`KERNEL_TAIL_TOL`].
pub fn kernel_diag_adaptive<R: Real>(w: C<R>, r: R) -> Result<KernelValue<R>> {
    let mut n = 64;
    loop {
        let k = kernel_diag(w, r, n)?;
        if k.tail < R::lit(KERNEL_TAIL_TOL) {
            return Ok(k);
        }
        if n >= KERNEL_MAX_TRUNC {
            return Err(Error::Truncation(format!("kernel tail {} after {} terms", k.tail, n)));
        }
        n *= 2;
    }
}

/// `1 / K̂_r(w, w)`.
pub fn misra_threshold<R: Real>(w: C<R>, r: R) -> Result<R> {
    Ok(R::one() / kernel_diag_adaptive(w, r)?.value)
}

/// `[[w, h], [0, w]]`.
pub fn misra_block<R: Real>(w: C<R>, h: C<R>) -> Matrix<R> {
    Matrix::new(2, vec![w, h, C::new(R::zero(), R::zero()), w]).expect("2×2 block")
}

fn certified_at<R: Real>(w: C<R>, h: R, ap: &AnnulusParams<R>, cfg: &CertifyConfig<R>) -> Result<bool> {
    let cert = certify_ar(&misra_block(w, C::new(h, R::zero())), ap, cfg)?;
    match cert.verdict {
        Verdict::Certified => Ok(true),
        Verdict::Refuted => Ok(false),
        Verdict::Inconclusive => Err(Error::NumericalFailure(format!(
            "certificate inconclusive at h = {}: {}",
            h,
            cert.diagnostics.join("; ")
        ))),
    }
}

/// Largest `|h|` in `[0, 2]` for which `[[w, h], [0, w]]` is certified,
/// located by bisection to `search_tol`.
pub fn threshold_via_pencil<R: Real>(
    w: C<R>,
    r: R,
    grid: &PencilGrid<R>,
    plan: &TruncationPlan<R>,
    search_tol: R,
) -> Result<R> {
    check_open_annulus(w, r)?;
    if !(search_tol > R::zero()) {
        return Err(Error::Domain("search_tol must be positive".into()));
    }
    let ap = AnnulusParams::new(r)?;
    let cfg = CertifyConfig { grid: grid.clone(), plan: *plan, tol: Tolerances::default(), ..CertifyConfig::default() };
    let two = R::lit(2.0);
    if !certified_at(w, R::zero(), &ap, &cfg)? {
        return Err(Error::NumericalFailure("h = 0 is not certified".into()));
    }
    if certified_at(w, two, &ap, &cfg)? {
        return Err(Error::NumericalFailure("no flip inside [0, 2]".into()));
    }
    let (mut lo, mut hi) = (R::zero(), two);
    while hi - lo > search_tol {
        let mid = (lo + hi) / two;
        if certified_at(w, mid, &ap, &cfg)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let below = [R::lit(0.5), R::lit(0.9)].iter().all(|&s| certified_at(w, lo * s, &ap, &cfg).unwrap_or(false));
    let above = !certified_at(w, (hi * R::lit(1.1)).min(two), &ap, &cfg).unwrap_or(true);
    if !(below && above) {
        return Err(Error::NumericalFailure(format!("verdict is not monotone in |h| near {}", lo)));
    }
    Ok((lo + hi) / two)
}

/// One row of a threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<R: Real> {
    pub w: C<R>,
    pub r: R,
    pub threshold_kernel: R,
    pub threshold_pencil: R,
    pub rel_gap: R,
}

/// `samples` moduli equally spaced on `[r + 0.05, 0.95]`.
pub fn sweep_radii<R: Real>(r: R, samples: usize) -> Result<Vec<R>> {
    let (a, b) = (r + R::lit(0.05), R::lit(0.95));
    if samples == 0 || !(a < b) {
        return Err(Error::Domain(format!("empty sweep for r = {} and {} samples", r, samples)));
    }
    if samples == 1 {
        return Ok(vec![(a + b) / R::lit(2.0)]);
    }
    let step = (b - a) / R::lit((samples - 1) as f64);
    Ok((0..samples).map(|i| a + step * R::lit(i as f64)).collect())
}

/// Both thresholds at [`sweep_radii`] with seeded random arguments.
pub fn sweep<R: Real>(
    r: R,
    samples: usize,
    seed: u64,
    grid: &PencilGrid<R>,
    plan: &TruncationPlan<R>,
    search_tol: R,
) -> Result<Vec<SweepRow<R>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws: Vec<C<R>> = sweep_radii(r, samples)?
        .into_iter()
        .map(|m| unit_phase(R::lit(rng.gen_range(0.0..std::f64::consts::TAU))) * m)
        .collect();
    ws.into_par_iter()
        .map(|w| {
            let threshold_kernel = misra_threshold(w, r)?;
            let threshold_pencil = threshold_via_pencil(w, r, grid, plan, search_tol)?;
            let rel_gap = (threshold_pencil - threshold_kernel).abs() / threshold_kernel;
            Ok(SweepRow { w, r, threshold_kernel, threshold_pencil, rel_gap })
        })
        .collect()
}
