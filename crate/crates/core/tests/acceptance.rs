//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use annulus_core::blocks::{assemble, fcalc_hat, fcalc_tx, BlockSpec};
use annulus_core::certifier::{
    certify_ar, check_thm_block1, check_thm_block2, vn_sample, Agreement, CertifyConfig, PencilGrid, Verdict,
};
use annulus_core::factorization::{block_psd_check, defects, disk_block_check, douglas_factor, halmos_unitary};
use annulus_core::generators::{
    ginibre, random_commuting_pair, random_contraction, random_normal_annulus, random_psd,
    random_rational_off_annulus,
};
use annulus_core::misra::{misra_block, misra_threshold, sweep, DEFAULT_SEARCH_TOL};
use annulus_core::numerics::{operator_norm, sqrt_psd, Matrix};
use annulus_core::pencil::{gamma_scalar, AnnulusParams, PencilPoint, TruncationPlan};
use annulus_core::{Complex64, Tolerances};
use common::*;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

fn ap(r: f64) -> AnnulusParams<f64> {
    AnnulusParams::new(r).unwrap()
}

fn radius(i: u64) -> f64 {
    if i % 2 == 0 {
        0.3
    } else {
        0.5
    }
}

fn random_w(r: f64, seed: u64) -> Complex64 {
    let mut g = rng(seed);
    let m = g.gen_range(r + 0.05..0.95);
    Complex64::from_polar(m, g.gen_range(0.0..std::f64::consts::TAU))
}

const FACTORS: [f64; 4] = [0.5, 0.9, 1.1, 1.5];

fn misra_cross_validation() -> Outcome {
    let start = Instant::now();
    let grid = PencilGrid::default();
    let plan = TruncationPlan::default();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut rows = 0;
    for r in [0.3, 0.5] {
        match sweep(r, 10, 0, &grid, &plan, DEFAULT_SEARCH_TOL) {
            Ok(v) => {
                for row in v {
                    rows += 1;
                    worst = worst.max(row.rel_gap);
                    println!(
                        "    r={} |w|={:.4} kernel={:.6} pencil={:.6} gap={:+.4}",
                        r,
                        row.w.norm(),
                        row.threshold_kernel,
                        row.threshold_pencil,
                        (row.threshold_pencil - row.threshold_kernel) / row.threshold_kernel
                    );
                }
            }
            Err(e) => failures.push(format!("r={}: {}", r, e)),
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: failures.is_empty() && rows == 20 && worst <= 0.01 && elapsed < Duration::from_secs(300),
        detail: format!(
            "{} rows, worst relative gap {:.4} (limit 0.01), {:.1}s (limit 300s){}",
            rows,
            worst,
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!(", errors: {}", failures.join("; ")) }
        ),
    }
}

fn theorem_block1_equivalence() -> Outcome {
    let cfg = CertifyConfig::default();
    let (mut disagree, mut certified, mut bad_knorm, mut pointwise) = (0, 0, 0, 0);
    for i in 0..25u64 {
        let r = radius(i);
        let w = random_w(r, 1000 + i);
        let h = FACTORS[i as usize % 4] * misra_threshold(w, r).unwrap();
        let rep = check_thm_block1(&Matrix::scalar(1, w), &Matrix::scalar(1, c(h, 0.0)), &ap(r), &cfg).unwrap();
        if rep.agreement != Agreement::Agree {
            disagree += 1;
        }
        pointwise += rep.pointwise_disagreements;
        if rep.certificate.verdict == Verdict::Certified {
            certified += 1;
            bad_knorm += rep.points.iter().filter(|p| p.factor.k_norm > 1.0 + 1e-8).count();
        }
    }
    Outcome {
        pass: disagree == 0 && bad_knorm == 0,
        detail: format!(
            "25 instances ({} certified), {} disagreements, {} certified points with k_norm > 1+1e-8, {} pointwise mismatches",
            certified, disagree, bad_knorm, pointwise
        ),
    }
}

fn hat_flip_scale(t1: &Matrix<f64>, t2: &Matrix<f64>, x: &Matrix<f64>, a: &AnnulusParams<f64>, cfg: &CertifyConfig<f64>) -> Option<f64> {
    let certified = |s: f64| {
        let m = assemble(&BlockSpec::hat(t1.clone(), t2.clone(), x.scale_real(s)), &tol()).unwrap();
        certify_ar(&m, a, cfg).unwrap().verdict == Verdict::Certified
    };
    let mut hi = 1.0;
    while certified(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if certified(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn theorem_block2_equivalence() -> Outcome {
    let cfg = CertifyConfig::default();
    let (mut disagree, mut certified, mut worst_rec, mut used, mut skipped) = (0, 0, 0.0f64, 0, 0);
    let mut seed = 0u64;
    while used < 25 {
        seed += 1;
        let r = radius(seed);
        let a = ap(r);
        let (t1, t2, x) = random_commuting_pair::<f64>(1 + seed as usize % 3, &a, 5000 + seed);
        let Some(s) = hat_flip_scale(&t1, &t2, &x, &a, &cfg) else {
            skipped += 1;
            continue;
        };
        let x = x.scale_real(FACTORS[used % 4] * s);
        used += 1;
        let rep = check_thm_block2(&t1, &t2, &x, &a, &cfg).unwrap();
        if rep.agreement != Agreement::Agree {
            disagree += 1;
        }
        if rep.certificate.verdict == Verdict::Certified {
            certified += 1;
        }
        for p in &rep.points {
            if let Some(res) = p.reconstruction {
                worst_rec = worst_rec.max(res);
            }
        }
    }
    Outcome {
        pass: disagree == 0 && worst_rec <= 1e-8,
        detail: format!(
            "25 instances ({} certified, {} triples without a flip skipped), {} disagreements, worst reconstruction residual {:.2e} (limit 1e-8)",
            certified, skipped, disagree, worst_rec
        ),
    }
}

fn rel_gap(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    operator_norm(&(a - b)).unwrap() / (1.0 + operator_norm(b).unwrap())
}

fn lemma_functional_calculus() -> Outcome {
    let (mut worst_tx, mut worst_hat, mut worst_conj) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100u64 {
        let a = ap(radius(i));
        let mut g = rng(7000 + i);
        let n = 1 + i as usize % 4;
        let t: Matrix<f64> = random_normal_annulus(n, &a, 7000 + i);
        let coeffs: Vec<Complex64> = (0..3).map(|_| c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
        let x = poly_in(&t, &coeffs);
        let f = random_rational_off_annulus(&mut g, &a);
        let lemma = fcalc_tx(&t, &x, &f, &a, &tol()).unwrap();
        let direct = f.eval_matrix(&assemble(&BlockSpec::tx(t, x), &tol()).unwrap(), &tol()).unwrap();
        worst_tx = worst_tx.max(rel_gap(&lemma, &direct));

        let d = |g: &mut rand_chacha::ChaCha8Rng| -> Vec<Complex64> {
            (0..n)
                .map(|_| Complex64::from_polar(g.gen_range(a.r..=1.0), g.gen_range(0.0..std::f64::consts::TAU)))
                .collect()
        };
        let t1 = Matrix::from_diag(&d(&mut g));
        let t2 = Matrix::from_diag(&d(&mut g));
        let xd: Vec<Complex64> = (0..n).map(|_| c(g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0))).collect();
        let x = Matrix::from_diag(&xd);
        let lemma = fcalc_hat(&t1, &t2, &x, &f, &a, &tol()).unwrap();
        let direct = f.eval_matrix(&assemble(&BlockSpec::hat(t1, t2, x), &tol()).unwrap(), &tol()).unwrap();
        worst_hat = worst_hat.max(rel_gap(&lemma, &direct));
    }
    for i in 0..20u64 {
        let a = ap(radius(i));
        let (t1, t2, x) = random_commuting_pair::<f64>(1 + i as usize % 4, &a, 8000 + i);
        let f = random_rational_off_annulus(&mut rng(8100 + i), &a);
        let lemma = fcalc_hat(&t1, &t2, &x, &f, &a, &tol()).unwrap();
        let direct = f.eval_matrix(&assemble(&BlockSpec::hat(t1, t2, x), &tol()).unwrap(), &tol()).unwrap();
        worst_conj = worst_conj.max(rel_gap(&lemma, &direct));
    }
    let worst = worst_tx.max(worst_hat).max(worst_conj);
    Outcome {
        pass: worst <= 1e-8,
        detail: format!(
            "worst relative gap: tx {:.2e} (100), hat diagonal {:.2e} (100), hat conjugated {:.2e} (20); limit 1e-8",
            worst_tx, worst_hat, worst_conj
        ),
    }
}

fn theorem23_and_disk_equivalence() -> Outcome {
    let t = tol();
    let (mut agree23, mut worst_res23) = (0, 0.0f64);
    for i in 0..300u64 {
        let n = 1 + i as usize % 5;
        let mut p: Matrix<f64> = random_psd(n, 9000 + i);
        let q: Matrix<f64> = random_psd(n, 19000 + i);
        let mut g = rng(29000 + i);
        let k0: Matrix<f64> = ginibre(n, &mut g);
        let knorm = if i % 2 == 0 { g.gen_range(0.1..0.95) } else { g.gen_range(1.05..3.0) };
        let k0 = k0.scale_real(knorm / operator_norm(&k0).unwrap());
        let rank_deficient = i % 3 == 2;
        if rank_deficient {
            // drop the last coordinate from ran P
            let mask: Vec<f64> = (0..n).map(|j| if j + 1 == n { 0.0 } else { 1.0 }).collect();
            let m = Matrix::from_real_diag(&mask);
            p = &(&m * &p) * &m;
        }
        let mut r = &(&sqrt_psd(&p, &t).unwrap() * &k0) * &sqrt_psd(&q, &t).unwrap();
        let outside = rank_deficient && i % 2 == 0;
        if outside {
            r[(n - 1, 0)] += c(0.5, 0.0);
        }
        let f = douglas_factor(&p, &q, &r, &t).unwrap();
        let b = block_psd_check(&p, &q, &r, &t).unwrap();
        if f.verdict == b.positive {
            agree23 += 1;
        }
        if !outside {
            worst_res23 = worst_res23.max(f.residual);
        }
    }
    let (mut agree13, mut worst_res13) = (0, 0.0f64);
    for i in 0..200u64 {
        let n = 1 + i as usize % 4;
        let t1: Matrix<f64> = random_contraction(n, 39000 + i);
        let t2: Matrix<f64> = random_contraction(n, 49000 + i);
        let mut g = rng(59000 + i);
        let x = if i % 4 == 3 {
            ginibre(n, &mut g).scale_real(g.gen_range(0.01..0.5))
        } else {
            let c0: Matrix<f64> = ginibre(n, &mut g);
            let cn = if i % 2 == 0 { g.gen_range(0.1..0.95) } else { g.gen_range(1.05..3.0) };
            let c0 = c0.scale_real(cn / operator_norm(&c0).unwrap());
            &(&defects(&t1, &t).unwrap().dstar * &c0) * &defects(&t2, &t).unwrap().d
        };
        let d = disk_block_check(&t1, &t2, &x, &t).unwrap();
        if d.agrees() {
            agree13 += 1;
        }
        if d.verdict {
            worst_res13 = worst_res13.max(d.factor.as_ref().unwrap().residual);
        }
    }
    Outcome {
        pass: agree23 == 300 && agree13 == 200 && worst_res23 <= 1e-8 && worst_res13 <= 1e-8,
        detail: format!(
            "block/factor agreement {}/300, disk agreement {}/200, worst round-trip residual {:.2e} / {:.2e} (limit 1e-8)",
            agree23, agree13, worst_res23, worst_res13
        ),
    }
}

fn scalar_positivity() -> Outcome {
    let start = Instant::now();
    let grid = PencilGrid::<f64>::default();
    let plan = TruncationPlan::default();
    let points = grid.points();
    let mut worst = f64::INFINITY;
    let mut errors = 0usize;
    for r in [0.3, 0.5] {
        let a = ap(r);
        let zs: Vec<Complex64> = (0..40)
            .flat_map(|i| {
                let m = r + (1.0 - r) * i as f64 / 39.0;
                (0..40).map(move |j| Complex64::from_polar(m, std::f64::consts::TAU * j as f64 / 40.0))
            })
            .collect();
        let (w, e) = zs
            .par_iter()
            .map(|&z| {
                let mut w = f64::INFINITY;
                let mut e = 0usize;
                for p in &points {
                    match gamma_scalar(z, &PencilPoint::new(p.eps, p.alpha).unwrap(), &a, &plan) {
                        Ok(s) => w = w.min(s.value.re),
                        Err(_) => e += 1,
                    }
                }
                (w, e)
            })
            .reduce(|| (f64::INFINITY, 0), |x, y| (x.0.min(y.0), x.1 + y.1));
        worst = worst.min(w);
        errors += e;
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: errors == 0 && worst >= -1e-9 && elapsed < Duration::from_secs(30),
        detail: format!(
            "min Re Γ = {:.3e} over 2×1600×384 points (limit −1e-9), {} evaluation errors, {:.1}s (limit 30s)",
            worst,
            errors,
            elapsed.as_secs_f64()
        ),
    }
}

fn von_neumann_cross_oracle() -> Outcome {
    let cfg = CertifyConfig::default();
    let t = tol();
    let (mut certified, mut worst) = (0, 0.0f64);
    for i in 0..50u64 {
        let r = radius(i);
        let m: Matrix<f64> = random_normal_annulus(1 + i as usize % 4, &ap(r), 11000 + i);
        if certify_ar(&m, &ap(r), &cfg).unwrap().verdict == Verdict::Certified {
            certified += 1;
        }
        worst = worst.max(vn_sample(&m, &ap(r), 100, i, 512, &t).unwrap().worst_ratio);
    }
    let (mut refuted, mut found) = (0, 0);
    for i in 0..40u64 {
        let r = radius(i);
        let w = random_w(r, 12000 + i);
        let m = misra_block(w, c(1.5 * misra_threshold(w, r).unwrap(), 0.0));
        if certify_ar(&m, &ap(r), &cfg).unwrap().verdict != Verdict::Refuted {
            continue;
        }
        refuted += 1;
        if vn_sample(&m, &ap(r), 100, i, 512, &t).unwrap().violated() {
            found += 1;
        }
    }
    let rate = if refuted > 0 { found as f64 / refuted as f64 } else { 0.0 };
    Outcome {
        pass: certified == 50 && worst <= 1.0 + 1e-6 && refuted > 0 && rate >= 0.9,
        detail: format!(
            "{}/50 normal certified, worst ratio {:.9} (limit 1+1e-6); violation found for {}/{} refuted Misra blocks ({:.0}%, limit 90%)",
            certified,
            worst,
            found,
            refuted,
            100.0 * rate
        ),
    }
}

fn numerics_invariants() -> Outcome {
    let t = tol();
    let (mut unit, mut sqrt_rt, mut spec) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200u64 {
        let n = 1 + i as usize % 6;
        let k: Matrix<f64> = random_contraction(n, 13000 + i);
        let u = halmos_unitary(&k, &t).unwrap();
        unit = unit.max(operator_norm(&(&(&u.adjoint() * &u) - &Matrix::identity(2 * n))).unwrap());

        let p: Matrix<f64> = random_psd(n, 14000 + i);
        let s = sqrt_psd(&p, &t).unwrap();
        sqrt_rt = sqrt_rt.max(operator_norm(&(&(&s * &s) - &p)).unwrap() / operator_norm(&p).unwrap());

        let mut g = rng(15000 + i);
        let a: Matrix<f64> = ginibre(n, &mut g);
        let b: Matrix<f64> = ginibre(n, &mut g);
        let cc: Matrix<f64> = ginibre(n, &mut g);
        let blk = Matrix::from_blocks(&a, &b, &Matrix::zeros(n), &cc).unwrap();
        spec = spec.max(spectrum_union_distance(&blk, &[&a, &cc]));
    }
    Outcome {
        pass: unit <= 1e-10 && sqrt_rt <= 1e-9 && spec <= 1e-8,
        detail: format!(
            "Halmos ‖U*U−I‖ {:.2e} (1e-10), sqrt round-trip {:.2e} (1e-9), block spectrum matching {:.2e} (1e-8), 200 instances each",
            unit, sqrt_rt, spec
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("kernel vs pencil threshold", misra_cross_validation),
        ("T_X factorisation equivalence", theorem_block1_equivalence),
        ("hat T_X factorisation equivalence", theorem_block2_equivalence),
        ("block functional calculus", lemma_functional_calculus),
        ("positive-block and disk equivalences", theorem23_and_disk_equivalence),
        ("scalar pencil positivity", scalar_positivity),
        ("von Neumann cross-oracle", von_neumann_cross_oracle),
        ("numerics invariants", numerics_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {}: {} ({:.1}s)",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
