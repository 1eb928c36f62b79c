//! Seeded instance factories.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` (the
//! `rand_chacha` stream cipher RNG), so a seed names the same instance on
//! every platform. Gaussian draws use `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{singular_values, Matrix};
use crate::pencil::AnnulusParams;
use crate::rational::{Polynomial, RationalFunction};
use crate::scalar::{unit_phase, Real, C};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_normal<R: Real, G: Rng + ?Sized>(g: &mut G) -> C<R> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = g.sample(StandardNormal);
    let im: f64 = g.sample(StandardNormal);
    C::new(R::lit(re * s), R::lit(im * s))
}

pub fn ginibre<R: Real, G: Rng + ?Sized>(n: usize, g: &mut G) -> Matrix<R> {
    Matrix::from_fn(n, |_, _| complex_normal(g))
}

/// Haar unitary: Gram–Schmidt on a Ginibre sample.
pub fn random_unitary<R: Real, G: Rng + ?Sized>(n: usize, g: &mut G) -> Matrix<R> {
    loop {
        let a: Matrix<R> = ginibre(n, g);
        let mut q = Matrix::zeros(n);
        let mut ok = true;
        for j in 0..n {
            let mut v: Vec<C<R>> = (0..n).map(|i| a[(i, j)]).collect();
            for _ in 0..2 {
                for k in 0..j {
                    let d: C<R> = (0..n).map(|i| q[(i, k)].conj() * v[i]).fold(C::new(R::zero(), R::zero()), |s, x| s + x);
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi -= q[(i, k)] * d;
                    }
                }
            }
            let nrm = v.iter().map(|z| z.norm_sqr()).fold(R::zero(), |s, x| s + x).sqrt();
            if !(nrm > R::lit(1e-6)) {
                ok = false;
                break;
            }
            for (i, vi) in v.into_iter().enumerate() {
                q[(i, j)] = vi / nrm;
            }
        }
        if ok {
            return q;
        }
    }
}

fn annulus_point<R: Real, G: Rng + ?Sized>(ap: &AnnulusParams<R>, g: &mut G) -> C<R> {
    let r = ap.r.to_f64_lossy();
    let m = g.gen_range(r..=1.0);
    unit_phase(R::lit(g.gen_range(0.0..std::f64::consts::TAU))) * R::lit(m)
}

fn conjugate<R: Real>(u: &Matrix<R>, d: &[C<R>]) -> Matrix<R> {
    &(u * &Matrix::from_diag(d)) * &u.adjoint()
}

/// `U·diag(λ)·U*` with `|λ_i|` uniform on `[r, 1]` and uniform arguments.
pub fn random_normal_annulus<R: Real>(n: usize, ap: &AnnulusParams<R>, seed: u64) -> Matrix<R> {
    let mut g = rng(seed);
    let u = random_unitary(n, &mut g);
    let d: Vec<C<R>> = (0..n).map(|_| annulus_point(ap, &mut g)).collect();
    conjugate(&u, &d)
}

/// Ginibre sample scaled by `1/(σ_max + 10⁻³)`.
pub fn random_contraction<R: Real>(n: usize, seed: u64) -> Matrix<R> {
    let mut g = rng(seed);
    let a: Matrix<R> = ginibre(n, &mut g);
    let s = singular_values(&a).expect("finite Ginibre sample")[0];
    a.scale_real(R::one() / (s + R::lit(1e-3)))
}

/// `G*G / ‖G‖_F²`.
pub fn random_psd<R: Real>(n: usize, seed: u64) -> Matrix<R> {
    let mut g = rng(seed);
    let a: Matrix<R> = ginibre(n, &mut g);
    let f = a.frobenius_norm();
    (&a.adjoint() * &a).hermitian_part().scale_real(R::one() / (f * f))
}

/// Simultaneously diagonalisable `(T1, T2, X)` with `σ(T1), σ(T2) ⊆ 𝔸̄_r`.
pub fn random_commuting_pair<R: Real>(n: usize, ap: &AnnulusParams<R>, seed: u64) -> (Matrix<R>, Matrix<R>, Matrix<R>) {
    let mut g = rng(seed);
    let u = random_unitary(n, &mut g);
    let d1: Vec<C<R>> = (0..n).map(|_| annulus_point(ap, &mut g)).collect();
    let d2: Vec<C<R>> = (0..n).map(|_| annulus_point(ap, &mut g)).collect();
    let dx: Vec<C<R>> = (0..n).map(|_| complex_normal(&mut g)).collect();
    (conjugate(&u, &d1), conjugate(&u, &d2), conjugate(&u, &dx))
}

/// Random `p/q` with degrees at most 4 and poles either inside
/// `|z| < r − (1−r)/10` or in `1 + (1−r)/10 < |z| < 3`.
pub fn random_rational_off_annulus<R: Real, G: Rng + ?Sized>(g: &mut G, ap: &AnnulusParams<R>) -> RationalFunction<R> {
    let r = ap.r.to_f64_lossy();
    let gap = 0.1 * (1.0 - r);
    let inner = r - gap;
    let deg_p = g.gen_range(0..=4usize);
    let deg_q = g.gen_range(0..=4usize);
    let p = Polynomial::new((0..=deg_p).map(|_| complex_normal(g)).collect());
    let poles: Vec<C<R>> = (0..deg_q)
        .map(|_| {
            let m = if inner > 0.0 && g.gen_bool(0.5) {
                g.gen_range(0.0..inner)
            } else {
                g.gen_range(1.0 + gap..3.0)
            };
            unit_phase(R::lit(g.gen_range(0.0..std::f64::consts::TAU))) * R::lit(m)
        })
        .collect();
    let q = Polynomial::from_roots(&poles);
    let p = if p.is_zero() { Polynomial::constant(C::new(R::one(), R::zero())) } else { p };
    RationalFunction::new(p, q).expect("monic denominator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigenvalues, hermitian_min_eig, operator_norm, Tolerances};
    use crate::rational::poles_off_annulus;

    fn ap() -> AnnulusParams<f64> {
        AnnulusParams::new(0.4).unwrap()
    }

    #[test]
    fn determinism() {
        let a: Matrix<f64> = random_normal_annulus(4, &ap(), 11);
        let b: Matrix<f64> = random_normal_annulus(4, &ap(), 11);
        assert_eq!(a, b);
        let c: Matrix<f64> = random_normal_annulus(4, &ap(), 12);
        assert_ne!(a, c);
        assert_eq!(random_contraction::<f64>(3, 5), random_contraction::<f64>(3, 5));
    }

    #[test]
    fn unitary_is_unitary() {
        let u: Matrix<f64> = random_unitary(6, &mut rng(3));
        let e = &(&u.adjoint() * &u) - &Matrix::identity(6);
        assert!(e.max_abs() < 1e-13);
    }

    #[test]
    fn structural_properties_hold() {
        let tol = Tolerances::default();
        for seed in 0..200 {
            let n = 1 + (seed as usize % 5);
            let t: Matrix<f64> = random_normal_annulus(n, &ap(), seed);
            let comm = &(&t * &t.adjoint()) - &(&t.adjoint() * &t);
            assert!(comm.max_abs() < 1e-12);
            for z in eigenvalues(&t).unwrap() {
                assert!(z.norm() >= 0.4 - 1e-10 && z.norm() <= 1.0 + 1e-10);
            }
            assert!(operator_norm(&random_contraction::<f64>(n, seed)).unwrap() < 1.0);
            assert!(hermitian_min_eig(&random_psd::<f64>(n, seed), &tol).unwrap() >= -1e-12);
            let (t1, t2, x) = random_commuting_pair::<f64>(n, &ap(), seed);
            for a in [&t1, &t2] {
                let c = a.commutator_norm(&x);
                assert!(c <= 1e-12 * (1.0 + a.frobenius_norm() * x.frobenius_norm()));
            }
        }
    }

    #[test]
    fn sampled_functions_avoid_annulus() {
        let mut g = rng(9);
        for _ in 0..200 {
            let f: RationalFunction<f64> = random_rational_off_annulus(&mut g, &ap());
            assert!(poles_off_annulus(&f, &ap()).unwrap());
        }
    }
}
