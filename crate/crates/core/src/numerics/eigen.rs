//! Eigen- and singular-value kernels for small dense complex matrices.
//!
//! General spectra come from a Householder reduction to upper Hessenberg form
//! followed by single-shift complex QR with Wilkinson shifts. Hermitian
//! spectra and singular values use cyclic Jacobi sweeps, which keep small
//! eigenvalues accurate relative to the matrix norm.

use num_complex::Complex;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

const QR_ITERS_PER_EIGENVALUE: usize = 30;
const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigenvalues of a general square matrix, repeated by algebraic multiplicity.
pub fn eigenvalues<R: Real>(a: &Matrix<R>) -> Result<Vec<C<R>>> {
    if !a.is_finite() {
        return Err(Error::Domain("eigenvalues of a non-finite matrix".into()));
    }
    let n = a.dim();
    let mut h = hessenberg(a);
    let mut out = vec![czero(); n];
    let eps = R::epsilon();
    let anorm = a.frobenius_norm().max(R::min_positive_value());

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if diag == R::zero() {
                diag = anorm;
            }
            if sub <= eps * diag {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > QR_ITERS_PER_EIGENVALUE * n {
            return Err(Error::NumericalFailure(format!(
                "complex QR did not converge after {} iterations (n={})",
                total, n
            )));
        }

        let shift = if iter % 10 == 0 {
            // exceptional shift breaks symmetric stalls
            h[(hi, hi)] + Complex::new(R::lit(0.75) * h[(hi, hi - 1)].norm(), R::lit(0.4375) * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, l, hi, shift);
    }
    out[0] = h[(0, 0)];
    Ok(out)
}

fn wilkinson_shift<R: Real>(a: C<R>, b: C<R>, c: C<R>, d: C<R>) -> C<R> {
    let half = R::lit(0.5);
    let m = (a + d) * half;
    let disc = (((a - d) * half) * ((a - d) * half) + b * c).sqrt();
    let mu1 = m + disc;
    let mu2 = m - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Givens pair `(c, s)` with `[[c, s], [-s̄, c]]·[a; b] = [ρ; 0]`.
fn givens<R: Real>(a: C<R>, b: C<R>) -> (R, C<R>) {
    let an = a.norm();
    let bn = b.norm();
    if bn == R::zero() {
        return (R::one(), czero());
    }
    if an == R::zero() {
        return (R::zero(), b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn qr_step<R: Real>(h: &mut Matrix<R>, l: usize, hi: usize, shift: C<R>) {
    for i in l..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = czero();
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = l + idx;
        for i in l..=(k + 1).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in l..=hi {
        h[(i, i)] += shift;
    }
}

/// Unitary similarity to upper Hessenberg form.
pub fn hessenberg<R: Real>(a: &Matrix<R>) -> Matrix<R> {
    let n = a.dim();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let mut v: Vec<C<R>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if xnorm == R::zero() {
            continue;
        }
        let phase = if v[0].norm() == R::zero() { Complex::new(R::one(), R::zero()) } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
        if vnorm == R::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        // left: rows k+1..n, H ← (I − 2vv*)H
        for j in 0..n {
            let mut dot = czero();
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + t, j)];
            }
            dot = dot * R::lit(2.0);
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * dot;
            }
        }
        // right: columns k+1..n, H ← H(I − 2vv*)
        for i in 0..n {
            let mut dot = czero();
            for (t, vi) in v.iter().enumerate() {
                dot += h[(i, k + 1 + t)] * *vi;
            }
            dot = dot * R::lit(2.0);
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
    h
}

/// Spectral decomposition `H = V·diag(values)·V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<R: Real> {
    /// Eigenvalues in ascending order.
    pub values: Vec<R>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: Matrix<R>,
}

impl<R: Real> HermitianEigen<R> {
    /// Rebuilds `V·diag(f(λ))·V*`.
    pub fn map(&self, f: impl Fn(R) -> R) -> Matrix<R> {
        let n = self.values.len();
        let fv: Vec<R> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        Matrix::from_fn(n, |i, j| {
            let mut acc = czero();
            for k in 0..n {
                if fv[k] != R::zero() {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }

    pub fn min(&self) -> R {
        self.values[0]
    }

    pub fn max(&self) -> R {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Jacobi rotation `J = [[c, s], [-ē·s, ē·c]]` that diagonalises
/// `[[app, apq], [conj(apq), aqq]]` under `J*·A·J`.
fn jacobi_rotation<R: Real>(app: R, aqq: R, apq: C<R>) -> (C<R>, C<R>, C<R>, C<R>) {
    let g = apq.norm();
    let e = apq / g;
    let theta = (aqq - app) / (R::lit(2.0) * g);
    let t = if theta >= R::zero() {
        R::one() / (theta + (theta * theta + R::one()).sqrt())
    } else {
        -R::one() / (-theta + (theta * theta + R::one()).sqrt())
    };
    let c = R::one() / (t * t + R::one()).sqrt();
    let s = t * c;
    let ec = e.conj();
    (
        Complex::new(c, R::zero()),
        Complex::new(s, R::zero()),
        -ec * s,
        ec * c,
    )
}

/// Eigen-decomposition of the Hermitian part of `h` by cyclic Jacobi.
pub fn hermitian_eigen<R: Real>(h: &Matrix<R>) -> Result<HermitianEigen<R>> {
    if !h.is_finite() {
        return Err(Error::Domain("Hermitian eigensolve of a non-finite matrix".into()));
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = Matrix::<R>::identity(n);
    let scale = a.frobenius_norm();
    let eps = R::epsilon();

    let mut converged = n == 1 || scale == R::zero();
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let off: R = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<R>()
            .sqrt();
        if off <= eps * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == R::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if g <= eps * R::lit(0.01) * (app.abs() + aqq.abs()) && g <= eps * scale {
                    a[(p, q)] = czero();
                    a[(q, p)] = czero();
                    continue;
                }
                let (jpp, jpq, jqp, jqq) = jacobi_rotation(app, aqq, apq);
                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * jpp + y * jqp;
                    a[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)] = Complex::new(a[(p, p)].re, R::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, R::zero());
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * jpp + y * jqp;
                    v[(k, q)] = x * jpq + y * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!("Jacobi eigensolve did not converge (n={})", n)));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in descending order (one-sided Hestenes–Jacobi).
pub fn singular_values<R: Real>(a: &Matrix<R>) -> Result<Vec<R>> {
    if !a.is_finite() {
        return Err(Error::Domain("singular values of a non-finite matrix".into()));
    }
    let n = a.dim();
    // columns stored contiguously
    let mut cols: Vec<Vec<C<R>>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let thresh = R::epsilon() * R::lit(4.0 * n as f64);
    // columns below this squared norm are rounding noise
    let floor = {
        let f = thresh * a.frobenius_norm();
        f * f
    };
    let mut converged = n == 1;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: R = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: R = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C<R> = cols[p].iter().zip(&cols[q]).fold(czero(), |acc, (x, y)| acc + x.conj() * *y);
                if alpha <= floor || beta <= floor || gamma.norm() <= thresh * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (jpp, jpq, jqp, jqq) = jacobi_rotation(alpha, beta, gamma);
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xo, yo) = (*x, *y);
                    *x = xo * jpp + yo * jqp;
                    *y = xo * jpq + yo * jqq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!("Jacobi SVD did not converge (n={})", n)));
    }
    let mut sv: Vec<R> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sv)
}
