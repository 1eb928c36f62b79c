//! Rational functions `p/q` and their matrix functional calculus.

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, inverse, Matrix, Tolerances};
use crate::pencil::AnnulusParams;
use crate::scalar::{cone, czero, unit_phase, Real, C};

/// Pole clearance from the closed annulus.
pub const POLE_SLACK: f64 = 1e-9;

/// Polynomial with ascending complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<R: Real> {
    coeffs: Vec<C<R>>,
}

impl<R: Real> Polynomial<R> {
    pub fn new(coeffs: Vec<C<R>>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: C<R>) -> Self {
        Self::new(vec![c])
    }

    /// `z`.
    pub fn identity() -> Self {
        Self::new(vec![czero(), cone()])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C<R>]) -> Self {
        let mut p = Self::constant(cone());
        for &a in roots {
            p = p.mul(&Self::new(vec![-a, cone()]));
        }
        p
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().map_or(false, |c| c.re == R::zero() && c.im == R::zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(czero());
        }
    }

    pub fn coeffs(&self) -> &[C<R>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == R::zero() && c.im == R::zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C<R>) -> C<R> {
        self.coeffs.iter().rev().fold(czero(), |acc, &c| acc * z + c)
    }

    /// Horner evaluation at a matrix.
    pub fn eval_matrix(&self, t: &Matrix<R>) -> Matrix<R> {
        let n = t.dim();
        let mut acc = Matrix::zeros(n);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * t;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(czero());
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * R::lit(k as f64)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..len)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_else(czero) - other.coeffs.get(k).copied().unwrap_or_else(czero)
                })
                .collect(),
        )
    }

    /// Coefficients of `z ↦ p(αz)`.
    pub fn rescale(&self, alpha: C<R>) -> Self {
        let mut pow = cone::<R>();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * pow);
            pow = pow * alpha;
        }
        Self::new(out)
    }

    /// Roots as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<C<R>>> {
        if self.is_zero() {
            return Err(Error::Domain("roots of the zero polynomial".into()));
        }
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[d];
        let comp = Matrix::from_fn(d, |i, j| {
            if j == d - 1 {
                -self.coeffs[i] / lead
            } else if i == j + 1 {
                cone()
            } else {
                czero()
            }
        });
        eigenvalues(&comp)
    }
}

/// `f = p/q` with `q ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<R: Real> {
    pub p: Polynomial<R>,
    pub q: Polynomial<R>,
}

impl<R: Real> RationalFunction<R> {
    pub fn new(p: Polynomial<R>, q: Polynomial<R>) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Domain("denominator polynomial is identically zero".into()));
        }
        Ok(Self { p, q })
    }

    pub fn from_coeffs(p: Vec<C<R>>, q: Vec<C<R>>) -> Result<Self> {
        Self::new(Polynomial::new(p), Polynomial::new(q))
    }

    pub fn polynomial(p: Polynomial<R>) -> Self {
        Self { p, q: Polynomial::constant(cone()) }
    }

    pub fn eval(&self, z: C<R>) -> C<R> {
        self.p.eval(z) / self.q.eval(z)
    }

    /// `(p′q − pq′) / q²`.
    pub fn derivative(&self) -> Self {
        let num = self.p.derivative().mul(&self.q).sub(&self.p.mul(&self.q.derivative()));
        Self { p: num, q: self.q.mul(&self.q) }
    }

    /// `z ↦ f(αz)`.
    pub fn rescale(&self, alpha: C<R>) -> Self {
        Self { p: self.p.rescale(alpha), q: self.q.rescale(alpha) }
    }

    pub fn poles(&self) -> Result<Vec<C<R>>> {
        self.q.roots()
    }

    /// `p(T)·q(T)⁻¹`.
    pub fn eval_matrix(&self, t: &Matrix<R>, tol: &Tolerances<R>) -> Result<Matrix<R>> {
        let qt = self.q.eval_matrix(t);
        let qinv = inverse(&qt, tol).map_err(|e| match e {
            Error::Singular(m) => Error::Singular(format!("q(T) is singular: {}", m)),
            other => other,
        })?;
        Ok(&self.p.eval_matrix(t) * &qinv)
    }
}

/// True iff every pole lies in `|z| < r − slack` or `|z| > 1 + slack`.
pub fn poles_off_annulus<R: Real>(f: &RationalFunction<R>, ap: &AnnulusParams<R>) -> Result<bool> {
    let slack = R::lit(POLE_SLACK);
    Ok(f.poles()?.iter().all(|z| {
        let m = z.norm();
        m < ap.r - slack || m > R::one() + slack
    }))
}

/// Maximum of `|f|` over the closed annulus.
///
/// By the maximum principle only the two boundary circles matter. Each is
/// sampled at `m` equispaced angles and the three best samples per circle
/// are refined by golden-section search on the neighbouring arc.
pub fn sup_on_annulus<R: Real>(f: &RationalFunction<R>, ap: &AnnulusParams<R>, m: usize) -> Result<R> {
    if m < 3 {
        return Err(Error::Domain("need at least 3 samples per circle".into()));
    }
    if !poles_off_annulus(f, ap)? {
        return Err(Error::Domain("f has a pole on the closed annulus".into()));
    }
    let two_pi = R::PI() + R::PI();
    let step = two_pi / R::lit(m as f64);
    let mut best = R::zero();
    for &rho in &[ap.r, R::one()] {
        let modulus = |theta: R| f.eval(unit_phase(theta) * rho).norm();
        let mut samples: Vec<(R, R)> = (0..m)
            .map(|j| {
                let th = step * R::lit(j as f64);
                (modulus(th), th)
            })
            .collect();
        samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        for &(v, th) in samples.iter().take(3) {
            best = best.max(v);
            best = best.max(golden_max(&modulus, th - step, th + step));
        }
    }
    Ok(best)
}

fn golden_max<R: Real>(f: &impl Fn(R) -> R, mut a: R, mut b: R) -> R {
    let g = R::lit(0.618_033_988_749_894_8);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() <= R::epsilon() * R::lit(4.0) {
            break;
        }
    }
    f1.max(f2)
}
