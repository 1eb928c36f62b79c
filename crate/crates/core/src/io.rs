//! JSON wire formats. Complex numbers are always `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::blocks::{BlockKind, BlockSpec};
use crate::certifier::{Agreement, Certificate, EquivalenceReport, VnReport};
use crate::error::{Error, Result};
use crate::factorization::FactorResult;
use crate::numerics::{Matrix, DEFAULT_DIM_CAP};
use crate::rational::{Polynomial, RationalFunction};
use crate::Complex64;

pub type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn parse<'a, T: Deserialize<'a>>(s: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("{}: {}", what, e)))
}

fn render<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("wire types always serialise")
}

/// `{"n": int, "data": [[re, im], …]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<Pair>,
}

impl MatrixFile {
    pub fn from_matrix(m: &Matrix<f64>) -> Self {
        Self { n: m.dim(), data: m.as_slice().iter().map(|&z| pair(z)).collect() }
    }

    pub fn into_matrix(self, cap: usize) -> Result<Matrix<f64>> {
        if self.n == 0 || self.data.len() != self.n * self.n {
            return Err(Error::Parse(format!("expected n² = {} entries, found {}", self.n * self.n, self.data.len())));
        }
        if self.data.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        let m = Matrix::new(self.n, self.data.into_iter().map(unpair).collect())?;
        m.check_cap(cap)?;
        Ok(m)
    }
}

pub fn matrix_from_json(s: &str) -> Result<Matrix<f64>> {
    matrix_from_json_capped(s, DEFAULT_DIM_CAP)
}

pub fn matrix_from_json_capped(s: &str, cap: usize) -> Result<Matrix<f64>> {
    parse::<MatrixFile>(s, "matrix")?.into_matrix(cap)
}

pub fn matrix_to_json(m: &Matrix<f64>) -> String {
    render(&MatrixFile::from_matrix(m))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalFile {
    pub p: Vec<Pair>,
    pub q: Vec<Pair>,
}

pub fn rational_from_json(s: &str) -> Result<RationalFunction<f64>> {
    let f: RationalFile = parse(s, "rational function")?;
    let conv = |v: Vec<Pair>| -> Result<Vec<Complex64>> {
        if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Parse("non-finite coefficient".into()));
        }
        Ok(v.into_iter().map(unpair).collect())
    };
    RationalFunction::from_coeffs(conv(f.p)?, conv(f.q)?)
}

fn poly_pairs(p: &Polynomial<f64>) -> Vec<Pair> {
    p.coeffs().iter().map(|&z| pair(z)).collect()
}

pub fn rational_to_json(f: &RationalFunction<f64>) -> String {
    render(&RationalFile { p: poly_pairs(&f.p), q: poly_pairs(&f.q) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpecFile {
    pub kind: BlockKind,
    pub t1: MatrixFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<MatrixFile>,
    pub x: MatrixFile,
}

pub fn block_spec_from_json(s: &str) -> Result<BlockSpec<f64>> {
    let f: BlockSpecFile = parse(s, "block spec")?;
    let t2 = f.t2.map(|m| m.into_matrix(DEFAULT_DIM_CAP)).transpose()?;
    if f.kind != BlockKind::Tx && t2.is_none() {
        return Err(Error::Parse("t2 is required for this kind".into()));
    }
    Ok(BlockSpec { kind: f.kind, t1: f.t1.into_matrix(DEFAULT_DIM_CAP)?, t2, x: f.x.into_matrix(DEFAULT_DIM_CAP)? })
}

pub fn block_spec_to_json(b: &BlockSpec<f64>) -> String {
    render(&BlockSpecFile {
        kind: b.kind,
        t1: MatrixFile::from_matrix(&b.t1),
        t2: b.t2.as_ref().map(MatrixFile::from_matrix),
        x: MatrixFile::from_matrix(&b.x),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorFile {
    pub k: MatrixFile,
    pub k_norm: f64,
    pub residual: f64,
    pub range_defect: f64,
    pub verdict: bool,
}

impl From<&FactorResult<f64>> for FactorFile {
    fn from(f: &FactorResult<f64>) -> Self {
        Self {
            k: MatrixFile::from_matrix(f.factor()),
            k_norm: f.k_norm,
            residual: f.residual,
            range_defect: f.range_defect,
            verdict: f.verdict,
        }
    }
}

pub fn factor_to_json(f: &FactorResult<f64>) -> String {
    render(&FactorFile::from(f))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFile {
    pub eps: f64,
    pub alpha: Pair,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridFile {
    pub eps_values: Vec<f64>,
    pub alpha_count: usize,
    pub n_max: usize,
    pub tail_tol: f64,
    pub adaptive: bool,
    pub psd_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordFile {
    pub eps: f64,
    pub alpha: Pair,
    pub lambda_min: f64,
    pub scale: f64,
    pub trunc_n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub verdict: crate::certifier::Verdict,
    pub spectrum_ok: bool,
    pub min_margin: Option<f64>,
    pub worst: Option<PointFile>,
    pub grid: GridFile,
    pub records: Vec<RecordFile>,
    pub diagnostics: Vec<String>,
}

impl From<&Certificate<f64>> for CertificateFile {
    fn from(c: &Certificate<f64>) -> Self {
        Self {
            verdict: c.verdict,
            spectrum_ok: c.spectrum_ok,
            min_margin: c.min_margin,
            worst: c.worst_point.map(|p| PointFile { eps: p.eps, alpha: pair(p.alpha) }),
            grid: GridFile {
                eps_values: c.grid.eps_values.clone(),
                alpha_count: c.grid.alpha_count,
                n_max: c.plan.n_max,
                tail_tol: c.plan.tail_tol,
                adaptive: c.plan.adaptive,
                psd_tol: c.psd_tol,
            },
            records: c
                .records
                .iter()
                .map(|r| RecordFile {
                    eps: r.point.eps,
                    alpha: pair(r.point.alpha),
                    lambda_min: r.lambda_min,
                    scale: r.scale,
                    trunc_n: r.trunc_n,
                })
                .collect(),
            diagnostics: c.diagnostics.clone(),
        }
    }
}

pub fn certificate_to_json(c: &Certificate<f64>) -> String {
    render(&CertificateFile::from(c))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalencePointFile {
    pub eps: f64,
    pub alpha: Pair,
    pub k_norm: f64,
    pub residual: f64,
    pub range_defect: f64,
    pub factor_ok: bool,
    pub block_margin: Option<f64>,
    pub reconstruction: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceFile {
    pub agreement: Agreement,
    pub factor_verdict: bool,
    pub certificate_verdict: crate::certifier::Verdict,
    pub pointwise_disagreements: usize,
    pub points: Vec<EquivalencePointFile>,
}

pub fn equivalence_to_json(r: &EquivalenceReport<f64>) -> String {
    render(&EquivalenceFile {
        agreement: r.agreement,
        factor_verdict: r.factor_verdict,
        certificate_verdict: r.certificate.verdict,
        pointwise_disagreements: r.pointwise_disagreements,
        points: r
            .points
            .iter()
            .map(|p| EquivalencePointFile {
                eps: p.point.eps,
                alpha: pair(p.point.alpha),
                k_norm: p.factor.k_norm,
                residual: p.factor.residual,
                range_defect: p.factor.range_defect,
                factor_ok: p.factor.verdict,
                block_margin: p.block_margin,
                reconstruction: p.reconstruction,
            })
            .collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VnFile {
    pub worst_ratio: f64,
    pub count: usize,
    pub violations: usize,
    pub witness: RationalFile,
}

pub fn vn_to_json(v: &VnReport<f64>) -> String {
    render(&VnFile {
        worst_ratio: v.worst_ratio,
        count: v.count,
        violations: v.violations,
        witness: RationalFile { p: poly_pairs(&v.witness.p), q: poly_pairs(&v.witness.q) },
    })
}
