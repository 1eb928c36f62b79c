use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use annulus_core::blocks::{assemble, solve_general, BlockSpec};
use annulus_core::certifier::{
    certify_ar, check_thm_block1, check_thm_block2, vn_sample, CertifyConfig, PencilGrid, DEFAULT_ALPHA_COUNT,
    DEFAULT_EPS,
};
use annulus_core::factorization::douglas_factor;
use annulus_core::io;
use annulus_core::misra::{misra_threshold, sweep, threshold_via_pencil, DEFAULT_SEARCH_TOL};
use annulus_core::pencil::{AnnulusParams, TruncationPlan};
use annulus_core::{Complex64, ComplexMatrix, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 64;
const EXIT_CONTRACT: u8 = 65;
const THREADS_ENV: &str = "ANNULUS_CERT_THREADS";

/// Certify annulus contractions and 2×2 block operators.
#[derive(Parser, Debug)]
#[command(name = "annulus-cert", version)]
struct Cli {
    /// Worker threads for grid sweeps (overridden by ANNULUS_CERT_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Comma-separated ε values
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Number of equispaced α on the unit circle
    #[arg(long, default_value_t = DEFAULT_ALPHA_COUNT)]
    alphas: usize,
    /// Tail tolerance of the Laurent series
    #[arg(long)]
    tail_tol: Option<f64>,
    /// Cap on terms summed on each side of the series
    #[arg(long)]
    n_max: Option<usize>,
}

impl GridArgs {
    fn config(&self) -> CertifyConfig<f64> {
        let mut plan = TruncationPlan::default();
        if let Some(t) = self.tail_tol {
            plan.tail_tol = t;
        }
        if let Some(n) = self.n_max {
            plan.n_max = n;
        }
        CertifyConfig {
            grid: PencilGrid { eps_values: self.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec()), alpha_count: self.alphas },
            plan,
            ..CertifyConfig::default()
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Kind {
    Tx,
    Hat,
    General,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Which {
    Block1,
    Block2,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a matrix is an annulus contraction on the (ε, α) grid
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble a 2n×2n block matrix
    Block {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: Option<PathBuf>,
        /// X for tx and hat, Y for general
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor R = P^{1/2} K Q^{1/2}
    Factor {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        rmat: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel threshold for [[w, h], [0, w]]
    Misra {
        #[arg(long)]
        r: f64,
        /// w as RE,IM
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        /// Also locate the pencil flip point
        #[arg(long)]
        pencil: bool,
    },
    /// Kernel and pencil thresholds over radial samples, as CSV
    Sweep {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SEARCH_TOL)]
        search_tol: f64,
    },
    /// Largest sampled ‖f(T)‖ / sup|f| over random rational f
    Vn {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per boundary circle for sup|f|
        #[arg(long, default_value_t = 512)]
        circle_samples: usize,
    },
    /// Compare pointwise factorisations with the certificate of the block
    Thm {
        #[arg(long, value_enum)]
        which: Which,
        /// T for block1
        #[arg(long)]
        t: Option<PathBuf>,
        #[arg(long)]
        t1: Option<PathBuf>,
        #[arg(long)]
        t2: Option<PathBuf>,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(Error::ContractViolation(_)) => EXIT_CONTRACT,
            Failure::Core(Error::Parse(_) | Error::Domain(_) | Error::DimensionMismatch(_)) => EXIT_USAGE,
            Failure::Core(Error::Singular(_) | Error::NumericalFailure(_) | Error::Truncation(_)) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    io::matrix_from_json(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {}", path.display(), e)))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{}\n", text)).map_err(|e| Failure::Usage(format!("{}: {}", p.display(), e))),
        None => {
            println!("{}", text);
            Ok(())
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Failure::Usage(format!("expected RE,IM, got {:?}", s));
    if parts.len() != 2 {
        return Err(bad());
    }
    let re: f64 = parts[0].parse().map_err(|_| bad())?;
    let im: f64 = parts[1].parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn cmd_certify(matrix: &Path, r: f64, grid: &GridArgs, out: Option<&Path>) -> CmdResult {
    let t = read_matrix(matrix)?;
    let ap = AnnulusParams::new(r)?;
    let cert = certify_ar(&t, &ap, &grid.config())?;
    emit(&io::certificate_to_json(&cert), out)?;
    Ok(cert.verdict.exit_code() as u8)
}

fn cmd_block(kind: Kind, t1: &Path, t2: Option<&Path>, x: &Path, out: Option<&Path>) -> CmdResult {
    let t1 = read_matrix(t1)?;
    let x = read_matrix(x)?;
    let t2 = t2.map(read_matrix).transpose()?;
    let tol = Default::default();
    let spec = match kind {
        Kind::Tx => {
            if t2.is_some() {
                eprintln!("warning: --t2 is ignored for kind=tx");
            }
            BlockSpec::tx(t1, x)
        }
        Kind::Hat | Kind::General => {
            let t2 = t2.ok_or_else(|| Failure::Usage("--t2 is required for this kind".into()))?;
            if let Kind::Hat = kind {
                BlockSpec::hat(t1, t2, x)
            } else {
                let solve = solve_general(&t1, &t2, &x, &tol)?;
                if solve.singular {
                    eprintln!(
                        "warning: T1 − T2 is singular; least-squares X with relative residual {:e}",
                        solve.residual
                    );
                }
                BlockSpec::general(t1, t2, x)
            }
        }
    };
    let m = assemble(&spec, &tol)?;
    emit(&io::matrix_to_json(&m), out)?;
    Ok(0)
}

fn cmd_factor(p: &Path, q: &Path, rmat: &Path, out: Option<&Path>) -> CmdResult {
    let (p, q, r) = (read_matrix(p)?, read_matrix(q)?, read_matrix(rmat)?);
    let f = douglas_factor(&p, &q, &r, &Default::default())?;
    emit(&io::factor_to_json(&f), out)?;
    Ok(if f.verdict { 0 } else { 1 })
}

fn cmd_misra(r: f64, w: &str, pencil: bool) -> CmdResult {
    let w = parse_complex(w)?;
    let k = misra_threshold(w, r)?;
    if pencil {
        let p = threshold_via_pencil(w, r, &PencilGrid::default(), &TruncationPlan::default(), DEFAULT_SEARCH_TOL)?;
        println!("{}\t{}\t{}", k, p, (p - k).abs() / k);
    } else {
        println!("{}", k);
    }
    Ok(0)
}

fn cmd_sweep(r: f64, samples: usize, out: Option<&Path>, seed: u64, search_tol: f64) -> CmdResult {
    let rows = sweep(r, samples, seed, &PencilGrid::default(), &TruncationPlan::default(), search_tol)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["w_re", "w_im", "r", "threshold_kernel", "threshold_pencil", "rel_gap"]).map_err(csv_err)?;
    for row in &rows {
        w.write_record(
            [row.w.re, row.w.im, row.r, row.threshold_kernel, row.threshold_pencil, row.rel_gap].map(|v| v.to_string()),
        )
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {}", p.display(), e)))?,
        None => print!("{}", text),
    }
    Ok(0)
}

fn cmd_vn(matrix: &Path, r: f64, count: usize, seed: u64, m: usize) -> CmdResult {
    let t = read_matrix(matrix)?;
    let rep = vn_sample(&t, &AnnulusParams::new(r)?, count, seed, m, &Default::default())?;
    println!("{}", io::vn_to_json(&rep));
    Ok(if rep.violated() { 1 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_thm(
    which: Which,
    t: Option<&Path>,
    t1: Option<&Path>,
    t2: Option<&Path>,
    x: &Path,
    r: f64,
    grid: &GridArgs,
    out: Option<&Path>,
) -> CmdResult {
    let ap = AnnulusParams::new(r)?;
    let x = read_matrix(x)?;
    let cfg = grid.config();
    let rep = match which {
        Which::Block1 => {
            let t = t.or(t1).ok_or_else(|| Failure::Usage("--t is required for block1".into()))?;
            check_thm_block1(&read_matrix(t)?, &x, &ap, &cfg)?
        }
        Which::Block2 => {
            let (t1, t2) = match (t1, t2) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Failure::Usage("--t1 and --t2 are required for block2".into())),
            };
            check_thm_block2(&read_matrix(t1)?, &read_matrix(t2)?, &x, &ap, &cfg)?
        }
    };
    emit(&io::equivalence_to_json(&rep), out)?;
    Ok(rep.agreement.exit_code() as u8)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Failure::Usage(format!("{} must be a positive integer, got {:?}", THREADS_ENV, v))),
        Err(_) => match flag {
            Some(0) => Err(Failure::Usage("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Certify { matrix, r, grid, out } => cmd_certify(matrix, *r, grid, out.as_deref()),
        Command::Block { kind, t1, t2, x, out } => cmd_block(*kind, t1, t2.as_deref(), x, out.as_deref()),
        Command::Factor { p, q, rmat, out } => cmd_factor(p, q, rmat, out.as_deref()),
        Command::Misra { r, w, pencil } => cmd_misra(*r, w, *pencil),
        Command::Sweep { r, samples, out, seed, search_tol } => cmd_sweep(*r, *samples, out.as_deref(), *seed, *search_tol),
        Command::Vn { matrix, r, count, seed, circle_samples } => cmd_vn(matrix, *r, *count, *seed, *circle_samples),
        Command::Thm { which, t, t1, t2, x, r, grid, out } => {
            cmd_thm(*which, t.as_deref(), t1.as_deref(), t2.as_deref(), x, *r, grid, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
