//! Command implementations behind the `ptensor` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ptensor::classes::{
    cauchy_tensor, cp_tensor, diagonal_sign_report, is_b_tensor, is_copositive,
    is_diagonally_dominant, is_h_tensor, is_psd, is_z_tensor, laplacian_tensors,
    classify_m_tensor, ClassReport, FactorSet, Hypergraph, MTensorReport,
};
use ptensor::examples::{dnn_counterexample, dnn_witness};
use ptensor::io::{self, Layout};
use ptensor::pcheck::{basis_p0_tensor, hull_membership, phi_p0, phi_terms};
use ptensor::spectral::nqz_spectral_radius;
use ptensor::tcp::{explore_solutions, solve_tcp, NoSolutionFound, SolutionSet, TcpSolution};
use ptensor::{check_p, check_p0, check_s, find_h_eigenpairs, EigenPair, PVerdict, SearchBudget, Tensor};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REPRO_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

/// Tolerance of the golden values in `repro`.
const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "ptensor", version, about = "P- and P0-tensor analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every class test, the P/P0/S checks and the eigenpair search.
    Analyze {
        tensor: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Certify or refute one property.
    Pcheck {
        tensor: PathBuf,
        #[arg(value_enum)]
        property: PropertyArg,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a tensor complementarity problem.
    Tcp {
        instance: PathBuf,
        /// Collect the distinct solutions found from every start.
        #[arg(long)]
        explore: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write a generated tensor file.
    Gen(GenArgs),
    /// Reproduce the worked counterexample and check the golden values.
    Repro {
        /// Run the checks against this tensor instead of the built-in one.
        #[arg(long)]
        tensor: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    P,
    P0,
    S,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, env = "PTENSOR_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub grid_depth: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub tau_rel: Option<f64>,
    /// Machine-readable output (reports from analyze, pcheck and tcp are
    /// always JSON).
    #[arg(long)]
    pub json: bool,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn budget(&self, default: SearchBudget) -> SearchBudget {
        SearchBudget {
            seed: self.seed.unwrap_or(default.seed),
            starts: self.starts.unwrap_or(default.starts),
            iters: self.iters.unwrap_or(default.iters),
            grid_depth: self.grid_depth.unwrap_or(default.grid_depth),
            tol: self.tol.unwrap_or(default.tol),
            tau_rel: self.tau_rel.unwrap_or(default.tau_rel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Identity,
    Allones,
    Mtensor,
    Cauchy,
    Laplacian,
    Cp,
    BasisP0,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Adjacency,
    Laplacian,
    Signless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Dense,
    Coo,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Order.
    #[arg(long)]
    pub m: Option<usize>,
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Cauchy generator, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Option<Vec<f64>>,
    /// `s - rho(B)` for `mtensor`.
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    /// Draw `B` with uniform [0, 1) entries for `mtensor` instead of all ones.
    #[arg(long)]
    pub random_b: bool,
    #[arg(long)]
    pub hypergraph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::Laplacian)]
    pub variant: VariantArg,
    /// CP factors: vectors separated by ';', entries by ','.
    #[arg(long)]
    pub factors: Option<String>,
    /// Number of random CP factors when `--factors` is absent.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Basis tensor index tuple, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub indices: Option<Vec<usize>>,
    #[arg(long)]
    pub negate: bool,
    /// Symmetrize a `random` tensor.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, value_enum, default_value_t = LayoutArg::Dense)]
    pub layout: LayoutArg,
    #[arg(long, env = "PTENSOR_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced: text for stdout (or `--out`) and an exit code.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn parse(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Analyze { tensor, common } => {
            let t = load_tensor(&tensor)?;
            let budget = valid(common.budget(SearchBudget::default()))?;
            let report = analyze(&t, &budget).map_err(CliError::parse)?;
            json_outcome(&report, EXIT_OK, common.out)
        }
        Command::Pcheck {
            tensor,
            property,
            common,
        } => {
            let t = load_tensor(&tensor)?;
            let budget = valid(common.budget(SearchBudget::default()))?;
            let verdict = pcheck(&t, property, &budget).map_err(CliError::parse)?;
            json_outcome(&verdict, EXIT_OK, common.out)
        }
        Command::Tcp {
            instance,
            explore,
            common,
        } => {
            let inst = io::read_tcp_instance(&instance).map_err(CliError::parse)?;
            let budget = valid(common.budget(SearchBudget::default()))?;
            let report = if explore {
                TcpReport::Explored(explore_solutions(&inst, &budget).map_err(CliError::parse)?)
            } else {
                match solve_tcp(&inst, &budget) {
                    Ok(s) => TcpReport::Solved {
                        status: "solved",
                        solution: s,
                    },
                    Err(e) => TcpReport::Failed {
                        status: "no_solution_found",
                        detail: e.into(),
                    },
                }
            };
            json_outcome(&report, EXIT_OK, common.out)
        }
        Command::Gen(args) => {
            let t = generate(&args)?;
            let layout = match args.layout {
                LayoutArg::Dense => Layout::Dense,
                LayoutArg::Coo => Layout::Coo,
            };
            let v = io::tensor_to_json(&t, layout).map_err(CliError::usage)?;
            json_outcome(&v, EXIT_OK, args.out)
        }
        Command::Repro { tensor, common } => {
            let t = match tensor {
                Some(p) => load_tensor(&p)?,
                None => dnn_counterexample(),
            };
            let budget = valid(common.budget(SearchBudget::default().with_starts(200)))?;
            let report = repro(&t, &budget).map_err(CliError::parse)?;
            let code = if report.pass { EXIT_OK } else { EXIT_REPRO_FAILED };
            if common.json {
                json_outcome(&report, code, common.out)
            } else {
                Ok(Outcome {
                    text: report.to_text(),
                    code,
                    out: common.out,
                })
            }
        }
    }
}

fn valid(b: SearchBudget) -> CliResult<SearchBudget> {
    b.validate().map_err(CliError::usage)?;
    Ok(b)
}

fn load_tensor(path: &Path) -> CliResult<Tensor> {
    io::read_tensor(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn json_outcome<T: Serialize>(value: &T, code: i32, out: Option<PathBuf>) -> CliResult<Outcome> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::parse)?;
    text.push('\n');
    Ok(Outcome { text, code, out })
}

/// Writes the outcome and returns the process exit code.
pub fn emit(outcome: Outcome) -> i32 {
    match &outcome.out {
        Some(p) => {
            if let Err(e) = fs::write(p, &outcome.text) {
                eprintln!("error: {}: {e}", p.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{}", outcome.text),
    }
    outcome.code
}

pub fn pcheck(t: &Tensor, property: PropertyArg, budget: &SearchBudget) -> ptensor::Result<PVerdict> {
    match property {
        PropertyArg::P => check_p(t, budget),
        PropertyArg::P0 => check_p0(t, budget),
        PropertyArg::S => check_s(t, budget),
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum TcpReport {
    Solved {
        status: &'static str,
        #[serde(flatten)]
        solution: TcpSolution,
    },
    Failed {
        status: &'static str,
        #[serde(flatten)]
        detail: NoSolutionFoundReport,
    },
    Explored(SolutionSet),
}

#[derive(Debug, Serialize)]
pub struct NoSolutionFoundReport {
    pub best_merit: f64,
    pub x: Vec<f64>,
    pub natural_residual: f64,
}

impl From<NoSolutionFound> for NoSolutionFoundReport {
    fn from(e: NoSolutionFound) -> Self {
        Self {
            best_merit: e.best_merit,
            x: e.x,
            natural_residual: e.natural_residual,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SymmetryReport {
    pub flagged: bool,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub order: usize,
    pub dim: usize,
    pub symmetry: SymmetryReport,
    pub nonnegative: bool,
    pub provenance: Option<String>,
    pub diagonal: Vec<ClassReport>,
    pub classes: Vec<ClassReport>,
    pub m_tensor: MTensorReport,
    pub h_tensor: MTensorReport,
    pub spectral_radius: Option<ptensor::SpectralRadiusResult>,
    pub p: PVerdict,
    pub p0: PVerdict,
    pub s: PVerdict,
    pub eigenpairs: Vec<EigenPair>,
    /// Symmetric, nonnegative and every H-eigenvalue found is nonnegative.
    pub dnn_consistent: bool,
}

pub fn analyze(t: &Tensor, budget: &SearchBudget) -> ptensor::Result<AnalyzeReport> {
    let symmetric = t.check_symmetric(ptensor::tensor::SYMMETRY_TOL);
    let nonnegative = t.values().iter().all(|&v| v >= 0.0);
    let mut classes = vec![
        is_diagonally_dominant(t, true),
        is_diagonally_dominant(t, false),
        is_z_tensor(t),
        is_b_tensor(t, true),
        is_b_tensor(t, false),
        hull_membership(t),
    ];
    classes.push(is_copositive(t, budget)?);
    classes.push(is_psd(t, budget)?);
    let spectral_radius = if nonnegative {
        Some(nqz_spectral_radius(t, 1e-12, 20_000)?)
    } else {
        None
    };
    let eigenpairs = find_h_eigenpairs(t, budget)?;
    let dnn_consistent =
        symmetric && nonnegative && eigenpairs.iter().all(|p| p.lambda >= -budget.tol);
    Ok(AnalyzeReport {
        order: t.order(),
        dim: t.dim(),
        symmetry: SymmetryReport {
            flagged: t.symmetric(),
            holds: symmetric,
        },
        nonnegative,
        provenance: t
            .provenance()
            .filter(|p| p.matches(t))
            .map(|p| p.kind().to_string()),
        diagonal: vec![diagonal_sign_report(t, true), diagonal_sign_report(t, false)],
        classes,
        m_tensor: classify_m_tensor(t, None),
        h_tensor: is_h_tensor(t, None),
        spectral_radius,
        p: check_p(t, budget)?,
        p0: check_p0(t, budget)?,
        s: check_s(t, budget)?,
        eigenpairs,
        dnn_consistent,
    })
}

#[derive(Debug, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ReproReport {
    pub pass: bool,
    pub y: Vec<f64>,
    pub checks: Vec<GoldenCheck>,
    pub p0: PVerdict,
    pub eigenpairs: Vec<EigenPair>,
}

impl ReproReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            s.push_str(&format!(
                "{tag}  {}: expected {}, got {}\n",
                c.name, c.expected, c.actual
            ));
        }
        s.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        s
    }
}

/// The worked-example checks. Indices in check names are 1-based.
pub fn repro(t: &Tensor, budget: &SearchBudget) -> ptensor::Result<ReproReport> {
    let y = dnn_witness();
    let mut checks = Vec::new();
    if t.order() != 3 || t.dim() != 3 {
        checks.push(GoldenCheck {
            name: "shape".into(),
            expected: "order 3, dimension 3".into(),
            actual: format!("order {}, dimension {}", t.order(), t.dim()),
            pass: false,
        });
        let p0 = check_p0(t, budget)?;
        return Ok(ReproReport {
            pass: false,
            y,
            checks,
            p0,
            eigenpairs: Vec::new(),
        });
    }
    let terms = phi_terms(t, &y)?;
    for (i, expected) in [(1usize, -0.5), (2, -1.0)] {
        let actual = terms[i];
        checks.push(GoldenCheck {
            name: format!("y_{k}^2 (A y^2)_{k}", k = i + 1),
            expected: expected.to_string(),
            actual: actual.to_string(),
            pass: (actual - expected).abs() <= GOLDEN_TOL,
        });
    }
    let p0 = check_p0(t, budget)?;
    let witness_value = match &p0.witness {
        Some(w) => phi_p0(t, w, budget.tau_rel).ok(),
        None => None,
    };
    checks.push(GoldenCheck {
        name: "P0 check refutes with phi_p0(witness) < 0".into(),
        expected: "REFUTED".into(),
        actual: format!("{:?} with phi_p0 {:?}", p0.verdict, witness_value),
        pass: p0.is_refuted() && witness_value.is_some_and(|v| v < 0.0),
    });
    let eigenpairs = find_h_eigenpairs(t, budget)?;
    let min_lambda = eigenpairs.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
    checks.push(GoldenCheck {
        name: format!("every H-eigenvalue found is positive ({} starts)", budget.starts),
        expected: "at least one pair, all lambda > 0".into(),
        actual: format!("{} pairs, smallest lambda {min_lambda}", eigenpairs.len()),
        pass: !eigenpairs.is_empty() && min_lambda > 0.0,
    });
    Ok(ReproReport {
        pass: checks.iter().all(|c| c.pass),
        y,
        checks,
        p0,
        eigenpairs,
    })
}

fn need<T: Clone>(v: &Option<T>, flag: &str, kind: GenKind) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| CliError::usage(format!("{kind:?} needs --{flag}").to_lowercase()))
}

/// Builds the tensor requested by `gen`.
pub fn generate(args: &GenArgs) -> CliResult<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let kind = args.kind;
    let t = match kind {
        GenKind::Identity => Tensor::identity(need(&args.m, "m", kind)?, need(&args.n, "n", kind)?),
        GenKind::Allones => Tensor::all_ones(need(&args.m, "m", kind)?, need(&args.n, "n", kind)?),
        GenKind::Mtensor => {
            let (m, n) = (need(&args.m, "m", kind)?, need(&args.n, "n", kind)?);
            if !(args.margin > 0.0) {
                return Err(CliError::usage("--margin must be positive"));
            }
            let b = if args.random_b {
                Tensor::from_fn(m, n, |_| rng.random::<f64>())
            } else {
                Tensor::all_ones(m, n)
            }
            .map_err(CliError::usage)?;
            mtensor_from(&b, args.margin)
        }
        GenKind::Cauchy => cauchy_tensor(&need(&args.u, "u", kind)?, need(&args.m, "m", kind)?),
        GenKind::Laplacian => {
            let path = need(&args.hypergraph, "hypergraph", kind)?;
            let v = io::read_json(&path).map_err(CliError::parse)?;
            let g: Hypergraph = serde_json::from_value(v).map_err(CliError::parse)?;
            let l = laplacian_tensors(&g).map_err(CliError::usage)?;
            Ok(match args.variant {
                VariantArg::Adjacency => l.adjacency,
                VariantArg::Laplacian => l.laplacian,
                VariantArg::Signless => l.signless,
            })
        }
        GenKind::Cp => {
            let m = need(&args.m, "m", kind)?;
            let factors = match &args.factors {
                Some(s) => parse_factors(s)?,
                None => {
                    let n = need(&args.n, "n", kind)?;
                    let r = args.rank.unwrap_or(n);
                    (0..r)
                        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                        .collect()
                }
            };
            FactorSet::new(factors).and_then(|f| cp_tensor(&f, m))
        }
        GenKind::BasisP0 => {
            let idx = need(&args.indices, "indices", kind)?;
            let n = args.n.unwrap_or_else(|| idx.iter().max().map_or(1, |&i| i + 1));
            basis_p0_tensor(&idx, n, args.negate)
        }
        GenKind::Random => {
            let (m, n) = (need(&args.m, "m", kind)?, need(&args.n, "n", kind)?);
            Tensor::from_fn(m, n, |_| rng.random_range(-1.0..1.0)).map(|t| {
                if args.symmetric {
                    t.symmetrize()
                } else {
                    t
                }
            })
        }
    };
    t.map_err(CliError::usage)
}

/// `s I - B` with `s` the certified upper bound on `rho(B)` plus `margin`.
pub fn mtensor_from(b: &Tensor, margin: f64) -> ptensor::Result<Tensor> {
    let r = nqz_spectral_radius(b, 1e-12, 20_000)?;
    let s = r.upper_bound + margin;
    let neg = b.scaled(-1.0)?;
    let a = neg.add_scaled_identity(s)?;
    Ok(if b.symmetric() { a.into_symmetric()? } else { a })
}

fn parse_factors(s: &str) -> CliResult<Vec<Vec<f64>>> {
    s.split(';')
        .map(|v| {
            v.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::usage(format!("bad factor entry {x:?}: {e}")))
                })
                .collect()
        })
        .collect()
}
