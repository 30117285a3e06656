//! The `hypb` experiment runner.
//!
//! Every run resolves its parameters from, in increasing priority, the
//! built-in defaults, `HYPB_SEED` (seed only), a JSON config and command
//! line flags. The resolved config is written next to the outputs and can
//! be fed back through `--config` to reproduce them.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance::{run_acceptance_with, AcceptanceConfig};
use crate::densities::{
    cosh_bm_curve, exp_time_transform, g_curve, geometric_z_grid, DensityCurve, ZeroLawSample,
};
use crate::error::Error;
use crate::identities::{
    check_bougerol_general, check_charfn, check_dhb, check_gsde, check_sinh_cdf_many, check_sinh_displayed,
    check_sinh_rep, check_theta_arcosh, CheckConfig, Control, IdentityVerdict, SeedPair,
};
use crate::laplace::{evaluate, LtMethod, LtQuery, LtRecord, McConfig};
use crate::paths::TimeGrid;
use crate::rng::{Exec, Seed};
use crate::sde::{sample_besq_exact, simulate_r, simulate_theta, simulate_xi, BesqSpec, ProcessSpec};
use crate::specfun::{QuadratureRule, DEFAULT_GH_NODES};
use crate::stats::{mc_reduce, MCEstimate, STDERR_GATE};

pub const EXIT_OK: i32 = 0;
/// Output files could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
/// A gated check or acceptance criterion failed.
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "hypb-out";

#[derive(Parser, Debug)]
#[command(name = "hypb", version, about = "Hyperbolic Bessel process experiments")]
pub struct Cli {
    /// JSON experiment config; flags override its parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the JSON summary and CSV files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Experiment name used in output filenames.
    #[arg(long, global = true)]
    pub name: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate sample paths (terminal values for `besq`). `x` is the
    /// starting value of the simulated process.
    Simulate {
        #[arg(value_enum)]
        process: Process,
        #[command(flatten)]
        params: Params,
    },
    /// Evaluate E exp(−λ cosh R_t) by several routes and compare them.
    Laplace {
        #[command(flatten)]
        params: Params,
    },
    /// Density curves of cosh R_t or R_t started at 0.
    Density {
        #[arg(value_enum)]
        kind: DensityKind,
        #[command(flatten)]
        params: Params,
    },
    /// Two-sample check of a distributional identity.
    Identity {
        #[arg(value_enum)]
        kind: IdentityKind,
        #[command(flatten)]
        params: Params,
    },
    /// Run the acceptance suite.
    Acceptance {
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    R,
    Theta,
    Xi,
    Besq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    /// α = 0: mixture curve, G-derivative curve and normalization.
    AlphaZero,
    /// Any α ≥ −1/2 by the mixture formula.
    Mixture,
    /// Exact density of cosh(B_t).
    Bm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    Bougerol,
    BougerolGeneral,
    Charfn,
    Dhb,
    Theta,
    SinhRep,
    SinhCdf,
    SinhDisplayed,
    Gsde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variable {
    Cosh,
    R,
}

/// Every parameter any operation accepts. Unset flags (and `false`
/// switches) leave config values alone.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Index α of the process.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Starting point x (R_0 = x).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Time horizon.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Argument λ of E exp(−λ cosh R_t).
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Comma-separated Laplace routes: direct, gbm, j0, gamma, quadrature.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<LtMethod>>,
    /// Rate of an independent exponential time replacing t.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Right end of the density grid.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Density of cosh R_t or of R_t.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable: Option<Variable>,
    /// Comma-separated CDF arguments.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    /// Coefficient u of e^{B_t} in the joint characteristic function.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    /// Coefficient v of W_{A_t}.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Dimension k of the generalized squared-Bessel SDE.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Replace A_t by t (Bougerol checks); the run passes when the
    /// identity is rejected.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub control: bool,
    /// Paths per estimate (per side for identities).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_per_unit: Option<usize>,
    /// Master seed; defaults to $HYPB_SEED, then 42.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Spread Monte Carlo paths over threads; results are unchanged.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub parallel: bool,
    /// Also run the deliberately broken identities.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub negative_controls: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub determinism_n: Option<usize>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Config file layout; `params` uses the flag names with `_` for `-`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `"laplace"`, `"simulate r"`, `"identity bougerol"`, …; must match
    /// the subcommand when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Simulate(Process),
    Laplace,
    Density(DensityKind),
    Identity(IdentityKind),
    Acceptance,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

impl Operation {
    /// Identifier as written in configs, e.g. `identity sinh-cdf`.
    pub fn id(&self) -> String {
        match self {
            Operation::Simulate(p) => format!("simulate {}", value_name(p)),
            Operation::Laplace => "laplace".into(),
            Operation::Density(k) => format!("density {}", value_name(k)),
            Operation::Identity(k) => format!("identity {}", value_name(k)),
            Operation::Acceptance => "acceptance".into(),
        }
    }

    fn default_name(&self) -> String {
        self.id().replace(' ', "-")
    }

    /// Parameter keys the operation reads.
    pub fn keys(&self) -> &'static [&'static str] {
        use IdentityKind as I;
        const MC: [&str; 4] = ["n", "steps_per_unit", "seed", "parallel"];
        macro_rules! keys {
            ($($k:literal),*) => {{
                const K: &[&str] = &[$($k,)* MC[0], MC[1], MC[2], MC[3]];
                K
            }};
        }
        match self {
            Operation::Simulate(_) => keys!("alpha", "x", "t"),
            Operation::Laplace => keys!("alpha", "x", "t", "lambda", "methods", "delta"),
            Operation::Density(DensityKind::AlphaZero) => keys!("t", "zmax", "points"),
            Operation::Density(DensityKind::Mixture) => keys!("alpha", "t", "zmax", "points", "variable"),
            Operation::Density(DensityKind::Bm) => &["t", "zmax", "points"],
            Operation::Identity(I::Bougerol) => keys!("t", "control"),
            Operation::Identity(I::BougerolGeneral) => keys!("x", "t", "control"),
            Operation::Identity(I::Charfn) => keys!("u", "v", "t"),
            Operation::Identity(I::Dhb | I::Theta | I::SinhRep) => keys!("alpha", "x", "t"),
            Operation::Identity(I::SinhCdf) => keys!("alpha", "x", "t", "w"),
            Operation::Identity(I::SinhDisplayed) => keys!("x", "t"),
            Operation::Identity(I::Gsde) => keys!("k", "x", "t"),
            Operation::Acceptance => keys!("negative_controls", "determinism_n"),
        }
    }

    fn defaults(&self) -> Params {
        let identity_n = Some(100_000);
        let base = Params { steps_per_unit: Some(512), t: Some(1.0), ..Params::default() };
        match self {
            Operation::Simulate(p) => Params {
                alpha: Some(0.0),
                x: Some(if *p == Process::Theta { 1.0 } else { 0.0 }),
                n: Some(100),
                ..base
            },
            Operation::Laplace => Params { alpha: Some(0.0), x: Some(0.0), lambda: Some(1.0), n: Some(100_000), ..base },
            Operation::Density(k) => Params {
                alpha: Some(0.0),
                zmax: Some(10.0),
                points: Some(crate::densities::CURVE_POINTS),
                variable: Some(Variable::Cosh),
                n: (*k != DensityKind::Bm).then_some(100_000),
                ..base
            },
            Operation::Identity(k) => {
                let mut p = Params { alpha: Some(0.0), x: Some(0.0), n: identity_n, ..base };
                match k {
                    IdentityKind::Charfn => {
                        p.u = Some(1.0);
                        p.v = Some(1.0);
                    }
                    IdentityKind::SinhCdf => p.w = Some(vec![0.5, 1.0, 2.0]),
                    IdentityKind::SinhDisplayed | IdentityKind::BougerolGeneral => p.x = Some(1.0),
                    IdentityKind::Theta => p.x = Some(1.0),
                    IdentityKind::Gsde => p.k = Some(1),
                    _ => {}
                }
                p
            }
            Operation::Acceptance => {
                let d = AcceptanceConfig::default();
                Params { n: Some(d.n), steps_per_unit: Some(d.steps_per_unit), determinism_n: Some(d.determinism_n), ..Params::default() }
            }
        }
    }
}

/// Why a run did not finish with exit 0.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(String),
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
            CliError::ChecksFailed(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::ChecksFailed(m) => write!(f, "checks failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(m) => CliError::Usage(m),
            Error::Io(e) => CliError::Io(e.to_string()),
            Error::Json(e) => CliError::Io(e.to_string()),
            e => CliError::Numeric(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, std::env::var("HYPB_SEED").ok().as_deref()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("hypb: {e}");
            e.exit_code()
        }
    }
}

fn overlay(base: Params, top: &Params) -> Params {
    Params {
        alpha: top.alpha.or(base.alpha),
        x: top.x.or(base.x),
        t: top.t.or(base.t),
        lambda: top.lambda.or(base.lambda),
        methods: top.methods.clone().or(base.methods),
        delta: top.delta.or(base.delta),
        zmax: top.zmax.or(base.zmax),
        points: top.points.or(base.points),
        variable: top.variable.or(base.variable),
        w: top.w.clone().or(base.w),
        u: top.u.or(base.u),
        v: top.v.or(base.v),
        k: top.k.or(base.k),
        control: top.control || base.control,
        n: top.n.or(base.n),
        steps_per_unit: top.steps_per_unit.or(base.steps_per_unit),
        seed: top.seed.or(base.seed),
        parallel: top.parallel || base.parallel,
        negative_controls: top.negative_controls || base.negative_controls,
        determinism_n: top.determinism_n.or(base.determinism_n),
    }
}

/// Keys of `p` that are set.
fn set_keys(p: &Params) -> Vec<String> {
    match serde_json::to_value(p) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Keeps only `keys` of `p`.
fn restrict(p: Params, keys: &[&str]) -> Params {
    let mut v = serde_json::to_value(&p).expect("params serialize");
    if let Value::Object(m) = &mut v {
        m.retain(|k, _| keys.contains(&k.as_str()));
    }
    serde_json::from_value(v).expect("a subset of valid params is valid")
}

/// Effective config of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub name: String,
    pub operation: Operation,
    pub params: Params,
    pub out: PathBuf,
}

impl Resolved {
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            name: Some(self.name.clone()),
            operation: Some(self.operation.id()),
            params: self.params.clone(),
            output: Some(self.out.clone()),
        }
    }

    fn seed(&self) -> Seed {
        Seed(self.params.seed.unwrap_or(DEFAULT_SEED))
    }

    fn exec(&self) -> Exec {
        if self.params.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    fn stem(&self) -> String {
        format!("{}-seed{}", self.name, self.seed())
    }

    fn get<T: Clone>(&self, v: &Option<T>, key: &str) -> CliResult<T> {
        v.clone().ok_or_else(|| CliError::Usage(format!("{} needs --{}", self.operation.id(), key.replace('_', "-"))))
    }
}

/// Merges defaults, environment seed, config file and flags for `op`.
pub fn resolve(
    op: Operation,
    flags: &Params,
    config: Option<ExperimentConfig>,
    name: Option<&str>,
    out: Option<&Path>,
    env_seed: Option<&str>,
) -> CliResult<Resolved> {
    let config = config.unwrap_or_default();
    if let Some(o) = &config.operation {
        if o.split_whitespace().collect::<Vec<_>>().join(" ") != op.id() {
            return Err(CliError::Usage(format!("config is for '{o}', not '{}'", op.id())));
        }
    }
    let mut base = op.defaults();
    if let Some(s) = env_seed {
        let seed = s.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("HYPB_SEED must be an unsigned integer, got '{s}'")))?;
        base.seed = Some(seed);
    }
    base.seed = base.seed.or(Some(DEFAULT_SEED));
    let merged = overlay(overlay(base, &config.params), flags);
    let keys = op.keys();
    let mut foreign: Vec<String> = set_keys(&overlay(config.params.clone(), flags))
        .into_iter()
        .filter(|k| !keys.contains(&k.as_str()))
        .collect();
    foreign.sort();
    if !foreign.is_empty() {
        return Err(CliError::Usage(format!("{} does not take: {}", op.id(), foreign.join(", "))));
    }
    let params = restrict(merged, keys);
    if op == Operation::Laplace && params.delta.is_some() && params.methods.is_some() {
        return Err(CliError::Usage("--delta and --methods are exclusive".into()));
    }
    let default_name = || if params.control { op.default_name() + "-control" } else { op.default_name() };
    let name = name.map(str::to_string).or(config.name).unwrap_or_else(default_name);
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Usage(format!("experiment name '{name}' is not a valid file stem")));
    }
    let out = out.map(Path::to_path_buf).or(config.output).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Resolved { name, operation: op, params, out })
}

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Runs a parsed command line. `env_seed` is the value of `HYPB_SEED`.
pub fn run(cli: &Cli, env_seed: Option<&str>) -> CliResult<()> {
    let (op, flags) = match &cli.command {
        Command::Simulate { process, params } => (Operation::Simulate(*process), params),
        Command::Laplace { params } => (Operation::Laplace, params),
        Command::Density { kind, params } => (Operation::Density(*kind), params),
        Command::Identity { kind, params } => (Operation::Identity(*kind), params),
        Command::Acceptance { params } => (Operation::Acceptance, params),
    };
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let r = resolve(op, flags, config, cli.name.as_deref(), cli.out.as_deref(), env_seed)?;
    fs::create_dir_all(&r.out).map_err(|e| io_err(&r.out, e))?;
    let outcome = match op {
        Operation::Simulate(p) => simulate(&r, p)?,
        Operation::Laplace => laplace(&r)?,
        Operation::Density(k) => density(&r, k)?,
        Operation::Identity(k) => identity(&r, k)?,
        Operation::Acceptance => acceptance(&r)?,
    };
    let config_path = r.out.join(format!("{}.config.json", r.stem()));
    write_json(&config_path, &r.config())?;
    let summary_path = r.out.join(format!("{}.json", r.stem()));
    let summary = json!({ "config": r.config(), "pass": outcome.pass, "result": outcome.result });
    write_json(&summary_path, &summary)?;
    println!("wrote {}", summary_path.display());
    if outcome.pass {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(outcome.failure.unwrap_or_else(|| "see summary".into())))
    }
}

struct Outcome {
    result: Value,
    pass: bool,
    failure: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, pass: true, failure: None }
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| io_err(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| io_err(path, e))?))
}

fn simulate(r: &Resolved, process: Process) -> CliResult<Outcome> {
    let p = &r.params;
    let (alpha, x, t, n) = (r.get(&p.alpha, "alpha")?, r.get(&p.x, "x")?, r.get(&p.t, "t")?, r.get(&p.n, "n")?);
    let spu = r.get(&p.steps_per_unit, "steps_per_unit")?;
    let (seed, exec) = (r.seed(), r.exec());
    let path = r.out.join(format!("{}-paths.csv", r.stem()));
    let terminal = if process == Process::Besq {
        let v = sample_besq_exact(&BesqSpec::new(alpha, x)?, t, seed, n, exec)?;
        let mut w = create(&path)?;
        writeln!(w, "value").map_err(|e| io_err(&path, e))?;
        for x in &v {
            writeln!(w, "{x:e}").map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        v
    } else {
        let grid = TimeGrid::with_resolution(t, spu)?;
        let batch = match process {
            Process::R => simulate_r(&ProcessSpec::new(alpha, x)?, grid, seed, n, exec)?,
            Process::Theta => simulate_theta(alpha, x, grid, seed, n, exec)?,
            _ => simulate_xi(x, grid, seed, n, exec)?,
        };
        let mut w = create(&path)?;
        batch.write_csv(&mut w)?;
        w.flush().map_err(|e| io_err(&path, e))?;
        batch.terminal()
    };
    let mean = mc_reduce(&terminal)?;
    println!("{} terminal mean {:.6} ± {:.2e} over {n} paths", r.operation.id(), mean.mean, mean.stderr);
    println!("wrote {}", path.display());
    Ok(Outcome::ok(json!({ "terminal_mean": mean, "paths_csv": path })))
}

fn laplace(r: &Resolved) -> CliResult<Outcome> {
    let p = &r.params;
    let (alpha, x, t, lambda) = (r.get(&p.alpha, "alpha")?, r.get(&p.x, "x")?, r.get(&p.t, "t")?, r.get(&p.lambda, "lambda")?);
    let mc = McConfig { n: r.get(&p.n, "n")?, steps_per_unit: r.get(&p.steps_per_unit, "steps_per_unit")?, seed: r.seed(), exec: r.exec() };
    if let Some(delta) = p.delta {
        let spec = ProcessSpec::new(alpha, x)?;
        let res = exp_time_transform(delta, lambda, &spec, mc.steps_per_unit, mc.seed, mc.n, mc.exec)?;
        println!("E exp(-λ cosh R_T), T ~ Exp({delta}): {:.6} ± {:.2e}", res.mc.mean, res.mc.stderr);
        for o in &res.readings {
            println!("  {:?} reading: {:?} ({:?})", o.reading, o.value, o.status);
        }
        return Ok(Outcome::ok(serde_json::to_value(&res).map_err(Error::from)?));
    }
    let query = LtQuery::new(alpha, x, t, lambda)?;
    let methods = p.methods.clone().unwrap_or_else(|| {
        let mut m = LtMethod::MONTE_CARLO.to_vec();
        if alpha == -0.5 {
            m.push(LtMethod::Quadrature);
        }
        m
    });
    if methods.is_empty() {
        return Err(CliError::Usage("--methods is empty".into()));
    }
    // each route gets its own stream so the comparisons are between
    // independent estimates
    let records = methods
        .iter()
        .enumerate()
        .map(|(i, &m)| evaluate(&query, m, &McConfig { seed: mc.seed.derive(i as u64), ..mc }))
        .collect::<crate::Result<Vec<LtRecord>>>()?;
    let mut comparisons = Vec::new();
    let mut failure = None;
    for (i, a) in records.iter().enumerate() {
        println!("{:>10}  {:.8} ± {:.2e}", a.method, a.mean, a.stderr);
        for b in &records[i + 1..] {
            let ea = MCEstimate { mean: a.mean, stderr: a.stderr, n: a.n };
            let eb = MCEstimate { mean: b.mean, stderr: b.stderr, n: b.n };
            let z = ea.z_score(&eb);
            if z > STDERR_GATE && failure.is_none() {
                failure = Some(format!("{} vs {}: {z:.2} combined stderr", a.method, b.method));
            }
            comparisons.push(json!({ "pair": [a.method, b.method], "z": z, "pass": z <= STDERR_GATE }));
        }
    }
    Ok(Outcome {
        result: json!({ "estimates": records, "comparisons": comparisons }),
        pass: failure.is_none(),
        failure,
    })
}

fn curve_files(r: &Resolved, curve: &DensityCurve, tag: &str) -> CliResult<Value> {
    let (csv, meta) = curve.write_files(&r.out, &format!("{}-{tag}", r.stem()))?;
    println!("wrote {}", csv.display());
    Ok(json!({ "csv": csv, "meta": meta }))
}

fn density(r: &Resolved, kind: DensityKind) -> CliResult<Outcome> {
    let p = &r.params;
    let t = r.get(&p.t, "t")?;
    let zmax = r.get(&p.zmax, "zmax")?;
    let points = r.get(&p.points, "points")?;
    let variable = if kind == DensityKind::Mixture { r.get(&p.variable, "variable")? } else { Variable::Cosh };
    let zs: Vec<f64> = match variable {
        Variable::Cosh => geometric_z_grid(1e-3, zmax - 1.0, points)?,
        Variable::R => geometric_z_grid(1e-3, zmax, points)?.iter().map(|z| z - 1.0).collect(),
    };
    if kind == DensityKind::Bm {
        let curve = cosh_bm_curve(t, &zs)?;
        return Ok(Outcome::ok(json!({ "curve": curve_files(r, &curve, "gaussian")? })));
    }
    let alpha = if kind == DensityKind::AlphaZero { 0.0 } else { r.get(&p.alpha, "alpha")? };
    let grid = TimeGrid::with_resolution(0.25 * t, r.get(&p.steps_per_unit, "steps_per_unit")?)?;
    let law = ZeroLawSample::draw(alpha, t, &grid, r.seed(), r.get(&p.n, "n")?, r.exec())?;
    let curve = match variable {
        Variable::Cosh => law.cosh_curve(&zs, r.exec())?,
        Variable::R => law.r_curve(&zs, r.exec())?,
    };
    let mut result = json!({ "curve": curve_files(r, &curve, "mixture")? });
    if variable == Variable::R {
        return Ok(Outcome::ok(result));
    }
    let z_max = law.truncation()?;
    let norm = law.normalization(z_max)?;
    println!("normalization over [1, {z_max:.4}]: {norm:.6}");
    result["normalization"] = json!({ "upper": z_max, "value": norm, "pass": norm >= 0.99 });
    let mut failure = (norm < 0.99).then(|| format!("normalization {norm:.6} < 0.99"));
    if kind == DensityKind::AlphaZero {
        let g = g_curve(t, &zs, &QuadratureRule::gauss_hermite(DEFAULT_GH_NODES)?, r.exec())?;
        result["g_curve"] = curve_files(r, &g, "g")?;
        let worst = curve
            .points
            .iter()
            .zip(&g.points)
            .map(|(m, g)| (m.value - g.value).abs() / (STDERR_GATE * m.stderr).max(0.02 * g.value.abs()))
            .fold(0.0, f64::max);
        println!("worst curve discrepancy: {worst:.3} of the max(3σ, 2%) band");
        result["agreement"] = json!({ "worst_band_fraction": worst, "pass": worst <= 1.0 });
        if worst > 1.0 && failure.is_none() {
            failure = Some(format!("curves differ by {worst:.3} bands"));
        }
    }
    Ok(Outcome { result, pass: failure.is_none(), failure })
}

fn identity(r: &Resolved, kind: IdentityKind) -> CliResult<Outcome> {
    let p = &r.params;
    let cfg = CheckConfig { n: r.get(&p.n, "n")?, steps_per_unit: r.get(&p.steps_per_unit, "steps_per_unit")?, exec: r.exec() };
    let seeds = SeedPair::split(r.seed());
    let t = r.get(&p.t, "t")?;
    let spec = || -> CliResult<ProcessSpec> { Ok(ProcessSpec::new(r.get(&p.alpha, "alpha")?, r.get(&p.x, "x")?)?) };
    let control = if p.control { Control::ClockIsTime } else { Control::None };
    let verdicts: Vec<IdentityVerdict> = match kind {
        IdentityKind::Bougerol => vec![check_bougerol_general(0.0, t, control, seeds, &cfg)?],
        IdentityKind::BougerolGeneral => vec![check_bougerol_general(r.get(&p.x, "x")?, t, control, seeds, &cfg)?],
        IdentityKind::Charfn => vec![check_charfn(r.get(&p.u, "u")?, r.get(&p.v, "v")?, t, seeds, &cfg)?],
        IdentityKind::Dhb => vec![check_dhb(&spec()?, t, seeds, &cfg)?],
        IdentityKind::Theta => vec![check_theta_arcosh(&spec()?, t, seeds, &cfg)?],
        IdentityKind::SinhRep => vec![check_sinh_rep(&spec()?, t, seeds, &cfg)?],
        IdentityKind::SinhCdf => check_sinh_cdf_many(&r.get(&p.w, "w")?, &spec()?, t, seeds, &cfg)?,
        IdentityKind::SinhDisplayed => vec![check_sinh_displayed(r.get(&p.x, "x")?, t, seeds, &cfg)?],
        IdentityKind::Gsde => vec![check_gsde(r.get(&p.k, "k")?, r.get(&p.x, "x")?, t, seeds, &cfg)?],
    };
    let expect_pass = !p.control;
    let mut failure = None;
    for v in &verdicts {
        println!(
            "{}  {}: {:.3e} vs threshold {:.3e}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.statistic,
            v.threshold
        );
        if v.pass != expect_pass && failure.is_none() {
            failure = Some(if expect_pass { format!("{} rejected", v.name) } else { format!("control {} not rejected", v.name) });
        }
    }
    Ok(Outcome { result: json!({ "verdicts": verdicts, "expect_pass": expect_pass }), pass: failure.is_none(), failure })
}

fn acceptance(r: &Resolved) -> CliResult<Outcome> {
    let p = &r.params;
    let config = AcceptanceConfig {
        seed: r.seed(),
        n: r.get(&p.n, "n")?,
        steps_per_unit: r.get(&p.steps_per_unit, "steps_per_unit")?,
        exec: r.exec(),
        negative_controls: p.negative_controls,
        determinism_n: r.get(&p.determinism_n, "determinism_n")?,
    };
    let report = run_acceptance_with(&config, |c, elapsed| {
        println!("{}", c.summary());
        eprintln!("   criterion {} took {:.1}s", c.id, elapsed.as_secs_f64());
    })?;
    for c in &report.controls {
        println!("{} control {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    let failed = report.failed();
    let failure = (!report.pass).then(|| {
        let mut m = format!("criteria {failed:?}");
        if report.controls.iter().any(|c| !c.pass) {
            m += " and negative controls";
        }
        m
    });
    Ok(Outcome { result: serde_json::to_value(&report).map_err(Error::from)?, pass: report.pass, failure })
}
