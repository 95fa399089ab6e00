//! Command-line front end. Results go to stdout (JSON, CSV or a text table),
//! diagnostics to stderr. Exit codes: 0 success, 2 input error, 3 numerical
//! failure or reported violations.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::basis::{constant_overlap_basis, gram_determinant, BasisFile, SuperpositionBasis};
use crate::channels::ChannelFile;
use crate::error::{Error, Result};
use crate::harness::{
    run_axiom_campaign, run_oracle_campaign, BasisSpec, CampaignConfig, CampaignReport, ChannelFamily, OracleConfig,
    OracleId, ToleranceTable,
};
use crate::linalg::CMat;
use crate::measures::example1::example1_closed_form;
use crate::measures::{gamma_example1, m_l1_roof, MeasureId, RoofOptions};
use crate::qstate::{free_state, random_density, random_free, rho_x, DensityMatrix, StateFile};
use crate::serde_complex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Largest tolerated `|value − closed form|` in the Example-1 sweep.
const SWEEP_GAP: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "superposition", version, about = "Superposition measures over non-orthogonal bases")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram matrix, determinant, dual normalizations and independence verdict.
    Gram(BasisArgs),
    /// Evaluate one measure on a state; prints the result with its certificate.
    Measure(MeasureArgs),
    /// CSV sweep of the qubit family: closed form, roof and Γ.
    Example1(Example1Args),
    /// Axiom campaign (and oracle campaign at d = 2 when one is registered).
    Axioms(AxiomsArgs),
    /// Write state, basis or channel fixtures as JSON.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Basis JSON file `{"dimension": d, "vectors": [[re, im], ...]}` (column-major).
    #[arg(long, conflicts_with = "constant")]
    pub basis: Option<PathBuf>,
    /// Constant-overlap basis: dimension and overlap.
    #[arg(long, num_args = 2, value_names = ["D", "MU"], allow_negative_numbers = true)]
    pub constant: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// One of l1, rel_ent, rank, robustness, weight, l1_roof, rel_ent_roof, delta.
    #[arg(long)]
    pub measure: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Roof restarts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct Example1Args {
    /// Comma-separated overlaps.
    #[arg(long, value_delimiter = ',', default_value = "0.5", allow_hyphen_values = true)]
    pub mu: Vec<f64>,
    /// Number of x values spread evenly over [-0.45, 0.45].
    #[arg(long, default_value_t = 21)]
    pub x_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[arg(long)]
    pub measure: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Channel family: free, real_dual or cyclic (default depends on the measure).
    #[arg(long)]
    pub family: Option<String>,
    /// Overrides the tolerance table.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Roof restarts per evaluation.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// `ρ(x)` over the qubit constant-overlap basis.
    RhoX,
    /// Random free state.
    Free,
    /// Single basis projector `|c_1⟩⟨c_1|`.
    Projector,
    /// Random density matrix of the given rank.
    Random,
    /// Random free channel of the chosen family.
    Channel,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(value_enum)]
    pub kind: FixtureKind,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "free")]
    pub family: String,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(config, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn execute(config: CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match config.command {
        Command::Gram(a) => cmd_gram(&a, out),
        Command::Measure(a) => cmd_measure(&a, out),
        Command::Example1(a) => cmd_example1(&a, out, err),
        Command::Axioms(a) => cmd_axioms(&a, out, err),
        Command::Fixture(a) => cmd_fixture(&a, out),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a readable file", path.display()),
        )));
    }
    Ok(())
}

fn parse_constant(values: &[String]) -> Result<(usize, f64)> {
    let d = values[0]
        .parse::<usize>()
        .map_err(|_| Error::ParameterOutOfRange(format!("dimension `{}` is not a positive integer", values[0])))?;
    let mu = values[1]
        .parse::<f64>()
        .map_err(|_| Error::ParameterOutOfRange(format!("overlap `{}` is not a number", values[1])))?;
    Ok((d, mu))
}

fn load_basis(args: &BasisArgs) -> Result<SuperpositionBasis> {
    match (&args.basis, &args.constant) {
        (Some(path), _) => {
            require_file(path)?;
            let file: BasisFile = serde_json::from_str(&fs::read_to_string(path)?)?;
            SuperpositionBasis::try_from(file)
        }
        (None, Some(values)) => {
            let (d, mu) = parse_constant(values)?;
            constant_overlap_basis(d, mu)
        }
        (None, None) => Err(Error::ParameterOutOfRange("give --basis FILE or --constant D MU".into())),
    }
}

fn load_state(path: &Path) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_density()
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct GramReport {
    dimension: usize,
    #[serde(with = "serde_complex::matrix")]
    gram: CMat,
    determinant: f64,
    xi: Vec<f64>,
    independent: bool,
}

fn cmd_gram(args: &BasisArgs, out: &mut dyn Write) -> Result<i32> {
    if let Some(path) = &args.basis {
        require_file(path)?;
    }
    let basis = load_basis(args)?;
    let report = GramReport {
        dimension: basis.dimension(),
        gram: basis.gram().clone(),
        determinant: gram_determinant(&basis),
        xi: basis.xi().to_vec(),
        independent: true,
    };
    print_json(out, &report)?;
    Ok(EXIT_OK)
}

fn cmd_measure(args: &MeasureArgs, out: &mut dyn Write) -> Result<i32> {
    require_file(&args.state)?;
    if let Some(path) = &args.basis.basis {
        require_file(path)?;
    }
    let measure: MeasureId = args.measure.parse()?;
    let basis = load_basis(&args.basis)?;
    let rho = load_state(&args.state)?;
    let opts = RoofOptions { restarts: args.restarts, ..RoofOptions::default() }.with_seed(args.seed);
    let result = measure.evaluate(&rho, &basis, &opts)?;
    print_json(out, &result)?;
    Ok(EXIT_OK)
}

fn x_values(steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| -0.45 + 0.9 * i as f64 / (n - 1) as f64).collect(),
    }
}

fn cmd_example1(args: &Example1Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if args.mu.iter().any(|mu| !(*mu > -1.0 && *mu < 1.0)) {
        return Err(Error::ParameterOutOfRange("every mu must lie in (-1, 1)".into()));
    }
    let opts = RoofOptions { restarts: args.restarts, ..RoofOptions::default() }.with_seed(args.seed);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &mu in &args.mu {
        for x in x_values(args.x_steps) {
            let (rho, basis) = rho_x(x, mu)?;
            let closed = example1_closed_form(x, mu);
            let roof = m_l1_roof(&rho, &basis, &opts)?.value;
            let gamma = gamma_example1(x, mu)?.1.value;
            let gap = (roof - closed).abs().max((gamma - closed).abs());
            worst = worst.max(gap);
            rows.push(format!("{mu:.11e},{x:.11e},{closed:.11e},{roof:.11e},{gamma:.11e},{gap:.11e}"));
        }
    }
    writeln!(out, "mu,x,closed_form,roof_value,gamma_value,gap")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    if worst > SWEEP_GAP {
        writeln!(err, "largest gap {worst:e} exceeds {SWEEP_GAP:e}")?;
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn cmd_axioms(args: &AxiomsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let measure: MeasureId = args.measure.parse()?;
    let family = match &args.family {
        Some(name) => name.parse()?,
        None => ChannelFamily::default_for(measure),
    };
    let table = ToleranceTable::from_env()?;
    let tolerance = args.tolerance.unwrap_or_else(|| table.get(measure));
    let basis = BasisSpec::Constant { d: args.d, mu: args.mu };
    let mut config = CampaignConfig::new(measure, basis, args.trials, args.seed);
    config.family = family;
    config.tolerance = tolerance;
    config.roof = RoofOptions::with_restarts(args.restarts);

    let mut reports: Vec<CampaignReport> = vec![run_axiom_campaign(&config)?];
    if args.d == 2 {
        if let Some(oracle) = OracleId::for_measure(measure) {
            let mut oc = OracleConfig::new(measure, args.mu, args.trials.min(50), args.seed)?;
            oc.oracle = oracle;
            oc.roof = RoofOptions::with_restarts(args.restarts);
            reports.push(run_oracle_campaign(&oc)?);
        }
    }
    match args.format {
        ReportFormat::Json => print_json(out, &reports)?,
        ReportFormat::Table => {
            for r in &reports {
                write!(out, "{}", r.to_table())?;
            }
        }
    }
    let violations: usize = reports.iter().map(CampaignReport::violation_count).sum();
    if violations > 0 {
        writeln!(err, "{violations} violation(s)")?;
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

fn cmd_fixture(args: &FixtureArgs, out: &mut dyn Write) -> Result<i32> {
    fs::create_dir_all(&args.out)?;
    let family: ChannelFamily = args.family.parse()?;
    let (basis, state) = match args.kind {
        FixtureKind::RhoX => {
            let (rho, basis) = rho_x(args.x, args.mu)?;
            (basis, Some(rho))
        }
        FixtureKind::Free => {
            let basis = constant_overlap_basis(args.d, args.mu)?;
            let rho = random_free(&basis, args.seed);
            (basis, Some(rho))
        }
        FixtureKind::Projector => {
            let basis = constant_overlap_basis(args.d, args.mu)?;
            let mut p = vec![0.0; args.d];
            p[0] = 1.0;
            let rho = free_state(&basis, &p);
            (basis, Some(rho))
        }
        FixtureKind::Random => {
            let basis = constant_overlap_basis(args.d, args.mu)?;
            let rho = random_density(args.d, args.rank.unwrap_or(args.d), args.seed)?;
            (basis, Some(rho))
        }
        FixtureKind::Channel => (constant_overlap_basis(args.d, args.mu)?, None),
    };
    let mut written = vec![write_json(&args.out, "basis.json", &BasisFile::from(&basis))?];
    match state {
        Some(rho) => written.push(write_json(&args.out, "state.json", &rho)?),
        None => {
            let channel = family.sample(&basis, args.seed)?;
            written.push(write_json(&args.out, "channel.json", &ChannelFile::describe(&channel, &basis))?);
        }
    }
    for path in written {
        writeln!(out, "{}", path.display())?;
    }
    Ok(EXIT_OK)
}
