//! Command-line front end for `isotropy-core`.
//!
//! Systems and reports travel as JSON with a top-level `"format_version": 1`;
//! experiments are written as CSV. Exit codes: 0 success, 2 usage error,
//! 3 numerical failure, 4 I/O or parse failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use isotropy_core::bounds::{isotropic_cap, m_bar, p1_uniform};
use isotropy_core::montecarlo::{
    with_threads, CSV_HEADER, MIN_EXPECTATION_TRIALS, MIN_TAIL_TRIALS,
};
use isotropy_core::mvee::{john_decomposition, DEFAULT_MAX_ITERATIONS};
use isotropy_core::reduction::{reduce_centered_traced, reduce_isotropic_traced};
use isotropy_core::systems::FORMAT_VERSION;
use isotropy_core::{
    best_subset, dr_select, dr_volume_bound, estimate_expected_det2, gamma, generate, p1_exact,
    tail_probability, Error, ExperimentRecord, GeneratorKind, Sampler, WeightedVectorSystem,
};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "isotropy",
    version,
    about = "Discrete isotropic vector systems and their volume bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a simplex, cross-polytope or random-frame system.
    Gen(GenArgs),
    /// Report isotropy and centering residuals of a system.
    Check(CheckArgs),
    /// John decomposition from the minimum-volume ellipsoid of a CSV point cloud.
    Mvee(MveeArgs),
    /// Carathéodory reduction to at most d(d+1)/2 (or d(d+3)/2 centered) vectors.
    Reduce(ReduceArgs),
    /// Greedy Dvoretzky-Rogers selection of d vectors.
    Select(SelectArgs),
    /// The improvement factor gamma(d, m) and the greedy bound d!/d^d.
    Gamma(GammaArgs),
    /// Probability that d draws are pairwise distinct.
    P1(P1Args),
    /// Monte Carlo estimate of E[det^2].
    Expect(ExpectArgs),
    /// Monte Carlo estimate of the volume tail probability.
    Tail(TailArgs),
}

#[derive(Debug, Args)]
struct InputArg {
    /// Input file; standard input when omitted or "-".
    #[arg(long = "in", visible_alias = "system", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GeneratorKind,
    #[arg(long)]
    dim: usize,
    /// Number of vectors (random-frame only; must match for the others).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// System file (same as --in).
    #[arg(value_name = "FILE", conflicts_with = "input")]
    file: Option<PathBuf>,
    #[command(flatten)]
    input: InputArg,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct MveeArgs {
    #[command(flatten)]
    input: InputArg,
    /// Fit an ellipsoid with free center and return a centered decomposition.
    #[arg(long)]
    centered: bool,
    #[arg(long, default_value_t = 1e-7)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    /// Also write the ellipsoid (shape, center, dual weights) as JSON.
    #[arg(long, value_name = "FILE")]
    ellipsoid: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArg,
    /// Keep the system centered; bound d(d+3)/2 instead of d(d+1)/2.
    #[arg(long)]
    centered: bool,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArg,
    /// Also search all d-subsets for the largest determinant.
    #[arg(long)]
    best: bool,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct GammaArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    m: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("distribution").args(["m", "probabilities", "input"])))]
struct P1Args {
    #[arg(long)]
    dim: Option<usize>,
    /// Uniform distribution on m points.
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated probabilities.
    #[arg(long, value_delimiter = ',')]
    probabilities: Option<Vec<f64>>,
    /// System whose weights c_i/d give the probabilities (standard input when no
    /// distribution is given); d defaults to its dimension.
    #[arg(long = "in", visible_alias = "system", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplerKind {
    Gaussian,
    Sphere,
}

#[derive(Debug, Args)]
struct ExpectArgs {
    /// Draw unit vectors u_i with probability c_i/d from this system.
    #[arg(
        long = "in",
        visible_alias = "system",
        value_name = "FILE",
        conflicts_with = "sampler"
    )]
    input: Option<PathBuf>,
    /// Draw sqrt(d) u_i instead of u_i, an isotropic measure with E[det^2] = d!.
    #[arg(long, requires = "input")]
    scaled: bool,
    /// Continuous isotropic sampler instead of a system.
    #[arg(long, value_enum, requires = "dim")]
    sampler: Option<SamplerKind>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct TailArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArg,
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure together with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_USAGE
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Check(a) => cmd_check(a, stdout),
        Command::Mvee(a) => cmd_mvee(a, stdout),
        Command::Reduce(a) => cmd_reduce(a, stdout),
        Command::Select(a) => cmd_select(a, stdout),
        Command::Gamma(a) => cmd_gamma(a, stdout),
        Command::P1(a) => cmd_p1(a, stdout),
        Command::Expect(a) => cmd_expect(a, stdout),
        Command::Tail(a) => cmd_tail(a, stdout),
    }
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p)
            .map_err(|e| Failure::io(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::io(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn read_system(path: Option<&Path>) -> CliResult<WeightedVectorSystem> {
    let text = read_input(path)?;
    let name = path.map_or("standard input".into(), |p| p.display().to_string());
    WeightedVectorSystem::from_json(&text)
        .map_err(|e| Failure::io(format!("cannot parse system from {name}: {e}")))
}

fn write_text(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(format!("cannot write standard output: {e}"))),
    }
}

/// Pretty JSON with `format_version` as the first field.
fn versioned<T: Serialize>(body: &T) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("format_version".into(), json!(FORMAT_VERSION));
    match serde_json::to_value(body).expect("report types serialize") {
        serde_json::Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("value".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))
        .expect("JSON values serialize");
    text.push('\n');
    text
}

fn system_text(system: &WeightedVectorSystem) -> String {
    let mut text = system.to_json_document();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text
}

fn positive(name: &str, value: usize) -> CliResult<()> {
    if value == 0 {
        Err(Failure::usage(format!("--{name} must be positive")))
    } else {
        Ok(())
    }
}

fn check_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(Failure::usage("--threads must be positive")),
        _ => Ok(()),
    }
}

fn on_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(n) => Ok(with_threads(n, f)?),
        None => Ok(f()),
    }
}

fn cmd_gen(a: GenArgs, stdout: &mut dyn Write) -> CliResult<()> {
    positive("dim", a.dim)?;
    if a.kind == GeneratorKind::RandomFrame {
        if a.seed.is_none() {
            return Err(Failure::usage("random-frame needs an explicit --seed"));
        }
        if a.m.is_none() {
            return Err(Failure::usage("random-frame needs --m"));
        }
    }
    let system = generate(a.kind, a.dim, a.m, a.seed)?;
    write_text(a.output.out.as_deref(), &system_text(&system), stdout)
}

fn cmd_check(a: CheckArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !(a.tolerance.is_finite() && a.tolerance > 0.0) {
        return Err(Failure::usage("--tolerance must be positive"));
    }
    let path = a.file.or(a.input.input);
    let system = read_system(path.as_deref())?;
    let report = system.check(a.tolerance);
    #[derive(Serialize)]
    struct Report<'a> {
        dim: usize,
        m: usize,
        #[serde(flatten)]
        report: &'a isotropy_core::IsotropyReport,
    }
    let body = Report {
        dim: system.dim(),
        m: system.len(),
        report: &report,
    };
    write_text(a.output.out.as_deref(), &versioned(&body), stdout)
}

/// Reads a point cloud: one point per row, comma separated, optional header.
fn read_points(path: Option<&Path>) -> CliResult<Vec<Vec<f64>>> {
    let text = read_input(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::io(format!("malformed CSV: {e}")))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) => points.push(p),
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Failure::io(format!("row {}: {e}", row + 1))),
        }
    }
    if points.is_empty() {
        return Err(Failure::io("the point cloud is empty"));
    }
    let d = points[0].len();
    if let Some(i) = points.iter().position(|p| p.len() != d) {
        return Err(Failure::io(format!(
            "row {} has {} coordinates, expected {d}",
            i + 1,
            points[i].len()
        )));
    }
    Ok(points)
}

fn cmd_mvee(a: MveeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(Failure::usage("--epsilon must lie in (0, 1)"));
    }
    positive("max-iterations", a.max_iterations)?;
    let points = read_points(a.input.input.as_deref())?;
    let john = john_decomposition(&points, a.centered, a.epsilon, a.max_iterations)?;
    if let Some(path) = &a.ellipsoid {
        #[derive(Serialize)]
        struct Ellipsoid<'a> {
            centered: bool,
            center: &'a [f64],
            #[serde(flatten)]
            mvee: &'a isotropy_core::MveeResult,
        }
        let body = Ellipsoid {
            centered: a.centered,
            center: &john.center,
            mvee: &john.mvee,
        };
        write_text(Some(path), &versioned(&body), stdout)?;
    }
    write_text(a.output.out.as_deref(), &system_text(&john.system), stdout)
}

fn cmd_reduce(a: ReduceArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let system = read_system(a.input.input.as_deref())?;
    let reduction = if a.centered {
        reduce_centered_traced(&system)?
    } else {
        reduce_isotropic_traced(&system)?
    };
    write_text(
        a.output.out.as_deref(),
        &system_text(&reduction.system),
        stdout,
    )
}

fn cmd_select(a: SelectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let system = read_system(a.input.input.as_deref())?;
    let d = system.dim();
    let certificate = dr_select(&system)?;
    let best = if a.best {
        Some(best_subset(&system)?)
    } else {
        None
    };
    let bound = dr_volume_bound(d)?.value();
    let improved = (gamma(d, system.len())? * dr_volume_bound(d)?).value();
    #[derive(Serialize)]
    struct Selection<'a> {
        dim: usize,
        m: usize,
        #[serde(flatten)]
        certificate: &'a isotropy_core::SelectionCertificate,
        volume_bound: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        best: Option<isotropy_core::BestSubset>,
        #[serde(skip_serializing_if = "Option::is_none")]
        improved_bound: Option<f64>,
    }
    let body = Selection {
        dim: d,
        m: system.len(),
        certificate: &certificate,
        volume_bound: bound,
        improved_bound: best.as_ref().map(|_| improved),
        best,
    };
    write_text(a.output.out.as_deref(), &versioned(&body), stdout)
}

fn cmd_gamma(a: GammaArgs, stdout: &mut dyn Write) -> CliResult<()> {
    positive("dim", a.dim)?;
    if a.m < a.dim {
        return Err(Failure::usage(format!(
            "--m must be at least --dim ({})",
            a.dim
        )));
    }
    let g = gamma(a.dim, a.m)?;
    let bound = dr_volume_bound(a.dim)?;
    let body = json!({
        "dim": a.dim,
        "m": a.m,
        "m_bar": m_bar(a.dim, a.m),
        "cap": isotropic_cap(a.dim),
        "gamma": g.value(),
        "log_gamma": g.log_value,
        "volume_bound": bound.value(),
        "log_volume_bound": bound.log_value,
        "improved_bound": (g * bound).value(),
    });
    write_text(None, &versioned(&body), stdout)
}

fn cmd_p1(a: P1Args, stdout: &mut dyn Write) -> CliResult<()> {
    if let Some(d) = a.dim {
        positive("dim", d)?;
    }
    if let Some(m) = a.m {
        positive("m", m)?;
    }
    let (probabilities, d) = if let Some(m) = a.m {
        let d = a.dim.ok_or_else(|| Failure::usage("--m needs --dim"))?;
        (vec![1.0 / m as f64; m], d)
    } else if let Some(p) = a.probabilities {
        let d = a
            .dim
            .ok_or_else(|| Failure::usage("--probabilities needs --dim"))?;
        (p, d)
    } else {
        let system = read_system(a.input.as_deref())?;
        let d = a.dim.unwrap_or(system.dim());
        (system.probabilities(), d)
    };
    let value = p1_exact(&probabilities, d)?;
    let m = probabilities.len();
    let body = json!({
        "dim": d,
        "m": m,
        "p1": value,
        "uniform_maximum": p1_uniform(m, d),
    });
    write_text(None, &versioned(&body), stdout)
}

fn csv_text(record: &ExperimentRecord) -> String {
    format!("{CSV_HEADER}\n{}\n", record.to_csv_row())
}

fn cmd_expect(a: ExpectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    check_threads(a.threads)?;
    if a.trials < MIN_EXPECTATION_TRIALS {
        return Err(Failure::usage(format!(
            "--trials must be at least {MIN_EXPECTATION_TRIALS}"
        )));
    }
    let sampler = match (a.sampler, &a.input) {
        (Some(kind), _) => {
            let d = a
                .dim
                .ok_or_else(|| Failure::usage("--sampler needs --dim"))?;
            positive("dim", d)?;
            match kind {
                SamplerKind::Gaussian => Sampler::Gaussian(d),
                SamplerKind::Sphere => Sampler::Sphere(d),
            }
        }
        (None, input) => {
            let system = read_system(input.as_deref())?;
            if a.scaled {
                Sampler::discrete(system)
            } else {
                Sampler::unit_discrete(system)
            }
        }
    };
    let record = on_threads(a.threads, || {
        estimate_expected_det2(&sampler, a.trials, a.seed)
    })??;
    write_text(a.output.out.as_deref(), &csv_text(&record), stdout)
}

fn cmd_tail(a: TailArgs, stdout: &mut dyn Write) -> CliResult<()> {
    check_threads(a.threads)?;
    if !(a.lambda > 0.0 && a.lambda < 1.0) {
        return Err(Failure::usage("--lambda must lie in (0, 1)"));
    }
    if a.trials < MIN_TAIL_TRIALS {
        return Err(Failure::usage(format!(
            "--trials must be at least {MIN_TAIL_TRIALS}"
        )));
    }
    let system = read_system(a.input.input.as_deref())?;
    let record = on_threads(a.threads, || {
        tail_probability(&system, a.lambda, a.trials, a.seed)
    })??;
    write_text(a.output.out.as_deref(), &csv_text(&record), stdout)
}
