//! Command-line front end for `boxguard`.
//!
//! Exit codes: `0` success, `2` bad input or usage, `3` a checked
//! specification evaluated to false, `4` it evaluated to unknown.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use boxguard::io::{self as bio, FORMAT_VERSION};
use boxguard::speclang::{atoms_of, frames_to_trace, Evaluation};
use boxguard::{
    annotated_guarantees, assess, build_monitor, compose_formula, evaluate, gen_samples, parse, validate_guarantee,
    AssessConfig, AtomGuarantee, ComponentGuarantee, CompositionMode, CoverageMethod, Error, FeatureVector,
    FormulaGuarantee, MonitorConfig, Result, SyntheticDistribution, ThreeValued, ValidationProtocol,
    ValidationReport, Verdict,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FALSE: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "boxguard", version, about = "Box-abstraction runtime monitors with (ε, δ) guarantees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a monitor artifact from a sample log.
    Build(BuildArgs),
    /// Query a monitor with one feature vector.
    Query(QueryArgs),
    /// Bound the monitored component's error on held-out samples.
    Assess(AssessArgs),
    /// Evaluate a formula over a trace and compose its guarantee.
    CheckSpec(CheckSpecArgs),
    /// Draw a sample log from a synthetic distribution.
    Simulate(SimulateArgs),
    /// Monte Carlo validation of the emitted guarantees.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Monitor config JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, env = "GUARD_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub inflation: Option<f64>,
    #[arg(long)]
    pub inflation_floor: Option<f64>,
    #[arg(long)]
    pub m_min: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub monitor: PathBuf,
    /// Comma-separated feature values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub features: Vec<f64>,
    #[arg(long)]
    pub label: String,
    /// Only consult boxes with at least this many samples.
    #[arg(long)]
    pub m_min: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    ClopperPearson,
    Hoeffding,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    UnionBound,
    MassWeighted,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[arg(long)]
    pub monitor: PathBuf,
    #[arg(long)]
    pub holdout: PathBuf,
    #[arg(long, default_value_t = 0.025)]
    pub delta_cov: f64,
    #[arg(long, default_value_t = 0.025)]
    pub delta_box: f64,
    /// Defaults to the monitor's configured `m_min`.
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long, value_enum, default_value = "clopper-pearson")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "union-bound")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckSpecArgs {
    /// File holding the formula text.
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    pub formula: Option<PathBuf>,
    /// Formula given inline.
    #[arg(long)]
    pub expr: Option<String>,
    /// Trace in JSON Lines, one state per line.
    #[arg(long, conflicts_with_all = ["frames", "rules"], required_unless_present = "frames")]
    pub trace: Option<PathBuf>,
    /// Detector frame log, converted with `--rules`.
    #[arg(long, requires = "rules")]
    pub frames: Option<PathBuf>,
    #[arg(long, requires = "frames")]
    pub rules: Option<PathBuf>,
    /// Monitor used by gated extraction rules.
    #[arg(long, requires = "frames")]
    pub monitor: Option<PathBuf>,
    /// Per-atom guarantees for atoms without annotations.
    #[arg(long)]
    pub guarantees: Option<PathBuf>,
    /// `ATOM=REPORT`: take an atom's guarantee from an `assess` report.
    #[arg(long = "bind", value_name = "ATOM=REPORT")]
    pub bindings: Vec<String>,
    /// Trace position to evaluate at.
    #[arg(long, default_value_t = 0)]
    pub at: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Distribution config JSON.
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, env = "GUARD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Validation config JSON.
    #[arg(long)]
    pub protocol: PathBuf,
    /// Overrides the config's run count.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long, env = "GUARD_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub format_version: String,
    pub distribution: SyntheticDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationFile {
    pub format_version: String,
    pub distribution: SyntheticDistribution,
    pub protocol: ValidationProtocol,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuaranteeFile {
    pub format_version: String,
    pub atoms: BTreeMap<String, AtomGuarantee>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub format_version: String,
    pub label: String,
    pub features: Vec<f64>,
    pub m_min: Option<usize>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessReport {
    pub format_version: String,
    pub monitor_digest: String,
    pub holdout_digest: String,
    pub holdout_samples: usize,
    pub config: AssessConfig,
    pub guarantee: ComponentGuarantee,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub format_version: String,
    pub formula: String,
    pub position: usize,
    pub trace_len: usize,
    pub verdict: ThreeValued,
    pub evaluations: BTreeMap<String, usize>,
    /// Absent when some atom has no guarantee.
    pub guarantee: Option<FormulaGuarantee>,
    pub unguaranteed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOutput {
    pub format_version: String,
    #[serde(flatten)]
    pub report: ValidationReport,
}

fn check_version(path: &Path, found: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Version {
            path: path.display().to_string(),
            found: found.into(),
            expected: FORMAT_VERSION.into(),
        });
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => bio::write_atomic(p, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run_build(a: &BuildArgs, stderr: &mut dyn Write) -> Result<i32> {
    let mut cfg: MonitorConfig = match &a.config {
        Some(p) => bio::read_json(p)?,
        None => MonitorConfig::default(),
    };
    if a.k.is_some() {
        cfg.k = a.k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.inflation {
        cfg.inflation = t;
    }
    if let Some(e) = a.inflation_floor {
        cfg.inflation_floor = e;
    }
    if let Some(m) = a.m_min {
        cfg.m_min = m;
    }
    let log = bio::load_samples(&a.input)?;
    let monitor = build_monitor(&log.samples, &cfg)?;
    bio::save_monitor(&a.out, &monitor)?;
    let _ = writeln!(
        stderr,
        "built {} boxes over {} labels from {} samples",
        monitor.box_count(),
        monitor.labels().count(),
        log.samples.len()
    );
    Ok(EXIT_OK)
}

fn run_query(a: &QueryArgs, stdout: &mut dyn Write) -> Result<i32> {
    let monitor = bio::load_monitor(&a.monitor)?;
    let x = FeatureVector::new(a.features.clone())?;
    let verdict = match a.m_min {
        Some(m) => monitor.query_confirmed(&x, &a.label, m)?,
        None => monitor.query(&x, &a.label)?,
    };
    let report = QueryReport {
        format_version: FORMAT_VERSION.into(),
        label: a.label.clone(),
        features: a.features.clone(),
        m_min: a.m_min,
        verdict,
    };
    emit(None, &bio::to_pretty_json(&report)?, stdout)?;
    Ok(EXIT_OK)
}

fn run_assess(a: &AssessArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let monitor = bio::load_monitor(&a.monitor)?;
    let holdout = bio::load_samples(&a.holdout)?;
    if holdout.samples.is_empty() {
        return Err(Error::Empty("held-out samples"));
    }
    let config = AssessConfig {
        m_min: a.m_min.unwrap_or(monitor.config().m_min),
        delta_cov: a.delta_cov,
        delta_box: a.delta_box,
        coverage_method: match a.method {
            MethodArg::ClopperPearson => CoverageMethod::ClopperPearson,
            MethodArg::Hoeffding => CoverageMethod::Hoeffding,
        },
        mode: match a.mode {
            ModeArg::UnionBound => CompositionMode::UnionBound,
            ModeArg::MassWeighted => CompositionMode::MassWeighted,
        },
    };
    let guarantee = assess(&monitor, &holdout.samples, &config)?;
    let report = AssessReport {
        format_version: FORMAT_VERSION.into(),
        monitor_digest: bio::MonitorArtifact::from_monitor(&monitor)?.digest,
        holdout_digest: bio::sha256_hex(&read_bytes(&a.holdout)?),
        holdout_samples: holdout.samples.len(),
        config,
        guarantee,
    };
    let _ = writeln!(
        stderr,
        "epsilon = {}, delta = {}{}",
        report.guarantee.epsilon,
        report.guarantee.delta,
        if report.guarantee.vacuous { " (vacuous)" } else { "" }
    );
    emit(a.out.as_deref(), &bio::to_pretty_json(&report)?, stdout)?;
    Ok(EXIT_OK)
}

fn external_guarantees(a: &CheckSpecArgs) -> Result<BTreeMap<String, AtomGuarantee>> {
    let mut out = BTreeMap::new();
    if let Some(p) = &a.guarantees {
        let file: GuaranteeFile = bio::read_json(p)?;
        check_version(p, &file.format_version)?;
        out.extend(file.atoms);
    }
    for b in &a.bindings {
        let (atom, path) = b
            .split_once('=')
            .filter(|(atom, path)| !atom.is_empty() && !path.is_empty())
            .ok_or_else(|| Error::InvalidArgument(format!("binding `{b}` is not of the form ATOM=REPORT")))?;
        let path = Path::new(path);
        let report: AssessReport = bio::read_json(path)?;
        check_version(path, &report.format_version)?;
        let g = AtomGuarantee {
            epsilon: report.guarantee.epsilon,
            delta: report.guarantee.delta,
        };
        if out.insert(atom.to_string(), g).is_some() {
            return Err(Error::InvalidArgument(format!("atom `{atom}` is bound more than once")));
        }
    }
    Ok(out)
}

fn run_check_spec(a: &CheckSpecArgs, stdout: &mut dyn Write) -> Result<i32> {
    let text = match (&a.formula, &a.expr) {
        (Some(p), _) => String::from_utf8_lossy(&read_bytes(p)?).into_owned(),
        (None, Some(e)) => e.clone(),
        (None, None) => return Err(Error::InvalidArgument("no formula given".into())),
    };
    let formula = parse(&text)?;
    let trace = match (&a.trace, &a.frames, &a.rules) {
        (Some(t), _, _) => bio::load_trace(t)?,
        (None, Some(f), Some(r)) => {
            let frames = bio::load_frames(f)?;
            let rules = bio::load_rules(r)?;
            let monitor = a.monitor.as_deref().map(bio::load_monitor).transpose()?;
            frames_to_trace(&frames, &rules.rules, monitor.as_ref())?
        }
        _ => return Err(Error::InvalidArgument("need --trace or --frames with --rules".into())),
    };
    let Evaluation { verdict, evaluations } = evaluate(&formula, &trace, a.at)?;

    let mut guarantees = annotated_guarantees(&formula)?;
    for (atom, g) in external_guarantees(a)? {
        match guarantees.get(&atom) {
            Some(existing) if *existing != g => return Err(Error::ConflictingAnnotation(atom)),
            _ => {
                guarantees.insert(atom, g);
            }
        }
    }
    let unguaranteed: Vec<String> = atoms_of(&formula)?
        .into_keys()
        .filter(|name| !guarantees.contains_key(name))
        .collect();
    let guarantee = if unguaranteed.is_empty() {
        Some(compose_formula(&formula, verdict, &guarantees, &evaluations)?)
    } else {
        None
    };
    let report = CheckReport {
        format_version: FORMAT_VERSION.into(),
        formula: formula.to_string(),
        position: a.at,
        trace_len: trace.len(),
        verdict,
        evaluations,
        guarantee,
        unguaranteed,
    };
    emit(a.out.as_deref(), &bio::to_pretty_json(&report)?, stdout)?;
    if a.out.is_some() {
        let _ = writeln!(stdout, "{verdict}");
    }
    Ok(match verdict {
        ThreeValued::True => EXIT_OK,
        ThreeValued::False => EXIT_FALSE,
        ThreeValued::Unknown => EXIT_UNKNOWN,
    })
}

fn run_simulate(a: &SimulateArgs, stderr: &mut dyn Write) -> Result<i32> {
    let file: DistributionFile = bio::read_json(&a.dist)?;
    check_version(&a.dist, &file.format_version)?;
    let samples = gen_samples(&file.distribution, a.seed, a.n)?;
    bio::save_samples(&a.out, &samples)?;
    let _ = writeln!(stderr, "wrote {} samples (seed {})", samples.len(), a.seed);
    Ok(EXIT_OK)
}

fn run_validate(a: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut file: ValidationFile = bio::read_json(&a.protocol)?;
    check_version(&a.protocol, &file.format_version)?;
    if let Some(s) = a.seed {
        file.protocol.master_seed = s;
    }
    let runs = a.runs.unwrap_or(file.runs);
    let report = validate_guarantee(&file.distribution, &file.protocol, runs)?;
    let c = &report.component;
    let _ = writeln!(
        stderr,
        "{} violations in {} claims ({} failed runs); rate {:.4} vs threshold {:.4}: {}",
        c.violations,
        c.claims,
        report.failures,
        c.rate,
        c.threshold,
        if c.sound { "sound" } else { "NOT sound" }
    );
    let out = ValidateOutput {
        format_version: FORMAT_VERSION.into(),
        report,
    };
    emit(a.out.as_deref(), &bio::to_pretty_json(&out)?, stdout)?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Build(a) => run_build(a, stderr),
        Command::Query(a) => run_query(a, stdout),
        Command::Assess(a) => run_assess(a, stdout, stderr),
        Command::CheckSpec(a) => run_check_spec(a, stdout),
        Command::Simulate(a) => run_simulate(a, stderr),
        Command::Validate(a) => run_validate(a, stdout, stderr),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                EXIT_INPUT
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}
