//! Command implementations behind the `interplab` binary.
//!
//! Settings resolve in this order, later winning: built-in defaults, the
//! `--config` file, the `INTERPLAB_OUTPUT_DIR` environment variable (output
//! directory only), then command-line flags.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use interplab::annulus::AnnulusSpec;
use interplab::functors::{
    calderon_product_norm, complex_norm_upper, gp_norm_upper, k_functional, peetre_norm_upper, ComplexSolverConfig,
    PeetreConfig,
};
use interplab::spaces::{cvec, sample_complex_vector, Couple};
use interplab::verify::{self, ExperimentReport, TimedReport, VerifyConfig, EXPERIMENTS};
use interplab::{seeds, NormBracket, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

pub const OUTPUT_DIR_ENV: &str = "INTERPLAB_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Kfunc,
    Complex,
    Peetre,
    Gp,
    Oracle,
}

/// Which report files an experiment writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Norm input: a document with `couple` and `x`.
    pub input: Option<PathBuf>,
    pub norm: NormKind,
    pub theta: f64,
    /// K-functional parameter.
    pub t: f64,
    /// Laurent degree `K` for the complex norm.
    pub degree: usize,
    /// Circle grid size `M` for the complex norm.
    pub points: usize,
    /// Representation window for the Peetre and Gustavsson-Peetre norms.
    pub window: usize,
    pub complex: ComplexSolverConfig,
    pub peetre: PeetreConfig,
    pub output_dir: PathBuf,
    pub format: Format,
    /// Glob over experiment ids for `suite`.
    pub select: String,
    /// Instances emitted by `gen`.
    pub count: usize,
    /// Worker cap; `None` uses every core.
    pub threads: Option<usize>,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            norm: NormKind::Oracle,
            theta: 0.5,
            t: 1.0,
            degree: 32,
            points: 256,
            window: 8,
            complex: ComplexSolverConfig::default(),
            peetre: PeetreConfig::default(),
            output_dir: PathBuf::from("reports"),
            format: Format::Both,
            select: "*".to_string(),
            count: 1,
            threads: None,
            verify: VerifyConfig::default(),
        }
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn input_error(message: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_INPUT, message: message.to_string() }
}

impl From<interplab::Error> for CliError {
    fn from(e: interplab::Error) -> Self {
        input_error(e)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(input_error(format!("theta = {} must lie in [0, 1]", self.theta)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(input_error(format!("t = {} must be positive and finite", self.t)));
        }
        AnnulusSpec::new(self.points)?.check_degree(self.degree)?;
        if self.window == 0 || self.count == 0 || self.threads == Some(0) {
            return Err(input_error("window, count and threads must be positive"));
        }
        glob::Pattern::new(&self.select).map_err(|e| input_error(format!("bad selection {:?}: {e}", self.select)))?;
        self.complex.validate()?;
        self.peetre.validate()?;
        self.verify.validate()?;
        Ok(())
    }

    /// Defaults, then `file`, then `env_output_dir`, then `flags`.
    pub fn resolve(file: Option<&Path>, env_output_dir: Option<String>, flags: &Flags) -> Result<Self, CliError> {
        let mut cfg = match file {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(d) = env_output_dir.filter(|d| !d.is_empty()) {
            cfg.output_dir = PathBuf::from(d);
        }
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Experiment ids matching `select`, in suite order.
    pub fn selected(&self) -> Result<Vec<&'static str>, CliError> {
        let pat = glob::Pattern::new(&self.select).map_err(|e| input_error(e.to_string()))?;
        let ids: Vec<&'static str> = EXPERIMENTS.iter().copied().filter(|id| pat.matches(id)).collect();
        if ids.is_empty() {
            return Err(input_error(format!("selection {:?} matches no experiment", self.select)));
        }
        Ok(ids)
    }
}

/// Flags mirroring config keys; `--seed` and `--thetas` set `verify.seed` and `verify.thetas`.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub norm: Option<NormKind>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub select: Option<String>,
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { cfg.$f = v; })* };
        }
        set!(norm, theta, t, degree, points, window, output_dir, format, select, count);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(s) = self.seed {
            cfg.verify.seed = s;
        }
        if let Some(t) = &self.thetas {
            cfg.verify.thetas = t.clone();
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "interplab", version, about = "Interpolation norms, operators and seeded experiments")]
pub struct Cli {
    /// Run configuration document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print one norm bracket for the input couple and vector.
    Norm,
    /// Run one experiment and write its report.
    Experiment { id: String },
    /// Run every selected experiment and write reports plus a summary.
    Suite,
    /// Emit random couples and vectors.
    Gen,
}

/// Norm input document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormInput {
    pub couple: Couple,
    #[serde(with = "cvec")]
    pub x: Vec<C64>,
}

/// Parses arguments, runs the command, and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
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
    match run(&cli, std::env::var(OUTPUT_DIR_ENV).ok(), out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: &Cli, env_output_dir: Option<String>, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), env_output_dir, &cli.flags)?;
    if let Some(n) = cfg.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Norm => cmd_norm(&cfg, out),
        Command::Experiment { id } => cmd_experiment(&cfg, id, out),
        Command::Suite => cmd_suite(&cfg, out),
        Command::Gen => cmd_gen(&cfg, out),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) }
}

pub fn compute_norm(cfg: &RunConfig, input: &NormInput) -> Result<NormBracket, CliError> {
    let (c, x, th) = (&input.couple, &input.x, cfg.theta);
    let b = match cfg.norm {
        NormKind::Kfunc => k_functional(c, x, cfg.t)?,
        NormKind::Oracle => calderon_product_norm(c, th, x)?,
        NormKind::Complex => complex_norm_upper(c, th, x, cfg.degree, &AnnulusSpec::new(cfg.points)?, &cfg.complex)?,
        NormKind::Peetre => peetre_norm_upper(c, th, x, cfg.window, &cfg.peetre)?,
        NormKind::Gp => gp_norm_upper(c, th, x, cfg.window, &cfg.peetre)?,
    };
    Ok(b)
}

pub fn cmd_norm(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let path = cfg.input.as_deref().ok_or_else(|| input_error("norm needs --input"))?;
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let input: NormInput = serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let b = compute_norm(cfg, &input)?;
    let record = match cfg.norm {
        NormKind::Kfunc => json!({"norm": cfg.norm, "t": cfg.t, "dim": input.x.len(), "bracket": b}),
        _ => json!({"norm": cfg.norm, "theta": cfg.theta, "dim": input.x.len(), "bracket": b}),
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&record).expect("serializable")).map_err(|e| io_error(path, e))?;
    Ok(if b.converged { EXIT_OK } else { EXIT_NONCONVERGED })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn write_report(cfg: &RunConfig, r: &ExperimentReport) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    if matches!(cfg.format, Format::Json | Format::Both) {
        write_file(&dir.join(format!("{}.json", r.id)), &r.to_json()?)?;
    }
    if matches!(cfg.format, Format::Csv | Format::Both) {
        write_file(&dir.join(format!("{}.csv", r.id)), &r.to_csv())?;
    }
    Ok(())
}

/// Creates the output directory and records the resolved configuration.
fn prepare_output(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_error(&cfg.output_dir, e))?;
    let text = serde_json::to_string_pretty(cfg).expect("serializable") + "\n";
    write_file(&cfg.output_dir.join("config.json"), &text)
}

fn run_and_write(cfg: &RunConfig, ids: &[&str], out: &mut dyn Write) -> Result<Vec<TimedReport>, CliError> {
    prepare_output(cfg)?;
    let mut done = Vec::new();
    let mut timings = String::from("experiment,seconds\n");
    for id in ids {
        let t = verify::run_timed(id, &cfg.verify)?;
        write_report(cfg, &t.report)?;
        timings.push_str(&format!("{id},{:.3}\n", t.seconds));
        let verdict = if t.report.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{id}: {verdict} ({:.1} s)", t.seconds);
        for c in t.report.checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(out, "  failed {}: {:e} against {:e}", c.name, c.value, c.threshold);
        }
        done.push(t);
    }
    write_file(&cfg.output_dir.join("timings.csv"), &timings)?;
    Ok(done)
}

pub fn cmd_experiment(cfg: &RunConfig, id: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    if !EXPERIMENTS.contains(&id) {
        return Err(input_error(format!("unknown experiment {id:?}; known: {}", EXPERIMENTS.join(", "))));
    }
    let done = run_and_write(cfg, &[id], out)?;
    Ok(if done[0].report.passed { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_suite(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let ids = cfg.selected()?;
    let done = run_and_write(cfg, &ids, out)?;
    let reports: Vec<ExperimentReport> = done.into_iter().map(|t| t.report).collect();
    write_file(&cfg.output_dir.join("summary.csv"), &verify::summary_csv(&reports))?;
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_gen(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let gen = interplab::spaces::GenConfig { seed: cfg.verify.seed, ..cfg.verify.generator.clone() };
    let instances: Vec<NormInput> = (0..cfg.count as u64)
        .map(|i| {
            let mut rng = seeds::child_rng(gen.seed, i);
            let couple = gen.sample_couple(&mut rng);
            let x = sample_complex_vector(&mut rng, couple.dim());
            NormInput { couple, x }
        })
        .collect();
    let doc = json!({"generator": gen, "instances": instances});
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))
        .map_err(|e| input_error(e.to_string()))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("interplab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file_and_env() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.json");
        fs::write(&file, r#"{"theta": 0.25, "output_dir": "from_file", "verify": {"seed": 9}}"#).unwrap();
        let cli = parse(&["norm", "--theta", "0.75"]);
        let cfg = RunConfig::resolve(Some(&file), Some("from_env".into()), &cli.flags).unwrap();
        assert_eq!(cfg.theta, 0.75);
        assert_eq!(cfg.output_dir, PathBuf::from("from_env"));
        assert_eq!(cfg.verify.seed, 9);
        let cli = parse(&["suite", "--output-dir", "flag", "--seed", "3", "--thetas", "0.1,0.2"]);
        let cfg = RunConfig::resolve(Some(&file), Some("from_env".into()), &cli.flags).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("flag"));
        assert_eq!(cfg.verify.seed, 3);
        assert_eq!(cfg.verify.thetas, vec![0.1, 0.2]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.json");
        fs::write(&file, r#"{"thetaa": 0.25}"#).unwrap();
        let none = Flags::default();
        assert_eq!(RunConfig::resolve(Some(&file), None, &none).unwrap_err().code, EXIT_INPUT);
        let bad = Flags { theta: Some(1.5), ..Flags::default() };
        assert_eq!(RunConfig::resolve(None, None, &bad).unwrap_err().code, EXIT_INPUT);
        let bad = Flags { degree: Some(64), points: Some(256), ..Flags::default() };
        assert_eq!(RunConfig::resolve(None, None, &bad).unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn selection_keeps_suite_order() {
        let cfg = RunConfig { select: "*n*".into(), ..RunConfig::default() };
        let ids = cfg.selected().unwrap();
        let pos: Vec<usize> = ids.iter().map(|i| EXPERIMENTS.iter().position(|e| e == i).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(ids.contains(&"three_lines") && !ids.contains(&"duality"));
        let none = RunConfig { select: "zzz*".into(), ..RunConfig::default() };
        assert_eq!(none.selected().unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn gen_output_parses_as_norm_inputs() {
        let cfg = RunConfig { count: 3, ..RunConfig::default() };
        let mut buf = Vec::new();
        assert_eq!(cmd_gen(&cfg, &mut buf).unwrap(), EXIT_OK);
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let inst: Vec<NormInput> = serde_json::from_value(doc["instances"].clone()).unwrap();
        assert_eq!(inst.len(), 3);
        assert!(inst.iter().all(|i| i.couple.dim() == i.x.len()));
    }
}
