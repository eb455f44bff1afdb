//! `ramgate` command-line front end.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration or usage
//! error, 3 invariant violation.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ramgate::case_study::run_case_study;
use ramgate::lab::{count_witnesses, find_witness, necessity_scan, verify_witness, FiniteInstance, Witness, WitnessCheck};
use ramgate::sim::{coverage_sweep, simulate, Metrics, ModelKind, Scenario, SweepResult};
use ramgate::Schedule;

pub mod config;
pub mod output;

use config::{ScenarioConfig, SEED_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Sequential,
    Parallel,
}

impl From<ScheduleArg> for Schedule {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Sequential => Schedule::Sequential,
            ScheduleArg::Parallel => Schedule::Parallel,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ramgate", version, about = "Execution-authority gate simulator and counterexample lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed and RAMGATE_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write per-step CSV and the audit log (`run` only).
    #[arg(long, global = true)]
    pub emit_steps: bool,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[arg(long, global = true, value_enum, default_value_t = ScheduleArg::Parallel)]
    pub schedule: ScheduleArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate `run.steps` steps at `drift.coverage`.
    Run,
    /// IER/SHR/OCR for every model over `drift.grid`.
    Sweep,
    /// Scripted transfer scenario and comparison table.
    CaseStudy,
    /// First coverage-gap witness of a finite instance.
    Witness {
        /// Instance file (TOML). A five-component instance with `E` hidden
        /// when omitted.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Exhaustive gate-versus-admission comparison over a finite instance.
    NecessityScan {
        #[arg(long)]
        instance: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub n: u64,
    pub coverage: f64,
    pub episode_length: u64,
    #[serde(flatten)]
    pub metrics: BTreeMap<ModelKind, Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub instance: FiniteInstance,
    pub witness: Option<Witness>,
    pub check: Option<WitnessCheck>,
    /// All `(s_r*, delta_star)` pairs of the instance.
    pub witnesses: u64,
}

struct Ctx {
    config: ScenarioConfig,
    seed: u64,
    out: PathBuf,
    quiet: bool,
    emit_steps: bool,
    schedule: Schedule,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        self.config.scenario(self.seed)
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    let seed = config.resolve_seed(cli.seed, env.as_deref())?;
    let ctx = Ctx {
        out: config.out_dir(cli.out_dir.as_deref()),
        config,
        seed,
        quiet: cli.quiet,
        emit_steps: cli.emit_steps,
        schedule: cli.schedule.into(),
    };
    match &cli.command {
        Command::Run => cmd_run(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::CaseStudy => cmd_case_study(&ctx),
        Command::Witness { instance } => cmd_witness(&ctx, instance.as_deref()),
        Command::NecessityScan { instance } => cmd_necessity(&ctx, instance.as_deref()),
    }
}

/// Checks that hold for any correct simulation, whatever the configuration.
fn check_metrics(scenario: &Scenario, metrics: &BTreeMap<ModelKind, Metrics>, at: &str) -> Result<(), CliError> {
    if let Some(ram) = metrics.get(&ModelKind::Ram) {
        if scenario.ram_class_is_complete() && ram.counts.invalid_executions > 0 {
            return Err(CliError::Invariant(format!(
                "{at}: gate executed {} invalid steps",
                ram.counts.invalid_executions
            )));
        }
    }
    if let (Some(a), Some(o)) = (metrics.get(&ModelKind::Attestation), metrics.get(&ModelKind::Oracle)) {
        if o.counts.invalid_executions > a.counts.invalid_executions {
            return Err(CliError::Invariant(format!(
                "{at}: oracle invalid executions {} exceed attestation {}",
                o.counts.invalid_executions, a.counts.invalid_executions
            )));
        }
    }
    Ok(())
}

fn summary_line(m: ModelKind, met: &Metrics) -> String {
    format!(
        "  {:<12} ier={} shr={} ocr={} executions={} halts={}",
        m.as_str(),
        output::rate_cell(met.ier),
        output::rate_cell(met.shr),
        output::rate_cell(met.ocr),
        met.counts.executions,
        met.counts.halts
    )
}

fn cmd_run(ctx: &Ctx) -> Result<(), CliError> {
    let scenario = ctx.scenario()?;
    let n = ctx.config.steps();
    let out = simulate(&scenario, n, 0, ctx.schedule, ctx.emit_steps).map_err(|e| CliError::Config(e.to_string()))?;
    let metrics: BTreeMap<ModelKind, Metrics> = scenario
        .models()
        .enabled()
        .map(|m| (m, ramgate::sim::compute_metrics(&out.records, m)))
        .collect();
    let report = RunReport {
        seed: ctx.seed,
        n,
        coverage: scenario.drift().coverage,
        episode_length: scenario.episode_length(),
        metrics,
    };
    output::write_json(&ctx.out.join("metrics.json"), &report)?;
    if ctx.emit_steps {
        output::write_atomic(&ctx.out.join("steps.csv"), &output::steps_csv(&out.records))?;
        output::write_atomic(&ctx.out.join("audit.jsonl"), &output::audit_jsonl(&out.audit))?;
    }
    ctx.say(format!("run: n={n} seed={} coverage={}", ctx.seed, report.coverage));
    for (m, met) in &report.metrics {
        ctx.say(summary_line(*m, met));
    }
    ctx.say(format!("wrote {}", ctx.out.display()));
    check_metrics(&scenario, &report.metrics, "run")
}

pub fn sweep(config: &ScenarioConfig, seed: u64, schedule: Schedule) -> Result<(Scenario, SweepResult), CliError> {
    let scenario = config.scenario(seed)?;
    let grid = config.grid()?;
    let result = coverage_sweep(&scenario, &grid, config.steps(), schedule).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((scenario, result))
}

fn cmd_sweep(ctx: &Ctx) -> Result<(), CliError> {
    let (scenario, result) = sweep(&ctx.config, ctx.seed, ctx.schedule)?;
    output::write_atomic(&ctx.out.join("sweep.csv"), &output::sweep_csv(&result))?;
    output::write_atomic(&ctx.out.join("sweep.svg"), output::sweep_svg(&result).as_bytes())?;
    ctx.say(format!("sweep: n={} seed={} points={}", result.n, result.seed, result.points.len()));
    for p in &result.points {
        ctx.say(format!("coverage {:.2}", p.coverage));
        for (m, met) in &p.metrics {
            ctx.say(summary_line(*m, met));
        }
    }
    ctx.say(format!("wrote {}", ctx.out.display()));
    for p in &result.points {
        check_metrics(&scenario, &p.metrics, &format!("coverage {}", p.coverage))?;
    }
    Ok(())
}

fn cmd_case_study(ctx: &Ctx) -> Result<(), CliError> {
    let report = run_case_study();
    output::write_json(&ctx.out.join("case_study.json"), &report)?;
    for case in &report.cases {
        ctx.say(case.case.title());
        ctx.say(format!("  {:<12} {:<20} {:<9} failure mode", "model", "executes?", "correct?"));
        for row in report.table.iter().filter(|r| r.case == case.case) {
            ctx.say(format!(
                "  {:<12} {:<20} {:<9} {}",
                row.model.as_str(),
                row.executes,
                row.correct,
                row.failure_mode
            ));
        }
    }
    ctx.say(format!("wrote {}", ctx.out.display()));
    match report.table.iter().find(|r| r.model == ModelKind::Ram && r.correct != "Yes") {
        Some(r) => Err(CliError::Invariant(format!("gate decided incorrectly in {:?}", r.case))),
        None => Ok(()),
    }
}

fn instance(path: Option<&Path>) -> Result<FiniteInstance, CliError> {
    match path {
        Some(p) => config::load_instance(p),
        None => Ok(config::default_instance()),
    }
}

fn lab_error(e: ramgate::lab::LabError) -> CliError {
    CliError::Config(e.to_string())
}

fn cmd_witness(ctx: &Ctx, path: Option<&Path>) -> Result<(), CliError> {
    let inst = instance(path)?;
    let witness = find_witness(&inst, ctx.schedule).map_err(lab_error)?;
    let check = witness.as_ref().map(|w| verify_witness(&inst, w));
    let report = WitnessReport {
        witnesses: count_witnesses(&inst, ctx.schedule).map_err(lab_error)?,
        instance: inst,
        witness,
        check,
    };
    output::write_json(&ctx.out.join("witness.json"), &report)?;
    match (&report.witness, &report.check) {
        (Some(w), Some(c)) => {
            ctx.say(format!("witness: delta_star={}", w.delta_star));
            let s_r: Vec<String> = w.s_r_star.iter().map(|(k, v)| format!("{k}={v}")).collect();
            ctx.say(format!("  s_r* = {{{}}}", s_r.join(", ")));
            let s_p: Vec<String> = w.s_p.entries().iter().map(|(k, v)| format!("{k}={v}")).collect();
            ctx.say(format!("  s_p  = {{{}}}", s_p.join(", ")));
            ctx.say(format!("  conditions: {c:?}"));
            ctx.say(format!("  witnesses in instance: {}", report.witnesses));
            if !c.holds() {
                return Err(CliError::Invariant("emitted witness fails verification".into()));
            }
        }
        _ => ctx.say("no witness"),
    }
    Ok(())
}

fn cmd_necessity(ctx: &Ctx, path: Option<&Path>) -> Result<(), CliError> {
    let inst = instance(path)?;
    let report = necessity_scan(&inst, ctx.schedule).map_err(lab_error)?;
    output::write_json(&ctx.out.join("necessity.json"), &report)?;
    ctx.say(format!("assignments:                  {}", report.assignments));
    ctx.say(format!("authority true:               {}", report.authority_true));
    ctx.say(format!("gate executions:              {}", report.ram_executions));
    ctx.say(format!("gate invalid executions:      {}", report.ram_invalid_executions));
    ctx.say(format!("gate halts, authority true:   {}", report.ram_halts_on_authority_true));
    ctx.say(format!("admission executions:         {}", report.admission_executions));
    ctx.say(format!("admission invalid executions: {}", report.admission_invalid_executions));
    if report.ram_invalid_executions > 0 {
        return Err(CliError::Invariant(format!(
            "gate executed {} assignments with authority false",
            report.ram_invalid_executions
        )));
    }
    Ok(())
}
