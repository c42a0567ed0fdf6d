//! Subcommands behind the `cvqec` binary.
//!
//! Exit codes: 0 success, 1 runtime failure (or a failed verify criterion),
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Overrides, RunConfig, OUTPUT_DIR_ENV};
use crate::error::{Error, Result};
use crate::phase_space::Quadrature;
use crate::report::{self, Dataset, ReportBundle, ReportMeta, Value, REPORT_IDS};
use crate::simulator::{Mode, Simulator, TrajectoryStats};
use crate::steane::SyndromeModel;
use crate::verify::{self, Profile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cvqec", version, about = "Concatenated GKP / analog Steane code simulator and analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the multi-round Monte Carlo scenarios.
    Simulate(ConfigArgs),
    /// Emit analysis datasets (table1, table2, table3, fig5, residual_curves).
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        /// Report ids; defaults to the config's `reports` list.
        ids: Vec<String>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Reduced sample counts and looser tolerances.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (1-10).
        #[arg(long = "criterion", value_name = "N")]
        criteria: Vec<u8>,
    },
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// JSON config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Comma-separated: no_qec, gkp_only, concatenated.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<Mode>>,
    #[arg(long)]
    pub sigma_sq: Option<f64>,
    /// Finite squeezing parameter r of GKP peaks and ancillas.
    #[arg(long, conflicts_with = "ideal")]
    pub squeezing_r: Option<f64>,
    /// Infinite squeezing (overrides the file's squeezing_r).
    #[arg(long)]
    pub ideal: bool,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub abrupt_enabled: Option<bool>,
    #[arg(long)]
    pub abrupt_period: Option<u64>,
    #[arg(long)]
    pub abrupt_magnitude: Option<f64>,
    #[arg(long)]
    pub abrupt_qumode: Option<usize>,
    #[arg(long)]
    pub abrupt_quadrature: Option<Quadrature>,
    #[arg(long)]
    pub decoder_threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub trace_count: Option<usize>,
    #[arg(long, short)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub verbosity: Option<u8>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            modes: self.modes.clone(),
            sigma_sq: self.sigma_sq,
            squeezing_r: self.squeezing_r,
            ideal: self.ideal,
            rounds: self.rounds,
            trajectories: self.trajectories,
            abrupt_enabled: self.abrupt_enabled,
            abrupt_period: self.abrupt_period,
            abrupt_magnitude: self.abrupt_magnitude,
            abrupt_qumode: self.abrupt_qumode,
            abrupt_quadrature: self.abrupt_quadrature,
            decoder_threshold: self.decoder_threshold,
            seed: self.seed,
            workers: self.workers,
            trace_count: self.trace_count,
            output_dir: self.output_dir.clone(),
            reports: None,
            verbosity: self.verbosity,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        RunConfig::resolve(self.config.as_deref(), std::env::var(OUTPUT_DIR_ENV).ok(), &self.overrides())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub final_mean: f64,
    pub final_std: f64,
    pub total_triggers: u64,
    pub total_crossings: u64,
    pub per_round_file: String,
    pub trace_file: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub generated_unix: u64,
    pub sigma_res_sq: f64,
    pub rounds: usize,
    pub trajectories: usize,
    /// `(std_gkp_only / std_no_qec)²` when both modes ran.
    pub suppression_ratio: Option<f64>,
    pub modes: Vec<ModeSummary>,
    pub config: RunConfig,
}

fn per_round_dataset(stats: &TrajectoryStats) -> Dataset {
    let rows = (0..stats.rounds())
        .map(|t| {
            vec![
                Value::from(t + 1),
                stats.mean[t].into(),
                stats.std[t].into(),
                stats.trajectories.into(),
            ]
        })
        .collect();
    Dataset {
        id: format!("per_round_{}", stats.mode),
        columns: ["round", "mean", "std", "n"].map(String::from).to_vec(),
        rows,
        notes: Vec::new(),
    }
}

fn trace_dataset(stats: &TrajectoryStats) -> Dataset {
    let mut rows = Vec::with_capacity(stats.rounds() * stats.traces.len());
    for t in 0..stats.rounds() {
        for tr in &stats.traces {
            rows.push(vec![Value::from(t + 1), Value::Int(tr.trajectory_id as i64), tr.zeta[t].into()]);
        }
    }
    Dataset {
        id: format!("traces_{}", stats.mode),
        columns: ["round", "trajectory_id", "zeta"].map(String::from).to_vec(),
        rows,
        notes: Vec::new(),
    }
}

fn write_dataset(dir: &Path, d: &Dataset, meta: &ReportMeta) -> Result<String> {
    let name = format!("{}.csv", d.id);
    std::fs::write(dir.join(&name), d.to_csv(meta))?;
    Ok(name)
}

/// Runs every configured mode and writes `summary.json`, per-round CSVs and trace CSVs.
pub fn cmd_simulate(cfg: &RunConfig, log: &mut dyn Write) -> Result<SimulateSummary> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let meta = ReportMeta::new(cfg.config_hash(), cfg.seed);
    let traces = cfg.effective_trace_count();
    let mut modes = Vec::new();
    let mut sigma_res_sq = 0.0;
    let mut stds = std::collections::HashMap::new();
    for &mode in &cfg.modes {
        let sim = Simulator::new(cfg.scenario(mode))?;
        sigma_res_sq = sim.noise().sigma_res_sq;
        let started = std::time::Instant::now();
        let stats = sim.run(cfg.workers, traces)?;
        if cfg.verbosity > 0 {
            writeln!(
                log,
                "{mode}: final mean {:.4}, final std {:.4} ({} x {} in {:.1} s)",
                stats.final_mean(),
                stats.final_std(),
                stats.trajectories,
                stats.rounds(),
                started.elapsed().as_secs_f64()
            )
            .ok();
        }
        let per_round_file = write_dataset(dir, &per_round_dataset(&stats), &meta)?;
        let trace_file =
            if stats.traces.is_empty() { None } else { Some(write_dataset(dir, &trace_dataset(&stats), &meta)?) };
        stds.insert(mode, stats.final_std());
        modes.push(ModeSummary {
            mode,
            final_mean: stats.final_mean(),
            final_std: stats.final_std(),
            total_triggers: stats.triggers.iter().sum(),
            total_crossings: stats.crossings.iter().sum(),
            per_round_file,
            trace_file,
        });
    }
    let suppression_ratio = match (stds.get(&Mode::NoQec), stds.get(&Mode::GkpOnly)) {
        (Some(a), Some(b)) => Some((b / a).powi(2)),
        _ => None,
    };
    let summary = SimulateSummary {
        config_hash: meta.config_hash.clone(),
        seed: meta.seed,
        version: meta.version.clone(),
        generated_unix: meta.generated_unix,
        sigma_res_sq,
        rounds: cfg.rounds,
        trajectories: cfg.trajectories,
        suppression_ratio,
        modes,
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Runtime(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    if cfg.verbosity > 0 {
        writeln!(log, "wrote results to {}", dir.display()).ok();
    }
    Ok(summary)
}

/// Generates the requested datasets plus `manifest.json` in the output directory.
pub fn cmd_analyze(cfg: &RunConfig, ids: &[String], log: &mut dyn Write) -> Result<ReportBundle> {
    let ids: Vec<String> = if ids.is_empty() { cfg.reports.clone() } else { ids.to_vec() };
    for id in &ids {
        if !REPORT_IDS.contains(&id.as_str()) {
            return Err(Error::Config(format!("unknown report id '{id}' (valid: {})", REPORT_IDS.join(", "))));
        }
    }
    let model = SyndromeModel::standard();
    let meta = ReportMeta::new(cfg.config_hash(), cfg.seed);
    let mut datasets = Vec::new();
    for id in &ids {
        datasets.push(report::generate(id, &model, &cfg.report_settings, cfg.seed)?);
    }
    let bundle = ReportBundle { meta, datasets };
    let files = bundle.write_dir(&cfg.output_dir)?;
    if cfg.verbosity > 0 {
        for f in files {
            writeln!(log, "wrote {}", f.display()).ok();
        }
    }
    Ok(bundle)
}

/// Runs the acceptance suite, one line per criterion; true when nothing blocks.
pub fn cmd_verify(profile: Profile, only: &[u8], out: &mut dyn Write) -> Result<bool> {
    let ids: Vec<u8> = if only.is_empty() { verify::CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let mut ok = true;
    for id in ids {
        let r = verify::run_criterion(id, profile)
            .ok_or_else(|| Error::Config(format!("unknown criterion {id} (valid: 1-10)")))?;
        writeln!(out, "{r}")?;
        ok &= !r.blocks_suite();
    }
    writeln!(out, "{}", if ok { "verify: all criteria passed" } else { "verify: FAILED" })?;
    Ok(ok)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                write!(out, "{text}").ok();
            } else {
                write!(err, "{text}").ok();
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => args.resolve().and_then(|cfg| cmd_simulate(&cfg, err)).map(|_| EXIT_OK),
        Command::Analyze { config, ids } => {
            config.resolve().and_then(|cfg| cmd_analyze(&cfg, &ids, err)).map(|_| EXIT_OK)
        }
        Command::Verify { quick, criteria } => {
            let profile = if quick { Profile::Quick } else { Profile::Full };
            cmd_verify(profile, &criteria, out).map(|ok| if ok { EXIT_OK } else { EXIT_RUNTIME })
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            exit_code(&e)
        }
    }
}
