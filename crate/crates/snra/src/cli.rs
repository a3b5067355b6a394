//! Experiment runner.
//!
//! Subcommands:
//!
//! * `train` — one training run; writes per-step records as CSV.
//! * `roadmap` — the mechanism matrix (binary rewards with standard
//!   group-relative advantages, smooth rewards at fixed sharpness with and
//!   without modulation, and modulated runs under linear and sigmoid
//!   sharpness schedules), one row per mechanism.
//! * `verify-theory` — runs every Monte-Carlo checker and writes a JSON
//!   report.
//! * `verify-verifiers` — exhaustive verifier cross-checks plus the Φ
//!   calibration round-trip grid.
//! * `ablate` — sweeps one config axis (`k_min`, `k_max`, `alpha`,
//!   `operator_kind`) and writes one CSV row per value.
//!
//! Configuration is a flat JSON file; every field has a default, unknown
//! keys are rejected (with a nearest-match suggestion), and the fully
//! resolved config is echoed next to the outputs so a run can be
//! reproduced from its artifacts alone. Output file names embed the mode
//! and seed; bodies are byte-stable across reruns. The output directory
//! may also come from `SNRA_OUT` (the only environment override).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::advantage::{AdvantageConfig, AdvantageEstimator};
use crate::analysis::{run_theory_checks, run_verifier_checks};
use crate::envs::{default_corpus, load_corpus, RewardMode, RewardPipeline, TaskInstance};
use crate::error::{Error, Result};
use crate::operator::OperatorKind;
use crate::schedule::{ScheduleShape, SharpnessSchedule};
use crate::trainer::{run_experiment, RunOutcome, TrainerConfig};
use crate::verifiers::calibrate_phi;

/// Fully resolved experiment configuration (flat schema).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub schedule_steepness: f64,
    pub schedule_center: f64,
    pub schedule_shape: ScheduleShape,
    pub total_steps: usize,
    pub group_size: usize,
    pub ratio_clip: f64,
    pub kl_coeff: f64,
    pub learning_rate: f64,
    pub inner_epochs: usize,
    pub estimator: AdvantageEstimator,
    pub alpha: f64,
    pub adv_clip: f64,
    pub norm_epsilon: f64,
    pub lambda: f64,
    pub operator: OperatorKind,
    pub reward_mode: RewardMode,
    pub epsilon_r: f64,
    pub phi_gamma: f64,
    pub phi_eps_log: f64,
    pub seed: u64,
    pub corpus_path: Option<PathBuf>,
    pub corpus_size: usize,
    pub difficulty: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_min: 1.0,
            k_max: 100.0,
            schedule_steepness: 10.0,
            schedule_center: 0.5,
            schedule_shape: ScheduleShape::Sigmoid,
            total_steps: 1600,
            group_size: 8,
            ratio_clip: 0.2,
            kl_coeff: 0.02,
            learning_rate: 0.1,
            inner_epochs: 1,
            estimator: AdvantageEstimator::ApGrpo,
            alpha: 1.0,
            adv_clip: 1.5,
            norm_epsilon: 1e-6,
            lambda: 0.1,
            operator: OperatorKind::Sigmoid,
            reward_mode: RewardMode::Smooth,
            epsilon_r: 0.01,
            phi_gamma: 1.0,
            phi_eps_log: 1e-4,
            seed: 1,
            corpus_path: None,
            corpus_size: 10,
            difficulty: 1.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Keys accepted in config files, kept in sync with [`ExperimentConfig`].
const KNOWN_KEYS: [&str; 26] = [
    "k_min",
    "k_max",
    "schedule_steepness",
    "schedule_center",
    "schedule_shape",
    "total_steps",
    "group_size",
    "ratio_clip",
    "kl_coeff",
    "learning_rate",
    "inner_epochs",
    "estimator",
    "alpha",
    "adv_clip",
    "norm_epsilon",
    "lambda",
    "operator",
    "reward_mode",
    "epsilon_r",
    "phi_gamma",
    "phi_eps_log",
    "seed",
    "corpus_path",
    "corpus_size",
    "difficulty",
    "out_dir",
];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut row = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            row.push((prev[j] + cost).min(prev[j + 1] + 1).min(row[j] + 1));
        }
        prev = row;
    }
    prev[b.len()]
}

fn suggest_key(key: &str) -> Option<String> {
    KNOWN_KEYS
        .iter()
        .map(|k| (levenshtein(key, k), *k))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, k)| k.to_string())
}

/// Loads a config file, fills defaults, and validates every invariant.
/// An empty file resolves to all defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parses config text (empty means all defaults).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let trimmed = text.trim();
    let config = if trimmed.is_empty() {
        ExperimentConfig::default()
    } else {
        let value: serde_json::Value = serde_json::from_str(trimmed)?;
        let map = value
            .as_object()
            .ok_or_else(|| Error::domain("config root must be a JSON object".to_string()))?;
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey {
                    key: key.clone(),
                    suggestion: suggest_key(key),
                });
            }
        }
        let mut merged = serde_json::to_value(ExperimentConfig::default())?;
        let base = merged.as_object_mut().expect("default config serializes to an object");
        for (key, val) in map {
            base.insert(key.clone(), val.clone());
        }
        serde_json::from_value(merged)?
    };
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    /// Surfaces every invariant violation with the offending field name.
    pub fn validate(&self) -> Result<()> {
        // construction checks carry the field diagnostics
        self.schedule()?;
        self.advantage_config()?;
        self.pipeline()?;
        self.trainer_config()?;
        if self.corpus_size == 0 {
            return Err(Error::field("corpus_size", "must be at least 1"));
        }
        if !self.difficulty.is_finite() || self.difficulty <= 0.0 {
            return Err(Error::field("difficulty", "must be positive"));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::field("alpha", "must be non-negative"));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<SharpnessSchedule> {
        SharpnessSchedule::with_shape(
            self.k_min,
            self.k_max,
            self.schedule_steepness,
            self.schedule_center,
            self.total_steps,
            self.schedule_shape,
        )
    }

    pub fn advantage_config(&self) -> Result<AdvantageConfig> {
        AdvantageConfig::new(self.norm_epsilon, self.alpha, self.adv_clip, self.estimator)
    }

    pub fn pipeline(&self) -> Result<RewardPipeline> {
        let phi = calibrate_phi(self.k_max, self.epsilon_r, self.phi_gamma, self.phi_eps_log)?;
        RewardPipeline::new(self.reward_mode, self.operator, phi, self.lambda)
    }

    pub fn trainer_config(&self) -> Result<TrainerConfig> {
        let cfg = TrainerConfig {
            group_size: self.group_size,
            ratio_clip: self.ratio_clip,
            kl_coeff: self.kl_coeff,
            learning_rate: self.learning_rate,
            inner_epochs: self.inner_epochs,
            schedule: self.schedule()?,
            advantage: self.advantage_config()?,
            pipeline: self.pipeline()?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads the corpus file when one is configured, otherwise generates
    /// the default corpus from a seed derived from the run seed.
    pub fn corpus(&self) -> Result<Vec<TaskInstance>> {
        const CORPUS_STREAM: u64 = 0xC0;
        match &self.corpus_path {
            Some(path) => load_corpus(path),
            None => default_corpus(
                crate::envs::derive_seed(self.seed, CORPUS_STREAM),
                self.corpus_size,
                self.difficulty,
            ),
        }
    }
}

/// One row of the roadmap matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    /// Hardened 0/1 rewards, standard group-relative advantages.
    BinaryGrpo,
    /// Smooth rewards at fixed terminal sharpness, standard advantages.
    SnraFixedGrpo,
    /// Smooth rewards at fixed terminal sharpness, modulated advantages.
    ApGrpoFixed,
    /// Linear sharpness ramp, modulated advantages.
    ApGrpoLinear,
    /// Sigmoid sharpness curriculum, modulated advantages (the default
    /// configuration).
    ApGrpoSigmoid,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::BinaryGrpo,
        Mechanism::SnraFixedGrpo,
        Mechanism::ApGrpoFixed,
        Mechanism::ApGrpoLinear,
        Mechanism::ApGrpoSigmoid,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Mechanism::BinaryGrpo => "binary-grpo",
            Mechanism::SnraFixedGrpo => "snra-fixed-grpo",
            Mechanism::ApGrpoFixed => "ap-grpo-fixed",
            Mechanism::ApGrpoLinear => "ap-grpo-linear",
            Mechanism::ApGrpoSigmoid => "ap-grpo-sigmoid",
        }
    }

    /// Applies the mechanism on top of a base configuration. The fixed-
    /// sharpness rows stay at the schedule's starting sharpness `k_min`
    /// (the no-hardening ablation: precision pressure never ramps up).
    pub fn apply(self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        match self {
            Mechanism::BinaryGrpo => {
                cfg.reward_mode = RewardMode::Hardened;
                cfg.estimator = AdvantageEstimator::StandardGrpo;
                cfg.k_max = cfg.k_min;
            }
            Mechanism::SnraFixedGrpo => {
                cfg.reward_mode = RewardMode::Smooth;
                cfg.estimator = AdvantageEstimator::StandardGrpo;
                cfg.k_max = cfg.k_min;
            }
            Mechanism::ApGrpoFixed => {
                cfg.reward_mode = RewardMode::Smooth;
                cfg.estimator = AdvantageEstimator::ApGrpo;
                cfg.k_max = cfg.k_min;
            }
            Mechanism::ApGrpoLinear => {
                cfg.reward_mode = RewardMode::Smooth;
                cfg.estimator = AdvantageEstimator::ApGrpo;
                cfg.schedule_shape = ScheduleShape::Linear;
            }
            Mechanism::ApGrpoSigmoid => {
                cfg.reward_mode = RewardMode::Smooth;
                cfg.estimator = AdvantageEstimator::ApGrpo;
                cfg.schedule_shape = ScheduleShape::Sigmoid;
            }
        }
        cfg
    }
}

/// Summary row of one roadmap run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoadmapRow {
    pub mechanism: Mechanism,
    pub t_conv: Option<usize>,
    pub adv_variance: f64,
    pub final_accuracy: f64,
}

/// Runs the full mechanism matrix on one corpus with one seed.
///
/// Every row shares the base configuration's task grading: the Φ
/// calibration stays anchored at the base terminal sharpness, so rows
/// differ only in optimization mechanism, never in how tasks are scored.
pub fn run_roadmap(config: &ExperimentConfig) -> Result<Vec<RoadmapRow>> {
    let corpus = config.corpus()?;
    let base_pipeline = config.pipeline()?;
    let mut rows = Vec::new();
    for mechanism in Mechanism::ALL {
        let cfg = mechanism.apply(config);
        let mut trainer_cfg = cfg.trainer_config()?;
        trainer_cfg.pipeline = RewardPipeline {
            mode: cfg.reward_mode,
            ..base_pipeline
        };
        let outcome = run_experiment(&trainer_cfg, &corpus)?;
        rows.push(RoadmapRow {
            mechanism,
            t_conv: outcome.summary.t_conv,
            adv_variance: outcome.summary.mean_adv_variance,
            final_accuracy: outcome.summary.final_accuracy,
        });
    }
    Ok(rows)
}

/// Runs one training configuration end to end.
pub fn run_train(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_experiment(&config.trainer_config()?, &config.corpus()?)
}

/// Serializes per-step records with a header row and LF endings.
pub fn records_csv(outcome: &RunOutcome) -> String {
    let mut csv = String::from("step,k,mean_reward,accuracy,adv_variance,loss,kl\n");
    for r in &outcome.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.step, r.sharpness, r.mean_reward, r.accuracy, r.adv_variance, r.loss, r.kl
        );
    }
    csv
}

/// Serializes roadmap rows; a run that never left zero accuracy reports an
/// empty convergence column.
pub fn roadmap_csv(rows: &[RoadmapRow]) -> String {
    let mut csv = String::from("mechanism,t_conv,adv_variance,final_accuracy\n");
    for row in rows {
        let t = row.t_conv.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            row.mechanism.label(),
            t,
            row.adv_variance,
            row.final_accuracy
        );
    }
    csv
}

/// Ablation axes exposed by the `ablate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationAxis {
    KMin,
    KMax,
    Alpha,
    OperatorKind,
}

impl AblationAxis {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "k_min" => Ok(Self::KMin),
            "k_max" => Ok(Self::KMax),
            "alpha" => Ok(Self::Alpha),
            "operator_kind" => Ok(Self::OperatorKind),
            other => Err(Error::field(
                "axis",
                format!("unknown axis `{other}`; expected k_min, k_max, alpha or operator_kind"),
            )),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::KMin => "k_min",
            Self::KMax => "k_max",
            Self::Alpha => "alpha",
            Self::OperatorKind => "operator_kind",
        }
    }
}

/// Summary of one ablation run.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub axis: &'static str,
    pub value: String,
    pub t_conv: Option<usize>,
    pub final_accuracy: f64,
    pub mean_abs_advantage: f64,
    pub mean_adv_variance: f64,
}

/// Sweeps one axis over the given values, one full run per value.
pub fn run_ablation(
    config: &ExperimentConfig,
    axis: AblationAxis,
    values: &[String],
) -> Result<Vec<AblationRow>> {
    if values.is_empty() {
        return Err(Error::field("values", "need at least one value"));
    }
    let corpus = config.corpus()?;
    let mut rows = Vec::new();
    for raw in values {
        let mut cfg = config.clone();
        match axis {
            AblationAxis::KMin => {
                cfg.k_min = parse_float(raw, "values")?;
                cfg.k_max = cfg.k_max.max(cfg.k_min);
            }
            AblationAxis::KMax => {
                cfg.k_max = parse_float(raw, "values")?;
                cfg.k_min = cfg.k_min.min(cfg.k_max);
            }
            AblationAxis::Alpha => cfg.alpha = parse_float(raw, "values")?,
            AblationAxis::OperatorKind => {
                cfg.operator = match raw.as_str() {
                    "sigmoid" => OperatorKind::Sigmoid,
                    "tanh-shifted" | "tanh" => OperatorKind::TanhShifted,
                    other => {
                        return Err(Error::field(
                            "values",
                            format!("unknown operator `{other}`; expected sigmoid or tanh-shifted"),
                        ))
                    }
                };
            }
        }
        cfg.validate()?;
        let outcome = run_experiment(&cfg.trainer_config()?, &corpus)?;
        rows.push(AblationRow {
            axis: axis.label(),
            value: raw.clone(),
            t_conv: outcome.summary.t_conv,
            final_accuracy: outcome.summary.final_accuracy,
            mean_abs_advantage: outcome.summary.mean_abs_advantage,
            mean_adv_variance: outcome.summary.mean_adv_variance,
        });
    }
    Ok(rows)
}

fn parse_float(raw: &str, field: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::field(field, format!("`{raw}` is not a number")))
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut csv = String::from("axis,value,t_conv,final_accuracy,mean_abs_advantage,mean_adv_variance\n");
    for row in rows {
        let t = row.t_conv.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.axis, row.value, t, row.final_accuracy, row.mean_abs_advantage, row.mean_adv_variance
        );
    }
    csv
}

#[derive(Parser)]
#[command(name = "snra", version, about = "Smooth-reward policy optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; missing fields fall back to documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one training experiment and write per-step records.
    Train(CommonArgs),
    /// Run the mechanism matrix and write one summary row per mechanism.
    Roadmap(CommonArgs),
    /// Run the Monte-Carlo theorem checkers.
    VerifyTheory(CommonArgs),
    /// Run the verifier cross-checks and calibration round-trips.
    VerifyVerifiers(CommonArgs),
    /// Sweep one config axis.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        /// Axis to sweep: k_min, k_max, alpha or operator_kind.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long)]
        values: String,
    },
}

fn resolve_config(common: &CommonArgs, mode: &str) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    } else if common.config.is_none() {
        if let Ok(env_out) = std::env::var("SNRA_OUT") {
            if !env_out.is_empty() {
                config.out_dir = PathBuf::from(env_out);
            }
        }
    }
    std::fs::create_dir_all(&config.out_dir)?;
    let echo = config.out_dir.join(format!("resolved_config_{mode}_seed{}.json", config.seed));
    std::fs::write(&echo, serde_json::to_string_pretty(&config)? + "\n")?;
    Ok(config)
}

fn write_output(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Train(common) => {
            let config = resolve_config(&common, "train")?;
            let outcome = run_train(&config)?;
            let path = config.out_dir.join(format!("records_train_seed{}.csv", config.seed));
            write_output(&path, &records_csv(&outcome))?;
            let s = outcome.summary;
            println!(
                "train: final_accuracy={:.4} t_conv={} mean_adv_variance={:.4}",
                s.final_accuracy,
                s.t_conv.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
                s.mean_adv_variance
            );
            Ok(true)
        }
        Command::Roadmap(common) => {
            let config = resolve_config(&common, "roadmap")?;
            println!(
                "roadmap matrix over {} mechanisms; supervised pre-training has no desk-scale analog and is omitted",
                Mechanism::ALL.len()
            );
            let rows = run_roadmap(&config)?;
            let path = config.out_dir.join(format!("roadmap_seed{}.csv", config.seed));
            write_output(&path, &roadmap_csv(&rows))?;
            for row in &rows {
                println!(
                    "  {:<16} t_conv={:<6} adv_var={:.4} final_acc={:.4}",
                    row.mechanism.label(),
                    row.t_conv.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
                    row.adv_variance,
                    row.final_accuracy
                );
            }
            let sigmoid = rows.iter().find(|r| r.mechanism == Mechanism::ApGrpoSigmoid).unwrap();
            let binary = rows.iter().find(|r| r.mechanism == Mechanism::BinaryGrpo).unwrap();
            let ordered = match (sigmoid.t_conv, binary.t_conv) {
                (Some(s), Some(b)) => s <= b,
                (Some(_), None) => true,
                _ => false,
            };
            if !ordered {
                eprintln!(
                    "roadmap assertion failed: sigmoid-schedule convergence {:?} not <= binary {:?} (see {})",
                    sigmoid.t_conv,
                    binary.t_conv,
                    path.display()
                );
            }
            Ok(ordered)
        }
        Command::VerifyTheory(common) => {
            let config = resolve_config(&common, "theory-check")?;
            let report = run_theory_checks(config.seed)?;
            let path = config.out_dir.join(format!("report_theory-check_seed{}.json", config.seed));
            write_output(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            for s in &report.suppression {
                println!(
                    "  suppression alpha={}: slope {:.3} (target {} ± {}) {}",
                    s.alpha,
                    s.slope,
                    s.expected_slope,
                    s.tolerance,
                    pass_str(s.passed)
                );
            }
            println!(
                "  recovery: fine ratio {:.5} coarse {:.5} {}",
                report.recovery.fine_ratio,
                report.recovery.coarse_ratio,
                pass_str(report.recovery.passed)
            );
            println!(
                "  extremum: {}",
                pass_str(report.extremum.iter().all(|e| e.passed))
            );
            println!("  dynamics: {}", pass_str(report.dynamics.passed));
            if !report.passed {
                eprintln!("theory check failed; report at {}", path.display());
            }
            Ok(report.passed)
        }
        Command::VerifyVerifiers(common) => {
            let config = resolve_config(&common, "verifier-check")?;
            let report = run_verifier_checks()?;
            let path = config.out_dir.join(format!("report_verifier-check_seed{}.json", config.seed));
            write_output(&path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            println!(
                "  kendall exhaustive to n={}: {} pairs, {}",
                report.kendall_max_n,
                report.kendall_pairs,
                pass_str(report.kendall_passed)
            );
            println!(
                "  calibration grid: {} combos, max round-trip error {:.2e}, {}",
                report.calibration_combos,
                report.calibration_max_error,
                pass_str(report.calibration_passed)
            );
            println!("  verifier examples: {}", pass_str(report.examples_passed));
            if !report.passed {
                eprintln!("verifier check failed; report at {}", path.display());
            }
            Ok(report.passed)
        }
        Command::Ablate { common, axis, values } => {
            let config = resolve_config(&common, "ablate")?;
            let axis = AblationAxis::parse(&axis)?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            let rows = run_ablation(&config, axis, &values)?;
            let path = config
                .out_dir
                .join(format!("ablate_{}_seed{}.csv", axis.label(), config.seed));
            write_output(&path, &ablation_csv(&rows))?;
            for row in &rows {
                println!(
                    "  {}={:<12} final_acc={:.4} mean|A|={:.5}",
                    row.axis, row.value, row.final_accuracy, row.mean_abs_advantage
                );
            }
            // the one built-in sweep assertion: stronger modulation must
            // shrink the advantage magnitudes
            if axis == AblationAxis::Alpha {
                let find = |v: &str| rows.iter().find(|r| parse_float(&r.value, "values").ok() == parse_float(v, "values").ok());
                if let (Some(a1), Some(a2)) = (find("1"), find("2")) {
                    let ok = a2.mean_abs_advantage < a1.mean_abs_advantage;
                    if !ok {
                        eprintln!(
                            "ablate assertion failed: mean|A| at alpha=2 ({}) not below alpha=1 ({})",
                            a2.mean_abs_advantage, a1.mean_abs_advantage
                        );
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

fn pass_str(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

/// Entry point behind the binary: parses `argv`, runs the subcommand, and
/// maps failures to a nonzero exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own help/version output
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}
