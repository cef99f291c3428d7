//! Batch runs: load systems from a config, compute every metric, score the
//! cohort, and emit a deterministic JSON report.
//!
//! Reports are byte-reproducible: systems are assembled in sorted order, the
//! JSON is serialized with sorted keys, and floats use the shortest
//! representation that round-trips. Wall-clock timings are gathered but only
//! serialized when the config opts in (`include_timings`), since embedding
//! them would break re-run determinism. Systems are evaluated concurrently
//! when `TRIMETRIC_THREADS` allows; the output bytes do not depend on the
//! schedule.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{self, DynamicsKind, MixedProfile, NerResult, NormalFormGame};
use crate::leais::{self, LeaisMode, LeaisResult};
use crate::model::{self, MlpModel};
use crate::sci::{self, SciResult};
use crate::scoring::{self, MetricsRecord, NerKind, NormalizedRecord, ScatterRow, Weights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("config error: {0}")]
    Config(String),
}

/// One system under evaluation. Paths are resolved relative to the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub id: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attach_data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<String>,
}

fn default_samples() -> usize {
    32
}

fn default_fd_step() -> f64 {
    1e-5
}

fn default_leais_mode() -> LeaisMode {
    LeaisMode::Analytic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaisConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_leais_mode")]
    pub mode: LeaisMode,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl Default for LeaisConfig {
    fn default() -> Self {
        LeaisConfig {
            samples: default_samples(),
            seed: 0,
            mode: default_leais_mode(),
            fd_step: default_fd_step(),
        }
    }
}

fn default_steps() -> usize {
    100
}

fn default_damping() -> f64 {
    1.0
}

fn default_grid() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerConfig {
    #[serde(default)]
    pub dynamics: DynamicsKind,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

impl Default for NerConfig {
    fn default() -> Self {
        NerConfig {
            dynamics: DynamicsKind::default(),
            steps: default_steps(),
            damping: default_damping(),
            epsilon: None,
            grid: default_grid(),
        }
    }
}

/// Full batch-run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub systems: Vec<SystemConfig>,
    #[serde(default)]
    pub leais: LeaisConfig,
    #[serde(default)]
    pub ner: NerConfig,
    pub weights: Weights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub include_timings: bool,
}

impl RunConfig {
    pub fn from_json_str(json: &str) -> Result<Self, ReportError> {
        let config: RunConfig = serde_json::from_str(json)
            .map_err(|e| ReportError::Config(format!("config JSON: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.systems.is_empty() {
            return Err(ReportError::Config("no systems configured".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.systems {
            if s.id.is_empty() {
                return Err(ReportError::Config("system id must be non-empty".into()));
            }
            if !seen.insert(&s.id) {
                return Err(ReportError::Config(format!(
                    "duplicate system id {:?}",
                    s.id
                )));
            }
        }
        if self.leais.samples == 0 {
            return Err(ReportError::Config("leais.samples must be >= 1".into()));
        }
        if !(self.leais.fd_step > 0.0 && self.leais.fd_step.is_finite()) {
            return Err(ReportError::Config("leais.fd_step must be positive".into()));
        }
        if self.ner.steps == 0 {
            return Err(ReportError::Config("ner.steps must be >= 1".into()));
        }
        if !(self.ner.damping > 0.0 && self.ner.damping <= 1.0) {
            return Err(ReportError::Config("ner.damping must be in (0, 1]".into()));
        }
        if let Some(e) = self.ner.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(ReportError::Config("ner.epsilon must be positive".into()));
            }
        }
        if self.ner.grid < 2 {
            return Err(ReportError::Config("ner.grid must be >= 2".into()));
        }
        self.weights
            .validate()
            .map_err(|e| ReportError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Headline subset of a [`LeaisResult`] carried into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaisSummary {
    pub max: f64,
    pub mean: f64,
    pub t: u32,
    pub samples: usize,
    pub seed: u64,
    pub mode: LeaisMode,
}

impl From<&LeaisResult> for LeaisSummary {
    fn from(r: &LeaisResult) -> Self {
        LeaisSummary {
            max: r.max_over_points,
            mean: r.mean_over_points,
            t: r.t,
            samples: r.sample_count,
            seed: r.seed,
            mode: r.mode,
        }
    }
}

/// Everything computed for one system, raw and cohort-normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    pub system_id: String,
    pub sci: SciResult,
    pub leais: LeaisSummary,
    pub ner: NerResult,
    pub metrics: MetricsRecord,
    pub normalized: NormalizedRecord,
    pub security_score_literal: f64,
    pub risk_score_oriented: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemError {
    pub system_id: String,
    pub message: String,
}

/// Wall-clock seconds per phase, summed over systems.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub sci_secs: f64,
    pub leais_secs: f64,
    pub ner_secs: f64,
    pub scoring_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub config: RunConfig,
    pub systems: Vec<SystemReport>,
    pub errors: Vec<SystemError>,
    pub scatter: Vec<ScatterRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<PhaseTimings>,
}

impl ReportDocument {
    pub fn all_succeeded(&self) -> bool {
        self.errors.is_empty()
    }

    /// Deterministic rendering: sorted keys, pretty-printed, trailing
    /// newline.
    pub fn to_json_string(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialization cannot fail");
        let mut out = serde_json::to_string_pretty(&value).expect("valid JSON value");
        out.push('\n');
        out
    }
}

struct SystemOutcome {
    sci: SciResult,
    leais: LeaisResult,
    ner: NerResult,
    metrics: MetricsRecord,
    timings: PhaseTimings,
}

fn read_file(base_dir: &Path, rel: &str) -> Result<Vec<u8>, String> {
    let path = base_dir.join(rel);
    fs::read(&path).map_err(|e| format!("read {}: {e}", path.display()))
}

fn evaluate_system(
    system: &SystemConfig,
    config: &RunConfig,
    base_dir: &Path,
) -> Result<SystemOutcome, String> {
    let mut timings = PhaseTimings::default();

    let model_bytes = read_file(base_dir, &system.model)?;
    let model_json = String::from_utf8(model_bytes).map_err(|e| format!("model file: {e}"))?;
    let model: MlpModel = MlpModel::from_json_str(&model_json).map_err(|e| e.to_string())?;

    let clock = Instant::now();
    let mut artifact = model::serialize_canonical(&model, system.id.clone());
    if let Some(data_path) = &system.attach_data {
        let data = read_file(base_dir, data_path)?;
        artifact.attach_data(&data);
    }
    let sci_result = sci::sci_estimate(&artifact, &model.input_spec).map_err(|e| e.to_string())?;
    timings.sci_secs = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let leais_result = leais::leais_feedforward(
        &model,
        config.leais.samples,
        config.leais.seed,
        config.leais.mode,
        config.leais.fd_step,
    )
    .map_err(|e| e.to_string())?;
    timings.leais_secs = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let game_path = system
        .game
        .as_ref()
        .ok_or_else(|| "no game file configured for NER".to_string())?;
    let game_bytes = read_file(base_dir, game_path)?;
    let game_json = String::from_utf8(game_bytes).map_err(|e| format!("game file: {e}"))?;
    let game = NormalFormGame::from_json_str(&game_json).map_err(|e| e.to_string())?;

    let trajectory = match config.ner.dynamics {
        DynamicsKind::Br => {
            let init = MixedProfile::uniform(&game);
            game::best_response_dynamics(&game, &init, config.ner.steps, config.ner.damping)
        }
        DynamicsKind::Fp => {
            let init = vec![0usize; game.num_players()];
            game::fictitious_play(&game, &init, config.ner.steps)
        }
    }
    .map_err(|e| e.to_string())?;
    let mut ner_result = game::ner_literal(&game, &trajectory).map_err(|e| e.to_string())?;

    if let Some(epsilon) = config.ner.epsilon {
        if game.num_players() == 2 {
            let equilibria = game::support_enumeration_2p(&game).map_err(|e| e.to_string())?;
            if let Some(eq) = equilibria.first() {
                let d = game::ner_epsilon(&game, eq, epsilon, config.ner.grid)
                    .map_err(|e| e.to_string())?;
                ner_result.ner_epsilon = Some(d);
                ner_result.epsilon = Some(epsilon);
            }
        }
    }
    timings.ner_secs = clock.elapsed().as_secs_f64();

    let (ner_value, ner_kind) = match ner_result.ner_epsilon {
        Some(d) => (d, NerKind::Epsilon),
        None => (ner_result.ner_literal, NerKind::Literal),
    };
    let metrics = MetricsRecord {
        system_id: system.id.clone(),
        sci: sci_result.sci,
        leais: leais_result.max_over_points,
        ner: ner_value,
        ner_kind,
    };
    Ok(SystemOutcome {
        sci: sci_result,
        leais: leais_result,
        ner: ner_result,
        metrics,
        timings,
    })
}

fn worker_count(systems: usize) -> usize {
    let configured = std::env::var("TRIMETRIC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let auto = std::thread::available_parallelism()
        .map(std::num::NonZeroUsize::get)
        .unwrap_or(1);
    let cap = if configured == 0 { auto } else { configured };
    cap.clamp(1, systems.max(1))
}

/// Runs every configured system and assembles the report. Per-system
/// failures land in the `errors` section instead of aborting the run;
/// config-level problems fail the whole call.
pub fn run_report(config: &RunConfig, base_dir: &Path) -> Result<ReportDocument, ReportError> {
    config.validate()?;
    let total_clock = Instant::now();

    let workers = worker_count(config.systems.len());
    let mut outcomes: Vec<Option<Result<SystemOutcome, String>>> =
        (0..config.systems.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers {
            let systems = &config.systems;
            handles.push(scope.spawn(move || {
                let mut done = Vec::new();
                let mut idx = w;
                while idx < systems.len() {
                    done.push((idx, evaluate_system(&systems[idx], config, base_dir)));
                    idx += workers;
                }
                done
            }));
        }
        for handle in handles {
            for (idx, outcome) in handle.join().expect("worker panicked") {
                outcomes[idx] = Some(outcome);
            }
        }
    });

    let mut succeeded: Vec<(String, SystemOutcome)> = Vec::new();
    let mut errors: Vec<SystemError> = Vec::new();
    for (system, outcome) in config.systems.iter().zip(outcomes) {
        match outcome.expect("every system evaluated") {
            Ok(oc) => succeeded.push((system.id.clone(), oc)),
            Err(message) => errors.push(SystemError {
                system_id: system.id.clone(),
                message,
            }),
        }
    }
    succeeded.sort_by(|a, b| a.0.cmp(&b.0));
    errors.sort_by(|a, b| a.system_id.cmp(&b.system_id));

    let scoring_clock = Instant::now();
    let records: Vec<MetricsRecord> = succeeded.iter().map(|(_, oc)| oc.metrics.clone()).collect();
    let normalized = if records.is_empty() {
        Vec::new()
    } else {
        scoring::normalize_cohort(&records).map_err(|e| ReportError::Config(e.to_string()))?
    };
    let scatter =
        scoring::scatter_export(&normalized).map_err(|e| ReportError::Config(e.to_string()))?;

    let mut timings = PhaseTimings::default();
    let mut systems = Vec::with_capacity(succeeded.len());
    for ((id, outcome), norm) in succeeded.into_iter().zip(normalized) {
        debug_assert_eq!(id, norm.system_id);
        let literal = scoring::security_score_literal(&outcome.metrics, &config.weights)
            .map_err(|e| ReportError::Config(e.to_string()))?;
        let risk = scoring::risk_score_oriented(&norm, &config.weights)
            .map_err(|e| ReportError::Config(e.to_string()))?;
        timings.sci_secs += outcome.timings.sci_secs;
        timings.leais_secs += outcome.timings.leais_secs;
        timings.ner_secs += outcome.timings.ner_secs;
        systems.push(SystemReport {
            system_id: id,
            sci: outcome.sci,
            leais: LeaisSummary::from(&outcome.leais),
            ner: outcome.ner,
            metrics: outcome.metrics,
            normalized: norm,
            security_score_literal: literal,
            risk_score_oriented: risk,
        });
    }
    timings.scoring_secs = scoring_clock.elapsed().as_secs_f64();
    timings.total_secs = total_clock.elapsed().as_secs_f64();

    Ok(ReportDocument {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        systems,
        errors,
        scatter,
        timings: config.include_timings.then_some(timings),
    })
}
