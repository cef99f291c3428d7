//! Command-line front end for the trimetric metrics.
//!
//! Every subcommand reads local files, computes deterministically, and
//! prints sorted-key JSON. Exit codes: 0 on success, 1 when a batch report
//! contains per-system failures, 2 on configuration or usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trimetric::codec;
use trimetric::game::{self, DynamicsKind, MixedProfile, NormalFormGame};
use trimetric::leais::{self, IteratedMap, LeaisMode, MapFamily};
use trimetric::model::{self, MlpModel};
use trimetric::report::{self, LeaisSummary, RunConfig};
use trimetric::sci;
use trimetric::scoring::{self, MetricsRecord, Weights};

#[derive(Parser)]
#[command(
    name = "trimetric",
    version,
    about = "Complexity, stability, and strategic-robustness metrics for desk-scale AI artifacts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Logistic,
    Tent,
    Linear,
}

impl From<FamilyArg> for MapFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Logistic => MapFamily::Logistic,
            FamilyArg::Tent => MapFamily::Tent,
            FamilyArg::Linear => MapFamily::Linear,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum DynamicsArg {
    #[default]
    Br,
    Fp,
}

impl From<DynamicsArg> for DynamicsKind {
    fn from(d: DynamicsArg) -> Self {
        match d {
            DynamicsArg::Br => DynamicsKind::Br,
            DynamicsArg::Fp => DynamicsKind::Fp,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// System complexity index of a model's canonical artifact.
    Sci {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Raw data blob appended to the artifact before compression.
        #[arg(long)]
        attach_data: Option<PathBuf>,
    },
    /// Stability exponent of a feedforward model over sampled inputs.
    Leais {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use central finite differences instead of the analytic Jacobian.
        #[arg(long)]
        fd: bool,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Lyapunov exponent of an iterated one-dimensional map.
    LeaisMap {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, allow_negative_numbers = true)]
        param: f64,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 1000)]
        t: u64,
        #[arg(long, default_value_t = 0)]
        transient: u64,
    },
    /// Equilibrium-robustness estimates for a normal-form game.
    Ner {
        /// Game JSON file.
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        dynamics: DynamicsArg,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
        /// Also compute the profitable-deviation distance at an equilibrium.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Normalize a cohort of metric records and score it.
    Score {
        /// JSON array of records {system_id, sci, leais, ner, ner_kind}.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        w1: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        w2: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        w3: f64,
        /// Also write the scatter rows as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compression statistics and optional wire blob for arbitrary bytes.
    CompressStats {
        #[arg(long)]
        input: PathBuf,
        /// Write the compressed wire blob here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch run: all metrics for every configured system.
    Report {
        /// Run configuration JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Output file (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("read {}: {e}", path.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("read {}: {e}", path.display()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), String> {
    fs::write(path, bytes).map_err(|e| format!("write {}: {e}", path.display()))
}

/// Sorted-key pretty JSON with a trailing newline.
fn print_json<T: serde::Serialize>(value: &T) -> Result<(), String> {
    let value = serde_json::to_value(value).map_err(|e| e.to_string())?;
    let rendered = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?;
    println!("{rendered}");
    Ok(())
}

fn load_model(path: &Path) -> Result<MlpModel, String> {
    MlpModel::from_json_str(&read_to_string(path)?).map_err(|e| e.to_string())
}

fn load_game(path: &Path) -> Result<NormalFormGame, String> {
    NormalFormGame::from_json_str(&read_to_string(path)?).map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Sci { model, attach_data } => {
            let parsed = load_model(&model)?;
            let mut artifact = model::serialize_canonical(
                &parsed,
                model
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("model"),
            );
            if let Some(data) = attach_data {
                artifact.attach_data(&read_bytes(&data)?);
            }
            let result =
                sci::sci_estimate(&artifact, &parsed.input_spec).map_err(|e| e.to_string())?;
            print_json(&result)?;
        }
        Command::Leais {
            model,
            samples,
            seed,
            fd,
            step,
        } => {
            let parsed = load_model(&model)?;
            let mode = if fd {
                LeaisMode::Fd
            } else {
                LeaisMode::Analytic
            };
            let result = leais::leais_feedforward(&parsed, samples, seed, mode, step)
                .map_err(|e| e.to_string())?;
            print_json(&LeaisSummary::from(&result))?;
        }
        Command::LeaisMap {
            family,
            param,
            x0,
            t,
            transient,
        } => {
            let map = IteratedMap::new(family.into(), param).map_err(|e| e.to_string())?;
            let lambda =
                leais::leais_iterated(&map, x0, t, transient).map_err(|e| e.to_string())?;
            print_json(&serde_json::json!({ "lambda": lambda }))?;
        }
        Command::Ner {
            game: game_path,
            dynamics,
            steps,
            damping,
            epsilon,
            grid,
        } => {
            let game = load_game(&game_path)?;
            let trajectory = match DynamicsKind::from(dynamics) {
                DynamicsKind::Br => game::best_response_dynamics(
                    &game,
                    &MixedProfile::uniform(&game),
                    steps,
                    damping,
                ),
                DynamicsKind::Fp => {
                    game::fictitious_play(&game, &vec![0; game.num_players()], steps)
                }
            }
            .map_err(|e| e.to_string())?;
            let mut result = game::ner_literal(&game, &trajectory).map_err(|e| e.to_string())?;
            if let Some(eps) = epsilon {
                if game.num_players() == 2 {
                    let equilibria =
                        game::support_enumeration_2p(&game).map_err(|e| e.to_string())?;
                    if let Some(eq) = equilibria.first() {
                        let d =
                            game::ner_epsilon(&game, eq, eps, grid).map_err(|e| e.to_string())?;
                        result.ner_epsilon = Some(d);
                        result.epsilon = Some(eps);
                    }
                }
            }
            print_json(&result)?;
        }
        Command::Score {
            records,
            w1,
            w2,
            w3,
            csv,
        } => {
            let cohort: Vec<MetricsRecord> = serde_json::from_str(&read_to_string(&records)?)
                .map_err(|e| format!("records JSON: {e}"))?;
            let weights = Weights::new(w1, w2, w3).map_err(|e| e.to_string())?;
            let normalized = scoring::normalize_cohort(&cohort).map_err(|e| e.to_string())?;
            let scored: Vec<serde_json::Value> = cohort
                .iter()
                .zip(&normalized)
                .map(|(raw, norm)| {
                    Ok(serde_json::json!({
                        "metrics": raw,
                        "normalized": norm,
                        "security_score_literal":
                            scoring::security_score_literal(raw, &weights)
                                .map_err(|e| e.to_string())?,
                        "risk_score_oriented":
                            scoring::risk_score_oriented(norm, &weights)
                                .map_err(|e| e.to_string())?,
                    }))
                })
                .collect::<Result<_, String>>()?;
            let scatter = scoring::scatter_export(&normalized).map_err(|e| e.to_string())?;
            if let Some(csv_path) = csv {
                write_bytes(&csv_path, scoring::scatter_to_csv(&scatter).as_bytes())?;
            }
            print_json(&serde_json::json!({ "records": scored, "scatter": scatter }))?;
        }
        Command::CompressStats { input, out } => {
            let data = read_bytes(&input)?;
            let blob = codec::compress(&data);
            let round_trip = codec::decompress(&blob).map_err(|e| e.to_string())?;
            if round_trip != data {
                return Err("internal error: round trip mismatch".into());
            }
            if let Some(out_path) = out {
                write_bytes(&out_path, &blob.to_bytes())?;
            }
            print_json(&serde_json::json!({
                "original_len": blob.original_len,
                "payload_bits": blob.payload_bits,
                "compressed_size_bits": codec::compressed_size_bits(&data),
                "code_count": blob.codes().len(),
            }))?;
        }
        Command::Report {
            config: config_path,
            out,
        } => {
            let config = RunConfig::from_json_str(&read_to_string(&config_path)?)
                .map_err(|e| e.to_string())?;
            let base_dir = config_path.parent().unwrap_or(Path::new("."));
            let document = report::run_report(&config, base_dir).map_err(|e| e.to_string())?;
            let rendered = document.to_json_string();
            let target: Option<PathBuf> =
                out.or_else(|| config.output.as_ref().map(|rel| base_dir.join(rel)));
            match target {
                Some(path) => {
                    write_bytes(&path, rendered.as_bytes())?;
                    eprintln!("report written to {}", path.display());
                }
                None => print!("{rendered}"),
            }
            if !document.all_succeeded() {
                for err in &document.errors {
                    eprintln!("system {} failed: {}", err.system_id, err.message);
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
