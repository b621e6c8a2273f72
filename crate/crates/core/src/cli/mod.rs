//! Command implementations behind the `ar-rul` binary.
//!
//! Every command that writes outputs also writes `manifest.json` into its
//! output directory; `replay` reruns a manifest into a new directory.

mod inputs;
mod manifest;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use inputs::{load_bearings, native_files_in, LoadedBearing, PhmLabels};
pub use manifest::{write_atomic, RunManifest, MANIFEST_NAME};

use crate::armodel::{Ablation, ArNetwork, InitMode};
use crate::checkpoint;
use crate::datapipe::{
    detect_fpt, pad_and_window, window_all, Fpt3SigmaConfig, FptTable, Indicator, WindowedDataset,
};
use crate::error::Error;
use crate::evaluator::{curve_metrics, rollout, MetricsReport, PredictionCurve};
use crate::synthgen::{generate_suite, write_suite, Spike, SynthSpec};
use crate::trainer::{train_with_observer, PartialTrainConfig, ScheduleSpec, TrainConfig, TrainEvent};

pub const THREADS_ENV: &str = "AR_RUL_THREADS";
pub const TRAIN_CONFIG_FILE: &str = "train_config.toml";
pub const REPORT_FILE: &str = "report.json";
pub const AGGREGATE_FILE: &str = "aggregate.json";

#[derive(Debug, Parser)]
#[command(name = "ar-rul", version, about = "Autoregressive CNN for bearing remaining-useful-life prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory of native bearing CSVs (each with a .meta sidecar).
    #[arg(long)]
    pub data: Vec<PathBuf>,
    /// A single native bearing CSV.
    #[arg(long)]
    pub bearing: Vec<PathBuf>,
    /// A PHM2012 bearing directory of acc_*.csv files.
    #[arg(long)]
    pub phm2012: Vec<PathBuf>,
    /// Label PHM2012 bearings by 3σ detection instead of the published FPT table.
    #[arg(long)]
    pub detect_fpt: bool,
}

impl DataArgs {
    fn load(&self) -> crate::Result<Vec<LoadedBearing>> {
        let labels = if self.detect_fpt { PhmLabels::Detect } else { PhmLabels::TableThenDetect };
        load_bearings(&self.data, &self.bearing, &self.phm2012, labels)
    }
}

/// Training flags; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    /// Window size in acquisitions [default: 45].
    #[arg(long)]
    pub k: Option<usize>,
    /// Segments per bearing [default: 15].
    #[arg(long)]
    pub n: Option<usize>,
    /// Training epochs [default: 6].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// AdamW learning rate [default: 0.0008].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Decoupled AdamW weight decay [default: 0.01].
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Early steps of each segment that repeat training [default: 120].
    #[arg(long)]
    pub bg: Option<usize>,
    /// Stages the first `bg` steps are split into [default: 3].
    #[arg(long)]
    pub z: Option<usize>,
    /// Comma-separated iterations, `z` per epoch, e.g. 2,2,2,2,2,1,2,1,1.
    #[arg(long)]
    pub iters_schedule: Option<ScheduleSpec>,
    /// Bearings trained together in one batch [default: 3].
    #[arg(long)]
    pub bearings_per_batch: Option<usize>,
    /// teacher or ones.
    #[arg(long)]
    pub init_mode: Option<InitMode>,
    /// none or non-ar.
    #[arg(long)]
    pub ablation: Option<Ablation>,
    /// Width multiplier on every backbone channel count [default: 1.0].
    #[arg(long)]
    pub channel_scale: Option<f64>,
    /// Width of the 1×1 HI-branch convolution [default: 8].
    #[arg(long)]
    pub label_branch_channels: Option<usize>,
    /// Hidden units of the head [default: 256].
    #[arg(long)]
    pub fusion_hidden: Option<usize>,
    /// Head dropout probability [default: 0.2].
    #[arg(long)]
    pub dropout_rate: Option<f64>,
}

impl TrainFlags {
    pub fn to_partial(&self, seed: Option<u64>) -> PartialTrainConfig {
        PartialTrainConfig {
            k: self.k,
            n: self.n,
            epochs: self.epochs,
            lr: self.lr,
            weight_decay: self.weight_decay,
            seed,
            bg: self.bg,
            z: self.z,
            iters_schedule: self.iters_schedule.clone(),
            bearings_per_batch: self.bearings_per_batch,
            init_mode: self.init_mode,
            ablation: self.ablation,
            channel_scale: self.channel_scale,
            label_branch_channels: self.label_branch_channels,
            fusion_hidden: self.fusion_hidden,
            dropout_rate: self.dropout_rate,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic run-to-failure bearings.
    GenData {
        #[command(flatten)]
        common: Common,
        /// Number of bearings [default: 3].
        #[arg(long)]
        count: Option<usize>,
        /// Acquisitions per bearing [default: 300].
        #[arg(long)]
        acquisitions: Option<usize>,
        /// Points per acquisition and channel [default: 256].
        #[arg(long)]
        points: Option<usize>,
        /// Healthy noise standard deviation [default: 1.0].
        #[arg(long)]
        a0: Option<f64>,
        /// Degradation onset as a fraction of the record length [default: 0.5].
        #[arg(long)]
        onset: Option<f64>,
        /// Exponential amplitude growth per acquisition after onset [default: 0.02].
        #[arg(long)]
        rate: Option<f64>,
        /// Transient spike start as a fraction of the record length.
        #[arg(long)]
        spike_position: Option<f64>,
        /// Amplitude multiplier during the spike.
        #[arg(long)]
        spike_multiplier: Option<f64>,
        /// Spike length in acquisitions.
        #[arg(long)]
        spike_duration: Option<usize>,
    },
    /// Train a model.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        flags: TrainFlags,
        /// Also write epoch_N.ckpt after every epoch.
        #[arg(long)]
        epoch_checkpoints: bool,
    },
    /// Roll a trained model over bearings and write prediction CSVs and charts.
    Predict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        infer: InferArgs,
        /// Clip reported HI to [0, 1].
        #[arg(long)]
        clamp: bool,
    },
    /// Score a model (or existing prediction CSVs) with RMSE, MAE and score.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        infer: InferArgs,
        /// Score prediction CSVs instead of running a model.
        #[arg(long)]
        predictions: Vec<PathBuf>,
        /// Clip predicted HI to [0, 1] before scoring.
        #[arg(long)]
        clamp: bool,
    },
    /// Detect or look up the first prediction time.
    Fpt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        /// Look up a PHM2012 bearing id in the published FPT table.
        #[arg(long)]
        table: Vec<String>,
        /// Alternative FPT table CSV (bearing_id,fpt_seconds).
        #[arg(long)]
        fpt_table: Option<PathBuf>,
        /// Leading acquisitions that define the healthy mean and σ.
        #[arg(long, default_value_t = 100)]
        baseline: usize,
        /// Successive exceedances of μ + 3σ needed to declare degradation.
        #[arg(long, default_value_t = 2)]
        consecutive: usize,
        /// rms or kurtosis.
        #[arg(long, default_value = "rms")]
        indicator: String,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        /// manifest.json written by an earlier run.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory of the rerun.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InferArgs {
    /// Directory holding model.ckpt and model.toml.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// HI window at segment starts: carryover, ones or teacher.
    #[arg(long, default_value = "carryover")]
    pub init: InitMode,
    /// Override how the HI branch is fed: none or non-ar.
    #[arg(long)]
    pub ablation: Option<Ablation>,
    /// Segments per bearing; defaults to the value the model was trained with.
    #[arg(long)]
    pub n: Option<usize>,
}

/// Worker threads for per-bearing fan-out, from `AR_RUL_THREADS` (default 1).
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

/// Applies `f` to every item on up to `threads` threads; results keep input order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                s.spawn(move || {
                    (t..items.len())
                        .step_by(threads)
                        .map(|i| (i, f(&items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Synthetic-data settings with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub count: usize,
    pub seed: u64,
    pub acquisitions: usize,
    pub points: usize,
    pub a0: f64,
    pub onset: f64,
    pub rate: f64,
    pub spike_position: Option<f64>,
    pub spike_multiplier: Option<f64>,
    pub spike_duration: Option<usize>,
}

impl Default for GenConfig {
    fn default() -> Self {
        let s = SynthSpec::default();
        Self {
            count: 3,
            seed: 0,
            acquisitions: s.acquisitions,
            points: s.points,
            a0: s.a0,
            onset: s.onset_fraction,
            rate: s.rate,
            spike_position: None,
            spike_multiplier: None,
            spike_duration: None,
        }
    }
}

impl GenConfig {
    pub fn base_spec(&self) -> anyhow::Result<SynthSpec> {
        let spike = match (self.spike_position, self.spike_multiplier, self.spike_duration) {
            (None, None, None) => None,
            (Some(position), m, d) => Some(Spike {
                position,
                multiplier: m.unwrap_or(5.0),
                duration: d.unwrap_or(3),
            }),
            _ => bail!("spike options need --spike-position"),
        };
        Ok(SynthSpec {
            seed: self.seed,
            acquisitions: self.acquisitions,
            points: self.points,
            a0: self.a0,
            onset_fraction: self.onset,
            rate: self.rate,
            spike,
        })
    }
}

fn read_config_text(path: &Option<PathBuf>) -> anyhow::Result<Option<String>> {
    path.as_ref()
        .map(|p| std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display())))
        .transpose()
}

/// Resolves the training config: flag > file > default.
pub fn resolve_train_config(common: &Common, flags: &TrainFlags) -> crate::Result<TrainConfig> {
    let file = match &common.config {
        Some(p) => PartialTrainConfig::from_file(p)?,
        None => PartialTrainConfig::default(),
    };
    file.overlay(flags.to_partial(common.seed)).resolve()
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// Parses and runs one command line (without the program name).
pub fn run<I, S>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(std::iter::once("ar-rul".to_string()).chain(args.iter().cloned()))?;
    execute(cli.command, args, None)
}

fn execute(command: Command, args: Vec<String>, resolved: Option<serde_json::Value>) -> anyhow::Result<()> {
    let started = Instant::now();
    let (out, mut manifest) = match command {
        Command::GenData {
            common,
            count,
            acquisitions,
            points,
            a0,
            onset,
            rate,
            spike_position,
            spike_multiplier,
            spike_duration,
        } => {
            let cfg: GenConfig = match resolved {
                Some(v) => serde_json::from_value(v)?,
                None => {
                    let mut c: GenConfig = match read_config_text(&common.config)? {
                        Some(t) => toml::from_str(&t).context("parsing gen-data config")?,
                        None => GenConfig::default(),
                    };
                    c.count = count.unwrap_or(c.count);
                    c.seed = common.seed.unwrap_or(c.seed);
                    c.acquisitions = acquisitions.unwrap_or(c.acquisitions);
                    c.points = points.unwrap_or(c.points);
                    c.a0 = a0.unwrap_or(c.a0);
                    c.onset = onset.unwrap_or(c.onset);
                    c.rate = rate.unwrap_or(c.rate);
                    c.spike_position = spike_position.or(c.spike_position);
                    c.spike_multiplier = spike_multiplier.or(c.spike_multiplier);
                    c.spike_duration = spike_duration.or(c.spike_duration);
                    c
                }
            };
            let m = cmd_gen_data(&cfg, &common.out, args)?;
            (common.out, m)
        }
        Command::Train { common, data, flags, epoch_checkpoints } => {
            let cfg = match resolved {
                Some(v) => serde_json::from_value(v)?,
                None => resolve_train_config(&common, &flags)?,
            };
            let m = cmd_train(&cfg, &data, &common.out, epoch_checkpoints, args)?;
            (common.out, m)
        }
        Command::Predict { common, data, infer, clamp } => {
            let m = cmd_predict(&data, &infer, clamp, &common.out, args)?;
            (common.out, m)
        }
        Command::Evaluate { common, data, infer, predictions, clamp } => {
            let m = cmd_evaluate(&data, &infer, &predictions, clamp, &common.out, args)?;
            (common.out, m)
        }
        Command::Fpt { common, data, table, fpt_table, baseline, consecutive, indicator } => {
            let indicator = match indicator.as_str() {
                "rms" => Indicator::Rms,
                "kurtosis" => Indicator::Kurtosis,
                other => bail!("unknown indicator `{other}` (rms, kurtosis)"),
            };
            let cfg = Fpt3SigmaConfig { indicator, baseline_count: baseline, consecutive_required: consecutive };
            let m = cmd_fpt(&data, &table, fpt_table.as_deref(), &cfg, &common.out, args)?;
            (common.out, m)
        }
        Command::Replay { manifest, out } => return cmd_replay(&manifest, &out),
    };
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&out)?;
    Ok(())
}

/// Replaces (or appends) `--out` in a recorded argument list.
fn with_out(args: &[String], out: &Path) -> Vec<String> {
    let mut v = Vec::with_capacity(args.len() + 2);
    let mut it = args.iter();
    let mut replaced = false;
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if a.starts_with("--out=") {
        } else {
            v.push(a.clone());
            continue;
        }
        if !replaced {
            v.push("--out".into());
            v.push(out.display().to_string());
            replaced = true;
        }
    }
    if !replaced {
        v.push("--out".into());
        v.push(out.display().to_string());
    }
    v
}

/// Reruns a manifest's command with its resolved settings into `out`.
pub fn cmd_replay(manifest_path: &Path, out: &Path) -> anyhow::Result<()> {
    let m = RunManifest::read(manifest_path)?;
    let args = with_out(&m.args, out);
    let cli = Cli::try_parse_from(std::iter::once("ar-rul".to_string()).chain(args.iter().cloned()))
        .context("manifest holds an unparseable command line")?;
    if matches!(cli.command, Command::Replay { .. }) {
        bail!("a replay manifest cannot be replayed");
    }
    let resolved = (!m.config.is_null()).then_some(m.config);
    execute(cli.command, args, resolved)
}

fn cmd_gen_data(cfg: &GenConfig, out: &Path, args: Vec<String>) -> anyhow::Result<RunManifest> {
    let base = cfg.base_spec()?;
    let records = generate_suite(cfg.count, &base, cfg.seed)?;
    ensure_dir(out)?;
    let paths = write_suite(&records, out)?;
    let mut m = RunManifest::new("gen-data", args);
    m.config = serde_json::to_value(cfg)?;
    m.seed = Some(cfg.seed);
    for p in paths {
        m.outputs.push(crate::datapipe::sidecar_path(&p));
        m.outputs.push(p);
    }
    println!("wrote {} bearings to {}", records.len(), out.display());
    Ok(m)
}

fn cmd_train(
    cfg: &TrainConfig,
    data: &DataArgs,
    out: &Path,
    epoch_checkpoints: bool,
    args: Vec<String>,
) -> anyhow::Result<RunManifest> {
    let bearings = data.load()?;
    let inputs: Vec<PathBuf> = bearings.iter().map(|b| b.source.clone()).collect();
    let datasets = window_all(bearings.into_iter().map(|b| b.record).collect(), cfg.k, cfg.n)?;
    ensure_dir(out)?;
    let mut outputs = Vec::new();
    let (model, report) = train_with_observer(&datasets, cfg, &mut |ev| {
        if let TrainEvent::EpochEnd { epoch, mean_loss, model } = ev {
            eprintln!("epoch {epoch}: mean loss {mean_loss:.6}");
            if epoch_checkpoints {
                let path = out.join(format!("epoch_{epoch}.ckpt"));
                checkpoint::write(&path, &model.to_records())?;
                outputs.push(path);
            }
        }
        Ok(())
    })?;
    model.save(out)?;
    write_atomic(&out.join(TRAIN_CONFIG_FILE), cfg.to_toml().as_bytes())?;
    write_json(&out.join(REPORT_FILE), &report)?;
    outputs.extend([
        out.join(crate::armodel::CHECKPOINT_FILE),
        out.join(crate::armodel::MANIFEST_FILE),
        out.join(TRAIN_CONFIG_FILE),
        out.join(REPORT_FILE),
    ]);
    let mut m = RunManifest::new("train", args);
    m.config = serde_json::to_value(cfg)?;
    m.seed = Some(cfg.seed);
    m.inputs = inputs;
    m.outputs = outputs;
    println!("trained {} epochs, final mean loss {:.6}", cfg.epochs, report.final_loss());
    Ok(m)
}

struct LoadedModel {
    net: ArNetwork,
    n: usize,
}

fn load_model(infer: &InferArgs) -> anyhow::Result<LoadedModel> {
    let dir = infer.model.as_ref().context("--model is required")?;
    let mut net = ArNetwork::load(dir).with_context(|| format!("loading model from {}", dir.display()))?;
    if let Some(a) = infer.ablation {
        net.set_ablation(a);
    }
    let trained_n = std::fs::read_to_string(dir.join(TRAIN_CONFIG_FILE))
        .ok()
        .and_then(|t| toml::from_str::<TrainConfig>(&t).ok())
        .map(|c| c.n);
    let n = infer.n.or(trained_n).unwrap_or(TrainConfig::default().n);
    Ok(LoadedModel { net, n })
}

/// Rolls the model over every bearing, fanning out across threads.
fn rollouts(model: &LoadedModel, bearings: &[LoadedBearing], init: InitMode) -> anyhow::Result<Vec<PredictionCurve>> {
    let k = model.net.config().k;
    let datasets: Vec<WindowedDataset> = bearings
        .iter()
        .map(|b| pad_and_window(b.record.clone(), k, model.n))
        .collect::<crate::Result<_>>()?;
    let results = parallel_map(&datasets, thread_count(), |d| {
        let mut net = model.net.clone();
        rollout(&mut net, d, init)
    });
    Ok(results.into_iter().collect::<crate::Result<Vec<_>>>()?)
}

fn curve_chart(curve: &PredictionCurve, extra: &[(&str, &str, &PredictionCurve)]) -> String {
    let mut series = vec![svg::Series {
        label: "predicted",
        color: "#1f77b4",
        points: curve.acquisition_indices().map(|i| i as f64).zip(curve.predicted.iter().copied()).collect(),
    }];
    for (label, color, c) in extra {
        series.push(svg::Series {
            label,
            color,
            points: c.acquisition_indices().map(|i| i as f64).zip(c.predicted.iter().copied()).collect(),
        });
    }
    if let Some(t) = &curve.truth {
        series.push(svg::Series {
            label: "true",
            color: "#444444",
            points: curve.acquisition_indices().map(|i| i as f64).zip(t.iter().copied()).collect(),
        });
    }
    svg::line_chart(&curve.bearing_id, "acquisition", "health indicator", &series)
}

/// Chart of several curves of the same bearing against its labels.
pub fn comparison_chart(title: &str, curves: &[(&str, &str, &PredictionCurve)]) -> String {
    let mut series: Vec<svg::Series<'_>> = curves
        .iter()
        .map(|(label, color, c)| svg::Series {
            label,
            color,
            points: c.acquisition_indices().map(|i| i as f64).zip(c.predicted.iter().copied()).collect(),
        })
        .collect();
    if let Some((_, _, c)) = curves.first() {
        if let Some(t) = &c.truth {
            series.push(svg::Series {
                label: "true",
                color: "#444444",
                points: c.acquisition_indices().map(|i| i as f64).zip(t.iter().copied()).collect(),
            });
        }
    }
    svg::line_chart(title, "acquisition", "health indicator", &series)
}

fn cmd_predict(
    data: &DataArgs,
    infer: &InferArgs,
    clamp: bool,
    out: &Path,
    args: Vec<String>,
) -> anyhow::Result<RunManifest> {
    let model = load_model(infer)?;
    let bearings = data.load()?;
    let curves = rollouts(&model, &bearings, infer.init)?;
    ensure_dir(out)?;
    let mut m = RunManifest::new("predict", args);
    for (b, curve) in bearings.iter().zip(curves) {
        let curve = if clamp { curve.clamp() } else { curve };
        let csv = out.join(format!("{}_pred.csv", b.stem));
        let chart = out.join(format!("{}_pred.svg", b.stem));
        write_atomic(&csv, curve.to_csv().as_bytes())?;
        write_atomic(&chart, curve_chart(&curve, &[]).as_bytes())?;
        m.inputs.push(b.source.clone());
        m.outputs.extend([csv, chart]);
    }
    m.config = serde_json::json!({
        "model": infer.model,
        "init": infer.init,
        "ablation": model.net.config().ablation,
        "n": model.n,
        "clamp": clamp,
    });
    if let Some(dir) = &infer.model {
        m.inputs.push(dir.clone());
    }
    println!("wrote predictions for {} bearings to {}", bearings.len(), out.display());
    Ok(m)
}

/// Reads an `acq_index,predicted_hi,true_hi` file into a curve.
pub fn read_prediction_csv(path: &Path) -> crate::Result<PredictionCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l.trim()) != Some("acq_index,predicted_hi,true_hi") {
        return Err(Error::Format(format!("{}: missing prediction header", path.display())));
    }
    let parse_err = |row: usize, column: usize, message: String| Error::Parse { path: path.into(), row, column, message };
    let (mut first, mut pred, mut truth) = (None, Vec::new(), Vec::new());
    for (row, line) in lines {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(row + 1, 1, "expected three columns".into()));
        }
        let idx: usize = cols[0].parse().map_err(|_| parse_err(row + 1, 1, format!("`{}` is not an index", cols[0])))?;
        first.get_or_insert(idx);
        for (c, dst) in [(1, &mut pred), (2, &mut truth)] {
            let v: f64 = cols[c].parse().map_err(|_| parse_err(row + 1, c + 1, format!("`{}` is not a number", cols[c])))?;
            dst.push(v);
        }
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(PredictionCurve {
        bearing_id: stem.trim_end_matches("_pred").to_string(),
        k: first.unwrap_or(0),
        predicted: pred,
        truth: Some(truth),
        clamped: false,
    })
}

fn cmd_evaluate(
    data: &DataArgs,
    infer: &InferArgs,
    predictions: &[PathBuf],
    clamp: bool,
    out: &Path,
    args: Vec<String>,
) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::new("evaluate", args);
    let mut named: Vec<(String, PredictionCurve)> = Vec::new();
    for p in predictions {
        let c = read_prediction_csv(p)?;
        m.inputs.push(p.clone());
        named.push((c.bearing_id.clone(), c));
    }
    let has_data = !(data.data.is_empty() && data.bearing.is_empty() && data.phm2012.is_empty());
    let mut ablation = None;
    if has_data || infer.model.is_some() {
        let model = load_model(infer)?;
        ablation = Some(model.net.config().ablation);
        let bearings = data.load()?;
        let curves = rollouts(&model, &bearings, infer.init)?;
        for (b, c) in bearings.iter().zip(curves) {
            m.inputs.push(b.source.clone());
            named.push((b.stem.clone(), c));
        }
    }
    if named.is_empty() {
        bail!("nothing to evaluate; give --model with bearings, or --predictions");
    }
    ensure_dir(out)?;
    let mut reports = Vec::with_capacity(named.len());
    for (stem, curve) in &named {
        let curve = if clamp { curve.clamp() } else { curve.clone() };
        let r = curve_metrics(&curve)?;
        let path = out.join(format!("{stem}_metrics.json"));
        write_json(&path, &r)?;
        m.outputs.push(path);
        println!("{stem}: rmse {:.6} mae {:.6} score {:.6} n {}", r.rmse, r.mae, r.score, r.n);
        reports.push(r);
    }
    let agg = MetricsReport::mean(&reports)?;
    let path = out.join(AGGREGATE_FILE);
    write_json(&path, &agg)?;
    m.outputs.push(path);
    m.config = serde_json::json!({
        "model": infer.model,
        "init": infer.init,
        "ablation": ablation,
        "clamp": clamp,
    });
    println!("mean: rmse {:.6} mae {:.6} score {:.6}", agg.rmse, agg.mae, agg.score);
    Ok(m)
}

fn cmd_fpt(
    data: &DataArgs,
    table_ids: &[String],
    table_path: Option<&Path>,
    cfg: &Fpt3SigmaConfig,
    out: &Path,
    args: Vec<String>,
) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::new("fpt", args);
    let mut rows = String::from("bearing_id,fpt_index,fpt_seconds,source\n");
    if !table_ids.is_empty() {
        let table = match table_path {
            Some(p) => FptTable::from_file(p)?,
            None => FptTable::builtin(),
        };
        for id in table_ids {
            let Some(secs) = table.seconds(id) else {
                let known: Vec<&str> = table.ids().collect();
                bail!("bearing `{id}` is not in the FPT table (known: {})", known.join(", "));
            };
            let idx = table.index(id, crate::datapipe::DEFAULT_SAMPLE_PERIOD_S).unwrap_or(0);
            println!("{id}: {secs} s");
            rows.push_str(&format!("{},{idx},{secs},table\n", crate::datapipe::canonical_bearing_id(id)));
        }
    }
    let has_data = !(data.data.is_empty() && data.bearing.is_empty() && data.phm2012.is_empty());
    if has_data {
        let bearings = data.load()?;
        for b in &bearings {
            let idx = detect_fpt(&b.record, cfg)?;
            let secs = idx as f64 * b.record.sample_period_s;
            println!("{}: acquisition {idx} ({secs} s)", b.stem);
            rows.push_str(&format!("{},{idx},{secs},detected\n", b.stem));
            m.inputs.push(b.source.clone());
        }
    }
    if table_ids.is_empty() && !has_data {
        bail!("nothing to do; give --table IDs or bearings");
    }
    ensure_dir(out)?;
    let path = out.join("fpt.csv");
    write_atomic(&path, rows.as_bytes())?;
    m.outputs.push(path);
    m.config = serde_json::to_value(cfg)?;
    Ok(m)
}
