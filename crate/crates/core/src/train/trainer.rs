use std::fmt::Write as _;

use log::{info, warn};
use rayon::prelude::*;

use super::checkpoint::Checkpoint;
use super::schedule::{default_schedule, CurriculumSchedule, Stage};
use crate::data::{make_batches, make_windows, parse_csv, split_by_date, to_returns, DateSplit, ReturnsSeries};
use crate::error::{Error, Result};
use crate::init::build_model;
use crate::model::{model_gradients, Model, ModelConfig, ModelGrads};
use crate::ndmath::RngState;
use crate::optim::{adam_step, AdamConfig, AdamState};

/// Sequences per optimizer step.
pub const DEFAULT_BATCH_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub batch_size: usize,
    pub seed: u64,
    pub schedule: CurriculumSchedule,
    pub split: DateSplit,
    pub adam: AdamConfig,
}

impl TrainConfig {
    pub fn new(model: ModelConfig, seed: u64) -> Self {
        Self {
            model,
            batch_size: DEFAULT_BATCH_SIZE,
            seed,
            schedule: default_schedule(),
            split: DateSplit::default(),
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub window_length: usize,
    /// 1-based within the stage.
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSummary {
    pub window_length: usize,
    pub epochs: usize,
    pub mean_loss: f64,
}

/// Per-epoch mean training losses in the order they were run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// Window lengths of stages skipped because the series was too short.
    pub skipped: Vec<usize>,
}

impl TrainingHistory {
    pub fn stage_summaries(&self) -> Vec<StageSummary> {
        let mut out: Vec<StageSummary> = Vec::new();
        for rec in &self.epochs {
            match out.last_mut() {
                Some(s) if s.window_length == rec.window_length => {
                    s.mean_loss += rec.mean_loss;
                    s.epochs += 1;
                }
                _ => out.push(StageSummary {
                    window_length: rec.window_length,
                    epochs: 1,
                    mean_loss: rec.mean_loss,
                }),
            }
        }
        for s in &mut out {
            s.mean_loss /= s.epochs as f64;
        }
        out
    }

    /// `stage,epoch,mean_loss` rows; `stage` is the window length.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,epoch,mean_loss\n");
        for r in &self.epochs {
            let _ = writeln!(out, "{},{},{:.16e}", r.window_length, r.epoch, r.mean_loss);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub adam: AdamState,
    pub history: TrainingHistory,
    pub checkpoint: Checkpoint,
}

/// Averages the gradients of every window in the batch. Windows are
/// evaluated in parallel and summed in batch order.
fn batch_gradients(model: &Model, batch: &crate::data::Batch<'_>) -> Result<(f64, ModelGrads)> {
    let per_sample: Vec<(f64, ModelGrads)> = batch
        .samples
        .par_iter()
        .map(|w| model_gradients(model, &w.x, &w.y))
        .collect::<Result<_>>()?;
    let mut total = ModelGrads::zeros(&model.config);
    let mut loss_sum = 0.0;
    for (loss, g) in &per_sample {
        loss_sum += loss;
        total.add_assign(g);
    }
    total.scale(1.0 / per_sample.len() as f64);
    Ok((loss_sum, total))
}

/// Runs one curriculum stage: for every epoch the stride-1 windows are
/// reshuffled, batched and each batch's mean gradient is applied with one
/// ADAM step. Returns the mean per-window loss of each epoch.
pub fn train_stage(
    model: &mut Model,
    series: &ReturnsSeries,
    stage: Stage,
    cfg: &TrainConfig,
    adam: &mut AdamState,
    rng: &mut RngState,
) -> Result<Vec<f64>> {
    let windows = make_windows(series, stage.window_length, 1)?;
    let mut losses = Vec::with_capacity(stage.epochs);
    for epoch in 1..=stage.epochs {
        let batches = make_batches(&windows, cfg.batch_size, rng)?;
        let mut loss_sum = 0.0;
        for batch in &batches {
            let (batch_loss, grads) = batch_gradients(model, batch)?;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    window: stage.window_length,
                    epoch,
                });
            }
            loss_sum += batch_loss;
            adam_step(adam, model, &grads)?;
        }
        losses.push(loss_sum / windows.len() as f64);
    }
    Ok(losses)
}

/// Builds a model from `cfg.seed` and runs the whole schedule on `train`
/// with one shared optimizer state. Stages whose windows do not fit are
/// skipped with a warning.
pub fn train_series(train: &ReturnsSeries, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mut rng = RngState::new(cfg.seed);
    let mut model = build_model(&cfg.model, &mut rng)?;
    let mut adam = AdamState::for_model(&model);
    adam.config = cfg.adam;
    let mut history = TrainingHistory::default();

    for &stage in cfg.schedule.stages() {
        if train.len() < stage.window_length + 1 {
            warn!(
                "skipping stage with window length {}: {} return rows available",
                stage.window_length,
                train.len()
            );
            history.skipped.push(stage.window_length);
            continue;
        }
        match train_stage(&mut model, train, stage, cfg, &mut adam, &mut rng) {
            Ok(losses) => {
                for (k, &mean_loss) in losses.iter().enumerate() {
                    history.epochs.push(EpochRecord {
                        window_length: stage.window_length,
                        epoch: k + 1,
                        mean_loss,
                    });
                }
                info!(
                    "stage {}: {} epochs, last mean loss {:.6e}",
                    stage.window_length,
                    losses.len(),
                    losses.last().copied().unwrap_or(f64::NAN)
                );
            }
            Err(e) => {
                return Err(Error::TrainingAborted {
                    window: stage.window_length,
                    history: Box::new(history),
                    source: Box::new(e),
                })
            }
        }
    }
    if history.epochs.is_empty() {
        return Err(Error::SeriesTooShort {
            window: cfg.schedule.stages()[0].window_length,
            needed: cfg.schedule.stages()[0].window_length + 1,
            have: train.len(),
        });
    }
    let checkpoint = Checkpoint::from_model(&model, cfg.seed, Some(&adam), &history);
    Ok(TrainOutcome {
        model,
        adam,
        history,
        checkpoint,
    })
}

/// Parses the CSV, converts to returns, keeps the training date range and
/// trains on it.
pub fn train_full(csv_text: &str, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let series = to_returns(&parse_csv(csv_text)?)?;
    let (train, _) = split_by_date(&series, &cfg.split)?;
    train_series(&train, cfg)
}
