//! Length-doubling curriculum training and checkpoints.

mod checkpoint;
mod schedule;
mod trainer;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, NamedTensor, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use schedule::{default_schedule, CurriculumSchedule, Stage};
pub use trainer::{
    train_full, train_series, train_stage, EpochRecord, StageSummary, TrainConfig, TrainOutcome, TrainingHistory,
};
