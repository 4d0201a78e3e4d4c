//! Training loop, learning-rate schedule, evaluation metrics and reports.

pub mod metrics;
pub mod report;
pub mod schedule;
pub mod trainer;

pub use metrics::{macro_f1, ClassScores, ConfusionMatrix, Metrics};
pub use schedule::{ScheduleEvent, TrainState};
pub use trainer::{
    evaluate, predict, train, train_with_observer, EpochRecord, TrainConfig, TrainOutcome,
};
