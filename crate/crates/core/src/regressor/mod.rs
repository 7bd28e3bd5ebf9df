//! The distilled student regressor.

mod checkpoint;
mod descriptor;
mod gradcheck;
mod huber;
mod model;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use descriptor::{extract_descriptor, DescriptorConfig, N_STATS};
pub use gradcheck::{grad_check, GradCheckReport, REL_FLOOR};
pub use huber::{huber, huber_grad};
pub use model::{GateRegressor, ModelShape, ParamGroup, StepCache, Trace, BLOCK_NAMES, LATENT_DIM};
pub use optim::{AdamW, AdamWConfig};
pub use tensor::Tensor;
pub use train::{
    batch_loss, batch_loss_and_grad, error_stats, init_state, predict_all, train, train_epoch, EpochMetrics,
    ErrorStats, Example, TrainConfig, TrainState,
};
