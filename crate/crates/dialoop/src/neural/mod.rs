//! The sequence-model substrate: word-level vocabulary, a tiny causal
//! transformer with hand-rolled reverse-mode autodiff, AdamW with a warmup
//! schedule, and greedy/beam decoding.

pub mod checkpoint;
pub mod decode;
pub mod model;
pub mod optim;
pub mod tape;
pub mod train;
pub mod vocab;

pub use decode::{beam_hypotheses, beam_sample, greedy, DecodeOutcome, Hypothesis, StepModel};
pub use model::{GenerativeModel, InferState, ModelConfig, ModelError, Params};
pub use optim::{AdamW, LrSchedule, RL_LR, SL_MAX_LR};
pub use tape::{Gradients, Tape, TensorId};
pub use train::{batch_grads, sl_step, StepStats, TrainError, TrainingSequence};
pub use vocab::Vocab;
