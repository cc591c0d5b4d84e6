//! Single-layer LSTM classifier trained from scratch.
//!
//! Gates use the logistic sigmoid; the candidate and cell-output transform
//! is a configurable [`Activation`] (rectifier by default). The dense head
//! maps the last real timestep's hidden state to three sigmoid scores, and
//! training minimizes categorical cross-entropy over those scores
//! normalized to sum to one. All arithmetic is `f64`.

mod adam;
mod backward;
mod checkpoint;
mod forward;
mod params;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use backward::backward;
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointError, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use forward::{cell_step, loss, lstm_forward, predict, ForwardCache, GateRecord, Prediction, StepCache, LOSS_CLAMP};
pub use params::{init_params, Gate, GateParams, LstmParams, OUTPUT_SIZE};
pub use train::{
    predict_tweets, prepare_examples, train, train_examples, EpochStats, Example, TrainConfig, TrainOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative at pre-activation `x`. The rectifier uses 0 at the kink.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Error)]
pub enum LstmError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("embedding dimension {embeddings} does not match model input dimension {model}")]
    DimensionMismatch { embeddings: usize, model: usize },
    #[error("non-finite value at epoch {epoch}, batch {batch}: {what}")]
    NonFinite { epoch: usize, batch: usize, what: String },
}
