use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::backward::accumulate_backward;
use super::forward::{loss, lstm_forward, Prediction};
use super::params::{init_params, LstmParams};
use super::{Activation, LstmError};
use crate::corpus::{LabeledTweet, SentimentLabel};
use crate::embeddings::{EmbeddedSequence, EmbeddingTable, DEFAULT_MAX_LEN};
use crate::parallel::{map_chunks, Execution};
use crate::rng::XorShift64Star;

/// Examples per gradient partial sum. Partial sums are reduced in order,
/// so results do not depend on how many threads run the chunks.
const GRAD_CHUNK: usize = 16;

/// PRNG stream used for mini-batch order (stream 0 is the raw seed used by
/// weight initialization).
const SHUFFLE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub max_len: usize,
    pub hidden_size: usize,
    pub activation: Activation,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            epochs: 50,
            batch_size: 256,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            seed: 0,
            max_len: DEFAULT_MAX_LEN,
            hidden_size: 100,
            activation: Activation::Relu,
            execution: Execution::Parallel,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LstmError> {
        let bad = |msg: &str| Err(LstmError::InvalidConfig(msg.to_string()));
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1");
        }
        if self.hidden_size < 1 {
            return bad("hidden size must be at least 1");
        }
        if self.max_len < 1 {
            return bad("max length must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("adam betas must lie in (0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("adam epsilon must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    /// One-line summary of the main knobs.
    pub fn echo(&self) -> String {
        format!(
            "epochs={} batch={} h={} lr={} max_len={} activation={} seed={}",
            self.epochs, self.batch_size, self.hidden_size, self.learning_rate, self.max_len, self.activation, self.seed
        )
    }
}

/// A tweet reduced to embedding-table rows (`None` for unknown tokens),
/// truncated to the model's maximum length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub rows: Vec<Option<usize>>,
    pub label: SentimentLabel,
}

impl Example {
    pub fn from_text(text: &str, label: SentimentLabel, table: &EmbeddingTable, max_len: usize) -> Self {
        Self {
            rows: text.split_whitespace().take(max_len).map(|t| table.index_of(t)).collect(),
            label,
        }
    }

    pub fn sequence(&self, table: &EmbeddingTable, max_len: usize) -> EmbeddedSequence {
        let dim = table.dim();
        let zero = vec![0.0; dim];
        let steps: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| r.map_or_else(|| zero.clone(), |i| table.row(i).to_vec()))
            .collect();
        EmbeddedSequence::from_steps(dim, &steps, max_len)
    }
}

/// Converts already-normalized tweets into training examples.
pub fn prepare_examples(tweets: &[LabeledTweet], table: &EmbeddingTable, max_len: usize) -> Vec<Example> {
    tweets
        .iter()
        .map(|t| Example::from_text(&t.text, t.label, table, max_len))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: LstmParams,
    pub history: Vec<EpochStats>,
}

struct Partial {
    grads: LstmParams,
    loss: f64,
    correct: usize,
    bad: Option<String>,
}

pub fn train(train_set: &[LabeledTweet], config: &TrainConfig, table: &EmbeddingTable) -> Result<TrainOutcome, LstmError> {
    let examples = prepare_examples(train_set, table, config.max_len);
    train_examples(&examples, table, config, None)
}

/// Mini-batch training. `init` resumes from existing parameters; otherwise
/// weights come from [`init_params`] with the config seed.
pub fn train_examples(
    examples: &[Example],
    table: &EmbeddingTable,
    config: &TrainConfig,
    init: Option<LstmParams>,
) -> Result<TrainOutcome, LstmError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(LstmError::EmptyTrainingSet);
    }
    let dim = table.dim();
    let mut params = match init {
        Some(p) => {
            if p.input_dim() != dim {
                return Err(LstmError::DimensionMismatch {
                    embeddings: dim,
                    model: p.input_dim(),
                });
            }
            if p.hidden() != config.hidden_size {
                return Err(LstmError::InvalidConfig(format!(
                    "hidden size {} does not match resumed model ({})",
                    config.hidden_size,
                    p.hidden()
                )));
            }
            p
        }
        None => init_params(dim, config.hidden_size, config.seed),
    };
    let adam = config.adam();
    let mut state = AdamState::new(&params);
    let mut rng = XorShift64Star::with_stream(config.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0usize;
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            let partials = map_chunks(config.execution, batch, GRAD_CHUNK, |chunk| {
                let mut acc = Partial {
                    grads: params.zeros_like(),
                    loss: 0.0,
                    correct: 0,
                    bad: None,
                };
                for &i in chunk {
                    let ex = &examples[i];
                    let seq = ex.sequence(table, config.max_len);
                    let (last, cache) = lstm_forward(&params, &seq, config.activation);
                    let l = loss(&cache.scores, ex.label);
                    if acc.bad.is_none() && !(l.is_finite() && last.iter().all(|v| v.is_finite())) {
                        acc.bad = Some(format!("example {i}: loss {l}"));
                    }
                    acc.loss += l;
                    if Prediction::from_scores(cache.scores).label == ex.label {
                        acc.correct += 1;
                    }
                    accumulate_backward(&cache, &params, ex.label, &mut acc.grads);
                }
                acc
            });

            let mut grads = params.zeros_like();
            for p in &partials {
                if let Some(what) = &p.bad {
                    return Err(LstmError::NonFinite {
                        epoch,
                        batch: batch_no,
                        what: what.clone(),
                    });
                }
                grads.add_assign(&p.grads);
                epoch_loss += p.loss;
                epoch_correct += p.correct;
            }
            grads.scale(1.0 / batch.len() as f64);
            if !grads.is_finite() {
                return Err(LstmError::NonFinite {
                    epoch,
                    batch: batch_no,
                    what: "gradient".into(),
                });
            }
            adam_step(&mut params, &grads, &mut state, &adam);
            if !params.is_finite() {
                return Err(LstmError::NonFinite {
                    epoch,
                    batch: batch_no,
                    what: "parameters".into(),
                });
            }
        }
        history.push(EpochStats {
            epoch,
            mean_loss: epoch_loss / examples.len() as f64,
            accuracy: epoch_correct as f64 / examples.len() as f64,
        });
    }
    Ok(TrainOutcome { params, history })
}

/// Predictions for already-normalized tweets, in input order.
pub fn predict_tweets(
    params: &LstmParams,
    tweets: &[LabeledTweet],
    table: &EmbeddingTable,
    max_len: usize,
    activation: Activation,
    exec: Execution,
) -> Vec<Prediction> {
    let examples = prepare_examples(tweets, table, max_len);
    map_chunks(exec, &examples, GRAD_CHUNK, |chunk| {
        chunk
            .iter()
            .map(|ex| super::forward::predict(params, &ex.sequence(table, max_len), activation))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_table() -> EmbeddingTable {
        EmbeddingTable::from_rows(
            2,
            [
                ("good", vec![1.0, 0.0]),
                ("bad", vec![0.0, 1.0]),
                ("meh", vec![-1.0, -1.0]),
            ],
        )
        .unwrap()
    }

    fn toy_set() -> Vec<LabeledTweet> {
        let mut v = Vec::new();
        for i in 0..12 {
            let (text, label) = match i % 3 {
                0 => ("good day", SentimentLabel::Positive),
                1 => ("bad day", SentimentLabel::Negative),
                _ => ("meh day", SentimentLabel::Neutral),
            };
            v.push(LabeledTweet {
                source: None,
                text: text.into(),
                label,
            });
        }
        v
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 4,
            hidden_size: 4,
            max_len: 4,
            seed: 17,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn defaults_follow_reported_setup() {
        let c = TrainConfig::default();
        assert_eq!((c.epochs, c.batch_size, c.hidden_size), (50, 256, 100));
        assert_eq!(c.activation, Activation::Relu);
        assert!(c.echo().starts_with("epochs=50 batch=256 h=100"));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            TrainConfig { epochs: 0, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { learning_rate: 0.0, ..TrainConfig::default() },
            TrainConfig { beta1: 1.0, ..TrainConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(LstmError::InvalidConfig(_))));
        }
        assert!(matches!(
            train(&[], &small_config(), &toy_table()),
            Err(LstmError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn history_has_one_entry_per_epoch() {
        let out = train(&toy_set(), &small_config(), &toy_table()).unwrap();
        assert_eq!(out.history.len(), 3);
        assert!(out.history.iter().all(|e| e.mean_loss >= 0.0));
    }

    #[test]
    fn same_seed_same_params() {
        let a = train(&toy_set(), &small_config(), &toy_table()).unwrap();
        let b = train(&toy_set(), &small_config(), &toy_table()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn execution_modes_agree() {
        let seq_cfg = TrainConfig {
            execution: Execution::Sequential,
            batch_size: 12,
            ..small_config()
        };
        let par_cfg = TrainConfig {
            execution: Execution::Parallel,
            ..seq_cfg.clone()
        };
        let mut set = toy_set();
        set.extend(toy_set());
        set.extend(toy_set());
        let a = train(&set, &seq_cfg, &toy_table()).unwrap();
        let b = train(&set, &par_cfg, &toy_table()).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn resume_checks_dimensions() {
        let p = init_params(3, 4, 1);
        let ex = prepare_examples(&toy_set(), &toy_table(), 4);
        assert!(matches!(
            train_examples(&ex, &toy_table(), &small_config(), Some(p)),
            Err(LstmError::DimensionMismatch { embeddings: 2, model: 3 })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = TrainConfig {
            learning_rate: f64::MAX,
            ..small_config()
        };
        let err = train(&toy_set(), &cfg, &toy_table()).unwrap_err();
        assert!(matches!(err, LstmError::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn example_rows_and_unknowns() {
        let ex = Example::from_text("good zzz bad meh good", SentimentLabel::Positive, &toy_table(), 3);
        assert_eq!(ex.rows, [Some(0), None, Some(1)]);
        let seq = ex.sequence(&toy_table(), 4);
        assert_eq!(seq.mask(), [true, true, true, false]);
    }
}
