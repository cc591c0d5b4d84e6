use super::params::{Gate, LstmParams, OUTPUT_SIZE};
use super::{sigmoid, Activation};
use crate::corpus::SentimentLabel;
use crate::embeddings::EmbeddedSequence;

/// Probabilities are clamped to `[LOSS_CLAMP, 1 - LOSS_CLAMP]` before the log.
pub const LOSS_CLAMP: f64 = 1e-7;

/// Gate activations and pre-activations of a single timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRecord {
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub output: Vec<f64>,
    pub candidate: Vec<f64>,
    pub candidate_pre: Vec<f64>,
    /// φ(c_t)
    pub cell_act: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c: Vec<f64>,
    pub gates: GateRecord,
}

/// Everything the backward pass needs. `steps[t]` is `None` for masked steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub steps: Vec<Option<StepCache>>,
    pub activation: Activation,
    pub last_hidden: Vec<f64>,
    pub scores: [f64; OUTPUT_SIZE],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub scores: [f64; OUTPUT_SIZE],
    pub label: SentimentLabel,
}

fn argmax(scores: &[f64; OUTPUT_SIZE]) -> usize {
    let mut best = 0;
    for j in 1..OUTPUT_SIZE {
        if scores[j] > scores[best] {
            best = j;
        }
    }
    best
}

/// One LSTM step:
/// `i,f,o = σ(x W + h U + b)`, `g = φ(x W_c + h U_c + b_c)`,
/// `c = f ⊙ c_prev + i ⊙ g`, `h = o ⊙ φ(c)`.
pub fn cell_step(
    params: &LstmParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    activation: Activation,
) -> (Vec<f64>, Vec<f64>, GateRecord) {
    let h = params.hidden();
    debug_assert_eq!(x.len(), params.input_dim());
    debug_assert_eq!(h_prev.len(), h);

    let pre = |gate: Gate| -> Vec<f64> {
        let gp = params.gate(gate);
        let mut z = gp.b.clone();
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                let row = &gp.w[k * h..(k + 1) * h];
                z.iter_mut().zip(row).for_each(|(zj, w)| *zj += xk * w);
            }
        }
        for (k, &hk) in h_prev.iter().enumerate() {
            if hk != 0.0 {
                let row = &gp.u[k * h..(k + 1) * h];
                z.iter_mut().zip(row).for_each(|(zj, u)| *zj += hk * u);
            }
        }
        z
    };

    let input: Vec<f64> = pre(Gate::Input).into_iter().map(sigmoid).collect();
    let forget: Vec<f64> = pre(Gate::Forget).into_iter().map(sigmoid).collect();
    let output: Vec<f64> = pre(Gate::Output).into_iter().map(sigmoid).collect();
    let candidate_pre = pre(Gate::Candidate);
    let candidate: Vec<f64> = candidate_pre.iter().map(|&z| activation.apply(z)).collect();

    let c: Vec<f64> = (0..h).map(|j| forget[j] * c_prev[j] + input[j] * candidate[j]).collect();
    let cell_act: Vec<f64> = c.iter().map(|&v| activation.apply(v)).collect();
    let h_t: Vec<f64> = (0..h).map(|j| output[j] * cell_act[j]).collect();

    (
        h_t,
        c,
        GateRecord {
            input,
            forget,
            output,
            candidate,
            candidate_pre,
            cell_act,
        },
    )
}

fn head(params: &LstmParams, hidden: &[f64]) -> [f64; OUTPUT_SIZE] {
    let mut z = [0.0; OUTPUT_SIZE];
    z.copy_from_slice(&params.head_b);
    for (k, &hk) in hidden.iter().enumerate() {
        for (j, zj) in z.iter_mut().enumerate() {
            *zj += hk * params.head_w[k * OUTPUT_SIZE + j];
        }
    }
    z.map(sigmoid)
}

/// Runs the cell over the real (mask=true) steps starting from a zero
/// state; padded steps carry the state through untouched.
pub fn lstm_forward(params: &LstmParams, seq: &EmbeddedSequence, activation: Activation) -> (Vec<f64>, ForwardCache) {
    assert_eq!(seq.dim(), params.input_dim(), "sequence dimension does not match model");
    let hsize = params.hidden();
    let mut h = vec![0.0; hsize];
    let mut c = vec![0.0; hsize];
    let mut steps = Vec::with_capacity(seq.max_len());
    for (t, &real) in seq.mask().iter().enumerate() {
        if !real {
            steps.push(None);
            continue;
        }
        let x = seq.step(t);
        let (h_t, c_t, gates) = cell_step(params, x, &h, &c, activation);
        let h_prev = std::mem::replace(&mut h, h_t);
        let c_prev = std::mem::replace(&mut c, c_t);
        steps.push(Some(StepCache {
            x: x.to_vec(),
            h_prev,
            c_prev,
            c: c.clone(),
            gates,
        }));
    }
    let scores = head(params, &h);
    let cache = ForwardCache {
        steps,
        activation,
        last_hidden: h.clone(),
        scores,
    };
    (h, cache)
}

pub fn predict(params: &LstmParams, seq: &EmbeddedSequence, activation: Activation) -> Prediction {
    let (_, cache) = lstm_forward(params, seq, activation);
    Prediction::from_scores(cache.scores)
}

impl Prediction {
    pub fn from_scores(scores: [f64; OUTPUT_SIZE]) -> Self {
        let label = SentimentLabel::from_index(argmax(&scores)).expect("three classes");
        Self { scores, label }
    }
}

/// Categorical cross-entropy of sigmoid scores normalized to sum to one.
pub fn loss(scores: &[f64; OUTPUT_SIZE], target: SentimentLabel) -> f64 {
    let total: f64 = scores.iter().sum();
    // All three sigmoids can underflow to zero; score that as the worst case.
    let p = if total > 0.0 { scores[target.index()] / total } else { 0.0 };
    -p.clamp(LOSS_CLAMP, 1.0 - LOSS_CLAMP).ln()
}
