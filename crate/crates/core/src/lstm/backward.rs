use super::forward::{ForwardCache, LOSS_CLAMP};
use super::params::{Gate, LstmParams, OUTPUT_SIZE};
use crate::corpus::SentimentLabel;

/// Gradient of the head logits for `loss(scores, target)`.
///
/// With `S = Σ s` and `p_t = s_t / S`, `∂L/∂s_j = 1/S - [j = t]/s_t`, and
/// `∂s_j/∂z_j = s_j (1 - s_j)`. When the clamp is active the loss is flat.
fn logit_grad(scores: &[f64; OUTPUT_SIZE], target: SentimentLabel) -> [f64; OUTPUT_SIZE] {
    let total: f64 = scores.iter().sum();
    let t = target.index();
    let p = scores[t] / total;
    if !(LOSS_CLAMP..=1.0 - LOSS_CLAMP).contains(&p) {
        return [0.0; OUTPUT_SIZE];
    }
    std::array::from_fn(|j| {
        let ds = 1.0 / total - if j == t { 1.0 / scores[t] } else { 0.0 };
        ds * scores[j] * (1.0 - scores[j])
    })
}

/// Backpropagation through time over the real steps recorded in `cache`.
pub fn backward(cache: &ForwardCache, params: &LstmParams, target: SentimentLabel) -> LstmParams {
    let mut grads = params.zeros_like();
    accumulate_backward(cache, params, target, &mut grads);
    grads
}

/// Adds the gradient of one example onto `grads`.
pub(crate) fn accumulate_backward(
    cache: &ForwardCache,
    params: &LstmParams,
    target: SentimentLabel,
    grads: &mut LstmParams,
) {
    let h = params.hidden();
    let dz = logit_grad(&cache.scores, target);
    grads.head_b.iter_mut().zip(&dz).for_each(|(b, d)| *b += d);
    let mut dh = vec![0.0; h];
    for k in 0..h {
        let hk = cache.last_hidden[k];
        for j in 0..OUTPUT_SIZE {
            grads.head_w[k * OUTPUT_SIZE + j] += hk * dz[j];
            dh[k] += params.head_w[k * OUTPUT_SIZE + j] * dz[j];
        }
    }

    let act = cache.activation;
    let mut dc = vec![0.0; h];
    let mut da = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
    for step in cache.steps.iter().rev().flatten() {
        let g = &step.gates;
        for j in 0..h {
            let d_out = dh[j] * g.cell_act[j];
            let dc_j = dc[j] + dh[j] * g.output[j] * act.derivative(step.c[j]);
            let d_in = dc_j * g.candidate[j];
            let d_cand = dc_j * g.input[j];
            let d_forget = dc_j * step.c_prev[j];
            da[Gate::Input as usize][j] = d_in * g.input[j] * (1.0 - g.input[j]);
            da[Gate::Forget as usize][j] = d_forget * g.forget[j] * (1.0 - g.forget[j]);
            da[Gate::Output as usize][j] = d_out * g.output[j] * (1.0 - g.output[j]);
            da[Gate::Candidate as usize][j] = d_cand * act.derivative(g.candidate_pre[j]);
            dc[j] = dc_j * g.forget[j];
        }

        dh.fill(0.0);
        for gate in Gate::ALL {
            let a = &da[gate as usize];
            let gp = params.gate(gate);
            let gg = grads.gate_mut(gate);
            for (k, &xk) in step.x.iter().enumerate() {
                if xk != 0.0 {
                    let row = &mut gg.w[k * h..(k + 1) * h];
                    row.iter_mut().zip(a).for_each(|(w, aj)| *w += xk * aj);
                }
            }
            for (k, &hk) in step.h_prev.iter().enumerate() {
                let urow = &gp.u[k * h..(k + 1) * h];
                dh[k] += urow.iter().zip(a).map(|(u, aj)| u * aj).sum::<f64>();
                if hk != 0.0 {
                    let row = &mut gg.u[k * h..(k + 1) * h];
                    row.iter_mut().zip(a).for_each(|(u, aj)| *u += hk * aj);
                }
            }
            gg.b.iter_mut().zip(a).for_each(|(b, aj)| *b += aj);
        }
    }
}
