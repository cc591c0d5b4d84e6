use crate::rng::XorShift64Star;

pub const OUTPUT_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Candidate = 3,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];
}

/// Weights of one gate. `w` is `d x h` and `u` is `h x h`, both row-major,
/// so the pre-activation is `x^T w + h_prev^T u + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(d: usize, h: usize) -> Self {
        Self {
            w: vec![0.0; d * h],
            u: vec![0.0; h * h],
            b: vec![0.0; h],
        }
    }
}

/// All trainable weights: four gates plus the `h x 3` dense head. The
/// same type holds gradients and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    input_dim: usize,
    hidden: usize,
    pub gates: [GateParams; 4],
    pub head_w: Vec<f64>,
    pub head_b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            gates: std::array::from_fn(|_| GateParams::zeros(input_dim, hidden)),
            head_w: vec![0.0; hidden * OUTPUT_SIZE],
            head_b: vec![0.0; OUTPUT_SIZE],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim, self.hidden)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn gate(&self, g: Gate) -> &GateParams {
        &self.gates[g as usize]
    }

    pub fn gate_mut(&mut self, g: Gate) -> &mut GateParams {
        &mut self.gates[g as usize]
    }

    /// Parameter arrays in serialization order:
    /// `W_i, U_i, b_i, W_f, U_f, b_f, W_o, U_o, b_o, W_c, U_c, b_c, W_y, b_y`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(14);
        for g in &self.gates {
            out.extend([g.w.as_slice(), g.u.as_slice(), g.b.as_slice()]);
        }
        out.push(&self.head_w);
        out.push(&self.head_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(14);
        for g in &mut self.gates {
            out.push(g.w.as_mut_slice());
            out.push(g.u.as_mut_slice());
            out.push(g.b.as_mut_slice());
        }
        out.push(&mut self.head_w);
        out.push(&mut self.head_b);
        out
    }

    pub fn num_params(&self) -> usize {
        Self::count_for(self.input_dim, self.hidden)
    }

    pub fn count_for(d: usize, h: usize) -> usize {
        4 * (d * h + h * h + h) + h * OUTPUT_SIZE + OUTPUT_SIZE
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.tensors().into_iter().flat_map(|t| t.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    pub fn add_assign(&mut self, other: &LstmParams) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for x in t {
                *x *= factor;
            }
        }
    }
}

/// Glorot-uniform weights, zero biases except a forget-gate bias of one.
pub fn init_params(d: usize, h: usize, seed: u64) -> LstmParams {
    assert!(d >= 1 && h >= 1, "dimensions must be positive");
    let mut rng = XorShift64Star::new(seed);
    let mut p = LstmParams::zeros(d, h);
    let limit_w = (6.0 / (d + h) as f64).sqrt();
    let limit_u = (6.0 / (2 * h) as f64).sqrt();
    for gate in &mut p.gates {
        gate.w.iter_mut().for_each(|x| *x = rng.symmetric(limit_w));
        gate.u.iter_mut().for_each(|x| *x = rng.symmetric(limit_u));
    }
    p.gate_mut(Gate::Forget).b.fill(1.0);
    let limit_y = (6.0 / (h + OUTPUT_SIZE) as f64).sqrt();
    p.head_w.iter_mut().for_each(|x| *x = rng.symmetric(limit_y));
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        assert_eq!(init_params(2, 3, 1), init_params(2, 3, 1));
        assert_ne!(init_params(2, 3, 1), init_params(2, 3, 2));
    }

    #[test]
    fn forget_bias_is_one() {
        let p = init_params(4, 5, 9);
        assert!(p.gate(Gate::Forget).b.iter().all(|b| *b == 1.0));
        for g in [Gate::Input, Gate::Output, Gate::Candidate] {
            assert!(p.gate(g).b.iter().all(|b| *b == 0.0));
        }
        assert!(p.head_b.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn glorot_bound() {
        let p = init_params(100, 100, 3);
        let bound = (6.0f64 / 200.0).sqrt();
        let max = p.gate(Gate::Input).w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max <= bound);
        assert!(max > 0.9 * bound);
    }

    #[test]
    fn tensor_layout() {
        let p = LstmParams::zeros(5, 7);
        let sizes: Vec<usize> = p.tensors().iter().map(|t| t.len()).collect();
        assert_eq!(sizes, [35, 49, 7, 35, 49, 7, 35, 49, 7, 35, 49, 7, 21, 3]);
        assert_eq!(sizes.iter().sum::<usize>(), p.num_params());
    }
}
