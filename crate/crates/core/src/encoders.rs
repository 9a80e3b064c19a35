//! Sentence encoders: the (bi)directional tanh RNN, the window convolution
//! baseline, pooling, and the softmax classifier head.

use rand::Rng;

use crate::embedding::fan_in_init;
use crate::numeric::{softmax, Matrix, NumericError};

/// One direction of the recurrent layer: `h_t = tanh(W e_t + U h_prev + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnDirection {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl RnnDirection {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        RnnDirection {
            w: Matrix::zeros(hidden, input_dim),
            u: Matrix::zeros(hidden, hidden),
            b: vec![0.0; hidden],
        }
    }

    /// Fan-in initialized weights, zero bias.
    pub fn random<R: Rng + ?Sized>(hidden: usize, input_dim: usize, rng: &mut R) -> Self {
        RnnDirection {
            w: fan_in_init(hidden, input_dim, rng),
            u: fan_in_init(hidden, hidden, rng),
            b: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    fn check(&self) -> Result<(), NumericError> {
        let m = self.b.len();
        if self.w.rows() != m || self.u.shape() != (m, m) {
            return Err(NumericError::Shape {
                op: "rnn_params",
                left: self.w.shape(),
                right: self.u.shape(),
            });
        }
        Ok(())
    }

    fn step(&self, x: &[f64], prev: &[f64]) -> Result<Vec<f64>, NumericError> {
        let mut a = self.b.clone();
        self.w.matvec_acc(x, &mut a)?;
        self.u.matvec_acc(prev, &mut a)?;
        for v in &mut a {
            *v = v.tanh();
        }
        Ok(a)
    }
}

/// Forward recurrence over `t = 1..T` from a zero initial state.
pub fn rnn_forward_pass(inputs: &[Vec<f64>], params: &RnnDirection) -> Result<Vec<Vec<f64>>, NumericError> {
    params.check()?;
    let mut prev = vec![0.0; params.hidden()];
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        let h = params.step(x, &prev)?;
        prev.clone_from(&h);
        out.push(h);
    }
    Ok(out)
}

/// Backward recurrence over `t = T..1` from a zero state after the last step;
/// the output stays indexed by `t`.
pub fn rnn_backward_pass(inputs: &[Vec<f64>], params: &RnnDirection) -> Result<Vec<Vec<f64>>, NumericError> {
    params.check()?;
    let mut next = vec![0.0; params.hidden()];
    let mut out = vec![Vec::new(); inputs.len()];
    for t in (0..inputs.len()).rev() {
        let h = params.step(&inputs[t], &next)?;
        next.clone_from(&h);
        out[t] = h;
    }
    Ok(out)
}

/// `h_t = h_t^fw + h_t^bw`.
pub fn bidir_combine(fw: &[Vec<f64>], bw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NumericError> {
    if fw.len() != bw.len() {
        return Err(NumericError::Shape {
            op: "bidir_combine",
            left: (fw.len(), fw.first().map_or(0, Vec::len)),
            right: (bw.len(), bw.first().map_or(0, Vec::len)),
        });
    }
    fw.iter()
        .zip(bw)
        .map(|(f, b)| {
            if f.len() != b.len() {
                return Err(NumericError::Shape {
                    op: "bidir_combine",
                    left: (1, f.len()),
                    right: (1, b.len()),
                });
            }
            Ok(f.iter().zip(b).map(|(x, y)| x + y).collect())
        })
        .collect()
}

/// Per-step features plus the pooled sentence vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEncoding {
    pub states: Vec<Vec<f64>>,
    pub pooled: Vec<f64>,
    /// 0-based step that supplied each pooled dimension.
    pub pool_argmax: Vec<usize>,
}

impl SentenceEncoding {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn hidden(&self) -> usize {
        self.pooled.len()
    }
}

/// How per-step features become the sentence vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// Dimension-wise maximum over steps.
    Max,
    /// The final step's state (accumulation baseline).
    Last,
}

/// `m_i = max_t h_t[i]`; ties go to the earliest step.
pub fn max_pool(states: Vec<Vec<f64>>) -> Result<SentenceEncoding, NumericError> {
    let first = states.first().ok_or(NumericError::Empty("max_pool"))?;
    let mut pooled = first.clone();
    let mut argmax = vec![0; pooled.len()];
    for (t, h) in states.iter().enumerate().skip(1) {
        if h.len() != pooled.len() {
            return Err(NumericError::Shape {
                op: "max_pool",
                left: (1, pooled.len()),
                right: (1, h.len()),
            });
        }
        for (i, &v) in h.iter().enumerate() {
            if v > pooled[i] {
                pooled[i] = v;
                argmax[i] = t;
            }
        }
    }
    Ok(SentenceEncoding {
        states,
        pooled,
        pool_argmax: argmax,
    })
}

pub fn last_step(states: Vec<Vec<f64>>) -> Result<SentenceEncoding, NumericError> {
    let last = states.last().ok_or(NumericError::Empty("last_step"))?;
    let pooled = last.clone();
    let argmax = vec![states.len() - 1; pooled.len()];
    Ok(SentenceEncoding {
        states,
        pooled,
        pool_argmax: argmax,
    })
}

pub fn pool(states: Vec<Vec<f64>>, pooling: Pooling) -> Result<SentenceEncoding, NumericError> {
    match pooling {
        Pooling::Max => max_pool(states),
        Pooling::Last => last_step(states),
    }
}

/// Forward RNN plus an optional backward RNN of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnParams {
    pub forward: RnnDirection,
    pub backward: Option<RnnDirection>,
}

impl RnnParams {
    pub fn random<R: Rng + ?Sized>(hidden: usize, input_dim: usize, bidirectional: bool, rng: &mut R) -> Self {
        let forward = RnnDirection::random(hidden, input_dim, rng);
        let backward = bidirectional.then(|| RnnDirection::random(hidden, input_dim, rng));
        RnnParams { forward, backward }
    }

    pub fn zeros_like(&self) -> Self {
        let (m, d) = (self.forward.hidden(), self.forward.input_dim());
        RnnParams {
            forward: RnnDirection::zeros(m, d),
            backward: self.backward.as_ref().map(|_| RnnDirection::zeros(m, d)),
        }
    }

    pub fn is_bidirectional(&self) -> bool {
        self.backward.is_some()
    }

    /// Combined per-step states (`fw`, or `fw + bw`).
    pub fn run(&self, inputs: &[Vec<f64>]) -> Result<RnnTrace, NumericError> {
        let fw = rnn_forward_pass(inputs, &self.forward)?;
        let bw = match &self.backward {
            Some(p) => {
                if p.w.shape() != self.forward.w.shape() {
                    return Err(NumericError::Shape {
                        op: "bidirectional",
                        left: self.forward.w.shape(),
                        right: p.w.shape(),
                    });
                }
                Some(rnn_backward_pass(inputs, p)?)
            }
            None => None,
        };
        let combined = match &bw {
            Some(b) => bidir_combine(&fw, b)?,
            None => fw.clone(),
        };
        Ok(RnnTrace { fw, bw, combined })
    }
}

/// Intermediate RNN states kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnTrace {
    pub fw: Vec<Vec<f64>>,
    pub bw: Option<Vec<Vec<f64>>>,
    pub combined: Vec<Vec<f64>>,
}

/// Window convolution: `c_t = tanh(F [e_{t-k}; …; e_{t+k}] + b)`, `k = (w-1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    pub window: usize,
    pub filter: Matrix,
    pub bias: Vec<f64>,
}

impl CnnParams {
    pub fn zeros(hidden: usize, input_dim: usize, window: usize) -> Self {
        CnnParams {
            window,
            filter: Matrix::zeros(hidden, window * input_dim),
            bias: vec![0.0; hidden],
        }
    }

    pub fn random<R: Rng + ?Sized>(hidden: usize, input_dim: usize, window: usize, rng: &mut R) -> Self {
        CnnParams {
            window,
            filter: fan_in_init(hidden, window * input_dim, rng),
            bias: vec![0.0; hidden],
        }
    }

    pub fn zeros_like(&self) -> Self {
        CnnParams {
            window: self.window,
            filter: Matrix::zeros(self.filter.rows(), self.filter.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }

    pub fn hidden(&self) -> usize {
        self.bias.len()
    }

    pub fn input_dim(&self) -> usize {
        self.filter.cols() / self.window.max(1)
    }

    pub fn half_window(&self) -> usize {
        (self.window - 1) / 2
    }

    /// Concatenated, zero-padded window centred at `t`.
    pub fn window_at(&self, inputs: &[Vec<f64>], t: usize) -> Vec<f64> {
        let d = self.input_dim();
        let k = self.half_window() as isize;
        let mut out = Vec::with_capacity(self.window * d);
        for off in -k..=k {
            let s = t as isize + off;
            if s < 0 || s >= inputs.len() as isize {
                out.extend(std::iter::repeat_n(0.0, d));
            } else {
                out.extend_from_slice(&inputs[s as usize]);
            }
        }
        out
    }

    /// Per-position convolution features before pooling.
    pub fn states(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NumericError> {
        if self.window.is_multiple_of(2)
            || self.filter.rows() != self.bias.len()
            || !self.filter.cols().is_multiple_of(self.window)
        {
            return Err(NumericError::Shape {
                op: "cnn_params",
                left: self.filter.shape(),
                right: (self.bias.len(), self.window),
            });
        }
        let d = self.input_dim();
        (0..inputs.len())
            .map(|t| {
                if inputs[t].len() != d {
                    return Err(NumericError::Shape {
                        op: "cnn_encode",
                        left: self.filter.shape(),
                        right: (inputs[t].len(), 1),
                    });
                }
                let mut a = self.bias.clone();
                self.filter.matvec_acc(&self.window_at(inputs, t), &mut a)?;
                Ok(a.into_iter().map(f64::tanh).collect())
            })
            .collect()
    }
}

pub fn cnn_encode(inputs: &[Vec<f64>], params: &CnnParams) -> Result<SentenceEncoding, NumericError> {
    max_pool(params.states(inputs)?)
}

/// Softmax output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl ClassifierParams {
    pub fn zeros(classes: usize, hidden: usize) -> Self {
        ClassifierParams {
            weights: Matrix::zeros(classes, hidden),
            bias: vec![0.0; classes],
        }
    }

    pub fn random<R: Rng + ?Sized>(classes: usize, hidden: usize, rng: &mut R) -> Self {
        ClassifierParams {
            weights: fan_in_init(classes, hidden, rng),
            bias: vec![0.0; classes],
        }
    }

    pub fn zeros_like(&self) -> Self {
        ClassifierParams::zeros(self.weights.rows(), self.weights.cols())
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }
}

/// `softmax(W_o m + b_o)`.
pub fn classify(pooled: &[f64], params: &ClassifierParams) -> Result<Vec<f64>, NumericError> {
    if params.weights.rows() != params.bias.len() {
        return Err(NumericError::Shape {
            op: "classify",
            left: params.weights.shape(),
            right: (params.bias.len(), 1),
        });
    }
    let mut z = params.bias.clone();
    params.weights.matvec_acc(pooled, &mut z)?;
    softmax(&z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Rnn,
    Cnn,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Rnn => "rnn",
            EncoderKind::Cnn => "cnn",
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rnn" => Ok(EncoderKind::Rnn),
            "cnn" => Ok(EncoderKind::Cnn),
            _ => Err(format!("unknown encoder `{s}` (expected rnn or cnn)")),
        }
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Rnn { params: RnnParams, pooling: Pooling },
    Cnn(CnnParams),
}

/// Everything the backward pass needs from an encoder run.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTrace {
    pub encoding: SentenceEncoding,
    /// Present for the RNN encoder only.
    pub rnn: Option<RnnTrace>,
}

impl Encoder {
    pub fn kind(&self) -> EncoderKind {
        match self {
            Encoder::Rnn { .. } => EncoderKind::Rnn,
            Encoder::Cnn(_) => EncoderKind::Cnn,
        }
    }

    pub fn hidden(&self) -> usize {
        match self {
            Encoder::Rnn { params, .. } => params.forward.hidden(),
            Encoder::Cnn(p) => p.hidden(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Encoder::Rnn { params, .. } => params.forward.input_dim(),
            Encoder::Cnn(p) => p.input_dim(),
        }
    }

    pub fn trace(&self, inputs: &[Vec<f64>]) -> Result<EncoderTrace, NumericError> {
        if inputs.is_empty() {
            return Err(NumericError::Empty("encode"));
        }
        match self {
            Encoder::Rnn { params, pooling } => {
                let rnn = params.run(inputs)?;
                let encoding = pool(rnn.combined.clone(), *pooling)?;
                Ok(EncoderTrace {
                    encoding,
                    rnn: Some(rnn),
                })
            }
            Encoder::Cnn(p) => Ok(EncoderTrace {
                encoding: cnn_encode(inputs, p)?,
                rnn: None,
            }),
        }
    }

    pub fn encode(&self, inputs: &[Vec<f64>]) -> Result<SentenceEncoding, NumericError> {
        Ok(self.trace(inputs)?.encoding)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_rnn() -> RnnDirection {
        RnnDirection {
            w: Matrix::from_rows(&[&[1.0]]),
            u: Matrix::from_rows(&[&[0.5]]),
            b: vec![0.0],
        }
    }

    // mpmath, 30 digits: tanh(1) and tanh(-1 + 0.5·tanh(1)).
    const H1: f64 = 0.761_594_155_955_764_9;
    const H2: f64 = -0.550_572_812_917_985_3;

    #[test]
    fn forward_scalar_recurrence() {
        let h = rnn_forward_pass(&[vec![1.0], vec![-1.0]], &scalar_rnn()).unwrap();
        assert!((h[0][0] - H1).abs() < 1e-15);
        assert!((h[1][0] - H2).abs() < 1e-15);
    }

    #[test]
    fn backward_scalar_recurrence() {
        // Reverse-time order: step 2 sees h=0, step 1 sees h_2.
        let h = rnn_backward_pass(&[vec![-1.0], vec![1.0]], &scalar_rnn()).unwrap();
        assert!((h[1][0] - H1).abs() < 1e-15);
        assert!((h[0][0] - H2).abs() < 1e-15);
    }

    #[test]
    fn zero_params_give_zero_states() {
        let xs = vec![vec![0.3, -2.0], vec![1.0, 1.0], vec![5.0, 0.0]];
        let p = RnnDirection::zeros(4, 2);
        for h in rnn_forward_pass(&xs, &p)
            .unwrap()
            .iter()
            .chain(&rnn_backward_pass(&xs, &p).unwrap())
        {
            assert!(h.iter().all(|v| *v == 0.0));
        }
        let c = cnn_encode(&xs, &CnnParams::zeros(3, 2, 3)).unwrap();
        assert!(c.pooled.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn severed_recurrence_is_per_token() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut p = RnnDirection::random(3, 2, &mut rng);
        p.u = Matrix::zeros(3, 3);
        let xs = vec![vec![0.1, 0.2], vec![-0.5, 0.9], vec![1.0, -1.0]];
        let a = rnn_forward_pass(&xs, &p).unwrap();
        let rev: Vec<_> = xs.iter().rev().cloned().collect();
        let b = rnn_forward_pass(&rev, &p).unwrap();
        for t in 0..3 {
            assert_eq!(a[t], b[2 - t]);
        }
    }

    #[test]
    fn combine_examples() {
        let fw = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        let zero = vec![vec![0.0, 0.0]; 2];
        assert_eq!(bidir_combine(&fw, &zero).unwrap(), fw);
        let neg: Vec<Vec<f64>> = fw.iter().map(|h| h.iter().map(|v| -v).collect()).collect();
        assert!(bidir_combine(&fw, &neg).unwrap().iter().flatten().all(|v| *v == 0.0));
        assert!(bidir_combine(&fw, &zero[..1]).is_err());
        let bw = vec![vec![0.25, 0.5], vec![1.0, -1.0]];
        assert_eq!(
            bidir_combine(&fw, &bw).unwrap(),
            vec![vec![1.25, 2.5], vec![-2.0, -0.5]]
        );
    }

    #[test]
    fn max_pool_examples() {
        let e = max_pool(vec![vec![0.2, -0.1]]).unwrap();
        assert_eq!(e.pooled, vec![0.2, -0.1]);
        assert_eq!(e.pool_argmax, vec![0, 0]);
        let e = max_pool(vec![vec![1.0, -2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(e.pooled, vec![1.0, 3.0]);
        assert_eq!(e.pool_argmax, vec![0, 1]);
        let swapped = max_pool(vec![vec![0.0, 3.0], vec![1.0, -2.0]]).unwrap();
        assert_eq!(swapped.pooled, e.pooled);
        let tie = max_pool(vec![vec![0.5], vec![0.5]]).unwrap();
        assert_eq!(tie.pool_argmax, vec![0]);
        assert_eq!(max_pool(vec![]), Err(NumericError::Empty("max_pool")));
    }

    #[test]
    fn classify_examples() {
        let p = ClassifierParams::zeros(4, 3);
        let probs = classify(&[0.3, -0.2, 0.9], &p).unwrap();
        assert!(probs.iter().all(|v| (v - 0.25).abs() < 1e-15));
        let mut sat = ClassifierParams::zeros(3, 2);
        sat.bias[0] = 800.0;
        let probs = classify(&[1.0, 1.0], &sat).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ClassifierParams::random(3, 2, &mut rng);
        let m = [0.4, -0.7];
        let z: Vec<f64> = (0..3)
            .map(|r| p.weights.get(r, 0) * m[0] + p.weights.get(r, 1) * m[1] + p.bias[r])
            .collect();
        let oracle = softmax(&z).unwrap();
        assert_eq!(classify(&m, &p).unwrap(), oracle);
        assert!(classify(&[1.0], &p).is_err());
    }

    #[test]
    fn cnn_window_one_is_per_token() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = CnnParams::random(3, 2, 1, &mut rng);
        let xs = vec![vec![0.1, 0.2], vec![-0.5, 0.9]];
        let states = p.states(&xs).unwrap();
        for (x, c) in xs.iter().zip(&states) {
            let mut a = p.bias.clone();
            p.filter.matvec_acc(x, &mut a).unwrap();
            let expected: Vec<f64> = a.iter().map(|v| v.tanh()).collect();
            assert_eq!(*c, expected);
        }
    }

    #[test]
    fn cnn_single_token_uses_zero_pads() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = CnnParams::random(2, 2, 3, &mut rng);
        let x = vec![vec![0.7, -0.3]];
        let concat = [0.0, 0.0, 0.7, -0.3, 0.0, 0.0];
        let mut a = p.bias.clone();
        for (i, ai) in a.iter_mut().enumerate() {
            for (j, c) in concat.iter().enumerate() {
                *ai += p.filter.get(i, j) * c;
            }
        }
        let expected: Vec<f64> = a.iter().map(|v| v.tanh()).collect();
        assert_eq!(cnn_encode(&x, &p).unwrap().pooled, expected);
    }

    #[test]
    fn even_window_rejected() {
        let p = CnnParams::zeros(2, 2, 2);
        assert!(p.states(&[vec![0.0, 0.0]]).is_err());
    }

    fn random_inputs(rng: &mut ChaCha8Rng, t: usize, d: usize) -> Vec<Vec<f64>> {
        (0..t)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn rnn_is_order_aware_and_non_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = RnnParams::random(4, 3, true, &mut rng);
        let enc = Encoder::Rnn {
            params: params.clone(),
            pooling: Pooling::Max,
        };
        let xs = random_inputs(&mut rng, 5, 3);
        let rev: Vec<_> = xs.iter().rev().cloned().collect();
        assert_ne!(enc.encode(&xs).unwrap().pooled, enc.encode(&rev).unwrap().pooled);

        let fw = rnn_forward_pass(&xs, &params.forward).unwrap();
        let mut edited = xs.clone();
        edited[0][0] += 0.5;
        let fw2 = rnn_forward_pass(&edited, &params.forward).unwrap();
        assert_ne!(fw[4], fw2[4]);
    }

    proptest! {
        #[test]
        fn backward_pass_is_time_reversed_forward(seed in any::<u64>(), t in 1usize..7, m in 1usize..5, d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = RnnDirection::random(m, d, &mut rng);
            let xs = random_inputs(&mut rng, t, d);
            let rev: Vec<_> = xs.iter().rev().cloned().collect();
            let mut expected = rnn_forward_pass(&rev, &p).unwrap();
            expected.reverse();
            prop_assert_eq!(rnn_backward_pass(&xs, &p).unwrap(), expected);
        }
    }
}
