//! Cross-entropy loss and its exact gradient by backpropagation through time.

use super::model::{EncoderGrads, Gradients, Instance, ModelBundle};
use super::TrainError;
use crate::encoders::{CnnParams, Encoder, RnnDirection};
use crate::numeric::{axpy, finite_diff_gradient, GradCheckReport, DEFAULT_EPSILON};

/// Probability floor used when the gold class has zero mass.
pub const LOSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    /// The gold probability was below [`LOSS_FLOOR`] and was clamped.
    pub saturated: bool,
}

/// `-log probs[gold]`, clamped at `-log(1e-12)`.
pub fn cross_entropy(probs: &[f64], gold: usize) -> Result<CrossEntropy, TrainError> {
    let p = *probs.get(gold).ok_or(TrainError::Label {
        gold,
        classes: probs.len(),
    })?;
    let saturated = p < LOSS_FLOOR;
    Ok(CrossEntropy {
        loss: -p.max(LOSS_FLOOR).ln(),
        saturated,
    })
}

/// Loss of a single instance under the current parameters.
pub fn instance_loss(bundle: &ModelBundle, inst: &Instance) -> Result<f64, TrainError> {
    let fwd = bundle.forward(inst)?;
    Ok(cross_entropy(&fwd.probs, inst.gold)?.loss)
}

/// Gradient of a tanh recurrence; `grad_states[t]` is dL/dh_t arriving from
/// pooling. With `reverse_time` the recurrence ran from the last token to the
/// first, so h_t depends on h_{t+1}.
fn backprop_direction(
    params: &RnnDirection,
    grads: &mut RnnDirection,
    inputs: &[Vec<f64>],
    states: &[Vec<f64>],
    grad_states: &[Vec<f64>],
    grad_inputs: &mut [Vec<f64>],
    reverse_time: bool,
) -> Result<(), TrainError> {
    let m = params.hidden();
    let zero = vec![0.0; m];
    let mut carry = vec![0.0; m];
    let mut da = vec![0.0; m];
    let t_len = inputs.len();
    for k in 0..t_len {
        // The step computed last receives its gradient first.
        let (t, prev) = if reverse_time {
            (k, if k + 1 < t_len { Some(k + 1) } else { None })
        } else {
            let t = t_len - 1 - k;
            (t, t.checked_sub(1))
        };
        let h = &states[t];
        let mut any = false;
        for i in 0..m {
            let g = grad_states[t][i] + carry[i];
            da[i] = g * (1.0 - h[i] * h[i]);
            any |= da[i] != 0.0;
        }
        carry.iter_mut().for_each(|c| *c = 0.0);
        if !any {
            continue;
        }
        let prev_state = prev.map_or(&zero, |p| &states[p]);
        grads.w.add_outer(1.0, &da, &inputs[t])?;
        grads.u.add_outer(1.0, &da, prev_state)?;
        axpy(1.0, &da, &mut grads.b);
        params.w.matvec_transpose_acc(&da, &mut grad_inputs[t])?;
        if prev.is_some() {
            params.u.matvec_transpose_acc(&da, &mut carry)?;
        }
    }
    Ok(())
}

fn backprop_cnn(
    params: &CnnParams,
    grads: &mut CnnParams,
    inputs: &[Vec<f64>],
    states: &[Vec<f64>],
    grad_states: &[Vec<f64>],
    grad_inputs: &mut [Vec<f64>],
) -> Result<(), TrainError> {
    let d = params.input_dim();
    let k = params.half_window() as isize;
    let mut dwin = vec![0.0; params.filter.cols()];
    for t in 0..inputs.len() {
        let c = &states[t];
        let da: Vec<f64> = grad_states[t].iter().zip(c).map(|(g, h)| g * (1.0 - h * h)).collect();
        if da.iter().all(|v| *v == 0.0) {
            continue;
        }
        grads.filter.add_outer(1.0, &da, &params.window_at(inputs, t))?;
        axpy(1.0, &da, &mut grads.bias);
        dwin.iter_mut().for_each(|v| *v = 0.0);
        params.filter.matvec_transpose_acc(&da, &mut dwin)?;
        for (slot, off) in (-k..=k).enumerate() {
            let s = t as isize + off;
            if s >= 0 && (s as usize) < inputs.len() {
                axpy(1.0, &dwin[slot * d..(slot + 1) * d], &mut grad_inputs[s as usize]);
            }
        }
    }
    Ok(())
}

/// Loss and exact gradient of every parameter for one instance.
///
/// The pooled vector's gradient reaches only the step that won each
/// dimension; from there it flows back through the recurrence (or window)
/// into the input vectors and finally into the embedding rows used.
pub fn bptt_gradients(bundle: &ModelBundle, inst: &Instance) -> Result<(f64, Gradients), TrainError> {
    let fwd = bundle.forward(inst)?;
    let ce = cross_entropy(&fwd.probs, inst.gold)?;
    let mut grads = Gradients::zeros_for(bundle);

    let mut dz = fwd.probs.clone();
    dz[inst.gold] -= 1.0;
    let enc = &fwd.trace.encoding;
    grads.classifier.weights.add_outer(1.0, &dz, &enc.pooled)?;
    grads.classifier.bias.copy_from_slice(&dz);
    let mut dm = vec![0.0; enc.hidden()];
    bundle.classifier.weights.matvec_transpose_acc(&dz, &mut dm)?;

    let t_len = fwd.inputs.len();
    let m = enc.hidden();
    let mut grad_states = vec![vec![0.0; m]; t_len];
    for (i, &t) in enc.pool_argmax.iter().enumerate() {
        grad_states[t][i] += dm[i];
    }

    let mut grad_inputs = vec![vec![0.0; bundle.input_dim()]; t_len];
    match (&bundle.encoder, &mut grads.encoder) {
        (Encoder::Rnn { params, .. }, EncoderGrads::Rnn(g)) => {
            let rnn = fwd.trace.rnn.as_ref().expect("rnn trace");
            backprop_direction(
                &params.forward,
                &mut g.forward,
                &fwd.inputs,
                &rnn.fw,
                &grad_states,
                &mut grad_inputs,
                false,
            )?;
            if let (Some(p), Some(gb), Some(bw)) = (&params.backward, &mut g.backward, &rnn.bw) {
                backprop_direction(p, gb, &fwd.inputs, bw, &grad_states, &mut grad_inputs, true)?;
            }
        }
        (Encoder::Cnn(p), EncoderGrads::Cnn(g)) => {
            backprop_cnn(p, g, &fwd.inputs, &enc.states, &grad_states, &mut grad_inputs)?;
        }
        _ => unreachable!("gradient container built from the same encoder"),
    }

    let dw = bundle.words.dim();
    for (t, gx) in grad_inputs.iter().enumerate() {
        let row = grads.words.entry(inst.words[t]).or_insert_with(|| vec![0.0; dw]);
        axpy(1.0, &gx[..dw], row);
        if let (Some(pe), Some(pos)) = (&bundle.positions, &inst.positions) {
            let dp = pe.dim();
            let (r1, r2) = pos[t];
            axpy(
                1.0,
                &gx[dw..dw + dp],
                grads.pos_e1.entry(r1).or_insert_with(|| vec![0.0; dp]),
            );
            axpy(
                1.0,
                &gx[dw + dp..dw + 2 * dp],
                grads.pos_e2.entry(r2).or_insert_with(|| vec![0.0; dp]),
            );
        }
    }

    if !grads.is_finite() {
        return Err(TrainError::NonFinite { step: t_len });
    }
    Ok((ce.loss, grads))
}

/// Compares [`bptt_gradients`] against central differences over every parameter.
pub fn check_gradients(
    bundle: &ModelBundle,
    inst: &Instance,
    epsilon: Option<f64>,
) -> Result<GradCheckReport, TrainError> {
    let (_, grads) = bptt_gradients(bundle, inst)?;
    let analytic = grads.dense_blocks(bundle);
    let theta = bundle.to_flat();
    let mut probe = bundle.clone();
    let numeric = finite_diff_gradient(
        |t| {
            probe.set_flat(t);
            instance_loss(&probe, inst).unwrap_or(f64::NAN)
        },
        &theta,
        epsilon.unwrap_or(DEFAULT_EPSILON),
    )?;
    let mut offset = 0;
    let mut blocks = Vec::with_capacity(analytic.len());
    for (name, a) in &analytic {
        blocks.push((*name, a.as_slice(), &numeric[offset..offset + a.len()]));
        offset += a.len();
    }
    Ok(GradCheckReport::compare(blocks)?)
}
