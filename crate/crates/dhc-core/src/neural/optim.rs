//! Adam optimizer, target-network blending, and batch error metrics.

use super::{GradientSet, Matrix, Mlp};
use crate::{Error, Result};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Adam state: first/second-moment accumulators congruent with a network's
/// parameters plus the step counter.
#[derive(Debug, Clone)]
pub struct OptimState {
    pub learning_rate: f64,
    m: GradientSet,
    v: GradientSet,
    step: u64,
}

impl OptimState {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        OptimState {
            learning_rate,
            m: GradientSet::zeros_like(net),
            v: GradientSet::zeros_like(net),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update. Zero gradients on a fresh state leave parameters
/// unchanged; non-finite gradients are rejected before any mutation.
pub fn optim_step(net: &mut Mlp, grads: &GradientSet, state: &mut OptimState) -> Result<()> {
    if !grads.congruent_with(net) {
        return Err(Error::Shape("gradient set does not match network".into()));
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient entries".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - BETA1.powi(t);
    let bias2 = 1.0 - BETA2.powi(t);
    let lr = state.learning_rate;

    let mut update = |params: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..params.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
            let mhat = m[i] / bias1;
            let vhat = v[i] / bias2;
            params[i] -= lr * mhat / (vhat.sqrt() + EPS);
        }
    };
    for k in 0..net.num_layers() {
        update(
            &mut net.weights_mut()[k],
            &grads.weights[k],
            &mut state.m.weights[k],
            &mut state.v.weights[k],
        );
        update(
            &mut net.biases_mut()[k],
            &grads.biases[k],
            &mut state.m.biases[k],
            &mut state.v.biases[k],
        );
    }
    Ok(())
}

/// Blends every target parameter toward the online network:
/// `p' <- tau * p + (1 - tau) * p'`.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    if !target.same_architecture(online) {
        return Err(Error::Shape("target/online architecture mismatch".into()));
    }
    for k in 0..target.num_layers() {
        for (t, o) in target.weights_mut()[k].iter_mut().zip(&online.weights()[k]) {
            *t = tau * o + (1.0 - tau) * *t;
        }
        for (t, o) in target.biases_mut()[k].iter_mut().zip(&online.biases()[k]) {
            *t = tau * o + (1.0 - tau) * *t;
        }
    }
    Ok(())
}

/// Mean squared and mean absolute error over all entries.
pub fn mse_mae(pred: &Matrix, truth: &Matrix) -> Result<(f64, f64)> {
    if pred.rows() != truth.rows() || pred.cols() != truth.cols() {
        return Err(Error::Shape(format!(
            "pred {}x{} vs truth {}x{}",
            pred.rows(),
            pred.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    if pred.rows() == 0 || pred.cols() == 0 {
        return Err(Error::EmptyBatch);
    }
    let n = (pred.rows() * pred.cols()) as f64;
    let mut se = 0.0;
    let mut ae = 0.0;
    for (p, t) in pred.data().iter().zip(truth.data().iter()) {
        let e = p - t;
        se += e * e;
        ae += e.abs();
    }
    Ok((se / n, ae / n))
}
