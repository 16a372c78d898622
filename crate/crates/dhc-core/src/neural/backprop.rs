//! Backpropagation through an [`Mlp`].

use super::{ForwardCache, GradientSet, Matrix, Mlp};
use crate::{Error, Result};

/// Propagates `delta = dL/d(output activations)` back through the network.
/// Returns the gradient with respect to the batch inputs alongside the
/// parameter gradients.
fn backprop(net: &Mlp, cache: &ForwardCache, mut delta: Matrix) -> (Matrix, GradientSet) {
    let mut grads = GradientSet::zeros_like(net);
    for k in (0..net.num_layers()).rev() {
        let act = net.activation_of(k);
        let a_out = &cache.activations[k + 1];
        let a_in = &cache.activations[k];
        let in_dim = net.layer_sizes()[k];
        let out_dim = net.layer_sizes()[k + 1];
        let rows = a_in.rows();

        // delta <- dL/dz for this layer.
        for r in 0..rows {
            let ar = a_out.row(r);
            let dr = delta.row_mut(r);
            for (d, a) in dr.iter_mut().zip(ar.iter()) {
                *d *= act.deriv_from_output(*a);
            }
        }

        let gw = &mut grads.weights[k];
        let gb = &mut grads.biases[k];
        for r in 0..rows {
            let dz = delta.row(r);
            let x = a_in.row(r);
            for (o, &dzo) in dz.iter().enumerate() {
                if dzo != 0.0 {
                    let wrow = &mut gw[o * in_dim..(o + 1) * in_dim];
                    for (g, xi) in wrow.iter_mut().zip(x.iter()) {
                        *g += dzo * xi;
                    }
                    gb[o] += dzo;
                }
            }
        }

        let w = &net.weights()[k];
        let mut prev = Matrix::zeros(rows, in_dim);
        for r in 0..rows {
            let dz = delta.row(r);
            let pr = prev.row_mut(r);
            for o in 0..out_dim {
                let dzo = dz[o];
                if dzo != 0.0 {
                    let wrow = &w[o * in_dim..(o + 1) * in_dim];
                    for (p, wi) in pr.iter_mut().zip(wrow.iter()) {
                        *p += dzo * wi;
                    }
                }
            }
        }
        delta = prev;
    }
    (delta, grads)
}

/// Forward pass plus gradient of the mean squared error over the batch.
///
/// The loss is the mean over all rows and output dimensions of the squared
/// prediction error.
pub fn backward_mse(net: &Mlp, inputs: &Matrix, targets: &Matrix) -> Result<(f64, GradientSet)> {
    if inputs.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if inputs.rows() != targets.rows() {
        return Err(Error::Shape(format!(
            "{} input rows vs {} target rows",
            inputs.rows(),
            targets.rows()
        )));
    }
    if targets.cols() != net.output_dim() {
        return Err(Error::Shape(format!(
            "targets have {} columns, network outputs {}",
            targets.cols(),
            net.output_dim()
        )));
    }
    let cache = net.forward_cached(inputs)?;
    let outputs = cache.activations.last().unwrap();
    let n = (outputs.rows() * outputs.cols()) as f64;
    let mut loss = 0.0;
    let mut delta = Matrix::zeros(outputs.rows(), outputs.cols());
    for r in 0..outputs.rows() {
        let yr = outputs.row(r);
        let tr = targets.row(r);
        let dr = delta.row_mut(r);
        for ((d, y), t) in dr.iter_mut().zip(yr.iter()).zip(tr.iter()) {
            let e = y - t;
            loss += e * e;
            *d = 2.0 * e / n;
        }
    }
    loss /= n;
    let (_, grads) = backprop(net, &cache, delta);
    Ok((loss, grads))
}

/// Vector-Jacobian product: given `head_grad = dL/d(outputs)` returns the
/// gradients with respect to both the batch inputs and the parameters.
pub fn backward_scalar_head(
    net: &Mlp,
    inputs: &Matrix,
    head_grad: &Matrix,
) -> Result<(Matrix, GradientSet)> {
    if inputs.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if head_grad.rows() != inputs.rows() || head_grad.cols() != net.output_dim() {
        return Err(Error::Shape(format!(
            "head grad is {}x{}, expected {}x{}",
            head_grad.rows(),
            head_grad.cols(),
            inputs.rows(),
            net.output_dim()
        )));
    }
    let cache = net.forward_cached(inputs)?;
    Ok(backprop(net, &cache, head_grad.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Uniformly re-randomizes every parameter, biases included, so gradient
    /// checks exercise non-trivial bias paths.
    fn randomize(net: &mut Mlp, rng: &mut ChaCha8Rng) {
        for w in net.weights_mut() {
            for v in w.iter_mut() {
                *v = rng.gen_range(-0.9..0.9);
            }
        }
        for b in net.biases_mut() {
            for v in b.iter_mut() {
                *v = rng.gen_range(-0.5..0.5);
            }
        }
    }

    fn mse_of(net: &Mlp, inputs: &Matrix, targets: &Matrix) -> f64 {
        let out = net.forward(inputs).unwrap();
        let n = (out.rows() * out.cols()) as f64;
        out.data()
            .iter()
            .zip(targets.data().iter())
            .map(|(y, t)| (y - t) * (y - t))
            .sum::<f64>()
            / n
    }

    fn assert_rel_close(analytic: f64, numeric: f64, rel_tol: f64) {
        let scale = analytic.abs().max(numeric.abs()).max(1e-6);
        assert!(
            (analytic - numeric).abs() / scale <= rel_tol,
            "analytic={analytic} numeric={numeric}"
        );
    }

    /// Central finite differences over every parameter: the independent
    /// oracle for the analytic backward pass.
    fn check_param_gradients(net: &Mlp, inputs: &Matrix, targets: &Matrix, rel_tol: f64) {
        let (_, grads) = backward_mse(net, inputs, targets).unwrap();
        let h = 1e-5;
        let mut probe = net.clone();
        for k in 0..net.num_layers() {
            for p in 0..net.weights()[k].len() {
                let orig = net.weights()[k][p];
                probe.weights_mut()[k][p] = orig + h;
                let up = mse_of(&probe, inputs, targets);
                probe.weights_mut()[k][p] = orig - h;
                let down = mse_of(&probe, inputs, targets);
                probe.weights_mut()[k][p] = orig;
                assert_rel_close(grads.weights[k][p], (up - down) / (2.0 * h), rel_tol);
            }
            for p in 0..net.biases()[k].len() {
                let orig = net.biases()[k][p];
                probe.biases_mut()[k][p] = orig + h;
                let up = mse_of(&probe, inputs, targets);
                probe.biases_mut()[k][p] = orig - h;
                let down = mse_of(&probe, inputs, targets);
                probe.biases_mut()[k][p] = orig;
                assert_rel_close(grads.biases[k][p], (up - down) / (2.0 * h), rel_tol);
            }
        }
    }

    #[test]
    fn perfect_prediction_gives_zero_loss_and_grads() {
        let net = Mlp::new(&[2, 6, 2], Activation::Tanh, Activation::Identity, 3).unwrap();
        let inputs = Matrix::from_rows(&[vec![0.4, -0.2], vec![1.0, 0.7]]).unwrap();
        let targets = net.forward(&inputs).unwrap();
        let (loss, grads) = backward_mse(&net, &inputs, &targets).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads
            .weights
            .iter()
            .chain(grads.biases.iter())
            .all(|g| g.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn hand_computed_single_layer() {
        // w=1, b=0, input 1, target 0: loss = 1, dL/dw = 2, dL/db = 2.
        let net = Mlp::from_parts(
            vec![1, 1],
            vec![vec![1.0]],
            vec![vec![0.0]],
            Activation::Relu,
            Activation::Identity,
        )
        .unwrap();
        let inputs = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let targets = Matrix::from_rows(&[vec![0.0]]).unwrap();
        let (loss, grads) = backward_mse(&net, &inputs, &targets).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(grads.weights[0][0], 2.0);
        assert_eq!(grads.biases[0][0], 2.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let archs: [(&[usize], Activation, Activation); 4] = [
            (&[2, 5, 1], Activation::Tanh, Activation::Identity),
            (&[3, 8, 4, 2], Activation::Relu, Activation::Identity),
            (&[3, 6, 6, 6, 2], Activation::Tanh, Activation::Tanh),
            (&[1, 4, 1], Activation::Relu, Activation::Identity),
        ];
        for (sizes, hidden, output) in archs {
            let mut net = Mlp::new(sizes, hidden, output, rng.gen()).unwrap();
            randomize(&mut net, &mut rng);
            let rows = 3;
            let inputs = Matrix::from_flat(
                rows,
                sizes[0],
                (0..rows * sizes[0]).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            )
            .unwrap();
            let out_dim = *sizes.last().unwrap();
            let targets = Matrix::from_flat(
                rows,
                out_dim,
                (0..rows * out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            check_param_gradients(&net, &inputs, &targets, 1e-4);
        }
    }

    #[test]
    fn scalar_head_zero_grad_propagates_zeros() {
        let net = Mlp::new(&[3, 6, 2], Activation::Tanh, Activation::Tanh, 9).unwrap();
        let inputs = Matrix::from_rows(&[vec![0.2, 0.4, -0.3]]).unwrap();
        let head = Matrix::zeros(1, 2);
        let (input_grads, grads) = backward_scalar_head(&net, &inputs, &head).unwrap();
        assert!(input_grads.data().iter().all(|&v| v == 0.0));
        assert!(grads
            .weights
            .iter()
            .chain(grads.biases.iter())
            .all(|g| g.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn scalar_head_linear_map() {
        // Identity output, w = 3: input grad is 3 * head_grad.
        let net = Mlp::from_parts(
            vec![1, 1],
            vec![vec![3.0]],
            vec![vec![0.0]],
            Activation::Relu,
            Activation::Identity,
        )
        .unwrap();
        let inputs = Matrix::from_rows(&[vec![0.5], vec![-2.0]]).unwrap();
        let head = Matrix::from_rows(&[vec![1.0], vec![0.25]]).unwrap();
        let (input_grads, _) = backward_scalar_head(&net, &inputs, &head).unwrap();
        assert_eq!(input_grads.data(), &[3.0, 0.75]);
    }

    #[test]
    fn scalar_head_input_grads_match_finite_differences() {
        // The composite used by the policy update: gradient of the critic's
        // mean output with respect to the action slice of its input.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut critic = Mlp::new(&[5, 8, 8, 1], Activation::Relu, Activation::Identity, 4).unwrap();
        randomize(&mut critic, &mut rng);
        let rows = 4;
        let inputs = Matrix::from_flat(
            rows,
            5,
            (0..rows * 5).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let head = Matrix::from_flat(rows, 1, vec![1.0 / rows as f64; rows]).unwrap();
        let (input_grads, _) = backward_scalar_head(&critic, &inputs, &head).unwrap();

        let mean_q = |m: &Matrix| -> f64 {
            let out = critic.forward(m).unwrap();
            out.data().iter().sum::<f64>() / rows as f64
        };
        let h = 1e-5;
        for r in 0..rows {
            for c in 0..5 {
                let mut up = inputs.clone();
                up.set(r, c, inputs.get(r, c) + h);
                let mut down = inputs.clone();
                down.set(r, c, inputs.get(r, c) - h);
                let numeric = (mean_q(&up) - mean_q(&down)) / (2.0 * h);
                assert_rel_close(input_grads.get(r, c), numeric, 1e-4);
            }
        }
    }

    #[test]
    fn empty_batch_is_rejected() {
        let net = Mlp::new(&[2, 4, 1], Activation::Relu, Activation::Identity, 0).unwrap();
        let empty = Matrix::zeros(0, 2);
        let targets = Matrix::zeros(0, 1);
        assert!(matches!(
            backward_mse(&net, &empty, &targets),
            Err(Error::EmptyBatch)
        ));
    }
}
