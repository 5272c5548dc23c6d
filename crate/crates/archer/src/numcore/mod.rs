//! Dense linear algebra and multilayer-perceptron machinery: forward and
//! reverse passes, Adam, initialization, and a flat binary snapshot format.
//!
//! Everything is `f64`. Weights are row-major with shape `(out_dim, in_dim)`,
//! so a layer computes `y = activation(W x + b)`.

mod adam;
mod finite_diff;
mod init;
mod snapshot;

pub use adam::{adam_step, AdamState};
pub use finite_diff::finite_diff_grad;
pub use init::{fanin_init, final_layer_init, uniform_vec};
pub use snapshot::{params_to_bytes, read_params, write_params};

use crate::error::{Error, Result};

/// Element-wise nonlinearity applied after a layer's affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative given the pre-activation `z` and the post-activation `y`.
    ///
    /// The ReLU subgradient at exactly 0 is taken as 0.
    #[inline]
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from explicit rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("Matrix::from_vec", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// One dense layer: `y = activation(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::shape("Layer bias", weight.rows(), bias.len()));
        }
        Ok(Layer {
            weight,
            bias,
            activation,
        })
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Full parameter set of one network: an ordered stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Layer>,
}

impl MlpParams {
    /// Validates that consecutive layer shapes chain.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::shape(
                    "layer chaining",
                    pair[0].out_dim(),
                    pair[1].in_dim(),
                ));
            }
        }
        Ok(MlpParams { layers })
    }

    #[inline]
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    #[inline]
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

/// Per-layer pre- and post-activation values captured during a forward pass,
/// sufficient to run the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

/// Gradient (or moment) storage shaped exactly like an [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub layers: Vec<LayerGradients>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl MlpGradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGradients {
            layers: params
                .layers()
                .iter()
                .map(|l| LayerGradients {
                    weight: Matrix::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &MlpGradients) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient layer count");
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

/// Result of a reverse pass: parameter gradients plus the gradient with
/// respect to the network input (needed to chain through a downstream net,
/// e.g. critic-to-actor).
#[derive(Debug, Clone)]
pub struct BackwardPass {
    pub grads: MlpGradients,
    pub input_grad: Vec<f64>,
}

/// Evaluates the network on one input vector.
///
/// Returns the output together with the cache the reverse pass consumes.
/// Deterministic: identical inputs give bit-identical outputs.
pub fn mlp_forward(params: &MlpParams, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if input.len() != params.input_dim() {
        return Err(Error::shape("mlp_forward input", params.input_dim(), input.len()));
    }
    let n_layers = params.layers().len();
    let mut pre = Vec::with_capacity(n_layers);
    let mut post = Vec::with_capacity(n_layers);
    let mut x: &[f64] = input;
    for layer in params.layers() {
        let out_dim = layer.out_dim();
        let in_dim = layer.in_dim();
        let w = layer.weight.data();
        let mut z = vec![0.0; out_dim];
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            let mut acc = layer.bias[o];
            for (wv, xv) in row.iter().zip(x) {
                acc = wv.mul_add(*xv, acc);
            }
            *zo = acc;
        }
        let y: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
        pre.push(z);
        post.push(y);
        x = post.last().unwrap();
    }
    let output = post.last().unwrap().clone();
    Ok((
        output,
        ForwardCache {
            input: input.to_vec(),
            pre,
            post,
        },
    ))
}

/// Reverse pass: exact gradients of `output · grad_output` with respect to
/// every weight and bias, plus the input gradient.
///
/// `cache` must come from a forward call on the same parameter shapes; a
/// stale or mismatched cache is rejected as a shape error.
pub fn mlp_backward(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_output: &[f64],
) -> Result<BackwardPass> {
    let layers = params.layers();
    if cache.pre.len() != layers.len() || cache.post.len() != layers.len() {
        return Err(Error::shape("mlp_backward cache depth", layers.len(), cache.pre.len()));
    }
    if cache.input.len() != params.input_dim() {
        return Err(Error::shape(
            "mlp_backward cache input",
            params.input_dim(),
            cache.input.len(),
        ));
    }
    for (l, layer) in layers.iter().enumerate() {
        if cache.pre[l].len() != layer.out_dim() {
            return Err(Error::shape("mlp_backward cache layer", layer.out_dim(), cache.pre[l].len()));
        }
    }
    if grad_output.len() != params.output_dim() {
        return Err(Error::shape(
            "mlp_backward grad_output",
            params.output_dim(),
            grad_output.len(),
        ));
    }

    let mut grads = MlpGradients::zeros_like(params);
    let mut delta = grad_output.to_vec();
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let in_dim = layer.in_dim();
        let x_in: &[f64] = if l == 0 { &cache.input } else { &cache.post[l - 1] };
        let mut d_input = vec![0.0; in_dim];
        let lw = layer.weight.data();
        let lg = &mut grads.layers[l];
        let gw = lg.weight.data_mut();
        for o in 0..layer.out_dim() {
            let dz = delta[o] * layer.activation.derivative(cache.pre[l][o], cache.post[l][o]);
            lg.bias[o] = dz;
            let row = o * in_dim;
            for i in 0..in_dim {
                gw[row + i] = dz * x_in[i];
                d_input[i] = lw[row + i].mul_add(dz, d_input[i]);
            }
        }
        delta = d_input;
    }
    Ok(BackwardPass {
        grads,
        input_grad: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_layer(w: Vec<Vec<f64>>, b: Vec<f64>, act: Activation) -> MlpParams {
        MlpParams::new(vec![Layer::new(Matrix::from_rows(&w), b, act).unwrap()]).unwrap()
    }

    pub(crate) fn random_net(rng: &mut ChaCha8Rng, dims: &[usize], out_act: Activation) -> MlpParams {
        let mut layers = Vec::new();
        for i in 0..dims.len() - 1 {
            let act = if i == dims.len() - 2 {
                out_act
            } else if rng.random_range(0..2) == 0 {
                Activation::Relu
            } else {
                Activation::Tanh
            };
            let weight = fanin_init(dims[i + 1], dims[i], rng);
            let bias = uniform_vec(dims[i + 1], 1.0 / (dims[i] as f64).sqrt(), rng);
            layers.push(Layer::new(weight, bias, act).unwrap());
        }
        MlpParams::new(layers).unwrap()
    }

    #[test]
    fn zero_net_tanh_outputs_zero() {
        let net = MlpParams::new(vec![
            Layer::new(Matrix::zeros(4, 3), vec![0.0; 4], Activation::Relu).unwrap(),
            Layer::new(Matrix::zeros(2, 4), vec![0.0; 2], Activation::Tanh).unwrap(),
        ])
        .unwrap();
        let (out, _) = mlp_forward(&net, &[0.7, -1.3, 2.2]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_relu_layer_forward() {
        // relu(2*3 + 1) = 7
        let net = single_layer(vec![vec![2.0]], vec![1.0], Activation::Relu);
        let (out, _) = mlp_forward(&net, &[3.0]).unwrap();
        assert_eq!(out, vec![7.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_dim() {
        let net = single_layer(vec![vec![2.0]], vec![1.0], Activation::Relu);
        assert!(matches!(
            mlp_forward(&net, &[1.0, 2.0]),
            Err(crate::error::Error::Shape { .. })
        ));
    }

    #[test]
    fn forward_matches_hand_stepped_two_layer_net() {
        // Oracle: straight-line evaluation of the two matrix products,
        // written independently of mlp_forward's loop structure.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = random_net(&mut rng, &[4, 16, 1], Activation::Linear);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();

        let l0 = &net.layers()[0];
        let mut h = vec![0.0; 16];
        for o in 0..16 {
            let mut acc = l0.bias[o];
            for i in 0..4 {
                acc += l0.weight.get(o, i) * x[i];
            }
            h[o] = l0.activation.apply(acc);
        }
        let l1 = &net.layers()[1];
        let mut expected = l1.bias[0];
        for i in 0..16 {
            expected += l1.weight.get(0, i) * h[i];
        }
        expected = l1.activation.apply(expected);

        let (out, _) = mlp_forward(&net, &x).unwrap();
        assert!((out[0] - expected).abs() < 1e-12, "{} vs {expected}", out[0]);
    }

    #[test]
    fn forward_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = random_net(&mut rng, &[3, 8, 2], Activation::Tanh);
        let x = [0.1, -0.4, 0.9];
        let (a, _) = mlp_forward(&net, &x).unwrap();
        let (b, _) = mlp_forward(&net, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tanh_output_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let net = random_net(&mut rng, &[4, 8, 3], Activation::Tanh);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-10.0..10.0)).collect();
            let (out, _) = mlp_forward(&net, &x).unwrap();
            for v in out {
                assert!(v > -1.0 && v < 1.0);
            }
        }
    }

    #[test]
    fn backward_zero_grad_output_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = random_net(&mut rng, &[3, 8, 2], Activation::Linear);
        let (_, cache) = mlp_forward(&net, &[0.2, 0.4, -0.6]).unwrap();
        let bp = mlp_backward(&net, &cache, &[0.0, 0.0]).unwrap();
        for lg in &bp.grads.layers {
            assert!(lg.weight.data().iter().all(|&v| v == 0.0));
            assert!(lg.bias.iter().all(|&v| v == 0.0));
        }
        assert!(bp.input_grad.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_single_linear_layer() {
        // d(wx+b)/dw = x = 3, d/db = 1
        let net = single_layer(vec![vec![2.0]], vec![0.0], Activation::Linear);
        let (_, cache) = mlp_forward(&net, &[3.0]).unwrap();
        let bp = mlp_backward(&net, &cache, &[1.0]).unwrap();
        assert_eq!(bp.grads.layers[0].weight.data(), &[3.0]);
        assert_eq!(bp.grads.layers[0].bias, vec![1.0]);
        assert_eq!(bp.input_grad, vec![2.0]);
    }

    #[test]
    fn backward_rejects_mismatched_cache() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = random_net(&mut rng, &[3, 8, 2], Activation::Linear);
        let other = random_net(&mut rng, &[3, 4, 2], Activation::Linear);
        let (_, cache) = mlp_forward(&other, &[0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            mlp_backward(&net, &cache, &[1.0, 0.0]),
            Err(crate::error::Error::Shape { .. })
        ));
    }

    #[test]
    fn backward_matches_finite_differences_on_deep_net() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let net = random_net(&mut rng, &[3, 8, 8, 1], Activation::Linear);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let max_rel = super::tests::grad_check_max_rel_err(&net, &x, 1e-5);
        assert!(max_rel <= 1e-4, "max rel err {max_rel}");
    }

    /// Flattens params, runs finite differences on each coordinate, and
    /// returns the worst relative disagreement with the reverse pass.
    pub(crate) fn grad_check_max_rel_err(net: &MlpParams, x: &[f64], h: f64) -> f64 {
        // Scalar probe: dot the network output with fixed coefficients so
        // multi-output nets reduce to one number.
        let coeffs: Vec<f64> = (0..net.output_dim())
            .map(|i| 1.0 + 0.25 * i as f64)
            .collect();

        let (_, cache) = mlp_forward(net, x).unwrap();
        let bp = mlp_backward(net, &cache, &coeffs).unwrap();

        let mut flat = Vec::new();
        for layer in net.layers() {
            flat.extend_from_slice(layer.weight.data());
            flat.extend_from_slice(&layer.bias);
        }
        let rebuild = |theta: &[f64]| -> MlpParams {
            let mut k = 0;
            let mut layers = Vec::new();
            for layer in net.layers() {
                let nw = layer.out_dim() * layer.in_dim();
                let weight = Matrix::from_vec(
                    layer.out_dim(),
                    layer.in_dim(),
                    theta[k..k + nw].to_vec(),
                )
                .unwrap();
                k += nw;
                let bias = theta[k..k + layer.out_dim()].to_vec();
                k += layer.out_dim();
                layers.push(Layer::new(weight, bias, layer.activation).unwrap());
            }
            MlpParams::new(layers).unwrap()
        };
        let probe = |theta: &[f64]| -> f64 {
            let p = rebuild(theta);
            let (out, _) = mlp_forward(&p, x).unwrap();
            out.iter().zip(&coeffs).map(|(o, c)| o * c).sum()
        };
        let numeric = finite_diff_grad(probe, &flat, h);

        let mut analytic = Vec::new();
        for lg in &bp.grads.layers {
            analytic.extend_from_slice(lg.weight.data());
            analytic.extend_from_slice(&lg.bias);
        }
        analytic
            .iter()
            .zip(&numeric)
            .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
            .fold(0.0, f64::max)
    }
}
