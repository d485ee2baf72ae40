use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ops::{col2im3, im2col3, matmul, Scalar};
use super::NetError;
use crate::encode::PLANES;

pub const POLICY_OUTPUTS: usize = 3;
const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Side of the square input grid.
    pub grid_size: usize,
    pub residual_blocks: usize,
    pub channels: usize,
    /// Width of the value head's hidden dense layer.
    pub value_hidden: usize,
    pub weight_decay: f64,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            grid_size: crate::encode::DEFAULT_GRID_SIZE,
            residual_blocks: 4,
            channels: 32,
            value_hidden: 64,
            weight_decay: 4e-5,
            learning_rate: 1e-3,
            momentum: 0.9,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |msg: &str| Err(NetError::Config(msg.to_string()));
        if self.grid_size == 0 {
            return bad("grid_size must be positive");
        }
        if self.residual_blocks == 0 || self.channels == 0 || self.value_hidden == 0 {
            return bad("residual_blocks, channels and value_hidden must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be non-negative");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn area(&self) -> usize {
        self.grid_size * self.grid_size
    }

    pub fn input_len(&self) -> usize {
        PLANES * self.area()
    }
}

/// A named parameter tensor. Batch-norm scales and shifts are exempt from
/// weight decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub name: String,
    pub data: Vec<T>,
    pub decay: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RunningStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
struct ConvBn {
    weight: usize,
    gamma: usize,
    beta: usize,
    stats: usize,
    cin: usize,
    cout: usize,
    kernel: usize,
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    weight: usize,
    bias: usize,
    nin: usize,
    nout: usize,
}

/// Network outputs for a batch: logits and softmax policy (`batch x 3`)
/// and the linear value (`batch`).
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs<T> {
    pub logits: Vec<T>,
    pub policy: Vec<T>,
    pub value: Vec<T>,
}

/// The policy-value network: a 3x3 convolutional stem, residual blocks of
/// `conv-BN-ReLU-conv-BN-add-ReLU`, a policy head (1x1 conv to 2 channels,
/// BN, ReLU, dense to 3 logits, softmax) and a value head (1x1 conv to 1
/// channel, BN, ReLU, dense, ReLU, dense to a linear scalar).
#[derive(Debug, Clone)]
pub struct Network<T: Scalar> {
    config: NetworkConfig,
    params: Vec<Param<T>>,
    running: Vec<RunningStats<T>>,
    stem: ConvBn,
    blocks: Vec<[ConvBn; 2]>,
    policy_conv: ConvBn,
    policy_fc: Dense,
    value_conv: ConvBn,
    value_fc1: Dense,
    value_fc2: Dense,
}

struct Builder<T> {
    params: Vec<Param<T>>,
    running: Vec<RunningStats<T>>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Builder<T> {
    fn he(&mut self, name: String, len: usize, fan_in: usize) -> usize {
        let std = (2.0 / fan_in as f64).sqrt();
        let data = (0..len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                T::from_f64(z * std)
            })
            .collect();
        self.push(name, data, true)
    }

    fn push(&mut self, name: String, data: Vec<T>, decay: bool) -> usize {
        self.params.push(Param { name, data, decay });
        self.params.len() - 1
    }

    fn conv_bn(&mut self, name: &str, cin: usize, cout: usize, kernel: usize) -> ConvBn {
        let fan_in = cin * kernel * kernel;
        let weight = self.he(format!("{name}.conv"), cout * fan_in, fan_in);
        let gamma = self.push(format!("{name}.bn.gamma"), vec![T::one(); cout], false);
        let beta = self.push(format!("{name}.bn.beta"), vec![T::zero(); cout], false);
        self.running.push(RunningStats {
            mean: vec![T::zero(); cout],
            var: vec![T::one(); cout],
        });
        ConvBn {
            weight,
            gamma,
            beta,
            stats: self.running.len() - 1,
            cin,
            cout,
            kernel,
        }
    }

    fn dense(&mut self, name: &str, nin: usize, nout: usize) -> Dense {
        let weight = self.he(format!("{name}.weight"), nin * nout, nin);
        let bias = self.push(format!("{name}.bias"), vec![T::zero(); nout], true);
        Dense {
            weight,
            bias,
            nin,
            nout,
        }
    }
}

/// Saved activations of one conv + batch-norm application.
struct ConvBnCache<T> {
    input: Vec<T>,
    xhat: Vec<T>,
    inv_std: Vec<T>,
}

struct Tape<T> {
    batch: usize,
    stem: ConvBnCache<T>,
    stem_out: Vec<T>,
    blocks: Vec<BlockCache<T>>,
    policy: ConvBnCache<T>,
    policy_act: Vec<T>,
    value: ConvBnCache<T>,
    value_act: Vec<T>,
    value_hidden: Vec<T>,
}

struct BlockCache<T> {
    first: ConvBnCache<T>,
    mid: Vec<T>,
    second: ConvBnCache<T>,
    out: Vec<T>,
}

fn relu_in_place<T: Scalar>(x: &mut [T]) {
    for v in x {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zeroes `grad` where the ReLU output `act` is not positive.
fn relu_mask<T: Scalar>(grad: &mut [T], act: &[T]) {
    for (g, a) in grad.iter_mut().zip(act) {
        if *a <= T::zero() {
            *g = T::zero();
        }
    }
}

fn add_into<T: Scalar>(dst: &mut [T], src: &[T]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = *d + *s;
    }
}

impl<T: Scalar> Network<T> {
    pub fn new(config: NetworkConfig, seed: u64) -> Result<Self, NetError> {
        config.validate()?;
        let mut b = Builder {
            params: Vec::new(),
            running: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let c = config.channels;
        let area = config.area();
        let stem = b.conv_bn("stem", PLANES, c, 3);
        let blocks = (0..config.residual_blocks)
            .map(|i| {
                [
                    b.conv_bn(&format!("block{i}.a"), c, c, 3),
                    b.conv_bn(&format!("block{i}.b"), c, c, 3),
                ]
            })
            .collect();
        let policy_conv = b.conv_bn("policy", c, 2, 1);
        let policy_fc = b.dense("policy.fc", 2 * area, POLICY_OUTPUTS);
        let value_conv = b.conv_bn("value", c, 1, 1);
        let value_fc1 = b.dense("value.fc1", area, config.value_hidden);
        let value_fc2 = b.dense("value.fc2", config.value_hidden, 1);
        Ok(Self {
            config,
            params: b.params,
            running: b.running,
            stem,
            blocks,
            policy_conv,
            policy_fc,
            value_conv,
            value_fc1,
            value_fc2,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Whether `other` describes the same layer shapes.
    pub fn same_architecture(&self, other: &NetworkConfig) -> bool {
        let c = &self.config;
        c.grid_size == other.grid_size
            && c.residual_blocks == other.residual_blocks
            && c.channels == other.channels
            && c.value_hidden == other.value_hidden
    }

    /// Replaces the optimizer settings; the architecture must not change.
    pub fn set_config(&mut self, config: NetworkConfig) -> Result<(), NetError> {
        config.validate()?;
        if !self.same_architecture(&config) {
            return Err(NetError::Config("architecture differs".into()));
        }
        self.config = config;
        Ok(())
    }

    pub fn params(&self) -> &[Param<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param<T>] {
        &mut self.params
    }

    pub(crate) fn running(&self) -> &[RunningStats<T>] {
        &self.running
    }

    pub(crate) fn running_mut(&mut self) -> &mut [RunningStats<T>] {
        &mut self.running
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Sum of squared decayed parameters.
    pub fn l2(&self) -> f64 {
        self.params
            .iter()
            .filter(|p| p.decay)
            .flat_map(|p| p.data.iter())
            .map(|v| v.as_f64() * v.as_f64())
            .sum()
    }

    /// Same architecture and parameters cast to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let cast = |v: &[T]| v.iter().map(|x| U::from_f64(x.as_f64())).collect::<Vec<U>>();
        Network {
            config: self.config,
            params: self
                .params
                .iter()
                .map(|p| Param {
                    name: p.name.clone(),
                    data: cast(&p.data),
                    decay: p.decay,
                })
                .collect(),
            running: self
                .running
                .iter()
                .map(|r| RunningStats {
                    mean: cast(&r.mean),
                    var: cast(&r.var),
                })
                .collect(),
            stem: self.stem,
            blocks: self.blocks.clone(),
            policy_conv: self.policy_conv,
            policy_fc: self.policy_fc,
            value_conv: self.value_conv,
            value_fc1: self.value_fc1,
            value_fc2: self.value_fc2,
        }
    }

    fn check_input(&self, x: &[T], batch: usize) -> Result<(), NetError> {
        let want = batch * self.config.input_len();
        if batch == 0 || x.len() != want {
            return Err(NetError::Shape {
                expected: want,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Inference-mode forward pass; batch norm uses running statistics.
    pub fn forward_dense(&self, x: &[T], batch: usize) -> Result<Outputs<T>, NetError> {
        self.check_input(x, batch)?;
        let mut scratch = Vec::new();
        let mut a = self.conv(&self.stem, x, batch, &mut scratch);
        self.bn_infer(&self.stem, &mut a, batch);
        relu_in_place(&mut a);
        for [first, second] in &self.blocks {
            let mut h = self.conv(first, &a, batch, &mut scratch);
            self.bn_infer(first, &mut h, batch);
            relu_in_place(&mut h);
            let mut o = self.conv(second, &h, batch, &mut scratch);
            self.bn_infer(second, &mut o, batch);
            add_into(&mut o, &a);
            relu_in_place(&mut o);
            a = o;
        }
        let mut p = self.conv(&self.policy_conv, &a, batch, &mut scratch);
        self.bn_infer(&self.policy_conv, &mut p, batch);
        relu_in_place(&mut p);
        let logits = self.dense(&self.policy_fc, &p, batch);
        let mut v = self.conv(&self.value_conv, &a, batch, &mut scratch);
        self.bn_infer(&self.value_conv, &mut v, batch);
        relu_in_place(&mut v);
        let mut hidden = self.dense(&self.value_fc1, &v, batch);
        relu_in_place(&mut hidden);
        let value = self.dense(&self.value_fc2, &hidden, batch);
        let policy = softmax_rows(&logits, POLICY_OUTPUTS);
        Ok(Outputs {
            logits,
            policy,
            value,
        })
    }

    /// Training-mode forward pass (batch statistics, running statistics
    /// updated) keeping the activations needed for [`Network::backward`].
    fn forward_train(&mut self, x: &[T], batch: usize) -> Result<(Outputs<T>, Tape<T>), NetError> {
        self.check_input(x, batch)?;
        let mut scratch = Vec::new();
        let (mut a, stem) = self.conv_bn_train(self.stem, x.to_vec(), batch, &mut scratch);
        relu_in_place(&mut a);
        let stem_out = a.clone();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for i in 0..self.blocks.len() {
            let [first, second] = self.blocks[i];
            let (mut h, c1) = self.conv_bn_train(first, a.clone(), batch, &mut scratch);
            relu_in_place(&mut h);
            let (mut o, c2) = self.conv_bn_train(second, h.clone(), batch, &mut scratch);
            add_into(&mut o, &a);
            relu_in_place(&mut o);
            blocks.push(BlockCache {
                first: c1,
                mid: h,
                second: c2,
                out: o.clone(),
            });
            a = o;
        }
        let (mut p, policy) = self.conv_bn_train(self.policy_conv, a.clone(), batch, &mut scratch);
        relu_in_place(&mut p);
        let logits = self.dense(&self.policy_fc, &p, batch);
        let (mut v, value) = self.conv_bn_train(self.value_conv, a, batch, &mut scratch);
        relu_in_place(&mut v);
        let mut hidden = self.dense(&self.value_fc1, &v, batch);
        relu_in_place(&mut hidden);
        let value_out = self.dense(&self.value_fc2, &hidden, batch);
        let policy_probs = softmax_rows(&logits, POLICY_OUTPUTS);
        let tape = Tape {
            batch,
            stem,
            stem_out,
            blocks,
            policy,
            policy_act: p,
            value,
            value_act: v,
            value_hidden: hidden,
        };
        Ok((
            Outputs {
                logits,
                policy: policy_probs,
                value: value_out,
            },
            tape,
        ))
    }

    /// Gradients of all parameters given gradients at the logits and the
    /// value output.
    fn backward(&self, tape: &Tape<T>, d_logits: &[T], d_value: &[T]) -> Vec<Vec<T>> {
        let batch = tape.batch;
        let mut grads: Vec<Vec<T>> = self.params.iter().map(|p| vec![T::zero(); p.data.len()]).collect();
        let mut scratch = Vec::new();

        // policy head
        let mut d_p = self.dense_backward(&self.policy_fc, d_logits, &tape.policy_act, batch, &mut grads);
        relu_mask(&mut d_p, &tape.policy_act);
        let mut d_trunk =
            self.conv_bn_backward(&self.policy_conv, d_p, &tape.policy, batch, &mut grads, &mut scratch, true);

        // value head
        let mut d_hidden = self.dense_backward(&self.value_fc2, d_value, &tape.value_hidden, batch, &mut grads);
        relu_mask(&mut d_hidden, &tape.value_hidden);
        let mut d_v = self.dense_backward(&self.value_fc1, &d_hidden, &tape.value_act, batch, &mut grads);
        relu_mask(&mut d_v, &tape.value_act);
        let d_from_value =
            self.conv_bn_backward(&self.value_conv, d_v, &tape.value, batch, &mut grads, &mut scratch, true);
        add_into(&mut d_trunk, &d_from_value);

        for (i, cache) in tape.blocks.iter().enumerate().rev() {
            let [first, second] = self.blocks[i];
            relu_mask(&mut d_trunk, &cache.out);
            let skip = d_trunk.clone();
            let mut d_mid =
                self.conv_bn_backward(&second, d_trunk, &cache.second, batch, &mut grads, &mut scratch, true);
            relu_mask(&mut d_mid, &cache.mid);
            let mut d_in =
                self.conv_bn_backward(&first, d_mid, &cache.first, batch, &mut grads, &mut scratch, true);
            add_into(&mut d_in, &skip);
            d_trunk = d_in;
        }
        relu_mask(&mut d_trunk, &tape.stem_out);
        self.conv_bn_backward(&self.stem, d_trunk, &tape.stem, batch, &mut grads, &mut scratch, false);
        grads
    }

    fn conv(&self, layer: &ConvBn, x: &[T], batch: usize, scratch: &mut Vec<T>) -> Vec<T> {
        let area = self.config.area();
        let w = &self.params[layer.weight].data;
        let fan_in = layer.cin * layer.kernel * layer.kernel;
        let mut out = vec![T::zero(); batch * layer.cout * area];
        for b in 0..batch {
            let xb = &x[b * layer.cin * area..(b + 1) * layer.cin * area];
            let ob = &mut out[b * layer.cout * area..(b + 1) * layer.cout * area];
            if layer.kernel == 3 {
                scratch.resize(fan_in * area, T::zero());
                let g = self.config.grid_size;
                im2col3(xb, layer.cin, g, g, scratch);
                matmul(layer.cout, fan_in, area, w, false, scratch, false, ob, false);
            } else {
                matmul(layer.cout, fan_in, area, w, false, xb, false, ob, false);
            }
        }
        out
    }

    fn bn_infer(&self, layer: &ConvBn, y: &mut [T], batch: usize) {
        let area = self.config.area();
        let gamma = &self.params[layer.gamma].data;
        let beta = &self.params[layer.beta].data;
        let stats = &self.running[layer.stats];
        let eps = T::from_f64(BN_EPS);
        for c in 0..layer.cout {
            let scale = gamma[c] / (stats.var[c] + eps).sqrt();
            let shift = beta[c] - stats.mean[c] * scale;
            for b in 0..batch {
                for v in &mut y[(b * layer.cout + c) * area..][..area] {
                    *v = *v * scale + shift;
                }
            }
        }
    }

    fn conv_bn_train(
        &mut self,
        layer: ConvBn,
        input: Vec<T>,
        batch: usize,
        scratch: &mut Vec<T>,
    ) -> (Vec<T>, ConvBnCache<T>) {
        let area = self.config.area();
        let mut y = self.conv(&layer, &input, batch, scratch);
        let count = (batch * area) as f64;
        let eps = BN_EPS;
        let mut xhat = vec![T::zero(); y.len()];
        let mut inv_std = vec![T::zero(); layer.cout];
        for c in 0..layer.cout {
            let mut sum = 0.0;
            for b in 0..batch {
                for v in &y[(b * layer.cout + c) * area..][..area] {
                    sum += v.as_f64();
                }
            }
            let mean = sum / count;
            let mut sq = 0.0;
            for b in 0..batch {
                for v in &y[(b * layer.cout + c) * area..][..area] {
                    let d = v.as_f64() - mean;
                    sq += d * d;
                }
            }
            let var = sq / count;
            let inv = 1.0 / (var + eps).sqrt();
            inv_std[c] = T::from_f64(inv);
            let gamma = self.params[layer.gamma].data[c];
            let beta = self.params[layer.beta].data[c];
            let mean_t = T::from_f64(mean);
            for b in 0..batch {
                let off = (b * layer.cout + c) * area;
                for i in off..off + area {
                    let xh = (y[i] - mean_t) * inv_std[c];
                    xhat[i] = xh;
                    y[i] = gamma * xh + beta;
                }
            }
            let stats = &mut self.running[layer.stats];
            let unbiased = if count > 1.0 { var * count / (count - 1.0) } else { var };
            stats.mean[c] = T::from_f64((1.0 - BN_MOMENTUM) * stats.mean[c].as_f64() + BN_MOMENTUM * mean);
            stats.var[c] = T::from_f64((1.0 - BN_MOMENTUM) * stats.var[c].as_f64() + BN_MOMENTUM * unbiased);
        }
        (
            y,
            ConvBnCache {
                input,
                xhat,
                inv_std,
            },
        )
    }

    /// Backward through batch norm and the convolution. Returns the input
    /// gradient when `want_input` is set, otherwise an empty vector.
    #[allow(clippy::too_many_arguments)]
    fn conv_bn_backward(
        &self,
        layer: &ConvBn,
        mut d_out: Vec<T>,
        cache: &ConvBnCache<T>,
        batch: usize,
        grads: &mut [Vec<T>],
        scratch: &mut Vec<T>,
        want_input: bool,
    ) -> Vec<T> {
        let area = self.config.area();
        let count = T::from_f64((batch * area) as f64);
        let gamma = &self.params[layer.gamma].data;
        // batch norm: d_out becomes the gradient at the conv output
        for c in 0..layer.cout {
            let mut d_gamma = T::zero();
            let mut d_beta = T::zero();
            for b in 0..batch {
                let off = (b * layer.cout + c) * area;
                for i in off..off + area {
                    d_gamma = d_gamma + d_out[i] * cache.xhat[i];
                    d_beta = d_beta + d_out[i];
                }
            }
            grads[layer.gamma][c] = grads[layer.gamma][c] + d_gamma;
            grads[layer.beta][c] = grads[layer.beta][c] + d_beta;
            let k = gamma[c] * cache.inv_std[c] / count;
            for b in 0..batch {
                let off = (b * layer.cout + c) * area;
                for i in off..off + area {
                    d_out[i] = k * (count * d_out[i] - d_beta - cache.xhat[i] * d_gamma);
                }
            }
        }
        let fan_in = layer.cin * layer.kernel * layer.kernel;
        let w = &self.params[layer.weight].data;
        let mut d_in = if want_input {
            vec![T::zero(); batch * layer.cin * area]
        } else {
            Vec::new()
        };
        let g = self.config.grid_size;
        let mut d_col = Vec::new();
        for b in 0..batch {
            let xb = &cache.input[b * layer.cin * area..(b + 1) * layer.cin * area];
            let db = &d_out[b * layer.cout * area..(b + 1) * layer.cout * area];
            if layer.kernel == 3 {
                scratch.resize(fan_in * area, T::zero());
                im2col3(xb, layer.cin, g, g, scratch);
                matmul(layer.cout, area, fan_in, db, false, scratch, true, &mut grads[layer.weight], true);
                if want_input {
                    d_col.resize(fan_in * area, T::zero());
                    matmul(fan_in, layer.cout, area, w, true, db, false, &mut d_col, false);
                    let dib = &mut d_in[b * layer.cin * area..(b + 1) * layer.cin * area];
                    col2im3(&d_col, layer.cin, g, g, dib);
                }
            } else {
                matmul(layer.cout, area, fan_in, db, false, xb, true, &mut grads[layer.weight], true);
                if want_input {
                    let dib = &mut d_in[b * layer.cin * area..(b + 1) * layer.cin * area];
                    matmul(fan_in, layer.cout, area, w, true, db, false, dib, false);
                }
            }
        }
        d_in
    }

    fn dense(&self, layer: &Dense, x: &[T], batch: usize) -> Vec<T> {
        let w = &self.params[layer.weight].data;
        let bias = &self.params[layer.bias].data;
        let mut out = vec![T::zero(); batch * layer.nout];
        for row in out.chunks_mut(layer.nout) {
            row.copy_from_slice(bias);
        }
        // out (batch x nout) += x (batch x nin) * w^T
        matmul(batch, layer.nin, layer.nout, x, false, w, true, &mut out, true);
        out
    }

    fn dense_backward(&self, layer: &Dense, d_out: &[T], input: &[T], batch: usize, grads: &mut [Vec<T>]) -> Vec<T> {
        // dW (nout x nin) += d_out^T * input
        matmul(layer.nout, batch, layer.nin, d_out, true, input, false, &mut grads[layer.weight], true);
        for row in d_out.chunks(layer.nout) {
            for (g, d) in grads[layer.bias].iter_mut().zip(row) {
                *g = *g + *d;
            }
        }
        let w = &self.params[layer.weight].data;
        let mut d_in = vec![T::zero(); batch * layer.nin];
        matmul(batch, layer.nout, layer.nin, d_out, false, w, false, &mut d_in, false);
        d_in
    }
}

pub(crate) fn softmax_rows<T: Scalar>(logits: &[T], width: usize) -> Vec<T> {
    let mut out = logits.to_vec();
    for row in out.chunks_mut(width) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
    out
}

/// Training targets for a batch in network precision.
#[derive(Debug, Clone)]
pub struct DenseTargets<T> {
    /// `batch x 3` target distributions.
    pub policy: Vec<T>,
    pub reward: Vec<T>,
}

/// Loss split into its three terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossParts {
    pub value: f64,
    pub policy: f64,
    pub l2: f64,
}

impl LossParts {
    pub fn data(&self) -> f64 {
        self.value + self.policy
    }

    pub fn total(&self) -> f64 {
        self.value + self.policy + self.l2
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.policy.is_finite() && self.l2.is_finite()
    }
}

/// Smallest probability fed to the logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

/// Batch-mean squared value error and policy cross-entropy.
pub fn data_loss<T: Scalar>(policy: &[T], value: &[T], targets: &DenseTargets<T>) -> (f64, f64) {
    let batch = value.len();
    let mut value_term = 0.0;
    let mut policy_term = 0.0;
    for b in 0..batch {
        let d = targets.reward[b].as_f64() - value[b].as_f64();
        value_term += d * d;
        for a in 0..POLICY_OUTPUTS {
            let pi = targets.policy[b * POLICY_OUTPUTS + a].as_f64();
            if pi != 0.0 {
                let p = policy[b * POLICY_OUTPUTS + a].as_f64().max(LOG_FLOOR);
                policy_term -= pi * p.ln();
            }
        }
    }
    (value_term / batch as f64, policy_term / batch as f64)
}

impl<T: Scalar> Network<T> {
    /// Training-mode loss without gradients.
    pub fn train_loss(&mut self, x: &[T], batch: usize, targets: &DenseTargets<T>) -> Result<LossParts, NetError> {
        let (out, _) = self.forward_train(x, batch)?;
        let (value, policy) = data_loss(&out.policy, &out.value, targets);
        Ok(LossParts {
            value,
            policy,
            l2: self.config.weight_decay * self.l2(),
        })
    }

    /// Training-mode loss and its gradient with respect to every parameter.
    pub fn loss_and_grads(
        &mut self,
        x: &[T],
        batch: usize,
        targets: &DenseTargets<T>,
    ) -> Result<(LossParts, Vec<Vec<T>>), NetError> {
        if targets.reward.len() != batch || targets.policy.len() != batch * POLICY_OUTPUTS {
            return Err(NetError::Shape {
                expected: batch,
                found: targets.reward.len(),
            });
        }
        let (out, tape) = self.forward_train(x, batch)?;
        let (value, policy) = data_loss(&out.policy, &out.value, targets);
        let parts = LossParts {
            value,
            policy,
            l2: self.config.weight_decay * self.l2(),
        };
        let scale = T::from_f64(1.0 / batch as f64);
        let two = T::from_f64(2.0);
        let d_value: Vec<T> = (0..batch)
            .map(|b| two * (out.value[b] - targets.reward[b]) * scale)
            .collect();
        let mut d_logits = vec![T::zero(); batch * POLICY_OUTPUTS];
        for b in 0..batch {
            let row = b * POLICY_OUTPUTS..(b + 1) * POLICY_OUTPUTS;
            let mass = targets.policy[row.clone()].iter().fold(T::zero(), |s, v| s + *v);
            for i in row {
                d_logits[i] = (out.policy[i] * mass - targets.policy[i]) * scale;
            }
        }
        let mut grads = self.backward(&tape, &d_logits, &d_value);
        let decay = T::from_f64(2.0 * self.config.weight_decay);
        for (g, p) in grads.iter_mut().zip(&self.params) {
            if p.decay {
                for (gi, pi) in g.iter_mut().zip(&p.data) {
                    *gi = *gi + decay * *pi;
                }
            }
        }
        Ok((parts, grads))
    }
}
