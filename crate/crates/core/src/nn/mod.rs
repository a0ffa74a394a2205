//! Dense encoder/decoder networks with hand-written backpropagation.
//!
//! Encoder: `[x | c] → hidden… → [μ | log σ²]`. Decoder: `[z | c] → hidden…
//! → logits`, followed by a softmax per one-hot segment. Hidden layers use
//! ReLU. All parameters live in one flat vector so optimizers and
//! checkpoints can treat them uniformly.

pub mod gradcheck;
mod loss;
mod tensor;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use loss::{
    cross_entropy_logits, elbo_loss, hot_indices, kl_loss, recon_loss, segment_softmax,
    LossBreakdown,
};
pub use tensor::{matmul, matmul_a_bt, matmul_at_b, Tensor2};

pub const LOGVAR_MIN: f64 = -10.0;
pub const LOGVAR_MAX: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite values after {0}")]
    NonFinite(&'static str),
    #[error("beta must be positive, got {0}")]
    Beta(f64),
    #[error("target segment {0} is not one-hot")]
    NotOneHot(usize),
    #[error("invalid model configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub cond_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub decoder_hidden: Vec<usize>,
    /// Softmax segment widths of the decoder output; they sum to `input_dim`.
    pub segments: Vec<usize>,
}

impl ModelConfig {
    /// 760 → 1024 → 512 → 128 → 512 → 1024 → 760 over the graph-matrix layout.
    pub fn standard(cond_dim: usize) -> Self {
        ModelConfig {
            input_dim: crate::codec::FLAT_DIM,
            cond_dim,
            encoder_hidden: vec![1024, 512],
            latent_dim: 128,
            decoder_hidden: vec![512, 1024],
            segments: crate::codec::segments(),
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let dims = [self.input_dim, self.latent_dim];
        if dims.contains(&0) || self.encoder_hidden.contains(&0) || self.decoder_hidden.contains(&0) {
            return Err(NnError::Config("zero-width layer".into()));
        }
        if self.segments.contains(&0) || self.segments.iter().sum::<usize>() != self.input_dim {
            return Err(NnError::Config("segments must be positive and sum to the input width".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every layer, encoder first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        let mut prev = self.input_dim + self.cond_dim;
        for &h in &self.encoder_hidden {
            shapes.push((prev, h));
            prev = h;
        }
        shapes.push((prev, 2 * self.latent_dim));
        prev = self.latent_dim + self.cond_dim;
        for &h in &self.decoder_hidden {
            shapes.push((prev, h));
            prev = h;
        }
        shapes.push((prev, self.input_dim));
        shapes
    }

    pub fn encoder_layers(&self) -> usize {
        self.encoder_hidden.len() + 1
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// Position of one dense layer inside the flat parameter vector. The weight
/// is `fan_in × fan_out`, row-major, followed by `fan_out` biases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSlot {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight: usize,
    pub bias: usize,
}

fn layer_slots(config: &ModelConfig) -> Vec<LayerSlot> {
    let mut offset = 0;
    config
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let slot = LayerSlot {
                fan_in,
                fan_out,
                weight: offset,
                bias: offset + fan_in * fan_out,
            };
            offset += fan_in * fan_out + fan_out;
            slot
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    slots: Vec<LayerSlot>,
    pub values: Vec<f64>,
}

/// Posterior parameters for a batch, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderOutput {
    pub mu: Tensor2,
    pub logvar: Tensor2,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    /// Input to every layer, encoder then decoder.
    pub inputs: Vec<Tensor2>,
    /// Pre-activations of every hidden layer, encoder then decoder.
    pub hidden_pre: Vec<Tensor2>,
    pub encoded: EncoderOutput,
    /// Whether each raw log-variance lay inside the clamp range.
    pub logvar_open: Vec<bool>,
    pub eps: Tensor2,
    pub z: Tensor2,
    pub logits: Tensor2,
}

impl ForwardPass {
    /// Smallest |pre-activation| over all hidden units, for kink checks.
    pub fn min_abs_preactivation(&self) -> f64 {
        self.hidden_pre
            .iter()
            .flat_map(|t| t.values.iter())
            .fold(f64::INFINITY, |m, &v| m.min(v.abs()))
    }
}

fn relu_in_place(t: &mut Tensor2) {
    for v in &mut t.values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn check(t: &Tensor2, stage: &'static str) -> Result<(), NnError> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(NnError::NonFinite(stage))
    }
}

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Result<Self, NnError> {
        config.validate()?;
        let slots = layer_slots(&config);
        let values = vec![0.0; config.param_count()];
        Ok(ModelParams { config, slots, values })
    }

    /// Uniform `±1/√fan_in` initialization for weights and biases.
    pub fn init<R: Rng>(config: ModelConfig, rng: &mut R) -> Result<Self, NnError> {
        let mut p = Self::zeros(config)?;
        for slot in p.slots.clone() {
            let bound = 1.0 / (slot.fan_in as f64).sqrt();
            let end = slot.bias + slot.fan_out;
            for v in &mut p.values[slot.weight..end] {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(p)
    }

    pub fn from_values(config: ModelConfig, values: Vec<f64>) -> Result<Self, NnError> {
        config.validate()?;
        if values.len() != config.param_count() {
            return Err(NnError::Shape(format!(
                "{} parameters for a model of {}",
                values.len(),
                config.param_count()
            )));
        }
        let slots = layer_slots(&config);
        Ok(ModelParams { config, slots, values })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn slots(&self) -> &[LayerSlot] {
        &self.slots
    }

    fn affine(&self, layer: usize, x: &Tensor2) -> Tensor2 {
        let s = self.slots[layer];
        let mut y = matmul(x, &self.values[s.weight..s.bias], s.fan_out);
        let bias = &self.values[s.bias..s.bias + s.fan_out];
        for r in 0..y.rows {
            for (v, b) in y.row_mut(r).iter_mut().zip(bias) {
                *v += b;
            }
        }
        y
    }

    fn check_input(&self, x: &Tensor2, c: &Tensor2, width: usize, what: &str) -> Result<(), NnError> {
        if x.cols != width || c.cols != self.config.cond_dim || x.rows != c.rows {
            return Err(NnError::Shape(format!(
                "{what} {}×{} with conditions {}×{}, expected width {width} and {} conditions",
                x.rows, x.cols, c.rows, c.cols, self.config.cond_dim
            )));
        }
        Ok(())
    }

    /// Runs a stack of layers, ReLU on all but the last.
    fn stack(
        &self,
        layers: std::ops::Range<usize>,
        mut x: Tensor2,
        inputs: &mut Vec<Tensor2>,
        hidden_pre: &mut Vec<Tensor2>,
        stage: &'static str,
    ) -> Result<Tensor2, NnError> {
        let last = layers.end - 1;
        for l in layers {
            let mut y = self.affine(l, &x);
            check(&y, stage)?;
            inputs.push(x);
            if l != last {
                hidden_pre.push(y.clone());
                relu_in_place(&mut y);
            }
            x = y;
        }
        Ok(x)
    }

    fn encode_inner(
        &self,
        x: &Tensor2,
        c: &Tensor2,
        inputs: &mut Vec<Tensor2>,
        hidden_pre: &mut Vec<Tensor2>,
    ) -> Result<(EncoderOutput, Vec<bool>), NnError> {
        self.check_input(x, c, self.config.input_dim, "input")?;
        let out = self.stack(0..self.config.encoder_layers(), x.hcat(c), inputs, hidden_pre, "encoder")?;
        let l = self.config.latent_dim;
        let mu = out.columns(0, l);
        let mut logvar = out.columns(l, 2 * l);
        let mut open = Vec::with_capacity(logvar.values.len());
        for v in &mut logvar.values {
            open.push((LOGVAR_MIN..=LOGVAR_MAX).contains(v));
            *v = v.clamp(LOGVAR_MIN, LOGVAR_MAX);
        }
        Ok((EncoderOutput { mu, logvar }, open))
    }

    pub fn encoder_forward(&self, x: &Tensor2, c: &Tensor2) -> Result<EncoderOutput, NnError> {
        Ok(self.encode_inner(x, c, &mut Vec::new(), &mut Vec::new())?.0)
    }

    fn decoder_logits(
        &self,
        z: &Tensor2,
        c: &Tensor2,
        inputs: &mut Vec<Tensor2>,
        hidden_pre: &mut Vec<Tensor2>,
    ) -> Result<Tensor2, NnError> {
        self.check_input(z, c, self.config.latent_dim, "latent")?;
        let first = self.config.encoder_layers();
        self.stack(first..self.slots.len(), z.hcat(c), inputs, hidden_pre, "decoder")
    }

    /// Per-segment probabilities, one row per latent vector.
    pub fn decoder_forward(&self, z: &Tensor2, c: &Tensor2) -> Result<Tensor2, NnError> {
        let logits = self.decoder_logits(z, c, &mut Vec::new(), &mut Vec::new())?;
        let mut probs = Tensor2::zeros(logits.rows, logits.cols);
        for r in 0..logits.rows {
            let p = segment_softmax(logits.row(r), &self.config.segments);
            probs.row_mut(r).copy_from_slice(&p);
        }
        check(&probs, "decoder softmax")?;
        Ok(probs)
    }

    /// Full forward pass with the given standard-normal noise.
    pub fn forward(&self, x: &Tensor2, c: &Tensor2, eps: &Tensor2) -> Result<ForwardPass, NnError> {
        let mut inputs = Vec::new();
        let mut hidden_pre = Vec::new();
        let (encoded, logvar_open) = self.encode_inner(x, c, &mut inputs, &mut hidden_pre)?;
        if eps.rows != x.rows || eps.cols != self.config.latent_dim {
            return Err(NnError::Shape("noise shape".into()));
        }
        let z = reparameterize(&encoded, eps);
        check(&z, "reparameterization")?;
        let logits = self.decoder_logits(&z, c, &mut inputs, &mut hidden_pre)?;
        Ok(ForwardPass {
            inputs,
            hidden_pre,
            encoded,
            logvar_open,
            eps: eps.clone(),
            z,
            logits,
        })
    }

    /// Batch-mean reconstruction and KL terms of a forward pass.
    pub fn loss_terms(&self, pass: &ForwardPass, x: &Tensor2) -> Result<(f64, f64), NnError> {
        let (recon, kl, _, _) = self.loss_and_output_grads(pass, x, 1.0)?;
        Ok((recon, kl))
    }

    #[allow(clippy::type_complexity)]
    fn loss_and_output_grads(
        &self,
        pass: &ForwardPass,
        x: &Tensor2,
        beta: f64,
    ) -> Result<(f64, f64, Tensor2, (Vec<f64>, Vec<f64>)), NnError> {
        let b = x.rows as f64;
        let seg = &self.config.segments;
        let mut dlogits = Tensor2::zeros(pass.logits.rows, pass.logits.cols);
        let mut recon = 0.0;
        for r in 0..x.rows {
            let hot = hot_indices(x.row(r), seg)?;
            recon += cross_entropy_logits(pass.logits.row(r), &hot, seg, dlogits.row_mut(r));
        }
        for v in &mut dlogits.values {
            *v /= b;
        }
        let (kl, dmu, dlv) = kl_loss(&pass.encoded.mu.values, &pass.encoded.logvar.values);
        let scale = beta / b;
        let dmu = dmu.into_iter().map(|g| g * scale).collect();
        let dlv = dlv.into_iter().map(|g| g * scale).collect();
        Ok((recon / b, kl / b, dlogits, (dmu, dlv)))
    }

    /// Objective value and gradient with respect to every parameter.
    pub fn loss_and_grad(
        &self,
        x: &Tensor2,
        c: &Tensor2,
        eps: &Tensor2,
        beta: f64,
    ) -> Result<(LossBreakdown, Vec<f64>), NnError> {
        let pass = self.forward(x, c, eps)?;
        let (recon, kl, dlogits, (dmu_kl, dlv_kl)) = self.loss_and_output_grads(&pass, x, beta)?;
        let loss = elbo_loss(recon, kl, beta)?;
        let grads = self.backward(&pass, dlogits, &dmu_kl, &dlv_kl);
        Ok((loss, grads))
    }

    /// Objective value only.
    pub fn loss(&self, x: &Tensor2, c: &Tensor2, eps: &Tensor2, beta: f64) -> Result<LossBreakdown, NnError> {
        let pass = self.forward(x, c, eps)?;
        let (recon, kl) = self.loss_terms(&pass, x)?;
        elbo_loss(recon, kl, beta)
    }

    /// Backpropagates output gradients through both networks.
    pub fn backward(&self, pass: &ForwardPass, dlogits: Tensor2, dmu_kl: &[f64], dlv_kl: &[f64]) -> Vec<f64> {
        let mut grads = vec![0.0; self.values.len()];
        let enc = self.config.encoder_layers();
        let n_layers = self.slots.len();
        let enc_hidden = self.config.encoder_hidden.len();

        let dz_in = self.backprop_stack(enc..n_layers, enc_hidden, pass, dlogits, &mut grads);
        let l = self.config.latent_dim;
        let dz = dz_in.columns(0, l);

        let rows = pass.z.rows;
        let mut dout = Tensor2::zeros(rows, 2 * l);
        for r in 0..rows {
            for j in 0..l {
                let k = r * l + j;
                let lv = pass.encoded.logvar.values[k];
                let sigma = (0.5 * lv).exp();
                dout.values[r * 2 * l + j] = dz.values[k] + dmu_kl[k];
                let dlv = dz.values[k] * pass.eps.values[k] * 0.5 * sigma + dlv_kl[k];
                dout.values[r * 2 * l + l + j] = if pass.logvar_open[k] { dlv } else { 0.0 };
            }
        }
        self.backprop_stack(0..enc, 0, pass, dout, &mut grads);
        grads
    }

    /// Returns the gradient with respect to the stack's input.
    fn backprop_stack(
        &self,
        layers: std::ops::Range<usize>,
        pre_base: usize,
        pass: &ForwardPass,
        mut dy: Tensor2,
        grads: &mut [f64],
    ) -> Tensor2 {
        let first = layers.start;
        for l in layers.rev() {
            let s = self.slots[l];
            let input = &pass.inputs[l];
            matmul_at_b(input, &dy, &mut grads[s.weight..s.bias]);
            let gb = &mut grads[s.bias..s.bias + s.fan_out];
            for r in 0..dy.rows {
                for (g, d) in gb.iter_mut().zip(dy.row(r)) {
                    *g += d;
                }
            }
            let mut dx = matmul_a_bt(&dy, &self.values[s.weight..s.bias], s.fan_in);
            if l > first {
                let pre = &pass.hidden_pre[pre_base + (l - first) - 1];
                for (d, &p) in dx.values.iter_mut().zip(&pre.values) {
                    if p <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            dy = dx;
        }
        dy
    }
}

/// `z = μ + exp(log σ² / 2)·ε`.
pub fn reparameterize(out: &EncoderOutput, eps: &Tensor2) -> Tensor2 {
    let values = out
        .mu
        .values
        .iter()
        .zip(&out.logvar.values)
        .zip(&eps.values)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect();
    Tensor2::from_vec(out.mu.rows, out.mu.cols, values)
}

/// Standard-normal noise.
pub fn standard_normal<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Tensor2 {
    let values = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Tensor2::from_vec(rows, cols, values)
}
