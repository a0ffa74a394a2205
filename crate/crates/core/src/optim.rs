//! Adam and a hypergradient variant that adapts its own learning rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("{params} parameters but {grads} gradients")]
    Shape { params: usize, grads: usize },
    #[error("non-finite gradient at index {0}")]
    NonFinite(usize),
    #[error("unknown optimizer `{0}`")]
    Unknown(String),
    #[error("corrupt optimizer state: {0}")]
    State(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Meta step size for the learning-rate hypergradient.
    pub hyper_lr: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            learning_rate: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            hyper_lr: 1e-3,
        }
    }
}

pub trait Optimizer: Send {
    fn name(&self) -> &'static str;
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), OptimError>;
    fn learning_rate(&self) -> f64;
    fn steps(&self) -> u64;
    /// Little-endian snapshot of the full state.
    fn state_bytes(&self) -> Vec<u8>;
    fn load_state(&mut self, bytes: &[u8]) -> Result<(), OptimError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n: usize, cfg: &OptimConfig) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            alpha: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
        }
    }

    /// One bias-corrected step. When `direction` is given it receives
    /// `m̂/(√v̂+ε)` for every parameter.
    fn apply(&mut self, params: &mut [f64], grads: &[f64], mut direction: Option<&mut [f64]>) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let u = (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.epsilon);
            params[i] -= self.alpha * u;
            if let Some(d) = direction.as_deref_mut() {
                d[i] = u;
            }
        }
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.m.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for x in [self.alpha, self.beta1, self.beta2, self.epsilon] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        write_f64s(out, &self.m);
        write_f64s(out, &self.v);
    }

    fn read(&mut self, r: &mut Reader) -> Result<(), OptimError> {
        let n = r.u64()? as usize;
        if n != self.m.len() {
            return Err(OptimError::State(format!("{n} parameters, expected {}", self.m.len())));
        }
        self.t = r.u64()?;
        self.alpha = r.f64()?;
        self.beta1 = r.f64()?;
        self.beta2 = r.f64()?;
        self.epsilon = r.f64()?;
        r.f64s(&mut self.m)?;
        r.f64s(&mut self.v)?;
        Ok(())
    }
}

fn write_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    out.reserve(xs.len() * 8);
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], OptimError> {
        if self.bytes.len() < n {
            return Err(OptimError::State("truncated".into()));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }
    fn u64(&mut self) -> Result<u64, OptimError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, OptimError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, out: &mut [f64]) -> Result<(), OptimError> {
        for x in out.iter_mut() {
            *x = self.f64()?;
        }
        Ok(())
    }
    fn finish(&self) -> Result<(), OptimError> {
        if self.bytes.is_empty() {
            Ok(())
        } else {
            Err(OptimError::State("trailing bytes".into()))
        }
    }
}

fn check_step(params: &[f64], grads: &[f64]) -> Result<(), OptimError> {
    if params.len() != grads.len() {
        return Err(OptimError::Shape {
            params: params.len(),
            grads: grads.len(),
        });
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(OptimError::NonFinite(i));
    }
    Ok(())
}

pub struct Adam {
    pub state: AdamState,
}

impl Adam {
    pub fn new(n: usize, cfg: &OptimConfig) -> Self {
        Adam {
            state: AdamState::new(n, cfg),
        }
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), OptimError> {
        check_step(params, grads)?;
        self.state.apply(params, grads, None);
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.state.alpha
    }

    fn steps(&self) -> u64 {
        self.state.t
    }

    fn state_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.state.write(&mut out);
        out
    }

    fn load_state(&mut self, bytes: &[u8]) -> Result<(), OptimError> {
        let mut r = Reader { bytes };
        self.state.read(&mut r)?;
        r.finish()
    }
}

/// Adam whose learning rate `α = exp(λ)` follows the hypergradient
/// `∂L/∂λ = ⟨g_t, −α·u_{t−1}⟩`, with `u` the previous Adam direction.
pub struct HyperAdam {
    pub state: AdamState,
    pub hyper_lr: f64,
    pub prev_direction: Vec<f64>,
    pub last_hypergradient: f64,
}

impl HyperAdam {
    pub fn new(n: usize, cfg: &OptimConfig) -> Self {
        HyperAdam {
            state: AdamState::new(n, cfg),
            hyper_lr: cfg.hyper_lr,
            prev_direction: vec![0.0; n],
            last_hypergradient: 0.0,
        }
    }

    /// `λ = ln α`.
    pub fn log_learning_rate(&self) -> f64 {
        self.state.alpha.ln()
    }
}

impl Optimizer for HyperAdam {
    fn name(&self) -> &'static str {
        "hyperadam"
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), OptimError> {
        check_step(params, grads)?;
        let dot: f64 = grads.iter().zip(&self.prev_direction).map(|(g, u)| g * u).sum();
        let h = -self.state.alpha * dot;
        // λ ← λ − η·h, kept as α ← α·exp(−η·h) so α never leaves (0, ∞)
        // and η = 0 leaves α bit-identical
        self.state.alpha *= (-self.hyper_lr * h).exp();
        self.last_hypergradient = h;
        self.state.apply(params, grads, Some(&mut self.prev_direction));
        Ok(())
    }

    fn learning_rate(&self) -> f64 {
        self.state.alpha
    }

    fn steps(&self) -> u64 {
        self.state.t
    }

    fn state_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.state.write(&mut out);
        out.extend_from_slice(&self.hyper_lr.to_le_bytes());
        out.extend_from_slice(&self.last_hypergradient.to_le_bytes());
        write_f64s(&mut out, &self.prev_direction);
        out
    }

    fn load_state(&mut self, bytes: &[u8]) -> Result<(), OptimError> {
        let mut r = Reader { bytes };
        self.state.read(&mut r)?;
        self.hyper_lr = r.f64()?;
        self.last_hypergradient = r.f64()?;
        r.f64s(&mut self.prev_direction)?;
        r.finish()
    }
}

pub type OptimizerFactory = fn(usize, &OptimConfig) -> Box<dyn Optimizer>;

/// Optimizers constructible by name.
pub struct OptimizerRegistry {
    factories: BTreeMap<&'static str, OptimizerFactory>,
}

impl OptimizerRegistry {
    pub fn empty() -> Self {
        OptimizerRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: OptimizerFactory) {
        self.factories.insert(name, factory);
    }

    pub fn create(&self, name: &str, n: usize, cfg: &OptimConfig) -> Result<Box<dyn Optimizer>, OptimError> {
        self.factories
            .get(name)
            .map(|f| f(n, cfg))
            .ok_or_else(|| OptimError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }
}

impl Default for OptimizerRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("adam", |n, c| Box::new(Adam::new(n, c)));
        r.register("hyperadam", |n, c| Box::new(HyperAdam::new(n, c)));
        r
    }
}
