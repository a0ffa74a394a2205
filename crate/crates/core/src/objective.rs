//! Training objectives selectable by name.
//!
//! `beta-cvae` is the general form. The other three are its special
//! cases, each computed by its own code path.

use std::collections::BTreeMap;

use crate::nn::{LossBreakdown, ModelParams, NnError, Tensor2};

pub trait Objective: Send + Sync {
    fn name(&self) -> &'static str;
    fn beta(&self) -> f64;
    fn conditioned(&self) -> bool;
    /// Loss on a batch. `c` must be `None` exactly when the objective is
    /// unconditioned.
    fn loss(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>, eps: &Tensor2) -> Result<LossBreakdown, NnError>;

    fn loss_and_grad(
        &self,
        params: &ModelParams,
        x: &Tensor2,
        c: Option<&Tensor2>,
        eps: &Tensor2,
    ) -> Result<(LossBreakdown, Vec<f64>), NnError> {
        let c = self.condition(params, x, c)?;
        let (mut loss, grads) = params.loss_and_grad(x, &c, eps, self.beta())?;
        loss.total = self.combine(loss.reconstruction, loss.kl);
        Ok((loss, grads))
    }

    fn combine(&self, reconstruction: f64, kl: f64) -> f64;

    /// Validates the condition argument against the objective and model.
    fn condition(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>) -> Result<Tensor2, NnError> {
        let width = params.config().cond_dim;
        match (self.conditioned(), c) {
            (false, None) if width == 0 => Ok(Tensor2::zeros(x.rows, 0)),
            (true, Some(c)) if width > 0 && c.cols == width => Ok(c.clone()),
            _ => Err(NnError::Config(format!(
                "objective `{}` with a model of {width} condition inputs",
                self.name()
            ))),
        }
    }
}

fn terms(params: &ModelParams, x: &Tensor2, c: &Tensor2, eps: &Tensor2) -> Result<(f64, f64), NnError> {
    let pass = params.forward(x, c, eps)?;
    params.loss_terms(&pass, x)
}

/// Reconstruction plus KL, no condition.
pub struct Vae;

/// Reconstruction plus β-weighted KL, no condition.
pub struct BetaVae {
    pub beta: f64,
}

/// Reconstruction plus KL, conditioned encoder and decoder.
pub struct Cvae;

/// Reconstruction plus β-weighted KL, conditioned.
pub struct BetaCvae {
    pub beta: f64,
}

impl Objective for Vae {
    fn name(&self) -> &'static str {
        "vae"
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn conditioned(&self) -> bool {
        false
    }
    fn combine(&self, reconstruction: f64, kl: f64) -> f64 {
        reconstruction + kl
    }
    fn loss(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>, eps: &Tensor2) -> Result<LossBreakdown, NnError> {
        let c = self.condition(params, x, c)?;
        let (reconstruction, kl) = terms(params, x, &c, eps)?;
        Ok(LossBreakdown {
            reconstruction,
            kl,
            beta: 1.0,
            total: reconstruction + kl,
        })
    }
}

impl Objective for BetaVae {
    fn name(&self) -> &'static str {
        "beta-vae"
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn conditioned(&self) -> bool {
        false
    }
    fn combine(&self, reconstruction: f64, kl: f64) -> f64 {
        reconstruction + self.beta * kl
    }
    fn loss(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>, eps: &Tensor2) -> Result<LossBreakdown, NnError> {
        let c = self.condition(params, x, c)?;
        let (reconstruction, kl) = terms(params, x, &c, eps)?;
        Ok(LossBreakdown {
            reconstruction,
            kl,
            beta: self.beta,
            total: reconstruction + self.beta * kl,
        })
    }
}

impl Objective for Cvae {
    fn name(&self) -> &'static str {
        "cvae"
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn conditioned(&self) -> bool {
        true
    }
    fn combine(&self, reconstruction: f64, kl: f64) -> f64 {
        reconstruction + kl
    }
    fn loss(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>, eps: &Tensor2) -> Result<LossBreakdown, NnError> {
        let c = self.condition(params, x, c)?;
        let (reconstruction, kl) = terms(params, x, &c, eps)?;
        Ok(LossBreakdown {
            reconstruction,
            kl,
            beta: 1.0,
            total: reconstruction + kl,
        })
    }
}

impl Objective for BetaCvae {
    fn name(&self) -> &'static str {
        "beta-cvae"
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn conditioned(&self) -> bool {
        true
    }
    fn combine(&self, reconstruction: f64, kl: f64) -> f64 {
        reconstruction + self.beta * kl
    }
    fn loss(&self, params: &ModelParams, x: &Tensor2, c: Option<&Tensor2>, eps: &Tensor2) -> Result<LossBreakdown, NnError> {
        let c = self.condition(params, x, c)?;
        params.loss(x, &c, eps, self.beta)
    }
}

pub type ObjectiveFactory = fn(f64) -> Result<Box<dyn Objective>, NnError>;

/// Objectives constructible by name.
pub struct ObjectiveRegistry {
    factories: BTreeMap<&'static str, ObjectiveFactory>,
}

fn positive(beta: f64) -> Result<f64, NnError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(NnError::Beta(beta))
    }
}

fn unit(beta: f64, name: &str) -> Result<(), NnError> {
    if beta == 1.0 {
        Ok(())
    } else {
        Err(NnError::Config(format!("`{name}` fixes beta at 1, got {beta}")))
    }
}

impl ObjectiveRegistry {
    pub fn empty() -> Self {
        ObjectiveRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, factory: ObjectiveFactory) {
        self.factories.insert(name, factory);
    }

    pub fn create(&self, name: &str, beta: f64) -> Result<Box<dyn Objective>, NnError> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| NnError::Config(format!("unknown objective `{name}`")))?;
        f(beta)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    /// The most specific objective for a β and conditioning choice.
    pub fn resolve(beta: f64, conditioned: bool) -> &'static str {
        match (beta == 1.0, conditioned) {
            (true, false) => "vae",
            (false, false) => "beta-vae",
            (true, true) => "cvae",
            (false, true) => "beta-cvae",
        }
    }
}

impl Default for ObjectiveRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("vae", |b| {
            unit(b, "vae")?;
            Ok(Box::new(Vae))
        });
        r.register("beta-vae", |b| Ok(Box::new(BetaVae { beta: positive(b)? })));
        r.register("cvae", |b| {
            unit(b, "cvae")?;
            Ok(Box::new(Cvae))
        });
        r.register("beta-cvae", |b| Ok(Box::new(BetaCvae { beta: positive(b)? })));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{standard_normal, ModelConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny(cond_dim: usize) -> ModelConfig {
        ModelConfig {
            input_dim: 8,
            cond_dim,
            encoder_hidden: vec![6],
            latent_dim: 2,
            decoder_hidden: vec![6],
            segments: vec![4, 4],
        }
    }

    fn batch(rng: &mut ChaCha8Rng) -> Tensor2 {
        use rand::Rng;
        let mut x = Tensor2::zeros(3, 8);
        for r in 0..3 {
            x.row_mut(r)[rng.random_range(0..4)] = 1.0;
            x.row_mut(r)[4 + rng.random_range(0..4)] = 1.0;
        }
        x
    }

    #[test]
    fn registry_names_and_resolution() {
        let reg = ObjectiveRegistry::default();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["beta-cvae", "beta-vae", "cvae", "vae"]);
        for (beta, cond) in [(1.0, false), (0.5, false), (1.0, true), (10.0, true)] {
            let o = reg.create(ObjectiveRegistry::resolve(beta, cond), beta).unwrap();
            assert_eq!((o.beta(), o.conditioned()), (beta, cond));
        }
        assert!(reg.create("vae", 2.0).is_err());
        assert!(reg.create("beta-cvae", 0.0).is_err());
        assert!(reg.create("ae", 1.0).is_err());
    }

    #[test]
    fn condition_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ModelParams::init(tiny(0), &mut rng).unwrap();
        let x = batch(&mut rng);
        let eps = standard_normal(&mut rng, 3, 2);
        let c = Tensor2::zeros(3, 1);
        assert!(Vae.loss(&p, &x, None, &eps).is_ok());
        assert!(Vae.loss(&p, &x, Some(&c), &eps).is_err());
        assert!(Cvae.loss(&p, &x, Some(&c), &eps).is_err());
    }

    #[test]
    fn grad_total_matches_loss_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ModelParams::init(tiny(2), &mut rng).unwrap();
        let x = batch(&mut rng);
        let c = standard_normal(&mut rng, 3, 2);
        let eps = standard_normal(&mut rng, 3, 2);
        for o in [&Cvae as &dyn Objective, &BetaCvae { beta: 0.1 }] {
            let a = o.loss(&p, &x, Some(&c), &eps).unwrap();
            let (b, _) = o.loss_and_grad(&p, &x, Some(&c), &eps).unwrap();
            assert_eq!(a.total.to_bits(), b.total.to_bits());
        }
    }
}
