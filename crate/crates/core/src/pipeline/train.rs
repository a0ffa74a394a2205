//! The training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{flatten_into, segments, FLAT_DIM, MAX_ATOMS};
use crate::nn::{standard_normal, ModelConfig, ModelParams, Tensor2};
use crate::objective::{Objective, ObjectiveRegistry};
use crate::optim::{OptimConfig, Optimizer, OptimizerRegistry};
use crate::pipeline::{Checkpoint, DatasetRecord, EpochLoss, PipelineError, RngState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub objective: String,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: String,
    pub learning_rate: f64,
    pub hyper_lr: f64,
    pub seed: u64,
    /// Active condition slots: clogp, cmr, qed, sas.
    pub conditions: [bool; 4],
    pub max_atoms: usize,
    pub encoder_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub decoder_hidden: Vec<usize>,
    /// Write an intermediate checkpoint every this many epochs; 0 for none.
    pub checkpoint_every: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            objective: "vae".into(),
            beta: 1.0,
            epochs: 100,
            batch_size: 256,
            optimizer: "adam".into(),
            learning_rate: 0.005,
            hyper_lr: 1e-3,
            seed: 0,
            conditions: [false; 4],
            max_atoms: MAX_ATOMS,
            encoder_hidden: vec![1024, 512],
            latent_dim: 128,
            decoder_hidden: vec![512, 1024],
            checkpoint_every: 0,
        }
    }
}

impl TrainingConfig {
    /// Sets β and conditions and picks the matching objective.
    pub fn with_objective(mut self, beta: f64, conditions: [bool; 4]) -> Self {
        self.beta = beta;
        self.conditions = conditions;
        self.objective = ObjectiveRegistry::resolve(beta, conditions.iter().any(|&c| c)).to_string();
        self
    }

    pub fn cond_dim(&self) -> usize {
        self.conditions.iter().filter(|&&c| c).count()
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            input_dim: FLAT_DIM,
            cond_dim: self.cond_dim(),
            encoder_hidden: self.encoder_hidden.clone(),
            latent_dim: self.latent_dim,
            decoder_hidden: self.decoder_hidden.clone(),
            segments: segments(),
        }
    }

    pub fn optim_config(&self) -> OptimConfig {
        OptimConfig {
            learning_rate: self.learning_rate,
            hyper_lr: self.hyper_lr,
            ..OptimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {}", self.learning_rate));
        }
        if self.max_atoms != MAX_ATOMS {
            return bad(format!("max_atoms is fixed at {MAX_ATOMS} by the matrix layout"));
        }
        let objective = self.objective()?;
        if objective.conditioned() != (self.cond_dim() > 0) {
            return bad(format!(
                "objective `{}` with {} active conditions",
                self.objective,
                self.cond_dim()
            ));
        }
        self.model_config().validate()?;
        OptimizerRegistry::default().create(&self.optimizer, 0, &self.optim_config())?;
        Ok(())
    }

    pub fn objective(&self) -> Result<Box<dyn Objective>, PipelineError> {
        Ok(ObjectiveRegistry::default().create(&self.objective, self.beta)?)
    }
}

/// Owns everything that changes during training.
pub struct Trainer {
    pub config: TrainingConfig,
    pub params: ModelParams,
    objective: Box<dyn Objective>,
    optimizer: Box<dyn Optimizer>,
    rng: ChaCha8Rng,
    pub epoch: usize,
    pub history: Vec<EpochLoss>,
}

impl Trainer {
    pub fn new(config: TrainingConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = ModelParams::init(config.model_config(), &mut rng)?;
        let optimizer = OptimizerRegistry::default().create(&config.optimizer, params.values.len(), &config.optim_config())?;
        Ok(Trainer {
            objective: config.objective()?,
            config,
            params,
            optimizer,
            rng,
            epoch: 0,
            history: Vec::new(),
        })
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, PipelineError> {
        ck.config.validate()?;
        if ck.model != ck.config.model_config() {
            return Err(PipelineError::Format("checkpoint: model shape differs from its config".into()));
        }
        let params = ModelParams::from_values(ck.model.clone(), ck.params.clone())?;
        let mut optimizer = OptimizerRegistry::default().create(&ck.config.optimizer, params.values.len(), &ck.config.optim_config())?;
        optimizer.load_state(&ck.optimizer_state)?;
        Ok(Trainer {
            config: ck.config.clone(),
            objective: ck.config.objective()?,
            params,
            optimizer,
            rng: ck.rng.restore()?,
            epoch: ck.epoch,
            history: ck.history.clone(),
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.optimizer.learning_rate()
    }

    pub fn finished(&self) -> bool {
        self.epoch >= self.config.epochs
    }

    /// One pass over `data` in a freshly shuffled order. The last batch may
    /// be short. Returns the sample-weighted mean loss.
    pub fn run_epoch(&mut self, data: &[DatasetRecord]) -> Result<EpochLoss, PipelineError> {
        if data.is_empty() {
            return Err(PipelineError::Empty("training set is empty".into()));
        }
        let epoch = self.epoch + 1;
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);
        let active = self.config.conditions;
        let cond_dim = self.config.cond_dim();
        let (mut recon, mut kl, mut total) = (0.0, 0.0, 0.0);
        for (batch, idx) in order.chunks(self.config.batch_size).enumerate() {
            let b = idx.len();
            let mut x = Tensor2::zeros(b, FLAT_DIM);
            let mut c = Tensor2::zeros(b, cond_dim);
            for (row, &i) in idx.iter().enumerate() {
                flatten_into(&data[i].graph, x.row_mut(row));
                let values = data[i].conditions();
                let mut k = 0;
                for slot in 0..4 {
                    if active[slot] {
                        c.row_mut(row)[k] = values[slot];
                        k += 1;
                    }
                }
            }
            let eps = standard_normal(&mut self.rng, b, self.config.latent_dim);
            let cond = (cond_dim > 0).then_some(&c);
            let diverged = |component| PipelineError::Divergence { epoch, batch, component };
            let (loss, grads) = match self.objective.loss_and_grad(&self.params, &x, cond, &eps) {
                Ok(v) => v,
                Err(crate::nn::NnError::NonFinite(what)) => return Err(diverged(what)),
                Err(e) => return Err(e.into()),
            };
            for (value, name) in [(loss.reconstruction, "reconstruction"), (loss.kl, "kl"), (loss.total, "total")] {
                if !value.is_finite() {
                    return Err(diverged(name));
                }
            }
            match self.optimizer.step(&mut self.params.values, &grads) {
                Ok(()) => {}
                Err(crate::optim::OptimError::NonFinite(_)) => return Err(diverged("gradient")),
                Err(e) => return Err(e.into()),
            }
            let w = b as f64;
            recon += loss.reconstruction * w;
            kl += loss.kl * w;
            total += loss.total * w;
        }
        let n = data.len() as f64;
        let row = EpochLoss {
            epoch,
            reconstruction: recon / n,
            kl: kl / n,
            total: total / n,
        };
        self.epoch = epoch;
        self.history.push(row);
        Ok(row)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            model: self.params.config().clone(),
            epoch: self.epoch,
            params: self.params.values.clone(),
            optimizer_state: self.optimizer.state_bytes(),
            history: self.history.clone(),
            rng: RngState::capture(&self.rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::ingest::{ingest, IngestOptions};
    use molvae_chem::PropertyTables;

    pub(crate) fn tiny_config() -> TrainingConfig {
        TrainingConfig {
            epochs: 3,
            batch_size: 4,
            encoder_hidden: vec![16],
            latent_dim: 4,
            decoder_hidden: vec![16],
            learning_rate: 0.01,
            seed: 5,
            ..TrainingConfig::default()
        }
        .with_objective(0.5, [true, true, false, false])
    }

    fn records() -> Vec<DatasetRecord> {
        let text = "CCO\nCC(=O)NCC(F)(F)Br\nc1ccccc1\nC1CCCC1O\nCCN(C)C\nOC(=O)c1ccccc1\nCC#N\nFC(F)F\nCSC\nClCCl\n";
        ingest(text.as_bytes(), &IngestOptions::default(), PropertyTables::shared().unwrap())
            .unwrap()
            .accepted
            .into_iter()
            .map(Into::into)
            .collect()
    }

    #[test]
    fn objective_follows_beta_and_conditions() {
        let c = TrainingConfig::default();
        assert_eq!(c.objective, "vae");
        assert_eq!(c.clone().with_objective(0.01, [true, true, false, false]).objective, "beta-cvae");
        let mut bad = c.with_objective(2.0, [false; 4]);
        bad.objective = "cvae".into();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn training_is_deterministic_and_resumable() {
        let data = records();
        let mut a = Trainer::new(tiny_config()).unwrap();
        while !a.finished() {
            a.run_epoch(&data).unwrap();
        }
        let mut b = Trainer::new(tiny_config()).unwrap();
        b.run_epoch(&data).unwrap();
        let saved = b.checkpoint().to_bytes();
        let ck = Checkpoint::read(&saved[..]).unwrap();
        assert_eq!(ck.to_bytes(), saved);
        let mut c = Trainer::from_checkpoint(&ck).unwrap();
        while !c.finished() {
            c.run_epoch(&data).unwrap();
        }
        assert_eq!(a.checkpoint().to_bytes(), c.checkpoint().to_bytes());
        assert_eq!(a.history.len(), 3);
        assert!(a.history.iter().all(|h| h.total.is_finite()));
    }

    #[test]
    fn hyperadam_checkpoint_round_trips() {
        let data = records();
        let mut cfg = tiny_config();
        cfg.optimizer = "hyperadam".into();
        let mut t = Trainer::new(cfg).unwrap();
        t.run_epoch(&data).unwrap();
        let bytes = t.checkpoint().to_bytes();
        let back = Trainer::from_checkpoint(&Checkpoint::read(&bytes[..]).unwrap()).unwrap();
        assert_eq!(back.checkpoint().to_bytes(), bytes);
        assert_ne!(t.learning_rate(), 0.01);
    }

    #[test]
    fn divergence_is_reported() {
        let data = records();
        let mut t = Trainer::new(tiny_config()).unwrap();
        t.params.values[0] = f64::NAN;
        let err = t.run_epoch(&data).unwrap_err();
        assert!(matches!(err, PipelineError::Divergence { epoch: 1, batch: 0, .. }), "{err}");
    }
}
