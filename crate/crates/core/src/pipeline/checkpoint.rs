//! Checkpoint files.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic      8 bytes  "MOLVAECK"
//! hlen       u64      header length
//! header     hlen     JSON `CheckpointHeader`
//! params     param_count × f64
//! optimizer  optimizer_state_bytes
//! history    history_rows × (reconstruction, kl, total) f64
//! ```

use std::io::{Read, Write};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::ModelConfig;
use crate::pipeline::{PipelineError, TrainingConfig};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MOLVAECK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub reconstruction: f64,
    pub kl: f64,
    pub total: f64,
}

/// Position of a ChaCha8 stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    /// 32-byte seed, hex.
    pub seed: String,
    pub stream: u64,
    /// 128-bit word position, decimal.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, PipelineError> {
        use rand::SeedableRng;
        let bad = || PipelineError::Format("checkpoint: bad rng state".into());
        if self.seed.len() != 64 {
            return Err(bad());
        }
        let mut seed = [0u8; 32];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&self.seed[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos.parse().map_err(|_| bad())?);
        Ok(rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CheckpointHeader {
    format_version: u32,
    config: TrainingConfig,
    model: ModelConfig,
    epoch: usize,
    param_count: usize,
    optimizer_state_bytes: usize,
    history_rows: usize,
    rng: RngState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: TrainingConfig,
    pub model: ModelConfig,
    /// Completed epochs.
    pub epoch: usize,
    pub params: Vec<f64>,
    pub optimizer_state: Vec<u8>,
    pub history: Vec<EpochLoss>,
    pub rng: RngState,
}

impl Checkpoint {
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), PipelineError> {
        let header = CheckpointHeader {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            model: self.model.clone(),
            epoch: self.epoch,
            param_count: self.params.len(),
            optimizer_state_bytes: self.optimizer_state.len(),
            history_rows: self.history.len(),
            rng: self.rng.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| PipelineError::Format(e.to_string()))?;
        let mut buf = Vec::with_capacity(24 + json.len() + 8 * self.params.len() + self.optimizer_state.len());
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
        buf.extend_from_slice(&json);
        for p in &self.params {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        buf.extend_from_slice(&self.optimizer_state);
        for h in &self.history {
            for x in [h.reconstruction, h.kl, h.total] {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to memory");
        out
    }

    pub fn read<R: Read>(mut r: R) -> Result<Checkpoint, PipelineError> {
        let corrupt = |m: &str| PipelineError::Format(format!("checkpoint: {m}"));
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..).ok_or_else(|| corrupt("truncated"))?;
        if body.len() < hlen {
            return Err(corrupt("truncated header"));
        }
        let header: CheckpointHeader = serde_json::from_slice(&body[..hlen]).map_err(|e| corrupt(&e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(corrupt(&format!("unsupported version {}", header.format_version)));
        }
        if header.model.param_count() != header.param_count {
            return Err(corrupt("parameter count does not match the model shape"));
        }
        let rest = &body[hlen..];
        let expected = 8 * header.param_count + header.optimizer_state_bytes + 24 * header.history_rows;
        if rest.len() != expected {
            return Err(corrupt(&format!("{} payload bytes, expected {expected}", rest.len())));
        }
        let f64s = |b: &[u8]| -> Vec<f64> {
            b.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        };
        let (params, rest) = rest.split_at(8 * header.param_count);
        let (opt, hist) = rest.split_at(header.optimizer_state_bytes);
        let history = f64s(hist)
            .chunks_exact(3)
            .enumerate()
            .map(|(i, c)| EpochLoss {
                epoch: i + 1,
                reconstruction: c[0],
                kl: c[1],
                total: c[2],
            })
            .collect();
        Ok(Checkpoint {
            config: header.config,
            model: header.model,
            epoch: header.epoch,
            params: f64s(params),
            optimizer_state: opt.to_vec(),
            history,
            rng: header.rng,
        })
    }
}

/// Per-epoch loss curve as CSV.
pub fn loss_csv(history: &[EpochLoss]) -> String {
    let mut s = String::from("epoch,recon,kl,total\n");
    for h in history {
        s.push_str(&format!("{},{},{},{}\n", h.epoch, h.reconstruction, h.kl, h.total));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};

    #[test]
    fn rng_state_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..13 {
            rng.next_u32();
        }
        let mut back = RngState::capture(&rng).restore().unwrap();
        for _ in 0..100 {
            assert_eq!(rng.next_u64(), back.next_u64());
        }
    }

    #[test]
    fn loss_csv_layout() {
        let h = [EpochLoss {
            epoch: 1,
            reconstruction: 2.5,
            kl: 0.25,
            total: 2.75,
        }];
        assert_eq!(loss_csv(&h), "epoch,recon,kl,total\n1,2.5,0.25,2.75\n");
    }
}
