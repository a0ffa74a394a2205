//! Conditional generation and generation-set files.

use std::io::{self, BufRead, Write};

use molvae_chem::{compute_properties, write_smiles, ConditionVector, PropertyTables, PropertyVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{decode, unflatten};
use crate::nn::{standard_normal, ModelParams, Tensor2};
use crate::pipeline::PipelineError;

const CONDITION_COLUMNS: [&str; 4] = ["c1", "c2", "c3", "c4"];
const SAMPLE_BATCH: usize = 256;

/// One generation attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    /// Canonical SMILES of a valid decode.
    pub smiles: Option<String>,
    pub properties: Option<PropertyVector>,
    /// Why the decode is invalid.
    pub reason: Option<String>,
}

impl Generated {
    pub fn valid(&self) -> bool {
        self.smiles.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSet {
    pub condition: ConditionVector,
    pub attempts: Vec<Generated>,
}

impl GenerationSet {
    pub fn valid(&self) -> impl Iterator<Item = (&str, &PropertyVector)> {
        self.attempts
            .iter()
            .filter_map(|g| Some((g.smiles.as_deref()?, g.properties.as_ref()?)))
    }
}

/// Checks a requested condition against the slots a model was trained on.
pub fn check_condition(trained: [bool; 4], c: &ConditionVector, allow_offgrid: bool) -> Result<(), PipelineError> {
    if c.active != trained {
        let names = |m: [bool; 4]| {
            let v: Vec<&str> = (0..4).filter(|&i| m[i]).map(|i| CONDITION_COLUMNS[i]).collect();
            if v.is_empty() {
                "none".to_string()
            } else {
                v.join(",")
            }
        };
        return Err(PipelineError::ConditionMismatch(format!(
            "model conditioned on {}, request sets {}",
            names(trained),
            names(c.active)
        )));
    }
    let off = c.off_grid();
    if !off.is_empty() && !allow_offgrid {
        let v: Vec<&str> = off.iter().map(|&i| CONDITION_COLUMNS[i]).collect();
        return Err(PipelineError::OffGrid(v.join(",")));
    }
    Ok(())
}

/// Draws `n` latent vectors from N(0, I), decodes them under `condition`
/// and labels every attempt.
pub fn sample(
    params: &ModelParams,
    trained: [bool; 4],
    condition: &ConditionVector,
    n: usize,
    seed: u64,
    allow_offgrid: bool,
    tables: &PropertyTables,
) -> Result<GenerationSet, PipelineError> {
    check_condition(trained, condition, allow_offgrid)?;
    let latent = params.config().latent_dim;
    let cvals = condition.active_values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = Vec::with_capacity(n);
    let mut left = n;
    while left > 0 {
        let b = left.min(SAMPLE_BATCH);
        left -= b;
        let z = standard_normal(&mut rng, b, latent);
        let mut c = Tensor2::zeros(b, cvals.len());
        for r in 0..b {
            c.row_mut(r).copy_from_slice(&cvals);
        }
        let probs = params.decoder_forward(&z, &c)?;
        for r in 0..b {
            let g = unflatten(probs.row(r)).map_err(|e| PipelineError::Format(e.to_string()))?;
            attempts.push(match decode(&g) {
                Ok(mol) => match compute_properties(&mol, tables) {
                    Ok(p) => Generated {
                        smiles: Some(write_smiles(&mol)),
                        properties: Some(p),
                        reason: None,
                    },
                    Err(_) => Generated {
                        smiles: None,
                        properties: None,
                        reason: Some("property".into()),
                    },
                },
                Err(reason) => Generated {
                    smiles: None,
                    properties: None,
                    reason: Some(reason.as_str().into()),
                },
            });
        }
    }
    Ok(GenerationSet {
        condition: *condition,
        attempts,
    })
}

const HEADER: &str = "smiles\tvalid\tclogp\tcmr\tqed\tsas\tc1\tc2\tc3\tc4\treason";

/// Writes one row per attempt. Inactive condition fields and missing
/// values are empty.
pub fn write_generation<W: Write>(mut w: W, set: &GenerationSet) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    let cond: Vec<String> = (0..4)
        .map(|i| {
            if set.condition.active[i] {
                format!("{}", set.condition.values[i])
            } else {
                String::new()
            }
        })
        .collect();
    for g in &set.attempts {
        let props = match &g.properties {
            Some(p) => format!("{}\t{}\t{}\t{}", p.clogp, p.cmr, p.qed, p.sas),
            None => "\t\t\t".into(),
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            g.smiles.as_deref().unwrap_or(""),
            if g.valid() { 1 } else { 0 },
            props,
            cond.join("\t"),
            g.reason.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

pub fn read_generation<R: BufRead>(r: R) -> Result<GenerationSet, PipelineError> {
    let bad = |line: usize, m: &str| PipelineError::Format(format!("generation file line {line}: {m}"));
    let mut lines = r.lines();
    if lines.next().transpose()?.as_deref() != Some(HEADER) {
        return Err(bad(1, "missing header"));
    }
    let mut condition: Option<ConditionVector> = None;
    let mut attempts = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 11 {
            return Err(bad(lineno, "expected 11 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(lineno, &format!("bad number `{s}`")));
        let mut c = ConditionVector::none();
        for k in 0..4 {
            if !f[6 + k].is_empty() {
                c.active[k] = true;
                c.values[k] = num(f[6 + k])?;
            }
        }
        match &condition {
            None => condition = Some(c),
            Some(prev) if *prev != c => return Err(bad(lineno, "condition differs from earlier rows")),
            _ => {}
        }
        let valid = match f[1] {
            "1" => true,
            "0" => false,
            _ => return Err(bad(lineno, "valid must be 0 or 1")),
        };
        attempts.push(if valid {
            Generated {
                smiles: Some(f[0].to_string()),
                properties: Some(PropertyVector {
                    clogp: num(f[2])?,
                    cmr: num(f[3])?,
                    qed: num(f[4])?,
                    sas: num(f[5])?,
                }),
                reason: None,
            }
        } else {
            Generated {
                smiles: None,
                properties: None,
                reason: (!f[10].is_empty()).then(|| f[10].to_string()),
            }
        });
    }
    Ok(GenerationSet {
        condition: condition.unwrap_or_else(ConditionVector::none),
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::train::{Trainer, TrainingConfig};

    fn model() -> Trainer {
        let cfg = TrainingConfig {
            encoder_hidden: vec![8],
            latent_dim: 3,
            decoder_hidden: vec![8],
            seed: 1,
            ..TrainingConfig::default()
        }
        .with_objective(1.0, [true, true, false, false]);
        Trainer::new(cfg).unwrap()
    }

    #[test]
    fn guard_and_determinism() {
        let t = model();
        let tables = PropertyTables::shared().unwrap();
        let c = ConditionVector::parse("c1=2,c2=6.0").unwrap();
        let trained = t.config.conditions;
        let a = sample(&t.params, trained, &c, 300, 4, false, tables).unwrap();
        let b = sample(&t.params, trained, &c, 300, 4, false, tables).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.attempts.len(), 300);
        assert!(sample(&t.params, trained, &c, 0, 4, false, tables).unwrap().attempts.is_empty());

        let none = ConditionVector::none();
        assert!(matches!(
            sample(&t.params, trained, &none, 1, 0, false, tables),
            Err(PipelineError::ConditionMismatch(_))
        ));
        assert!(matches!(check_condition([false; 4], &c, false), Err(PipelineError::ConditionMismatch(_))));
        let off = ConditionVector::parse("c1=2.5,c2=6").unwrap();
        assert!(matches!(check_condition(trained, &off, false), Err(PipelineError::OffGrid(_))));
        assert!(check_condition(trained, &off, true).is_ok());
    }

    #[test]
    fn generation_file_round_trips() {
        let set = GenerationSet {
            condition: ConditionVector::parse("c1=2,c2=6.0").unwrap(),
            attempts: vec![
                Generated {
                    smiles: Some("CCO".into()),
                    properties: Some(PropertyVector {
                        clogp: -0.0014,
                        cmr: 12.76,
                        qed: 0.40680796565539457,
                        sas: 1.9802570386349831,
                    }),
                    reason: None,
                },
                Generated {
                    smiles: None,
                    properties: None,
                    reason: Some("valence".into()),
                },
            ],
        };
        let mut buf = Vec::new();
        write_generation(&mut buf, &set).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "\t0\t\t\t\t\t2\t6\t\t\tvalence");
        assert_eq!(read_generation(&buf[..]).unwrap(), set);
    }
}
