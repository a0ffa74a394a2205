//! Dataset records, deterministic subsampling and splitting, and the
//! binary dataset cache.
//!
//! Cache layout (little-endian):
//!
//! ```text
//! magic    8 bytes  "MOLVAEDS"
//! hlen     u64      header length
//! header   hlen     JSON `CacheHeader`
//! records  train then test, each:
//!          u16 smiles length, smiles bytes, 137 graph bytes, 4 × f64 properties
//! ```

use std::io::{self, Read, Write};

use molvae_chem::{parse_smiles, compute_properties, ConditionVector, PropertyTables, PropertyVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{decode, flatten, GraphMatrix, FLAT_DIM};
use crate::pipeline::ingest::Accepted;
use crate::pipeline::PipelineError;

pub const CACHE_MAGIC: &[u8; 8] = b"MOLVAEDS";
pub const CACHE_VERSION: u32 = 1;
const GRAPH_BYTES: usize = 137;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub canonical_smiles: String,
    pub graph: GraphMatrix,
    pub properties: PropertyVector,
}

impl DatasetRecord {
    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.graph)
    }

    /// Scaled, bucketed condition values of all four properties.
    pub fn conditions(&self) -> [f64; 4] {
        ConditionVector::bucket(&self.properties, [true; 4]).values
    }
}

impl From<Accepted> for DatasetRecord {
    fn from(a: Accepted) -> Self {
        DatasetRecord {
            canonical_smiles: a.canonical_smiles,
            graph: a.graph,
            properties: a.properties,
        }
    }
}

/// Keeps `n` records chosen by a seeded shuffle, in their original order.
pub fn subsample<T>(records: Vec<T>, n: usize, seed: u64) -> Vec<T> {
    if n >= records.len() {
        return records;
    }
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut keep = vec![false; records.len()];
    for &i in &idx[..n] {
        keep[i] = true;
    }
    records
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Seeded shuffle, then the first `⌊8n/10⌋` records train and the rest test.
pub fn split<T>(mut records: Vec<T>, seed: u64) -> (Vec<T>, Vec<T>) {
    records.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = records.len() * 8 / 10;
    let test = records.split_off(n_train);
    (records, test)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub version: u32,
    pub seed: u64,
    pub source: String,
    pub train: usize,
    pub test: usize,
    pub flat_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: CacheHeader,
    pub train: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn new(source: &str, seed: u64, train: Vec<DatasetRecord>, test: Vec<DatasetRecord>) -> Self {
        Dataset {
            header: CacheHeader {
                version: CACHE_VERSION,
                seed,
                source: source.to_string(),
                train: train.len(),
                test: test.len(),
                flat_dim: FLAT_DIM,
            },
            train,
            test,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &DatasetRecord> {
        self.train.iter().chain(&self.test)
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = serde_json::to_vec(&self.header).map_err(io::Error::other)?;
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        for r in self.all() {
            let s = r.canonical_smiles.as_bytes();
            w.write_all(&(s.len() as u16).to_le_bytes())?;
            w.write_all(s)?;
            w.write_all(&r.graph.to_bytes())?;
            let p = &r.properties;
            for x in [p.clogp, p.cmr, p.qed, p.sas] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out).expect("writing to memory");
        out
    }

    /// Reads a cache and spot-checks up to `verify` records: the graph must
    /// decode to the stored SMILES and recomputed properties must agree to
    /// 1e-9 (summation order follows atom order).
    pub fn read<R: Read>(mut r: R, tables: &PropertyTables, verify: usize) -> Result<Dataset, PipelineError> {
        let corrupt = |m: &str| PipelineError::Format(format!("dataset cache: {m}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut header)?;
        let header: CacheHeader = serde_json::from_slice(&header).map_err(|e| corrupt(&e.to_string()))?;
        if header.version != CACHE_VERSION || header.flat_dim != FLAT_DIM {
            return Err(corrupt("unsupported version or layout"));
        }
        let mut records = Vec::with_capacity(header.train + header.test);
        for _ in 0..header.train + header.test {
            let mut n = [0u8; 2];
            r.read_exact(&mut n)?;
            let mut s = vec![0u8; u16::from_le_bytes(n) as usize];
            r.read_exact(&mut s)?;
            let mut g = [0u8; GRAPH_BYTES];
            r.read_exact(&mut g)?;
            let mut p = [0.0; 4];
            for x in &mut p {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                *x = f64::from_le_bytes(b);
            }
            records.push(DatasetRecord {
                canonical_smiles: String::from_utf8(s).map_err(|_| corrupt("non-UTF-8 SMILES"))?,
                graph: GraphMatrix::from_bytes(&g).ok_or_else(|| corrupt("bad graph bytes"))?,
                properties: PropertyVector {
                    clogp: p[0],
                    cmr: p[1],
                    qed: p[2],
                    sas: p[3],
                },
            });
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(corrupt("trailing bytes"));
        }
        let step = (records.len() / verify.max(1)).max(1);
        for rec in records.iter().step_by(step).take(verify) {
            let mol = decode(&rec.graph).map_err(|e| corrupt(&format!("{}: {e}", rec.canonical_smiles)))?;
            if molvae_chem::write_smiles(&mol) != rec.canonical_smiles {
                return Err(corrupt(&format!("{} does not match its graph", rec.canonical_smiles)));
            }
            let parsed = parse_smiles(&rec.canonical_smiles).map_err(|e| corrupt(&e.to_string()))?;
            let p = compute_properties(&parsed, tables).map_err(|e| corrupt(&e.to_string()))?;
            let q = &rec.properties;
            let close = [(p.clogp, q.clogp), (p.cmr, q.cmr), (p.qed, q.qed), (p.sas, q.sas)]
                .iter()
                .all(|(a, b)| (a - b).abs() <= 1e-9);
            if !close {
                return Err(corrupt(&format!("{} properties differ from recomputation", rec.canonical_smiles)));
            }
        }
        let test = records.split_off(header.train);
        Ok(Dataset {
            header,
            train: records,
            test,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::ingest::{ingest, IngestOptions};

    #[test]
    fn split_ratio_and_determinism() {
        let (a, b) = split((0..10).collect::<Vec<_>>(), 3);
        assert_eq!((a.len(), b.len()), (8, 2));
        let (a2, b2) = split((0..10).collect::<Vec<_>>(), 3);
        assert_eq!((a.clone(), b.clone()), (a2, b2));
        let mut all: Vec<_> = a.into_iter().chain(b).collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        let big: Vec<u32> = (0..1000).collect();
        assert_ne!(split(big.clone(), 1).0, split(big, 2).0);
    }

    #[test]
    fn subsample_keeps_order() {
        let s = subsample((0..100).collect::<Vec<_>>(), 10, 9);
        assert_eq!(s.len(), 10);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, subsample((0..100).collect::<Vec<_>>(), 10, 9));
        assert_eq!(subsample(vec![1, 2], 5, 0), vec![1, 2]);
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let tables = PropertyTables::shared().unwrap();
        let text = "CC(=O)NCC(F)(F)Br\nc1ccccc1O\nC1CC1\nCCS(=O)(=O)N\nFC(F)(F)c1ccncc1\n";
        let r = ingest(text.as_bytes(), &IngestOptions::default(), tables).unwrap();
        let recs: Vec<DatasetRecord> = r.accepted.into_iter().map(Into::into).collect();
        let (train, test) = split(recs, 0);
        let ds = Dataset::new("inline", 0, train, test);
        let bytes = ds.to_bytes();
        let back = Dataset::read(&bytes[..], tables, 100).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_bytes(), bytes);

        let mut bad = bytes.clone();
        let last = bad.len() - 1;
        bad[last] ^= 0x40;
        assert!(Dataset::read(&bad[..], tables, 100).is_err());
        assert!(Dataset::read(&bytes[..bytes.len() - 3], tables, 100).is_err());
    }

    #[test]
    fn records_carry_bucketed_conditions() {
        let tables = PropertyTables::shared().unwrap();
        let r = ingest("CC(=O)NCC(F)(F)Br\n".as_bytes(), &IngestOptions::default(), tables).unwrap();
        let rec: DatasetRecord = r.accepted[0].clone().into();
        let c = rec.conditions();
        assert_eq!(c, ConditionVector::bucket(&rec.properties, [true; 4]).values);
        assert_eq!(rec.flat().iter().sum::<f64>(), 137.0);
    }
}
