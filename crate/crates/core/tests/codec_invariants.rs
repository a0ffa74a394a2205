use std::collections::{HashMap, HashSet};

use molvae_chem::{parse_smiles, write_smiles, PropertyTables};
use molvae_core::codec::{decode, encode, flatten, unflatten, GraphMatrix, MAX_ATOMS, PAIRS};
use molvae_core::pipeline::{ingest, subsample, IngestOptions};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../../../data/zinc_le16.smi");

fn sample_corpus(n: usize, seed: u64) -> Vec<String> {
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty()).collect();
    let picked = subsample(lines, n * 2, seed).join("\n");
    let r = ingest(picked.as_bytes(), &IngestOptions::default(), PropertyTables::shared().unwrap()).unwrap();
    r.accepted.into_iter().take(n).map(|a| a.canonical_smiles).collect()
}

#[test]
fn encoding_ignores_input_atom_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in sample_corpus(300, 1) {
        let mol = parse_smiles(&s).unwrap();
        let g = encode(&mol).unwrap();
        let mut perm: Vec<usize> = (0..mol.atom_count()).collect();
        perm.shuffle(&mut rng);
        let shuffled = mol.permuted(&perm).unwrap();
        assert_eq!(encode(&shuffled).unwrap(), g, "{s}");
    }
}

#[test]
fn distinct_molecules_get_distinct_matrices() {
    let mut seen: HashMap<GraphMatrix, String> = HashMap::new();
    for s in sample_corpus(1000, 2) {
        let g = encode(&parse_smiles(&s).unwrap()).unwrap();
        if let Some(prev) = seen.insert(g, s.clone()) {
            assert_eq!(prev, s, "two molecules share one matrix");
        }
    }
    assert!(seen.len() >= 990);
}

#[test]
fn round_trip_through_flat_vectors() {
    for s in sample_corpus(500, 3) {
        let g = encode(&parse_smiles(&s).unwrap()).unwrap();
        let flat = flatten(&g);
        assert_eq!(flat.len(), 760);
        assert_eq!(flat.iter().sum::<f64>(), 137.0);
        let back = unflatten(&flat).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_smiles(&decode(&back).unwrap()), s);
    }
}

#[test]
fn decode_never_panics_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut outcomes = HashSet::new();
    for _ in 0..20_000 {
        let length = rng.random_range(1..=MAX_ATOMS as u8);
        let mut atoms = [0u8; MAX_ATOMS];
        for a in &mut atoms {
            *a = rng.random_range(0..9);
        }
        let density = rng.random_range(0.0..0.3);
        let mut bonds = [0u8; PAIRS];
        for b in &mut bonds {
            if rng.random_bool(density) {
                *b = rng.random_range(1..5);
            }
        }
        let g = GraphMatrix { length, atoms, bonds };
        outcomes.insert(match decode(&g) {
            Ok(_) => "valid",
            Err(r) => r.as_str(),
        });
    }
    assert!(outcomes.contains("valid") && outcomes.contains("disconnected"));
    assert!(outcomes.contains("pad-inconsistency") && outcomes.contains("valence"));
}
