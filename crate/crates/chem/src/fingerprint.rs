//! Morgan (extended-connectivity) fingerprints.
//!
//! Environment identifiers follow the widely used 32-bit boost-style hash
//! combination, so sparse counts are interchangeable with fragment tables
//! keyed by the same identifiers.

use std::collections::BTreeMap;

use crate::error::{ChemError, Result};
use crate::molecule::Molecule;
use crate::rings;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_BITS: usize = 2048;

fn hash_combine(seed: u32, value: u32) -> u32 {
    seed ^ value
        .wrapping_add(0x9e37_79b9)
        .wrapping_add(seed << 6)
        .wrapping_add(seed >> 2)
}

fn hash_slice(values: &[u32]) -> u32 {
    values.iter().fold(0, |s, &v| hash_combine(s, v))
}

fn initial_invariants(mol: &Molecule) -> Vec<u32> {
    let cyclic = rings::cyclic_bonds(mol);
    (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            let mut parts = vec![
                a.element.atomic_number() as u32,
                mol.total_degree(i) as u32,
                mol.total_h(i) as u32,
                0,
                0,
            ];
            if mol.neighbors(i).iter().any(|n| cyclic[n.bond]) {
                parts.push(1);
            }
            hash_slice(&parts)
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct BondSet(Vec<u64>);

impl BondSet {
    fn new(n: usize) -> Self {
        BondSet(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn union(&mut self, other: &BondSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

/// Unfolded environment identifiers with occurrence counts for radii
/// `0..=radius`. Duplicate environments (same bond set) are counted once.
pub fn morgan_counts(mol: &Molecule, radius: usize) -> BTreeMap<u32, u32> {
    let n = mol.atom_count();
    let mut inv = initial_invariants(mol);
    let mut counts = BTreeMap::new();
    for &v in &inv {
        *counts.entry(v).or_insert(0) += 1;
    }
    let mut envs: Vec<BondSet> = vec![BondSet::new(mol.bond_count()); n];
    let mut dead = vec![false; n];
    let mut seen: Vec<BondSet> = Vec::new();
    for layer in 0..radius {
        let mut next = vec![0u32; n];
        let mut round_envs = envs.clone();
        let mut round: Vec<(BondSet, u32, usize)> = Vec::new();
        for i in 0..n {
            if dead[i] {
                continue;
            }
            if mol.degree(i) == 0 {
                dead[i] = true;
                continue;
            }
            let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(mol.degree(i));
            for nb in mol.neighbors(i) {
                round_envs[i].set(nb.bond);
                let other = envs[nb.atom].clone();
                round_envs[i].union(&other);
                pairs.push((mol.bond(nb.bond).order.type_code(), inv[nb.atom]));
            }
            pairs.sort_unstable();
            let mut v = hash_combine(layer as u32, inv[i]);
            for (bt, ni) in pairs {
                v = hash_combine(v, hash_combine(hash_combine(0, bt), ni));
            }
            next[i] = v;
            round.push((round_envs[i].clone(), v, i));
        }
        round.sort();
        for (env, v, i) in round {
            if seen.contains(&env) {
                dead[i] = true;
            } else {
                *counts.entry(v).or_insert(0) += 1;
                seen.push(env);
            }
        }
        inv = next;
        envs = round_envs;
    }
    counts
}

/// Fixed-length folded bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: usize,
}

impl Fingerprint {
    pub fn empty(nbits: usize, radius: usize) -> Self {
        Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        }
    }

    pub fn from_bits(nbits: usize, radius: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::empty(nbits, radius);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }
}

/// Morgan fingerprint folded to `nbits` bits.
pub fn morgan_fingerprint(mol: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    assert!(nbits > 0, "fingerprint length must be positive");
    Fingerprint::from_bits(
        nbits,
        radius,
        morgan_counts(mol, radius)
            .keys()
            .map(|&id| id as usize % nbits),
    )
}

/// Jaccard similarity of set bits; 1.0 when both fingerprints are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.nbits != b.nbits {
        return Err(ChemError::LengthMismatch {
            left: a.nbits,
            right: b.nbits,
        });
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    })
}
