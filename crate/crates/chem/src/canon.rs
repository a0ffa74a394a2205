//! Canonical atom ranking by iterative neighbourhood refinement.
//!
//! Initial classes come from (heavy degree, atomic number, hydrogen count,
//! aromaticity, ring membership). Classes are refined with the sorted ranks
//! and bond orders of neighbours until stable; remaining ties are broken by
//! promoting one atom of the lowest tied class and refining again.

use crate::kekule::{self, PiRole};
use crate::molecule::Molecule;
use crate::rings;
use crate::valence::is_flexible_nitrogen;

type Invariant = (usize, u8, usize, bool, bool);

fn atom_invariants(mol: &Molecule, mask_h: &[bool]) -> Vec<Invariant> {
    let cyclic = rings::cyclic_bonds(mol);
    (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            let h = if mask_h[i] { usize::MAX } else { mol.total_h(i) };
            let in_ring = mol.neighbors(i).iter().any(|n| cyclic[n.bond]);
            (mol.heavy_degree(i), a.element.atomic_number(), h, a.aromatic, in_ring)
        })
        .collect()
}

fn dense_rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m + 1)
}

fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|n| (ranks[n.atom], mol.bond(n.bond).order as u8))
                    .collect();
                nbrs.sort_unstable();
                (ranks[i], nbrs)
            })
            .collect();
        let next = dense_rank(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

/// Graph symmetry classes: atoms sharing a class are indistinguishable by
/// neighbourhood refinement.
pub fn symmetry_classes(mol: &Molecule) -> Vec<usize> {
    let mask = vec![false; mol.atom_count()];
    refine(mol, dense_rank(&atom_invariants(mol, &mask)))
}

fn ranks_with_mask(mol: &Molecule, mask: &[bool]) -> Vec<usize> {
    let mut ranks = refine(mol, dense_rank(&atom_invariants(mol, mask)));
    let n = mol.atom_count();
    while class_count(&ranks) < n {
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).expect("a tied class exists");
        let chosen = (0..n).find(|&i| ranks[i] == tied).expect("class member");
        let keys: Vec<(usize, bool)> = (0..n)
            .map(|i| (ranks[i], ranks[i] == tied && i != chosen))
            .collect();
        ranks = refine(mol, dense_rank(&keys));
    }
    ranks
}

/// Unique canonical rank of every atom (a permutation of `0..n`).
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    ranks_with_mask(mol, &vec![false; mol.atom_count()])
}

/// Re-derives the hydrogen placement on pyrrole/pyridine-type aromatic
/// nitrogens so that tautomeric inputs share one representation.
///
/// Nitrogens are visited from highest to lowest canonical rank (ranks computed
/// with their hydrogens masked); each is made pyridine-like when a localized
/// structure still exists, otherwise it keeps a hydrogen. Returns `None` when
/// no localized structure exists at all.
pub(crate) fn normalize_aromatic_hydrogens(mol: &Molecule) -> Option<Molecule> {
    let flexible: Vec<usize> = (0..mol.atom_count())
        .filter(|&i| is_flexible_nitrogen(mol, i))
        .collect();
    if flexible.is_empty() {
        return Some(mol.clone());
    }
    let mut mask = vec![false; mol.atom_count()];
    for &i in &flexible {
        mask[i] = true;
    }
    let ranks = ranks_with_mask(mol, &mask);
    let mut roles: Vec<PiRole> = (0..mol.atom_count())
        .map(|i| {
            if mask[i] {
                Ok(PiRole::Optional)
            } else {
                kekule::role_with_known_h(mol, i)
            }
        })
        .collect::<Result<_, _>>()
        .ok()?;
    kekule::kekulize(mol, &roles)?;
    let mut order = flexible.clone();
    order.sort_by_key(|&i| std::cmp::Reverse(ranks[i]));
    for i in order {
        roles[i] = PiRole::Needs;
        if kekule::kekulize(mol, &roles).is_none() {
            roles[i] = PiRole::Forbidden;
        }
    }
    let mut out = mol.clone();
    for &i in &flexible {
        out.set_implicit_h(i, u8::from(roles[i] == PiRole::Forbidden));
    }
    Some(out)
}
