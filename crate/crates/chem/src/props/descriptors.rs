//! Drug-likeness descriptors feeding the QED desirability functions.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::molecule::Molecule;
use crate::pattern::{Pattern, Target};
use crate::rings;

use super::tables::PropertyTables;
use super::tpsa;

const DONOR: &str = "[N&!H0&v3,N&!H0&+1&v4,O&H1&+0,S&H1&+0,n&H1&+0]";
const ROTATABLE: &str = "[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])&!$([CD3](=[N,O,S])-!@[#7,O,S!D1])&!$([#7,O,S!D1]-!@[CD3]=[N,O,S])&!$([CD3](=[N+])-!@[#7!D1])&!$([#7!D1]-!@[CD3]=[N+])]-,:;!@[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])]";
const ALIPHATIC_RING_ATOM: &str = "[$([A;R][!a])]";

struct FixedPatterns {
    donor: Pattern,
    rotatable: Pattern,
    aliphatic_ring_atom: Pattern,
}

fn fixed() -> &'static FixedPatterns {
    static P: OnceLock<FixedPatterns> = OnceLock::new();
    P.get_or_init(|| FixedPatterns {
        donor: Pattern::parse(DONOR).expect("donor pattern"),
        rotatable: Pattern::parse(ROTATABLE).expect("rotatable pattern"),
        aliphatic_ring_atom: Pattern::parse(ALIPHATIC_RING_ATOM).expect("ring pattern"),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub molecular_weight: f64,
    pub h_bond_acceptors: usize,
    pub h_bond_donors: usize,
    pub polar_surface_area: f64,
    pub rotatable_bonds: usize,
    pub aromatic_rings: usize,
    pub structural_alerts: usize,
}

pub fn descriptors(mol: &Molecule, tables: &PropertyTables) -> Result<DescriptorSet> {
    let target = Target::new(mol);
    let ring_info = rings::perceive_rings(mol);
    let fixed = fixed();
    let acceptors = tables
        .acceptors
        .iter()
        .map(|p| p.count_matches(&target))
        .sum();
    let alerts = tables
        .alerts
        .iter()
        .filter(|p| p.has_match(&target))
        .count();
    Ok(DescriptorSet {
        molecular_weight: mol.molecular_weight(),
        h_bond_acceptors: acceptors,
        h_bond_donors: fixed.donor.count_matches(&target),
        polar_surface_area: tpsa::tpsa(mol, &ring_info, &tables.tpsa),
        rotatable_bonds: fixed.rotatable.count_matches(&target),
        aromatic_rings: aromatic_ring_count(mol, &fixed.aliphatic_ring_atom.match_roots(&target)),
        structural_alerts: alerts,
    })
}

/// Independent cycles left after deleting aliphatic ring atoms that carry a
/// non-aromatic neighbour.
fn aromatic_ring_count(mol: &Molecule, deleted: &[bool]) -> usize {
    let kept: Vec<usize> = (0..mol.atom_count()).filter(|&a| !deleted[a]).collect();
    let edges = mol
        .bonds()
        .iter()
        .filter(|b| !deleted[b.begin] && !deleted[b.end])
        .count();
    let mut seen = vec![false; mol.atom_count()];
    let mut components = 0;
    for &start in &kept {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(a) = stack.pop() {
            for n in mol.neighbors(a) {
                if !deleted[n.atom] && !seen[n.atom] {
                    seen[n.atom] = true;
                    stack.push(n.atom);
                }
            }
        }
    }
    (edges + components).saturating_sub(kept.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn d(s: &str) -> DescriptorSet {
        descriptors(&parse_smiles(s).unwrap(), PropertyTables::shared().unwrap()).unwrap()
    }

    #[test]
    fn methane() {
        let x = d("C");
        assert!((x.molecular_weight - 16.043).abs() < 1e-3);
        assert_eq!(
            (x.h_bond_acceptors, x.h_bond_donors, x.rotatable_bonds, x.aromatic_rings, x.structural_alerts),
            (0, 0, 0, 0, 0)
        );
        assert_eq!(x.polar_surface_area, 0.0);
    }

    #[test]
    fn benzene() {
        let x = d("c1ccccc1");
        assert_eq!(x.aromatic_rings, 1);
        assert_eq!(x.rotatable_bonds, 0);
    }

    #[test]
    fn cyclohexylbenzene_counts_one_aromatic_ring() {
        assert_eq!(d("C1CCCCC1c1ccccc1").aromatic_rings, 1);
        assert_eq!(d("c1ccc2ccccc2c1").aromatic_rings, 2);
    }

    #[test]
    fn acetamide_example() {
        let x = d("CC(=O)NCC(F)(F)Br");
        assert_eq!(x.h_bond_donors, 1);
        assert_eq!(x.rotatable_bonds, 2);
        assert!((x.polar_surface_area - 29.10).abs() < 1e-9);
    }
}
