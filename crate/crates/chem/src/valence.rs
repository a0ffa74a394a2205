//! Default-valence model, hydrogen perception for bare heavy-atom graphs and
//! the validity check applied to decoded structures.

use crate::canon;
use crate::element::Element;
use crate::error::{ChemError, Result};
use crate::kekule::{self, PiRole};
use crate::molecule::{Atom, Bond, BondOrder, Molecule};
use crate::rings;

/// True iff every atom's bonding (aromatic systems resolved to a localized
/// structure) plus its hydrogens equals an allowed valence of its element.
pub fn check_valence(mol: &Molecule) -> bool {
    validate(mol).is_ok()
}

/// Like [`check_valence`] but reports the first offending atom.
pub fn validate(mol: &Molecule) -> Result<()> {
    let cyclic = rings::cyclic_bonds(mol);
    for (bi, bond) in mol.bonds().iter().enumerate() {
        if bond.order == BondOrder::Aromatic {
            if !mol.atom(bond.begin).aromatic || !mol.atom(bond.end).aromatic {
                return Err(ChemError::Valence {
                    atom: bond.begin,
                    message: "aromatic bond between non-aromatic atoms".into(),
                });
            }
            if !cyclic[bi] {
                return Err(ChemError::Valence {
                    atom: bond.begin,
                    message: "aromatic bond outside a ring".into(),
                });
            }
        }
    }
    let mut roles = Vec::with_capacity(mol.atom_count());
    for (idx, atom) in mol.atoms().iter().enumerate() {
        if atom.aromatic {
            if !atom.element.can_be_aromatic() {
                return Err(ChemError::Valence {
                    atom: idx,
                    message: format!("{} cannot be aromatic", atom.element),
                });
            }
            if !mol
                .neighbors(idx)
                .iter()
                .any(|n| mol.bond(n.bond).order == BondOrder::Aromatic)
            {
                return Err(ChemError::Valence {
                    atom: idx,
                    message: "aromatic atom without aromatic bonds".into(),
                });
            }
            let role = kekule::role_with_known_h(mol, idx)
                .map_err(|message| ChemError::Valence { atom: idx, message })?;
            roles.push(role);
        } else {
            let used = mol.sigma_valence(idx) + atom.implicit_h;
            if !atom.element.valences().contains(&used) {
                return Err(ChemError::Valence {
                    atom: idx,
                    message: format!("{} with valence {used}", atom.element),
                });
            }
            roles.push(PiRole::Aliphatic);
        }
    }
    if roles.iter().any(|r| *r == PiRole::Needs) && kekule::kekulize(mol, &roles).is_none() {
        return Err(ChemError::Valence {
            atom: roles.iter().position(|r| *r == PiRole::Needs).unwrap_or(0),
            message: "aromatic system has no valid localized structure".into(),
        });
    }
    Ok(())
}

/// Builds a molecule from heavy atoms and bonds alone, deriving aromatic
/// flags from aromatic bonds and hydrogen counts from the default valences.
///
/// Aromatic nitrogens with exactly two aromatic bonds may be either
/// pyridine-like or pyrrole-like; the hydrogen placement is fixed by the same
/// canonical rule used when writing canonical SMILES.
pub fn from_heavy_graph(elements: &[Element], bonds: &[Bond]) -> Result<Molecule> {
    let mut aromatic = vec![false; elements.len()];
    for b in bonds {
        if b.order == BondOrder::Aromatic {
            aromatic[b.begin] = true;
            aromatic[b.end] = true;
        }
    }
    let atoms = elements
        .iter()
        .zip(&aromatic)
        .map(|(&e, &ar)| Atom::new(e, ar, 0))
        .collect();
    let mut mol = Molecule::new(atoms, bonds.to_vec())?;
    for idx in 0..mol.atom_count() {
        let atom = *mol.atom(idx);
        let sigma = mol.sigma_valence(idx);
        if atom.aromatic {
            if !atom.element.can_be_aromatic() {
                return Err(ChemError::Valence {
                    atom: idx,
                    message: format!("{} cannot be aromatic", atom.element),
                });
            }
            let (_, h) = kekule::role_with_implied_h(atom.element, sigma)
                .map_err(|message| ChemError::Valence { atom: idx, message })?;
            mol.set_implicit_h(idx, h);
        } else {
            let target = atom.element.target_valence(sigma).ok_or(ChemError::Valence {
                atom: idx,
                message: format!("{} with valence {sigma}", atom.element),
            })?;
            mol.set_implicit_h(idx, target - sigma);
        }
    }
    let mol = canon::normalize_aromatic_hydrogens(&mol).ok_or(ChemError::Valence {
        atom: 0,
        message: "aromatic system has no valid localized structure".into(),
    })?;
    validate(&mol)?;
    Ok(mol)
}

/// Aromatic nitrogen whose hydrogen is a tautomeric choice.
pub(crate) fn is_flexible_nitrogen(mol: &Molecule, atom: usize) -> bool {
    let a = mol.atom(atom);
    a.element == Element::N
        && a.aromatic
        && a.implicit_h <= 1
        && mol.degree(atom) == 2
        && mol
            .neighbors(atom)
            .iter()
            .all(|n| mol.bond(n.bond).order == BondOrder::Aromatic)
}
