//! Assignment of localized double bonds to aromatic systems.

use crate::element::Element;
use crate::molecule::{BondOrder, Molecule};

/// Participation of an atom in the aromatic double-bond assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PiRole {
    /// Not aromatic.
    Aliphatic,
    /// Must receive exactly one aromatic double bond.
    Needs,
    /// Must not receive an aromatic double bond (lone-pair donor or
    /// exocyclic double bond).
    Forbidden,
    /// Pyrrole/pyridine-type nitrogen: either takes a double bond or
    /// carries one hydrogen instead.
    Optional,
}

/// Role of an aromatic atom whose hydrogen count is known.
pub(crate) fn role_with_known_h(mol: &Molecule, atom: usize) -> Result<PiRole, String> {
    let a = mol.atom(atom);
    if !a.aromatic {
        return Ok(PiRole::Aliphatic);
    }
    let used = mol.sigma_valence(atom) + a.implicit_h;
    let target = a
        .element
        .target_valence(used)
        .ok_or_else(|| format!("{} exceeds its maximum valence", a.element))?;
    match target - used {
        0 => Ok(PiRole::Forbidden),
        1 => Ok(PiRole::Needs),
        _ => Err(format!("aromatic {} has too few bonds", a.element)),
    }
}

/// Role and hydrogen count of an aromatic atom whose hydrogens are implied
/// (organic-subset SMILES atoms). Returns `(role, implicit_h)`.
pub(crate) fn role_with_implied_h(element: Element, sigma: u8) -> Result<(PiRole, u8), String> {
    let target = element
        .target_valence(sigma)
        .ok_or_else(|| format!("{element} exceeds its maximum valence"))?;
    let free = target - sigma;
    if free == 0 {
        Ok((PiRole::Forbidden, 0))
    } else {
        Ok((PiRole::Needs, free - 1))
    }
}

/// Searches for a perfect double-bond assignment covering every `Needs` atom.
/// `Optional` atoms may be used as partners. Returns the partner of each atom.
pub(crate) fn kekulize(mol: &Molecule, roles: &[PiRole]) -> Option<Vec<Option<usize>>> {
    let mut partner = vec![None; mol.atom_count()];
    let mut budget = 200_000usize;
    if search(mol, roles, &mut partner, &mut budget) {
        Some(partner)
    } else {
        None
    }
}

fn eligible(mol: &Molecule, roles: &[PiRole], partner: &[Option<usize>], atom: usize) -> Vec<usize> {
    let mut out: Vec<usize> = mol
        .neighbors(atom)
        .iter()
        .filter(|n| mol.bond(n.bond).order == BondOrder::Aromatic)
        .filter(|n| partner[n.atom].is_none())
        .filter(|n| matches!(roles[n.atom], PiRole::Needs | PiRole::Optional))
        .map(|n| n.atom)
        .collect();
    // prefer atoms that must be matched anyway
    out.sort_by_key(|&a| (roles[a] != PiRole::Needs, a));
    out
}

fn search(
    mol: &Molecule,
    roles: &[PiRole],
    partner: &mut Vec<Option<usize>>,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut best: Option<(usize, Vec<usize>)> = None;
    for atom in 0..mol.atom_count() {
        if roles[atom] != PiRole::Needs || partner[atom].is_some() {
            continue;
        }
        let options = eligible(mol, roles, partner, atom);
        if options.is_empty() {
            return false;
        }
        if best.as_ref().is_none_or(|(_, o)| options.len() < o.len()) {
            best = Some((atom, options));
        }
    }
    let Some((atom, options)) = best else {
        return true;
    };
    for other in options {
        partner[atom] = Some(other);
        partner[other] = Some(atom);
        if search(mol, roles, partner, budget) {
            return true;
        }
        partner[atom] = None;
        partner[other] = None;
    }
    false
}
