use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{ChemError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Localized bond order, counting an aromatic bond as a sigma bond only.
    pub fn sigma_order(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Bond order with aromatic bonds counted as 1.5.
    pub fn order(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    /// Integer bond-type code used by the circular fingerprint hash.
    pub(crate) fn type_code(self) -> u32 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub implicit_h: u8,
}

impl Atom {
    pub fn new(element: Element, aromatic: bool, implicit_h: u8) -> Self {
        Atom {
            element,
            aromatic,
            implicit_h,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn new(begin: usize, end: usize, order: BondOrder) -> Self {
        Bond { begin, end, order }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub atom: usize,
    pub bond: usize,
}

/// Undirected labelled molecular graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule> {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (idx, bond) in bonds.iter().enumerate() {
            if bond.begin >= atoms.len() || bond.end >= atoms.len() {
                return Err(ChemError::Graph(format!("bond {idx} references a missing atom")));
            }
            if bond.begin == bond.end {
                return Err(ChemError::Graph(format!("bond {idx} is a self-loop")));
            }
            if adjacency[bond.begin]
                .iter()
                .any(|n: &Neighbor| n.atom == bond.end)
            {
                return Err(ChemError::Graph(format!(
                    "duplicate bond between atoms {} and {}",
                    bond.begin, bond.end
                )));
            }
            adjacency[bond.begin].push(Neighbor {
                atom: bond.end,
                bond: idx,
            });
            adjacency[bond.end].push(Neighbor {
                atom: bond.begin,
                bond: idx,
            });
        }
        Ok(Molecule {
            atoms,
            bonds,
            adjacency,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, idx: usize) -> &Atom {
        &self.atoms[idx]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, idx: usize) -> &Bond {
        &self.bonds[idx]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    pub fn neighbors(&self, atom: usize) -> &[Neighbor] {
        &self.adjacency[atom]
    }

    /// Number of explicit neighbours (including explicit hydrogens).
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|n| self.atoms[n.atom].element != Element::H)
            .count()
    }

    /// Implicit plus explicit hydrogen count.
    pub fn total_h(&self, atom: usize) -> usize {
        self.atoms[atom].implicit_h as usize
            + self.adjacency[atom]
                .iter()
                .filter(|n| self.atoms[n.atom].element == Element::H)
                .count()
    }

    /// Explicit connections plus implicit hydrogens.
    pub fn total_degree(&self, atom: usize) -> usize {
        self.degree(atom) + self.atoms[atom].implicit_h as usize
    }

    /// Sum of localized bond orders, aromatic bonds counted once.
    pub fn sigma_valence(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|n| self.bonds[n.bond].order.sigma_order())
            .sum()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|n| n.atom == b).map(|n| n.bond)
    }

    pub fn is_connected(&self) -> bool {
        self.atoms.is_empty() || self.component_count() == 1
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.atoms.len()];
        let mut components = 0;
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(a) = queue.pop_front() {
                for n in &self.adjacency[a] {
                    if !seen[n.atom] {
                        seen[n.atom] = true;
                        queue.push_back(n.atom);
                    }
                }
            }
        }
        components
    }

    /// Returns the molecule with atoms relabelled so that old atom `i` becomes
    /// new atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Molecule> {
        if perm.len() != self.atoms.len() {
            return Err(ChemError::Graph("permutation length mismatch".into()));
        }
        let mut atoms = vec![None; self.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            if new >= atoms.len() || atoms[new].is_some() {
                return Err(ChemError::Graph("not a permutation".into()));
            }
            atoms[new] = Some(self.atoms[old]);
        }
        let atoms = atoms.into_iter().map(Option::unwrap).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(perm[b.begin], perm[b.end], b.order))
            .collect();
        Molecule::new(atoms, bonds)
    }

    /// Copy of the molecule with every implicit hydrogen turned into an
    /// explicit `H` atom. Heavy atoms keep their original indices.
    pub fn with_explicit_hydrogens(&self) -> Molecule {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.element, a.aromatic, 0))
            .collect();
        let mut bonds = self.bonds.clone();
        for (idx, atom) in self.atoms.iter().enumerate() {
            for _ in 0..atom.implicit_h {
                atoms.push(Atom::new(Element::H, false, 0));
                bonds.push(Bond::new(idx, atoms.len() - 1, BondOrder::Single));
            }
        }
        Molecule::new(atoms, bonds).expect("hydrogen expansion preserves graph validity")
    }

    /// Replaces the hydrogen counts; used after valence perception.
    pub(crate) fn set_implicit_h(&mut self, atom: usize, count: u8) {
        self.atoms[atom].implicit_h = count;
    }

    pub(crate) fn set_aromatic(&mut self, atom: usize, aromatic: bool) {
        self.atoms[atom].aromatic = aromatic;
    }

    pub(crate) fn set_bond_order(&mut self, bond: usize, order: BondOrder) {
        self.bonds[bond].order = order;
    }

    /// Molecular weight including implicit hydrogens.
    pub fn molecular_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.element.atomic_weight() + a.implicit_h as f64 * Element::H.atomic_weight())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ethanol() -> Molecule {
        Molecule::new(
            vec![
                Atom::new(Element::C, false, 3),
                Atom::new(Element::C, false, 2),
                Atom::new(Element::O, false, 1),
            ],
            vec![
                Bond::new(0, 1, BondOrder::Single),
                Bond::new(1, 2, BondOrder::Single),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_and_self_bonds() {
        let atoms = vec![Atom::new(Element::C, false, 3); 2];
        assert!(Molecule::new(
            atoms.clone(),
            vec![Bond::new(0, 1, BondOrder::Single), Bond::new(1, 0, BondOrder::Double)]
        )
        .is_err());
        assert!(Molecule::new(atoms, vec![Bond::new(1, 1, BondOrder::Single)]).is_err());
    }

    #[test]
    fn explicit_hydrogens_keep_heavy_indices() {
        let m = ethanol().with_explicit_hydrogens();
        assert_eq!(m.atom_count(), 9);
        assert_eq!(m.heavy_atom_count(), 3);
        assert_eq!(m.total_h(0), 3);
        assert_eq!(m.degree(0), 4);
        assert_eq!(m.heavy_degree(0), 1);
    }

    #[test]
    fn permutation_preserves_structure() {
        let m = ethanol();
        let p = m.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.atom(2).element, Element::C);
        assert_eq!(p.atom(1).element, Element::O);
        assert!(p.bond_between(2, 0).is_some());
        assert!(p.bond_between(0, 1).is_some());
        assert!((m.molecular_weight() - 46.069).abs() < 1e-9);
    }
}
