//! One-hot graph matrix codec.
//!
//! Flat layout (760 values):
//!
//! | offset | width   | block                                              |
//! |--------|---------|----------------------------------------------------|
//! | 0      | 16      | length, one-hot over 1..=16                        |
//! | 16     | 16 × 9  | atom rows, one-hot over C N O F Si S Cl Br PAD      |
//! | 160    | 120 × 5 | upper-triangle pairs, one-hot over none - = # :     |
//!
//! Pairs are ordered row-major over `(i, j)` with `i < j`. Atoms appear in
//! canonical SMILES order.

use std::fmt;

use molvae_chem::{canonical_form, from_heavy_graph, Bond, BondOrder, Element, Molecule};
use thiserror::Error;

pub const MAX_ATOMS: usize = 16;
pub const ATOM_CLASSES: usize = 9;
pub const BOND_CLASSES: usize = 5;
pub const PAIRS: usize = MAX_ATOMS * (MAX_ATOMS - 1) / 2;
pub const PAD: u8 = 8;
pub const NO_BOND: u8 = 0;

pub const LENGTH_OFFSET: usize = 0;
pub const ANNOTATION_OFFSET: usize = MAX_ATOMS;
pub const ADJACENCY_OFFSET: usize = ANNOTATION_OFFSET + MAX_ATOMS * ATOM_CLASSES;
pub const FLAT_DIM: usize = ADJACENCY_OFFSET + PAIRS * BOND_CLASSES;

/// Hot entries in a hard one-hot flat vector: one per row.
pub const HOT_ROWS: usize = 1 + MAX_ATOMS + PAIRS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("molecule has {0} heavy atoms, at most {MAX_ATOMS} fit")]
    Oversize(usize),
    #[error("molecule has no atoms")]
    Empty,
    #[error("element {0} is outside the annotation vocabulary")]
    Vocabulary(String),
    #[error("flat vector has length {0}, expected {FLAT_DIM}")]
    Length(usize),
    #[error("flat vector has a non-finite or negative entry at {0}")]
    BadValue(usize),
}

/// Why a graph matrix does not describe a valid molecule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvalidReason {
    Disconnected,
    Valence,
    PadInconsistency,
}

impl InvalidReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::Disconnected => "disconnected",
            InvalidReason::Valence => "valence",
            InvalidReason::PadInconsistency => "pad-inconsistency",
        }
    }
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Segment widths of the flat layout, in order: one length segment, 16 atom
/// rows, 120 bond rows.
pub fn segments() -> Vec<usize> {
    let mut s = vec![MAX_ATOMS];
    s.extend(std::iter::repeat_n(ATOM_CLASSES, MAX_ATOMS));
    s.extend(std::iter::repeat_n(BOND_CLASSES, PAIRS));
    s
}

/// Index of the pair `(i, j)`, `i < j`, in the adjacency block.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < MAX_ATOMS);
    i * (2 * MAX_ATOMS - i - 1) / 2 + (j - i - 1)
}

/// Hard one-hot graph matrix stored as class indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphMatrix {
    /// Declared atom count, 1..=16.
    pub length: u8,
    /// Annotation class per row (`PAD` = 8).
    pub atoms: [u8; MAX_ATOMS],
    /// Bond class per upper-triangle pair (0 = none).
    pub bonds: [u8; PAIRS],
}

impl GraphMatrix {
    pub fn bond(&self, i: usize, j: usize) -> u8 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.bonds[pair_index(a, b)]
    }

    /// Compact byte form: length, 16 atom classes, 120 bond classes.
    pub fn to_bytes(&self) -> [u8; 1 + MAX_ATOMS + PAIRS] {
        let mut out = [0u8; 1 + MAX_ATOMS + PAIRS];
        out[0] = self.length;
        out[1..1 + MAX_ATOMS].copy_from_slice(&self.atoms);
        out[1 + MAX_ATOMS..].copy_from_slice(&self.bonds);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<GraphMatrix> {
        if bytes.len() != 1 + MAX_ATOMS + PAIRS {
            return None;
        }
        let length = bytes[0];
        if !(1..=MAX_ATOMS as u8).contains(&length) {
            return None;
        }
        let mut atoms = [0u8; MAX_ATOMS];
        atoms.copy_from_slice(&bytes[1..1 + MAX_ATOMS]);
        let mut bonds = [0u8; PAIRS];
        bonds.copy_from_slice(&bytes[1 + MAX_ATOMS..]);
        if atoms.iter().any(|&a| a as usize >= ATOM_CLASSES)
            || bonds.iter().any(|&b| b as usize >= BOND_CLASSES)
        {
            return None;
        }
        Some(GraphMatrix { length, atoms, bonds })
    }
}

fn bond_class(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

fn class_order(class: u8) -> BondOrder {
    match class {
        1 => BondOrder::Single,
        2 => BondOrder::Double,
        3 => BondOrder::Triple,
        _ => BondOrder::Aromatic,
    }
}

pub fn encode(mol: &Molecule) -> Result<GraphMatrix, CodecError> {
    let n = mol.atom_count();
    if n == 0 {
        return Err(CodecError::Empty);
    }
    if n > MAX_ATOMS {
        return Err(CodecError::Oversize(n));
    }
    let form = canonical_form(mol);
    let mut position = vec![0usize; n];
    let mut atoms = [PAD; MAX_ATOMS];
    for (k, &idx) in form.order.iter().enumerate() {
        position[idx] = k;
        let element = mol.atom(idx).element;
        atoms[k] = element
            .vocabulary_index()
            .ok_or_else(|| CodecError::Vocabulary(element.to_string()))? as u8;
    }
    let mut bonds = [NO_BOND; PAIRS];
    for b in mol.bonds() {
        let (i, j) = (position[b.begin], position[b.end]);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        bonds[pair_index(i, j)] = bond_class(b.order);
    }
    Ok(GraphMatrix {
        length: n as u8,
        atoms,
        bonds,
    })
}

pub fn flatten(g: &GraphMatrix) -> Vec<f64> {
    let mut v = vec![0.0; FLAT_DIM];
    flatten_into(g, &mut v);
    v
}

/// Writes the hard one-hot encoding of `g` into `out` (length `FLAT_DIM`).
pub fn flatten_into(g: &GraphMatrix, out: &mut [f64]) {
    assert_eq!(out.len(), FLAT_DIM);
    out.fill(0.0);
    out[LENGTH_OFFSET + g.length as usize - 1] = 1.0;
    for (row, &class) in g.atoms.iter().enumerate() {
        out[ANNOTATION_OFFSET + row * ATOM_CLASSES + class as usize] = 1.0;
    }
    for (pair, &class) in g.bonds.iter().enumerate() {
        out[ADJACENCY_OFFSET + pair * BOND_CLASSES + class as usize] = 1.0;
    }
}

/// First index of the largest value; ties go to the lowest index.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Per-row argmax of a (possibly soft) flat vector.
pub fn unflatten(v: &[f64]) -> Result<GraphMatrix, CodecError> {
    if v.len() != FLAT_DIM {
        return Err(CodecError::Length(v.len()));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(CodecError::BadValue(i));
    }
    let length = argmax(&v[LENGTH_OFFSET..LENGTH_OFFSET + MAX_ATOMS]) as u8 + 1;
    let mut atoms = [PAD; MAX_ATOMS];
    for (row, a) in atoms.iter_mut().enumerate() {
        let start = ANNOTATION_OFFSET + row * ATOM_CLASSES;
        *a = argmax(&v[start..start + ATOM_CLASSES]) as u8;
    }
    let mut bonds = [NO_BOND; PAIRS];
    for (pair, b) in bonds.iter_mut().enumerate() {
        let start = ADJACENCY_OFFSET + pair * BOND_CLASSES;
        *b = argmax(&v[start..start + BOND_CLASSES]) as u8;
    }
    Ok(GraphMatrix { length, atoms, bonds })
}

/// Reads the declared atoms and the bonds among them. Rows past the declared
/// length are ignored unless a bond reaches them from inside.
pub fn decode(g: &GraphMatrix) -> Result<Molecule, InvalidReason> {
    let n = g.length as usize;
    if n == 0 || n > MAX_ATOMS {
        return Err(InvalidReason::PadInconsistency);
    }
    if g.atoms[..n].contains(&PAD) {
        return Err(InvalidReason::PadInconsistency);
    }
    let mut bonds = Vec::new();
    for i in 0..MAX_ATOMS {
        for j in i + 1..MAX_ATOMS {
            let class = g.bonds[pair_index(i, j)];
            if class == NO_BOND {
                continue;
            }
            if j >= n {
                if i < n {
                    return Err(InvalidReason::PadInconsistency);
                }
                continue;
            }
            bonds.push(Bond::new(i, j, class_order(class)));
        }
    }
    if !connected(n, &bonds) {
        return Err(InvalidReason::Disconnected);
    }
    let elements: Vec<Element> = g.atoms[..n]
        .iter()
        .map(|&c| Element::VOCABULARY[c as usize])
        .collect();
    from_heavy_graph(&elements, &bonds).map_err(|_| InvalidReason::Valence)
}

fn connected(n: usize, bonds: &[Bond]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for b in bonds {
        let (a, c) = (find(&mut parent, b.begin), find(&mut parent, b.end));
        if a != c {
            parent[a] = c;
            components -= 1;
        }
    }
    components == 1
}
