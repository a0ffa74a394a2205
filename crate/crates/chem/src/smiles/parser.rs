use std::collections::BTreeMap;

use crate::aromaticity;
use crate::element::{atomic_number_of, Element};
use crate::error::{ChemError, Result};
use crate::kekule;
use crate::molecule::{Atom, Bond, BondOrder, Molecule};
use crate::valence;

#[derive(Clone, Copy, Debug)]
struct RawAtom {
    element: Element,
    aromatic: bool,
    /// Hydrogen count written inside brackets.
    bracket_h: Option<u8>,
    pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<(usize, usize, Option<BondSym>)>,
    rings: BTreeMap<u32, (usize, Option<BondSym>, usize)>,
}

/// Parses a SMILES string into a molecule with perceived hydrogens and
/// aromaticity. Stereo marks are accepted and ignored.
pub fn parse_smiles(text: &str) -> Result<Molecule> {
    if text.is_empty() {
        return Err(ChemError::Syntax {
            pos: 0,
            message: "empty input".into(),
        });
    }
    if let Some(pos) = text.bytes().position(|b| !b.is_ascii() || b.is_ascii_whitespace()) {
        return Err(ChemError::Syntax {
            pos,
            message: "unexpected character".into(),
        });
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.parse_chain()?;
    if let Some((_, &(_, _, pos))) = p.rings.iter().next() {
        return Err(ChemError::Syntax {
            pos,
            message: "unclosed ring".into(),
        });
    }
    p.build()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn syntax<T>(&self, message: &str) -> Result<T> {
        Err(ChemError::Syntax {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn parse_chain(&mut self) -> Result<()> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(Option<BondSym>, usize)> = None;
        let mut branches: Vec<usize> = Vec::new();
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return self.syntax("branch without a preceding atom");
                    };
                    if pending.is_some() {
                        return self.syntax("bond before branch");
                    }
                    branches.push(p);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return self.syntax("dangling bond");
                    }
                    let Some(p) = branches.pop() else {
                        return self.syntax("unbalanced parenthesis");
                    };
                    prev = Some(p);
                    self.pos += 1;
                    if self.peek() == Some(b'(') || self.peek() == Some(b')') {
                        continue;
                    }
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return self.syntax("consecutive bond symbols");
                    }
                    if prev.is_none() {
                        return self.syntax("bond without a preceding atom");
                    }
                    let sym = match c {
                        b'=' => BondSym::Double,
                        b'#' => BondSym::Triple,
                        b':' => BondSym::Aromatic,
                        _ => BondSym::Single,
                    };
                    pending = Some((Some(sym), self.pos));
                    self.pos += 1;
                }
                b'$' => return self.syntax("quadruple bonds are not supported"),
                b'.' => return Err(ChemError::Fragment { pos: self.pos }),
                b'+' => return Err(ChemError::Charge { pos: self.pos }),
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return self.syntax("ring closure without an atom");
                    };
                    let start = self.pos;
                    let label = self.ring_label()?;
                    let sym = pending.take().and_then(|(s, _)| s);
                    match self.rings.remove(&label) {
                        Some((other, other_sym, _)) => {
                            if other == p {
                                return self.syntax("ring closure to the same atom");
                            }
                            let sym = match (sym, other_sym) {
                                (Some(a), Some(b)) if a != b => {
                                    return self.syntax("conflicting ring-closure bonds")
                                }
                                (a, b) => a.or(b),
                            };
                            self.bonds.push((other, p, sym));
                        }
                        None => {
                            self.rings.insert(label, (p, sym, start));
                        }
                    }
                }
                _ => {
                    let atom = self.parse_atom()?;
                    if let Some(p) = prev {
                        let sym = pending.take().and_then(|(s, _)| s);
                        self.bonds.push((p, atom, sym));
                    } else if pending.is_some() {
                        return self.syntax("bond without a preceding atom");
                    }
                    prev = Some(atom);
                }
            }
        }
        if pending.is_some() {
            return self.syntax("dangling bond");
        }
        if !branches.is_empty() {
            return self.syntax("unclosed branch");
        }
        if self.atoms.is_empty() {
            return self.syntax("no atoms");
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u32> {
        match self.peek() {
            Some(b'%') => {
                let d = self.text.get(self.pos + 1..self.pos + 3);
                match d {
                    Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                        self.pos += 3;
                        Ok(((a - b'0') * 10 + (b - b'0')) as u32)
                    }
                    _ => self.syntax("malformed %nn ring closure"),
                }
            }
            Some(d) => {
                self.pos += 1;
                Ok((d - b'0') as u32)
            }
            None => self.syntax("expected ring closure"),
        }
    }

    fn vocabulary(&self, symbol: &str) -> Result<Element> {
        match Element::from_symbol(symbol) {
            Some(e) if e != Element::H => Ok(e),
            _ => Err(ChemError::Vocabulary {
                symbol: symbol.to_string(),
            }),
        }
    }

    fn push_atom(&mut self, atom: RawAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn parse_atom(&mut self) -> Result<usize> {
        let start = self.pos;
        let c = self.peek().expect("caller checked");
        if c == b'[' {
            return self.parse_bracket();
        }
        let two = self.text.get(self.pos..self.pos + 2);
        let (symbol, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => ("Cl", false, 2),
            (b'B', Some(b"Br")) => ("Br", false, 2),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                (std::str::from_utf8(&self.text[self.pos..self.pos + 1]).unwrap(), false, 1)
            }
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => {
                (std::str::from_utf8(&self.text[self.pos..self.pos + 1]).unwrap(), true, 1)
            }
            (b'*', _) => {
                return Err(ChemError::Vocabulary { symbol: "*".into() });
            }
            _ => return self.syntax("unexpected character"),
        };
        let canonical = if aromatic {
            symbol.to_ascii_uppercase()
        } else {
            symbol.to_string()
        };
        let element = self.vocabulary(&canonical)?;
        self.pos += len;
        Ok(self.push_atom(RawAtom {
            element,
            aromatic,
            bracket_h: None,
            pos: start,
        }))
    }

    fn parse_bracket(&mut self) -> Result<usize> {
        let start = self.pos;
        self.pos += 1;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return self.syntax("isotopes are not supported");
        }
        // element symbol
        let (symbol, aromatic) = {
            let rest = &self.text[self.pos..];
            let lower2 = rest.get(..2);
            if matches!(lower2, Some(b"se") | Some(b"as")) {
                let s = std::str::from_utf8(&rest[..2]).unwrap();
                self.pos += 2;
                (format!("{}{}", s[..1].to_ascii_uppercase(), &s[1..]), true)
            } else {
                match rest.first() {
                    Some(c) if c.is_ascii_uppercase() => {
                        let two = rest
                            .get(..2)
                            .filter(|t| t[1].is_ascii_lowercase())
                            .and_then(|t| std::str::from_utf8(t).ok())
                            .filter(|t| atomic_number_of(t).is_some());
                        if let Some(t) = two {
                            self.pos += 2;
                            (t.to_string(), false)
                        } else {
                            self.pos += 1;
                            ((*c as char).to_string(), false)
                        }
                    }
                    Some(c) if b"bcnops".contains(c) => {
                        self.pos += 1;
                        ((*c as char).to_ascii_uppercase().to_string(), true)
                    }
                    Some(b'*') => return Err(ChemError::Vocabulary { symbol: "*".into() }),
                    _ => return self.syntax("expected element symbol"),
                }
            }
        };
        if atomic_number_of(&symbol).is_none() {
            return self.syntax("unknown element");
        }
        let element = if symbol == "H" {
            Element::H
        } else {
            self.vocabulary(&symbol)?
        };
        // chirality
        while self.peek() == Some(b'@') {
            self.pos += 1;
        }
        if self.text.get(self.pos..self.pos + 2).is_some_and(|t| {
            matches!(t, b"TH" | b"AL" | b"SP" | b"TB" | b"OH")
        }) {
            self.pos += 2;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = 1;
            if let Some(d) = self.peek().filter(|c| c.is_ascii_digit()) {
                hcount = d - b'0';
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            return Err(ChemError::Charge { pos: self.pos });
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return self.syntax("malformed atom class");
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.peek() != Some(b']') {
            return self.syntax("expected `]`");
        }
        self.pos += 1;
        if aromatic && !element.can_be_aromatic() {
            return Err(ChemError::Syntax {
                pos: start,
                message: format!("{element} cannot be aromatic"),
            });
        }
        Ok(self.push_atom(RawAtom {
            element,
            aromatic,
            bracket_h: Some(hcount),
            pos: start,
        }))
    }

    fn build(self) -> Result<Molecule> {
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.element, a.aromatic, 0))
            .collect();
        let mut bonds = Vec::with_capacity(self.bonds.len());
        for &(a, b, sym) in &self.bonds {
            let order = match sym {
                Some(BondSym::Single) => BondOrder::Single,
                Some(BondSym::Double) => BondOrder::Double,
                Some(BondSym::Triple) => BondOrder::Triple,
                Some(BondSym::Aromatic) => BondOrder::Aromatic,
                None => {
                    if atoms[a].aromatic && atoms[b].aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                }
            };
            bonds.push(Bond::new(a, b, order));
        }
        let mut mol = Molecule::new(atoms, bonds)?;

        // unspecified bonds between aromatic atoms outside rings are single
        let cyclic = crate::rings::cyclic_bonds(&mol);
        for (bi, &(_, _, sym)) in self.bonds.iter().enumerate() {
            if sym.is_none() && mol.bond(bi).order == BondOrder::Aromatic && !cyclic[bi] {
                mol.set_bond_order(bi, BondOrder::Single);
            }
        }

        finish(mol, &self.atoms)
    }
}

/// Derives hydrogen counts, folds explicit hydrogen atoms into their heavy
/// neighbour, validates valences and perceives aromaticity.
fn finish(mol: Molecule, raws: &[RawAtom]) -> Result<Molecule> {
    let mut hydrogens = vec![0u8; mol.atom_count()];
    for (idx, raw) in raws.iter().enumerate() {
        if raw.element == Element::H {
            let nbrs = mol.neighbors(idx);
            if nbrs.len() != 1
                || mol.bond(nbrs[0].bond).order != BondOrder::Single
                || raws[nbrs[0].atom].element == Element::H
                || raw.bracket_h.unwrap_or(0) != 0
            {
                return Err(ChemError::Valence {
                    atom: idx,
                    message: "explicit hydrogen must have exactly one heavy neighbour".into(),
                });
            }
            continue;
        }
        let sigma = mol.sigma_valence(idx);
        hydrogens[idx] = match raw.bracket_h {
            Some(h) => h,
            None if raw.aromatic => {
                kekule::role_with_implied_h(raw.element, sigma)
                    .map_err(|message| ChemError::Valence { atom: idx, message })?
                    .1
            }
            None => match raw.element.target_valence(sigma) {
                Some(t) => t - sigma,
                None => {
                    return Err(ChemError::Valence {
                        atom: idx,
                        message: format!(
                            "{} with valence {sigma} at position {}",
                            raw.element, raw.pos
                        ),
                    })
                }
            },
        };
    }
    let mut remap = vec![usize::MAX; mol.atom_count()];
    let mut atoms = Vec::new();
    for (idx, raw) in raws.iter().enumerate() {
        if raw.element != Element::H {
            remap[idx] = atoms.len();
            atoms.push(Atom::new(raw.element, raw.aromatic, hydrogens[idx]));
        }
    }
    if atoms.is_empty() {
        return Err(ChemError::Syntax {
            pos: 0,
            message: "no heavy atoms".into(),
        });
    }
    let mut bonds = Vec::new();
    for b in mol.bonds() {
        match (remap[b.begin], remap[b.end]) {
            (usize::MAX, heavy) | (heavy, usize::MAX) => atoms[heavy].implicit_h += 1,
            (x, y) => bonds.push(Bond::new(x, y, b.order)),
        }
    }
    let mut mol = Molecule::new(atoms, bonds)?;
    valence::validate(&mol)?;
    aromaticity::perceive(&mut mol);
    Ok(mol)
}
