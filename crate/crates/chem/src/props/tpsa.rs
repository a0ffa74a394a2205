//! Topological polar surface area from atomic environment contributions.

use crate::element::Element;
use crate::error::{ChemError, Result};
use crate::molecule::{BondOrder, Molecule};
use crate::rings::RingInfo;

/// Local environment of a polar atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarEnvironment {
    pub neighbours: usize,
    pub hydrogens: usize,
    pub single: usize,
    pub double: usize,
    pub triple: usize,
    pub aromatic: usize,
    pub three_ring: bool,
}

#[derive(Clone, Debug)]
struct Row {
    element: Element,
    neighbours: usize,
    hydrogens: usize,
    counts: [usize; 4],
    three_ring: Option<bool>,
    value: f64,
}

#[derive(Clone, Copy, Debug)]
struct Fallback {
    element: Element,
    intercept: f64,
    per_neighbour: f64,
    per_hydrogen: f64,
}

#[derive(Clone, Debug)]
pub struct TpsaTable {
    rows: Vec<Row>,
    fallbacks: Vec<Fallback>,
}

impl TpsaTable {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut fallbacks = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| ChemError::Table {
                file: name.to_string(),
                line: lineno + 1,
                message: message.to_string(),
            };
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            let element = |s: &str| Element::from_symbol(s).ok_or_else(|| err("unknown element"));
            let int = |s: &str| s.parse::<usize>().map_err(|_| err("bad count"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            if f[0] == "default" {
                if f.len() != 5 {
                    return Err(err("default rows have 5 fields"));
                }
                fallbacks.push(Fallback {
                    element: element(f[1])?,
                    intercept: real(f[2])?,
                    per_neighbour: real(f[3])?,
                    per_hydrogen: real(f[4])?,
                });
                continue;
            }
            if f.len() != 9 {
                return Err(err("contribution rows have 9 fields"));
            }
            let three_ring = match f[7] {
                "*" => None,
                "1" => Some(true),
                "0" => Some(false),
                _ => return Err(err("three-ring flag must be 1, 0 or *")),
            };
            rows.push(Row {
                element: element(f[0])?,
                neighbours: int(f[1])?,
                hydrogens: int(f[2])?,
                counts: [int(f[3])?, int(f[4])?, int(f[5])?, int(f[6])?],
                three_ring,
                value: real(f[8])?,
            });
        }
        Ok(TpsaTable { rows, fallbacks })
    }

    /// Contribution of an atom of `element` in `env`; `None` for elements
    /// without polar surface.
    pub fn contribution(&self, element: Element, env: &PolarEnvironment) -> Option<f64> {
        let counts = [env.single, env.double, env.triple, env.aromatic];
        let row = self.rows.iter().find(|r| {
            r.element == element
                && r.neighbours == env.neighbours
                && r.hydrogens == env.hydrogens
                && r.counts == counts
                && r.three_ring.is_none_or(|t| t == env.three_ring)
        });
        if let Some(r) = row {
            return Some(r.value);
        }
        self.fallbacks.iter().find(|f| f.element == element).map(|f| {
            f.intercept + f.per_neighbour * env.neighbours as f64 + f.per_hydrogen * env.hydrogens as f64
        })
    }
}

pub fn polar_environment(mol: &Molecule, rings: &RingInfo, atom: usize) -> PolarEnvironment {
    let mut env = PolarEnvironment {
        neighbours: mol.heavy_degree(atom),
        hydrogens: mol.total_h(atom),
        single: 0,
        double: 0,
        triple: 0,
        aromatic: 0,
        three_ring: rings.atom_in_ring_of_size(atom, 3),
    };
    for n in mol.neighbors(atom) {
        if mol.atom(n.atom).element == Element::H {
            continue;
        }
        match mol.bond(n.bond).order {
            BondOrder::Single => env.single += 1,
            BondOrder::Double => env.double += 1,
            BondOrder::Triple => env.triple += 1,
            BondOrder::Aromatic => env.aromatic += 1,
        }
    }
    env
}

/// Sum of polar contributions over all atoms.
pub fn tpsa(mol: &Molecule, rings: &RingInfo, table: &TpsaTable) -> f64 {
    (0..mol.atom_count())
        .filter_map(|i| {
            let env = polar_environment(mol, rings, i);
            table.contribution(mol.atom(i).element, &env)
        })
        .sum()
}
