//! Atom-typed additive logP and molar refractivity.

use crate::error::{ChemError, Result};
use crate::molecule::Molecule;
use crate::pattern::{Pattern, Target};

#[derive(Clone, Debug)]
pub struct CrippenType {
    pub label: String,
    pub pattern: Pattern,
    pub logp: f64,
    pub mr: f64,
}

/// Ordered atom-type table; the first matching type wins.
#[derive(Clone, Debug)]
pub struct CrippenTable {
    types: Vec<CrippenType>,
}

/// Per-atom type index and contributions of an explicit-hydrogen molecule.
#[derive(Clone, Debug)]
pub struct CrippenTyping {
    pub types: Vec<usize>,
    pub logp: Vec<f64>,
    pub mr: Vec<f64>,
}

impl CrippenTable {
    /// Rows: `label<TAB>pattern<TAB>logp<TAB>mr`.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut types = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ChemError::Table {
                file: name.to_string(),
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 4 {
                return Err(err("expected label, pattern, logp, mr".into()));
            }
            let pattern = Pattern::parse(fields[1]).map_err(|e| err(e.to_string()))?;
            let number = |s: &str| -> Result<f64> {
                if s.trim().is_empty() {
                    return Ok(0.0);
                }
                s.trim().parse().map_err(|_| err(format!("bad number `{s}`")))
            };
            types.push(CrippenType {
                label: fields[0].to_string(),
                pattern,
                logp: number(fields[2])?,
                mr: number(fields[3])?,
            });
        }
        if types.is_empty() {
            return Err(ChemError::Table {
                file: name.to_string(),
                line: 0,
                message: "no atom types".into(),
            });
        }
        Ok(CrippenTable { types })
    }

    pub fn types(&self) -> &[CrippenType] {
        &self.types
    }

    /// Types every atom (hydrogens included) of `mol` after making its
    /// hydrogens explicit. Heavy atoms keep their indices.
    pub fn assign(&self, mol: &Molecule) -> Result<(Molecule, CrippenTyping)> {
        let full = mol.with_explicit_hydrogens();
        let target = Target::new(&full);
        let n = full.atom_count();
        let mut types = vec![usize::MAX; n];
        let mut remaining = n;
        for (ti, t) in self.types.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let roots = t.pattern.match_roots(&target);
            for (atom, hit) in roots.into_iter().enumerate() {
                if hit && types[atom] == usize::MAX {
                    types[atom] = ti;
                    remaining -= 1;
                }
            }
        }
        if let Some(atom) = types.iter().position(|&t| t == usize::MAX) {
            return Err(ChemError::Untypeable {
                atom,
                element: full.atom(atom).element.to_string(),
            });
        }
        let logp = types.iter().map(|&t| self.types[t].logp).collect();
        let mr = types.iter().map(|&t| self.types[t].mr).collect();
        Ok((full, CrippenTyping { types, logp, mr }))
    }
}

/// Sum of logP contributions of all atoms, hydrogens included.
pub fn clogp(mol: &Molecule, table: &CrippenTable) -> Result<f64> {
    let (_, typing) = table.assign(mol)?;
    Ok(typing.logp.iter().sum())
}

/// Sum of molar refractivity contributions of all atoms.
pub fn cmr(mol: &Molecule, table: &CrippenTable) -> Result<f64> {
    let (_, typing) = table.assign(mol)?;
    Ok(typing.mr.iter().sum())
}

/// Both sums from a single typing pass.
pub fn clogp_cmr(mol: &Molecule, table: &CrippenTable) -> Result<(f64, f64)> {
    let (_, typing) = table.assign(mol)?;
    Ok((typing.logp.iter().sum(), typing.mr.iter().sum()))
}
