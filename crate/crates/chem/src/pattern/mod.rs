//! Substructure patterns in a SMARTS subset and a backtracking matcher.
//!
//! Supported atom primitives: element symbols (upper case aliphatic, lower
//! case aromatic), `*`, `a`, `A`, `#n`, `D`, `H`, `h`, `X`, `v`, `R`, `r`,
//! `x`, charges, isotopes and recursive `$(...)` environments, combined with
//! `!`, `&` (or juxtaposition), `,` and `;`. Bond primitives: `-`, `=`, `#`,
//! `:`, `~`, `@`, with the same operators. Components may be separated by `.`.

mod parse;

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use crate::error::{ChemError, Result};
use crate::kekule::{self, PiRole};
use crate::molecule::{BondOrder, Molecule};
use crate::rings::{self, RingInfo};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum AtomPrim {
    Any,
    Aromatic,
    Aliphatic,
    /// Atomic number with optional aromaticity requirement.
    Element(u8, Option<bool>),
    Degree(usize),
    TotalH(usize),
    ImplicitH(usize),
    Connectivity(usize),
    Valence(usize),
    RingCount(Option<usize>),
    RingSize(Option<usize>),
    RingBonds(Option<usize>),
    Charge(i32),
    Isotope(u32),
    Recursive(Box<Pattern>),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum BondPrim {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
    /// Implicit bond: single or aromatic.
    Default,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PatternBond {
    pub begin: usize,
    pub end: usize,
    pub expr: Expr<BondPrim>,
}

/// Compiled substructure pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    source: String,
    pub(crate) atoms: Vec<Expr<AtomPrim>>,
    pub(crate) bonds: Vec<PatternBond>,
    /// Unique identity used to memoize recursive evaluations.
    pub(crate) id: usize,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern> {
        parse::parse_pattern(text)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Number of distinct matched atom sets in `mol`.
    pub fn count_matches(&self, target: &Target) -> usize {
        let mut sets = HashSet::new();
        self.search(target, None, &mut |m| {
            let mut key = m.to_vec();
            key.sort_unstable();
            sets.insert(key);
            true
        });
        sets.len()
    }

    /// All matches, each listing the molecule atom for every pattern atom.
    /// With `unique`, matches covering the same atom set are reported once.
    pub fn find_matches(&self, target: &Target, unique: bool) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut sets = HashSet::new();
        self.search(target, None, &mut |m| {
            if unique {
                let mut key = m.to_vec();
                key.sort_unstable();
                if !sets.insert(key) {
                    return true;
                }
            }
            out.push(m.to_vec());
            true
        });
        out
    }

    pub fn has_match(&self, target: &Target) -> bool {
        let mut found = false;
        self.search(target, None, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// True if some match maps the first pattern atom onto `atom`.
    pub fn matches_at(&self, target: &Target, atom: usize) -> bool {
        let mut found = false;
        self.search(target, Some(atom), &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Marks every molecule atom onto which the first pattern atom can be
    /// mapped by some match.
    pub fn match_roots(&self, target: &Target) -> Vec<bool> {
        let n = target.mol.atom_count();
        let Some(prep) = self.prepare(target) else {
            return vec![false; n];
        };
        (0..n)
            .map(|a| {
                let mut found = false;
                self.run(target, &prep, Some(a), &mut |_| {
                    found = true;
                    false
                });
                found
            })
            .collect()
    }

    fn prepare(&self, target: &Target) -> Option<Prepared> {
        let n = target.mol.atom_count();
        if self.atoms.is_empty() || self.atoms.len() > n {
            return None;
        }
        let allowed = self
            .atoms
            .iter()
            .map(|e| (0..n).map(|a| target.atom_matches(e, a)).collect())
            .collect();
        Some(Prepared {
            allowed,
            steps: self.plan(),
        })
    }

    /// Backtracking search. `visit` returns false to stop early.
    fn search(&self, target: &Target, root: Option<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) {
        if let Some(prep) = self.prepare(target) {
            self.run(target, &prep, root, visit);
        }
    }

    fn run(
        &self,
        target: &Target,
        prep: &Prepared,
        root: Option<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) {
        let n = target.mol.atom_count();
        if let Some(r) = root {
            if r >= n || !prep.allowed[0][r] {
                return;
            }
        }
        let mut mapping = vec![usize::MAX; self.atoms.len()];
        let mut used = vec![false; n];
        self.extend(target, &prep.allowed, &prep.steps, 0, root, &mut mapping, &mut used, visit);
    }

    /// Visit order: depth-first per component, each step optionally anchored
    /// to an earlier pattern atom through a bond.
    fn plan(&self) -> Vec<Step> {
        let np = self.atoms.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); np];
        for (bi, b) in self.bonds.iter().enumerate() {
            adj[b.begin].push((b.end, bi));
            adj[b.end].push((b.begin, bi));
        }
        let mut position = vec![usize::MAX; np];
        let mut order: Vec<(usize, Option<(usize, usize)>)> = Vec::new();
        for start in 0..np {
            if position[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![(start, None)];
            while let Some((atom, anchor)) = stack.pop() {
                if position[atom] != usize::MAX {
                    continue;
                }
                position[atom] = order.len();
                order.push((atom, anchor));
                for &(nb, bi) in adj[atom].iter().rev() {
                    if position[nb] == usize::MAX {
                        stack.push((nb, Some((atom, bi))));
                    }
                }
            }
        }
        order
            .iter()
            .map(|&(atom, anchor)| {
                let checks = adj[atom]
                    .iter()
                    .filter(|&&(nb, bi)| {
                        position[nb] < position[atom] && Some(bi) != anchor.map(|a| a.1)
                    })
                    .map(|&(nb, bi)| (nb, bi))
                    .collect();
                Step {
                    atom,
                    anchor,
                    checks,
                }
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        target: &Target,
        allowed: &[Vec<bool>],
        steps: &[Step],
        depth: usize,
        root: Option<usize>,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == steps.len() {
            return visit(mapping);
        }
        let step = &steps[depth];
        let candidates: Vec<(usize, Option<usize>)> = match step.anchor {
            Some((parent, _)) => target
                .mol
                .neighbors(mapping[parent])
                .iter()
                .map(|nb| (nb.atom, Some(nb.bond)))
                .collect(),
            None if depth == 0 && root.is_some() => vec![(root.unwrap(), None)],
            None => (0..target.mol.atom_count()).map(|a| (a, None)).collect(),
        };
        for (cand, via) in candidates {
            if used[cand] || !allowed[step.atom][cand] {
                continue;
            }
            if let (Some((_, pb)), Some(mb)) = (step.anchor, via) {
                if !target.bond_matches(&self.bonds[pb].expr, mb) {
                    continue;
                }
            }
            let closures_ok = step.checks.iter().all(|&(other, pb)| {
                target
                    .mol
                    .bond_between(cand, mapping[other])
                    .is_some_and(|mb| target.bond_matches(&self.bonds[pb].expr, mb))
            });
            if !closures_ok {
                continue;
            }
            mapping[step.atom] = cand;
            used[cand] = true;
            let keep_going = self.extend(target, allowed, steps, depth + 1, root, mapping, used, visit);
            used[cand] = false;
            mapping[step.atom] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

struct Prepared {
    allowed: Vec<Vec<bool>>,
    steps: Vec<Step>,
}

struct Step {
    atom: usize,
    anchor: Option<(usize, usize)>,
    checks: Vec<(usize, usize)>,
}

impl FromStr for Pattern {
    type Err = ChemError;
    fn from_str(s: &str) -> Result<Pattern> {
        Pattern::parse(s)
    }
}

/// Per-atom quantities referenced by pattern primitives.
#[derive(Clone, Debug)]
struct AtomFacts {
    atomic_number: u8,
    aromatic: bool,
    degree: usize,
    total_h: usize,
    implicit_h: usize,
    connectivity: usize,
    valence: usize,
    ring_count: usize,
    min_ring: usize,
    ring_bonds: usize,
}

/// A molecule prepared for repeated pattern matching.
pub struct Target<'m> {
    mol: &'m Molecule,
    facts: Vec<AtomFacts>,
    cyclic: Vec<bool>,
    recursive: RefCell<HashMap<usize, Vec<bool>>>,
}

impl<'m> Target<'m> {
    pub fn new(mol: &'m Molecule) -> Self {
        let info: RingInfo = rings::perceive_rings(mol);
        let cyclic = rings::cyclic_bonds(mol);
        let facts = (0..mol.atom_count())
            .map(|i| {
                let a = mol.atom(i);
                let pi = match kekule::role_with_known_h(mol, i) {
                    Ok(PiRole::Needs) => 1,
                    _ => 0,
                };
                AtomFacts {
                    atomic_number: a.element.atomic_number(),
                    aromatic: a.aromatic,
                    degree: mol.degree(i),
                    total_h: mol.total_h(i),
                    implicit_h: a.implicit_h as usize,
                    connectivity: mol.total_degree(i),
                    valence: mol.sigma_valence(i) as usize + a.implicit_h as usize + pi,
                    ring_count: info.atom_ring_count[i],
                    min_ring: info.atom_min_ring_size[i],
                    ring_bonds: mol.neighbors(i).iter().filter(|n| cyclic[n.bond]).count(),
                }
            })
            .collect();
        Target {
            mol,
            facts,
            cyclic,
            recursive: RefCell::new(HashMap::new()),
        }
    }

    pub fn molecule(&self) -> &Molecule {
        self.mol
    }

    fn atom_matches(&self, expr: &Expr<AtomPrim>, atom: usize) -> bool {
        match expr {
            Expr::Prim(p) => self.prim_matches(p, atom),
            Expr::Not(e) => !self.atom_matches(e, atom),
            Expr::And(es) => es.iter().all(|e| self.atom_matches(e, atom)),
            Expr::Or(es) => es.iter().any(|e| self.atom_matches(e, atom)),
        }
    }

    fn prim_matches(&self, p: &AtomPrim, atom: usize) -> bool {
        let f = &self.facts[atom];
        match p {
            AtomPrim::Any => true,
            AtomPrim::Aromatic => f.aromatic,
            AtomPrim::Aliphatic => !f.aromatic,
            AtomPrim::Element(z, ar) => f.atomic_number == *z && ar.is_none_or(|a| a == f.aromatic),
            AtomPrim::Degree(n) => f.degree == *n,
            AtomPrim::TotalH(n) => f.total_h == *n,
            AtomPrim::ImplicitH(n) => f.implicit_h == *n,
            AtomPrim::Connectivity(n) => f.connectivity == *n,
            AtomPrim::Valence(n) => f.valence == *n,
            AtomPrim::RingCount(None) => f.ring_count > 0,
            AtomPrim::RingCount(Some(n)) => f.ring_count == *n,
            AtomPrim::RingSize(None) => f.min_ring > 0,
            AtomPrim::RingSize(Some(n)) => f.min_ring == *n,
            AtomPrim::RingBonds(None) => f.ring_bonds > 0,
            AtomPrim::RingBonds(Some(n)) => f.ring_bonds == *n,
            AtomPrim::Charge(c) => *c == 0,
            AtomPrim::Isotope(_) => false,
            AtomPrim::Recursive(pat) => {
                if let Some(v) = self.recursive.borrow().get(&pat.id) {
                    return v[atom];
                }
                let roots = pat.match_roots(self);
                let hit = roots[atom];
                self.recursive.borrow_mut().insert(pat.id, roots);
                hit
            }
        }
    }

    fn bond_matches(&self, expr: &Expr<BondPrim>, bond: usize) -> bool {
        match expr {
            Expr::Prim(p) => {
                let order = self.mol.bond(bond).order;
                match p {
                    BondPrim::Single => order == BondOrder::Single,
                    BondPrim::Double => order == BondOrder::Double,
                    BondPrim::Triple => order == BondOrder::Triple,
                    BondPrim::Aromatic => order == BondOrder::Aromatic,
                    BondPrim::Any => true,
                    BondPrim::Ring => self.cyclic[bond],
                    BondPrim::Default => {
                        matches!(order, BondOrder::Single | BondOrder::Aromatic)
                    }
                }
            }
            Expr::Not(e) => !self.bond_matches(e, bond),
            Expr::And(es) => es.iter().all(|e| self.bond_matches(e, bond)),
            Expr::Or(es) => es.iter().any(|e| self.bond_matches(e, bond)),
        }
    }
}

/// Number of distinct matches of `pattern` in `mol`, deduplicated by the set
/// of matched atoms.
pub fn substructure_match(mol: &Molecule, pattern: &Pattern) -> usize {
    pattern.count_matches(&Target::new(mol))
}

/// Reads a pattern file: one pattern per line, `#` starts a comment, blank
/// lines are skipped. An optional tab-separated label may follow a pattern.
pub fn parse_pattern_file(name: &str, text: &str) -> Result<Vec<(Pattern, Option<String>)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = strip_comment(line).trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split('\t');
        let smarts = fields.next().unwrap_or("").trim();
        let label = fields.next().map(|s| s.trim().to_string());
        let pattern = Pattern::parse(smarts).map_err(|e| ChemError::Table {
            file: name.to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        out.push((pattern, label));
    }
    Ok(out)
}

/// `#` is also the atomic-number primitive, so a comment must start the
/// line or follow whitespace.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for i in 0..bytes.len() {
        if bytes[i] == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn count(smiles: &str, smarts: &str) -> usize {
        substructure_match(&parse_smiles(smiles).unwrap(), &Pattern::parse(smarts).unwrap())
    }

    #[test]
    fn aromatic_carbon_on_benzene() {
        assert_eq!(count("c1ccccc1", "c"), 6);
        assert_eq!(count("c1ccccc1", "[c;R1]"), 6);
        assert_eq!(count("C1CCCCC1", "c"), 0);
    }

    #[test]
    fn carbonyl_in_the_acetamide_example() {
        assert_eq!(count("CC(=O)NCC(F)(F)Br", "C=O"), 1);
        assert_eq!(count("CC(=O)NCC(F)(F)Br", "[#6]=[#8]"), 1);
    }

    #[test]
    fn empty_pattern_is_a_parse_error() {
        assert!(Pattern::parse("").is_err());
        assert!(Pattern::parse("[]").is_err());
        assert!(Pattern::parse("C(").is_err());
    }

    #[test]
    fn primitives() {
        assert_eq!(count("CCO", "[CH3]"), 1);
        assert_eq!(count("CCO", "[OX2H]"), 1);
        assert_eq!(count("CC(C)(C)C", "[CD4]"), 1);
        assert_eq!(count("c1ccccc1C", "[cR1][CH3]"), 1);
        assert_eq!(count("C1CC1CCC", "[r3]"), 3);
        assert_eq!(count("C1CC1CCC", "[C;!R]"), 3);
        assert_eq!(count("c1ccncc1", "[nX2]"), 1);
        assert_eq!(count("c1ccccc1", "[cv4]"), 6);
        assert_eq!(count("c1cc[nH]c1", "[nv3H1]"), 1);
    }

    #[test]
    fn bonds_and_rings() {
        assert_eq!(count("C=CC=C", "C=!@C"), 2);
        assert_eq!(count("C1=CCCC1", "C=!@C"), 0);
        assert_eq!(count("C1CCCCC1", "C1CCCCC1"), 1);
        assert_eq!(count("CCCCCC", "C~C"), 5);
        assert_eq!(count("c1ccccc1", "c:c"), 6);
        assert_eq!(count("c1ccccc1-c1ccccc1", "c-c"), 1);
    }

    #[test]
    fn recursive_environments() {
        assert_eq!(count("CC(=O)O", "[$(C=O)]"), 1);
        assert_eq!(count("CCN", "[C;!$(C=O)]"), 2);
        assert_eq!(count("NCC(=O)N", "[$([N;!$(NC=O)])]"), 1);
    }

    #[test]
    fn components() {
        assert_eq!(count("CC(F)CF", "F.F"), 1);
        assert_eq!(count("CCF", "F.F"), 0);
    }

    #[test]
    fn rooted_matching() {
        let mol = parse_smiles("CCO").unwrap();
        let t = Target::new(&mol);
        let p = Pattern::parse("[CH2]O").unwrap();
        assert!(p.matches_at(&t, 1));
        assert!(!p.matches_at(&t, 0));
    }

    #[test]
    fn explicit_hydrogens() {
        let mol = parse_smiles("CO").unwrap().with_explicit_hydrogens();
        let t = Target::new(&mol);
        assert_eq!(Pattern::parse("[#1]O").unwrap().count_matches(&t), 1);
        assert_eq!(Pattern::parse("[#1][#6]").unwrap().count_matches(&t), 3);
        assert_eq!(Pattern::parse("[CH3]").unwrap().count_matches(&t), 1);
        assert_eq!(Pattern::parse("[CD4]").unwrap().count_matches(&t), 1);
    }

    #[test]
    fn pattern_file_comments() {
        let file = "# header\n[#6]=O\tcarbonyl\n\n C#N # nitrile\n";
        let pats = parse_pattern_file("t", file).unwrap();
        assert_eq!(pats.len(), 2);
        assert_eq!(pats[0].1.as_deref(), Some("carbonyl"));
        assert_eq!(pats[1].0.source(), "C#N");
    }
}
