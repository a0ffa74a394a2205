//! Synthetic accessibility score from fragment contributions and
//! complexity penalties. Scores run from 1 (easy) to 10 (hard).

use crate::canon::symmetry_classes;
use crate::element::Element;
use crate::fingerprint::morgan_counts;
use crate::molecule::{BondOrder, Molecule};
use crate::rings::{perceive_rings, RingInfo};

use super::tables::SasFragments;

const UNKNOWN_FRAGMENT: f64 = -4.0;
const MACROCYCLE_MIN: usize = 9;

/// Complexity terms subtracted from the fragment score.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SasPenalties {
    pub size: f64,
    pub stereo: f64,
    pub spiro: f64,
    pub bridgehead: f64,
    pub macrocycle: f64,
}

impl SasPenalties {
    pub fn total(&self) -> f64 {
        self.size + self.stereo + self.spiro + self.bridgehead + self.macrocycle
    }
}

pub fn fragment_score(mol: &Molecule, fragments: &SasFragments) -> (f64, usize) {
    let counts = morgan_counts(mol, 2);
    let mut total = 0.0;
    let mut n = 0u32;
    for (&id, &c) in &counts {
        total += fragments.get(id).unwrap_or(UNKNOWN_FRAGMENT) * c as f64;
        n += c;
    }
    let score = if n == 0 { 0.0 } else { total / n as f64 };
    (score, counts.len())
}

/// Atoms that could carry tetrahedral stereo: four distinct substituents
/// (implicit hydrogen counts as one) on an sp3 centre.
pub fn stereo_centers(mol: &Molecule) -> usize {
    let classes = symmetry_classes(mol);
    (0..mol.atom_count())
        .filter(|&a| is_stereo_center(mol, &classes, a))
        .count()
}

fn is_stereo_center(mol: &Molecule, classes: &[usize], a: usize) -> bool {
    let atom = mol.atom(a);
    if atom.aromatic || !matches!(atom.element, Element::C | Element::N | Element::S) {
        return false;
    }
    let h = mol.total_h(a);
    let nbrs = mol.neighbors(a);
    if h > 1 || nbrs.len() + h != 4 && atom.element == Element::C {
        return false;
    }
    let multiple = nbrs
        .iter()
        .filter(|n| mol.bond(n.bond).order != BondOrder::Single)
        .count();
    match atom.element {
        Element::C if multiple > 0 => return false,
        Element::N if !(nbrs.len() + h == 4 && multiple == 0) => return false,
        Element::S if h > 0 || !(nbrs.len() == 3 && multiple == 1 || nbrs.len() == 4) => return false,
        _ => {}
    }
    let mut seen: Vec<usize> = nbrs.iter().map(|n| classes[n.atom]).collect();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

pub fn penalties(mol: &Molecule, rings: &RingInfo) -> SasPenalties {
    let n = mol.atom_count() as f64;
    let log1 = |c: usize| ((c + 1) as f64).log10();
    SasPenalties {
        size: n.powf(1.005) - n,
        stereo: log1(stereo_centers(mol)),
        spiro: log1(rings.spiro_atoms),
        bridgehead: log1(rings.bridgehead_atoms),
        macrocycle: if rings.sssr.iter().any(|r| r.len() >= MACROCYCLE_MIN) {
            2f64.log10()
        } else {
            0.0
        },
    }
}

/// Maps the raw score (about -4 to 2.5) onto 1..=10.
pub fn rescale(raw: f64) -> f64 {
    let (lo, hi) = (-4.0, 2.5);
    let mut s = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
    if s > 8.0 {
        s = 8.0 + (s - 8.0).ln();
    }
    s.clamp(1.0, 10.0)
}

pub fn sas(mol: &Molecule, fragments: &SasFragments) -> f64 {
    let rings = perceive_rings(mol);
    let (score1, bits) = fragment_score(mol, fragments);
    let score2 = -penalties(mol, &rings).total();
    let atoms = mol.atom_count();
    let score3 = if bits > 0 && atoms > bits {
        0.5 * (atoms as f64 / bits as f64).ln()
    } else {
        0.0
    };
    rescale(score1 + score2 + score3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn centers(s: &str) -> usize {
        stereo_centers(&parse_smiles(s).unwrap())
    }

    #[test]
    fn rescale_is_bounded_and_monotone() {
        let mut last = f64::INFINITY;
        for i in -100..100 {
            let raw = i as f64 / 10.0;
            let s = rescale(raw);
            assert!((1.0..=10.0).contains(&s));
            // the log compression above 8 is discontinuous, so only check
            // monotonicity below it
            if s < 8.0 && raw > -2.0 {
                assert!(s <= last);
                last = s;
            }
        }
    }

    #[test]
    fn stereo_center_counts() {
        assert_eq!(centers("CC(O)CC"), 1);
        assert_eq!(centers("CC(C)O"), 0);
        assert_eq!(centers("OC(F)(Cl)Br"), 1);
        assert_eq!(centers("C1CCCCC1"), 0);
    }
}
