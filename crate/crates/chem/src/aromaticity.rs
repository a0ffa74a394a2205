//! Hückel aromaticity perception.
//!
//! Aromatic flags present in the input are kept. Electron counts are taken
//! from a localized (alternating single/double) structure, and every ring and
//! every fused combination of rings is tested for a 4n+2 pi-electron count.

use crate::element::Element;
use crate::kekule::{self, PiRole};
use crate::molecule::{BondOrder, Molecule};
use crate::rings::{self, RingInfo};

const MAX_FUSED_SUBSET: usize = 6;

/// Localizes aromatic bonds into single and double bonds and clears aromatic
/// flags. Returns `false` if no localized structure exists.
pub fn kekulize_in_place(mol: &mut Molecule) -> bool {
    let roles: Vec<PiRole> = match (0..mol.atom_count())
        .map(|i| kekule::role_with_known_h(mol, i))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(r) => r,
        Err(_) => return false,
    };
    let Some(partner) = kekule::kekulize(mol, &roles) else {
        return false;
    };
    for bi in 0..mol.bond_count() {
        let b = *mol.bond(bi);
        if b.order == BondOrder::Aromatic {
            let order = if partner[b.begin] == Some(b.end) {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            mol.set_bond_order(bi, order);
        }
    }
    for i in 0..mol.atom_count() {
        mol.set_aromatic(i, false);
    }
    true
}

/// Pi electrons an atom contributes to a ring, or `None` if the atom cannot
/// be part of an aromatic ring.
fn pi_electrons(mol: &Molecule, cyclic: &[bool], atom: usize) -> Option<u32> {
    let a = mol.atom(atom);
    if !a.element.can_be_aromatic() || mol.total_degree(atom) > 3 {
        return None;
    }
    if mol.sigma_valence(atom) + a.implicit_h != a.element.valences()[0] {
        return None;
    }
    let mut multiple = mol
        .neighbors(atom)
        .iter()
        .filter(|n| mol.bond(n.bond).order != BondOrder::Single);
    let first = multiple.next();
    if multiple.next().is_some() {
        return None;
    }
    match first {
        None => match a.element {
            Element::N | Element::O | Element::S => Some(2),
            _ => None,
        },
        Some(n) => {
            let bond = mol.bond(n.bond);
            if bond.order != BondOrder::Double {
                return None;
            }
            if !cyclic[n.bond]
                && electronegativity(mol.atom(n.atom).element) > electronegativity(a.element)
            {
                Some(0)
            } else {
                Some(1)
            }
        }
    }
}

fn electronegativity(e: Element) -> f64 {
    match e {
        Element::H => 2.20,
        Element::C => 2.55,
        Element::N => 3.04,
        Element::O => 3.44,
        Element::F => 3.98,
        Element::Si => 1.90,
        Element::S => 2.58,
        Element::Cl => 3.16,
        Element::Br => 2.96,
    }
}

/// Groups ring indices into fused systems (rings sharing a bond).
fn fused_systems(info: &RingInfo) -> Vec<Vec<usize>> {
    let n = info.sssr.len();
    let bonds = sssr_bonds(info);
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while g[r] != r {
            r = g[r];
        }
        g[x] = r;
        r
    }
    for x in 0..n {
        for y in x + 1..n {
            if bonds[x].iter().any(|b| bonds[y].contains(b)) {
                let (rx, ry) = (find(&mut group, x), find(&mut group, y));
                group[rx] = ry;
            }
        }
    }
    let mut systems: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for r in 0..n {
        let root = find(&mut group, r);
        if index[root] == usize::MAX {
            index[root] = systems.len();
            systems.push(Vec::new());
        }
        systems[index[root]].push(r);
    }
    systems
}

fn sssr_bonds(info: &RingInfo) -> Vec<Vec<(usize, usize)>> {
    info.sssr
        .iter()
        .map(|r| {
            (0..r.len())
                .map(|i| {
                    let (a, b) = (r[i], r[(i + 1) % r.len()]);
                    (a.min(b), a.max(b))
                })
                .collect()
        })
        .collect()
}

fn subset_is_fused(bonds: &[Vec<(usize, usize)>], subset: &[usize]) -> bool {
    let mut reached = vec![subset[0]];
    let mut changed = true;
    while changed {
        changed = false;
        for &r in subset {
            if reached.contains(&r) {
                continue;
            }
            if reached
                .iter()
                .any(|&q| bonds[q].iter().any(|b| bonds[r].contains(b)))
            {
                reached.push(r);
                changed = true;
            }
        }
    }
    reached.len() == subset.len()
}

/// Perceives aromaticity in place. Existing aromatic flags are kept; rings
/// satisfying the 4n+2 rule are added.
pub fn perceive(mol: &mut Molecule) {
    let info = rings::perceive_rings(mol);
    if info.sssr.is_empty() {
        return;
    }
    let mut localized = mol.clone();
    if mol.atoms().iter().any(|a| a.aromatic) && !kekulize_in_place(&mut localized) {
        return;
    }
    let cyclic = rings::cyclic_bonds(mol);
    let electrons: Vec<Option<u32>> = (0..mol.atom_count())
        .map(|i| pi_electrons(&localized, &cyclic, i))
        .collect();
    let bonds = sssr_bonds(&info);
    let mut aromatic_bonds: Vec<(usize, usize)> = Vec::new();
    for system in fused_systems(&info) {
        let candidates: Vec<usize> = system
            .iter()
            .copied()
            .filter(|&r| info.sssr[r].iter().all(|&a| electrons[a].is_some()))
            .collect();
        let max_k = if candidates.len() <= MAX_FUSED_SUBSET {
            candidates.len()
        } else {
            2
        };
        for k in 1..=max_k {
            for subset in combinations(candidates.len(), k) {
                let subset: Vec<usize> = subset.iter().map(|&i| candidates[i]).collect();
                if k > 1 && !subset_is_fused(&bonds, &subset) {
                    continue;
                }
                let mut atoms: Vec<usize> = subset
                    .iter()
                    .flat_map(|&r| info.sssr[r].iter().copied())
                    .collect();
                atoms.sort_unstable();
                atoms.dedup();
                let total: u32 = atoms.iter().map(|&a| electrons[a].unwrap_or(0)).sum();
                if total % 4 == 2 {
                    // fusion bonds inside a ring union stay localized
                    for &r in &subset {
                        aromatic_bonds.extend(bonds[r].iter().copied().filter(|b| {
                            subset.iter().filter(|&&q| bonds[q].contains(b)).count() == 1
                        }));
                    }
                }
            }
        }
    }
    if aromatic_bonds.is_empty() {
        return;
    }
    for (a, b) in aromatic_bonds {
        let bi = mol.bond_between(a, b).expect("ring bond");
        mol.set_bond_order(bi, BondOrder::Aromatic);
        mol.set_aromatic(a, true);
        mol.set_aromatic(b, true);
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}
