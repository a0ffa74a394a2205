use crate::canon;
use crate::element::Element;
use crate::kekule;
use crate::molecule::{BondOrder, Molecule};

/// Canonical SMILES together with the atom order in which atoms appear in it.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub smiles: String,
    /// `order[k]` is the index (in `molecule`) of the k-th written atom.
    pub order: Vec<usize>,
    /// Canonical rank of every atom of the input molecule.
    pub ranks: Vec<usize>,
}

/// Deterministic canonical SMILES of a molecule.
pub fn write_smiles(mol: &Molecule) -> String {
    canonical_form(mol).smiles
}

pub fn canonical_form(mol: &Molecule) -> CanonicalForm {
    let ranks = canon::canonical_ranks(mol);
    let (smiles, order) = write_with_ranks(mol, &ranks);
    CanonicalForm {
        smiles,
        order,
        ranks,
    }
}

struct Plan {
    visited: Vec<bool>,
    order: Vec<usize>,
    children: Vec<Vec<(usize, usize)>>,
    // (bond, opening?) per atom in discovery order
    closures: Vec<Vec<(usize, bool)>>,
    bond_used: Vec<bool>,
}

fn plan(mol: &Molecule, ranks: &[usize], atom: usize, via: Option<usize>, p: &mut Plan) {
    p.visited[atom] = true;
    p.order.push(atom);
    let mut nbrs: Vec<_> = mol.neighbors(atom).to_vec();
    nbrs.sort_by_key(|n| ranks[n.atom]);
    for n in nbrs {
        if Some(n.bond) == via || p.bond_used[n.bond] {
            continue;
        }
        if p.visited[n.atom] {
            p.bond_used[n.bond] = true;
            p.closures[n.atom].push((n.bond, true));
            p.closures[atom].push((n.bond, false));
        } else {
            p.bond_used[n.bond] = true;
            p.children[atom].push((n.atom, n.bond));
            plan(mol, ranks, n.atom, Some(n.bond), p);
        }
    }
}

fn write_with_ranks(mol: &Molecule, ranks: &[usize]) -> (String, Vec<usize>) {
    let n = mol.atom_count();
    let mut p = Plan {
        visited: vec![false; n],
        order: Vec::with_capacity(n),
        children: vec![Vec::new(); n],
        closures: vec![Vec::new(); n],
        bond_used: vec![false; mol.bond_count()],
    };
    let mut roots = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    for start in by_rank {
        if !p.visited[start] {
            roots.push(start);
            plan(mol, ranks, start, None, &mut p);
        }
    }
    let mut out = String::new();
    let mut digits: Vec<Option<usize>> = vec![None; mol.bond_count()];
    let mut in_use: Vec<bool> = Vec::new();
    let mut emit_order = Vec::with_capacity(n);
    for (k, root) in roots.into_iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        emit(mol, root, &p, &mut digits, &mut in_use, &mut out, &mut emit_order);
    }
    (out, emit_order)
}

fn emit(
    mol: &Molecule,
    atom: usize,
    p: &Plan,
    digits: &mut Vec<Option<usize>>,
    in_use: &mut Vec<bool>,
    out: &mut String,
    order: &mut Vec<usize>,
) {
    order.push(atom);
    out.push_str(&atom_symbol(mol, atom));
    for &(bond, opening) in &p.closures[atom] {
        if opening {
            let d = match in_use.iter().position(|u| !u) {
                Some(d) => d,
                None => {
                    in_use.push(false);
                    in_use.len() - 1
                }
            };
            in_use[d] = true;
            digits[bond] = Some(d);
            push_digit(out, d + 1);
        } else {
            let d = digits[bond].expect("ring closure opened before closing");
            out.push_str(bond_symbol(mol, bond));
            push_digit(out, d + 1);
            in_use[d] = false;
        }
    }
    let children = &p.children[atom];
    for (i, &(child, bond)) in children.iter().enumerate() {
        let last = i + 1 == children.len();
        if !last {
            out.push('(');
        }
        out.push_str(bond_symbol(mol, bond));
        emit(mol, child, p, digits, in_use, out, order);
        if !last {
            out.push(')');
        }
    }
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d}"));
    }
}

fn bond_symbol(mol: &Molecule, bond: usize) -> &'static str {
    let b = mol.bond(bond);
    match b.order {
        BondOrder::Single => {
            if mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => {
            if mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic {
                ""
            } else {
                ":"
            }
        }
    }
}

fn atom_symbol(mol: &Molecule, atom: usize) -> String {
    let a = mol.atom(atom);
    let sigma = mol.sigma_valence(atom);
    let implied = if a.element == Element::H {
        None
    } else if a.aromatic {
        kekule::role_with_implied_h(a.element, sigma).ok().map(|r| r.1)
    } else {
        a.element.target_valence(sigma).map(|t| t - sigma)
    };
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if a.element.is_organic_subset() && implied == Some(a.implicit_h) {
        return symbol;
    }
    match a.implicit_h {
        0 => format!("[{symbol}]"),
        1 => format!("[{symbol}H]"),
        h => format!("[{symbol}H{h}]"),
    }
}
