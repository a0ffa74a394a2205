//! Ring perception.
//!
//! Candidate cycles are generated from shortest-path trees rooted at every
//! ring atom, sorted by size and reduced over GF(2). The independent cycles
//! picked greedily form the smallest set of smallest rings (SSSR). Cycles
//! that cannot be written as a sum of strictly smaller cycles are the
//! relevant cycles; they make up the symmetrized ring set used for ring
//! counts in patterns and complexity descriptors.

use std::collections::{HashSet, VecDeque};

use crate::molecule::Molecule;

/// Perceived ring systems of a molecule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingInfo {
    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub sssr: Vec<Vec<usize>>,
    /// Relevant cycles (SSSR plus symmetry-equivalent rings of the same size).
    pub rings: Vec<Vec<usize>>,
    /// Bond indices of each entry in `rings`.
    pub ring_bonds: Vec<Vec<usize>>,
    /// Number of rings in `rings` containing each atom.
    pub atom_ring_count: Vec<usize>,
    /// Smallest ring size per atom, 0 for acyclic atoms.
    pub atom_min_ring_size: Vec<usize>,
    /// Number of rings in `rings` containing each bond.
    pub bond_ring_count: Vec<usize>,
    pub spiro_atoms: usize,
    pub bridgehead_atoms: usize,
}

impl RingInfo {
    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_ring_count[atom] > 0
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_ring_count[bond] > 0
    }

    pub fn atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.rings
            .iter()
            .any(|r| r.len() == size && r.contains(&atom))
    }

    pub fn sssr_count(&self) -> usize {
        self.sssr.len()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet(vec![0; bits.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn xor_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn lowest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.0.len() * 64).filter(move |&i| self.get(i))
    }
}

/// GF(2) elimination basis keyed by lowest set bit.
#[derive(Clone, Default)]
struct Basis {
    rows: Vec<(usize, BitSet)>,
}

impl Basis {
    fn reduce(&self, v: &BitSet) -> BitSet {
        let mut v = v.clone();
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_with(row);
            }
        }
        v
    }

    /// Adds `v` if independent; returns whether it was added.
    fn insert(&mut self, v: &BitSet) -> bool {
        let r = self.reduce(v);
        match r.lowest() {
            None => false,
            Some(pivot) => {
                for (_, row) in self.rows.iter_mut() {
                    if row.get(pivot) {
                        row.xor_with(&r);
                    }
                }
                self.rows.push((pivot, r));
                true
            }
        }
    }

    fn contains(&self, v: &BitSet) -> bool {
        self.reduce(v).lowest().is_none()
    }
}

/// Marks bonds that lie on at least one cycle (non-bridges).
pub fn cyclic_bonds(mol: &Molecule) -> Vec<bool> {
    let n = mol.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; mol.bond_count()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (atom, parent bond, next neighbour index)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent_bond, ref mut next)) = stack.last_mut() {
            if *next < mol.neighbors(v).len() {
                let nb = mol.neighbors(v)[*next];
                *next += 1;
                if Some(nb.bond) == parent_bond {
                    continue;
                }
                if disc[nb.atom] == usize::MAX {
                    disc[nb.atom] = timer;
                    low[nb.atom] = timer;
                    timer += 1;
                    stack.push((nb.atom, Some(nb.bond), 0));
                } else {
                    low[v] = low[v].min(disc[nb.atom]);
                }
            } else {
                stack.pop();
                if let (Some(&(parent, _, _)), Some(bond)) = (stack.last(), parent_bond) {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[bond] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|b| !b).collect()
}

fn cycle_atoms(mol: &Molecule, bonds: &BitSet) -> Vec<usize> {
    let edges: Vec<usize> = bonds.ones().collect();
    let start = mol.bond(edges[0]).begin;
    let mut order = vec![start];
    let mut prev_bond = usize::MAX;
    let mut current = start;
    loop {
        let next = mol
            .neighbors(current)
            .iter()
            .find(|n| n.bond != prev_bond && bonds.get(n.bond))
            .copied()
            .expect("cycle is closed");
        if next.atom == start {
            break;
        }
        order.push(next.atom);
        prev_bond = next.bond;
        current = next.atom;
    }
    order
}

pub fn perceive_rings(mol: &Molecule) -> RingInfo {
    let n = mol.atom_count();
    let nb = mol.bond_count();
    let in_cycle = cyclic_bonds(mol);
    let ring_atoms: Vec<bool> = (0..n)
        .map(|a| mol.neighbors(a).iter().any(|x| in_cycle[x.bond]))
        .collect();
    let cyclomatic = {
        let e = in_cycle.iter().filter(|&&b| b).count();
        let v = ring_atoms.iter().filter(|&&b| b).count();
        // components of the cyclic subgraph
        let mut seen = vec![false; n];
        let mut comps = 0;
        for s in 0..n {
            if !ring_atoms[s] || seen[s] {
                continue;
            }
            comps += 1;
            let mut q = VecDeque::from([s]);
            seen[s] = true;
            while let Some(a) = q.pop_front() {
                for x in mol.neighbors(a) {
                    if in_cycle[x.bond] && !seen[x.atom] {
                        seen[x.atom] = true;
                        q.push_back(x.atom);
                    }
                }
            }
        }
        e + comps - v
    };

    let mut candidates: Vec<BitSet> = Vec::new();
    if cyclomatic > 0 {
        let mut unique = HashSet::new();
        for root in (0..n).filter(|&a| ring_atoms[a]) {
            // BFS tree restricted to cyclic bonds
            let mut dist = vec![usize::MAX; n];
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
            dist[root] = 0;
            let mut q = VecDeque::from([root]);
            while let Some(a) = q.pop_front() {
                for x in mol.neighbors(a) {
                    if in_cycle[x.bond] && dist[x.atom] == usize::MAX {
                        dist[x.atom] = dist[a] + 1;
                        parent[x.atom] = Some((a, x.bond));
                        q.push_back(x.atom);
                    }
                }
            }
            let path = |mut v: usize| {
                let mut atoms = vec![v];
                let mut bonds = Vec::new();
                while let Some((p, b)) = parent[v] {
                    bonds.push(b);
                    atoms.push(p);
                    v = p;
                }
                (atoms, bonds)
            };
            for (bi, bond) in mol.bonds().iter().enumerate() {
                if !in_cycle[bi] || dist[bond.begin] == usize::MAX {
                    continue;
                }
                if parent[bond.begin].map(|p| p.1) == Some(bi)
                    || parent[bond.end].map(|p| p.1) == Some(bi)
                {
                    continue;
                }
                let (pa, ba) = path(bond.begin);
                let (pb, bb) = path(bond.end);
                let sa: HashSet<usize> = pa.iter().copied().collect();
                if pb.iter().filter(|a| sa.contains(a)).count() != 1 {
                    continue;
                }
                let mut set = BitSet::new(nb);
                for b in ba.iter().chain(bb.iter()) {
                    set.set(*b);
                }
                set.set(bi);
                if unique.insert(set.clone()) {
                    candidates.push(set);
                }
            }
        }
        candidates.sort_by(|a, b| a.count().cmp(&b.count()).then_with(|| a.cmp(b)));
    }

    let mut basis = Basis::default();
    let mut sssr_sets: Vec<BitSet> = Vec::new();
    let mut relevant: Vec<BitSet> = Vec::new();
    let mut i = 0;
    while i < candidates.len() && sssr_sets.len() < cyclomatic {
        let size = candidates[i].count();
        let shorter = basis.clone();
        let mut j = i;
        while j < candidates.len() && candidates[j].count() == size {
            let c = &candidates[j];
            if !shorter.contains(c) {
                relevant.push(c.clone());
            }
            if basis.insert(c) {
                sssr_sets.push(c.clone());
            }
            j += 1;
        }
        i = j;
    }

    let sssr: Vec<Vec<usize>> = sssr_sets.iter().map(|s| cycle_atoms(mol, s)).collect();
    let rings: Vec<Vec<usize>> = relevant.iter().map(|s| cycle_atoms(mol, s)).collect();
    let ring_bonds: Vec<Vec<usize>> = relevant.iter().map(|s| s.ones().collect()).collect();

    let mut atom_ring_count = vec![0; n];
    let mut atom_min_ring_size = vec![0; n];
    for r in &rings {
        for &a in r {
            atom_ring_count[a] += 1;
            if atom_min_ring_size[a] == 0 || r.len() < atom_min_ring_size[a] {
                atom_min_ring_size[a] = r.len();
            }
        }
    }
    let mut bond_ring_count = vec![0; nb];
    for r in &ring_bonds {
        for &b in r {
            bond_ring_count[b] += 1;
        }
    }

    let mut spiro = HashSet::new();
    let mut bridgeheads = HashSet::new();
    for x in 0..rings.len() {
        for y in x + 1..rings.len() {
            let shared_atoms: Vec<usize> = rings[x]
                .iter()
                .copied()
                .filter(|a| rings[y].contains(a))
                .collect();
            if shared_atoms.len() == 1 {
                spiro.insert(shared_atoms[0]);
            }
            let shared_bonds: Vec<usize> = ring_bonds[x]
                .iter()
                .copied()
                .filter(|b| ring_bonds[y].contains(b))
                .collect();
            if shared_bonds.len() > 1 {
                let mut counts = vec![0; n];
                for &b in &shared_bonds {
                    counts[mol.bond(b).begin] += 1;
                    counts[mol.bond(b).end] += 1;
                }
                for (a, &c) in counts.iter().enumerate() {
                    if c == 1 {
                        bridgeheads.insert(a);
                    }
                }
            }
        }
    }

    RingInfo {
        sssr,
        rings,
        ring_bonds,
        atom_ring_count,
        atom_min_ring_size,
        bond_ring_count,
        spiro_atoms: spiro.len(),
        bridgehead_atoms: bridgeheads.len(),
    }
}
