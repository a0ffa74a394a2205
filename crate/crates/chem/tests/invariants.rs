use std::sync::OnceLock;

use molvae_chem::props::{self, PropertyTables};
use molvae_chem::rings::perceive_rings;
use molvae_chem::{
    check_valence, morgan_fingerprint, parse_smiles, tanimoto, write_smiles, Fingerprint, Molecule,
};
use proptest::prelude::*;

fn corpus() -> &'static [String] {
    static C: OnceLock<Vec<String>> = OnceLock::new();
    C.get_or_init(|| {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/zinc_le16.smi");
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(str::to_string)
            .collect()
    })
}

fn shuffled(m: &Molecule, seed: u64) -> Molecule {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut perm: Vec<usize> = (0..m.atom_count()).collect();
    perm.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
    m.permuted(&perm).unwrap()
}

#[test]
fn corpus_round_trip_and_valence() {
    for s in corpus() {
        let m = parse_smiles(s).unwrap();
        assert!(check_valence(&m), "{s}");
        let w = write_smiles(&m);
        let back = parse_smiles(&w).unwrap();
        assert_eq!(back.atom_count(), m.atom_count(), "{s}");
        assert_eq!(back.bond_count(), m.bond_count(), "{s}");
        assert_eq!(write_smiles(&back), w, "{s}");
    }
}

#[test]
fn sssr_size_is_cyclomatic_number_on_corpus() {
    for s in corpus() {
        let m = parse_smiles(s).unwrap();
        let r = perceive_rings(&m);
        assert_eq!(r.sssr_count() + m.atom_count(), m.bond_count() + 1, "{s}");
    }
}

#[test]
fn spec_examples() {
    let m = parse_smiles("CC(=O)NCC(F)(F)Br").unwrap();
    assert_eq!((m.atom_count(), m.bond_count()), (9, 8));
    assert_eq!(perceive_rings(&m).sssr_count(), 0);
    let naph = perceive_rings(&parse_smiles("c1ccc2ccccc2c1").unwrap());
    assert_eq!(naph.sssr.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 6]);
    let benzene = perceive_rings(&parse_smiles("c1ccccc1").unwrap());
    assert_eq!((benzene.sssr_count(), benzene.spiro_atoms, benzene.bridgehead_atoms), (1, 0, 0));
    assert_eq!(write_smiles(&parse_smiles("C").unwrap()), "C");
    assert_eq!(
        write_smiles(&parse_smiles("OCC").unwrap()),
        write_smiles(&parse_smiles("CCO").unwrap())
    );
    let fp = |s: &str| morgan_fingerprint(&parse_smiles(s).unwrap(), 2, 2048);
    assert_eq!(fp("CCO"), fp("OCC"));
    assert_ne!(fp("c1ccccc1"), fp("C1CCCCC1"));
    let methane = fp("C").count_ones();
    assert!((1..=3).contains(&methane));
}

#[test]
fn cmr_positive_on_corpus_sample() {
    let t = PropertyTables::shared().unwrap();
    for s in corpus().iter().step_by(50) {
        let m = parse_smiles(s).unwrap();
        assert!(props::cmr(&m, &t.crippen).unwrap() > 0.0, "{s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_and_fingerprint_invariant_under_permutation(idx in 0usize..24980, seed in any::<u64>()) {
        let corpus = corpus();
        let m = parse_smiles(&corpus[idx % corpus.len()]).unwrap();
        let p = shuffled(&m, seed);
        prop_assert_eq!(write_smiles(&m), write_smiles(&p));
        prop_assert_eq!(morgan_fingerprint(&m, 2, 2048), morgan_fingerprint(&p, 2, 2048));
    }

    #[test]
    fn properties_invariant_under_permutation(idx in 0usize..24980, seed in any::<u64>()) {
        let corpus = corpus();
        let t = PropertyTables::shared().unwrap();
        let m = parse_smiles(&corpus[idx % corpus.len()]).unwrap();
        let a = props::compute_properties(&m, t).unwrap();
        let b = props::compute_properties(&shuffled(&m, seed), t).unwrap();
        prop_assert!((a.clogp - b.clogp).abs() < 1e-9);
        prop_assert!((a.cmr - b.cmr).abs() < 1e-9);
        prop_assert!((a.qed - b.qed).abs() < 1e-12);
        prop_assert!((a.sas - b.sas).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.qed));
        prop_assert!((1.0..=10.0).contains(&a.sas));
    }

    #[test]
    fn tanimoto_symmetric_and_bounded(a in prop::collection::btree_set(0usize..256, 0..40),
                                       b in prop::collection::btree_set(0usize..256, 0..40)) {
        let fa = Fingerprint::from_bits(256, 2, a.iter().copied());
        let fb = Fingerprint::from_bits(256, 2, b.iter().copied());
        let ab = tanimoto(&fa, &fb).unwrap();
        prop_assert_eq!(ab, tanimoto(&fb, &fa).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
        if a.is_disjoint(&b) && !(a.is_empty() && b.is_empty()) {
            prop_assert_eq!(ab, 0.0);
        }
    }

    #[test]
    fn parser_never_panics(s in "[CNOSFclnos()=#123%\\[\\]H+\\-.@/0-9]{1,24}") {
        if let Ok(m) = parse_smiles(&s) {
            prop_assert!(check_valence(&m));
            let r = perceive_rings(&m);
            if m.is_connected() {
                prop_assert_eq!(r.sssr_count() + m.atom_count(), m.bond_count() + 1);
            }
        }
    }

    #[test]
    fn random_trees_with_closures_have_cyclomatic_sssr(n in 2usize..14, extra in prop::collection::vec((0usize..14, 0usize..14), 0..4), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        use molvae_chem::{Atom, Bond, BondOrder, Element};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut bonds = Vec::new();
        for i in 1..n {
            bonds.push(Bond::new(rng.random_range(0..i), i, BondOrder::Single));
        }
        for (a, b) in extra {
            let (a, b) = (a % n, b % n);
            if a != b && !bonds.iter().any(|x: &Bond| (x.begin == a && x.end == b) || (x.begin == b && x.end == a)) {
                bonds.push(Bond::new(a, b, BondOrder::Single));
            }
        }
        let atoms = vec![Atom::new(Element::C, false, 0); n];
        let m = Molecule::new(atoms, bonds).unwrap();
        let r = perceive_rings(&m);
        prop_assert_eq!(r.sssr_count() + n, m.bond_count() + 1);
    }
}
