//! Property calculators against reference values computed by an independent
//! cheminformatics toolkit (see tools/make_golden.py).

use molvae_chem::props::{self, PropertyTables};
use molvae_chem::parse_smiles;

struct Row {
    smiles: String,
    clogp: f64,
    cmr: f64,
    mw: f64,
    hba: usize,
    hbd: usize,
    tpsa: f64,
    rotb: usize,
    arom: usize,
    alerts: usize,
    qed: f64,
    sas: f64,
}

fn golden() -> Vec<Row> {
    include_str!("data/golden_props.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let r = |i: usize| f[i].parse::<f64>().unwrap();
            let n = |i: usize| f[i].parse::<usize>().unwrap();
            Row {
                smiles: f[0].to_string(),
                clogp: r(1),
                cmr: r(2),
                mw: r(3),
                hba: n(4),
                hbd: n(5),
                tpsa: r(6),
                rotb: n(7),
                arom: n(8),
                alerts: n(9),
                qed: r(10),
                sas: r(11),
            }
        })
        .collect()
}

fn tables() -> &'static PropertyTables {
    PropertyTables::shared().unwrap()
}

#[test]
fn golden_set_has_fifty_molecules() {
    assert_eq!(golden().len(), 50);
}

#[test]
fn crippen_within_tolerance() {
    for row in golden() {
        let m = parse_smiles(&row.smiles).unwrap();
        let (lp, mr) = props::clogp_cmr(&m, &tables().crippen).unwrap();
        assert!((lp - row.clogp).abs() <= 0.05, "{}: clogp {lp} vs {}", row.smiles, row.clogp);
        assert!((mr - row.cmr).abs() <= 0.05, "{}: cmr {mr} vs {}", row.smiles, row.cmr);
    }
}

#[test]
fn descriptors_match() {
    for row in golden() {
        let m = parse_smiles(&row.smiles).unwrap();
        let d = props::descriptors(&m, tables()).unwrap();
        let s = &row.smiles;
        assert!((d.molecular_weight - row.mw).abs() < 0.01, "{s}: mw");
        assert_eq!(d.h_bond_acceptors, row.hba, "{s}: hba");
        assert_eq!(d.h_bond_donors, row.hbd, "{s}: hbd");
        assert!((d.polar_surface_area - row.tpsa).abs() <= 0.1, "{s}: tpsa");
        assert_eq!(d.rotatable_bonds, row.rotb, "{s}: rotb");
        assert_eq!(d.aromatic_rings, row.arom, "{s}: arom");
        assert_eq!(d.structural_alerts, row.alerts, "{s}: alerts");
    }
}

#[test]
fn qed_and_sas_within_tolerance() {
    for row in golden() {
        let m = parse_smiles(&row.smiles).unwrap();
        let p = props::compute_properties(&m, tables()).unwrap();
        assert!((p.qed - row.qed).abs() <= 0.02, "{}: qed {} vs {}", row.smiles, p.qed, row.qed);
        assert!((p.sas - row.sas).abs() <= 0.1, "{}: sas {} vs {}", row.smiles, p.sas, row.sas);
    }
}

#[test]
fn homologous_alkanes_have_constant_increment() {
    let rows = golden();
    let chain = |n: usize| {
        let s = "C".repeat(n);
        rows.iter().find(|r| r.smiles == s).unwrap()
    };
    let ref_step = chain(4).clogp - chain(3).clogp;
    for n in 3..8 {
        let ours: Vec<f64> = [n, n + 1]
            .iter()
            .map(|&k| props::clogp(&parse_smiles(&"C".repeat(k)).unwrap(), &tables().crippen).unwrap())
            .collect();
        assert!((chain(n + 1).clogp - chain(n).clogp - ref_step).abs() < 1e-3);
        assert!((ours[1] - ours[0] - ref_step).abs() < 1e-3);
    }
}

#[test]
fn alkane_is_easier_to_make_than_adamantane() {
    let rows = golden();
    let hexane = rows.iter().find(|r| r.smiles == "CCCCCC").unwrap();
    let adamantane = rows.iter().find(|r| r.smiles == "C1C2CC3CC1CC(C2)C3").unwrap();
    assert!(hexane.sas < adamantane.sas);
    let t = tables();
    let a = props::sas(&parse_smiles(&hexane.smiles).unwrap(), &t.sas);
    let b = props::sas(&parse_smiles(&adamantane.smiles).unwrap(), &t.sas);
    assert!(a < b);
}

#[test]
fn data_dir_override_falls_back_per_file() {
    let dir = std::env::temp_dir().join(format!("molvae-tables-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("qed_alerts.patterns"), "# no alerts\n").unwrap();
    let t = PropertyTables::from_dir(&dir).unwrap();
    assert!(t.alerts.is_empty());
    assert_eq!(t.crippen.types().len(), tables().crippen.types().len());
    std::fs::write(dir.join("crippen.tsv"), "C1\t[CH4\t0.1\t1\n").unwrap();
    assert!(PropertyTables::from_dir(&dir).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
