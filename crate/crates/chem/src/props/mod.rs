//! Molecular property calculators: Crippen ClogP and CMR, QED with its
//! descriptors, synthetic accessibility, and the condition grids.

mod condition;
mod crippen;
mod descriptors;
mod qed;
mod sas;
mod tables;
mod tpsa;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::molecule::Molecule;

pub use condition::{
    all_satisfied, condition_satisfied, ghose_pass, scaled, ConditionVector, CLOGP_TOLERANCE,
    CMR_SCALE, CMR_TOLERANCE, CONDITION_NAMES, GRIDS, QED_SCALE, QED_TOLERANCE, SAS_TOLERANCE,
};
pub use crippen::{clogp, clogp_cmr, cmr, CrippenTable, CrippenType, CrippenTyping};
pub use descriptors::{descriptors, DescriptorSet};
pub use qed::{qed_from_descriptors, Desirability, QedParams, QED_DESCRIPTORS};
pub use sas::{fragment_score, penalties, rescale, sas, stereo_centers, SasPenalties};
pub use tables::{PropertyTables, SasFragments, DATA_DIR_ENV};
pub use tpsa::{polar_environment, tpsa, PolarEnvironment, TpsaTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    pub clogp: f64,
    pub cmr: f64,
    pub qed: f64,
    pub sas: f64,
}

pub fn qed(mol: &Molecule, tables: &PropertyTables) -> Result<f64> {
    let d = descriptors(mol, tables)?;
    let logp = clogp(mol, &tables.crippen)?;
    Ok(qed_from_descriptors(&d, logp, &tables.qed))
}

/// All four conditioning properties.
pub fn compute_properties(mol: &Molecule, tables: &PropertyTables) -> Result<PropertyVector> {
    let (clogp, cmr) = clogp_cmr(mol, &tables.crippen)?;
    let d = descriptors(mol, tables)?;
    Ok(PropertyVector {
        clogp,
        cmr,
        qed: qed_from_descriptors(&d, clogp, &tables.qed),
        sas: sas(mol, &tables.sas),
    })
}

/// A named scalar property, selectable at runtime.
pub trait PropertyCalculator: Send + Sync {
    fn name(&self) -> &'static str;
    fn compute(&self, mol: &Molecule, tables: &PropertyTables) -> Result<f64>;
}

macro_rules! calculator {
    ($ty:ident, $name:literal, |$m:ident, $t:ident| $body:expr) => {
        struct $ty;
        impl PropertyCalculator for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn compute(&self, $m: &Molecule, $t: &PropertyTables) -> Result<f64> {
                $body
            }
        }
    };
}

calculator!(ClogpCalc, "clogp", |m, t| clogp(m, &t.crippen));
calculator!(CmrCalc, "cmr", |m, t| cmr(m, &t.crippen));
calculator!(QedCalc, "qed", |m, t| qed(m, t));
calculator!(SasCalc, "sas", |m, t| Ok(sas(m, &t.sas)));
calculator!(MwCalc, "mw", |m, _t| Ok(m.molecular_weight()));
calculator!(TpsaCalc, "tpsa", |m, t| Ok(tpsa(m, &crate::rings::perceive_rings(m), &t.tpsa)));
calculator!(HbaCalc, "hba", |m, t| Ok(descriptors(m, t)?.h_bond_acceptors as f64));
calculator!(HbdCalc, "hbd", |m, t| Ok(descriptors(m, t)?.h_bond_donors as f64));
calculator!(RotbCalc, "rotb", |m, t| Ok(descriptors(m, t)?.rotatable_bonds as f64));
calculator!(AromCalc, "arom", |m, t| Ok(descriptors(m, t)?.aromatic_rings as f64));
calculator!(AlertsCalc, "alerts", |m, t| Ok(descriptors(m, t)?.structural_alerts as f64));

/// Property calculators keyed by name.
pub struct CalculatorRegistry {
    calculators: BTreeMap<&'static str, Box<dyn PropertyCalculator>>,
}

impl CalculatorRegistry {
    pub fn empty() -> Self {
        CalculatorRegistry {
            calculators: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, calc: Box<dyn PropertyCalculator>) {
        self.calculators.insert(calc.name(), calc);
    }

    pub fn get(&self, name: &str) -> Option<&dyn PropertyCalculator> {
        self.calculators.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.calculators.keys().copied()
    }
}

impl Default for CalculatorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ClogpCalc));
        r.register(Box::new(CmrCalc));
        r.register(Box::new(QedCalc));
        r.register(Box::new(SasCalc));
        r.register(Box::new(MwCalc));
        r.register(Box::new(TpsaCalc));
        r.register(Box::new(HbaCalc));
        r.register(Box::new(HbdCalc));
        r.register(Box::new(RotbCalc));
        r.register(Box::new(AromCalc));
        r.register(Box::new(AlertsCalc));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn registry_lookup() {
        let reg = CalculatorRegistry::default();
        let tables = PropertyTables::shared().unwrap();
        let m = parse_smiles("C").unwrap();
        let mw = reg.get("mw").unwrap().compute(&m, tables).unwrap();
        assert!((mw - 16.043).abs() < 1e-3);
        assert!(reg.get("nope").is_none());
        assert_eq!(reg.names().count(), 11);
    }

    #[test]
    fn properties_in_range() {
        let tables = PropertyTables::shared().unwrap();
        for s in ["C", "CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1"] {
            let p = compute_properties(&parse_smiles(s).unwrap(), tables).unwrap();
            assert!((0.0..=1.0).contains(&p.qed));
            assert!((1.0..=10.0).contains(&p.sas));
        }
    }
}
