//! Quantitative estimate of drug-likeness.

use crate::error::{ChemError, Result};

use super::descriptors::DescriptorSet;

pub const QED_DESCRIPTORS: [&str; 8] = ["MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS"];

/// Asymmetric double sigmoid parameters of one descriptor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Desirability {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub dmax: f64,
    pub weight: f64,
}

impl Desirability {
    pub fn eval(&self, x: f64) -> f64 {
        let rise = 1.0 + (-(x - self.c + self.d / 2.0) / self.e).exp();
        let fall = 1.0 + (-(x - self.c - self.d / 2.0) / self.f).exp();
        (self.a + self.b / rise * (1.0 - 1.0 / fall)) / self.dmax
    }
}

/// Desirability functions in [`QED_DESCRIPTORS`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct QedParams {
    pub functions: [Desirability; 8],
}

impl QedParams {
    /// Rows: `descriptor a b c d e f dmax weight`, tab separated, one per
    /// descriptor in any order.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut slots: [Option<Desirability>; 8] = [None; 8];
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ChemError::Table {
                file: name.to_string(),
                line: lineno + 1,
                message,
            };
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() != 9 {
                return Err(err("expected descriptor and 8 numbers".into()));
            }
            let slot = QED_DESCRIPTORS
                .iter()
                .position(|d| *d == f[0])
                .ok_or_else(|| err(format!("unknown descriptor `{}`", f[0])))?;
            let v: Vec<f64> = f[1..]
                .iter()
                .map(|s| s.parse().map_err(|_| err(format!("bad number `{s}`"))))
                .collect::<Result<_>>()?;
            slots[slot] = Some(Desirability {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
                e: v[4],
                f: v[5],
                dmax: v[6],
                weight: v[7],
            });
        }
        let mut functions = [Desirability {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 1.0,
            f: 1.0,
            dmax: 1.0,
            weight: 0.0,
        }; 8];
        for (i, s) in slots.iter().enumerate() {
            functions[i] = s.ok_or_else(|| ChemError::Table {
                file: name.to_string(),
                line: 0,
                message: format!("missing descriptor {}", QED_DESCRIPTORS[i]),
            })?;
        }
        Ok(QedParams { functions })
    }
}

/// Weighted geometric mean of the eight desirabilities.
pub fn qed_from_descriptors(d: &DescriptorSet, clogp: f64, params: &QedParams) -> f64 {
    let x = [
        d.molecular_weight,
        clogp,
        d.h_bond_acceptors as f64,
        d.h_bond_donors as f64,
        d.polar_surface_area,
        d.rotatable_bonds as f64,
        d.aromatic_rings as f64,
        d.structural_alerts as f64,
    ];
    let mut num = 0.0;
    let mut den = 0.0;
    for (f, &xi) in params.functions.iter().zip(&x) {
        num += f.weight * f.eval(xi).ln();
        den += f.weight;
    }
    (num / den).exp().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::PropertyTables;

    fn base() -> DescriptorSet {
        DescriptorSet {
            molecular_weight: 300.0,
            h_bond_acceptors: 4,
            h_bond_donors: 1,
            polar_surface_area: 60.0,
            rotatable_bonds: 4,
            aromatic_rings: 2,
            structural_alerts: 0,
        }
    }

    #[test]
    fn alerts_never_increase_qed() {
        let params = &PropertyTables::shared().unwrap().qed;
        let mut last = f64::INFINITY;
        for alerts in 0..8 {
            let d = DescriptorSet {
                structural_alerts: alerts,
                ..base()
            };
            let q = qed_from_descriptors(&d, 2.5, params);
            assert!(q <= last);
            assert!((0.0..=1.0).contains(&q));
            last = q;
        }
    }
}
