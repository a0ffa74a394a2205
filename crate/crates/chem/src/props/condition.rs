//! Condition vectors on the discrete property grids and satisfaction checks.

use serde::{Deserialize, Serialize};

use super::PropertyVector;

pub const CONDITION_NAMES: [&str; 4] = ["clogp", "cmr", "qed", "sas"];

/// Allowed values per slot, already scaled (CMR by 0.1, QED by 10).
pub const GRIDS: [&[f64]; 4] = [
    &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
    &[4.0, 5.0, 6.0, 7.0, 8.0],
    &[5.0, 6.0, 7.0, 8.0, 9.0],
    &[3.0, 4.0, 5.0, 6.0],
];

pub const CMR_SCALE: f64 = 0.1;
pub const QED_SCALE: f64 = 10.0;

pub const CLOGP_TOLERANCE: f64 = 0.5;
pub const CMR_TOLERANCE: f64 = 5.0;
pub const QED_TOLERANCE: f64 = 0.05;
pub const SAS_TOLERANCE: f64 = 0.5;

const GRID_EPS: f64 = 1e-9;

/// Scaled condition targets `(c1, c2, c3, c4)` and which of them are in force.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionVector {
    pub values: [f64; 4],
    pub active: [bool; 4],
}

impl ConditionVector {
    /// No active conditions.
    pub fn none() -> Self {
        ConditionVector {
            values: [0.0; 4],
            active: [false; 4],
        }
    }

    /// Scaled values of the active slots, in slot order.
    pub fn active_values(&self) -> Vec<f64> {
        (0..4)
            .filter(|&i| self.active[i])
            .map(|i| self.values[i])
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Slots whose value is not a grid point.
    pub fn off_grid(&self) -> Vec<usize> {
        (0..4)
            .filter(|&i| self.active[i] && !on_grid(i, self.values[i]))
            .collect()
    }

    /// Teacher-forcing condition: true properties scaled, rounded to the
    /// nearest integer level and clamped to the grid ends.
    pub fn bucket(p: &PropertyVector, active: [bool; 4]) -> Self {
        let raw = scaled(p);
        let mut values = [0.0; 4];
        for i in 0..4 {
            let g = GRIDS[i];
            values[i] = raw[i].round().clamp(g[0], g[g.len() - 1]);
        }
        ConditionVector { values, active }
    }

    /// Parses `c1=2,c2=6.0` style lists; unnamed slots are inactive.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut c = ConditionVector::none();
        let text = text.trim();
        if text.is_empty() || text == "none" {
            return Ok(c);
        }
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected `cN=value`, got `{part}`"))?;
            let slot = match key.trim() {
                "c1" | "clogp" => 0,
                "c2" | "cmr" => 1,
                "c3" | "qed" => 2,
                "c4" | "sas" => 3,
                other => return Err(format!("unknown condition `{other}`")),
            };
            if c.active[slot] {
                return Err(format!("condition `{}` given twice", key.trim()));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("bad value `{}`", value.trim()))?;
            if !v.is_finite() {
                return Err(format!("bad value `{}`", value.trim()));
            }
            c.values[slot] = v;
            c.active[slot] = true;
        }
        Ok(c)
    }

    /// Every combination of grid values over the given active slots.
    pub fn grid(active: [bool; 4]) -> Vec<ConditionVector> {
        let mut out = vec![ConditionVector {
            values: [0.0; 4],
            active,
        }];
        for i in (0..4).filter(|&i| active[i]) {
            out = out
                .into_iter()
                .flat_map(|c| {
                    GRIDS[i].iter().map(move |&v| {
                        let mut c = c;
                        c.values[i] = v;
                        c
                    })
                })
                .collect();
        }
        out
    }
}

impl std::fmt::Display for ConditionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.active_count() == 0 {
            return f.write_str("none");
        }
        let parts: Vec<String> = (0..4)
            .filter(|&i| self.active[i])
            .map(|i| format!("c{}={}", i + 1, self.values[i]))
            .collect();
        f.write_str(&parts.join(","))
    }
}

fn on_grid(slot: usize, v: f64) -> bool {
    GRIDS[slot].iter().any(|g| (g - v).abs() < GRID_EPS)
}

/// Properties on the condition scale.
pub fn scaled(p: &PropertyVector) -> [f64; 4] {
    [p.clogp, p.cmr * CMR_SCALE, p.qed * QED_SCALE, p.sas]
}

/// Per-property satisfaction, compared in unscaled units with inclusive
/// tolerances. Inactive slots report true.
pub fn condition_satisfied(p: &PropertyVector, c: &ConditionVector) -> [bool; 4] {
    let actual = [p.clogp, p.cmr, p.qed, p.sas];
    let target = [
        c.values[0],
        c.values[1] / CMR_SCALE,
        c.values[2] / QED_SCALE,
        c.values[3],
    ];
    let tol = [CLOGP_TOLERANCE, CMR_TOLERANCE, QED_TOLERANCE, SAS_TOLERANCE];
    let mut out = [true; 4];
    for i in 0..4 {
        if c.active[i] {
            out[i] = (actual[i] - target[i]).abs() <= tol[i] + GRID_EPS;
        }
    }
    out
}

pub fn all_satisfied(p: &PropertyVector, c: &ConditionVector) -> bool {
    condition_satisfied(p, c).iter().all(|&x| x)
}

/// Ghose window membership `(clogp_ok, cmr_ok)`, bounds inclusive.
pub fn ghose_pass(p: &PropertyVector) -> (bool, bool) {
    ((-0.4..=5.6).contains(&p.clogp), (40.0..=130.0).contains(&p.cmr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(clogp: f64, cmr: f64, qed: f64, sas: f64) -> PropertyVector {
        PropertyVector { clogp, cmr, qed, sas }
    }

    #[test]
    fn bucketing_rounds_and_clamps() {
        let all = [true; 4];
        assert_eq!(ConditionVector::bucket(&pv(2.4, 61.0, 0.74, 3.6), all).values, [2.0, 6.0, 7.0, 4.0]);
        assert_eq!(ConditionVector::bucket(&pv(-3.0, 10.0, 0.1, 9.0), all).values, [0.0, 4.0, 5.0, 6.0]);
        assert_eq!(ConditionVector::bucket(&pv(9.0, 300.0, 1.0, 1.0), all).values, [5.0, 8.0, 9.0, 3.0]);
    }

    #[test]
    fn satisfaction_examples() {
        let c = ConditionVector::parse("c1=2,c2=6.0").unwrap();
        assert_eq!(condition_satisfied(&pv(2.3, 60.0, 0.0, 9.0), &c), [true, true, true, true]);
        assert_eq!(condition_satisfied(&pv(2.3, 66.0, 0.0, 9.0), &c), [true, false, true, true]);
    }

    #[test]
    fn tolerance_edges_are_inclusive_and_symmetric() {
        let c = ConditionVector::parse("c1=2,c2=6,c3=7,c4=4").unwrap();
        assert!(all_satisfied(&pv(2.5, 65.0, 0.75, 4.5), &c));
        assert!(all_satisfied(&pv(1.5, 55.0, 0.65, 3.5), &c));
        assert!(!all_satisfied(&pv(2.51, 65.0, 0.75, 4.5), &c));
        assert!(!all_satisfied(&pv(1.49, 65.0, 0.75, 4.5), &c));
    }

    #[test]
    fn grid_and_parsing() {
        assert_eq!(ConditionVector::grid([true; 4]).len(), 6 * 5 * 5 * 4);
        assert_eq!(ConditionVector::grid([true, true, false, false]).len(), 30);
        assert_eq!(ConditionVector::grid([false; 4]).len(), 1);
        let c = ConditionVector::parse("c1=2,c2=6.0").unwrap();
        assert_eq!(c.active, [true, true, false, false]);
        assert_eq!(c.to_string(), "c1=2,c2=6");
        assert!(c.off_grid().is_empty());
        assert_eq!(ConditionVector::parse("c2=6.5").unwrap().off_grid(), vec![1]);
        assert!(ConditionVector::parse("c9=1").is_err());
        assert!(ConditionVector::parse("c1=1,c1=2").is_err());
        assert_eq!(ConditionVector::parse("none").unwrap().active_count(), 0);
    }

    #[test]
    fn ghose_window() {
        assert_eq!(ghose_pass(&pv(2.0, 80.0, 0.5, 3.0)), (true, true));
        assert_eq!(ghose_pass(&pv(-0.4, 40.0, 0.5, 3.0)), (true, true));
        assert_eq!(ghose_pass(&pv(5.6, 130.0, 0.5, 3.0)), (true, true));
        assert_eq!(ghose_pass(&pv(5.7, 131.0, 0.5, 3.0)), (false, false));
    }
}
