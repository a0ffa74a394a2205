//! Generation metrics and reports.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use molvae_chem::props::{condition_satisfied, ghose_pass, CONDITION_NAMES};
use molvae_chem::{morgan_fingerprint, parse_smiles, tanimoto, ConditionVector, Fingerprint, PropertyVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::GenerationSet;

pub const REPORT_SCHEMA: u32 = 1;
pub const FP_RADIUS: usize = 2;
pub const FP_BITS: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{0}")]
    Empty(&'static str),
    #[error("unparseable SMILES `{0}`")]
    Smiles(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
}

fn percent(part: usize, whole: usize) -> f64 {
    100.0 * part as f64 / whole as f64
}

/// Two-decimal rounding used in every report.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// `100·|valid| / n`.
pub fn validity_score(valid: usize, total: usize) -> Result<f64, EvalError> {
    if total == 0 {
        return Err(EvalError::Empty("no generated molecules"));
    }
    Ok(percent(valid, total))
}

/// `100·(1 − |valid ∩ training| / |valid|)`, over the valid list with
/// repeats counted.
pub fn novelty_score<S: AsRef<str>>(valid: &[S], training: &HashSet<String>) -> Result<f64, EvalError> {
    if valid.is_empty() {
        return Err(EvalError::Empty("no valid molecules"));
    }
    let seen = valid.iter().filter(|s| training.contains(s.as_ref())).count();
    Ok(100.0 * (1.0 - seen as f64 / valid.len() as f64))
}

/// `100·|distinct valid| / n_generated`.
pub fn uniqueness_score<S: AsRef<str>>(valid: &[S], n_generated: usize) -> Result<f64, EvalError> {
    if n_generated == 0 {
        return Err(EvalError::Empty("no generated molecules"));
    }
    let distinct: HashSet<&str> = valid.iter().map(AsRef::as_ref).collect();
    Ok(percent(distinct.len(), n_generated))
}

/// `100·|distinct valid| / |valid|`.
pub fn uniqueness_of_valid<S: AsRef<str>>(valid: &[S]) -> Result<f64, EvalError> {
    uniqueness_score(valid, valid.len()).map_err(|_| EvalError::Empty("no valid molecules"))
}

pub fn fingerprint(smiles: &str) -> Result<Fingerprint, EvalError> {
    let mol = parse_smiles(smiles).map_err(|_| EvalError::Smiles(smiles.to_string()))?;
    Ok(morgan_fingerprint(&mol, FP_RADIUS, FP_BITS))
}

fn sim(a: &Fingerprint, b: &Fingerprint) -> f64 {
    tanimoto(a, b).expect("fingerprints share one length")
}

/// Similarity-threshold variants: a valid molecule is novel when no
/// training molecule reaches `threshold`; uniqueness counts the connected
/// groups of distinct valid molecules linked by similarity ≥ `threshold`,
/// over `n_generated`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScores {
    pub threshold: f64,
    pub novelty: f64,
    pub uniqueness: f64,
}

pub fn threshold_scores(
    valid: &[Fingerprint],
    distinct: &[Fingerprint],
    training: &[Fingerprint],
    n_generated: usize,
    threshold: f64,
) -> Result<ThresholdScores, EvalError> {
    if valid.is_empty() || n_generated == 0 {
        return Err(EvalError::Empty("no valid molecules"));
    }
    let novel = valid
        .iter()
        .filter(|f| training.iter().all(|t| sim(f, t) < threshold))
        .count();
    let n = distinct.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if sim(&distinct[i], &distinct[j]) >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let groups = (0..n).filter(|&i| find(&mut parent, i) == i).count();
    Ok(ThresholdScores {
        threshold,
        novelty: percent(novel, valid.len()),
        uniqueness: percent(groups, n_generated),
    })
}

/// Condition satisfaction over valid molecules, per active slot and jointly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScores {
    pub single: BTreeMap<String, f64>,
    pub multi: Option<f64>,
}

pub fn objective_scores(props: &[PropertyVector], c: &ConditionVector) -> ObjectiveScores {
    let mut hits = [0usize; 4];
    let mut all = 0;
    for p in props {
        let ok = condition_satisfied(p, c);
        for i in 0..4 {
            hits[i] += ok[i] as usize;
        }
        all += ok.iter().all(|&b| b) as usize;
    }
    let n = props.len();
    let pct = |k: usize| if n == 0 { 0.0 } else { percent(k, n) };
    let single = (0..4)
        .filter(|&i| c.active[i])
        .map(|i| (CONDITION_NAMES[i].to_string(), pct(hits[i])))
        .collect();
    ObjectiveScores {
        single,
        multi: (c.active_count() > 0).then(|| pct(all)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhoseRates {
    pub clogp: f64,
    pub cmr: f64,
    pub both: f64,
}

pub fn ghose_rates(props: &[PropertyVector]) -> GhoseRates {
    let (mut a, mut b, mut both) = (0, 0, 0);
    for p in props {
        let (x, y) = ghose_pass(p);
        a += x as usize;
        b += y as usize;
        both += (x && y) as usize;
    }
    let n = props.len();
    let pct = |k| if n == 0 { 0.0 } else { percent(k, n) };
    GhoseRates {
        clogp: pct(a),
        cmr: pct(b),
        both: pct(both),
    }
}

/// Boxplot numbers. Quartiles interpolate linearly between order
/// statistics; outliers lie beyond 1.5 IQR of the quartiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers_low: usize,
    pub outliers_high: usize,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (q1, q3) = (quantile(&v, 0.25), quantile(&v, 0.75));
    let iqr = q3 - q1;
    Some(Summary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        min: v[0],
        q1,
        median: quantile(&v, 0.5),
        q3,
        max: v[v.len() - 1],
        outliers_low: v.iter().filter(|&&x| x < q1 - 1.5 * iqr).count(),
        outliers_high: v.iter().filter(|&&x| x > q3 + 1.5 * iqr).count(),
    })
}

/// Dataset fingerprints for nearest-neighbour queries.
pub struct NearestIndex {
    entries: Vec<(String, Fingerprint, PropertyVector)>,
}

impl NearestIndex {
    pub fn new<'a>(records: impl IntoIterator<Item = (&'a str, PropertyVector)>) -> Result<Self, EvalError> {
        let mut entries = records
            .into_iter()
            .map(|(s, p)| Ok((s.to_string(), fingerprint(s)?, p)))
            .collect::<Result<Vec<_>, EvalError>>()?;
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(NearestIndex { entries })
    }

    /// Most similar entry; ties go to the lexicographically smallest SMILES.
    pub fn nearest(&self, fp: &Fingerprint) -> Result<(&str, f64, &PropertyVector), EvalError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, f, _)) in self.entries.iter().enumerate() {
            let s = sim(fp, f);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (i, s) = best.ok_or(EvalError::Empty("empty dataset"))?;
        let e = &self.entries[i];
        Ok((&e.0, s, &e.2))
    }

    pub fn fingerprints(&self) -> impl Iterator<Item = &Fingerprint> {
        self.entries.iter().map(|e| &e.1)
    }
}

/// A generated molecule next to its most similar dataset molecule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub generated: String,
    pub nearest: String,
    pub similarity: f64,
    pub generated_qed: f64,
    pub nearest_qed: f64,
    pub delta_qed: f64,
    pub generated_sas: f64,
    pub nearest_sas: f64,
    pub delta_sas: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub checkpoint: String,
    pub generation: String,
    pub dataset: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub condition: String,
    pub n_generated: usize,
    pub n_valid: usize,
    pub validity: f64,
    pub novelty: f64,
    pub uniqueness: f64,
    /// Distinct valid over valid.
    pub uniqueness_of_valid: f64,
    pub threshold: Option<ThresholdScores>,
    pub ghose: GhoseRates,
    pub objectives: ObjectiveScores,
    pub distributions: BTreeMap<String, Summary>,
    pub exemplars: Vec<Exemplar>,
    pub invalid_reasons: BTreeMap<String, usize>,
    pub metadata: ReportMetadata,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    pub threshold: Option<f64>,
    /// Number of highest-QED generated molecules paired with neighbours.
    pub exemplars: usize,
    pub metadata: ReportMetadata,
}

/// Scores a generation set against the training molecules (novelty) and
/// the whole dataset (nearest neighbours).
pub fn evaluate(
    set: &GenerationSet,
    training: &HashSet<String>,
    index: &NearestIndex,
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let n = set.attempts.len();
    let valid: Vec<&str> = set.valid().map(|(s, _)| s).collect();
    let props: Vec<PropertyVector> = set.valid().map(|(_, p)| *p).collect();
    let zero_if_empty = |r: Result<f64, EvalError>| match r {
        Err(EvalError::Empty(_)) => Ok(0.0),
        other => other,
    };
    let threshold = match opts.threshold {
        Some(t) if !valid.is_empty() => {
            let fps = valid.iter().map(|s| fingerprint(s)).collect::<Result<Vec<_>, _>>()?;
            let mut seen = HashSet::new();
            let distinct: Vec<Fingerprint> = valid
                .iter()
                .zip(&fps)
                .filter(|(s, _)| seen.insert(**s))
                .map(|(_, f)| f.clone())
                .collect();
            let train_fps: Vec<Fingerprint> = training.iter().map(|s| fingerprint(s)).collect::<Result<_, _>>()?;
            let mut s = threshold_scores(&fps, &distinct, &train_fps, n, t)?;
            s.novelty = round2(s.novelty);
            s.uniqueness = round2(s.uniqueness);
            Some(s)
        }
        _ => None,
    };

    let mut distributions = BTreeMap::new();
    let columns: [(&str, fn(&PropertyVector) -> f64); 4] =
        [("clogp", |p| p.clogp), ("cmr", |p| p.cmr), ("qed", |p| p.qed), ("sas", |p| p.sas)];
    for (name, get) in columns {
        let v: Vec<f64> = props.iter().map(get).collect();
        if let Some(s) = summarize(&v) {
            distributions.insert(name.to_string(), s);
        }
    }

    let mut ranked: Vec<(&str, &PropertyVector)> = set.valid().collect();
    ranked.sort_by(|a, b| b.1.qed.total_cmp(&a.1.qed).then(a.0.cmp(b.0)));
    ranked.dedup_by(|a, b| a.0 == b.0);
    let mut exemplars = Vec::new();
    for (s, p) in ranked.into_iter().take(opts.exemplars) {
        let (near, similarity, q) = index.nearest(&fingerprint(s)?)?;
        exemplars.push(Exemplar {
            generated: s.to_string(),
            nearest: near.to_string(),
            similarity,
            generated_qed: p.qed,
            nearest_qed: q.qed,
            delta_qed: p.qed - q.qed,
            generated_sas: p.sas,
            nearest_sas: q.sas,
            delta_sas: p.sas - q.sas,
        });
    }

    let mut invalid_reasons = BTreeMap::new();
    for g in &set.attempts {
        if let Some(r) = &g.reason {
            *invalid_reasons.entry(r.clone()).or_insert(0) += 1;
        }
    }

    let mut objectives = objective_scores(&props, &set.condition);
    for v in objectives.single.values_mut() {
        *v = round2(*v);
    }
    objectives.multi = objectives.multi.map(round2);
    let ghose = ghose_rates(&props);

    let report = EvalReport {
        schema: REPORT_SCHEMA,
        condition: condition_label(&set.condition),
        n_generated: n,
        n_valid: valid.len(),
        validity: round2(validity_score(valid.len(), n)?),
        novelty: round2(zero_if_empty(novelty_score(&valid, training))?),
        uniqueness: round2(uniqueness_score(&valid, n)?),
        uniqueness_of_valid: round2(zero_if_empty(uniqueness_of_valid(&valid))?),
        threshold,
        ghose: GhoseRates {
            clogp: round2(ghose.clogp),
            cmr: round2(ghose.cmr),
            both: round2(ghose.both),
        },
        objectives,
        distributions,
        exemplars,
        invalid_reasons,
        metadata: opts.metadata.clone(),
    };
    report.check()?;
    Ok(report)
}

pub fn condition_label(c: &ConditionVector) -> String {
    if c.active_count() == 0 {
        "none".into()
    } else {
        c.to_string()
    }
}

impl EvalReport {
    /// Range and consistency checks run before any rendering.
    pub fn check(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::Inconsistent(m));
        let mut pcts = vec![
            ("validity", self.validity),
            ("novelty", self.novelty),
            ("uniqueness", self.uniqueness),
            ("uniqueness_of_valid", self.uniqueness_of_valid),
        ];
        pcts.extend(self.objectives.single.iter().map(|(k, v)| (k.as_str(), *v)));
        for (name, v) in pcts {
            if !(0.0..=100.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 100]"));
            }
        }
        if self.uniqueness > self.validity {
            return bad("uniqueness exceeds validity".into());
        }
        if let Some(m) = self.objectives.multi {
            let min = self.objectives.single.values().copied().fold(f64::INFINITY, f64::min);
            if m > min {
                return bad(format!("multi-objective {m} exceeds single-objective minimum {min}"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        self.check()?;
        Ok(serde_json::to_string_pretty(self).expect("report serializes"))
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Inconsistent(e.to_string()))
    }

    pub fn to_markdown(&self) -> Result<String, EvalError> {
        self.check()?;
        let mut s = String::new();
        let _ = writeln!(s, "# Generation report\n");
        let _ = writeln!(s, "Condition: {}; {} generated, {} valid.\n", self.condition, self.n_generated, self.n_valid);
        let _ = writeln!(s, "| Validity (%) | Novelty (%) | Uniqueness (%) | Uniqueness of valid (%) |");
        let _ = writeln!(s, "|---|---|---|---|");
        let _ = writeln!(
            s,
            "| {:.2} | {:.2} | {:.2} | {:.2} |\n",
            self.validity, self.novelty, self.uniqueness, self.uniqueness_of_valid
        );
        if let Some(t) = &self.threshold {
            let _ = writeln!(
                s,
                "Similarity threshold {:.2}: novelty {:.2}%, uniqueness {:.2}%.\n",
                t.threshold, t.novelty, t.uniqueness
            );
        }
        if !self.objectives.single.is_empty() {
            let _ = writeln!(s, "| Objective | Satisfied (%) |");
            let _ = writeln!(s, "|---|---|");
            for (k, v) in &self.objectives.single {
                let _ = writeln!(s, "| {} | {:.2} |", display_name(k), v);
            }
            if let Some(m) = self.objectives.multi {
                let _ = writeln!(s, "| All conditions | {m:.2} |");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "| Ghose window | Pass (%) |");
        let _ = writeln!(s, "|---|---|");
        let _ = writeln!(s, "| ClogP | {:.2} |", self.ghose.clogp);
        let _ = writeln!(s, "| CMR | {:.2} |", self.ghose.cmr);
        let _ = writeln!(s, "| Both | {:.2} |\n", self.ghose.both);
        if !self.distributions.is_empty() {
            let _ = writeln!(s, "| Property | Mean | Min | Q1 | Median | Q3 | Max | Outliers |");
            let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
            for (k, d) in &self.distributions {
                let _ = writeln!(
                    s,
                    "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {} |",
                    display_name(k),
                    d.mean,
                    d.min,
                    d.q1,
                    d.median,
                    d.q3,
                    d.max,
                    d.outliers_low + d.outliers_high
                );
            }
            s.push('\n');
        }
        if !self.exemplars.is_empty() {
            let _ = writeln!(s, "| Generated | Nearest in dataset | Similarity | QED | ΔQED | SAS | ΔSAS |");
            let _ = writeln!(s, "|---|---|---|---|---|---|---|");
            for e in &self.exemplars {
                let _ = writeln!(
                    s,
                    "| `{}` | `{}` | {:.2} | {:.2} | {:+.2} | {:.2} | {:+.2} |",
                    e.generated, e.nearest, e.similarity, e.generated_qed, e.delta_qed, e.generated_sas, e.delta_sas
                );
            }
            s.push('\n');
        }
        if !self.invalid_reasons.is_empty() {
            let parts: Vec<String> = self.invalid_reasons.iter().map(|(k, v)| format!("{k} {v}")).collect();
            let _ = writeln!(s, "Invalid decodes: {}.", parts.join(", "));
        }
        Ok(s)
    }
}

fn display_name(key: &str) -> &str {
    match key {
        "clogp" => "ClogP",
        "cmr" => "CMR",
        "qed" => "QED",
        "sas" => "SAS",
        other => other,
    }
}

/// Uniqueness, validity and novelty across β values as a Markdown table.
pub fn beta_table(rows: &[(f64, &EvalReport)]) -> String {
    let mut s = String::from("| β | Validity (%) | Novelty (%) | Uniqueness (%) |\n|---|---|---|---|\n");
    for (beta, r) in rows {
        let _ = writeln!(s, "| {} | {:.2} | {:.2} | {:.2} |", beta, r.validity, r.novelty, r.uniqueness);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Generated;

    fn p(clogp: f64, cmr: f64, qed: f64, sas: f64) -> PropertyVector {
        PropertyVector { clogp, cmr, qed, sas }
    }

    #[test]
    fn formula_examples() {
        assert_eq!(validity_score(1000, 1000).unwrap(), 100.0);
        assert_eq!(validity_score(0, 1000).unwrap(), 0.0);
        assert_eq!(validity_score(465, 1000).unwrap(), 46.5);
        assert!(validity_score(0, 0).is_err());

        let train: HashSet<String> = ["CCO", "CCN"].iter().map(|s| s.to_string()).collect();
        assert_eq!(novelty_score(&["CCC", "CCCl"], &train).unwrap(), 100.0);
        assert_eq!(novelty_score(&["CCO", "CCN"], &train).unwrap(), 0.0);
        assert_eq!(novelty_score(&["CCO", "C", "CC", "CCC"], &train).unwrap(), 75.0);
        assert!(novelty_score::<&str>(&[], &train).is_err());

        assert_eq!(uniqueness_score(&["C", "CC", "CCC"], 3).unwrap(), 100.0);
        assert_eq!(uniqueness_score(&["C"; 8], 8).unwrap(), 100.0 / 8.0);
        let many: Vec<String> = (0..994).map(|i| format!("C{i}")).collect();
        assert!((uniqueness_score(&many, 1000).unwrap() - 99.4).abs() < 1e-12);
        assert_eq!(uniqueness_of_valid(&["C", "C"]).unwrap(), 50.0);
    }

    #[test]
    fn objective_bounds() {
        let c = ConditionVector::parse("c1=2,c2=6.0").unwrap();
        let all = [p(2.0, 60.0, 0.5, 3.0), p(2.4, 57.0, 0.5, 3.0)];
        let s = objective_scores(&all, &c);
        assert_eq!(s.single["clogp"], 100.0);
        assert_eq!(s.single["cmr"], 100.0);
        assert_eq!(s.multi, Some(100.0));

        let mixed = [
            p(2.0, 60.0, 0.5, 3.0),
            p(2.0, 80.0, 0.5, 3.0),
            p(4.0, 60.0, 0.5, 3.0),
            p(4.0, 80.0, 0.5, 3.0),
            p(2.1, 90.0, 0.5, 3.0),
        ];
        let s = objective_scores(&mixed, &c);
        assert_eq!(s.single["clogp"], 60.0);
        assert_eq!(s.single["cmr"], 40.0);
        assert!(s.multi.unwrap() <= 40.0);
        assert_eq!(objective_scores(&mixed, &ConditionVector::none()).multi, None);
    }

    #[test]
    fn quartiles_follow_linear_interpolation() {
        // numpy.percentile([1, 2, 3, 4, 100], [25, 50, 75]) = [2, 3, 4]
        let s = summarize(&[4.0, 1.0, 100.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!((s.outliers_low, s.outliers_high), (0, 1));
        // numpy.percentile([1, 2, 3, 4], [25, 75]) = [1.75, 3.25]
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.q3, s.mean), (1.75, 3.25, 2.5));
        assert!(summarize(&[]).is_none());
    }

    #[test]
    fn nearest_neighbour() {
        let idx = NearestIndex::new([("c1ccccc1O", p(1.4, 28.0, 0.5, 1.0)), ("CCO", p(0.0, 12.0, 0.4, 2.0)), ("OCC", p(0.0, 12.0, 0.4, 2.0))]).unwrap();
        let (s, sim, _) = idx.nearest(&fingerprint("CCO").unwrap()).unwrap();
        assert_eq!((s, sim), ("CCO", 1.0));
        let (_, sim, _) = idx.nearest(&fingerprint("CCCCCCF").unwrap()).unwrap();
        assert!((0.0..=1.0).contains(&sim));
        let empty = NearestIndex::new([]).unwrap();
        assert!(empty.nearest(&fingerprint("C").unwrap()).is_err());
    }

    #[test]
    fn threshold_variant_reduces_to_exact_at_one() {
        let valid = ["CCO", "CCO", "CCCO", "c1ccccc1"];
        let fps: Vec<_> = valid.iter().map(|s| fingerprint(s).unwrap()).collect();
        let distinct: Vec<_> = ["CCO", "CCCO", "c1ccccc1"].iter().map(|s| fingerprint(s).unwrap()).collect();
        let train = [fingerprint("CCO").unwrap()];
        let t = threshold_scores(&fps, &distinct, &train, 5, 1.0).unwrap();
        assert_eq!(t.novelty, 50.0);
        assert_eq!(t.uniqueness, 60.0);
        let loose = threshold_scores(&fps, &distinct, &train, 5, 0.0).unwrap();
        assert_eq!((loose.novelty, loose.uniqueness), (0.0, 20.0));
    }

    fn set() -> GenerationSet {
        let ok = |s: &str, q: f64| Generated {
            smiles: Some(s.into()),
            properties: Some(p(2.2, 58.0, q, 2.5)),
            reason: None,
        };
        GenerationSet {
            condition: ConditionVector::parse("c1=2,c2=6").unwrap(),
            attempts: vec![
                ok("CCOc1ccccc1", 0.6),
                ok("CCOc1ccccc1", 0.6),
                ok("CCCc1ccccc1", 0.5),
                Generated {
                    smiles: None,
                    properties: None,
                    reason: Some("valence".into()),
                },
            ],
        }
    }

    #[test]
    fn report_round_trips_and_renders() {
        let train: HashSet<String> = ["CCCc1ccccc1".to_string()].into();
        let idx = NearestIndex::new([("CCCc1ccccc1", p(2.0, 50.0, 0.55, 2.0))]).unwrap();
        let opts = EvalOptions {
            threshold: Some(0.9),
            exemplars: 2,
            metadata: ReportMetadata::default(),
        };
        let r = evaluate(&set(), &train, &idx, &opts).unwrap();
        assert_eq!(r.validity, 75.0);
        assert_eq!(r.uniqueness, 50.0);
        assert_eq!(r.novelty, 66.67);
        assert_eq!(r.exemplars.len(), 2);
        assert_eq!(r.exemplars[0].generated, "CCOc1ccccc1");
        assert_eq!(r.invalid_reasons["valence"], 1);
        let json = r.to_json().unwrap();
        assert_eq!(EvalReport::from_json(&json).unwrap(), r);
        let md = r.to_markdown().unwrap();
        assert!(md.contains("| 75.00 | 66.67 | 50.00 | 66.67 |"), "{md}");
        assert!(md.contains("| ClogP | 100.00 |"));
        assert_eq!(evaluate(&set(), &train, &idx, &opts).unwrap(), r);
    }

    #[test]
    fn inconsistent_report_is_refused() {
        let train = HashSet::new();
        let idx = NearestIndex::new([("C", p(0.6, 7.0, 0.4, 1.0))]).unwrap();
        let mut r = evaluate(&set(), &train, &idx, &EvalOptions::default()).unwrap();
        r.objectives.multi = Some(101.0);
        assert!(r.to_json().is_err());
        assert!(r.to_markdown().is_err());
    }
}
