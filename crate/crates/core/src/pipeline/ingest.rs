//! SMILES ingestion with a per-line rejection log.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};

use molvae_chem::{canonical_form, compute_properties, parse_smiles, write_smiles, ChemError, PropertyTables, PropertyVector};
use serde::{Deserialize, Serialize};

use crate::codec::{decode, encode, GraphMatrix, MAX_ATOMS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Charge,
    Fragment,
    Size,
    Vocabulary,
    Syntax,
    Valence,
    AmbiguousHydrogen,
    Property,
    Duplicate,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Charge => "charge",
            RejectReason::Fragment => "fragment",
            RejectReason::Size => "size",
            RejectReason::Vocabulary => "vocabulary",
            RejectReason::Syntax => "syntax",
            RejectReason::Valence => "valence",
            RejectReason::AmbiguousHydrogen => "ambiguous-hydrogen",
            RejectReason::Property => "property",
            RejectReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    /// 1-based input line.
    pub line: usize,
    pub smiles: String,
    pub reason: RejectReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub max_atoms: usize,
    /// Also reject any line containing a literal `-`, bond symbols included.
    pub reject_literal_minus: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            max_atoms: MAX_ATOMS,
            reject_literal_minus: false,
        }
    }
}

/// A molecule that survived ingestion.
#[derive(Clone, Debug, PartialEq)]
pub struct Accepted {
    pub line: usize,
    pub canonical_smiles: String,
    pub graph: GraphMatrix,
    pub properties: PropertyVector,
}

#[derive(Clone, Debug, Default)]
pub struct IngestResult {
    pub accepted: Vec<Accepted>,
    pub rejections: Vec<Rejection>,
}

fn chem_reason(e: &ChemError) -> RejectReason {
    match e {
        ChemError::Charge { .. } => RejectReason::Charge,
        ChemError::Fragment { .. } => RejectReason::Fragment,
        ChemError::Vocabulary { .. } => RejectReason::Vocabulary,
        ChemError::Valence { .. } => RejectReason::Valence,
        _ => RejectReason::Syntax,
    }
}

/// Screens one SMILES string. Everything but duplicate detection.
pub fn screen(smiles: &str, opts: &IngestOptions, tables: &PropertyTables) -> Result<Accepted, RejectReason> {
    if opts.reject_literal_minus && smiles.contains('-') {
        return Err(RejectReason::Charge);
    }
    let mol = parse_smiles(smiles).map_err(|e| chem_reason(&e))?;
    let max = opts.max_atoms.min(MAX_ATOMS);
    if mol.atom_count() > max {
        return Err(RejectReason::Size);
    }
    let form = canonical_form(&mol);
    let graph = encode(&mol).map_err(|_| RejectReason::Size)?;
    // the matrix stores heavy atoms only; hydrogens are re-derived on decode
    match decode(&graph) {
        Ok(back) if write_smiles(&back) == form.smiles => {}
        _ => return Err(RejectReason::AmbiguousHydrogen),
    }
    let properties = compute_properties(&mol, tables).map_err(|_| RejectReason::Property)?;
    Ok(Accepted {
        line: 0,
        canonical_smiles: form.smiles,
        graph,
        properties,
    })
}

/// The SMILES field of an input line: its first whitespace-separated token.
/// Blank lines and `#` comments yield `None`.
pub fn smiles_field(line: &str) -> Option<&str> {
    let t = line.trim();
    if t.is_empty() || t.starts_with('#') {
        return None;
    }
    t.split_whitespace().next()
}

/// Ingests line-oriented SMILES. Malformed lines become rejections; only
/// read errors are returned as errors.
pub fn ingest<R: BufRead>(reader: R, opts: &IngestOptions, tables: &PropertyTables) -> io::Result<IngestResult> {
    let mut out = IngestResult::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let Some(smiles) = smiles_field(&line) else {
            continue;
        };
        let lineno = i + 1;
        match screen(smiles, opts, tables) {
            Ok(mut acc) => {
                if seen.insert(acc.canonical_smiles.clone()) {
                    acc.line = lineno;
                    out.accepted.push(acc);
                } else {
                    out.rejections.push(Rejection {
                        line: lineno,
                        smiles: smiles.to_string(),
                        reason: RejectReason::Duplicate,
                    });
                }
            }
            Err(reason) => out.rejections.push(Rejection {
                line: lineno,
                smiles: smiles.to_string(),
                reason,
            }),
        }
    }
    Ok(out)
}

/// Writes the rejection log as `line<TAB>smiles<TAB>reason`.
pub fn write_rejections<W: Write>(mut w: W, rejections: &[Rejection]) -> io::Result<()> {
    writeln!(w, "line\tsmiles\treason")?;
    for r in rejections {
        writeln!(w, "{}\t{}\t{}", r.line, r.smiles, r.reason)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str, opts: IngestOptions) -> IngestResult {
        ingest(text.as_bytes(), &opts, PropertyTables::shared().unwrap()).unwrap()
    }

    fn reason(smiles: &str) -> Option<RejectReason> {
        let r = run(smiles, IngestOptions::default());
        r.rejections.first().map(|r| r.reason)
    }

    #[test]
    fn rejection_reasons() {
        assert_eq!(reason("CC[NH3+]"), Some(RejectReason::Charge));
        assert_eq!(reason("CC(=O)[O-]"), Some(RejectReason::Charge));
        assert_eq!(reason("CCCCCCCCCCCCCCCCC"), Some(RejectReason::Size));
        assert_eq!(reason("CC.O"), Some(RejectReason::Fragment));
        assert_eq!(reason("CP(C)C"), Some(RejectReason::Vocabulary));
        assert_eq!(reason("CC(C"), Some(RejectReason::Syntax));
        assert_eq!(reason("C(C)(C)(C)(C)C"), Some(RejectReason::Valence));
        assert_eq!(reason("CCCCCCCCCCCCCCCC"), None);
    }

    #[test]
    fn explicit_single_bond_is_not_a_charge() {
        assert_eq!(reason("C-C"), None);
        let strict = IngestOptions {
            reject_literal_minus: true,
            ..IngestOptions::default()
        };
        assert_eq!(run("C-C", strict).rejections[0].reason, RejectReason::Charge);
    }

    #[test]
    fn duplicates_collapse() {
        let r = run("CCO\nOCC\n\n# comment\nC(O)C zinc_1\nc1ccccc1\n", IngestOptions::default());
        assert_eq!(r.accepted.len(), 2);
        assert_eq!(r.accepted[0].canonical_smiles, "CCO");
        assert_eq!(r.accepted[1].line, 6);
        let dups: Vec<usize> = r.rejections.iter().map(|x| x.line).collect();
        assert_eq!(dups, [2, 5]);
        assert!(r.rejections.iter().all(|x| x.reason == RejectReason::Duplicate));
    }

    #[test]
    fn rejection_log_format() {
        let r = run("CC[NH3+]\n", IngestOptions::default());
        let mut buf = Vec::new();
        write_rejections(&mut buf, &r.rejections).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "line\tsmiles\treason\n1\tCC[NH3+]\tcharge\n");
    }
}
