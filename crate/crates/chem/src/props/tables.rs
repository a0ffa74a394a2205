//! Property data tables: embedded defaults with an optional directory
//! override.

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use crate::error::{ChemError, Result};
use crate::pattern::{parse_pattern_file, Pattern};

use super::crippen::CrippenTable;
use super::qed::QedParams;
use super::tpsa::TpsaTable;

/// Environment variable naming a directory whose files replace the embedded
/// tables (files absent from the directory keep the embedded version).
pub const DATA_DIR_ENV: &str = "MOLVAE_DATA_DIR";

pub const CRIPPEN_FILE: &str = "crippen.tsv";
pub const TPSA_FILE: &str = "tpsa.tsv";
pub const QED_PARAMS_FILE: &str = "qed_params.tsv";
pub const QED_ALERTS_FILE: &str = "qed_alerts.patterns";
pub const QED_ACCEPTORS_FILE: &str = "qed_acceptors.patterns";
pub const SAS_FILE: &str = "sas_fragments.tsv.gz";

const CRIPPEN: &str = include_str!("../../data/crippen.tsv");
const TPSA: &str = include_str!("../../data/tpsa.tsv");
const QED_PARAMS: &str = include_str!("../../data/qed_params.tsv");
const QED_ALERTS: &str = include_str!("../../data/qed_alerts.patterns");
const QED_ACCEPTORS: &str = include_str!("../../data/qed_acceptors.patterns");
const SAS: &[u8] = include_bytes!("../../data/sas_fragments.tsv.gz");

/// Fragment identifier to score map for synthetic accessibility.
#[derive(Clone, Debug, Default)]
pub struct SasFragments {
    scores: HashMap<u32, f64>,
}

impl SasFragments {
    /// Parses the grouped format: `score<TAB>id id id ...`; later lines win.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut scores = HashMap::with_capacity(800_000);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| ChemError::Table {
                file: name.to_string(),
                line: lineno + 1,
                message: message.to_string(),
            };
            let (score, ids) = line.split_once('\t').ok_or_else(|| err("expected score and ids"))?;
            let score: f64 = score.trim().parse().map_err(|_| err("bad score"))?;
            for id in ids.split_ascii_whitespace() {
                let id: u32 = id.parse().map_err(|_| err("bad fragment id"))?;
                scores.insert(id, score);
            }
        }
        Ok(SasFragments { scores })
    }

    pub fn parse_gz(name: &str, bytes: &[u8]) -> Result<Self> {
        let mut text = String::new();
        flate2::read::GzDecoder::new(bytes)
            .read_to_string(&mut text)
            .map_err(|e| ChemError::Table {
                file: name.to_string(),
                line: 0,
                message: e.to_string(),
            })?;
        Self::parse(name, &text)
    }

    pub fn get(&self, id: u32) -> Option<f64> {
        self.scores.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Every table the property calculators need.
#[derive(Clone, Debug)]
pub struct PropertyTables {
    pub crippen: CrippenTable,
    pub tpsa: TpsaTable,
    pub qed: QedParams,
    pub alerts: Vec<Pattern>,
    pub acceptors: Vec<Pattern>,
    pub sas: SasFragments,
}

fn patterns(name: &str, text: &str) -> Result<Vec<Pattern>> {
    Ok(parse_pattern_file(name, text)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

fn read_override(dir: Option<&Path>, file: &str) -> Result<Option<Vec<u8>>> {
    let Some(dir) = dir else {
        return Ok(None);
    };
    let path: PathBuf = dir.join(file);
    match std::fs::read(&path) {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ChemError::Table {
            file: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        }),
    }
}

fn text_of(file: &str, bytes: Option<Vec<u8>>, embedded: &str) -> Result<String> {
    match bytes {
        None => Ok(embedded.to_string()),
        Some(b) => String::from_utf8(b).map_err(|_| ChemError::Table {
            file: file.to_string(),
            line: 0,
            message: "not valid UTF-8".into(),
        }),
    }
}

impl PropertyTables {
    /// Tables compiled into the library.
    pub fn embedded() -> Result<Self> {
        Self::load(None)
    }

    /// Tables from `dir`, falling back to the embedded copy per file.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        Self::load(Some(dir))
    }

    fn load(dir: Option<&Path>) -> Result<Self> {
        let crippen = text_of(CRIPPEN_FILE, read_override(dir, CRIPPEN_FILE)?, CRIPPEN)?;
        let tpsa = text_of(TPSA_FILE, read_override(dir, TPSA_FILE)?, TPSA)?;
        let qed = text_of(QED_PARAMS_FILE, read_override(dir, QED_PARAMS_FILE)?, QED_PARAMS)?;
        let alerts = text_of(QED_ALERTS_FILE, read_override(dir, QED_ALERTS_FILE)?, QED_ALERTS)?;
        let acceptors = text_of(
            QED_ACCEPTORS_FILE,
            read_override(dir, QED_ACCEPTORS_FILE)?,
            QED_ACCEPTORS,
        )?;
        let sas = match read_override(dir, SAS_FILE)? {
            Some(bytes) => SasFragments::parse_gz(SAS_FILE, &bytes)?,
            None => SasFragments::parse_gz(SAS_FILE, SAS)?,
        };
        Ok(PropertyTables {
            crippen: CrippenTable::parse(CRIPPEN_FILE, &crippen)?,
            tpsa: TpsaTable::parse(TPSA_FILE, &tpsa)?,
            qed: QedParams::parse(QED_PARAMS_FILE, &qed)?,
            alerts: patterns(QED_ALERTS_FILE, &alerts)?,
            acceptors: patterns(QED_ACCEPTORS_FILE, &acceptors)?,
            sas,
        })
    }

    /// Process-wide tables, loaded once. Honors [`DATA_DIR_ENV`].
    pub fn shared() -> Result<&'static PropertyTables> {
        static TABLES: OnceLock<Result<PropertyTables>> = OnceLock::new();
        TABLES
            .get_or_init(|| match std::env::var_os(DATA_DIR_ENV) {
                Some(dir) => PropertyTables::from_dir(Path::new(&dir)),
                None => PropertyTables::embedded(),
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}
