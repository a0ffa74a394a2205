//! SMILES reading and canonical writing.

mod parser;
mod writer;

pub use parser::parse_smiles;
pub use writer::{canonical_form, write_smiles, CanonicalForm};

/// Parses `text` and returns its canonical SMILES.
pub fn canonicalize(text: &str) -> crate::Result<String> {
    parse_smiles(text).map(|m| write_smiles(&m))
}
