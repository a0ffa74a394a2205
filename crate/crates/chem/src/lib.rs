//! Molecular graphs restricted to a small organic vocabulary: SMILES
//! reading and canonical writing, ring and aromaticity perception,
//! Morgan fingerprints, substructure patterns and drug-likeness
//! property calculators.

pub mod aromaticity;
pub mod canon;
pub mod element;
pub mod fingerprint;
pub mod error;
mod kekule;
pub mod molecule;
pub mod pattern;
pub mod props;
pub mod rings;
pub mod smiles;
pub mod valence;

pub use element::Element;
pub use error::{ChemError, Result};
pub use molecule::{Atom, Bond, BondOrder, Molecule, Neighbor};
pub use smiles::{canonical_form, canonicalize, parse_smiles, write_smiles, CanonicalForm};
pub use valence::{check_valence, from_heavy_graph};
pub use fingerprint::{morgan_counts, morgan_fingerprint, tanimoto, Fingerprint};
pub use pattern::{substructure_match, Pattern, Target};
pub use props::{compute_properties, ConditionVector, PropertyTables, PropertyVector};
