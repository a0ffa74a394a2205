use std::fmt;

use serde::{Deserialize, Serialize};

/// Chemical elements supported by the toolkit.
///
/// The eight heavy elements form the dataset vocabulary; `H` only appears when
/// a molecule is expanded with explicit hydrogens for atom typing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    H,
    C,
    N,
    O,
    F,
    Si,
    S,
    Cl,
    Br,
}

impl Element {
    /// Heavy-atom vocabulary in annotation-class order.
    pub const VOCABULARY: [Element; 8] = [
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Si,
        Element::S,
        Element::Cl,
        Element::Br,
    ];

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::H => 1,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::Si => 14,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
        }
    }

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        Some(match z {
            1 => Element::H,
            6 => Element::C,
            7 => Element::N,
            8 => Element::O,
            9 => Element::F,
            14 => Element::Si,
            16 => Element::S,
            17 => Element::Cl,
            35 => Element::Br,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Si => "Si",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Some(match symbol {
            "H" => Element::H,
            "C" => Element::C,
            "N" => Element::N,
            "O" => Element::O,
            "F" => Element::F,
            "Si" => Element::Si,
            "S" => Element::S,
            "Cl" => Element::Cl,
            "Br" => Element::Br,
            _ => return None,
        })
    }

    /// Allowed valences of the neutral element, ascending.
    pub fn valences(self) -> &'static [u8] {
        match self {
            Element::H | Element::F | Element::Cl | Element::Br => &[1],
            Element::C | Element::Si => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::S => &[2, 4, 6],
        }
    }

    /// Smallest allowed valence that accommodates `used` bonding electrons.
    pub fn target_valence(self, used: u8) -> Option<u8> {
        self.valences().iter().copied().find(|&v| v >= used)
    }

    /// Standard atomic weight in g/mol.
    pub fn atomic_weight(self) -> f64 {
        match self {
            Element::H => 1.008,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::Si => 28.086,
            Element::S => 32.067,
            Element::Cl => 35.453,
            Element::Br => 79.904,
        }
    }

    /// Whether the element may be written without brackets in SMILES.
    pub fn is_organic_subset(self) -> bool {
        !matches!(self, Element::H | Element::Si)
    }

    /// Whether the element may carry a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self, Element::C | Element::N | Element::O | Element::S)
    }

    /// Index of the element in [`Element::VOCABULARY`], `None` for hydrogen.
    pub fn vocabulary_index(self) -> Option<usize> {
        Element::VOCABULARY.iter().position(|&e| e == self)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Symbols of elements 1..=103, used to recognise element names in patterns
/// even when they fall outside the supported vocabulary.
pub(crate) const PERIODIC_SYMBOLS: [&str; 103] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr",
];

pub(crate) fn atomic_number_of(symbol: &str) -> Option<u8> {
    PERIODIC_SYMBOLS
        .iter()
        .position(|&s| s == symbol)
        .map(|i| i as u8 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for e in Element::VOCABULARY {
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
            assert_eq!(Element::from_atomic_number(e.atomic_number()), Some(e));
            assert_eq!(atomic_number_of(e.symbol()), Some(e.atomic_number()));
        }
    }

    #[test]
    fn sulfur_takes_smallest_valence() {
        assert_eq!(Element::S.target_valence(1), Some(2));
        assert_eq!(Element::S.target_valence(3), Some(4));
        assert_eq!(Element::S.target_valence(6), Some(6));
        assert_eq!(Element::S.target_valence(7), None);
        assert_eq!(Element::C.target_valence(5), None);
    }
}
