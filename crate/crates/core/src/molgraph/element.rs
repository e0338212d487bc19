use serde::{Deserialize, Serialize};
use std::fmt;

/// Elements accepted by the parser. `Wildcard` is the `*` polymerizable end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Wildcard,
    H,
    B,
    C,
    N,
    O,
    F,
    Si,
    P,
    S,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 13] = [
        Element::Wildcard,
        Element::H,
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Si,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::Wildcard => "*",
            Element::H => "H",
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Si => "Si",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == s)
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::Wildcard => 0,
            Element::H => 1,
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::Si => 14,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Member of the SMILES organic subset (may be written without brackets).
    pub fn is_organic(self) -> bool {
        matches!(
            self,
            Element::Wildcard
                | Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::Cl
                | Element::Br
                | Element::I
        )
    }

    /// May be written as a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    pub fn is_halogen(self) -> bool {
        matches!(self, Element::F | Element::Cl | Element::Br | Element::I)
    }

    pub fn is_heavy(self) -> bool {
        !matches!(self, Element::Wildcard | Element::H)
    }

    /// Allowed neutral valences, ascending.
    pub fn default_valences(self) -> &'static [u8] {
        match self {
            Element::Wildcard => &[],
            Element::H => &[1],
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::F | Element::Cl | Element::Br | Element::I => &[1],
            Element::Si => &[4],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
        }
    }

    /// Valences adjusted for a formal charge: carbon loses one per unit of
    /// charge, boron gains with negative charge, everything else shifts by the
    /// charge (N+ -> 4, O- -> 1, Cl- -> 0).
    pub fn charged_valences(self, charge: i8) -> Vec<u8> {
        let base = self.default_valences();
        let shift = |v: u8| -> Option<u8> {
            let v = v as i16;
            let adjusted = match self {
                Element::C | Element::Si => v - (charge as i16).abs(),
                Element::B => v - charge as i16,
                _ => v + charge as i16,
            };
            (adjusted >= 0).then_some(adjusted as u8)
        };
        let mut out: Vec<u8> = base.iter().filter_map(|&v| shift(v)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Standard atomic weight (IUPAC conventional values).
    pub fn mass(self) -> f64 {
        match self {
            Element::Wildcard => 0.0,
            Element::H => 1.008,
            Element::B => 10.81,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::Si => 28.085,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
        }
    }

    /// Number of valence (outer-shell) electrons.
    pub fn valence_electrons(self) -> f64 {
        match self {
            Element::Wildcard => 0.0,
            Element::H => 1.0,
            Element::B => 3.0,
            Element::C | Element::Si => 4.0,
            Element::N | Element::P => 5.0,
            Element::O | Element::S => 6.0,
            Element::F | Element::Cl | Element::Br | Element::I => 7.0,
        }
    }

    /// Static atomic dipole polarizability in Å³ (CRC Handbook values).
    pub fn polarizability(self) -> f64 {
        match self {
            Element::Wildcard => 0.0,
            Element::H => 0.667,
            Element::B => 3.03,
            Element::C => 1.76,
            Element::N => 1.10,
            Element::O => 0.802,
            Element::F => 0.557,
            Element::Si => 5.38,
            Element::P => 3.63,
            Element::S => 2.90,
            Element::Cl => 2.18,
            Element::Br => 3.05,
            Element::I => 5.35,
        }
    }

    /// First ionization energy in eV (NIST).
    pub fn ionization_energy(self) -> f64 {
        match self {
            Element::Wildcard => 0.0,
            Element::H => 13.598,
            Element::B => 8.298,
            Element::C => 11.260,
            Element::N => 14.534,
            Element::O => 13.618,
            Element::F => 17.423,
            Element::Si => 8.152,
            Element::P => 10.487,
            Element::S => 10.360,
            Element::Cl => 12.968,
            Element::Br => 11.814,
            Element::I => 10.451,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
