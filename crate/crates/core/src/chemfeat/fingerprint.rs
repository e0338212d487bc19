use crate::molgraph::MolGraph;
use fnv::FnvHasher;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt::Write as _;
use std::hash::Hasher;
use thiserror::Error;

pub const FP_BITS: usize = 1024;
pub const FP_RADIUS: usize = 2;
const WORDS: usize = FP_BITS / 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FingerprintError {
    #[error("fingerprint hex must be {expected} characters, got {0}", expected = FP_BITS / 4)]
    Length(usize),
    #[error("invalid hex digit at {0}")]
    Digit(usize),
}

/// 1024-bit fingerprint. Hex form is 256 characters; byte `i` holds bits
/// `8i..8i+7`, least significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FingerprintBits([u64; WORDS]);

impl Default for FingerprintBits {
    fn default() -> Self {
        FingerprintBits([0; WORDS])
    }
}

impl FingerprintBits {
    pub fn set(&mut self, bit: usize) {
        self.0[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.0[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..FP_BITS).filter(|&b| self.get(b))
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(FP_BITS / 4);
        for w in &self.0 {
            for byte in w.to_le_bytes() {
                write!(s, "{byte:02x}").unwrap();
            }
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<Self, FingerprintError> {
        if s.len() != FP_BITS / 4 {
            return Err(FingerprintError::Length(s.len()));
        }
        let mut out = [0u64; WORDS];
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| FingerprintError::Digit(2 * i))?;
            let byte = u8::from_str_radix(text, 16).map_err(|_| FingerprintError::Digit(2 * i))?;
            out[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        Ok(FingerprintBits(out))
    }
}

impl Serialize for FingerprintBits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FingerprintBits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FingerprintBits::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Canonical environment strings: `result[r][atom]` describes the radius-`r`
/// neighbourhood of `atom`. Independent of atom numbering.
pub fn atom_environments(g: &MolGraph, radius: usize) -> Vec<Vec<String>> {
    let mut levels: Vec<Vec<String>> = Vec::with_capacity(radius + 1);
    levels.push(
        g.atoms()
            .iter()
            .map(|a| {
                format!(
                    "{},{},{},{}",
                    a.element.atomic_number(),
                    a.charge,
                    a.aromatic as u8,
                    a.hydrogens
                )
            })
            .collect(),
    );
    for r in 1..=radius {
        let prev = &levels[r - 1];
        let next = (0..g.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(u8, &str)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (g.bond(b).order.code(), prev[j].as_str()))
                    .collect();
                nbrs.sort();
                let mut s = format!("{}[", prev[i]);
                for (code, env) in nbrs {
                    write!(s, "{code}({env})").unwrap();
                }
                s.push(']');
                s
            })
            .collect();
        levels.push(next);
    }
    levels
}

pub(crate) fn fnv1a(s: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(s.as_bytes());
    h.finish()
}

/// Radius-2 Morgan fingerprint of the hydrogen-capped graph.
pub fn morgan_fingerprint(g: &MolGraph) -> FingerprintBits {
    let capped = g.capped();
    let mut fp = FingerprintBits::default();
    for level in atom_environments(&capped, FP_RADIUS) {
        for env in level {
            fp.set((fnv1a(&env) % FP_BITS as u64) as usize);
        }
    }
    fp
}

/// `|a & b| / |a | b|`, 1 when both are empty.
pub fn tanimoto(a: &FingerprintBits, b: &FingerprintBits) -> f64 {
    let (mut and, mut or) = (0u32, 0u32);
    for (x, y) in a.0.iter().zip(&b.0) {
        and += (x & y).count_ones();
        or += (x | y).count_ones();
    }
    if or == 0 {
        1.0
    } else {
        and as f64 / or as f64
    }
}
