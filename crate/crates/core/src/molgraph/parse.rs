use super::rings::bridge_bonds;
use super::valence::implicit_hydrogens;
use super::{Atom, BondOrder, Element, GraphError, MolGraph};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty SMILES")]
    Empty,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unsupported feature: {0}")]
    Unsupported(&'static str),
    #[error("ring closure {0} never closed")]
    UnclosedRing(u16),
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("bond or branch without a preceding atom")]
    NoPrecedingAtom,
    #[error("bond not followed by an atom")]
    DanglingBond,
    #[error("ring closure bond orders disagree")]
    RingBondMismatch,
    #[error("unterminated bracket atom")]
    UnterminatedBracket,
    #[error("invalid bracket atom: {0}")]
    BadBracket(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// SMILES parse failure with the character position it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES error at position {position}: {kind}")]
pub struct SmilesError {
    pub position: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    fn new(position: usize, kind: SmilesErrorKind) -> Self {
        SmilesError { position, kind }
    }
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    position: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    graph: MolGraph,
    bracketed: Vec<bool>,
    prev: Option<usize>,
    pending: Option<(BondOrder, usize)>,
    branches: Vec<(Option<usize>, usize)>,
    rings: BTreeMap<u16, OpenRing>,
}

/// Parse a SMILES string (organic subset, bracket atoms with H count, charge
/// and atom class, branches, ring closures including `%nn`, and `.`).
/// Stereochemistry and isotopes are rejected.
pub fn parse_smiles(text: &str) -> Result<MolGraph, SmilesError> {
    if text.trim().is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    if let Some((i, c)) = text.char_indices().find(|(_, c)| !c.is_ascii()) {
        return Err(SmilesError::new(i, SmilesErrorKind::UnexpectedChar(c)));
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        graph: MolGraph::new(),
        bracketed: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.run()?;
    let mut g = p.graph;
    // Aromatic bonds outside rings (e.g. the biphenyl link written without `-`).
    for bi in bridge_bonds(&g) {
        if g.bond(bi).order == BondOrder::Aromatic {
            g.set_bond_order(bi, BondOrder::Single);
        }
    }
    for i in 0..g.atom_count() {
        if !p.bracketed[i] {
            let h = implicit_hydrogens(&g, i);
            g.atom_mut(i).hydrogens = h;
        }
    }
    g.set_source(text);
    Ok(g)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn err(&self, kind: SmilesErrorKind) -> SmilesError {
        SmilesError::new(self.pos, kind)
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return Err(self.err(SmilesErrorKind::NoPrecedingAtom));
                    }
                    self.branches.push((self.prev, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return Err(self.err(SmilesErrorKind::DanglingBond));
                    }
                    match self.branches.pop() {
                        Some((prev, _)) => self.prev = prev,
                        None => return Err(self.err(SmilesErrorKind::UnbalancedParens)),
                    }
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if self.prev.is_none() {
                        return Err(self.err(SmilesErrorKind::NoPrecedingAtom));
                    }
                    if self.pending.is_some() {
                        return Err(self.err(SmilesErrorKind::UnexpectedChar(c as char)));
                    }
                    let order = match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    };
                    self.pending = Some((order, self.pos));
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    self.pos += 1;
                    self.ring_bond((c - b'0') as u16, start)?;
                }
                b'%' => {
                    let start = self.pos;
                    let digits = self.text.get(self.pos + 1..self.pos + 3);
                    match digits {
                        Some(d) if d.iter().all(u8::is_ascii_digit) => {
                            let n = ((d[0] - b'0') * 10 + (d[1] - b'0')) as u16;
                            self.pos += 3;
                            self.ring_bond(n, start)?;
                        }
                        _ => return Err(self.err(SmilesErrorKind::UnexpectedChar('%'))),
                    }
                }
                b'.' => {
                    if self.pending.is_some() {
                        return Err(self.err(SmilesErrorKind::DanglingBond));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.push_atom(atom, true)?;
                }
                b'@' => return Err(self.err(SmilesErrorKind::Unsupported("stereochemistry"))),
                b'/' | b'\\' => {
                    return Err(self.err(SmilesErrorKind::Unsupported("bond stereochemistry")))
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.push_atom(atom, false)?;
                }
            }
        }
        if let Some((_, pos)) = self.pending {
            return Err(SmilesError::new(pos, SmilesErrorKind::DanglingBond));
        }
        if let Some(&(_, pos)) = self.branches.last() {
            return Err(SmilesError::new(pos, SmilesErrorKind::UnbalancedParens));
        }
        if let Some((&n, ring)) = self.rings.iter().min_by_key(|(_, r)| r.position) {
            return Err(SmilesError::new(
                ring.position,
                SmilesErrorKind::UnclosedRing(n),
            ));
        }
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, bracketed: bool) -> Result<(), SmilesError> {
        let idx = self.graph.add_atom(atom);
        self.bracketed.push(bracketed);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some((o, _)) => o,
                None => self.default_order(prev, idx),
            };
            self.graph
                .add_bond(prev, idx, order)
                .map_err(|e| self.err(e.into()))?;
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.graph.atom(a).aromatic && self.graph.atom(b).aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn ring_bond(&mut self, n: u16, start: usize) -> Result<(), SmilesError> {
        let Some(cur) = self.prev else {
            return Err(SmilesError::new(start, SmilesErrorKind::NoPrecedingAtom));
        };
        let order = self.pending.take().map(|(o, _)| o);
        match self.rings.remove(&n) {
            Some(open) => {
                let order = match (open.order, order) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(SmilesError::new(start, SmilesErrorKind::RingBondMismatch))
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.default_order(open.atom, cur),
                };
                self.graph
                    .add_bond(open.atom, cur, order)
                    .map_err(|e| SmilesError::new(start, e.into()))?;
            }
            None => {
                self.rings.insert(
                    n,
                    OpenRing {
                        atom: cur,
                        order,
                        position: start,
                    },
                );
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let c = self.peek().expect("caller checked");
        let next = self.text.get(self.pos + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::Cl, false, 2),
            (b'B', Some(b'r')) => (Element::Br, false, 2),
            (b'*', _) => (Element::Wildcard, false, 1),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (c, _) if c.is_ascii_alphabetic() => {
                let mut sym = String::from(c as char);
                if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                    sym.push(n as char);
                }
                return Err(self.err(SmilesErrorKind::UnknownElement(sym)));
            }
            (c, _) => return Err(self.err(SmilesErrorKind::UnexpectedChar(c as char))),
        };
        self.pos += len;
        Ok(Atom {
            element,
            charge: 0,
            aromatic,
            hydrogens: 0,
            class: 0,
        })
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        let Some(close) = self.text[open..].iter().position(|&b| b == b']') else {
            return Err(self.err(SmilesErrorKind::UnterminatedBracket));
        };
        let body = &self.text[open + 1..open + close];
        let at = |i: usize| SmilesError::new(open + 1 + i, SmilesErrorKind::BadBracket(""));
        let mut i;
        if body.first().is_some_and(u8::is_ascii_digit) {
            return Err(SmilesError::new(
                open + 1,
                SmilesErrorKind::Unsupported("isotopes"),
            ));
        }
        let (element, aromatic) = {
            let c = *body.first().ok_or_else(|| at(0))?;
            let n = body.get(1).copied();
            let two = n
                .filter(u8::is_ascii_lowercase)
                .map(|n| format!("{}{}", c as char, n as char));
            if c == b'*' {
                i = 1;
                (Element::Wildcard, false)
            } else if let Some(e) = two.as_deref().and_then(Element::from_symbol) {
                i = 2;
                (e, false)
            } else if c.is_ascii_uppercase() {
                let sym = (c as char).to_string();
                match Element::from_symbol(&sym) {
                    Some(e) => {
                        i = 1;
                        (e, false)
                    }
                    None => {
                        return Err(SmilesError::new(
                            open + 1,
                            SmilesErrorKind::UnknownElement(two.unwrap_or(sym)),
                        ))
                    }
                }
            } else if c.is_ascii_lowercase() {
                let e = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string())
                    .filter(|e| e.can_be_aromatic());
                match e {
                    Some(e) => {
                        i = 1;
                        (e, true)
                    }
                    None => {
                        return Err(SmilesError::new(
                            open + 1,
                            SmilesErrorKind::UnknownElement((c as char).to_string()),
                        ))
                    }
                }
            } else {
                return Err(at(0));
            }
        };
        if body.get(i) == Some(&b'@') {
            return Err(SmilesError::new(
                open + 1 + i,
                SmilesErrorKind::Unsupported("stereochemistry"),
            ));
        }
        let mut hydrogens = 0u8;
        if body.get(i) == Some(&b'H') {
            i += 1;
            let start = i;
            while body.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
            }
            hydrogens = if start == i {
                1
            } else {
                std::str::from_utf8(&body[start..i])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| at(start))?
            };
        }
        let mut charge: i8 = 0;
        if let Some(&sign @ (b'+' | b'-')) = body.get(i) {
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            i += 1;
            let start = i;
            while body.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
            }
            if start < i {
                let mag: i8 = std::str::from_utf8(&body[start..i])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| at(start))?;
                charge = unit * mag;
            } else {
                charge = unit;
                while body.get(i) == Some(&sign) {
                    charge += unit;
                    i += 1;
                }
            }
        }
        let mut class = 0u16;
        if body.get(i) == Some(&b':') {
            i += 1;
            let start = i;
            while body.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
            }
            class = std::str::from_utf8(&body[start..i])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| at(start))?;
        }
        if i != body.len() {
            return Err(SmilesError::new(
                open + 1 + i,
                SmilesErrorKind::BadBracket("trailing characters"),
            ));
        }
        if element == Element::Wildcard && (charge != 0 || hydrogens != 0) {
            return Err(SmilesError::new(
                open + 1,
                SmilesErrorKind::BadBracket("wildcard with charge or hydrogens"),
            ));
        }
        self.pos = open + close + 1;
        Ok(Atom {
            element,
            charge,
            aromatic,
            hydrogens,
            class,
        })
    }
}
