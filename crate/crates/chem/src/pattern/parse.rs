use std::sync::atomic::{AtomicUsize, Ordering};

use super::{AtomPrim, BondPrim, Expr, Pattern, PatternBond};
use crate::element::atomic_number_of;
use crate::error::{ChemError, Result};

static NEXT_ID: AtomicUsize = AtomicUsize::new(0);

pub(super) fn parse_pattern(text: &str) -> Result<Pattern> {
    parse_at(text, 0)
}

fn parse_at(text: &str, offset: usize) -> Result<Pattern> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        offset,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    p.parse()?;
    Ok(Pattern {
        source: text.to_string(),
        atoms: p.atoms,
        bonds: p.bonds,
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
    })
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    offset: usize,
    atoms: Vec<Expr<AtomPrim>>,
    bonds: Vec<PatternBond>,
}

const ORGANIC: [&str; 10] = ["Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I"];
const AROMATIC: [&str; 6] = ["b", "c", "n", "o", "p", "s"];
const AROMATIC_BRACKET: [&str; 9] = ["se", "as", "te", "b", "c", "n", "o", "p", "s"];

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T> {
        Err(ChemError::Pattern {
            pos: self.offset + self.pos,
            message: message.to_string(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn rest(&self) -> &[u8] {
        &self.s[self.pos..]
    }

    fn number(&mut self) -> Option<usize> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
        }
    }

    fn parse(&mut self) -> Result<()> {
        if self.s.is_empty() {
            return self.err("empty pattern");
        }
        let mut prev: Option<usize> = None;
        let mut pending: Option<Expr<BondPrim>> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut rings: Vec<(usize, usize, Option<Expr<BondPrim>>)> = Vec::new();
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return self.err("misplaced branch");
                    }
                    branches.push(prev.unwrap());
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return self.err("dangling bond");
                    }
                    prev = Some(match branches.pop() {
                        Some(p) => p,
                        None => return self.err("unbalanced parenthesis"),
                    });
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || !branches.is_empty() {
                        return self.err("misplaced component separator");
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\' | b'&' | b',' | b';' => {
                    if prev.is_none() || pending.is_some() {
                        return self.err("misplaced bond");
                    }
                    pending = Some(self.bond_expr()?);
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return self.err("ring closure without an atom");
                    };
                    let label = if c == b'%' {
                        self.pos += 1;
                        let start = self.pos;
                        match self.number() {
                            Some(n) if self.pos - start == 2 => n,
                            _ => return self.err("malformed %nn ring closure"),
                        }
                    } else {
                        self.pos += 1;
                        (c - b'0') as usize
                    };
                    let bond = pending.take();
                    if let Some(idx) = rings.iter().position(|r| r.0 == label) {
                        let (_, other, other_bond) = rings.remove(idx);
                        if other == atom {
                            return self.err("ring closure to the same atom");
                        }
                        let expr = bond.or(other_bond).unwrap_or(Expr::Prim(BondPrim::Default));
                        self.bonds.push(PatternBond {
                            begin: other,
                            end: atom,
                            expr,
                        });
                    } else {
                        rings.push((label, atom, bond));
                    }
                }
                _ => {
                    let expr = self.atom()?;
                    self.atoms.push(expr);
                    let idx = self.atoms.len() - 1;
                    if let Some(p) = prev {
                        let expr = pending.take().unwrap_or(Expr::Prim(BondPrim::Default));
                        self.bonds.push(PatternBond {
                            begin: p,
                            end: idx,
                            expr,
                        });
                    }
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return self.err("dangling bond");
        }
        if !branches.is_empty() {
            return self.err("unclosed branch");
        }
        if !rings.is_empty() {
            return self.err("unclosed ring");
        }
        if self.atoms.is_empty() {
            return self.err("pattern has no atoms");
        }
        Ok(())
    }

    fn bond_expr(&mut self) -> Result<Expr<BondPrim>> {
        self.bond_low()
    }

    fn bond_low(&mut self) -> Result<Expr<BondPrim>> {
        let mut parts = vec![self.bond_or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.bond_or()?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_or(&mut self) -> Result<Expr<BondPrim>> {
        let mut parts = vec![self.bond_and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.bond_and()?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn bond_and(&mut self) -> Result<Expr<BondPrim>> {
        let mut parts = vec![self.bond_unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.bond_unary()?);
                }
                Some(b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\') => {
                    parts.push(self.bond_unary()?)
                }
                _ => break,
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_unary(&mut self) -> Result<Expr<BondPrim>> {
        let Some(c) = self.peek() else {
            return self.err("expected bond");
        };
        self.pos += 1;
        let prim = match c {
            b'!' => return Ok(Expr::Not(Box::new(self.bond_unary()?))),
            b'-' | b'/' | b'\\' => BondPrim::Single,
            b'=' => BondPrim::Double,
            b'#' => BondPrim::Triple,
            b':' => BondPrim::Aromatic,
            b'~' => BondPrim::Any,
            b'@' => BondPrim::Ring,
            _ => {
                self.pos -= 1;
                return self.err("expected bond primitive");
            }
        };
        Ok(Expr::Prim(prim))
    }

    fn atom(&mut self) -> Result<Expr<AtomPrim>> {
        if self.peek() == Some(b'[') {
            self.pos += 1;
            if self.peek() == Some(b']') {
                return self.err("empty atom expression");
            }
            let expr = self.atom_low(true)?;
            if self.peek() != Some(b']') {
                return self.err("expected `]`");
            }
            self.pos += 1;
            return Ok(expr);
        }
        let rest = self.rest();
        if rest[0] == b'*' {
            self.pos += 1;
            return Ok(Expr::Prim(AtomPrim::Any));
        }
        if rest[0] == b'a' {
            self.pos += 1;
            return Ok(Expr::Prim(AtomPrim::Aromatic));
        }
        if rest[0] == b'A' && !rest.get(1).is_some_and(|c| c.is_ascii_lowercase()) {
            self.pos += 1;
            return Ok(Expr::Prim(AtomPrim::Aliphatic));
        }
        for sym in ORGANIC {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += sym.len();
                let z = atomic_number_of(sym).expect("organic symbol");
                return Ok(Expr::Prim(AtomPrim::Element(z, Some(false))));
            }
        }
        for sym in AROMATIC {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += sym.len();
                let z = atomic_number_of(&sym.to_ascii_uppercase()).expect("aromatic symbol");
                return Ok(Expr::Prim(AtomPrim::Element(z, Some(true))));
            }
        }
        self.err("unexpected character")
    }

    fn atom_low(&mut self, first: bool) -> Result<Expr<AtomPrim>> {
        let mut parts = vec![self.atom_or(first)?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.atom_or(false)?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_or(&mut self, first: bool) -> Result<Expr<AtomPrim>> {
        let mut parts = vec![self.atom_and(first)?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.atom_and(false)?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn atom_and(&mut self, first: bool) -> Result<Expr<AtomPrim>> {
        let mut parts = vec![self.atom_unary(first)?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.atom_unary(false)?);
                }
                Some(b']' | b',' | b';') | None => break,
                Some(_) => parts.push(self.atom_unary(false)?),
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_unary(&mut self, first: bool) -> Result<Expr<AtomPrim>> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.atom_unary(false)?)));
        }
        Ok(Expr::Prim(self.atom_prim(first)?))
    }

    fn count_or(&mut self, default: usize) -> usize {
        self.number().unwrap_or(default)
    }

    fn atom_prim(&mut self, first: bool) -> Result<AtomPrim> {
        let Some(c) = self.peek() else {
            return self.err("unterminated atom expression");
        };
        let rest = self.rest();
        // two-letter element symbols take precedence over single-letter primitives
        if c.is_ascii_uppercase() {
            if let Some(&l) = rest.get(1) {
                if l.is_ascii_lowercase() {
                    let sym = std::str::from_utf8(&rest[..2]).unwrap();
                    if let Some(z) = atomic_number_of(sym) {
                        self.pos += 2;
                        return Ok(AtomPrim::Element(z, Some(false)));
                    }
                }
            }
        }
        for sym in AROMATIC_BRACKET {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += sym.len();
                let upper = format!("{}{}", sym[..1].to_ascii_uppercase(), &sym[1..]);
                let z = atomic_number_of(&upper).expect("aromatic symbol");
                return Ok(AtomPrim::Element(z, Some(true)));
            }
        }
        self.pos += 1;
        let prim = match c {
            b'*' => AtomPrim::Any,
            b'a' => AtomPrim::Aromatic,
            b'A' => AtomPrim::Aliphatic,
            b'#' => match self.number() {
                Some(z) if z <= u8::MAX as usize => AtomPrim::Element(z as u8, None),
                _ => return self.err("expected atomic number"),
            },
            b'D' => AtomPrim::Degree(self.count_or(1)),
            b'H' => {
                let hydrogen_atom = first && matches!(self.peek(), Some(b']' | b'+' | b'-'));
                if hydrogen_atom {
                    AtomPrim::Element(1, None)
                } else {
                    AtomPrim::TotalH(self.count_or(1))
                }
            }
            b'h' => AtomPrim::ImplicitH(self.count_or(1)),
            b'X' => AtomPrim::Connectivity(self.count_or(1)),
            b'v' => AtomPrim::Valence(self.count_or(1)),
            b'R' => AtomPrim::RingCount(self.number()),
            b'r' => AtomPrim::RingSize(self.number()),
            b'x' => AtomPrim::RingBonds(self.number()),
            b'+' | b'-' => {
                let sign = if c == b'+' { 1 } else { -1 };
                let mut magnitude = 1i32;
                if let Some(n) = self.number() {
                    magnitude = n as i32;
                } else {
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        magnitude += 1;
                    }
                }
                AtomPrim::Charge(sign * magnitude)
            }
            b'@' => {
                while self.peek() == Some(b'@') {
                    self.pos += 1;
                }
                AtomPrim::Any
            }
            b'$' => {
                if self.peek() != Some(b'(') {
                    return self.err("expected `(` after `$`");
                }
                let start = self.pos + 1;
                let mut depth = 0usize;
                let mut end = None;
                for (i, &b) in self.s[self.pos..].iter().enumerate() {
                    match b {
                        b'(' => depth += 1,
                        b')' => {
                            depth -= 1;
                            if depth == 0 {
                                end = Some(self.pos + i);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let Some(end) = end else {
                    return self.err("unterminated recursive pattern");
                };
                let inner = std::str::from_utf8(&self.s[start..end]).expect("ascii slice");
                let pat = parse_at(inner, self.offset + start)?;
                self.pos = end + 1;
                AtomPrim::Recursive(Box::new(pat))
            }
            b'0'..=b'9' => {
                self.pos -= 1;
                let n = self.number().expect("digit present");
                AtomPrim::Isotope(n as u32)
            }
            _ if c.is_ascii_uppercase() => {
                let sym = (c as char).to_string();
                match atomic_number_of(&sym) {
                    Some(z) => AtomPrim::Element(z, Some(false)),
                    None => {
                        self.pos -= 1;
                        return self.err("unknown atom primitive");
                    }
                }
            }
            _ => {
                self.pos -= 1;
                return self.err("unknown atom primitive");
            }
        };
        Ok(prim)
    }
}

fn collapse<P>(mut parts: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_letter_symbols_and_hydrogen() {
        let p = parse_pattern("[Cl]").unwrap();
        assert_eq!(p.atoms[0], Expr::Prim(AtomPrim::Element(17, Some(false))));
        let p = parse_pattern("[H]").unwrap();
        assert_eq!(p.atoms[0], Expr::Prim(AtomPrim::Element(1, None)));
        let p = parse_pattern("[CH2]").unwrap();
        assert_eq!(
            p.atoms[0],
            Expr::And(vec![
                Expr::Prim(AtomPrim::Element(6, Some(false))),
                Expr::Prim(AtomPrim::TotalH(2))
            ])
        );
    }

    #[test]
    fn operator_precedence() {
        let p = parse_pattern("[C,N;!R]").unwrap();
        match &p.atoms[0] {
            Expr::And(v) => {
                assert!(matches!(v[0], Expr::Or(_)));
                assert!(matches!(v[1], Expr::Not(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_pattern("C[Q]") {
            Err(ChemError::Pattern { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_alert_style_constructs_parse() {
        for s in [
            "*1[O,S,N]*1",
            "[$([CH]),$(CC)]#CC(=O)[#6]",
            "[N!R]=[N!R]",
            "C(=O)O[C,H1].C(=O)O[C,H1]",
            "[cR2]1[cR2][cR2]([Nv3X3,Nv4X4])[cR2][cR2][cR2]1",
            "C=!@CC=[O,S]",
            "[15N]",
            "[s,S,c,C,n,N,o,O]~[n+,N+](~[s,S,c,C,n,N,o,O])~[s,S,c,C,n,N,o,O]",
            "[NH0;+,+2,+3](=[#6])=[#7]",
            "[OX1;-,-2,-3][#7]",
            "[Hg,Fe,As,se,Ho]",
            "C=[C!r]C#N",
            "a1aa2a3a(a1)A=AA=A3=AA=A2",
        ] {
            parse_pattern(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }
}
