//! Text forms of classes.
//!
//! JSON document: `{"ring_tag":"K0","terms":[{"symbols":["E","E"],"coeffs":[[0,"-1"],[1,"2"]]}]}`.
//! Each term lists its monomial with repeated names for powers (empty list for
//! the point class) and its Laurent coefficient as `[exponent, "integer"]`
//! pairs. Terms appear in monomial order and coefficients in increasing
//! exponent order; integers are written as decimal strings so that arbitrary
//! precision survives. Readers also accept bare JSON integers. Writing a
//! parsed canonical document reproduces it byte for byte.
//!
//! Expressions: `2*L - 1 + (1 - L)*[E]*[F]^2`, with `L` the Lefschetz class,
//! symbols as `[name]` or bare identifiers, `^` for nonnegative powers and
//! `L^-n` for inverse powers in localized rings.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Coefficient, LefschetzPoly, MclassError, Monomial, MotivicClass, RingTag};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffRepr {
    Text(String),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub symbols: Vec<String>,
    pub coeffs: Vec<(i32, CoeffRepr)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub ring_tag: String,
    pub terms: Vec<TermDoc>,
}

fn parse_coeff<C: Coefficient>(s: &str) -> Result<C, MclassError> {
    C::from_str(s.trim()).map_err(|_| MclassError::Parse(format!("bad integer {s:?}")))
}

impl<C: Coefficient> MotivicClass<C> {
    pub fn to_doc(&self) -> ClassDoc {
        ClassDoc {
            ring_tag: self.tag().to_string(),
            terms: self
                .terms()
                .map(|(m, p)| TermDoc {
                    symbols: m.expanded(),
                    coeffs: p.terms().map(|(e, c)| (e, CoeffRepr::Text(c.to_string()))).collect(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &ClassDoc) -> Result<Self, MclassError> {
        let tag: RingTag = doc.ring_tag.parse()?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in &doc.terms {
            let mono = Monomial::from_powers(t.symbols.iter().map(|s| (s.clone(), 1)));
            let mut coeffs = Vec::with_capacity(t.coeffs.len());
            for (e, c) in &t.coeffs {
                let c: C = match c {
                    CoeffRepr::Text(s) => parse_coeff(s)?,
                    CoeffRepr::Int(i) => C::from_i64(*i).ok_or_else(|| MclassError::Parse(format!("integer {i} out of range")))?,
                };
                coeffs.push((*e, c));
            }
            terms.push((mono, LefschetzPoly::from_terms(coeffs)));
        }
        MotivicClass::from_terms(tag, terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("class documents serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, MclassError> {
        let doc: ClassDoc = serde_json::from_str(s).map_err(|e| MclassError::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// Parses an expression into a class with the given tag.
pub fn parse_class<C: Coefficient>(tag: RingTag, src: &str) -> Result<MotivicClass<C>, MclassError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, tag };
    let c = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(c)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tag: RingTag,
}

fn ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'~' | b'\'' | b'.')
}

impl Parser<'_> {
    fn error(&self, what: &str) -> MclassError {
        MclassError::Parse(format!("{what} at offset {} in {:?}", self.pos, String::from_utf8_lossy(self.src)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<C: Coefficient>(&mut self) -> Result<MotivicClass<C>, MclassError> {
        let mut acc = if self.eat(b'-') { self.term()?.neg() } else { self.term()? };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<C: Coefficient>(&mut self) -> Result<MotivicClass<C>, MclassError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<String, MclassError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn exponent(&mut self) -> Result<Option<i64>, MclassError> {
        if !self.eat(b'^') {
            return Ok(None);
        }
        let neg = self.eat(b'-');
        let n: i64 = self.integer()?.parse().map_err(|_| self.error("exponent too large"))?;
        Ok(Some(if neg { -n } else { n }))
    }

    fn factor<C: Coefficient>(&mut self) -> Result<MotivicClass<C>, MclassError> {
        let tag = self.tag;
        let Some(b) = self.peek() else { return Err(self.error("unexpected end")) };
        if b == b'-' {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let (base, is_l) = if b == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            (inner, false)
        } else if b.is_ascii_digit() {
            let s = self.integer()?;
            (MotivicClass::constant(tag, parse_coeff::<C>(&s)?), false)
        } else if b == b'[' {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos] != b']' {
                self.pos += 1;
            }
            if self.pos == self.src.len() {
                return Err(self.error("unterminated symbol"));
            }
            let name = String::from_utf8_lossy(&self.src[start..self.pos]).trim().to_string();
            self.pos += 1;
            if name.is_empty() || name == "L" {
                return Err(self.error("invalid symbol name"));
            }
            (MotivicClass::symbol(tag, &name), false)
        } else if ident_char(b) {
            let start = self.pos;
            while self.pos < self.src.len() && ident_char(self.src[self.pos]) {
                self.pos += 1;
            }
            let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            if name == "L" {
                (MotivicClass::lefschetz(tag), true)
            } else {
                (MotivicClass::symbol(tag, &name), false)
            }
        } else {
            return Err(self.error("unexpected character"));
        };
        match self.exponent()? {
            None => Ok(base),
            Some(e) if is_l => {
                let e = i32::try_from(e).map_err(|_| self.error("exponent too large"))?;
                MotivicClass::lefschetz_pow(tag, e)
            }
            Some(e) if e >= 0 => Ok(base.pow(e as u32)),
            Some(_) => Err(self.error("negative power of a non-L factor")),
        }
    }
}

impl<C: Coefficient> FromStr for MotivicClass<C> {
    type Err = MclassError;

    /// `TAG: expression`, e.g. `K0: 2*L - 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, body) = s.split_once(':').ok_or_else(|| MclassError::Parse("expected 'TAG: expression'".into()))?;
        parse_class(tag.trim().parse()?, body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Cl = MotivicClass<BigInt>;

    #[test]
    fn json_roundtrip_is_exact() {
        let c: Cl = parse_class(RingTag::K0, "2*L - 1 + (1 - L)*[E]*[F]^2 + 123456789012345678901234567890*L^3").unwrap();
        let s = c.to_json();
        let back = Cl::from_json(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), s);
        assert_eq!(
            Cl::lefschetz(RingTag::K0).to_json(),
            r#"{"ring_tag":"K0","terms":[{"symbols":[],"coeffs":[[1,"1"]]}]}"#
        );
    }

    #[test]
    fn json_accepts_plain_integers() {
        let c = Cl::from_json(r#"{"ring_tag":"M","terms":[{"symbols":["E"],"coeffs":[[-1,3],[0,"2"]]}]}"#).unwrap();
        assert_eq!(c, parse_class(RingTag::M, "(3*L^-1 + 2)*E").unwrap());
    }

    #[test]
    fn expressions() {
        let a: Cl = parse_class(RingTag::K0, "(L-1) + [G~] + (1-L)").unwrap();
        assert_eq!(a, Cl::symbol(RingTag::K0, "G~"));
        let b: Cl = "K0_mod: L^2".parse().unwrap();
        assert_eq!(b, Cl::lefschetz(RingTag::K0_MOD).pow(2));
        assert!(parse_class::<BigInt>(RingTag::K0, "L^-1").is_err());
        assert!(parse_class::<BigInt>(RingTag::K0, "E^-1").is_err());
        assert!(parse_class::<BigInt>(RingTag::K0, "2*").is_err());
        assert!(parse_class::<BigInt>(RingTag::K0, "(L").is_err());
    }

    #[test]
    fn display_parses_back() {
        for src in ["2*L - 1", "(1 - L)*[E] + L^2*[F]*[G]", "-[E] + 3", "-L^2 + 1", "0"] {
            let c: Cl = parse_class(RingTag::K0, src).unwrap();
            let again: Cl = parse_class(RingTag::K0, &c.to_string()).unwrap();
            assert_eq!(again, c, "{src} -> {c}");
        }
    }
}
