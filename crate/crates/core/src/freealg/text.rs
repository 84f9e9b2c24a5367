//! Text rendering and parsing, e.g. `y^-1*x^-1*y + 2*x*y^-2`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! element := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor ('*' factor)*
//! factor  := rational | ('x'|'y') ['^' int] | ('hx'|'hy') '(' j ',' i ')'
//! ```
//!
//! `hx(j,i)` is the fraction atom `x^i H(x)^-j` and only parses into an
//! algebra whose x-side is localized.

use thiserror::Error;

use super::{Atom, FreeAlgebra, NCElem, Side, Word};
use crate::coeff::Coeff;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected {found:?} at offset {at}")]
    Unexpected { at: usize, found: String },
    #[error("unexpected end of input")]
    Eof,
    #[error("bad number at offset {0}")]
    Number(usize),
    #[error("fraction atom {0} needs a localized {1}-side")]
    NotLocalized(String, &'static str),
    #[error("fraction atom {0} out of range for degree {1}")]
    FracRange(String, usize),
}

pub fn render_atom(a: Atom) -> String {
    let l = a.side().letter();
    match (a.exponent(), a.frac_parts()) {
        (Some(1), _) => l.to_string(),
        (Some(m), _) => format!("{l}^{m}"),
        (None, Some((j, i))) => format!("h{l}({j},{i})"),
        (None, None) => unreachable!(),
    }
}

pub fn render_word(w: &Word) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.atoms().iter().map(|a| render_atom(*a)).collect::<Vec<_>>().join("*")
}

pub fn render_element(e: &NCElem) -> String {
    let mut out = Vec::new();
    write_element(e, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("rendering is ASCII")
}

fn write_word<W: std::io::Write + ?Sized>(w: &Word, out: &mut W) -> std::io::Result<()> {
    for (idx, a) in w.atoms().iter().enumerate() {
        if idx > 0 {
            out.write_all(b"*")?;
        }
        let l = a.side().letter();
        match (a.exponent(), a.frac_parts()) {
            (Some(1), _) => out.write_all(l.as_bytes())?,
            (Some(m), _) => write!(out, "{l}^{m}")?,
            (None, Some((j, i))) => write!(out, "h{l}({j},{i})")?,
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}

/// Stream the text rendering term by term.
pub fn write_element<W: std::io::Write + ?Sized>(e: &NCElem, out: &mut W) -> std::io::Result<()> {
    if e.is_zero() {
        return out.write_all(b"0");
    }
    for (idx, (w, c)) in e.sorted_terms().into_iter().enumerate() {
        let neg = !c.is_positive();
        let mag = if neg { -c } else { c.clone() };
        match (idx, neg) {
            (0, false) => {}
            (0, true) => out.write_all(b"-")?,
            (_, false) => out.write_all(b" + ")?,
            (_, true) => out.write_all(b" - ")?,
        }
        match (w.is_empty(), mag.is_one()) {
            (true, _) => write!(out, "{mag}")?,
            (false, true) => write_word(w, out)?,
            (false, false) => {
                write!(out, "{mag}*")?;
                write_word(w, out)?;
            }
        }
    }
    Ok(())
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn unexpected(&mut self) -> ParseError {
        match self.peek() {
            None => ParseError::Eof,
            Some(c) => ParseError::Unexpected { at: self.pos, found: (c as char).to_string() },
        }
    }

    fn digits(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ParseError::Number(start));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let at = self.pos;
        let d: i64 = self.digits()?.parse().map_err(|_| ParseError::Number(at))?;
        Ok(if neg { -d } else { d })
    }
}

/// Parse an element of `alg`. Fraction atoms are checked against the side's degree.
pub fn parse_element(alg: &FreeAlgebra, s: &str) -> Result<NCElem, ParseError> {
    let mut lx = Lexer { src: s.as_bytes(), pos: 0 };
    let mut acc = NCElem::zero();
    let mut first = true;
    loop {
        let sign = if lx.eat(b'-') {
            -1
        } else if lx.eat(b'+') || first {
            1
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(lx.unexpected());
        };
        first = false;
        let term = parse_term(alg, &mut lx)?;
        acc = acc.add(&term.scale(&Coeff::Int(sign)));
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(acc)
}

fn parse_term(alg: &FreeAlgebra, lx: &mut Lexer<'_>) -> Result<NCElem, ParseError> {
    let mut coeff = Coeff::ONE;
    let mut prod = NCElem::one();
    loop {
        match lx.peek() {
            Some(c) if c.is_ascii_digit() => {
                let at = lx.pos;
                let num = lx.digits()?;
                let lit = if lx.eat(b'/') { format!("{num}/{}", lx.digits()?) } else { num.to_string() };
                let v: Coeff = lit.parse().map_err(|_| ParseError::Number(at))?;
                coeff = &coeff * &v;
            }
            Some(b'x') | Some(b'y') => {
                let side = if lx.peek() == Some(b'x') { Side::X } else { Side::Y };
                lx.pos += 1;
                let m = if lx.eat(b'^') { lx.int()? } else { 1 };
                prod = alg.mul(&prod, &NCElem::gen(side, m));
            }
            Some(b'h') => {
                lx.pos += 1;
                let side = match lx.peek() {
                    Some(b'x') => Side::X,
                    Some(b'y') => Side::Y,
                    _ => return Err(lx.unexpected()),
                };
                lx.pos += 1;
                lx.expect(b'(')?;
                let j = lx.int()?;
                lx.expect(b',')?;
                let i = lx.int()?;
                lx.expect(b')')?;
                let label = format!("h{}({j},{i})", side.letter());
                let ring = alg.ring(side);
                if !ring.is_localized() {
                    return Err(ParseError::NotLocalized(label, side.letter()));
                }
                if j < 1 || i < 0 || i as usize >= ring.degree() {
                    return Err(ParseError::FracRange(label, ring.degree()));
                }
                prod = alg.mul(&prod, &NCElem::atom(Atom::frac(side, j as u32, i as u32)));
            }
            _ => return Err(lx.unexpected()),
        }
        if !lx.eat(b'*') {
            break;
        }
    }
    Ok(prod.scale(&coeff))
}
