//! Noncommutative algebra generated by `x` and `y`, realised as the free
//! product of two [`BlockRing`]s.
//!
//! A basis of the free product is given by alternating words whose letters are
//! non-unit basis elements of the x-ring and the y-ring. An [`NCElem`] is a
//! sparse linear combination of such words, so two elements are equal iff their
//! term maps are equal and Laurentness is a syntactic property.
//!
//! Multiplication concatenates words and merges the two atoms meeting at the
//! seam when they live on the same side. A merge can produce a scalar, in which
//! case the atoms that become adjacent are merged in turn; this cascade is driven
//! by an explicit worklist.

mod json;
mod text;

pub use json::{docs_to_terms, terms_to_docs, AtomDoc, ElementDoc, TermDoc, TermsView};
pub use text::{parse_element, write_element, ParseError};

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::blockring::{BlockBasis, BlockRing};
use crate::coeff::Coeff;
use crate::commutative::CommLaurent;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeAlgError {
    #[error("input contains a fraction atom: {0}")]
    NotLaurentInput(String),
    #[error("images of {0} and its inverse do not multiply to 1")]
    NotInverse(&'static str),
    #[error("term limit of {limit} exceeded ({reached} terms)")]
    TermLimit { limit: usize, reached: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn letter(self) -> &'static str {
        match self {
            Side::X => "x",
            Side::Y => "y",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }
}

const SIDE_BIT: u32 = 1 << 31;
const FRAC_BIT: u32 = 1 << 30;
const PAYLOAD: u32 = FRAC_BIT - 1;
const POW_LIMIT: i64 = 1 << 29;
const FRAC_FIELD: u32 = 1 << 15;

/// One letter of an alternating word, packed into 32 bits: a side bit, a kind
/// bit, and either a signed exponent or an `(j, i)` pair for `t^i H(t)^-j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

impl Atom {
    pub fn pow(side: Side, m: i64) -> Atom {
        assert!(m != 0, "zero exponent is the unit, not an atom");
        assert!(m.abs() < POW_LIMIT, "exponent {m} out of range");
        let payload = (m as i32 as u32) & PAYLOAD;
        Atom(side_bits(side) | payload)
    }

    pub fn frac(side: Side, j: u32, i: u32) -> Atom {
        assert!((1..FRAC_FIELD).contains(&j) && i < FRAC_FIELD, "fraction atom ({j},{i}) out of range");
        Atom(side_bits(side) | FRAC_BIT | (j << 15) | i)
    }

    pub fn from_basis(side: Side, b: BlockBasis) -> Option<Atom> {
        match b {
            BlockBasis::Mono(0) => None,
            BlockBasis::Mono(m) => Some(Atom::pow(side, m)),
            BlockBasis::Frac { j, i } => Some(Atom::frac(side, j, i)),
        }
    }

    pub fn side(self) -> Side {
        if self.0 & SIDE_BIT == 0 {
            Side::X
        } else {
            Side::Y
        }
    }

    pub fn is_frac(self) -> bool {
        self.0 & FRAC_BIT != 0
    }

    /// The exponent of a pure power atom.
    pub fn exponent(self) -> Option<i64> {
        if self.is_frac() {
            return None;
        }
        // sign-extend the 30-bit payload
        Some((((self.0 & PAYLOAD) << 2) as i32 >> 2) as i64)
    }

    /// `(j, i)` of a fraction atom.
    pub fn frac_parts(self) -> Option<(u32, u32)> {
        self.is_frac().then_some(((self.0 >> 15) & (FRAC_FIELD - 1), self.0 & (FRAC_FIELD - 1)))
    }

    pub fn basis(self) -> BlockBasis {
        match self.frac_parts() {
            Some((j, i)) => BlockBasis::Frac { j, i },
            None => BlockBasis::Mono(self.exponent().unwrap()),
        }
    }

    /// Number of letters once expanded (`x^3` has three, `t^i r^j` has `i + j`).
    pub fn letter_len(self) -> u64 {
        match self.frac_parts() {
            Some((j, i)) => (j + i) as u64,
            None => self.exponent().unwrap().unsigned_abs(),
        }
    }
}

fn side_bits(side: Side) -> u32 {
    match side {
        Side::X => 0,
        Side::Y => SIDE_BIT,
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render_atom(*self))
    }
}

/// A word in the free-product basis: atoms whose sides strictly alternate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word(Box<[Atom]>);

const PREFIX_LETTERS: u64 = 42;

impl Word {
    pub fn one() -> Word {
        Word(Box::new([]))
    }

    /// Build from atoms that already alternate.
    pub fn from_atoms(atoms: Vec<Atom>) -> Word {
        debug_assert!(atoms.windows(2).all(|w| w[0].side() != w[1].side()), "non-alternating word");
        Word(atoms.into_boxed_slice())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_laurent(&self) -> bool {
        self.0.iter().all(|a| !a.is_frac())
    }

    pub fn letter_len(&self) -> u64 {
        self.0.iter().map(|a| a.letter_len()).sum()
    }

    /// Group inverse of a Laurent word.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|a| Atom::pow(a.side(), -a.exponent().expect("Laurent word"))).collect())
    }

    /// Letters of the expanded string, ranked `x < x^-1 < y < y^-1 < h_x < h_y`.
    /// The expanded letter string as runs `(letter, count)`.
    fn letter_runs(&self) -> impl Iterator<Item = (u8, u64)> + '_ {
        self.0
            .iter()
            .flat_map(|a| {
                let base = if a.side() == Side::X { 0u8 } else { 2u8 };
                match a.frac_parts() {
                    Some((j, i)) => [(base, i as u64), (4 + base / 2, j as u64)],
                    None => {
                        let m = a.exponent().unwrap();
                        [(if m > 0 { base } else { base + 1 }, m.unsigned_abs()), (0, 0)]
                    }
                }
            })
            .filter(|r| r.1 > 0)
    }

    pub fn grlex_cmp(&self, other: &Word) -> Ordering {
        self.letter_len().cmp(&other.letter_len()).then_with(|| self.cmp_equal_len(other))
    }

    /// The first [`PREFIX_LETTERS`] letters packed 3 bits each, most significant
    /// first. For words of equal letter length this orders like the letter strings.
    fn letter_prefix(&self) -> u128 {
        let mut key = 0u128;
        let mut room = PREFIX_LETTERS;
        for (l, n) in self.letter_runs() {
            for _ in 0..n.min(room) {
                key = (key << 3) | l as u128;
            }
            room -= n.min(room);
            if room == 0 {
                break;
            }
        }
        key << (3 * room)
    }

    /// Tie-break of [`grlex_cmp`](Self::grlex_cmp) for words of equal letter length.
    fn cmp_equal_len(&self, other: &Word) -> Ordering {
        let (mut a, mut b) = (self.letter_runs(), other.letter_runs());
        let (mut ra, mut rb) = (a.next(), b.next());
        loop {
            match (ra, rb) {
                (None, None) => return self.0.cmp(&other.0),
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((la, ca)), Some((lb, cb))) => {
                    if la != lb {
                        return la.cmp(&lb);
                    }
                    match ca.cmp(&cb) {
                        Ordering::Equal => (ra, rb) = (a.next(), b.next()),
                        Ordering::Less => (ra, rb) = (a.next(), Some((lb, cb - ca))),
                        Ordering::Greater => (ra, rb) = (Some((la, ca - cb)), b.next()),
                    }
                }
            }
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render_word(self))
    }
}

pub type Terms = FxHashMap<Word, Coeff>;

fn accumulate(terms: &mut Terms, w: Word, c: &Coeff) {
    use std::collections::hash_map::Entry;
    if c.is_zero() {
        return;
    }
    match terms.entry(w) {
        Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// A finite linear combination of alternating words with nonzero coefficients.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct NCElem {
    terms: Terms,
}

impl NCElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(Word::one(), Coeff::ONE)
    }

    pub fn scalar(c: Coeff) -> Self {
        Self::word(Word::one(), c)
    }

    pub fn word(w: Word, c: Coeff) -> Self {
        let mut terms = Terms::default();
        accumulate(&mut terms, w, &c);
        NCElem { terms }
    }

    pub fn atom(a: Atom) -> Self {
        Self::word(Word::from_atoms(vec![a]), Coeff::ONE)
    }

    pub fn x() -> Self {
        Self::atom(Atom::pow(Side::X, 1))
    }

    pub fn y() -> Self {
        Self::atom(Atom::pow(Side::Y, 1))
    }

    pub fn gen(side: Side, m: i64) -> Self {
        if m == 0 {
            Self::one()
        } else {
            Self::atom(Atom::pow(side, m))
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Coeff)>>(it: I) -> Self {
        let mut terms = Terms::default();
        for (w, c) in it {
            accumulate(&mut terms, w, &c);
        }
        NCElem { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Coeff {
        self.terms.get(w).cloned().unwrap_or(Coeff::ZERO)
    }

    /// Number of terms; an element with no terms is [`is_zero`](Self::is_zero).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in the deterministic serialisation order.
    pub fn sorted_terms(&self) -> Vec<(&Word, &Coeff)> {
        let mut v: Vec<_> = self.terms.iter().map(|(w, c)| (w.letter_len(), w.letter_prefix(), w, c)).collect();
        v.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then_with(|| a.2.cmp_equal_len(b.2)));
        v.into_iter().map(|(_, _, w, c)| (w, c)).collect()
    }

    pub fn add(&self, other: &NCElem) -> NCElem {
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut terms = big.terms.clone();
        for (w, c) in small.terms() {
            accumulate(&mut terms, w.clone(), c);
        }
        NCElem { terms }
    }

    pub fn sub(&self, other: &NCElem) -> NCElem {
        self.add(&other.scale(&Coeff::Int(-1)))
    }

    pub fn scale(&self, c: &Coeff) -> NCElem {
        if c.is_zero() {
            return NCElem::zero();
        }
        NCElem { terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &NCElem, c: &Coeff) {
        for (w, v) in other.terms() {
            accumulate(&mut self.terms, w.clone(), &(v * c));
        }
    }

    /// True iff no word contains a fraction atom.
    pub fn is_laurent(&self) -> bool {
        self.terms.keys().all(Word::is_laurent)
    }

    /// The offending words when [`is_laurent`](Self::is_laurent) fails, sorted.
    pub fn non_laurent_words(&self) -> Vec<Word> {
        let mut v: Vec<Word> = self.terms.keys().filter(|w| !w.is_laurent()).cloned().collect();
        v.sort_by(|a, b| a.grlex_cmp(b));
        v
    }

    pub fn abelianize(&self) -> Result<CommLaurent, FreeAlgError> {
        let mut out = CommLaurent::zero();
        for (w, c) in self.terms() {
            let (mut ex, mut ey) = (0i64, 0i64);
            for a in w.atoms() {
                let m = a.exponent().ok_or_else(|| FreeAlgError::NotLaurentInput(format!("{w:?}")))?;
                match a.side() {
                    Side::X => ex += m,
                    Side::Y => ey += m,
                }
            }
            out.add_term((ex, ey), c);
        }
        Ok(out)
    }

    pub fn stats(&self) -> ElemStats {
        let mut st = ElemStats {
            term_count: self.len(),
            max_word_length: 0,
            max_letter_length: 0,
            coeff_min: None,
            coeff_max: None,
            all_positive: true,
            all_integer: true,
        };
        let (mut lo, mut hi): (Option<&Coeff>, Option<&Coeff>) = (None, None);
        for (w, c) in &self.terms {
            st.max_word_length = st.max_word_length.max(w.len());
            st.max_letter_length = st.max_letter_length.max(w.letter_len());
            if lo.is_none_or(|m| c < m) {
                lo = Some(c);
            }
            if hi.is_none_or(|m| c > m) {
                hi = Some(c);
            }
            st.all_positive &= c.is_positive();
            st.all_integer &= c.is_integer();
        }
        st.coeff_min = lo.cloned();
        st.coeff_max = hi.cloned();
        st
    }

    pub fn to_text(&self) -> String {
        text::render_element(self)
    }
}

impl fmt::Debug for NCElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for NCElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Growth record for an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElemStats {
    pub term_count: usize,
    /// in atoms (syllables)
    pub max_word_length: usize,
    /// in letters of the expanded string
    pub max_letter_length: u64,
    pub coeff_min: Option<Coeff>,
    pub coeff_max: Option<Coeff>,
    pub all_positive: bool,
    pub all_integer: bool,
}

/// Embed a group word given as `(letter, exponent)` pairs, merging runs and
/// dropping zero exponents (free reduction).
pub fn embed_word(w: &[(Side, i64)]) -> NCElem {
    NCElem::word(reduce_group_word(w), Coeff::ONE)
}

pub fn reduce_group_word(w: &[(Side, i64)]) -> Word {
    let mut out: Vec<(Side, i64)> = Vec::with_capacity(w.len());
    for &(s, m) in w {
        if m == 0 {
            continue;
        }
        match out.last_mut() {
            Some((ls, lm)) if *ls == s => {
                *lm += m;
                if *lm == 0 {
                    out.pop();
                }
            }
            _ => out.push((s, m)),
        }
    }
    Word::from_atoms(out.into_iter().map(|(s, m)| Atom::pow(s, m)).collect())
}

/// Arithmetic context: one block ring per side.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    x: BlockRing,
    y: BlockRing,
}

impl FreeAlgebra {
    pub fn new(x: BlockRing, y: BlockRing) -> Self {
        FreeAlgebra { x, y }
    }

    /// Both sides plain Laurent: the group algebra of the free group on x, y.
    pub fn laurent() -> Self {
        Self::new(BlockRing::laurent(), BlockRing::laurent())
    }

    pub fn ring(&self, side: Side) -> &BlockRing {
        match side {
            Side::X => &self.x,
            Side::Y => &self.y,
        }
    }

    /// Lift a block-ring element onto one side.
    pub fn embed_block(&self, side: Side, e: &crate::blockring::BlockElem) -> NCElem {
        NCElem::from_terms(e.terms().map(|(b, c)| {
            let w = match Atom::from_basis(side, b) {
                Some(a) => Word::from_atoms(vec![a]),
                None => Word::one(),
            };
            (w, c.clone())
        }))
    }

    /// `H(t)` on the given side, when that side knows an `H`.
    pub fn h_poly(&self, side: Side) -> Option<NCElem> {
        self.ring(side).h_poly().map(|e| self.embed_block(side, &e))
    }

    /// `H(t)^-1` on a localized side.
    pub fn h_inverse(&self, side: Side) -> Option<NCElem> {
        self.ring(side).h_inverse().map(|e| self.embed_block(side, &e))
    }

    fn mul_words_into(&self, a: &[Atom], b: &[Atom], c: &Coeff, out: &mut Terms) {
        let emit = |out: &mut Terms, left: &[Atom], mid: Option<Atom>, right: &[Atom], c: &Coeff| {
            let mut v = Vec::with_capacity(left.len() + right.len() + 1);
            v.extend_from_slice(left);
            v.extend(mid);
            v.extend_from_slice(right);
            accumulate(out, Word(v.into_boxed_slice()), c);
        };
        let mut work = vec![(a.len(), 0usize, c.clone())];
        while let Some((i, j, c)) = work.pop() {
            if i == 0 || j == b.len() || a[i - 1].side() != b[j].side() {
                emit(out, &a[..i], None, &b[j..], &c);
                continue;
            }
            let (l, r) = (a[i - 1], b[j]);
            let side = l.side();
            if let (Some(p), Some(q)) = (l.exponent(), r.exponent()) {
                if p + q == 0 {
                    work.push((i - 1, j + 1, c));
                } else {
                    emit(out, &a[..i - 1], Some(Atom::pow(side, p + q)), &b[j + 1..], &c);
                }
                continue;
            }
            for (basis, k) in self.ring(side).basis_mul(l.basis(), r.basis()).iter() {
                let ck = &c * k;
                match Atom::from_basis(side, *basis) {
                    None => work.push((i - 1, j + 1, ck)),
                    Some(atom) => emit(out, &a[..i - 1], Some(atom), &b[j + 1..], &ck),
                }
            }
        }
    }

    fn mul_into(&self, a: &NCElem, b: &NCElem, scale: &Coeff, out: &mut Terms) {
        for (wa, ca) in a.terms() {
            let cab = ca * scale;
            for (wb, cb) in b.terms() {
                self.mul_words_into(wa.atoms(), wb.atoms(), &(&cab * cb), out);
            }
        }
    }

    pub fn mul(&self, a: &NCElem, b: &NCElem) -> NCElem {
        let mut terms = Terms::default();
        self.mul_into(a, b, &Coeff::ONE, &mut terms);
        NCElem { terms }
    }

    pub fn pow(&self, a: &NCElem, e: u32) -> NCElem {
        let mut acc = NCElem::one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// `sum_i c_i a^i` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[Coeff], a: &NCElem) -> NCElem {
        let mut acc = NCElem::zero();
        for c in coeffs.iter().rev() {
            acc = self.mul(&acc, a).add(&NCElem::scalar(c.clone()));
        }
        acc
    }

    /// Image of a Laurent element under the endomorphism `e`.
    pub fn substitute(&self, a: &NCElem, e: &EndoSpec) -> Result<NCElem, FreeAlgError> {
        self.substitute_limited(a, e, usize::MAX)
    }

    /// As [`substitute`](Self::substitute), failing once the accumulator holds
    /// more than `limit` terms.
    pub fn substitute_limited(&self, a: &NCElem, e: &EndoSpec, limit: usize) -> Result<NCElem, FreeAlgError> {
        if let Some(w) = a.non_laurent_words().first() {
            return Err(FreeAlgError::NotLaurentInput(format!("{w:?}")));
        }
        // Words sharing a prefix share the product of its images; processing in
        // sorted order lets consecutive words reuse a stack of prefix products.
        let mut words: Vec<(&Word, &Coeff)> = a.terms().collect();
        words.sort_by(|p, q| p.0.atoms().cmp(q.0.atoms()));
        let mut out = Terms::default();
        let mut stack: Vec<(Atom, NCElem)> = Vec::new();
        let one = NCElem::one();
        for (w, c) in words {
            let atoms = w.atoms();
            // all but the last atom are kept as prefixes
            let last = atoms.len().saturating_sub(1);
            let common = stack.iter().zip(atoms).take_while(|((sa, _), wa)| sa == *wa).count();
            stack.truncate(common.min(last));
            for &atom in &atoms[stack.len()..last] {
                let img = e.image_power(self, atom);
                let next = self.mul(stack.last().map_or(&one, |(_, p)| p), &img);
                stack.push((atom, next));
            }
            match atoms.last() {
                None => accumulate(&mut out, Word::one(), c),
                Some(&tail) => {
                    let img = e.image_power(self, tail);
                    self.mul_into(stack.last().map_or(&one, |(_, p)| p), &img, c, &mut out);
                }
            }
            if out.len() > limit {
                return Err(FreeAlgError::TermLimit { limit, reached: out.len() });
            }
        }
        Ok(NCElem { terms: out })
    }
}

/// An algebra endomorphism fixed by the images of `x, x^-1, y, y^-1`.
pub struct EndoSpec {
    pub x: NCElem,
    pub x_inv: NCElem,
    pub y: NCElem,
    pub y_inv: NCElem,
    powers: Mutex<FxHashMap<Atom, Arc<NCElem>>>,
}

impl fmt::Debug for EndoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndoSpec")
            .field("x", &self.x)
            .field("x_inv", &self.x_inv)
            .field("y", &self.y)
            .field("y_inv", &self.y_inv)
            .finish()
    }
}

impl EndoSpec {
    /// Checks `e(x) e(x^-1) = 1 = e(x^-1) e(x)` and the same for `y`.
    pub fn new(alg: &FreeAlgebra, x: NCElem, x_inv: NCElem, y: NCElem, y_inv: NCElem) -> Result<Self, FreeAlgError> {
        let one = NCElem::one();
        if alg.mul(&x, &x_inv) != one || alg.mul(&x_inv, &x) != one {
            return Err(FreeAlgError::NotInverse("x"));
        }
        if alg.mul(&y, &y_inv) != one || alg.mul(&y_inv, &y) != one {
            return Err(FreeAlgError::NotInverse("y"));
        }
        Ok(EndoSpec { x, x_inv, y, y_inv, powers: Mutex::new(FxHashMap::default()) })
    }

    pub fn image(&self, side: Side, inverse: bool) -> &NCElem {
        match (side, inverse) {
            (Side::X, false) => &self.x,
            (Side::X, true) => &self.x_inv,
            (Side::Y, false) => &self.y,
            (Side::Y, true) => &self.y_inv,
        }
    }

    /// Image of a pure atom `t^m`: `e(t)^m` or `e(t^-1)^-m`, memoised.
    pub fn image_power(&self, alg: &FreeAlgebra, atom: Atom) -> Arc<NCElem> {
        if let Some(hit) = self.powers.lock().expect("power cache poisoned").get(&atom) {
            return hit.clone();
        }
        let m = atom.exponent().expect("pure atom");
        let base = self.image(atom.side(), m < 0);
        let mag = m.unsigned_abs();
        let val = if mag == 1 {
            base.clone()
        } else {
            let prev = self.image_power(alg, Atom::pow(atom.side(), m - m.signum()));
            alg.mul(&prev, base)
        };
        let val = Arc::new(val);
        self.powers.lock().expect("power cache poisoned").insert(atom, val.clone());
        val
    }
}
