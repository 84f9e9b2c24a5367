//! The commutative "block" ring `Q[t, t^-1]`, optionally localized at `H(t)`.
//!
//! Elements are kept in partial-fraction normal form over the basis
//!
//! ```text
//! { t^m : m in Z }  ∪  { t^i r^j : 0 <= i < n, j >= 1 },     r = H(t)^-1
//! ```
//!
//! which is a basis because `H(0) = 1` makes `t` and `H(t)` coprime. Equality and
//! "is this Laurent" are decided by inspecting the stored keys.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::Coeff;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("coefficient list of H is empty")]
    Empty,
    #[error("H must have degree at least 1")]
    DegreeZero,
    #[error("H must satisfy h_0 = 1 and h_n = 1, got h_0 = {h0}, h_n = {hn}")]
    NotMonicOrUnitConstant { h0: Coeff, hn: Coeff },
    #[error("H = {0} is not reversible (h_i != h_(n-i)); pass the non-reversible override to experiment")]
    NotReversible(String),
    #[error("element has a fractional part and is not a Laurent polynomial")]
    NotLaurent,
}

/// A validated polynomial `H(t) = 1 + h_1 t + ... + h_(n-1) t^(n-1) + t^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HSpec {
    pub n: usize,
    /// `h_0, ..., h_n`, constant term first.
    pub coeffs: Vec<Coeff>,
    pub reversible_ok: bool,
    pub distinct_roots: bool,
    pub warnings: Vec<String>,
}

pub fn validate_h(coeffs: &[Coeff], allow_nonreversible: bool) -> Result<HSpec, BlockError> {
    if coeffs.is_empty() {
        return Err(BlockError::Empty);
    }
    let n = coeffs.len() - 1;
    if n < 1 {
        return Err(BlockError::DegreeZero);
    }
    if !coeffs[0].is_one() || !coeffs[n].is_one() {
        return Err(BlockError::NotMonicOrUnitConstant { h0: coeffs[0].clone(), hn: coeffs[n].clone() });
    }
    let reversible_ok = (0..=n).all(|i| coeffs[i] == coeffs[n - i]);
    let mut spec = HSpec { n, coeffs: coeffs.to_vec(), reversible_ok, distinct_roots: false, warnings: Vec::new() };
    if !reversible_ok {
        if !allow_nonreversible {
            return Err(BlockError::NotReversible(spec.to_string()));
        }
        spec.warnings.push(format!("H = {spec} is not reversible; results are outside the proven range"));
    }
    spec.distinct_roots = has_distinct_roots(&spec);
    if !spec.distinct_roots {
        spec.warnings.push(format!("H = {spec} has a repeated root"));
    }
    Ok(spec)
}

impl HSpec {
    /// Parse `"1,0,1"` (constant term first).
    pub fn parse(s: &str, allow_nonreversible: bool) -> Result<HSpec, String> {
        let coeffs =
            s.split(',').map(|c| c.parse::<Coeff>().map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
        validate_h(&coeffs, allow_nonreversible).map_err(|e| e.to_string())
    }

    /// `1 + x^n`, a convenient constructor for tests.
    pub fn one_plus_power(n: usize) -> HSpec {
        let mut c = vec![Coeff::ZERO; n + 1];
        c[0] = Coeff::ONE;
        c[n] = Coeff::ONE;
        validate_h(&c, false).expect("1 + x^n is valid")
    }

    pub fn render(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let s = match (mono.is_empty(), c.is_one()) {
                (true, _) => c.to_string(),
                (false, true) => mono,
                (false, false) => format!("{c}*{mono}"),
            };
            parts.push(s);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

// Dense univariate helpers over Q, lowest degree first, no trailing zeros.

type DensePoly = Vec<BigRational>;

fn trim(p: &mut DensePoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_rem(a: &DensePoly, b: &DensePoly) -> DensePoly {
    let mut r = a.clone();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let q = r[r.len() - 1].clone() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &q * bc;
        }
        trim(&mut r);
    }
    r
}

fn poly_gcd(a: &DensePoly, b: &DensePoly) -> DensePoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Square-freeness via `gcd(H, H')` computed by the Euclidean algorithm over Q.
pub fn has_distinct_roots(h: &HSpec) -> bool {
    let p: DensePoly = h.coeffs.iter().map(Coeff::to_big).collect();
    let dp: DensePoly = p.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect();
    poly_gcd(&p, &dp).len() == 1
}

/// A basis element of the block ring. `Mono(0)` is the unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockBasis {
    Mono(i64),
    /// `t^i r^j` with `j >= 1`, `0 <= i < n`.
    Frac {
        j: u32,
        i: u32,
    },
}

/// An element in canonical (sparse, partial-fraction) form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BlockElem {
    pub laurent: BTreeMap<i64, Coeff>,
    /// keyed by `(j, i)`
    pub frac: BTreeMap<(u32, u32), Coeff>,
}

impl BlockElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::mono(0)
    }

    pub fn mono(m: i64) -> Self {
        Self::basis(BlockBasis::Mono(m), Coeff::ONE)
    }

    pub fn basis(b: BlockBasis, c: Coeff) -> Self {
        let mut e = Self::zero();
        e.add_term(b, &c);
        e
    }

    pub fn from_laurent<I: IntoIterator<Item = (i64, Coeff)>>(terms: I) -> Self {
        let mut e = Self::zero();
        for (m, c) in terms {
            e.add_term(BlockBasis::Mono(m), &c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.laurent.is_empty() && self.frac.is_empty()
    }

    pub fn add_term(&mut self, b: BlockBasis, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        match b {
            BlockBasis::Mono(m) => accumulate(&mut self.laurent, m, c),
            BlockBasis::Frac { j, i } => accumulate(&mut self.frac, (j, i), c),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (BlockBasis, &Coeff)> {
        self.laurent
            .iter()
            .map(|(m, c)| (BlockBasis::Mono(*m), c))
            .chain(self.frac.iter().map(|((j, i), c)| (BlockBasis::Frac { j: *j, i: *i }, c)))
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut out = Self::zero();
        for (b, v) in self.terms() {
            out.add_term(b, &(v * c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, v) in other.terms() {
            out.add_term(b, v);
        }
        out
    }

    pub fn is_laurent(&self) -> bool {
        self.frac.is_empty()
    }

    pub fn to_laurent(&self) -> Result<BTreeMap<i64, Coeff>, BlockError> {
        if self.is_laurent() {
            Ok(self.laurent.clone())
        } else {
            Err(BlockError::NotLaurent)
        }
    }
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, Coeff>, k: K, c: &Coeff) {
    use std::collections::btree_map::Entry;
    match map.entry(k) {
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

pub type Expansion = Arc<[(BlockBasis, Coeff)]>;

/// Arithmetic context for one side of the free product.
///
/// With `h = None` this is the plain Laurent ring and fractional basis elements
/// never arise.
pub struct BlockRing {
    h: Option<HSpec>,
    cache: Mutex<FxHashMap<(u32, i64), Expansion>>,
}

impl fmt::Debug for BlockRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockRing").field("h", &self.h).finish()
    }
}

impl Clone for BlockRing {
    fn clone(&self) -> Self {
        Self::new(self.h.clone())
    }
}

impl BlockRing {
    pub fn new(h: Option<HSpec>) -> Self {
        BlockRing { h, cache: Mutex::new(FxHashMap::default()) }
    }

    pub fn laurent() -> Self {
        Self::new(None)
    }

    pub fn localized(h: HSpec) -> Self {
        Self::new(Some(h))
    }

    pub fn h(&self) -> Option<&HSpec> {
        self.h.as_ref()
    }

    pub fn is_localized(&self) -> bool {
        self.h.is_some()
    }

    /// Degree of `H`, or 0 for the plain Laurent ring.
    pub fn degree(&self) -> usize {
        self.h.as_ref().map_or(0, |h| h.n)
    }

    /// `H(t)` as an element (requires a localized ring for `r` to make sense,
    /// but the polynomial itself is always available when `H` is known).
    pub fn h_poly(&self) -> Option<BlockElem> {
        self.h
            .as_ref()
            .map(|h| BlockElem::from_laurent(h.coeffs.iter().enumerate().map(|(i, c)| (i as i64, c.clone()))))
    }

    /// `r = H(t)^-1`.
    pub fn h_inverse(&self) -> Option<BlockElem> {
        self.h.as_ref().map(|_| BlockElem::basis(BlockBasis::Frac { j: 1, i: 0 }, Coeff::ONE))
    }

    /// Canonical form of `r^j t^m`.
    pub fn reduce_pf(&self, j: u32, m: i64) -> BlockElem {
        let mut out = BlockElem::zero();
        for (b, c) in self.reduce_terms(j, m).iter() {
            out.add_term(*b, c);
        }
        out
    }

    pub(crate) fn reduce_terms(&self, j: u32, m: i64) -> Expansion {
        let n = self.degree() as i64;
        if j == 0 {
            return Arc::from(vec![(BlockBasis::Mono(m), Coeff::ONE)]);
        }
        let h = self.h.as_ref().expect("fractional basis element in an unlocalized ring");
        if (0..n).contains(&m) {
            return Arc::from(vec![(BlockBasis::Frac { j, i: m as u32 }, Coeff::ONE)]);
        }
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&(j, m)) {
            return hit.clone();
        }
        let mut out = BlockElem::zero();
        // Pending keys are ordered so that a popped key never receives further
        // contributions: above the window m strictly decreases, below it the
        // exponent rises towards the window (with j breaking ties).
        let mut pending: BTreeMap<(i64, i64), Coeff> = BTreeMap::new();
        let upward = m < 0;
        let key = |jj: u32, mm: i64| if upward { (mm, -(jj as i64)) } else { (-mm, -(jj as i64)) };
        let unkey = |k: (i64, i64)| {
            let jj = (-k.1) as u32;
            let mm = if upward { k.0 } else { -k.0 };
            (jj, mm)
        };
        pending.insert(key(j, m), Coeff::ONE);
        while let Some((k, c)) = pending.pop_first() {
            let (jj, mm) = unkey(k);
            if jj == 0 {
                out.add_term(BlockBasis::Mono(mm), &c);
                continue;
            }
            if (0..n).contains(&mm) {
                out.add_term(BlockBasis::Frac { j: jj, i: mm as u32 }, &c);
                continue;
            }
            let mut push = |jj: u32, mm: i64, v: Coeff| {
                if v.is_zero() {
                    return;
                }
                let e = pending.entry(key(jj, mm)).or_insert(Coeff::ZERO);
                *e += &v;
                if e.is_zero() {
                    pending.remove(&key(jj, mm));
                }
            };
            if mm >= n {
                // r t^n = 1 - sum_{i<n} h_i r t^i
                push(jj - 1, mm - n, c.clone());
                for (i, hi) in h.coeffs.iter().enumerate().take(n as usize) {
                    push(jj, mm - n + i as i64, -(&c * hi));
                }
            } else {
                // r^j t^m = r^(j-1) t^m - sum_{i>=1} h_i r^j t^(m+i)
                push(jj - 1, mm, c.clone());
                for (i, hi) in h.coeffs.iter().enumerate().skip(1) {
                    push(jj, mm + i as i64, -(&c * hi));
                }
            }
        }
        let exp: Expansion = out.terms().map(|(b, c)| (b, c.clone())).collect::<Vec<_>>().into();
        self.cache.lock().expect("cache poisoned").insert((j, m), exp.clone());
        exp
    }

    /// Product of two basis elements.
    pub fn basis_mul(&self, a: BlockBasis, b: BlockBasis) -> Expansion {
        use BlockBasis::*;
        match (a, b) {
            (Mono(p), Mono(q)) => Arc::from(vec![(Mono(p + q), Coeff::ONE)]),
            (Mono(p), Frac { j, i }) | (Frac { j, i }, Mono(p)) => self.reduce_terms(j, p + i as i64),
            (Frac { j: j1, i: i1 }, Frac { j: j2, i: i2 }) => self.reduce_terms(j1 + j2, (i1 + i2) as i64),
        }
    }

    pub fn add(&self, a: &BlockElem, b: &BlockElem) -> BlockElem {
        a.add(b)
    }

    pub fn mul(&self, a: &BlockElem, b: &BlockElem) -> BlockElem {
        let mut out = BlockElem::zero();
        for (ba, ca) in a.terms() {
            for (bb, cb) in b.terms() {
                let c = ca * cb;
                for (bc, cc) in self.basis_mul(ba, bb).iter() {
                    out.add_term(*bc, &(&c * cc));
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &BlockElem, e: u32) -> BlockElem {
        let mut acc = BlockElem::one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Evaluate `p(t) = sum_i c_i t^i` at a block element.
    pub fn eval_poly(&self, coeffs: &[Coeff], at: &BlockElem) -> BlockElem {
        let mut acc = BlockElem::zero();
        for c in coeffs.iter().rev() {
            acc = self.mul(&acc, at).add(&BlockElem::basis(BlockBasis::Mono(0), c.clone()));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(c: &[i64]) -> HSpec {
        validate_h(&c.iter().map(|&v| Coeff::Int(v)).collect::<Vec<_>>(), true).unwrap()
    }

    fn frac(j: u32, i: u32) -> BlockElem {
        BlockElem::basis(BlockBasis::Frac { j, i }, Coeff::ONE)
    }

    #[test]
    fn validate_examples() {
        let s = validate_h(&[Coeff::ONE, Coeff::ZERO, Coeff::ONE], false).unwrap();
        assert_eq!(s.n, 2);
        assert!(s.reversible_ok);
        let s = validate_h(&[Coeff::ONE, Coeff::ONE, Coeff::ONE], false).unwrap();
        assert!(s.reversible_ok);
        let nr = [Coeff::ONE, Coeff::Int(2), Coeff::ZERO, Coeff::ONE];
        assert!(matches!(validate_h(&nr, false), Err(BlockError::NotReversible(_))));
        let s = validate_h(&nr, true).unwrap();
        assert!(!s.reversible_ok);
        assert!(!s.warnings.is_empty());
        assert!(matches!(
            validate_h(&[Coeff::Int(2), Coeff::ONE], false),
            Err(BlockError::NotMonicOrUnitConstant { .. })
        ));
        assert_eq!(validate_h(&[Coeff::ONE], false), Err(BlockError::DegreeZero));
        assert_eq!(validate_h(&[], false), Err(BlockError::Empty));
    }

    #[test]
    fn distinct_roots_examples() {
        assert!(has_distinct_roots(&h(&[1, 0, 1])));
        assert!(!has_distinct_roots(&h(&[1, 2, 1])));
        assert!(has_distinct_roots(&h(&[1, 1])));
        // (1+x)(1+x+x^2)-ish repeated factor: (1+x)^2 (1+x^2) is not monic-reversible-checked here
        assert!(!has_distinct_roots(&h(&[1, 2, 2, 2, 1])));
    }

    #[test]
    fn rendering() {
        assert_eq!(h(&[1, 0, 1]).to_string(), "1 + x^2");
        assert_eq!(h(&[1, -2, 0, 1]).to_string(), "1 - 2*x + x^3");
    }

    #[test]
    fn add_examples() {
        let a = BlockElem::mono(1);
        let b = BlockElem::mono(1).scale(&Coeff::Int(-1));
        assert!(a.add(&b).is_zero());
        let c = BlockElem::mono(-1).add(&frac(1, 0));
        assert_eq!(c.laurent.len() + c.frac.len(), 2);
        let half = BlockElem::basis(BlockBasis::Frac { j: 1, i: 0 }, Coeff::ratio(1, 2));
        assert_eq!(half.add(&half), frac(1, 0));
    }

    #[test]
    fn reduce_examples() {
        let ring = BlockRing::localized(h(&[1, 0, 1]));
        // r t^2 = 1 - r
        let expect = BlockElem::one().add(&frac(1, 0).scale(&Coeff::Int(-1)));
        assert_eq!(ring.reduce_pf(1, 2), expect);
        // r t^-1 = t^-1 - r t
        let expect = BlockElem::mono(-1).add(&frac(1, 1).scale(&Coeff::Int(-1)));
        assert_eq!(ring.reduce_pf(1, -1), expect);
        assert_eq!(ring.reduce_pf(0, 5), BlockElem::mono(5));
        assert!(!ring.reduce_pf(1, 2).is_laurent());
    }

    #[test]
    fn mul_examples() {
        let ring = BlockRing::localized(h(&[1, 0, 1]));
        let hp = ring.h_poly().unwrap();
        assert_eq!(ring.mul(&frac(1, 0), &hp), BlockElem::one());
        assert_eq!(ring.mul(&BlockElem::mono(2), &BlockElem::mono(-2)), BlockElem::one());
        // r * r t^2 = r - r^2
        let expect = frac(1, 0).add(&frac(2, 0).scale(&Coeff::Int(-1)));
        assert_eq!(ring.mul(&frac(1, 0), &ring.reduce_pf(1, 2)), expect);
    }

    #[test]
    fn laurent_extraction() {
        let e = BlockElem::from_laurent([(3, Coeff::ONE), (-1, Coeff::Int(-2))]);
        assert!(e.is_laurent());
        assert_eq!(e.to_laurent().unwrap().len(), 2);
        assert_eq!(frac(1, 0).to_laurent(), Err(BlockError::NotLaurent));
    }

    #[test]
    fn reversibility_identity() {
        for c in [&[1, 0, 1][..], &[1, 1, 1], &[1, 0, 0, 1], &[1, 3, 3, 1], &[1, -2, 5, -2, 1]] {
            let spec = h(c);
            let ring = BlockRing::localized(spec.clone());
            let n = spec.n as i64;
            let h_at_inv =
                BlockElem::from_laurent(spec.coeffs.iter().enumerate().map(|(i, c)| (-(i as i64), c.clone())));
            let lhs = ring.mul(&BlockElem::mono(n), &h_at_inv);
            assert_eq!(lhs, ring.h_poly().unwrap());
        }
    }

    // Random elements over H in a small family, with small Laurent exponents and
    // fractional parts. Frac keys must respect 0 <= i < n.
    fn arb_elem(n: u32) -> impl Strategy<Value = BlockElem> {
        let term = prop_oneof![
            (-4i64..5, -3i64..4).prop_map(|(m, c)| (BlockBasis::Mono(m), c)),
            (1u32..3, 0..n, -3i64..4).prop_map(|(j, i, c)| (BlockBasis::Frac { j, i }, c)),
        ];
        prop::collection::vec(term, 0..4).prop_map(|ts| {
            let mut e = BlockElem::zero();
            for (b, c) in ts {
                e.add_term(b, &Coeff::Int(c));
            }
            e
        })
    }

    fn arb_h() -> impl Strategy<Value = HSpec> {
        prop_oneof![Just(h(&[1, 0, 1])), Just(h(&[1, 1, 1])), Just(h(&[1, 0, 0, 1])), Just(h(&[1, 2, 0, 1]))]
    }

    fn keys_ok(e: &BlockElem, n: usize) -> bool {
        e.frac.keys().all(|&(j, i)| j >= 1 && (i as usize) < n) && e.terms().all(|(_, c)| !c.is_zero())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(250))]

        #[test]
        fn ring_laws((spec, a, b, c) in arb_h().prop_flat_map(|s| {
            let n = s.n as u32;
            (Just(s), arb_elem(n), arb_elem(n), arb_elem(n))
        })) {
            let ring = BlockRing::localized(spec.clone());
            let ab = ring.mul(&a, &b);
            prop_assert!(keys_ok(&ab, spec.n));
            prop_assert_eq!(&ab, &ring.mul(&b, &a));
            prop_assert_eq!(ring.mul(&ab, &c), ring.mul(&a, &ring.mul(&b, &c)));
            prop_assert_eq!(ring.mul(&a, &b.add(&c)), ring.mul(&a, &b).add(&ring.mul(&a, &c)));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(ring.mul(&a, &BlockElem::one()), a.clone());
        }

        #[test]
        fn localization_sound(spec in arb_h(), j in 1u32..4, m in -8i64..9) {
            let ring = BlockRing::localized(spec.clone());
            prop_assert_eq!(ring.mul(&ring.h_poly().unwrap(), &ring.h_inverse().unwrap()), BlockElem::one());
            // r^j t^m * H^j = t^m
            let red = ring.reduce_pf(j, m);
            prop_assert!(keys_ok(&red, spec.n));
            let hj = ring.pow(&ring.h_poly().unwrap(), j);
            prop_assert_eq!(ring.mul(&red, &hj), BlockElem::mono(m));
        }

        #[test]
        fn laurent_embedding_is_canonical(terms in prop::collection::btree_map(-6i64..7, 1i64..5, 0..5)) {
            let e = BlockElem::from_laurent(terms.iter().map(|(m, c)| (*m, Coeff::Int(*c))));
            let back = e.to_laurent().unwrap();
            let want: BTreeMap<i64, Coeff> = terms.iter().map(|(m, c)| (*m, Coeff::Int(*c))).collect();
            prop_assert_eq!(back, want);
        }
    }
}
