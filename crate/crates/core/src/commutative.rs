//! Commutative oracle: bivariate Laurent polynomials over Q, exact division,
//! the classical recurrence for `F(x, y) = (H(x)/y, x)`, and unreduced
//! fractions compared by cross-multiplication.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::blockring::HSpec;
use crate::coeff::Coeff;
use crate::freealg::{FreeAlgError, NCElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommError {
    #[error("{p} is not divisible by {d} in the Laurent ring")]
    NotDivisible { p: String, d: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("term budget of {0} exceeded")]
    BudgetExceeded(usize),
}

pub type Exp = (i64, i64);

/// Sparse bivariate Laurent polynomial, exponents `(e_x, e_y)`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CommLaurent {
    terms: BTreeMap<Exp, Coeff>,
}

fn grlex(a: &Exp, b: &Exp) -> Ordering {
    (a.0 + a.1).cmp(&(b.0 + b.1)).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1))
}

impl CommLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial((0, 0), Coeff::ONE)
    }

    pub fn x() -> Self {
        Self::monomial((1, 0), Coeff::ONE)
    }

    pub fn y() -> Self {
        Self::monomial((0, 1), Coeff::ONE)
    }

    pub fn monomial(e: Exp, c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(e, &c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, Coeff)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, &c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exp, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert(Coeff::ZERO);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: Exp) -> Coeff {
        self.terms.get(&e).cloned().unwrap_or(Coeff::ZERO)
    }

    /// Number of terms; an element with no terms is [`is_zero`](Self::is_zero).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in o.terms() {
            r.add_term(*e, c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Coeff::Int(-1)))
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        Self::from_terms(self.terms().map(|(e, v)| (*e, v * c)))
    }

    pub fn shift(&self, by: Exp) -> Self {
        CommLaurent { terms: self.terms().map(|(e, c)| ((e.0 + by.0, e.1 + by.1), c.clone())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in o.terms() {
                r.add_term((ea.0 + eb.0, ea.1 + eb.1), &(ca * cb));
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// `sum_i c_i a^i`
    pub fn eval_poly(coeffs: &[Coeff], a: &Self) -> Self {
        coeffs.iter().rev().fold(Self::zero(), |acc, c| acc.mul(a).add(&Self::monomial((0, 0), c.clone())))
    }

    /// Componentwise minimum exponent, `(0, 0)` for zero.
    pub fn min_exponents(&self) -> Exp {
        let mx = self.terms.keys().map(|e| e.0).min().unwrap_or(0);
        let my = self.terms.keys().map(|e| e.1).min().unwrap_or(0);
        (mx, my)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.0 >= 0 && e.1 >= 0)
    }

    pub fn leading(&self) -> Option<(Exp, &Coeff)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0)).map(|(e, c)| (*e, c))
    }

    /// Sum of coefficients, i.e. the value at `x = y = 1`.
    pub fn coeff_sum(&self) -> Coeff {
        self.terms.values().fold(Coeff::ZERO, |acc, c| &acc + c)
    }

    pub fn eval_mod(&self, x: u64, y: u64, p: u64) -> Option<u64> {
        use crate::coeff::{coeff_mod, mod_inverse, mod_pow};
        let xi = mod_inverse(x, p);
        let yi = mod_inverse(y, p);
        let mut acc = 0u64;
        for (e, c) in self.terms() {
            let px = if e.0 >= 0 { mod_pow(x, e.0 as u64, p) } else { mod_pow(xi, (-e.0) as u64, p) };
            let py = if e.1 >= 0 { mod_pow(y, e.1 as u64, p) } else { mod_pow(yi, (-e.1) as u64, p) };
            acc = (acc + coeff_mod(c, p)? * px % p * py) % p;
        }
        Some(acc)
    }
}

impl fmt::Display for CommLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut ts: Vec<_> = self.terms().collect();
        ts.sort_by(|a, b| grlex(a.0, b.0));
        for (idx, (e, c)) in ts.into_iter().enumerate() {
            let neg = !c.is_positive();
            let mag = if neg { -c } else { c.clone() };
            let mut mono = Vec::new();
            for (l, k) in [("x", e.0), ("y", e.1)] {
                match k {
                    0 => {}
                    1 => mono.push(l.to_string()),
                    _ => mono.push(format!("{l}^{k}")),
                }
            }
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono.join("*"),
                (false, false) => format!("{mag}*{}", mono.join("*")),
            };
            let sep = match (idx, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}{body}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CommLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for CommLaurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct T<'a> {
            coeff: &'a Coeff,
            exp: [i64; 2],
        }
        let mut ts: Vec<_> = self.terms().collect();
        ts.sort_by(|a, b| grlex(a.0, b.0));
        s.collect_seq(ts.into_iter().map(|(e, c)| T { coeff: c, exp: [e.0, e.1] }))
    }
}

/// Exact quotient `P / D` in the Laurent ring, or `NotDivisible`.
///
/// Both operands are shifted to polynomials with no monomial factor in `D`, then
/// divided by leading terms under graded-lex order; exact divisibility forces
/// every leading term of the running remainder to be a multiple of `LT(D)`.
pub fn exact_div(p: &CommLaurent, d: &CommLaurent) -> Result<CommLaurent, CommError> {
    if d.is_zero() {
        return Err(CommError::DivisionByZero);
    }
    let not_div = || CommError::NotDivisible { p: p.to_string(), d: d.to_string() };
    let (dmx, dmy) = d.min_exponents();
    let (pmx, pmy) = p.min_exponents();
    let dd = d.shift((-dmx, -dmy));
    let mut rem = p.shift((-pmx, -pmy));
    let (lt_d, lc_d) = dd.leading().map(|(e, c)| (e, c.clone())).unwrap();
    let lc_inv = lc_d.recip().unwrap();
    let mut q = CommLaurent::zero();
    while let Some((e, c)) = rem.leading().map(|(e, c)| (e, c.clone())) {
        let qe = (e.0 - lt_d.0, e.1 - lt_d.1);
        if qe.0 < 0 || qe.1 < 0 {
            return Err(not_div());
        }
        let qc = &c * &lc_inv;
        rem = rem.sub(&dd.shift(qe).scale(&qc));
        q.add_term(qe, &qc);
    }
    let q = q.shift((pmx - dmx, pmy - dmy));
    if &d.mul(&q) != p {
        return Err(not_div());
    }
    Ok(q)
}

/// Run `|k|` steps of `F` (k > 0) or `F^-1` (k < 0) from the state `(a, b)`.
///
/// Forward step: `(a, b) -> (H(a)/b, a)`; backward: `(a, b) -> (b, H(b)/a)`.
pub fn comm_steps(
    h: &HSpec,
    start: (CommLaurent, CommLaurent),
    k: i64,
    max_terms: usize,
) -> Result<(CommLaurent, CommLaurent), CommError> {
    let (mut a, mut b) = start;
    for _ in 0..k.unsigned_abs() {
        let (na, nb) = if k > 0 {
            (exact_div(&CommLaurent::eval_poly(&h.coeffs, &a), &b)?, a)
        } else {
            let nb = exact_div(&CommLaurent::eval_poly(&h.coeffs, &b), &a)?;
            (b, nb)
        };
        if na.len().max(nb.len()) > max_terms {
            return Err(CommError::BudgetExceeded(max_terms));
        }
        a = na;
        b = nb;
    }
    Ok((a, b))
}

/// `(L1, L2)` with `F^k(x, y) = (L1, L2)`.
pub fn comm_iterate(h: &HSpec, k: i64) -> Result<(CommLaurent, CommLaurent), CommError> {
    comm_steps(h, (CommLaurent::x(), CommLaurent::y()), k, usize::MAX)
}

pub fn compare_abelian(a: &NCElem, c: &CommLaurent) -> Result<bool, FreeAlgError> {
    Ok(&a.abelianize()? == c)
}

/// A rational function `num / den` kept unreduced, with polynomial (nonnegative
/// exponent) numerator and denominator.
#[derive(Clone, Debug)]
pub struct Frac {
    pub num: CommLaurent,
    pub den: CommLaurent,
}

impl Frac {
    /// Clears negative exponents on both sides by a common monomial.
    pub fn new(num: CommLaurent, den: CommLaurent) -> Frac {
        assert!(!den.is_zero(), "zero denominator");
        let (nx, ny) = num.min_exponents();
        let (dx, dy) = den.min_exponents();
        let sx = -(nx.min(dx).min(0));
        let sy = -(ny.min(dy).min(0));
        Frac { num: num.shift((sx, sy)), den: den.shift((sx, sy)) }
    }

    pub fn laurent(p: CommLaurent) -> Frac {
        Frac::new(p, CommLaurent::one())
    }

    pub fn mul(&self, o: &Frac) -> Frac {
        Frac::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> Frac {
        Frac::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Frac) -> Frac {
        self.mul(&o.inv())
    }

    pub fn add(&self, o: &Frac) -> Frac {
        Frac::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn powi(&self, e: i64) -> Frac {
        let base = if e < 0 { self.inv() } else { self.clone() };
        (0..e.unsigned_abs()).fold(Frac::laurent(CommLaurent::one()), |acc, _| acc.mul(&base))
    }

    /// `p(self)` for a univariate polynomial `p`.
    pub fn eval_poly(coeffs: &[Coeff], at: &Frac) -> Frac {
        coeffs.iter().rev().fold(Frac::laurent(CommLaurent::zero()), |acc, c| {
            acc.mul(at).add(&Frac::laurent(CommLaurent::monomial((0, 0), c.clone())))
        })
    }
}

pub fn frac_eq(a: &Frac, b: &Frac) -> bool {
    a.num.mul(&b.den) == b.num.mul(&a.den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(terms: &[((i64, i64), i64)]) -> CommLaurent {
        CommLaurent::from_terms(terms.iter().map(|(e, c)| (*e, Coeff::Int(*c))))
    }

    #[test]
    fn arithmetic_examples() {
        let x = CommLaurent::x();
        let y = CommLaurent::y();
        assert_eq!(x.add(&y).mul(&x.sub(&y)), q(&[((2, 0), 1), ((0, 2), -1)]));
        assert_eq!(x.mul(&q(&[((-1, 0), 1)])), CommLaurent::one());
        let h = q(&[((0, 0), 1), ((2, 0), 1)]);
        assert_eq!(h.mul(&q(&[((0, -1), 1)])), q(&[((0, -1), 1), ((2, -1), 1)]));
    }

    #[test]
    fn exact_division_examples() {
        // y^2 + (1 + x^2)^2 over x y^2
        let p = q(&[((0, 2), 1), ((0, 0), 1), ((2, 0), 2), ((4, 0), 1)]);
        let d = q(&[((1, 2), 1)]);
        let want = q(&[((-1, 0), 1), ((-1, -2), 1), ((1, -2), 2), ((3, -2), 1)]);
        assert_eq!(exact_div(&p, &d).unwrap(), want);
        let p = q(&[((2, 0), 1), ((0, 2), -1)]);
        let d = q(&[((1, 0), 1), ((0, 1), -1)]);
        assert_eq!(exact_div(&p, &d).unwrap(), q(&[((1, 0), 1), ((0, 1), 1)]));
        let p = q(&[((0, 0), 1), ((2, 0), 1)]);
        assert!(matches!(
            exact_div(&p, &CommLaurent::y().add(&CommLaurent::one())),
            Err(CommError::NotDivisible { .. })
        ));
        assert_eq!(exact_div(&p, &CommLaurent::zero()), Err(CommError::DivisionByZero));
        // dividing by a monomial is always possible in the Laurent ring
        assert_eq!(exact_div(&p, &CommLaurent::y()).unwrap(), q(&[((0, -1), 1), ((2, -1), 1)]));
    }

    #[test]
    fn iterate_examples() {
        let h = HSpec::one_plus_power(2);
        let (l1, l2) = comm_iterate(&h, 1).unwrap();
        assert_eq!(l1, q(&[((0, -1), 1), ((2, -1), 1)]));
        assert_eq!(l2, CommLaurent::x());
        assert_eq!(comm_iterate(&h, 0).unwrap(), (CommLaurent::x(), CommLaurent::y()));
        let (l1, l2) = comm_iterate(&h, 2).unwrap();
        assert_eq!(l1, q(&[((-1, 0), 1), ((-1, -2), 1), ((1, -2), 2), ((3, -2), 1)]));
        assert_eq!(l2, q(&[((0, -1), 1), ((2, -1), 1)]));
    }

    #[test]
    fn round_trip_all_directions() {
        for h in [HSpec::one_plus_power(2), HSpec::parse("1,1,1", false).unwrap(), HSpec::one_plus_power(3)] {
            for k in -3i64..=3 {
                let fk = comm_iterate(&h, k).unwrap();
                let back = comm_steps(&h, fk, -k, usize::MAX).unwrap();
                assert_eq!(back, (CommLaurent::x(), CommLaurent::y()), "H = {h}, k = {k}");
            }
        }
    }

    #[test]
    fn frac_examples() {
        let h = HSpec::one_plus_power(2);
        let x = Frac::laurent(CommLaurent::x());
        let y = Frac::laurent(CommLaurent::y());
        let hx = Frac::eval_poly(&h.coeffs, &x);
        let hxinv = Frac::eval_poly(&h.coeffs, &x.inv());
        let lhs = x.powi(2).mul(&y).div(&hx);
        assert!(frac_eq(&lhs, &y.div(&hxinv)));
        assert!(frac_eq(&x.div(&y), &x.div(&y)));
        assert!(!frac_eq(&x.div(&y), &y.div(&x)));
        assert!(frac_eq(&hx.div(&y.mul(&hx)), &y.inv()));
        assert!(lhs.num.is_polynomial() && lhs.den.is_polynomial());
    }

    fn arb_laurent() -> impl Strategy<Value = CommLaurent> {
        prop::collection::vec(((-3i64..4, -3i64..4), -3i64..4), 1..5)
            .prop_map(|ts| CommLaurent::from_terms(ts.into_iter().map(|(e, c)| (e, Coeff::Int(c)))))
    }

    proptest! {
        #[test]
        fn division_inverts_multiplication(a in arb_laurent(), b in arb_laurent()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!(exact_div(&a.mul(&b), &b).unwrap(), a);
        }
    }
}
