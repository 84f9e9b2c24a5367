//! The automorphism `σ: (x, y) -> (y^-1 H(x), y^-1 x y)`, its inverse
//! `τ: (x, y) -> (x^-1 y x, x^-1 H(y))`, and their iterates.
//!
//! Forward iterates live in the algebra whose x-side is localized at `H(x)`
//! (needed for `σ(x^-1) = H(x)^-1 y`); backward iterates use the y-side
//! localization for `τ(y^-1) = H(y)^-1 x`. Every iterate is computed by
//! substituting the images into the previous iterate, which must be Laurent.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::blockring::{BlockError, BlockRing, HSpec};
use crate::coeff::Coeff;
use crate::freealg::{
    embed_word, terms_to_docs, ElemStats, EndoSpec, FreeAlgError, FreeAlgebra, NCElem, Side, TermsView,
};

pub type Target = Side;

#[derive(Debug, Error)]
pub enum KontsevichError {
    #[error("invalid H: {0}")]
    InvalidH(#[from] BlockError),
    #[error("iterate k = {k} of {target:?} is not Laurent; offending words: {witness:?}")]
    NotLaurent { k: i64, target: Target, witness: Vec<String>, bundle: String },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Engine(#[from] FreeAlgError),
}

#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    pub max_abs_k: u32,
    pub max_terms: usize,
    pub max_wall: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_abs_k: 8, max_terms: 10_000_000, max_wall: None }
    }
}

#[derive(Clone, Debug)]
pub struct IterateResult {
    pub k: i64,
    pub target: Target,
    pub value: Arc<NCElem>,
    pub laurent: bool,
    pub witness: Vec<String>,
    pub stats: ElemStats,
    /// Time spent computing this iterate (zero when it was cached).
    pub elapsed: Duration,
}

/// Serialisable view of an iterate. Fields are declared in key order so that
/// streaming output matches the sorted `serde_json::Value` rendering.
#[derive(Serialize)]
pub struct IterateDoc<'a> {
    #[serde(rename = "H")]
    h: &'a [Coeff],
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
    k: i64,
    laurent: bool,
    stats: serde_json::Value,
    target: &'static str,
    terms: TermsView<'a>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    warnings: &'a [String],
    witness: &'a [String],
}

impl IterateResult {
    /// Document for this iterate; timings are included only on request so that
    /// identical runs serialise identically.
    pub fn doc<'a>(&'a self, h: &'a HSpec, with_timings: bool) -> IterateDoc<'a> {
        IterateDoc {
            h: &h.coeffs,
            elapsed_ms: with_timings.then_some(self.elapsed.as_millis()),
            k: self.k,
            laurent: self.laurent,
            stats: serde_json::to_value(&self.stats).expect("stats serialise"),
            target: self.target.letter(),
            terms: TermsView(&self.value),
            warnings: &h.warnings,
            witness: &self.witness,
        }
    }

    pub fn to_json(&self, h: &HSpec, with_timings: bool) -> serde_json::Value {
        serde_json::to_value(self.doc(h, with_timings)).expect("iterate document serialises")
    }
}

pub fn sigma_spec(h: &HSpec) -> Result<(FreeAlgebra, EndoSpec), FreeAlgError> {
    let alg = FreeAlgebra::new(BlockRing::localized(h.clone()), BlockRing::laurent());
    let y_inv = NCElem::gen(Side::Y, -1);
    let x_img = alg.mul(&y_inv, &alg.h_poly(Side::X).unwrap());
    let x_inv_img = alg.mul(&alg.h_inverse(Side::X).unwrap(), &NCElem::y());
    let y_img = embed_word(&[(Side::Y, -1), (Side::X, 1), (Side::Y, 1)]);
    let y_inv_img = embed_word(&[(Side::Y, -1), (Side::X, -1), (Side::Y, 1)]);
    let e = EndoSpec::new(&alg, x_img, x_inv_img, y_img, y_inv_img)?;
    Ok((alg, e))
}

pub fn tau_spec(h: &HSpec) -> Result<(FreeAlgebra, EndoSpec), FreeAlgError> {
    let alg = FreeAlgebra::new(BlockRing::laurent(), BlockRing::localized(h.clone()));
    let x_inv = NCElem::gen(Side::X, -1);
    let x_img = embed_word(&[(Side::X, -1), (Side::Y, 1), (Side::X, 1)]);
    let x_inv_img = embed_word(&[(Side::X, -1), (Side::Y, -1), (Side::X, 1)]);
    let y_img = alg.mul(&x_inv, &alg.h_poly(Side::Y).unwrap());
    let y_inv_img = alg.mul(&alg.h_inverse(Side::Y).unwrap(), &NCElem::x());
    let e = EndoSpec::new(&alg, x_img, x_inv_img, y_img, y_inv_img)?;
    Ok((alg, e))
}

/// `q = x^-1 y^-1 x y`
pub fn commutator() -> NCElem {
    embed_word(&[(Side::X, -1), (Side::Y, -1), (Side::X, 1), (Side::Y, 1)])
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct InverseReport {
    pub sigma_tau_x: bool,
    pub sigma_tau_y: bool,
    pub tau_sigma_x: bool,
    pub tau_sigma_y: bool,
}

impl InverseReport {
    pub fn all(&self) -> bool {
        self.sigma_tau_x && self.sigma_tau_y && self.tau_sigma_x && self.tau_sigma_y
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityEntry {
    pub k: i64,
    pub target: &'static str,
    pub term_count: usize,
    pub all_positive: bool,
    pub all_integer: bool,
    pub coeff_min: Option<Coeff>,
    pub coeff_max: Option<Coeff>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    /// Positivity is a known theorem only for `H = 1 + x^2`; otherwise the report
    /// is informational.
    pub assertion_grade: bool,
    pub entries: Vec<PositivityEntry>,
}

impl PositivityReport {
    pub fn all_positive_integers(&self) -> bool {
        self.entries.iter().all(|e| e.all_positive && e.all_integer)
    }
}

type Pair = (Arc<NCElem>, Arc<NCElem>);

/// Iteration engine for one `H`, caching `(σ^k(x), σ^k(y))` for every computed `k`.
pub struct Kontsevich {
    h: HSpec,
    fwd: FreeAlgebra,
    sigma: EndoSpec,
    bwd: FreeAlgebra,
    tau: EndoSpec,
    budget: Budget,
    orbit: Mutex<BTreeMap<i64, Pair>>,
}

impl Kontsevich {
    pub fn new(h: HSpec, budget: Budget) -> Result<Self, KontsevichError> {
        let (fwd, sigma) = sigma_spec(&h)?;
        let (bwd, tau) = tau_spec(&h)?;
        let mut orbit = BTreeMap::new();
        orbit.insert(0, (Arc::new(NCElem::x()), Arc::new(NCElem::y())));
        Ok(Kontsevich { h, fwd, sigma, bwd, tau, budget, orbit: Mutex::new(orbit) })
    }

    pub fn h(&self) -> &HSpec {
        &self.h
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn sigma(&self) -> (&FreeAlgebra, &EndoSpec) {
        (&self.fwd, &self.sigma)
    }

    pub fn tau(&self) -> (&FreeAlgebra, &EndoSpec) {
        (&self.bwd, &self.tau)
    }

    /// The algebra in which iterates of sign `k` are computed.
    pub fn algebra_for(&self, k: i64) -> &FreeAlgebra {
        if k >= 0 {
            &self.fwd
        } else {
            &self.bwd
        }
    }

    /// `(σ^k(x), σ^k(y))`, computing and caching intermediate iterates.
    pub fn pair(&self, k: i64) -> Result<Pair, KontsevichError> {
        self.pair_timed(k).map(|(p, _)| p)
    }

    fn pair_timed(&self, k: i64) -> Result<(Pair, Duration), KontsevichError> {
        if k.unsigned_abs() > self.budget.max_abs_k as u64 {
            return Err(KontsevichError::BudgetExceeded(format!(
                "|k| = {} exceeds max_abs_k = {}",
                k.unsigned_abs(),
                self.budget.max_abs_k
            )));
        }
        let start = Instant::now();
        let step = k.signum();
        let (mut at, mut cur) = {
            let orbit = self.orbit.lock().expect("orbit poisoned");
            if let Some(p) = orbit.get(&k) {
                return Ok((p.clone(), Duration::ZERO));
            }
            let mut j = k;
            while !orbit.contains_key(&j) {
                j -= step;
            }
            (j, orbit[&j].clone())
        };
        let (alg, endo) = if step > 0 { (&self.fwd, &self.sigma) } else { (&self.bwd, &self.tau) };
        while at != k {
            let next_k = at + step;
            let mut next = Vec::with_capacity(2);
            for (target, prev) in [(Side::X, &cur.0), (Side::Y, &cur.1)] {
                let v = alg.substitute_limited(prev, endo, self.budget.max_terms).map_err(|e| match e {
                    FreeAlgError::TermLimit { limit, reached } => KontsevichError::BudgetExceeded(format!(
                        "k = {next_k}, target {}: {reached} terms exceeds max_terms = {limit}",
                        target.letter()
                    )),
                    other => other.into(),
                })?;
                if !v.is_laurent() {
                    return Err(self.not_laurent(next_k, target, prev, &v));
                }
                next.push(Arc::new(v));
                if let Some(limit) = self.budget.max_wall {
                    if start.elapsed() > limit {
                        return Err(KontsevichError::BudgetExceeded(format!(
                            "wall-clock limit {limit:?} reached at k = {next_k}"
                        )));
                    }
                }
            }
            let w = next.pop().unwrap();
            let z = next.pop().unwrap();
            cur = (z, w);
            at = next_k;
            self.orbit.lock().expect("orbit poisoned").insert(at, cur.clone());
        }
        Ok((cur, start.elapsed()))
    }

    fn not_laurent(&self, k: i64, target: Target, input: &NCElem, value: &NCElem) -> KontsevichError {
        let witness: Vec<String> = value.non_laurent_words().iter().take(20).map(|w| format!("{w:?}")).collect();
        let bundle = serde_json::json!({
            "H": self.h.coeffs,
            "k": k,
            "target": target.letter(),
            "input_k": k - k.signum(),
            "input": terms_to_docs(input),
            "witness": witness,
        });
        KontsevichError::NotLaurent { k, target, witness, bundle: bundle.to_string() }
    }

    pub fn iterate(&self, k: i64, target: Target) -> Result<IterateResult, KontsevichError> {
        let ((z, w), elapsed) = self.pair_timed(k)?;
        let value = if target == Side::X { z } else { w };
        let laurent = value.is_laurent();
        let witness =
            if laurent { Vec::new() } else { value.non_laurent_words().iter().map(|w| format!("{w:?}")).collect() };
        Ok(IterateResult { k, target, laurent, witness, stats: value.stats(), value, elapsed })
    }

    /// `σ(q) = q` and `τ(q) = q` for the multiplicative commutator.
    pub fn check_commutator(&self) -> Result<bool, KontsevichError> {
        let q = commutator();
        let sq = self.fwd.substitute(&q, &self.sigma)?;
        let tq = self.bwd.substitute(&q, &self.tau)?;
        Ok(sq == q && tq == q)
    }

    pub fn check_inverse(&self) -> Result<InverseReport, KontsevichError> {
        let (x, y) = (NCElem::x(), NCElem::y());
        let st = |g: &NCElem| -> Result<NCElem, FreeAlgError> {
            let t = self.bwd.substitute(g, &self.tau)?;
            self.fwd.substitute(&t, &self.sigma)
        };
        let ts = |g: &NCElem| -> Result<NCElem, FreeAlgError> {
            let s = self.fwd.substitute(g, &self.sigma)?;
            self.bwd.substitute(&s, &self.tau)
        };
        Ok(InverseReport {
            sigma_tau_x: st(&x)? == x,
            sigma_tau_y: st(&y)? == y,
            tau_sigma_x: ts(&x)? == x,
            tau_sigma_y: ts(&y)? == y,
        })
    }

    /// Multiplication-only check of one step of the orbit.
    ///
    /// For `k >= 0`: `σ^k(y) · σ^(k+1)(x) = H(σ^k(x))`.
    /// For `k < 0`: `τ^m(x) · τ^(m+1)(y) = H(τ^m(y))` with `m = -k - 1`, i.e. the
    /// step from `k + 1` down to `k`.
    pub fn recurrence_check(&self, k: i64) -> Result<bool, KontsevichError> {
        let alg = FreeAlgebra::laurent();
        if k >= 0 {
            let (z, w) = self.pair(k)?;
            let (z1, _) = self.pair(k + 1)?;
            Ok(alg.mul(&w, &z1) == alg.eval_poly(&self.h.coeffs, &z))
        } else {
            let (z, w) = self.pair(k + 1)?;
            let (_, w1) = self.pair(k)?;
            Ok(alg.mul(&z, &w1) == alg.eval_poly(&self.h.coeffs, &w))
        }
    }

    pub fn positivity_report(&self, ks: impl IntoIterator<Item = i64>) -> Result<PositivityReport, KontsevichError> {
        let mut entries = Vec::new();
        for k in ks {
            for target in [Side::X, Side::Y] {
                let r = self.iterate(k, target)?;
                entries.push(PositivityEntry {
                    k,
                    target: target.letter(),
                    term_count: r.stats.term_count,
                    all_positive: r.stats.all_positive,
                    all_integer: r.stats.all_integer,
                    coeff_min: r.stats.coeff_min.clone(),
                    coeff_max: r.stats.coeff_max.clone(),
                });
            }
        }
        Ok(PositivityReport { assertion_grade: self.h == HSpec::one_plus_power(2), entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutative::{comm_iterate, compare_abelian};
    use crate::freealg::parse_element;

    fn engine(h: &str) -> Kontsevich {
        Kontsevich::new(HSpec::parse(h, false).unwrap(), Budget::default()).unwrap()
    }

    fn laurent(s: &str) -> NCElem {
        parse_element(&FreeAlgebra::laurent(), s).unwrap()
    }

    // σ²(x) for H = 1 + x², expanded by hand:
    // σ(y^-1) H(σ(x)) = (y^-1 x^-1 y)(1 + (y^-1 + y^-1 x^2)^2)
    //   (y^-1 + y^-1 x^2)^2 = y^-2 + y^-2 x^2 + y^-1 x^2 y^-1 + y^-1 x^2 y^-1 x^2
    // and left multiplication by y^-1 x^-1 y cancels y against y^-1 in the last three words.
    const SIGMA2_X: &str = "y^-1*x^-1*y + y^-1*x^-1*y^-1 + y^-1*x^-1*y^-1*x^2 + y^-1*x*y^-1 + y^-1*x*y^-1*x^2";

    #[test]
    fn sigma_images() {
        let h = HSpec::one_plus_power(2);
        let (alg, s) = sigma_spec(&h).unwrap();
        assert_eq!(s.x, laurent("y^-1 + y^-1*x^2"));
        assert_eq!(alg.mul(&s.y, &s.y_inv), NCElem::one());
        assert_eq!(alg.mul(&s.x, &s.x_inv), NCElem::one());
        assert!(!s.x_inv.is_laurent());
    }

    #[test]
    fn tau_examples() {
        let k = engine("1,0,1");
        let r = k.iterate(-1, Side::X).unwrap();
        assert_eq!(*r.value, laurent("x^-1*y*x"));
        assert!(k.check_inverse().unwrap().all());
    }

    #[test]
    fn iterate_examples() {
        let k = engine("1,0,1");
        assert_eq!(*k.iterate(1, Side::X).unwrap().value, laurent("y^-1 + y^-1*x^2"));
        assert_eq!(*k.iterate(0, Side::Y).unwrap().value, NCElem::y());
        let r = k.iterate(2, Side::X).unwrap();
        assert_eq!(*r.value, laurent(SIGMA2_X));
        assert!(r.laurent);
        assert_eq!(r.stats.term_count, 5);
        assert!(r.stats.all_positive);
    }

    #[test]
    fn stats_examples() {
        let k = engine("1,0,1");
        assert_eq!(k.iterate(1, Side::X).unwrap().stats.term_count, 2);
        let one = NCElem::one().stats();
        assert_eq!((one.term_count, one.max_word_length), (1, 0));
    }

    #[test]
    fn commutator_is_fixed() {
        for h in ["1,0,1", "1,1,1", "1,0,0,1"] {
            assert!(engine(h).check_commutator().unwrap(), "H = {h}");
        }
    }

    #[test]
    fn recurrence_examples() {
        let k = engine("1,0,1");
        for j in -3..=3 {
            assert!(k.recurrence_check(j).unwrap(), "k = {j}");
        }
        // k = 0 by hand: y (y^-1 + y^-1 x^2) = 1 + x^2
        let alg = FreeAlgebra::laurent();
        assert_eq!(alg.mul(&NCElem::y(), &laurent("y^-1 + y^-1*x^2")), laurent("1 + x^2"));
    }

    #[test]
    fn abelian_agreement_small() {
        for h in ["1,0,1", "1,1,1", "1,0,0,1"] {
            let k = engine(h);
            for j in -3..=3 {
                let (l1, l2) = comm_iterate(k.h(), j).unwrap();
                assert!(compare_abelian(&k.iterate(j, Side::X).unwrap().value, &l1).unwrap());
                assert!(compare_abelian(&k.iterate(j, Side::Y).unwrap().value, &l2).unwrap());
            }
        }
    }

    #[test]
    fn positivity_small() {
        let k = engine("1,0,1");
        let rep = k.positivity_report(0..=3).unwrap();
        assert!(rep.assertion_grade);
        assert!(rep.all_positive_integers());
        assert!(!engine("1,1,1").positivity_report([1]).unwrap().assertion_grade);
    }

    #[test]
    fn budget_is_enforced() {
        let k = Kontsevich::new(HSpec::one_plus_power(2), Budget { max_abs_k: 2, ..Budget::default() }).unwrap();
        assert!(matches!(k.iterate(3, Side::X), Err(KontsevichError::BudgetExceeded(_))));
        let k = Kontsevich::new(HSpec::one_plus_power(2), Budget { max_terms: 3, ..Budget::default() }).unwrap();
        assert!(matches!(k.iterate(3, Side::X), Err(KontsevichError::BudgetExceeded(_))));
    }

    #[test]
    fn iterate_json_omits_timings_by_default() {
        let k = engine("1,0,1");
        let r = k.iterate(2, Side::X).unwrap();
        let v = r.to_json(k.h(), false);
        assert!(v.get("elapsed_ms").is_none());
        assert_eq!(v["terms"].as_array().unwrap().len(), 5);
        assert!(r.to_json(k.h(), true).get("elapsed_ms").is_some());
    }

    #[test]
    fn streamed_doc_matches_value_rendering() {
        let k = engine("1,2,1");
        let r = k.iterate(3, Side::Y).unwrap();
        let streamed = serde_json::to_string_pretty(&r.doc(k.h(), false)).unwrap();
        assert_eq!(streamed, serde_json::to_string_pretty(&r.to_json(k.h(), false)).unwrap());
        assert!(streamed.contains("\"warnings\""));
    }
}
