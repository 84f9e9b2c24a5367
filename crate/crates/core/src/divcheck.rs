//! Left division `W · Q = P` in the Laurent algebra by bounded-support linear algebra.
//!
//! The unknown `Q` is supported on a candidate set of reduced words, starting
//! from `{u^-1 p}`. Every word of every product `u · s` gives one linear
//! equation. Unknowns fixed by a single equation are propagated first; what
//! remains is solved by fraction-free elimination over the integers. A solution
//! is always re-verified by multiplication.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::Coeff;
use crate::freealg::{reduce_group_word, FreeAlgebra, NCElem, Side, Word};
use crate::kontsevich::{Kontsevich, KontsevichError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivError {
    #[error("division by zero element")]
    ZeroDivisor,
    #[error("division inputs must be Laurent")]
    NotLaurent,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisionLimits {
    /// Support-expansion rounds after the initial candidate set.
    pub rounds: u32,
    pub max_unknowns: usize,
    /// Largest system handed to dense elimination after propagation.
    pub max_dense: usize,
}

impl Default for DivisionLimits {
    fn default() -> Self {
        DivisionLimits { rounds: 2, max_unknowns: 400_000, max_dense: 300 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisionOutcome {
    Solved(NCElem),
    /// The search stopped on a budget; this is not a disproof.
    Inconclusive(String),
    /// The system is inconsistent on a support closed under expansion.
    NoSolutionWithinSupport,
}

impl DivisionOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            DivisionOutcome::Solved(_) => "Solved",
            DivisionOutcome::Inconclusive(_) => "Inconclusive",
            DivisionOutcome::NoSolutionWithinSupport => "NoSolutionWithinSupport",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DivisionReport {
    pub outcome: DivisionOutcome,
    pub rounds_used: u32,
    pub unknowns: usize,
    pub equations: usize,
}

fn group_mul(a: &Word, b: &Word) -> Word {
    let pairs: Vec<(Side, i64)> =
        a.atoms().iter().chain(b.atoms()).map(|t| (t.side(), t.exponent().expect("Laurent word"))).collect();
    reduce_group_word(&pairs)
}

fn sorted(e: &NCElem) -> Vec<(Word, Coeff)> {
    let mut v: Vec<(Word, Coeff)> = e.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
    v.sort_by(|a, b| a.0.grlex_cmp(&b.0));
    v
}

pub fn verify_division(w: &NCElem, q: &NCElem, p: &NCElem) -> bool {
    FreeAlgebra::laurent().mul(w, q) == *p
}

struct System {
    unknowns: Vec<Word>,
    index: FxHashMap<Word, usize>,
    eq_index: FxHashMap<Word, usize>,
    eq_words: Vec<Word>,
    rows: Vec<Vec<(usize, Coeff)>>,
}

impl System {
    fn new() -> Self {
        System {
            unknowns: Vec::new(),
            index: FxHashMap::default(),
            eq_index: FxHashMap::default(),
            eq_words: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn eq_for(&mut self, g: Word) -> usize {
        if let Some(&i) = self.eq_index.get(&g) {
            return i;
        }
        let i = self.rows.len();
        self.eq_index.insert(g.clone(), i);
        self.eq_words.push(g);
        self.rows.push(Vec::new());
        i
    }

    fn add_unknown(&mut self, s: Word, w: &[(Word, Coeff)]) -> bool {
        if self.index.contains_key(&s) {
            return false;
        }
        let idx = self.unknowns.len();
        self.index.insert(s.clone(), idx);
        for (u, c) in w {
            let e = self.eq_for(group_mul(u, &s));
            self.rows[e].push((idx, c.clone()));
        }
        self.unknowns.push(s);
        true
    }

    fn rhs(&self, p: &NCElem) -> Vec<Coeff> {
        self.eq_words.iter().map(|g| p.coeff(g)).collect()
    }
}

enum Solve {
    Solution(Vec<Coeff>),
    Inconsistent,
    TooLarge(usize),
}

fn solve(sys: &System, rhs: Vec<Coeff>, max_dense: usize) -> Solve {
    let n = sys.unknowns.len();
    let mut value: Vec<Option<Coeff>> = vec![None; n];
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, row) in sys.rows.iter().enumerate() {
        for &(u, _) in row {
            incidence[u].push(e);
        }
    }
    let mut residual = rhs;
    let mut open: Vec<usize> = sys.rows.iter().map(|r| r.len()).collect();
    let mut queue: VecDeque<usize> = (0..sys.rows.len()).filter(|&e| open[e] == 1).collect();
    for e in 0..sys.rows.len() {
        if open[e] == 0 && !residual[e].is_zero() {
            return Solve::Inconsistent;
        }
    }
    let assign = |u: usize,
                  v: Coeff,
                  value: &mut Vec<Option<Coeff>>,
                  residual: &mut Vec<Coeff>,
                  open: &mut Vec<usize>,
                  queue: &mut VecDeque<usize>|
     -> bool {
        for &e in &incidence[u] {
            let c = sys.rows[e].iter().find(|(x, _)| *x == u).unwrap().1.clone();
            residual[e] = &residual[e] - &(&c * &v);
            open[e] -= 1;
            match open[e] {
                1 => queue.push_back(e),
                0 if !residual[e].is_zero() => return false,
                _ => {}
            }
        }
        value[u] = Some(v);
        true
    };
    let propagate = |value: &mut Vec<Option<Coeff>>,
                     residual: &mut Vec<Coeff>,
                     open: &mut Vec<usize>,
                     queue: &mut VecDeque<usize>|
     -> bool {
        while let Some(e) = queue.pop_front() {
            if open[e] != 1 {
                continue;
            }
            let (u, c) = sys.rows[e].iter().find(|(x, _)| value[*x].is_none()).unwrap().clone();
            let v = residual[e].checked_div(&c).expect("nonzero row coefficient");
            if !assign(u, v, value, residual, open, queue) {
                return false;
            }
        }
        true
    };
    if !propagate(&mut value, &mut residual, &mut open, &mut queue) {
        return Solve::Inconsistent;
    }
    let free: Vec<usize> = (0..n).filter(|&u| value[u].is_none()).collect();
    if !free.is_empty() {
        if free.len() > max_dense {
            return Solve::TooLarge(free.len());
        }
        let col: FxHashMap<usize, usize> = free.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let rows: Vec<(Vec<(usize, Coeff)>, Coeff)> = (0..sys.rows.len())
            .filter(|&e| open[e] > 0)
            .map(|e| {
                let r = sys.rows[e].iter().filter_map(|(u, c)| col.get(u).map(|&j| (j, c.clone()))).collect();
                (r, residual[e].clone())
            })
            .collect();
        let Some(sol) = bareiss_solve(&rows, free.len()) else {
            return Solve::Inconsistent;
        };
        for (i, v) in sol.into_iter().enumerate() {
            value[free[i]] = Some(v);
        }
    }
    Solve::Solution(value.into_iter().map(|v| v.unwrap()).collect())
}

/// Solve a sparse rational system with a unique solution by fraction-free
/// elimination; `None` if inconsistent or underdetermined.
pub fn bareiss_solve(rows: &[(Vec<(usize, Coeff)>, Coeff)], n: usize) -> Option<Vec<Coeff>> {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|(r, b)| {
            let mut l = b.denom();
            for (_, c) in r {
                l = l.lcm(&c.denom());
            }
            let mut dense = vec![BigInt::zero(); n + 1];
            for (j, c) in r {
                dense[*j] = c.numer() * (&l / c.denom());
            }
            dense[n] = b.numer() * (&l / b.denom());
            dense
        })
        .collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..n {
        let p = (rank..m.len()).find(|&r| !m[r][c].is_zero())?;
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for j in c + 1..=n {
                let v = (&m[rank][c] * &m[r][j] - &m[r][c] * &m[rank][j]) / &prev;
                m[r][j] = v;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    if m[rank..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for c in (0..n).rev() {
        let mut acc = BigRational::from_integer(m[c][n].clone());
        for j in c + 1..n {
            acc -= BigRational::from_integer(m[c][j].clone()) * &x[j];
        }
        x[c] = acc / BigRational::from_integer(m[c][c].clone());
    }
    Some(x.into_iter().map(Coeff::from_big).collect())
}

/// Solve `W · Q = P` for a Laurent `Q`.
pub fn left_divide(w: &NCElem, p: &NCElem, limits: &DivisionLimits) -> Result<DivisionReport, DivError> {
    if w.is_zero() {
        return Err(DivError::ZeroDivisor);
    }
    if !w.is_laurent() || !p.is_laurent() {
        return Err(DivError::NotLaurent);
    }
    let wt = sorted(w);
    let pt = sorted(p);
    let mut sys = System::new();
    let mut frontier: Vec<Word> = Vec::new();
    for (u, _) in &wt {
        let ui = u.inverse();
        for (g, _) in &pt {
            frontier.push(group_mul(&ui, g));
        }
    }
    let mut rounds_used = 0;
    loop {
        for s in frontier.drain(..) {
            sys.add_unknown(s, &wt);
            if sys.unknowns.len() > limits.max_unknowns {
                return Ok(DivisionReport {
                    outcome: DivisionOutcome::Inconclusive(format!(
                        "more than {} candidate words",
                        limits.max_unknowns
                    )),
                    rounds_used,
                    unknowns: sys.unknowns.len(),
                    equations: sys.rows.len(),
                });
            }
        }
        let used = rounds_used;
        let report = move |outcome, sys: &System| DivisionReport {
            outcome,
            rounds_used: used,
            unknowns: sys.unknowns.len(),
            equations: sys.rows.len(),
        };
        match solve(&sys, sys.rhs(p), limits.max_dense) {
            Solve::Solution(vals) => {
                let q = NCElem::from_terms(sys.unknowns.iter().cloned().zip(vals).filter(|(_, c)| !c.is_zero()));
                let outcome = if verify_division(w, &q, p) {
                    DivisionOutcome::Solved(q)
                } else {
                    DivisionOutcome::Inconclusive("solution failed re-verification".into())
                };
                return Ok(report(outcome, &sys));
            }
            Solve::TooLarge(k) => {
                return Ok(report(
                    DivisionOutcome::Inconclusive(format!("{k} coupled unknowns after propagation")),
                    &sys,
                ));
            }
            Solve::Inconsistent => {
                if rounds_used == limits.rounds {
                    return Ok(report(
                        DivisionOutcome::Inconclusive(format!("inconsistent after {rounds_used} expansion rounds")),
                        &sys,
                    ));
                }
                rounds_used += 1;
                for g in &sys.eq_words {
                    for (u, _) in &wt {
                        let s = group_mul(&u.inverse(), g);
                        if !sys.index.contains_key(&s) {
                            frontier.push(s);
                        }
                    }
                }
                frontier.sort_by(|a, b| a.grlex_cmp(b));
                frontier.dedup();
                if frontier.is_empty() {
                    return Ok(report(DivisionOutcome::NoSolutionWithinSupport, &sys));
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    /// The iterate being recovered.
    pub k: i64,
    pub target: &'static str,
    pub outcome: &'static str,
    /// Whether the solved quotient equals the engine's iterate.
    pub matches_iterate: Option<bool>,
    pub unknowns: usize,
    pub equations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Recover each iterate from its neighbours by division.
///
/// Forward, `σ^(k+1)(x)` is the quotient `σ^k(y) \ H(σ^k(x))`. Backward,
/// `σ^k(y)` is the quotient `σ^(k+1)(x) \ H(σ^(k+1)(y))`. `steps` lists the
/// iterates to recover (nonzero indices).
pub fn check_steps(
    engine: &Kontsevich,
    steps: impl IntoIterator<Item = i64>,
    limits: &DivisionLimits,
) -> Result<Vec<StepReport>, KontsevichError> {
    let alg = FreeAlgebra::laurent();
    let h = &engine.h().coeffs;
    let mut out = Vec::new();
    for k in steps {
        let (w, p, expected, target) = if k > 0 {
            let (z, w) = engine.pair(k - 1)?;
            (w, alg.eval_poly(h, &z), engine.pair(k)?.0, "x")
        } else {
            let (z1, w1) = engine.pair(k + 1)?;
            (z1, alg.eval_poly(h, &w1), engine.pair(k)?.1, "y")
        };
        let rep = left_divide(&w, &p, limits).expect("iterates are nonzero Laurent elements");
        let (matches_iterate, reason) = match &rep.outcome {
            DivisionOutcome::Solved(q) => (Some(*q == *expected), None),
            DivisionOutcome::Inconclusive(r) => (None, Some(r.clone())),
            DivisionOutcome::NoSolutionWithinSupport => (None, None),
        };
        out.push(StepReport {
            k,
            target,
            outcome: rep.outcome.label(),
            matches_iterate,
            unknowns: rep.unknowns,
            equations: rep.equations,
            reason,
        });
    }
    Ok(out)
}
