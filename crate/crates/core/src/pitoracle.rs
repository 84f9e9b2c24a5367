//! Randomized evaluation check over `F_p`.
//!
//! Iterates are evaluated at random invertible matrix pairs and compared with
//! the orbit of the pair under the matrix map `(X, Y) -> (Y^-1 H(X), Y^-1 X Y)`
//! (or its inverse for `k < 0`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{coeff_mod, mod_inverse, Coeff};
use crate::freealg::{NCElem, Side};
use crate::kontsevich::{Kontsevich, KontsevichError, Target};

pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;
pub const MAX_RESAMPLES: u32 = 100;

#[derive(Debug, Error)]
pub enum PitError {
    #[error("{0} is not a prime below 2^32")]
    BadPrime(u64),
    #[error("H({0}) is singular at this point")]
    SingularH(&'static str),
    #[error("coefficient {0} has a denominator divisible by p")]
    CoeffDenominatorDivisibleByP(Coeff),
    #[error("element is not Laurent")]
    NotLaurentInput,
    #[error("no nonsingular orbit after {0} resamples")]
    ResampleLimit(u32),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error(transparent)]
    Engine(#[from] KontsevichError),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Square matrix over `F_p`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub d: usize,
    pub p: u64,
    pub a: Vec<u64>,
}

impl Mat {
    pub fn zero(d: usize, p: u64) -> Self {
        Mat { d, p, a: vec![0; d * d] }
    }

    pub fn identity(d: usize, p: u64) -> Self {
        let mut m = Mat::zero(d, p);
        for i in 0..d {
            m.a[i * d + i] = 1;
        }
        m
    }

    pub fn scalar(d: usize, p: u64, c: u64) -> Self {
        let mut m = Mat::zero(d, p);
        for i in 0..d {
            m.a[i * d + i] = c % p;
        }
        m
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat { d: self.d, p: self.p, a: self.a.iter().zip(&o.a).map(|(x, y)| (x + y) % self.p).collect() }
    }

    pub fn scale(&self, c: u64) -> Mat {
        Mat { d: self.d, p: self.p, a: self.a.iter().map(|x| x * c % self.p).collect() }
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let (d, p) = (self.d, self.p);
        let mut out = Mat::zero(d, p);
        for i in 0..d {
            for k in 0..d {
                let v = self.a[i * d + k];
                if v == 0 {
                    continue;
                }
                for j in 0..d {
                    out.a[i * d + j] = (out.a[i * d + j] + v * o.a[k * d + j]) % p;
                }
            }
        }
        out
    }

    pub fn inverse(&self) -> Option<Mat> {
        let (d, p) = (self.d, self.p);
        let mut m = self.a.clone();
        let mut inv = Mat::identity(d, p).a;
        for c in 0..d {
            let r = (c..d).find(|&r| m[r * d + c] != 0)?;
            for j in 0..d {
                m.swap(c * d + j, r * d + j);
                inv.swap(c * d + j, r * d + j);
            }
            let s = mod_inverse(m[c * d + c], p);
            for j in 0..d {
                m[c * d + j] = m[c * d + j] * s % p;
                inv[c * d + j] = inv[c * d + j] * s % p;
            }
            for r in 0..d {
                let f = m[r * d + c];
                if r == c || f == 0 {
                    continue;
                }
                for j in 0..d {
                    m[r * d + j] = (m[r * d + j] + (p - f) * m[c * d + j]) % p;
                    inv[r * d + j] = (inv[r * d + j] + (p - f) * inv[c * d + j]) % p;
                }
            }
        }
        Some(Mat { d, p, a: inv })
    }

    pub fn pow(&self, e: u64) -> Mat {
        let mut out = Mat::identity(self.d, self.p);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        out
    }

    /// `H(self)` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[Coeff]) -> Result<Mat, PitError> {
        let mut acc = Mat::zero(self.d, self.p);
        for c in coeffs.iter().rev() {
            let cm = coeff_mod(c, self.p).ok_or_else(|| PitError::CoeffDenominatorDivisibleByP(c.clone()))?;
            acc = acc.mul(self).add(&Mat::scalar(self.d, self.p, cm));
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPoint {
    pub x: Mat,
    pub y: Mat,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Fwd,
    Bwd,
}

/// Mix a base seed with tags into an independent stream seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn random_point(d: usize, p: u64, seed: u64) -> Result<EvalPoint, PitError> {
    if d == 0 {
        return Err(PitError::ZeroDimension);
    }
    if p >= 1 << 32 || !is_prime(p) {
        return Err(PitError::BadPrime(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| loop {
        let m = Mat { d, p, a: (0..d * d).map(|_| rng.random_range(0..p)).collect() };
        if m.inverse().is_some() {
            return m;
        }
    };
    let x = sample(&mut rng);
    let y = sample(&mut rng);
    Ok(EvalPoint { x, y, seed })
}

pub fn orbit_step(h: &[Coeff], pt: &EvalPoint, dir: Direction) -> Result<EvalPoint, PitError> {
    let (x, y) = (&pt.x, &pt.y);
    let (nx, ny) = match dir {
        Direction::Fwd => {
            let yi = y.inverse().expect("point matrices are invertible");
            let hx = x.eval_poly(h)?;
            hx.inverse().ok_or(PitError::SingularH("X"))?;
            (yi.mul(&hx), yi.mul(x).mul(y))
        }
        Direction::Bwd => {
            let xi = x.inverse().expect("point matrices are invertible");
            let hy = y.eval_poly(h)?;
            hy.inverse().ok_or(PitError::SingularH("Y"))?;
            (xi.mul(y).mul(x), xi.mul(&hy))
        }
    };
    Ok(EvalPoint { x: nx, y: ny, seed: pt.seed })
}

/// The point after `k` steps (forward for `k > 0`, backward for `k < 0`).
pub fn orbit(h: &[Coeff], pt: &EvalPoint, k: i64) -> Result<EvalPoint, PitError> {
    let dir = if k >= 0 { Direction::Fwd } else { Direction::Bwd };
    let mut cur = pt.clone();
    for _ in 0..k.unsigned_abs() {
        cur = orbit_step(h, &cur, dir)?;
    }
    Ok(cur)
}

pub fn eval_nc(a: &NCElem, pt: &EvalPoint) -> Result<Mat, PitError> {
    let (d, p) = (pt.x.d, pt.x.p);
    let inv = [pt.x.inverse().expect("invertible X"), pt.y.inverse().expect("invertible Y")];
    let mut powers: FxHashMap<(Side, i64), Mat> = FxHashMap::default();
    let mut acc = Mat::zero(d, p);
    for (w, c) in a.sorted_terms() {
        let cm = coeff_mod(c, p).ok_or_else(|| PitError::CoeffDenominatorDivisibleByP(c.clone()))?;
        let mut m = Mat::identity(d, p);
        for atom in w.atoms() {
            let e = atom.exponent().ok_or(PitError::NotLaurentInput)?;
            let side = atom.side();
            let f = powers.entry((side, e)).or_insert_with(|| {
                let (base, inverse) = match side {
                    Side::X => (&pt.x, &inv[0]),
                    Side::Y => (&pt.y, &inv[1]),
                };
                if e > 0 {
                    base.pow(e as u64)
                } else {
                    inverse.pow(e.unsigned_abs())
                }
            });
            m = m.mul(f);
        }
        acc = acc.add(&m.scale(cm));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Mismatch {
    pub seed: u64,
    pub dim: usize,
    pub trial: u32,
    pub k: i64,
    pub target: &'static str,
    #[serde(rename = "H")]
    pub h: Vec<Coeff>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TrialReport {
    #[serde(rename = "H")]
    pub h: Vec<Coeff>,
    pub k: i64,
    pub target: &'static str,
    pub prime: u64,
    pub seed: u64,
    pub trials: u32,
    pub dims: Vec<usize>,
    pub checks: u32,
    pub resamples: u32,
    pub mismatches: Vec<Mismatch>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PitConfig {
    pub trials: u32,
    pub dims: Vec<usize>,
    pub prime: u64,
    pub seed: u64,
}

impl Default for PitConfig {
    fn default() -> Self {
        PitConfig { trials: 20, dims: vec![2, 3], prime: DEFAULT_PRIME, seed: 0 }
    }
}

pub fn verify_iterate(engine: &Kontsevich, k: i64, target: Target, cfg: &PitConfig) -> Result<TrialReport, PitError> {
    let h = &engine.h().coeffs;
    let value = engine.iterate(k, target)?.value;
    if !value.is_laurent() {
        return Err(PitError::NotLaurentInput);
    }
    let mut report = TrialReport {
        h: h.clone(),
        k,
        target: target.letter(),
        prime: cfg.prime,
        seed: cfg.seed,
        trials: cfg.trials,
        dims: cfg.dims.clone(),
        checks: 0,
        resamples: 0,
        mismatches: Vec::new(),
    };
    let tag = if target == Side::X { 0 } else { 1 };
    for &d in &cfg.dims {
        for trial in 0..cfg.trials {
            let mut attempt = 0u32;
            let (seed, pt, end) = loop {
                let seed = derive_seed(cfg.seed, &[d as u64, trial as u64, k as u64, tag, attempt as u64]);
                let pt = random_point(d, cfg.prime, seed)?;
                match orbit(h, &pt, k) {
                    Ok(end) => break (seed, pt, end),
                    Err(PitError::SingularH(_)) => {
                        attempt += 1;
                        report.resamples += 1;
                        if attempt >= MAX_RESAMPLES {
                            return Err(PitError::ResampleLimit(attempt));
                        }
                    }
                    Err(e) => return Err(e),
                }
            };
            let expected = if target == Side::X { end.x } else { end.y };
            report.checks += 1;
            if eval_nc(&value, &pt)? != expected {
                report.mismatches.push(Mismatch { seed, dim: d, trial, k, target: target.letter(), h: h.clone() });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockring::HSpec;
    use crate::freealg::{parse_element, reduce_group_word, FreeAlgebra};
    use crate::kontsevich::{sigma_spec, tau_spec, Budget};
    use proptest::prelude::*;

    fn scalar_point(x: u64, y: u64, p: u64) -> EvalPoint {
        EvalPoint { x: Mat::scalar(1, p, x), y: Mat::scalar(1, p, y), seed: 0 }
    }

    fn el(s: &str) -> NCElem {
        parse_element(&FreeAlgebra::laurent(), s).unwrap()
    }

    #[test]
    fn scalar_step_mod_7() {
        let h = HSpec::one_plus_power(2).coeffs;
        let next = orbit_step(&h, &scalar_point(2, 3, 7), Direction::Fwd).unwrap();
        assert_eq!(next, scalar_point(4, 2, 7));
        let back = orbit_step(&h, &next, Direction::Bwd).unwrap();
        assert_eq!(back, scalar_point(2, 3, 7));
    }

    #[test]
    fn singular_h_is_reported() {
        // 1 + 2^2 = 5 = 0 mod 5
        let h = HSpec::one_plus_power(2).coeffs;
        assert!(matches!(orbit_step(&h, &scalar_point(2, 1, 5), Direction::Fwd), Err(PitError::SingularH("X"))));
    }

    #[test]
    fn random_points() {
        let a = random_point(3, DEFAULT_PRIME, 11).unwrap();
        assert_eq!(a, random_point(3, DEFAULT_PRIME, 11).unwrap());
        assert!(a.x.inverse().is_some() && a.y.inverse().is_some());
        let s = random_point(1, 7, 5).unwrap();
        assert!(s.x.a[0] != 0 && s.y.a[0] != 0);
        assert!(matches!(random_point(2, 91, 0), Err(PitError::BadPrime(91))));
    }

    #[test]
    fn eval_examples() {
        let pt = random_point(2, DEFAULT_PRIME, 3).unwrap();
        assert_eq!(eval_nc(&NCElem::x(), &pt).unwrap(), pt.x);
        let xx = FreeAlgebra::laurent().mul(&NCElem::x(), &NCElem::gen(Side::X, -1));
        assert_eq!(eval_nc(&xx, &pt).unwrap(), Mat::identity(2, DEFAULT_PRIME));
        let h = HSpec::one_plus_power(2).coeffs;
        let sx = eval_nc(&el("y^-1 + y^-1*x^2"), &pt).unwrap();
        assert_eq!(sx, pt.y.inverse().unwrap().mul(&pt.x.eval_poly(&h).unwrap()));
        assert_eq!(eval_nc(&el("1/2*x"), &pt).unwrap(), pt.x.scale(mod_inverse(2, DEFAULT_PRIME)));
        let bad = random_point(1, 7, 1).unwrap();
        assert!(matches!(eval_nc(&el("1/7*x"), &bad), Err(PitError::CoeffDenominatorDivisibleByP(_))));
    }

    #[test]
    fn zero_mismatches_small() {
        let k = Kontsevich::new(HSpec::one_plus_power(2), Budget::default()).unwrap();
        let cfg = PitConfig { trials: 5, seed: 7, ..PitConfig::default() };
        for j in -2..=3 {
            for t in [Side::X, Side::Y] {
                let r = verify_iterate(&k, j, t, &cfg).unwrap();
                assert!(r.passed(), "{r:?}");
                assert_eq!(r.checks, 10);
            }
        }
        let again = verify_iterate(&k, 2, Side::X, &cfg).unwrap();
        assert_eq!(again, verify_iterate(&k, 2, Side::X, &cfg).unwrap());
    }

    #[test]
    fn wrong_element_is_caught() {
        let k = Kontsevich::new(HSpec::one_plus_power(2), Budget::default()).unwrap();
        let pt = random_point(2, DEFAULT_PRIME, 1).unwrap();
        let h = &k.h().coeffs;
        let end = orbit(h, &pt, 1).unwrap();
        // Swapping the word order changes the value for generic matrices.
        assert_ne!(eval_nc(&el("y^-1 + x^2*y^-1"), &pt).unwrap(), end.x);
        assert_eq!(eval_nc(&el("y^-1 + y^-1*x^2"), &pt).unwrap(), end.x);
    }

    #[test]
    fn scalar_case_matches_commutative_evaluation() {
        let k = Kontsevich::new(HSpec::parse("1,1,1", false).unwrap(), Budget::default()).unwrap();
        let cfg = PitConfig { trials: 10, dims: vec![1], seed: 3, ..PitConfig::default() };
        assert!(verify_iterate(&k, 3, Side::X, &cfg).unwrap().passed());
        let (l1, _) = crate::commutative::comm_iterate(k.h(), 2).unwrap();
        let pt = scalar_point(3, 5, DEFAULT_PRIME);
        let nc = eval_nc(&k.iterate(2, Side::X).unwrap().value, &pt).unwrap();
        assert_eq!(Some(nc.a[0]), l1.eval_mod(3, 5, DEFAULT_PRIME));
    }

    fn laurent_elem() -> impl Strategy<Value = NCElem> {
        let word = prop::collection::vec((prop::bool::ANY, -2i64..=2), 0..4)
            .prop_map(|v| v.into_iter().map(|(b, m)| (if b { Side::X } else { Side::Y }, m)).collect::<Vec<_>>());
        prop::collection::vec((word, -3i64..=3), 0..4)
            .prop_map(|v| NCElem::from_terms(v.into_iter().map(|(w, c)| (reduce_group_word(&w), Coeff::Int(c)))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn evaluation_is_a_homomorphism(a in laurent_elem(), b in laurent_elem(), seed in any::<u64>()) {
            let pt = random_point(2, DEFAULT_PRIME, seed).unwrap();
            let alg = FreeAlgebra::laurent();
            let (ea, eb) = (eval_nc(&a, &pt).unwrap(), eval_nc(&b, &pt).unwrap());
            prop_assert_eq!(eval_nc(&alg.mul(&a, &b), &pt).unwrap(), ea.mul(&eb));
            prop_assert_eq!(eval_nc(&a.add(&b), &pt).unwrap(), ea.add(&eb));
        }

        #[test]
        fn substitution_matches_orbit(a in laurent_elem(), seed in any::<u64>()) {
            let h = HSpec::one_plus_power(2);
            let pt = random_point(2, DEFAULT_PRIME, seed).unwrap();
            let (fwd, sigma) = sigma_spec(&h).unwrap();
            let (bwd, tau) = tau_spec(&h).unwrap();
            if let Ok(next) = orbit_step(&h.coeffs, &pt, Direction::Fwd) {
                let s = fwd.substitute(&a, &sigma).unwrap();
                // Substitution may introduce H(x)^-1; only Laurent images evaluate.
                if s.is_laurent() {
                    prop_assert_eq!(eval_nc(&s, &pt).unwrap(), eval_nc(&a, &next).unwrap());
                }
            }
            if let Ok(prev) = orbit_step(&h.coeffs, &pt, Direction::Bwd) {
                let t = bwd.substitute(&a, &tau).unwrap();
                if t.is_laurent() {
                    prop_assert_eq!(eval_nc(&t, &pt).unwrap(), eval_nc(&a, &prev).unwrap());
                }
            }
        }
    }
}
