//! Lattice bookkeeping for the toric surfaces that resolve `F(x, y) = (H(x)/y, x)`.
//!
//! Two ray families are generated by `p_{i+1} = n p_i - p_{i-1}` and
//! `t_{i+1} = n t_i - t_{i-1}`. Fans are ordered ray lists `p_i, ..., p_0, t_0, ..., t_m`;
//! the cone closing the list (`t_m`, `p_i`) is reported separately. A toric
//! divisor is principal when it is the divisor of a character `m`, i.e. its
//! coefficient at every ray `v` is `<m, v>`.
//!
//! The non-toric exceptional curves of the blow-ups are outside the lattice
//! model; identities involving them are checked through their toric part only
//! and are listed as such in every report.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::blockring::HSpec;
use crate::coeff::Coeff;
use crate::commutative::{frac_eq, CommLaurent, Frac};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToricError {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("ray {0} is not primitive")]
    NotPrimitive(String),
    #[error("rays {0} and {1} are linearly dependent")]
    Degenerate(String, String),
    #[error("divisor mentions unknown ray {0}")]
    UnknownRay(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RayVec(pub i64, pub i64);

impl RayVec {
    pub fn det(self, o: RayVec) -> i64 {
        self.0 * o.1 - self.1 * o.0
    }

    pub fn dot(self, m: (i64, i64)) -> i64 {
        self.0 * m.0 + self.1 * m.1
    }

    pub fn is_primitive(self) -> bool {
        self.0.gcd(&self.1) == 1
    }

    fn lin(self, a: i64, o: RayVec, b: i64) -> RayVec {
        RayVec(a * self.0 + b * o.0, a * self.1 + b * o.1)
    }
}

impl fmt::Display for RayVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    P,
    T,
}

pub fn ray_seq(n: i64, family: Family, count: usize) -> Vec<RayVec> {
    let mut v = match family {
        Family::P => vec![RayVec(0, 1), RayVec(-1, 0)],
        Family::T => vec![RayVec(1, 0), RayVec(0, -1)],
    };
    while v.len() < count {
        let k = v.len();
        v.push(v[k - 1].lin(n, v[k - 2], -1));
    }
    v.truncate(count);
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ray {
    pub label: String,
    pub v: RayVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    pub label: String,
    pub n: i64,
    pub i: Option<u32>,
    pub rays: Vec<Ray>,
}

/// Upper index of the t-family in the fan of `Y_i^0`; the two conventions
/// differ by one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TRange {
    /// `t_0, ..., t_{n+2-i}`
    NPlus2,
    /// `t_0, ..., t_{n+1-i}`
    NPlus1,
}

impl TRange {
    pub const ALL: [TRange; 2] = [TRange::NPlus2, TRange::NPlus1];

    pub fn top(self, n: i64, i: i64) -> i64 {
        match self {
            TRange::NPlus2 => n + 2 - i,
            TRange::NPlus1 => n + 1 - i,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TRange::NPlus2 => "n+2-i",
            TRange::NPlus1 => "n+1-i",
        }
    }
}

fn chain_fan(label: String, n: i64, i: Option<u32>, p_top: usize, t_top: usize) -> Result<Fan, ToricError> {
    let p = ray_seq(n, Family::P, p_top + 1);
    let t = ray_seq(n, Family::T, t_top + 1);
    let mut rays: Vec<Ray> = (0..=p_top).rev().map(|j| Ray { label: format!("P{j}"), v: p[j] }).collect();
    rays.extend((0..=t_top).map(|j| Ray { label: format!("T{j}"), v: t[j] }));
    let fan = Fan { label, n, i, rays };
    fan.validate()?;
    Ok(fan)
}

pub fn fan_z1(n: i64) -> Result<Fan, ToricError> {
    check_n(n)?;
    chain_fan("Z1".into(), n, None, 1, 2)
}

pub fn fan_z2(n: i64) -> Result<Fan, ToricError> {
    check_n(n)?;
    chain_fan("Z2".into(), n, None, 2, 1)
}

pub fn fan_yi0(n: i64, i: i64, range: TRange) -> Result<Fan, ToricError> {
    check_n(n)?;
    let top = range.top(n, i);
    if i < 1 || top < 1 {
        return Err(ToricError::IndexOutOfRange(format!("Y_{i}^0 with n = {n} and t-range {}", range.name())));
    }
    chain_fan(format!("Y{i}"), n, Some(i as u32), i as usize, top as usize)
}

fn check_n(n: i64) -> Result<(), ToricError> {
    if n < 1 {
        return Err(ToricError::IndexOutOfRange(format!("n = {n}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    pub from: String,
    pub to: String,
    pub det: i64,
    pub closing: bool,
}

impl Cone {
    pub fn singular(&self) -> bool {
        self.det.abs() > 1
    }
}

impl Fan {
    pub fn validate(&self) -> Result<(), ToricError> {
        for r in &self.rays {
            if !r.v.is_primitive() {
                return Err(ToricError::NotPrimitive(r.label.clone()));
            }
        }
        for c in self.adjacent_dets() {
            if c.det == 0 {
                return Err(ToricError::Degenerate(c.from, c.to));
            }
        }
        Ok(())
    }

    pub fn ray(&self, label: &str) -> Option<RayVec> {
        self.rays.iter().find(|r| r.label == label).map(|r| r.v)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rays.iter().map(|r| r.label.as_str()).collect()
    }

    /// Determinants of consecutive rays, followed by the closing cone `(last, first)`.
    pub fn adjacent_dets(&self) -> Vec<Cone> {
        let r = &self.rays;
        let mut out: Vec<Cone> = r
            .windows(2)
            .map(|w| Cone { from: w[0].label.clone(), to: w[1].label.clone(), det: w[0].v.det(w[1].v), closing: false })
            .collect();
        if let (Some(first), Some(last)) = (r.first(), r.last()) {
            out.push(Cone {
                from: last.label.clone(),
                to: first.label.clone(),
                det: last.v.det(first.v),
                closing: true,
            });
        }
        out
    }

    pub fn singular_cones(&self) -> Vec<Cone> {
        self.adjacent_dets().into_iter().filter(Cone::singular).collect()
    }

    /// `a_j` with `v_{j-1} + v_{j+1} = a_j v_j`, cyclically; `None` where the
    /// neighbours do not sum to a multiple of `v_j`.
    pub fn chain_profile(&self) -> Vec<ProfileEntry> {
        let r = &self.rays;
        let len = r.len();
        (0..len)
            .map(|j| {
                let prev = r[(j + len - 1) % len].v;
                let next = r[(j + 1) % len].v;
                let s = prev.lin(1, next, 1);
                let v = r[j].v;
                let a = (s.det(v) == 0).then(|| if v.0 != 0 { s.0 / v.0 } else { s.1 / v.1 });
                ProfileEntry { label: r[j].label.clone(), a, closing: j == 0 || j + 1 == len }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    pub label: String,
    /// `None` when the profile is undefined at this ray.
    pub a: Option<i64>,
    /// The triple wraps through the closing cone.
    pub closing: bool,
}

/// Integer combination of toric divisors, keyed by ray label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DivisorVec(pub BTreeMap<String, i64>);

impl DivisorVec {
    pub fn new<'a>(terms: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        let mut d = DivisorVec::default();
        for (l, c) in terms {
            *d.0.entry(l.to_string()).or_insert(0) += c;
        }
        d.0.retain(|_, c| *c != 0);
        d
    }

    pub fn sub(&self, o: &DivisorVec) -> DivisorVec {
        let mut d = self.clone();
        for (l, c) in &o.0 {
            *d.0.entry(l.clone()).or_insert(0) -= c;
        }
        d.0.retain(|_, c| *c != 0);
        d
    }

    pub fn get(&self, l: &str) -> i64 {
        self.0.get(l).copied().unwrap_or(0)
    }

    pub fn is_effective(&self) -> bool {
        self.0.values().all(|c| *c >= 0)
    }

    /// Rename every label through `map`.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Result<DivisorVec, ToricError> {
        let mut out = DivisorVec::default();
        for (l, c) in &self.0 {
            let to = map.get(l).ok_or_else(|| ToricError::UnknownRay(l.clone()))?;
            *out.0.entry(to.clone()).or_insert(0) += c;
        }
        Ok(out)
    }
}

impl fmt::Display for DivisorVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(l, c)| match c {
                1 => l.clone(),
                -1 => format!("-{l}"),
                c => format!("{c}{l}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

/// The character whose divisor is `d`, if there is one.
pub fn principal_character(f: &Fan, d: &DivisorVec) -> Result<Option<(i64, i64)>, ToricError> {
    for l in d.0.keys() {
        if f.ray(l).is_none() {
            return Err(ToricError::UnknownRay(l.clone()));
        }
    }
    let r = &f.rays;
    let Some((a, b)) =
        (0..r.len()).flat_map(|i| (i + 1..r.len()).map(move |j| (i, j))).find(|&(i, j)| r[i].v.det(r[j].v) != 0)
    else {
        return Ok(None);
    };
    // Solve <m, v_a> = d_a, <m, v_b> = d_b by Cramer's rule.
    let (va, vb) = (r[a].v, r[b].v);
    let (da, db) = (d.get(&r[a].label), d.get(&r[b].label));
    let det = va.det(vb);
    let m0 = da * vb.1 - db * va.1;
    let m1 = va.0 * db - vb.0 * da;
    if m0 % det != 0 || m1 % det != 0 {
        return Ok(None);
    }
    let m = (m0 / det, m1 / det);
    Ok(r.iter().all(|ray| ray.v.dot(m) == d.get(&ray.label)).then_some(m))
}

pub fn is_principal(f: &Fan, d: &DivisorVec) -> Result<bool, ToricError> {
    Ok(principal_character(f, d)?.is_some())
}

pub fn lin_equiv(f: &Fan, d1: &DivisorVec, d2: &DivisorVec) -> Result<bool, ToricError> {
    is_principal(f, &d1.sub(d2))
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub fan: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    /// Character realising the equivalence when it is a linear equivalence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub character: Option<(i64, i64)>,
}

fn equiv_check(name: &str, f: &Fan, lhs: &DivisorVec, rhs: &DivisorVec) -> Result<IdentityCheck, ToricError> {
    let character = principal_character(f, &lhs.sub(rhs))?;
    Ok(IdentityCheck {
        name: name.into(),
        fan: f.label.clone(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        pass: character.is_some(),
        character,
    })
}

fn exact_check(name: &str, fan: &str, lhs: &DivisorVec, rhs: &DivisorVec) -> IdentityCheck {
    IdentityCheck {
        name: name.into(),
        fan: fan.into(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        pass: lhs == rhs,
        character: None,
    }
}

fn dv(terms: &[(&str, i64)]) -> DivisorVec {
    DivisorVec::new(terms.iter().copied())
}

/// Linear equivalences among toric divisors on `Z_1^0` and `Z_2^0`.
pub fn divisor_identities(n: i64) -> Result<Vec<IdentityCheck>, ToricError> {
    let z1 = fan_z1(n)?;
    let z2 = fan_z2(n)?;
    Ok(vec![
        equiv_check("Z2 class (0,1): P0 ~ T1 + P2", &z2, &dv(&[("P0", 1)]), &dv(&[("T1", 1), ("P2", 1)]))?,
        equiv_check("Z2 class (1,0), toric part: T0 ~ P1 + nP2", &z2, &dv(&[("T0", 1)]), &dv(&[("P1", 1), ("P2", n)]))?,
        equiv_check("Z1 class (1,0): T0 ~ P1 + T2", &z1, &dv(&[("T0", 1)]), &dv(&[("P1", 1), ("T2", 1)]))?,
        equiv_check("Z1 class (0,1): P0 ~ T1 + nT2", &z1, &dv(&[("P0", 1)]), &dv(&[("T1", 1), ("T2", n)]))?,
    ])
}

/// Positional identification of the chain of `Z_2^0` with that of `Z_1^0`:
/// `P2, P1, P0, T0, T1` correspond to `P1, P0, T0, T1, T2`.
pub fn pullback_map(n: i64) -> Result<BTreeMap<String, String>, ToricError> {
    let (z1, z2) = (fan_z1(n)?, fan_z2(n)?);
    Ok(z2.labels().into_iter().map(String::from).zip(z1.labels().into_iter().map(String::from)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackReport {
    pub n: i64,
    pub map: BTreeMap<String, String>,
    pub checks: Vec<IdentityCheck>,
    /// Identities not modelled on the lattice because they involve a non-toric curve.
    pub excluded: Vec<String>,
}

impl PullbackReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn pullback_shift_check(n: i64) -> Result<PullbackReport, ToricError> {
    check_n(n)?;
    let (z1, z2) = (fan_z1(n)?, fan_z2(n)?);
    let map = pullback_map(n)?;
    let g = |d: &DivisorVec| d.relabel(&map);
    let o10 = dv(&[("P1", 1), ("P2", n)]);
    let o01 = dv(&[("T1", 1), ("P2", 1)]);
    let o11 = dv(&[("T1", 1), ("P1", 1), ("P2", n + 1)]);
    let mut checks = vec![
        // Relabelling of the stated representatives.
        exact_check("G^* O(1,0) = P0 + nP1", "Z1", &g(&o10)?, &dv(&[("P0", 1), ("P1", n)])),
        exact_check("G^* O(0,1) = P1 + T2", "Z1", &g(&o01)?, &dv(&[("P1", 1), ("T2", 1)])),
        exact_check("G^* O(1,1) = T2 + P0 + (n+1)P1", "Z1", &g(&o11)?, &dv(&[("T2", 1), ("P0", 1), ("P1", n + 1)])),
        exact_check("G^* Z = P0 + nP1", "Z1", &g(&o10)?, &dv(&[("P0", 1), ("P1", n)])),
        exact_check("G^* Y = T0", "Z1", &g(&dv(&[("P0", 1)]))?, &dv(&[("T0", 1)])),
        exact_check("G^* W = T2 + P1", "Z1", &g(&o01)?, &dv(&[("T2", 1), ("P1", 1)])),
        // The representatives are in the claimed classes on the source.
        equiv_check("Z2: O(1,1) ~ T1 + P1 + (n+1)P2", &z2, &dv(&[("T0", 1), ("P0", 1)]), &o11)?,
        equiv_check("Z2: X ~ Z, toric part", &z2, &dv(&[("T0", 1)]), &o10)?,
        equiv_check("Z2: Y ~ W", &z2, &dv(&[("P0", 1)]), &o01)?,
        // Shifted identities on the target.
        equiv_check("Z1: G^* Y ~ G^* W", &z1, &g(&dv(&[("P0", 1)]))?, &g(&o01)?)?,
        equiv_check(
            "Z1: O(n,1) = P0 + nP1 + nT2",
            &z1,
            &dv(&[("P0", 1), ("P1", n), ("T2", n)]),
            &dv(&[("T0", n), ("P0", 1)]),
        )?,
        equiv_check(
            "Z1: O(n+1,1) = P0 + (n+1)P1 + (n+1)T2",
            &z1,
            &dv(&[("P0", 1), ("P1", n + 1), ("T2", n + 1)]),
            &dv(&[("T0", n + 1), ("P0", 1)]),
        )?,
    ];
    let dominated = g(&o11)?.sub(&dv(&[("P0", 1), ("P1", 1), ("T2", 1)]));
    checks.push(IdentityCheck {
        name: "G^* O(1,1) - (P0 + P1 + T2) = nP1, effective".into(),
        fan: "Z1".into(),
        lhs: dominated.to_string(),
        rhs: dv(&[("P1", n)]).to_string(),
        pass: dominated == dv(&[("P1", n)]) && dominated.is_effective(),
        character: None,
    });
    checks.push(exact_check(
        "(P0 + P1 + T2) - O(1,0) rep = P0",
        "Z1",
        &dv(&[("P0", 1), ("P1", 1), ("T2", 1)]).sub(&dv(&[("P1", 1), ("T2", 1)])),
        &dv(&[("P0", 1)]),
    ));
    Ok(PullbackReport {
        n,
        map,
        checks,
        excluded: vec![
            "Z2: O(1,0) = T0 + E (E non-toric; checked as T0 ~ P1 + nP2)".into(),
            "G^* X = T1 + G^*(E) (G^*(E) non-toric)".into(),
            "Z1: O(1,1)(-C) (C non-toric; checked through its toric representative)".into(),
        ],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub n: i64,
    pub i: i64,
    pub range: TRange,
    pub source: Vec<ProfileEntry>,
    pub target: Vec<ProfileEntry>,
    /// Positions compared (interior of both chains).
    pub compared: usize,
    pub pass: bool,
}

/// Number of blown-up points on a chain divisor: `n` on each of `P0` and `T0`.
fn blowups(label: &str, n: i64) -> i64 {
    if label == "P0" || label == "T0" {
        n
    } else {
        0
    }
}

/// Compare the chain of `Y_i^0` with the chain of `Y_{i+1}^0` under the
/// positional map `P_j -> P_{j+1}`, `T_j -> T_{j-1}`. Profiles are corrected
/// for the `n` blown-up points on `P0` and on `T0` (each point raises `a_j` by one).
pub fn shift_match(n: i64, i: i64, range: TRange) -> Result<ShiftReport, ToricError> {
    let a = fan_yi0(n, i, range)?;
    let b = fan_yi0(n, i + 1, range)?;
    if a.rays.len() != b.rays.len() {
        return Err(ToricError::IndexOutOfRange(format!("chains of Y{i} and Y{} differ in length", i + 1)));
    }
    let (pa, pb) = (a.chain_profile(), b.chain_profile());
    let mut compared = 0;
    let mut pass = true;
    for (x, y) in pa.iter().zip(&pb) {
        if x.closing || y.closing {
            continue;
        }
        compared += 1;
        let cx = x.a.map(|v| v + blowups(&x.label, n));
        let cy = y.a.map(|v| v + blowups(&y.label, n));
        pass &= cx.is_some() && cx == cy;
    }
    Ok(ShiftReport { n, i, range, source: pa, target: pb, compared, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct FanReport {
    pub fan: Fan,
    pub primitive: bool,
    pub cones: Vec<Cone>,
    /// All non-closing cones are smooth and the closing cone has `|det| = n`.
    pub dets_ok: bool,
    pub singular: Vec<Cone>,
    pub profile: Vec<ProfileEntry>,
}

pub fn fan_report(f: &Fan) -> FanReport {
    let cones = f.adjacent_dets();
    let dets_ok = cones.iter().all(|c| if c.closing { c.det.abs() == f.n } else { c.det.abs() == 1 });
    FanReport {
        primitive: f.rays.iter().all(|r| r.v.is_primitive()),
        singular: f.singular_cones(),
        profile: f.chain_profile(),
        dets_ok,
        cones,
        fan: f.clone(),
    }
}

// Chart identities, with u = H(x)/y and v = x.

#[derive(Clone, Debug, Serialize)]
pub struct ChartCheck {
    pub name: &'static str,
    pub reversibility_dependent: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartReport {
    #[serde(rename = "H")]
    pub h: Vec<Coeff>,
    pub reversible: bool,
    pub checks: Vec<ChartCheck>,
    /// Names of failing identities.
    pub mismatches: Vec<&'static str>,
}

impl ChartReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn mono(ex: i64, ey: i64) -> Frac {
    Frac::laurent(CommLaurent::monomial((ex, ey), Coeff::ONE))
}

pub fn chart_checks(h: &HSpec) -> ChartReport {
    let n = h.n as i64;
    let c = &h.coeffs;
    let (x, y) = (mono(1, 0), mono(0, 1));
    let (xi, yi) = (mono(-1, 0), mono(0, -1));
    let xn = mono(n, 0);
    let hx = Frac::eval_poly(c, &x);
    let hxi = Frac::eval_poly(c, &xi);
    let u = hx.div(&y);
    let v = x.clone();
    let hv = Frac::eval_poly(c, &v);
    let hvi = Frac::eval_poly(c, &v.inv());
    let list: Vec<(&'static str, bool, Frac, Frac)> = vec![
        ("x^n H(x^-1) = H(x)", true, xn.mul(&hxi), hx.clone()),
        ("u^-1 v^n = x^n y / H(x)", false, u.inv().mul(&v.powi(n)), xn.mul(&y).div(&hx)),
        ("x^n y / H(x) = y / H(x^-1)", true, xn.mul(&y).div(&hx), y.div(&hxi)),
        ("u^-1 v^n = y / H(x^-1)", true, u.inv().mul(&v.powi(n)), y.div(&hxi)),
        ("v^-1 = x^-1", false, v.inv(), xi.clone()),
        ("u^-1 = y / H(x)", false, u.inv(), y.div(&hx)),
        ("u / H(v) = y^-1", false, u.div(&hv), yi.clone()),
        ("H(x) / (y H(x)) = y^-1", false, hx.div(&y.mul(&hx)), yi.clone()),
        ("u / H(v^-1) = H(x) / (y H(x^-1))", false, u.div(&hvi), hx.div(&y.mul(&hxi))),
        ("u / H(v^-1) = x^n y^-1", true, u.div(&hvi), xn.mul(&yi)),
        ("u v^-n = H(x) / (x^n y)", false, u.mul(&v.powi(-n)), hx.div(&xn.mul(&y))),
        ("y / H(x) = x^-n y / H(x^-1)", true, y.div(&hx), mono(-n, 1).div(&hxi)),
        ("H(x) / (x^n y) = H(x^-1) / y", true, hx.div(&xn.mul(&y)), hxi.div(&y)),
    ];
    let checks: Vec<ChartCheck> = list
        .into_iter()
        .map(|(name, dep, l, r)| ChartCheck { name, reversibility_dependent: dep, pass: frac_eq(&l, &r) })
        .collect();
    let mismatches = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    ChartReport { h: c.clone(), reversible: h.reversible_ok, checks, mismatches }
}

#[derive(Clone, Debug, Serialize)]
pub struct ToricReport {
    pub n: i64,
    pub i: i64,
    pub fans: Vec<FanReport>,
    pub identities: Vec<IdentityCheck>,
    pub pullback: PullbackReport,
    pub shifts: Vec<ShiftReport>,
    pub charts: ChartReport,
    pub blowup_points: Vec<BlowupRecord>,
    pub pass: bool,
}

/// A set of blown-up points recorded symbolically: the roots of `H` on a divisor.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupRecord {
    pub divisor: &'static str,
    #[serde(rename = "H")]
    pub h: String,
}

/// Every lattice check for degree `n`, with `Y_i^0` for both t-range conventions
/// and the chart identities for `H = 1 + x^n`.
pub fn toric_report(n: i64, i: i64) -> Result<ToricReport, ToricError> {
    check_n(n)?;
    let mut fans = vec![fan_report(&fan_z1(n)?), fan_report(&fan_z2(n)?)];
    let mut shifts = Vec::new();
    for range in TRange::ALL {
        if let Ok(f) = fan_yi0(n, i, range) {
            fans.push(fan_report(&f));
        }
        if let Ok(s) = shift_match(n, i, range) {
            shifts.push(s);
        }
    }
    let identities = divisor_identities(n)?;
    let pullback = pullback_shift_check(n)?;
    let h = HSpec::one_plus_power(n as usize);
    let charts = chart_checks(&h);
    // The Y fans only need primitive rays and smooth interior cones.
    let fans_ok = fans.iter().all(|f| {
        f.primitive && if f.fan.i.is_none() { f.dets_ok } else { f.cones.iter().all(|c| c.closing || c.det.abs() == 1) }
    });
    let pass = fans_ok
        && identities.iter().all(|c| c.pass)
        && pullback.pass()
        && shifts.iter().all(|s| s.pass)
        && charts.pass();
    Ok(ToricReport {
        n,
        i,
        fans,
        identities,
        pullback,
        shifts,
        charts,
        blowup_points: vec![
            BlowupRecord { divisor: "P0", h: h.render("x") },
            BlowupRecord { divisor: "T0", h: h.render("y") },
        ],
        pass,
    })
}
