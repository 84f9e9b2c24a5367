//! JSON documents for elements.
//!
//! A term is `{"coeff":"p/q","word":[["x",-1],["y",2]]}`; fraction atoms are
//! written as `["hx", j, i]`. A full document carries the context:
//! `{"H":[...],"k":int,"target":"x"|"y","terms":[...]}` with terms in the
//! deterministic order of [`NCElem::sorted_terms`].

use serde::{Deserialize, Serialize};

use super::{Atom, NCElem, Side, Word};
use crate::coeff::Coeff;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomDoc {
    Pow(String, i64),
    Frac(String, u32, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: Coeff,
    pub word: Vec<AtomDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDoc {
    #[serde(rename = "H")]
    pub h: Vec<Coeff>,
    pub k: i64,
    pub target: String,
    pub terms: Vec<TermDoc>,
}

impl AtomDoc {
    pub fn from_atom(a: Atom) -> Self {
        let l = a.side().letter();
        match a.frac_parts() {
            Some((j, i)) => AtomDoc::Frac(format!("h{l}"), j, i),
            None => AtomDoc::Pow(l.to_string(), a.exponent().unwrap()),
        }
    }

    pub fn to_atom(&self) -> Result<Atom, String> {
        match self {
            AtomDoc::Pow(l, m) => {
                let side = match l.as_str() {
                    "x" => Side::X,
                    "y" => Side::Y,
                    _ => return Err(format!("unknown letter {l:?}")),
                };
                if *m == 0 {
                    return Err("zero exponent in word".into());
                }
                Ok(Atom::pow(side, *m))
            }
            AtomDoc::Frac(l, j, i) => {
                let side = match l.as_str() {
                    "hx" => Side::X,
                    "hy" => Side::Y,
                    _ => return Err(format!("unknown fraction atom {l:?}")),
                };
                if *j == 0 {
                    return Err("fraction atom with j = 0".into());
                }
                Ok(Atom::frac(side, *j, *i))
            }
        }
    }
}

pub fn terms_to_docs(e: &NCElem) -> Vec<TermDoc> {
    e.sorted_terms()
        .into_iter()
        .map(|(w, c)| TermDoc { coeff: c.clone(), word: w.atoms().iter().map(|a| AtomDoc::from_atom(*a)).collect() })
        .collect()
}

/// Borrowing, allocation-free serialisation of an element's terms in canonical
/// order; produces the same JSON as [`terms_to_docs`].
pub struct TermsView<'a>(pub &'a NCElem);

#[derive(Serialize)]
struct TermView<'a> {
    coeff: &'a Coeff,
    word: WordView<'a>,
}

struct WordView<'a>(&'a Word);

impl Serialize for TermsView<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.sorted_terms().into_iter().map(|(w, c)| TermView { coeff: c, word: WordView(w) }))
    }
}

impl Serialize for WordView<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.atoms().iter().map(|a| AtomView(*a)))
    }
}

struct AtomView(Atom);

impl Serialize for AtomView {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let a = self.0;
        match a.frac_parts() {
            Some((j, i)) => {
                let mut t = s.serialize_tuple(3)?;
                t.serialize_element(if a.side() == Side::X { "hx" } else { "hy" })?;
                t.serialize_element(&j)?;
                t.serialize_element(&i)?;
                t.end()
            }
            None => {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(a.side().letter())?;
                t.serialize_element(&a.exponent().unwrap())?;
                t.end()
            }
        }
    }
}

/// Rebuild an element; words must already be in alternating normal form.
pub fn docs_to_terms(docs: &[TermDoc]) -> Result<NCElem, String> {
    let mut terms = Vec::with_capacity(docs.len());
    for d in docs {
        let atoms = d.word.iter().map(AtomDoc::to_atom).collect::<Result<Vec<_>, _>>()?;
        if atoms.windows(2).any(|w| w[0].side() == w[1].side()) {
            return Err("word is not alternating".into());
        }
        terms.push((Word::from_atoms(atoms), d.coeff.clone()));
    }
    Ok(NCElem::from_terms(terms))
}

impl ElementDoc {
    pub fn new(h: &[Coeff], k: i64, target: Side, e: &NCElem) -> Self {
        ElementDoc { h: h.to_vec(), k, target: target.letter().to_string(), terms: terms_to_docs(e) }
    }

    pub fn element(&self) -> Result<NCElem, String> {
        docs_to_terms(&self.terms)
    }
}
