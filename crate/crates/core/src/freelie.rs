//! The free associative algebra `F_p<x, y>`, the splitting of
//! `(x + y)^p - x^p - y^p` by `y`-degree, and Lie-span membership with
//! explicit bracket certificates.
//!
//! Membership is decided by plain span generation plus linear algebra over
//! `F_p`; words never exceed length `p`, so every space involved is tiny.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Field, FqElem};
use crate::linalg::Matrix;
use crate::matrix::Mat;

pub const MAX_WORD: usize = 16;

/// A word in `{x, y}`; bit `i` (counting from the first letter) is set when
/// the letter is `y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    bits: u16,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, bits: 0 };

    pub fn x() -> Word {
        Word { len: 1, bits: 0 }
    }

    pub fn y() -> Word {
        Word { len: 1, bits: 1 }
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn y_degree(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn multidegree(self) -> (usize, usize) {
        (self.len() - self.y_degree(), self.y_degree())
    }

    fn concat(self, other: Word) -> Result<Word> {
        let len = self.len() + other.len();
        if len > MAX_WORD {
            return Err(Error::DegreeOverflow(MAX_WORD));
        }
        Ok(Word { len: len as u8, bits: self.bits | (other.bits << self.len) })
    }

    pub fn letters(self) -> impl Iterator<Item = char> {
        (0..self.len).map(move |i| if self.bits >> i & 1 == 1 { 'y' } else { 'x' })
    }

    pub fn parse(s: &str) -> Result<Word> {
        if s.len() > MAX_WORD {
            return Err(Error::DegreeOverflow(MAX_WORD));
        }
        let mut w = Word::EMPTY;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                'x' => {}
                'y' => w.bits |= 1 << i,
                _ => return Err(Error::Invalid(format!("word {s:?} contains {ch:?}"))),
            }
            w.len += 1;
        }
        Ok(w)
    }

    /// All words of length `n`.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = Word> {
        (0..1u32 << n).map(move |bits| Word { len: n as u8, bits: bits as u16 })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        write!(f, "{}", self.letters().collect::<String>())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Element of `F_p<x, y>`.
#[derive(Clone, PartialEq, Eq)]
pub struct NCPoly {
    field: Field,
    terms: BTreeMap<Word, FqElem>,
}

impl fmt::Debug for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| if c.index() == 1 { w.to_string() } else { format!("{}*{w}", c.index()) })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl NCPoly {
    pub fn zero(field: &Field) -> NCPoly {
        assert_eq!(field.k(), 1, "the free algebra is taken over the prime field");
        NCPoly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn word(field: &Field, w: Word) -> NCPoly {
        let mut out = NCPoly::zero(field);
        out.terms.insert(w, field.one());
        out
    }

    pub fn x(field: &Field) -> NCPoly {
        NCPoly::word(field, Word::x())
    }

    pub fn y(field: &Field) -> NCPoly {
        NCPoly::word(field, Word::y())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Word, FqElem)> + '_ {
        self.terms.iter().map(|(&w, &c)| (w, c))
    }

    pub fn coeff(&self, w: Word) -> FqElem {
        self.terms.get(&w).copied().unwrap_or_default()
    }

    fn add_term(&mut self, w: Word, c: FqElem) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w).or_insert(FqElem::ZERO);
        *e = self.field.add(*e, c);
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (&w, &c) in &other.terms {
            out.add_term(w, c);
        }
        out
    }

    pub fn scale(&self, c: FqElem) -> NCPoly {
        let mut out = NCPoly::zero(&self.field);
        for (&w, &v) in &self.terms {
            out.add_term(w, self.field.mul(c, v));
        }
        out
    }

    pub fn sub(&self, other: &NCPoly) -> NCPoly {
        self.add(&other.scale(self.field.from_int(-1)))
    }

    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly> {
        let mut out = NCPoly::zero(&self.field);
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                out.add_term(a.concat(b)?, self.field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// Commutator `[a, b] = ab - ba`.
    pub fn bracket(&self, other: &NCPoly) -> Result<NCPoly> {
        Ok(self.mul(other)?.sub(&other.mul(self)?))
    }

    pub fn pow(&self, n: u32) -> Result<NCPoly> {
        let mut acc = NCPoly::word(&self.field, Word::EMPTY);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `(#x, #y)` if homogeneous and nonzero.
    pub fn multidegree(&self) -> Option<(usize, usize)> {
        let mut degs = self.terms.keys().map(|w| w.multidegree());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Part of `y`-degree `i`.
    pub fn y_component(&self, i: usize) -> NCPoly {
        NCPoly {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(w, _)| w.y_degree() == i).map(|(&w, &c)| (w, c)).collect(),
        }
    }

    /// Substitute matrices for `x` and `y`.
    pub fn evaluate(&self, field: &Field, x: &Mat, y: &Mat) -> Mat {
        let d = x.dim();
        let mut out = Mat::zero(d);
        for (&w, &c) in &self.terms {
            let mut m = Mat::identity(field, d);
            for ch in w.letters() {
                m = m.mul(field, if ch == 'x' { x } else { y });
            }
            out = out.add(field, &m.scale(field, field.from_int(c.index() as i64)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(w, c)| json!([w.to_string(), c.index()])).collect())
    }
}

/// `ad_x^n(y)`.
pub fn ad_x_power(field: &Field, n: usize) -> Result<NCPoly> {
    let x = NCPoly::x(field);
    let mut acc = NCPoly::y(field);
    for _ in 0..n {
        acc = x.bracket(&acc)?;
    }
    Ok(acc)
}

fn check_prime(p: u32) -> Result<Field> {
    if ![2, 3, 5, 7].contains(&p) {
        return Err(Error::UnsupportedPrime(p));
    }
    Field::prime(p)
}

/// `(x + y)^p - x^p - y^p` expanded over all `2^p` words.
pub fn jacobson_total(p: u32) -> Result<NCPoly> {
    let field = check_prime(p)?;
    let mut j = NCPoly::zero(&field);
    for w in Word::all_of_length(p as usize) {
        if w.y_degree() != 0 && w.y_degree() != p as usize {
            j.add_term(w, field.one());
        }
    }
    Ok(j)
}

/// `[J_1, .., J_{p-1}]` where `J_i` is the `y`-degree-`i` part of `(x+y)^p - x^p - y^p`.
pub fn jacobson_split(p: u32) -> Result<Vec<NCPoly>> {
    let total = jacobson_total(p)?;
    Ok((1..p as usize).map(|i| total.y_component(i)).collect())
}

/// Iterated bracket of generators.
#[derive(Clone, PartialEq, Eq)]
pub enum BracketExpr {
    Gen(usize),
    Bracket(Box<BracketExpr>, Box<BracketExpr>),
}

impl BracketExpr {
    pub fn evaluate(&self, gens: &[NCPoly]) -> Result<NCPoly> {
        match self {
            BracketExpr::Gen(i) => Ok(gens[*i].clone()),
            BracketExpr::Bracket(a, b) => a.evaluate(gens)?.bracket(&b.evaluate(gens)?),
        }
    }

    /// Render with generator names.
    pub fn render(&self, names: &[String]) -> String {
        match self {
            BracketExpr::Gen(i) => names[*i].clone(),
            BracketExpr::Bracket(a, b) => format!("[{},{}]", a.render(names), b.render(names)),
        }
    }

    fn bracket(a: &BracketExpr, b: &BracketExpr) -> BracketExpr {
        BracketExpr::Bracket(Box::new(a.clone()), Box::new(b.clone()))
    }
}

impl fmt::Debug for BracketExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketExpr::Gen(i) => write!(f, "g{i}"),
            BracketExpr::Bracket(a, b) => write!(f, "[{a:?},{b:?}]"),
        }
    }
}

/// `u = sum c_k * expr_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub terms: Vec<(FqElem, BracketExpr)>,
}

impl Certificate {
    pub fn evaluate(&self, field: &Field, gens: &[NCPoly]) -> Result<NCPoly> {
        let mut acc = NCPoly::zero(field);
        for (c, e) in &self.terms {
            acc = acc.add(&e.evaluate(gens)?.scale(*c));
        }
        Ok(acc)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(c, e)| if c.index() == 1 { e.render(names) } else { format!("{}*{}", c.index(), e.render(names)) })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

type Degree = (usize, usize);

/// Spanning set (linearly independent) of one multidegree component, each
/// element carrying the bracket that produced it.
#[derive(Default)]
struct Component {
    elems: Vec<(NCPoly, BracketExpr)>,
}

impl Component {
    fn try_insert(&mut self, field: &Field, v: NCPoly, e: BracketExpr) -> bool {
        if v.is_zero() || express(field, &self.elems, &v).is_some() {
            return false;
        }
        self.elems.push((v, e));
        true
    }
}

/// Coefficients expressing `target` in terms of `basis`, if it lies in the span.
fn express(field: &Field, basis: &[(NCPoly, BracketExpr)], target: &NCPoly) -> Option<Vec<FqElem>> {
    let mut index: BTreeMap<Word, usize> = BTreeMap::new();
    for w in basis.iter().flat_map(|(v, _)| v.terms.keys()).chain(target.terms.keys()) {
        let n = index.len();
        index.entry(*w).or_insert(n);
    }
    let mut a = Matrix::zeros(index.len(), basis.len());
    for (j, (v, _)) in basis.iter().enumerate() {
        for (w, c) in v.terms() {
            a.set(index[&w], j, c);
        }
    }
    let mut b = vec![field.zero(); index.len()];
    for (w, c) in target.terms() {
        b[index[&w]] = c;
    }
    a.solve(field, &b)
}

/// Components of the Lie subalgebra generated by `gens`, in every
/// multidegree componentwise `<= bound`.
fn lie_subalgebra(field: &Field, gens: &[NCPoly], bound: Degree) -> Result<BTreeMap<Degree, Component>> {
    let mut comps: BTreeMap<Degree, Component> = BTreeMap::new();
    for (i, g) in gens.iter().enumerate() {
        let deg = g.multidegree().ok_or_else(|| Error::Invalid(format!("generator {g} is not homogeneous")))?;
        if deg.0 <= bound.0 && deg.1 <= bound.1 {
            comps.entry(deg).or_default().try_insert(field, g.clone(), BracketExpr::Gen(i));
        }
    }
    let mut degrees: Vec<Degree> =
        (0..=bound.0).flat_map(|a| (0..=bound.1).map(move |b| (a, b))).filter(|&(a, b)| a + b >= 2).collect();
    degrees.sort_by_key(|&(a, b)| (a + b, a));
    for target in degrees {
        let mut new = comps.remove(&target).unwrap_or_default();
        let lower: Vec<(Degree, Degree)> = comps
            .keys()
            .flat_map(|&d1| comps.keys().map(move |&d2| (d1, d2)))
            .filter(|&(d1, d2)| d1 <= d2 && (d1.0 + d2.0, d1.1 + d2.1) == target)
            .collect();
        for (d1, d2) in lower {
            for (u, eu) in &comps[&d1].elems {
                for (v, ev) in &comps[&d2].elems {
                    let br = u.bracket(v)?;
                    new.try_insert(field, br, BracketExpr::bracket(eu, ev));
                }
            }
        }
        if !new.elems.is_empty() {
            comps.insert(target, new);
        }
    }
    Ok(comps)
}

fn check_target(u: &NCPoly, cap: usize) -> Result<Option<Degree>> {
    if u.is_zero() {
        return Ok(None);
    }
    let deg = u.multidegree().ok_or_else(|| Error::Invalid(format!("{u} is not homogeneous")))?;
    if deg.0 + deg.1 > cap {
        return Err(Error::DegreeOverflow(cap));
    }
    Ok(Some(deg))
}

fn certificate_from(field: &Field, basis: &[(NCPoly, BracketExpr)], u: &NCPoly) -> Option<Certificate> {
    let coeffs = express(field, basis, u)?;
    Some(Certificate {
        terms: coeffs.into_iter().zip(basis).filter(|(c, _)| !c.is_zero()).map(|(c, (_, e))| (c, e.clone())).collect(),
    })
}

/// Whether `u` lies in the Lie subalgebra generated by `gens`; words are
/// capped at length `cap`.
pub fn lie_membership(u: &NCPoly, gens: &[NCPoly], cap: usize) -> Result<Option<Certificate>> {
    let field = u.field().clone();
    let Some(deg) = check_target(u, cap)? else { return Ok(Some(Certificate { terms: vec![] })) };
    let comps = lie_subalgebra(&field, gens, deg)?;
    let basis = comps.get(&deg).map(|c| c.elems.as_slice()).unwrap_or(&[]);
    Ok(certificate_from(&field, basis, u))
}

/// Whether `u` lies in `[a, a]` for `a` the Lie subalgebra generated by `gens`.
pub fn derived_membership(u: &NCPoly, gens: &[NCPoly], cap: usize) -> Result<Option<Certificate>> {
    let field = u.field().clone();
    let Some(deg) = check_target(u, cap)? else { return Ok(Some(Certificate { terms: vec![] })) };
    let comps = lie_subalgebra(&field, gens, deg)?;
    let mut derived = Component::default();
    for (&d1, c1) in &comps {
        for (&d2, c2) in &comps {
            if d1 > d2 || (d1.0 + d2.0, d1.1 + d2.1) != deg {
                continue;
            }
            for (u1, e1) in &c1.elems {
                for (u2, e2) in &c2.elems {
                    derived.try_insert(&field, u1.bracket(u2)?, BracketExpr::bracket(e1, e2));
                }
            }
        }
    }
    Ok(certificate_from(&field, &derived.elems, u))
}

/// Generators `ad_x^j(y)`, `0 <= j < p`, of the Lie algebra `a`.
pub fn a_generators(p: u32) -> Result<Vec<NCPoly>> {
    let field = check_prime(p)?;
    (0..p as usize).map(|j| ad_x_power(&field, j)).collect()
}

pub fn a_generator_names(p: u32) -> Vec<String> {
    (0..p).map(|j| if j == 0 { "y".to_string() } else { format!("ad_x^{j}(y)") }).collect()
}

/// Everything the Jacobson identities assert for one prime, with certificates.
#[derive(Debug, Clone)]
pub struct JacobsonReport {
    pub p: u32,
    pub components: Vec<NCPoly>,
    pub sum_matches: bool,
    pub j1_is_ad_power: bool,
    /// Certificates for `J_i in [a, a]`, `i = 2..p-1`.
    pub derived_certificates: Vec<Option<Certificate>>,
}

impl JacobsonReport {
    pub fn passed(&self) -> bool {
        self.sum_matches && self.j1_is_ad_power && self.derived_certificates.iter().all(Option::is_some)
    }

    pub fn to_json(&self) -> Value {
        let names = a_generator_names(self.p);
        json!({
            "p": self.p,
            "components": self.components.iter().enumerate().map(|(i, j)| json!({
                "i": i + 1,
                "terms": j.to_json(),
            })).collect::<Vec<_>>(),
            "sum_matches": self.sum_matches,
            "j1_is_ad_power": self.j1_is_ad_power,
            "derived_certificates": self.derived_certificates.iter().enumerate().map(|(i, c)| json!({
                "i": i + 2,
                "certificate": c.as_ref().map(|c| c.render(&names)),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn jacobson_report(p: u32) -> Result<JacobsonReport> {
    let field = check_prime(p)?;
    let components = jacobson_split(p)?;
    let x = NCPoly::x(&field);
    let y = NCPoly::y(&field);
    let expanded = x.add(&y).pow(p)?.sub(&x.pow(p)?).sub(&y.pow(p)?);
    let sum = components.iter().fold(NCPoly::zero(&field), |acc, j| acc.add(j));
    let j1_is_ad_power = components[0] == ad_x_power(&field, p as usize - 1)?;
    let gens = a_generators(p)?;
    let derived_certificates = components[1..]
        .iter()
        .map(|j| derived_membership(j, &gens, p as usize))
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobsonReport { p, components, sum_matches: sum == expanded, j1_is_ad_power, derived_certificates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32) -> Field {
        Field::prime(p).unwrap()
    }

    fn poly(p: u32, words: &[&str]) -> NCPoly {
        let field = f(p);
        words.iter().fold(NCPoly::zero(&field), |acc, w| acc.add(&NCPoly::word(&field, Word::parse(w).unwrap())))
    }

    #[test]
    fn split_p2_and_p3() {
        let j = jacobson_split(2).unwrap();
        assert_eq!(j, vec![poly(2, &["xy", "yx"])]);
        let x = NCPoly::x(&f(2));
        let y = NCPoly::y(&f(2));
        assert_eq!(j[0], x.bracket(&y).unwrap());

        let j = jacobson_split(3).unwrap();
        assert_eq!(j[0], poly(3, &["xxy", "xyx", "yxx"]));
        assert_eq!(j[1], poly(3, &["xyy", "yxy", "yyx"]));
        assert_eq!(j[0], ad_x_power(&f(3), 2).unwrap());
        let (x, y) = (NCPoly::x(&f(3)), NCPoly::y(&f(3)));
        assert_eq!(j[1], x.bracket(&y).unwrap().bracket(&y).unwrap());
    }

    #[test]
    fn unsupported_prime() {
        assert_eq!(jacobson_split(11).unwrap_err(), Error::UnsupportedPrime(11));
        assert_eq!(jacobson_split(4).unwrap_err(), Error::UnsupportedPrime(4));
    }

    #[test]
    fn membership_examples() {
        let field = f(2);
        let (x, y) = (NCPoly::x(&field), NCPoly::y(&field));
        let xy_br = x.bracket(&y).unwrap();
        let cert = lie_membership(&xy_br, &[x.clone(), y.clone()], 2).unwrap().unwrap();
        assert_eq!(cert.evaluate(&field, &[x.clone(), y.clone()]).unwrap(), xy_br);
        let xy = NCPoly::word(&field, Word::parse("xy").unwrap());
        assert!(lie_membership(&xy, &[x.clone(), y.clone()], 2).unwrap().is_none());

        let field = f(3);
        let gens = a_generators(3).unwrap();
        let j2 = &jacobson_split(3).unwrap()[1];
        let cert = derived_membership(j2, &gens, 3).unwrap().unwrap();
        assert_eq!(cert.evaluate(&field, &gens).unwrap(), *j2);
    }

    #[test]
    fn membership_rejects_inhomogeneous_and_overflow() {
        let field = f(3);
        let (x, y) = (NCPoly::x(&field), NCPoly::y(&field));
        let mixed = x.add(&x.mul(&y).unwrap());
        assert!(matches!(lie_membership(&mixed, &[x.clone(), y.clone()], 3), Err(Error::Invalid(_))));
        let long = x.pow(4).unwrap();
        assert_eq!(lie_membership(&long, &[x, y], 3).unwrap_err(), Error::DegreeOverflow(3));
    }

    #[test]
    fn jacobson_identities_hold() {
        for p in [2, 3, 5, 7] {
            let rep = jacobson_report(p).unwrap();
            assert!(rep.sum_matches, "p={p}");
            assert!(rep.j1_is_ad_power, "p={p}");
            let gens = a_generators(p).unwrap();
            for (i, c) in rep.derived_certificates.iter().enumerate() {
                let c = c.as_ref().unwrap_or_else(|| panic!("no certificate for J_{} at p={p}", i + 2));
                assert_eq!(c.evaluate(&f(p), &gens).unwrap(), rep.components[i + 1]);
            }
        }
    }

    #[test]
    fn square_zero_substitution_kills_higher_components() {
        // x in g_0 (block diagonal), y in g_1: all ad_x^j(y) lie in g_1 and
        // multiply to zero, so J_i(x, y) = 0 for i >= 2.
        for (p, k) in [(2, 2), (3, 1), (5, 1)] {
            let field = Field::new(p, k).unwrap();
            let e = |n: i64| field.from_int(n);
            let d = 3;
            let mut x = Mat::zero(d);
            x.set(0, 0, e(2));
            x.set(0, 1, e(1));
            x.set(1, 0, e(1));
            x.set(2, 2, e(1));
            let mut y = Mat::zero(d);
            y.set(0, 2, e(1));
            y.set(1, 2, e(p as i64 - 1));
            let comps = jacobson_split(p).unwrap();
            for (i, j) in comps.iter().enumerate().skip(1) {
                assert!(j.evaluate(&field, &x, &y).is_zero(), "J_{} at p={p}", i + 1);
            }
            let lhs = x.add(&field, &y).pow(&field, p as u64).sub(&field, &x.pow(&field, p as u64));
            assert_eq!(lhs, comps[0].evaluate(&field, &x, &y));
        }
    }
}
