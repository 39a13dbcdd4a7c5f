use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use rand::Rng;
use serde_json::Value;

use super::{Exponent, MPoly, PolyRing};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `sum_i f_i dx_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneForm {
    ring: PolyRing,
    comps: Vec<MPoly>,
}

/// `sum_{i<j} g_ij dx_i ^ dx_j`, components in lexicographic pair order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForm {
    ring: PolyRing,
    comps: Vec<MPoly>,
}

impl OneForm {
    pub fn new(ring: &PolyRing, comps: Vec<MPoly>) -> Result<OneForm> {
        if comps.len() != ring.nvars() {
            return Err(Error::DimensionMismatch(format!(
                "{} components for a ring in {} variables",
                comps.len(),
                ring.nvars()
            )));
        }
        if comps.iter().any(|c| c.ring() != ring) {
            return Err(Error::DimensionMismatch("component from a different ring".into()));
        }
        Ok(OneForm { ring: ring.clone(), comps })
    }

    pub fn zero(ring: &PolyRing) -> OneForm {
        OneForm { ring: ring.clone(), comps: vec![MPoly::zero(ring); ring.nvars()] }
    }

    /// `f dx_i`.
    pub fn basic(ring: &PolyRing, i: usize, f: MPoly) -> OneForm {
        let mut w = OneForm::zero(ring);
        w.comps[i] = f;
        w
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn comps(&self) -> &[MPoly] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &MPoly {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(MPoly::is_zero)
    }

    pub fn fits_bound(&self, bound: u32) -> bool {
        self.comps.iter().all(|c| c.fits_bound(bound))
    }

    /// Multiply every component by the function `g`.
    pub fn mul_fn(&self, g: &MPoly) -> OneForm {
        OneForm { ring: self.ring.clone(), comps: self.comps.iter().map(|c| c * g).collect() }
    }

    pub fn scale(&self, c: crate::field::FqElem) -> OneForm {
        OneForm { ring: self.ring.clone(), comps: self.comps.iter().map(|f| f.scale(c)).collect() }
    }

    pub fn is_closed(&self) -> bool {
        d1(self).map(|t| t.is_zero()).unwrap_or(false)
    }

    /// Random form with coefficients within `bound`.
    pub fn random<R: Rng + ?Sized>(ring: &PolyRing, bound: u32, density: f64, rng: &mut R) -> OneForm {
        OneForm { ring: ring.clone(), comps: (0..ring.nvars()).map(|_| MPoly::random(ring, bound, density, rng)).collect() }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(MPoly::to_json).collect())
    }

    pub fn from_json(ring: &PolyRing, v: &Value) -> Result<OneForm> {
        let arr = v.as_array().ok_or_else(|| Error::Invalid(format!("one-form must be an array, got {v}")))?;
        let comps = arr.iter().map(|c| MPoly::from_json(ring, c)).collect::<Result<Vec<_>>>()?;
        OneForm::new(ring, comps)
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: &OneForm) -> OneForm {
        OneForm { ring: self.ring.clone(), comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: &OneForm) -> OneForm {
        OneForm { ring: self.ring.clone(), comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &OneForm {
    type Output = OneForm;
    fn neg(self) -> OneForm {
        OneForm { ring: self.ring.clone(), comps: self.comps.iter().map(|a| -a).collect() }
    }
}

impl TwoForm {
    pub fn comps(&self) -> &[MPoly] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(MPoly::is_zero)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(MPoly::to_json).collect())
    }

    /// Coefficient of `dx_i ^ dx_j` for `i < j`.
    pub fn coeff(&self, i: usize, j: usize) -> &MPoly {
        assert!(i < j);
        let n = self.ring.nvars();
        let idx = (0..i).map(|a| n - 1 - a).sum::<usize>() + (j - i - 1);
        &self.comps[idx]
    }
}

pub fn d0(f: &MPoly) -> OneForm {
    let ring = f.ring();
    OneForm { ring: ring.clone(), comps: (0..ring.nvars()).map(|i| f.derivative(i)).collect() }
}

/// `d(sum f_j dx_j) = sum_{i<j} (d_i f_j - d_j f_i) dx_i ^ dx_j`.
pub fn d1(w: &OneForm) -> Result<TwoForm> {
    let n = w.ring.nvars();
    if w.comps.len() != n {
        return Err(Error::DimensionMismatch(format!("{} components, {} variables", w.comps.len(), n)));
    }
    let mut comps = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            comps.push(&w.comps[j].derivative(i) - &w.comps[i].derivative(j));
        }
    }
    Ok(TwoForm { ring: w.ring.clone(), comps })
}

/// Cartier operator on closed forms: `C(sum f_i dx_i) = sum h_i dx_i` with
/// `h_i^p = -d_i^{p-1}(f_i)`.
pub fn cartier(w: &OneForm) -> Result<OneForm> {
    if !d1(w)?.is_zero() {
        return Err(Error::NotClosed);
    }
    let p = w.ring.p();
    let comps = w
        .comps
        .iter()
        .enumerate()
        .map(|(i, f)| (-&f.derivative_n(i, p - 1)).pth_root())
        .collect::<Result<Vec<_>>>()?;
    Ok(OneForm { ring: w.ring.clone(), comps })
}

/// A primitive `u` with `du = w` among functions within `bound + 1`, if one exists.
pub fn exact_primitive(w: &OneForm, bound: u32) -> Option<MPoly> {
    let ring = &w.ring;
    let field = ring.field();
    let monos = ring.monomials(bound + 1);
    let mut rows: BTreeMap<(usize, Exponent), usize> = BTreeMap::new();
    let mut index = |key: (usize, Exponent)| {
        let n = rows.len();
        *rows.entry(key).or_insert(n)
    };
    let mut cols: Vec<Vec<(usize, crate::field::FqElem)>> = Vec::with_capacity(monos.len());
    for e in &monos {
        let du = d0(&MPoly::monomial(ring, e.clone(), field.one()));
        let mut col = Vec::new();
        for (i, c) in du.comps.iter().enumerate() {
            for (m, v) in c.terms() {
                col.push((index((i, m.clone())), v));
            }
        }
        cols.push(col);
    }
    let mut rhs = Vec::new();
    for (i, c) in w.comps.iter().enumerate() {
        for (m, v) in c.terms() {
            rhs.push((index((i, m.clone())), v));
        }
    }
    let mut a = Matrix::zeros(rows.len(), monos.len());
    for (j, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            a.set(r, j, v);
        }
    }
    let mut b = vec![field.zero(); rows.len()];
    for (r, v) in rhs {
        b[r] = v;
    }
    let x = a.solve(field, &b)?;
    let mut u = MPoly::zero(ring);
    for (e, c) in monos.into_iter().zip(x) {
        u.add_term(e, c);
    }
    Some(u)
}

/// An `F_q`-basis of the closed 1-forms with coefficients within `bound`.
/// In one variable this is the monomial basis `x^a dx`.
pub fn closed_form_basis(ring: &PolyRing, bound: u32) -> Vec<OneForm> {
    let field = ring.field();
    let monos = ring.monomials(bound);
    let n = ring.nvars();
    let all: Vec<OneForm> = (0..n)
        .flat_map(|i| monos.iter().map(move |e| (i, e)))
        .map(|(i, e)| OneForm::basic(ring, i, MPoly::monomial(ring, e.clone(), field.one())))
        .collect();
    if n == 1 {
        return all;
    }
    let mut rows: BTreeMap<(usize, Exponent), usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (j, w) in all.iter().enumerate() {
        let dw = d1(w).expect("matching ring");
        for (pair, c) in dw.comps.iter().enumerate() {
            for (m, v) in c.terms() {
                let next = rows.len();
                let r = *rows.entry((pair, m.clone())).or_insert(next);
                entries.push((r, j, v));
            }
        }
    }
    let mut a = Matrix::zeros(rows.len(), all.len());
    for (r, j, v) in entries {
        a.set(r, j, v);
    }
    a.nullspace(field)
        .into_iter()
        .map(|coeffs| {
            coeffs.iter().zip(&all).filter(|(c, _)| !c.is_zero()).fold(OneForm::zero(ring), |acc, (&c, w)| &acc + &w.scale(c))
        })
        .collect()
}
