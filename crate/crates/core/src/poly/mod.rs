//! Sparse polynomials over `F_q`, the de Rham complex in degrees 0..2 and the
//! Cartier operator.
//!
//! Two charts are supported: the affine ring `F_q[x_1..x_n]` and the
//! one-variable Laurent ring `F_q[x, x^{-1}]`. Terms live in a `BTreeMap`
//! keyed by exponent vector so iteration (and serialization) is
//! lexicographic and byte-stable.

mod forms;
mod matrix;

pub use forms::{cartier, closed_form_basis, d0, d1, exact_primitive, OneForm, TwoForm};
pub use matrix::PolyMatrix;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{Field, FqElem};

pub type Exponent = Vec<i32>;

#[derive(Clone, PartialEq, Eq)]
pub struct PolyRing {
    field: Field,
    nvars: usize,
    laurent: bool,
}

impl fmt::Debug for PolyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.laurent {
            write!(f, "{:?}[x, 1/x]", self.field)
        } else {
            write!(f, "{:?}[x1..x{}]", self.field, self.nvars)
        }
    }
}

impl PolyRing {
    pub fn new(field: Field, nvars: usize) -> PolyRing {
        PolyRing { field, nvars, laurent: false }
    }

    /// `F_q[x, x^{-1}]`.
    pub fn laurent(field: Field) -> PolyRing {
        PolyRing { field, nvars: 1, laurent: true }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_laurent(&self) -> bool {
        self.laurent
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Whether `e` lies in the bounded monomial set used for degree bound `bound`:
    /// total degree `<= bound` on the affine chart, `|e| <= bound` on the Laurent chart.
    pub fn in_bound(&self, e: &[i32], bound: u32) -> bool {
        if self.laurent {
            e[0].unsigned_abs() <= bound
        } else {
            e.iter().all(|&x| x >= 0) && e.iter().sum::<i32>() as u32 <= bound
        }
    }

    /// All monomials within `bound`, in lexicographic order.
    pub fn monomials(&self, bound: u32) -> Vec<Exponent> {
        if self.laurent {
            return (-(bound as i32)..=bound as i32).map(|e| vec![e]).collect();
        }
        let mut out = Vec::new();
        let mut cur = vec![0i32; self.nvars];
        fn rec(i: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Exponent>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, bound as i32, &mut cur, &mut out);
        out.sort();
        out
    }

    fn check_exponent(&self, e: &[i32]) -> Result<()> {
        if e.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!("exponent {e:?} for {} variables", self.nvars)));
        }
        if !self.laurent && e.iter().any(|&x| x < 0) {
            return Err(Error::Invalid(format!("negative exponent {e:?} outside the Laurent chart")));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    ring: PolyRing,
    terms: BTreeMap<Exponent, FqElem>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("{:?}*x^{:?}", self.ring.field.coeffs(*c), e))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl MPoly {
    pub fn zero(ring: &PolyRing) -> MPoly {
        MPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &PolyRing, c: FqElem) -> MPoly {
        MPoly::monomial(ring, vec![0; ring.nvars], c)
    }

    pub fn one(ring: &PolyRing) -> MPoly {
        MPoly::constant(ring, ring.field.one())
    }

    /// The coordinate `x_i`.
    pub fn var(ring: &PolyRing, i: usize) -> MPoly {
        let mut e = vec![0; ring.nvars];
        e[i] = 1;
        MPoly::monomial(ring, e, ring.field.one())
    }

    /// `c * x^e`; panics on exponents invalid for the ring (use [`MPoly::from_terms`]
    /// for untrusted input).
    pub fn monomial(ring: &PolyRing, e: Exponent, c: FqElem) -> MPoly {
        ring.check_exponent(&e).expect("invalid monomial");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        MPoly { ring: ring.clone(), terms }
    }

    pub fn from_terms(ring: &PolyRing, terms: impl IntoIterator<Item = (Exponent, FqElem)>) -> Result<MPoly> {
        let mut out = MPoly::zero(ring);
        for (e, c) in terms {
            ring.check_exponent(&e)?;
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        &self.ring.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, FqElem)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[i32]) -> FqElem {
        self.terms.get(e).copied().unwrap_or(FqElem::ZERO)
    }

    /// Constant term if the polynomial is constant.
    pub fn as_constant(&self) -> Option<FqElem> {
        match self.terms.len() {
            0 => Some(FqElem::ZERO),
            1 => self.terms.iter().next().filter(|(e, _)| e.iter().all(|&x| x == 0)).map(|(_, &c)| c),
            _ => None,
        }
    }

    /// Maximal total degree of a term; `None` for zero.
    pub fn degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn fits_bound(&self, bound: u32) -> bool {
        self.terms.keys().all(|e| self.ring.in_bound(e, bound))
    }

    pub(crate) fn add_term(&mut self, e: Exponent, c: FqElem) {
        if c.is_zero() {
            return;
        }
        let f = &self.ring.field;
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = f.add(*v, c);
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    fn same_ring(&self, other: &MPoly) {
        assert!(self.ring == other.ring, "polynomials from different rings: {:?} vs {:?}", self.ring, other.ring);
    }

    pub fn scale(&self, c: FqElem) -> MPoly {
        let f = &self.ring.field;
        let mut out = MPoly::zero(&self.ring);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, &x)| (e.clone(), f.mul(c, x))).collect();
        out
    }

    pub fn mul_monomial(&self, e: &[i32], c: FqElem) -> MPoly {
        let f = &self.ring.field;
        let mut out = MPoly::zero(&self.ring);
        if c.is_zero() {
            return out;
        }
        for (m, &x) in &self.terms {
            let em: Exponent = m.iter().zip(e).map(|(a, b)| a + b).collect();
            out.terms.insert(em, f.mul(c, x));
        }
        out
    }

    pub fn pow(&self, n: u32) -> MPoly {
        (0..n).fold(MPoly::one(&self.ring), |acc, _| &acc * self)
    }

    /// Partial derivative `d/dx_i`.
    pub fn derivative(&self, i: usize) -> MPoly {
        let f = &self.ring.field;
        let mut out = MPoly::zero(&self.ring);
        for (e, &c) in &self.terms {
            let k = f.from_int(e[i] as i64);
            if k.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, f.mul(k, c));
        }
        out
    }

    pub fn derivative_n(&self, i: usize, n: u32) -> MPoly {
        (0..n).fold(self.clone(), |acc, _| acc.derivative(i))
    }

    /// `f^p`, computed termwise (valid in characteristic `p`).
    pub fn frobenius(&self) -> MPoly {
        let f = &self.ring.field;
        let p = f.p() as i32;
        MPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, &c)| (e.iter().map(|x| x * p).collect(), f.frobenius(c))).collect(),
        }
    }

    /// Coefficientwise Frobenius `c x^e -> c^p x^e`.
    pub fn frobenius_coeffs(&self) -> MPoly {
        let f = &self.ring.field;
        MPoly { ring: self.ring.clone(), terms: self.terms.iter().map(|(e, &c)| (e.clone(), f.frobenius(c))).collect() }
    }

    /// The unique `g` with `g^p = self`.
    pub fn pth_root(&self) -> Result<MPoly> {
        let f = &self.ring.field;
        let p = f.p() as i32;
        let mut out = MPoly::zero(&self.ring);
        for (e, &c) in &self.terms {
            if e.iter().any(|x| x.rem_euclid(p) != 0) {
                return Err(Error::NotPthPower(format!("exponent {e:?} is not divisible by {p}")));
            }
            out.terms.insert(e.iter().map(|x| x / p).collect(), f.pth_root(c));
        }
        Ok(out)
    }

    /// Random polynomial with every monomial of `bound` present independently
    /// with probability `density`.
    pub fn random<R: Rng + ?Sized>(ring: &PolyRing, bound: u32, density: f64, rng: &mut R) -> MPoly {
        let mut out = MPoly::zero(ring);
        for e in ring.monomials(bound) {
            if rng.gen_bool(density) {
                out.add_term(e, ring.field.random(rng));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, &c)| Value::Array(vec![Value::from(e.clone()), self.ring.field.to_json(c)]))
                .collect(),
        )
    }

    pub fn from_json(ring: &PolyRing, v: &Value) -> Result<MPoly> {
        let bad = || Error::Invalid(format!("malformed polynomial {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let e: Exponent = serde_json::from_value(pair[0].clone()).map_err(|_| bad())?;
            let c: Vec<u32> = serde_json::from_value(pair[1].clone()).map_err(|_| bad())?;
            terms.push((e, ring.field.from_coeffs(&c)?));
        }
        MPoly::from_terms(ring, terms)
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        self.same_ring(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self + &(-rhs)
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        let f = &self.ring.field;
        MPoly { ring: self.ring.clone(), terms: self.terms.iter().map(|(e, &c)| (e.clone(), f.neg(c))).collect() }
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.same_ring(rhs);
        let f = &self.ring.field;
        let mut out = MPoly::zero(&self.ring);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, f.mul(ca, cb));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pth_root_examples() {
        let f4 = Field::new(2, 2).unwrap();
        let r = PolyRing::new(f4.clone(), 1);
        let tx2 = MPoly::monomial(&r, vec![2], f4.t());
        let root = tx2.pth_root().unwrap();
        assert_eq!(root, MPoly::monomial(&r, vec![1], f4.from_coeffs(&[1, 1]).unwrap()));
        assert!(MPoly::zero(&r).pth_root().unwrap().is_zero());
        assert!(matches!(MPoly::var(&r, 0).pth_root(), Err(Error::NotPthPower(_))));

        for p in [2, 3, 5] {
            let f = Field::prime(p).unwrap();
            let r = PolyRing::new(f.clone(), 2);
            let x1 = &MPoly::var(&r, 0) + &MPoly::one(&r);
            assert_eq!(x1.pow(p).pth_root().unwrap(), x1);
        }
    }

    #[test]
    fn frobenius_matches_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(2, 2), (3, 1), (3, 2), (5, 1)] {
            let f = Field::new(p, k).unwrap();
            let r = PolyRing::new(f, 2);
            for _ in 0..10 {
                let g = MPoly::random(&r, 3, 0.5, &mut rng);
                assert_eq!(g.frobenius(), g.pow(p));
                assert_eq!(g.frobenius().pth_root().unwrap(), g);
            }
        }
    }

    #[test]
    fn char_p_kills_derivative_of_pth_power() {
        let f = Field::prime(2).unwrap();
        let r = PolyRing::new(f, 1);
        assert!(MPoly::var(&r, 0).pow(2).derivative(0).is_zero());
    }

    #[test]
    fn laurent_units_multiply() {
        let f = Field::prime(3).unwrap();
        let r = PolyRing::laurent(f.clone());
        let x = MPoly::var(&r, 0);
        let xinv = MPoly::monomial(&r, vec![-1], f.one());
        assert_eq!(&x * &xinv, MPoly::one(&r));
        assert_eq!(xinv.derivative(0), MPoly::monomial(&r, vec![-2], f.from_int(-1)));
        let poly_ring = PolyRing::new(f, 1);
        assert!(MPoly::from_terms(&poly_ring, [(vec![-1], FqElem::default())]).is_err());
    }

    #[test]
    fn monomial_enumeration() {
        let r = PolyRing::new(Field::prime(2).unwrap(), 2);
        assert_eq!(r.monomials(2).len(), 6);
        let l = PolyRing::laurent(Field::prime(2).unwrap());
        assert_eq!(l.monomials(2).len(), 5);
    }

    #[test]
    fn json_roundtrip() {
        let f = Field::new(3, 2).unwrap();
        let r = PolyRing::new(f.clone(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = MPoly::random(&r, 4, 0.4, &mut rng);
        assert_eq!(MPoly::from_json(&r, &g.to_json()).unwrap(), g);
    }
}
