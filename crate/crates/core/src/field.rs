//! Small finite fields `F_q = F_p[t]/(m(t))`, `q = p^k <= 81`.
//!
//! Elements are stored as a single byte: the coefficient vector
//! `(c_0, .., c_{k-1})` of `c_0 + c_1 t + .. + c_{k-1} t^{k-1}` read as the
//! base-`p` integer `c_0 + c_1 p + ..`. All arithmetic goes through
//! precomputed `q x q` tables owned by the [`Field`].

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 81;
pub const SUPPORTED_PRIMES: [u32; 4] = [2, 3, 5, 7];

/// Serialized description of a field; `modulus` is listed from the constant
/// term up and includes the leading `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FqElem(u8);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Inner {
    spec: FieldSpec,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    frob: Vec<u8>,
    root: Vec<u8>,
}

/// Handle to a finite field. Cloning is cheap.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[t]/({:?})", self.p(), self.inner.spec.modulus)
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p` (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-`p`
/// digits of `code`.
fn monic_from_code(code: u32, deg: u32, p: u32) -> Vec<u32> {
    let mut c = code;
    let mut v = Vec::with_capacity(deg as usize + 1);
    for _ in 0..deg {
        v.push(c % p);
        c /= p;
    }
    v.push(1);
    v
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = (m.len() - 1) as u32;
    if deg == 0 || *m.last().unwrap() != 1 {
        return false;
    }
    for fd in 1..=deg / 2 {
        for code in 0..p.pow(fd) {
            let f = monic_from_code(code, fd, p);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically smallest monic irreducible polynomial of degree `k`,
/// ordering candidates by their coefficient vector read from `t^{k-1}` down.
pub fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    (0..p.pow(k))
        .map(|code| monic_from_code(code, k, p))
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}

impl Field {
    /// `F_{p^k}` with the canonical modulus.
    pub fn new(p: u32, k: u32) -> Result<Field> {
        Self::check_size(p, k)?;
        Self::with_modulus(FieldSpec { p, k, modulus: smallest_irreducible(p, k) })
    }

    pub fn prime(p: u32) -> Result<Field> {
        Field::new(p, 1)
    }

    /// Field of order `q`, which must be a supported prime power.
    pub fn of_order(q: u32) -> Result<Field> {
        for &p in &SUPPORTED_PRIMES {
            let mut pk = p;
            let mut k = 1;
            while pk <= MAX_ORDER {
                if pk == q {
                    return Field::new(p, k);
                }
                pk *= p;
                k += 1;
            }
        }
        Err(Error::UnsupportedField(format!("q = {q} is not a supported prime power <= {MAX_ORDER}")))
    }

    fn check_size(p: u32, k: u32) -> Result<()> {
        if !is_prime(p) || !SUPPORTED_PRIMES.contains(&p) {
            return Err(Error::UnsupportedField(format!("p = {p} must be one of {SUPPORTED_PRIMES:?}")));
        }
        if k == 0 || p.checked_pow(k).map_or(true, |q| q > MAX_ORDER) {
            return Err(Error::UnsupportedField(format!("{p}^{k} exceeds the supported order {MAX_ORDER}")));
        }
        Ok(())
    }

    pub fn with_modulus(spec: FieldSpec) -> Result<Field> {
        let FieldSpec { p, k, ref modulus } = spec;
        Self::check_size(p, k)?;
        if modulus.len() != k as usize + 1 || modulus.iter().any(|&c| c >= p) || !is_irreducible(modulus, p) {
            return Err(Error::BadModulus(modulus.clone()));
        }
        let q = p.pow(k) as usize;
        let digits = |x: usize| -> Vec<u32> {
            let mut x = x as u32;
            (0..k).map(|_| {
                let d = x % p;
                x /= p;
                d
            }).collect()
        };
        let encode = |v: &[u32]| -> u8 {
            v.iter().rev().fold(0u32, |acc, &c| acc * p + c) as u8
        };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&s);
                let mut prod = vec![0u32; 2 * k as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = poly_rem(&prod, modulus, p);
                r.resize(k as usize, 0);
                mul[a * q + b] = encode(&r);
            }
        }
        let neg: Vec<u8> = (0..q).map(|a| (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8).collect();
        let inv: Vec<u8> = (0..q)
            .map(|a| if a == 0 { 0 } else { (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u8 })
            .collect();
        let frob: Vec<u8> = (0..q)
            .map(|a| {
                let mut r = 1u8;
                for _ in 0..p {
                    r = mul[r as usize * q + a];
                }
                r
            })
            .collect();
        let mut root = vec![0u8; q];
        for a in 0..q {
            root[frob[a] as usize] = a as u8;
        }
        Ok(Field { inner: Arc::new(Inner { spec, q, add, mul, neg, inv, frob, root }) })
    }

    /// Accepts an order `q` or an object `{p, k, modulus}` with `modulus` optional.
    pub fn from_json(v: &serde_json::Value) -> Result<Field> {
        if let Some(q) = v.as_u64() {
            return Field::of_order(q as u32);
        }
        let bad = || Error::Invalid(format!("field must be an order or {{p, k, modulus}}, got {v}"));
        let p = v.get("p").and_then(|x| x.as_u64()).ok_or_else(bad)? as u32;
        let k = v.get("k").and_then(|x| x.as_u64()).unwrap_or(1) as u32;
        match v.get("modulus") {
            None => Field::new(p, k),
            Some(m) => {
                let modulus: Vec<u32> = serde_json::from_value(m.clone()).map_err(|_| bad())?;
                Field::with_modulus(FieldSpec { p, k, modulus })
            }
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    pub fn p(&self) -> u32 {
        self.inner.spec.p
    }

    pub fn k(&self) -> u32 {
        self.inner.spec.k
    }

    pub fn q(&self) -> usize {
        self.inner.q
    }

    pub fn zero(&self) -> FqElem {
        FqElem(0)
    }

    pub fn one(&self) -> FqElem {
        FqElem(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.p() as i64) as u8)
    }

    pub fn elem(&self, index: usize) -> FqElem {
        assert!(index < self.q(), "element index {index} out of range for q = {}", self.q());
        FqElem(index as u8)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q() as u8).map(FqElem)
    }

    pub fn coeffs(&self, a: FqElem) -> Vec<u32> {
        let p = self.p();
        let mut x = a.0 as u32;
        (0..self.k()).map(|_| {
            let d = x % p;
            x /= p;
            d
        }).collect()
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<FqElem> {
        if c.len() != self.k() as usize || c.iter().any(|&x| x >= self.p()) {
            return Err(Error::Invalid(format!("{c:?} is not a reduced element of F_{}", self.q())));
        }
        Ok(FqElem(c.iter().rev().fold(0u32, |acc, &d| acc * self.p() + d) as u8))
    }

    /// The class of `t`, i.e. the power-basis generator (equals 0 when k = 1
    /// and the modulus is `t`).
    pub fn t(&self) -> FqElem {
        if self.k() == 1 {
            FqElem(0)
        } else {
            FqElem(self.p() as u8)
        }
    }

    /// Power basis `1, t, .., t^{k-1}` of `F_q` over `F_p`.
    pub fn power_basis(&self) -> Vec<FqElem> {
        (0..self.k()).map(|j| FqElem(self.p().pow(j) as u8)).collect()
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.inner.add[a.index() * self.inner.q + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        FqElem(self.inner.neg[a.index()])
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.inner.mul[a.index() * self.inner.q + b.index()])
    }

    pub fn inv(&self, a: FqElem) -> Option<FqElem> {
        (!a.is_zero()).then(|| FqElem(self.inner.inv[a.index()]))
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Option<FqElem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^p`.
    #[inline]
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        FqElem(self.inner.frob[a.index()])
    }

    /// The unique `b` with `b^p = a`.
    #[inline]
    pub fn pth_root(&self, a: FqElem) -> FqElem {
        FqElem(self.inner.root[a.index()])
    }

    pub fn in_prime_subfield(&self, a: FqElem) -> bool {
        (a.0 as u32) < self.p()
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> FqElem {
        let order = self.q() as u64 - 1;
        let prime_factors: Vec<u64> = (2..=order).filter(|&d| order % d == 0 && is_prime(d as u32)).collect();
        self.elements()
            .skip(1)
            .find(|&g| prime_factors.iter().all(|&r| self.pow(g, order / r) != self.one()))
            .expect("F_q^* is cyclic")
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FqElem {
        FqElem(rng.gen_range(0..self.q()) as u8)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FqElem {
        FqElem(rng.gen_range(1..self.q()) as u8)
    }

    pub fn to_json(&self, a: FqElem) -> serde_json::Value {
        serde_json::Value::from(self.coeffs(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_fields() -> Vec<Field> {
        [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)]
            .iter()
            .map(|&(p, k)| Field::new(p, k).unwrap())
            .collect()
    }

    #[test]
    fn canonical_moduli() {
        assert_eq!(Field::new(2, 2).unwrap().spec().modulus, vec![1, 1, 1]);
        assert_eq!(Field::new(3, 2).unwrap().spec().modulus, vec![1, 0, 1]);
        assert_eq!(Field::new(2, 3).unwrap().spec().modulus, vec![1, 1, 0, 1]);
        assert_eq!(Field::new(5, 1).unwrap().spec().modulus, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Field::new(11, 1).is_err());
        assert!(Field::new(3, 5).is_err());
        assert!(Field::new(4, 1).is_err());
        assert!(Field::of_order(6).is_err());
        assert!(Field::of_order(243).is_err());
        let reducible = FieldSpec { p: 2, k: 2, modulus: vec![1, 0, 1] };
        assert_eq!(Field::with_modulus(reducible).unwrap_err(), Error::BadModulus(vec![1, 0, 1]));
        assert_eq!(Field::of_order(81).unwrap().k(), 4);
    }

    #[test]
    fn frobenius_examples() {
        let f4 = Field::new(2, 2).unwrap();
        let t = f4.t();
        assert_eq!(f4.coeffs(f4.frobenius(t)), vec![1, 1]);
        assert_eq!(f4.coeffs(f4.pth_root(t)), vec![1, 1]);
        let f9 = Field::new(3, 2).unwrap();
        assert_eq!(f9.coeffs(f9.frobenius(f9.t())), vec![0, 2]);
        for f in [Field::prime(2).unwrap(), Field::prime(5).unwrap(), Field::prime(7).unwrap()] {
            for a in f.elements() {
                assert_eq!(f.frobenius(a), a);
                assert_eq!(f.pth_root(a), a);
            }
        }
    }

    #[test]
    fn field_axioms_and_frobenius_homomorphism() {
        for f in small_fields() {
            for a in f.elements() {
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                assert_eq!(f.pth_root(f.frobenius(a)), a);
                for b in f.elements() {
                    assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_has_order_k_and_fixes_prime_field() {
        for f in small_fields() {
            for a in f.elements() {
                let mut b = a;
                for _ in 0..f.k() {
                    b = f.frobenius(b);
                }
                assert_eq!(b, a);
                assert_eq!(f.frobenius(a) == a, f.in_prime_subfield(a));
            }
        }
    }

    #[test]
    fn wilson() {
        for p in SUPPORTED_PRIMES {
            let f = Field::prime(p).unwrap();
            let prod = (1..p as i64).fold(f.one(), |acc, i| f.mul(acc, f.from_int(i)));
            assert_eq!(prod, f.from_int(-1));
        }
    }

    #[test]
    fn primitive_element_generates() {
        for f in small_fields() {
            let g = f.primitive_element();
            let mut seen = std::collections::BTreeSet::new();
            let mut x = f.one();
            for _ in 0..f.q() - 1 {
                seen.insert(x);
                x = f.mul(x, g);
            }
            assert_eq!(seen.len(), f.q() - 1);
        }
    }
}
