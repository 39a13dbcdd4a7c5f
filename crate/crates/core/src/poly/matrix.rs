use rand::Rng;
use serde_json::Value;

use super::{MPoly, PolyRing};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Mat;

/// Square matrix over a polynomial (or Laurent) ring, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    ring: PolyRing,
    d: usize,
    entries: Vec<MPoly>,
}

impl PolyMatrix {
    pub fn zero(ring: &PolyRing, d: usize) -> PolyMatrix {
        PolyMatrix { ring: ring.clone(), d, entries: vec![MPoly::zero(ring); d * d] }
    }

    pub fn identity(ring: &PolyRing, d: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zero(ring, d);
        for a in 0..d {
            m.set(a, a, MPoly::one(ring));
        }
        m
    }

    pub fn from_constant(ring: &PolyRing, m: &Mat) -> PolyMatrix {
        let d = m.dim();
        let entries = m.entries().iter().map(|&c| MPoly::constant(ring, c)).collect();
        PolyMatrix { ring: ring.clone(), d, entries }
    }

    pub fn from_entries(ring: &PolyRing, d: usize, entries: Vec<MPoly>) -> Result<PolyMatrix> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch(format!("{} entries for a {d}x{d} matrix", entries.len())));
        }
        Ok(PolyMatrix { ring: ring.clone(), d, entries })
    }

    /// `f * E_ab`.
    pub fn unit(ring: &PolyRing, d: usize, a: usize, b: usize, f: MPoly) -> PolyMatrix {
        let mut m = PolyMatrix::zero(ring, d);
        m.set(a, b, f);
        m
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, a: usize, b: usize) -> &MPoly {
        &self.entries[a * self.d + b]
    }

    pub fn set(&mut self, a: usize, b: usize, f: MPoly) {
        self.entries[a * self.d + b] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(MPoly::is_zero)
    }

    /// Positions of nonzero entries.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.d * self.d).filter(|&i| !self.entries[i].is_zero()).map(|i| (i / self.d, i % self.d))
    }

    pub fn map(&self, f: impl Fn(&MPoly) -> MPoly) -> PolyMatrix {
        PolyMatrix { ring: self.ring.clone(), d: self.d, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&MPoly) -> Result<MPoly>) -> Result<PolyMatrix> {
        Ok(PolyMatrix { ring: self.ring.clone(), d: self.d, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        PolyMatrix {
            ring: self.ring.clone(),
            d: self.d,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        PolyMatrix {
            ring: self.ring.clone(),
            d: self.d,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map(|a| -a)
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let d = self.d;
        let mut out = PolyMatrix::zero(&self.ring, d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = MPoly::zero(&self.ring);
                for c in 0..d {
                    let x = self.get(a, c);
                    let y = other.get(c, b);
                    if !x.is_zero() && !y.is_zero() {
                        acc = &acc + &(x * y);
                    }
                }
                out.set(a, b, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[MPoly]) -> Vec<MPoly> {
        (0..self.d)
            .map(|a| (0..self.d).fold(MPoly::zero(&self.ring), |acc, b| &acc + &(self.get(a, b) * &v[b])))
            .collect()
    }

    pub fn derivative(&self, i: usize) -> PolyMatrix {
        self.map(|f| f.derivative(i))
    }

    pub fn det(&self) -> MPoly {
        fn rec(m: &PolyMatrix, rows: &[usize], cols: &mut Vec<usize>) -> MPoly {
            let ring = &m.ring;
            if rows.is_empty() {
                return MPoly::one(ring);
            }
            let r = rows[0];
            let mut acc = MPoly::zero(ring);
            for idx in 0..cols.len() {
                let c = cols[idx];
                let entry = m.get(r, c);
                if entry.is_zero() {
                    continue;
                }
                let removed = cols.remove(idx);
                let minor = rec(m, &rows[1..], cols);
                cols.insert(idx, removed);
                let term = entry * &minor;
                acc = if idx % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
        let rows: Vec<usize> = (0..self.d).collect();
        rec(self, &rows, &mut rows.clone())
    }

    /// Inverse via the adjugate; requires a unit determinant (a nonzero
    /// constant, or a nonzero monomial on the Laurent chart).
    pub fn inverse(&self) -> Result<PolyMatrix> {
        let det = self.det();
        let field = self.ring.field();
        let det_inv = match det.num_terms() {
            1 => {
                let (e, c) = det.terms().next().unwrap();
                if !self.ring.is_laurent() && e.iter().any(|&x| x != 0) {
                    return Err(Error::NotInvertible);
                }
                let neg: Vec<i32> = e.iter().map(|x| -x).collect();
                MPoly::monomial(&self.ring, neg, field.inv(c).unwrap())
            }
            _ => return Err(Error::NotInvertible),
        };
        let d = self.d;
        let mut inv = PolyMatrix::zero(&self.ring, d);
        for a in 0..d {
            for b in 0..d {
                // cofactor C_ba goes to position (a, b)
                let rows: Vec<usize> = (0..d).filter(|&r| r != b).collect();
                let cols: Vec<usize> = (0..d).filter(|&c| c != a).collect();
                let mut minor = PolyMatrix::zero(&self.ring, d - 1);
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &c) in cols.iter().enumerate() {
                        minor.set(i, j, self.get(r, c).clone());
                    }
                }
                let m = if d == 1 { MPoly::one(&self.ring) } else { minor.det() };
                let cof = if (a + b) % 2 == 0 { m } else { -&m };
                inv.set(a, b, &cof * &det_inv);
            }
        }
        Ok(inv)
    }

    /// Evaluate constant entries; `None` if some entry is not constant.
    pub fn as_constant(&self) -> Option<Mat> {
        let entries = self.entries.iter().map(MPoly::as_constant).collect::<Option<Vec<_>>>()?;
        Some(Mat::from_entries(self.d, entries))
    }

    /// Random matrix with determinant a nonzero constant: a product of
    /// `steps` elementary matrices `I + f E_ab` (entries within `bound`) and a
    /// random invertible diagonal.
    pub fn random_unimodular<R: Rng + ?Sized>(ring: &PolyRing, d: usize, bound: u32, steps: usize, rng: &mut R) -> PolyMatrix {
        let field: &Field = ring.field();
        let diag: Vec<_> = (0..d).map(|_| field.random_nonzero(rng)).collect();
        let mut m = PolyMatrix::from_constant(ring, &Mat::diagonal(&diag));
        if d < 2 {
            return m;
        }
        for _ in 0..steps {
            let a = rng.gen_range(0..d);
            let mut b = rng.gen_range(0..d - 1);
            if b >= a {
                b += 1;
            }
            let f = MPoly::random(ring, bound, 0.5, rng);
            let e = PolyMatrix::identity(ring, d).add(&PolyMatrix::unit(ring, d, a, b, f));
            m = if rng.gen_bool(0.5) { m.mul(&e) } else { e.mul(&m) };
        }
        m
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.d)
                .map(|a| Value::Array((0..self.d).map(|b| self.get(a, b).to_json()).collect()))
                .collect(),
        )
    }

    pub fn from_json(ring: &PolyRing, v: &Value) -> Result<PolyMatrix> {
        let bad = || Error::Invalid(format!("matrix must be a square array of polynomials, got {v}"));
        let rows = v.as_array().ok_or_else(bad)?;
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == d).ok_or_else(bad)?;
            for e in row {
                entries.push(MPoly::from_json(ring, e)?);
            }
        }
        PolyMatrix::from_entries(ring, d, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unimodular_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, k, d) in [(2, 1, 2), (3, 1, 2), (2, 2, 3), (5, 1, 3)] {
            let ring = PolyRing::new(Field::new(p, k).unwrap(), 1);
            for _ in 0..5 {
                let m = PolyMatrix::random_unimodular(&ring, d, 2, 3, &mut rng);
                let inv = m.inverse().unwrap();
                assert_eq!(m.mul(&inv), PolyMatrix::identity(&ring, d));
                assert_eq!(inv.mul(&m), PolyMatrix::identity(&ring, d));
            }
        }
    }

    #[test]
    fn non_unit_determinant_rejected() {
        let ring = PolyRing::new(Field::prime(3).unwrap(), 1);
        let m = PolyMatrix::identity(&ring, 2).add(&PolyMatrix::unit(&ring, 2, 0, 0, MPoly::var(&ring, 0)));
        assert_eq!(m.inverse(), Err(Error::NotInvertible));
        let lring = PolyRing::laurent(Field::prime(3).unwrap());
        let mut diag = PolyMatrix::identity(&lring, 2);
        diag.set(0, 0, MPoly::var(&lring, 0));
        assert!(diag.inverse().is_ok());
    }
}
