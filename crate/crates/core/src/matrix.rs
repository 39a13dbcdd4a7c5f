//! Square matrices with entries in `F_q`.

use crate::field::{Field, FqElem};

/// A `d x d` matrix over `F_q`, row-major. Ordering is lexicographic on the
/// row-major sequence of element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    d: usize,
    entries: Vec<FqElem>,
}

impl Mat {
    pub fn zero(d: usize) -> Mat {
        Mat { d, entries: vec![FqElem::ZERO; d * d] }
    }

    pub fn identity(field: &Field, d: usize) -> Mat {
        let mut m = Mat::zero(d);
        for a in 0..d {
            m.set(a, a, field.one());
        }
        m
    }

    pub fn from_entries(d: usize, entries: Vec<FqElem>) -> Mat {
        assert_eq!(entries.len(), d * d, "expected {} entries", d * d);
        Mat { d, entries }
    }

    /// The matrix unit `E_{ab}` scaled by `c`.
    pub fn unit(d: usize, a: usize, b: usize, c: FqElem) -> Mat {
        let mut m = Mat::zero(d);
        m.set(a, b, c);
        m
    }

    pub fn diagonal(diag: &[FqElem]) -> Mat {
        let mut m = Mat::zero(diag.len());
        for (a, &c) in diag.iter().enumerate() {
            m.set(a, a, c);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[FqElem] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> FqElem {
        self.entries[a * self.d + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: FqElem) {
        self.entries[a * self.d + b] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, field: &Field, other: &Mat) -> Mat {
        Mat { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(&x, &y)| field.add(x, y)).collect() }
    }

    pub fn sub(&self, field: &Field, other: &Mat) -> Mat {
        Mat { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(&x, &y)| field.sub(x, y)).collect() }
    }

    pub fn scale(&self, field: &Field, c: FqElem) -> Mat {
        Mat { d: self.d, entries: self.entries.iter().map(|&x| field.mul(c, x)).collect() }
    }

    pub fn mul(&self, field: &Field, other: &Mat) -> Mat {
        let d = self.d;
        debug_assert_eq!(d, other.d);
        let mut out = Mat::zero(d);
        for a in 0..d {
            for c in 0..d {
                let x = self.get(a, c);
                if x.is_zero() {
                    continue;
                }
                for b in 0..d {
                    let idx = a * d + b;
                    out.entries[idx] = field.add(out.entries[idx], field.mul(x, other.get(c, b)));
                }
            }
        }
        out
    }

    pub fn pow(&self, field: &Field, e: u64) -> Mat {
        let mut acc = Mat::identity(field, self.d);
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }

    /// Entrywise `p`-th power (the absolute Frobenius on points).
    pub fn frobenius(&self, field: &Field) -> Mat {
        Mat { d: self.d, entries: self.entries.iter().map(|&x| field.frobenius(x)).collect() }
    }

    pub fn inverse(&self, field: &Field) -> Option<Mat> {
        let d = self.d;
        let mut a = self.clone();
        let mut inv = Mat::identity(field, d);
        for c in 0..d {
            let pr = (c..d).find(|&r| !a.get(r, c).is_zero())?;
            if pr != c {
                for j in 0..d {
                    a.entries.swap(pr * d + j, c * d + j);
                    inv.entries.swap(pr * d + j, c * d + j);
                }
            }
            let s = field.inv(a.get(c, c)).unwrap();
            for j in 0..d {
                a.set(c, j, field.mul(s, a.get(c, j)));
                inv.set(c, j, field.mul(s, inv.get(c, j)));
            }
            for r in 0..d {
                let f = a.get(r, c);
                if r == c || f.is_zero() {
                    continue;
                }
                for j in 0..d {
                    a.set(r, j, field.sub(a.get(r, j), field.mul(f, a.get(c, j))));
                    inv.set(r, j, field.sub(inv.get(r, j), field.mul(f, inv.get(c, j))));
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self, field: &Field) -> FqElem {
        let d = self.d;
        let mut a = self.clone();
        let mut det = field.one();
        for c in 0..d {
            let Some(pr) = (c..d).find(|&r| !a.get(r, c).is_zero()) else { return field.zero() };
            if pr != c {
                for j in 0..d {
                    a.entries.swap(pr * d + j, c * d + j);
                }
                det = field.neg(det);
            }
            let pivot = a.get(c, c);
            det = field.mul(det, pivot);
            let s = field.inv(pivot).unwrap();
            for r in c + 1..d {
                let f = field.mul(a.get(r, c), s);
                if f.is_zero() {
                    continue;
                }
                for j in c..d {
                    a.set(r, j, field.sub(a.get(r, j), field.mul(f, a.get(c, j))));
                }
            }
        }
        det
    }

    pub fn is_invertible(&self, field: &Field) -> bool {
        !self.det(field).is_zero()
    }

    /// Position in the lexicographic enumeration of all `q^{d^2}` matrices.
    pub fn code(&self, q: usize) -> u64 {
        self.entries.iter().fold(0u64, |acc, e| acc * q as u64 + e.index() as u64)
    }

    pub fn from_code(field: &Field, d: usize, mut code: u64) -> Mat {
        let q = field.q() as u64;
        let mut entries = vec![FqElem::ZERO; d * d];
        for slot in entries.iter_mut().rev() {
            *slot = field.elem((code % q) as usize);
            code /= q;
        }
        Mat { d, entries }
    }

    pub fn to_json(&self, field: &Field) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.d)
                .map(|a| serde_json::Value::Array((0..self.d).map(|b| field.to_json(self.get(a, b))).collect()))
                .collect(),
        )
    }
}

/// Number of elements of `GL(n, F_q)`.
pub fn gl_order(n: usize, q: u64) -> u128 {
    let qn = (q as u128).pow(n as u32);
    (0..n as u32).map(|i| qn - (q as u128).pow(i)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_det_and_code() {
        let f = Field::new(3, 2).unwrap();
        let d = 3;
        let mut count = 0;
        for code in (0..(f.q() as u64).pow(9)).step_by(7919) {
            let m = Mat::from_code(&f, d, code);
            assert_eq!(m.code(f.q()), code);
            match m.inverse(&f) {
                Some(inv) => {
                    count += 1;
                    assert!(m.is_invertible(&f));
                    assert_eq!(m.mul(&f, &inv), Mat::identity(&f, d));
                    assert_eq!(f.mul(m.det(&f), inv.det(&f)), f.one());
                }
                None => assert!(m.det(&f).is_zero()),
            }
        }
        assert!(count > 0);
    }

    #[test]
    fn gl_orders() {
        assert_eq!(gl_order(2, 2), 6);
        assert_eq!(gl_order(2, 3), 48);
        assert_eq!(gl_order(3, 2), 168);
        assert_eq!(gl_order(1, 4), 3);
        for q in [2u64, 3] {
            let f = Field::of_order(q as u32).unwrap();
            let n = (0..q.pow(4)).filter(|&c| Mat::from_code(&f, 2, c).is_invertible(&f)).count();
            assert_eq!(n as u128, gl_order(2, q));
        }
    }
}
