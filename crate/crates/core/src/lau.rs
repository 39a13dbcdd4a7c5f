//! The `p`-semilinear map `phi` on `g_1 (x) F_q` attached to a display
//! point, and its isomorphism invariants.

use serde_json::{json, Value};

use crate::field::{Field, FqElem};
use crate::fzip::{DisplayPoint, OrbitReport};
use crate::groupdata::GradedGroupData;
use crate::linalg::Matrix;
use crate::matrix::Mat;

/// `phi(sum c_e e) = sum c_e^p (Phi e)`; column `e` of `phi` is the image of
/// the basis vector `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearMap {
    pub field: Field,
    pub basis: Vec<String>,
    pub phi: Mat,
}

/// How the middle isomorphism acts on `g`: `Ad(x)` or `Ad(x^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdDirection {
    Forward,
    Inverse,
}

pub const DIRECTION: AdDirection = AdDirection::Forward;

impl SemilinearMap {
    pub fn new(field: &Field, basis: Vec<String>, phi: Mat) -> SemilinearMap {
        assert_eq!(basis.len(), phi.dim());
        SemilinearMap { field: field.clone(), basis, phi }
    }

    pub fn identity(field: &Field, n: usize) -> SemilinearMap {
        SemilinearMap::new(field, (0..n).map(|i| format!("e{i}")).collect(), Mat::identity(field, n))
    }

    pub fn zero(field: &Field, n: usize) -> SemilinearMap {
        SemilinearMap::new(field, (0..n).map(|i| format!("e{i}")).collect(), Mat::zero(n))
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn apply(&self, v: &[FqElem]) -> Vec<FqElem> {
        let f = &self.field;
        let n = self.dim();
        (0..n)
            .map(|a| (0..n).fold(f.zero(), |acc, b| f.add(acc, f.mul(self.phi.get(a, b), f.frobenius(v[b])))))
            .collect()
    }

    /// Matrix `Phi_k` with `phi^k(v) = Phi_k Fr^k(v)`.
    pub fn power_matrix(&self, k: u32) -> Mat {
        let f = &self.field;
        let mut acc = Mat::identity(f, self.dim());
        for _ in 0..k {
            acc = self.phi.mul(f, &acc.frobenius(f));
        }
        acc
    }

    /// Matrix of `self o other`, which acts through `Fr^2`.
    pub fn compose_matrix(&self, other: &SemilinearMap) -> Mat {
        let f = &self.field;
        self.phi.mul(f, &other.phi.frobenius(f))
    }

    /// Dimension over `F_p` of `{v : phi(v) = v}`.
    pub fn fixed_space_dim(&self) -> usize {
        let f = &self.field;
        let fp = Field::prime(f.p()).expect("prime field");
        let (n, k) = (self.dim(), f.k() as usize);
        let basis = f.power_basis();
        let mut m = Matrix::zeros(n * k, n * k);
        for b in 0..n {
            for (j, &t) in basis.iter().enumerate() {
                let mut v = vec![f.zero(); n];
                v[b] = t;
                let img = self.apply(&v);
                for a in 0..n {
                    let diff = f.sub(img[a], v[a]);
                    for (i, c) in f.coeffs(diff).into_iter().enumerate() {
                        m.set(a * k + i, b * k + j, fp.from_int(c as i64));
                    }
                }
            }
        }
        n * k - m.rank(&fp)
    }

    pub fn is_bijective(&self) -> bool {
        self.phi.is_invertible(&self.field)
    }

    pub fn to_json(&self) -> Value {
        json!({ "basis": self.basis, "phi": self.phi.to_json(&self.field) })
    }
}

fn rank(field: &Field, m: &Mat) -> usize {
    let n = m.dim();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, m.get(i, j));
        }
    }
    a.rank(field)
}

pub fn g1_basis_names(ggd: &GradedGroupData) -> Vec<String> {
    ggd.g1().iter().map(|&(a, b)| format!("E{}{}", a + 1, b + 1)).collect()
}

/// `phi(v) = pr_{g_1}(Ad(x) Fr(v))` in the matrix-unit basis of `g_1`.
pub fn phi_at(ggd: &GradedGroupData, field: &Field, pt: &DisplayPoint) -> SemilinearMap {
    phi_at_direction(ggd, field, &pt.x, DIRECTION)
}

pub fn phi_at_direction(ggd: &GradedGroupData, field: &Field, x: &Mat, dir: AdDirection) -> SemilinearMap {
    let xinv = x.inverse(field).expect("display point must be invertible");
    let (l, r) = match dir {
        AdDirection::Forward => (x, &xinv),
        AdDirection::Inverse => (&xinv, x),
    };
    let d = ggd.d();
    let n = ggd.dim(1);
    let mut phi = Mat::zero(n);
    for (col, &(a, b)) in ggd.g1().iter().enumerate() {
        let img = l.mul(field, &Mat::unit(d, a, b, field.one())).mul(field, r);
        for (row, c) in ggd.g1_coords(&img).into_iter().enumerate() {
            phi.set(row, col, c);
        }
    }
    SemilinearMap::new(field, g1_basis_names(ggd), phi)
}

/// Matrix of `Ad(m)` on `g_1` for `m` in `M`.
pub fn levi_action(ggd: &GradedGroupData, field: &Field, m: &Mat) -> Mat {
    let minv = m.inverse(field).expect("Levi element must be invertible");
    let d = ggd.d();
    let n = ggd.dim(1);
    let mut out = Mat::zero(n);
    for (col, &(a, b)) in ggd.g1().iter().enumerate() {
        let img = m.mul(field, &Mat::unit(d, a, b, field.one())).mul(field, &minv);
        for (row, c) in ggd.g1_coords(&img).into_iter().enumerate() {
            out.set(row, col, c);
        }
    }
    out
}

/// `A Phi Fr(A)^{-1}`: the map `Ad(m) o phi o Ad(m)^{-1}` for `A = Ad(m)`.
pub fn twisted_conjugate(field: &Field, a: &Mat, m: &SemilinearMap) -> SemilinearMap {
    let fa_inv = a.frobenius(field).inverse(field).expect("invertible");
    SemilinearMap::new(field, m.basis.clone(), a.mul(field, &m.phi).mul(field, &fa_inv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LauInvariants {
    pub order_exponent: usize,
    pub mult_rank: usize,
    pub nilpotent_dim: usize,
    pub nilpotency_index: u32,
}

impl LauInvariants {
    pub fn to_json(&self) -> Value {
        json!({
            "order_exponent": self.order_exponent,
            "mult_rank": self.mult_rank,
            "nilpotent_dim": self.nilpotent_dim,
            "nilpotency_index": self.nilpotency_index,
        })
    }
}

pub fn lau_invariants(m: &SemilinearMap) -> LauInvariants {
    let n = m.dim();
    let mut ranks = vec![n];
    let mut k = 0u32;
    loop {
        k += 1;
        let r = rank(&m.field, &m.power_matrix(k));
        let prev = *ranks.last().unwrap();
        ranks.push(r);
        if r == prev {
            break;
        }
    }
    let stable = *ranks.last().unwrap();
    let index = ranks.iter().position(|&r| r == stable).unwrap() as u32;
    LauInvariants { order_exponent: n, mult_rank: stable, nilpotent_dim: n - stable, nilpotency_index: index }
}

/// Invariants of `phi` at each orbit representative.
pub fn lau_table(ggd: &GradedGroupData, report: &OrbitReport) -> Vec<(Mat, LauInvariants)> {
    report
        .classes
        .iter()
        .map(|c| (c.rep.clone(), lau_invariants(&phi_at(ggd, &report.field, &DisplayPoint { x: c.rep.clone() }))))
        .collect()
}
