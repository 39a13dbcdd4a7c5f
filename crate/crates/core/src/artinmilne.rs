//! Bounded-degree model of `C~ - phi~` on `V`-valued closed 1-forms, its
//! kernel, and the surjectivity of the linear part `C~`.
//!
//! A `V`-valued form is stored by its coordinates `omega = sum_e e (x) omega_e`.
//! `phi~` sends it to `sum_e phi(e) (x) omega_e`, where `phi(e)` may have
//! polynomial coordinates; `C~` applies the Cartier operator to each `omega_e`.
//! Both are additive, and `F_p`-linear after flattening `F_q` over its power
//! basis.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Field, FqElem};
use crate::lau::SemilinearMap;
use crate::linalg::Matrix;
use crate::poly::{cartier, closed_form_basis, d0, Exponent, MPoly, OneForm, PolyMatrix, PolyRing};

/// A 1-form with values in a space with a fixed basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuedForm {
    ring: PolyRing,
    comps: Vec<OneForm>,
}

impl ValuedForm {
    pub fn new(ring: &PolyRing, comps: Vec<OneForm>) -> ValuedForm {
        ValuedForm { ring: ring.clone(), comps }
    }

    pub fn zero(ring: &PolyRing, m: usize) -> ValuedForm {
        ValuedForm::new(ring, vec![OneForm::zero(ring); m])
    }

    /// `e_k (x) w`.
    pub fn basic(ring: &PolyRing, m: usize, k: usize, w: OneForm) -> ValuedForm {
        let mut out = ValuedForm::zero(ring, m);
        out.comps[k] = w;
        out
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[OneForm] {
        &self.comps
    }

    pub fn comp(&self, k: usize) -> &OneForm {
        &self.comps[k]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(OneForm::is_zero)
    }

    pub fn is_closed(&self) -> bool {
        self.comps.iter().all(OneForm::is_closed)
    }

    pub fn fits_bound(&self, bound: u32) -> bool {
        self.comps.iter().all(|w| w.fits_bound(bound))
    }

    pub fn add(&self, other: &ValuedForm) -> ValuedForm {
        ValuedForm::new(&self.ring, self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ValuedForm) -> ValuedForm {
        ValuedForm::new(&self.ring, self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> ValuedForm {
        ValuedForm::new(&self.ring, self.comps.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, c: FqElem) -> ValuedForm {
        ValuedForm::new(&self.ring, self.comps.iter().map(|a| a.scale(c)).collect())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(OneForm::to_json).collect())
    }

    pub fn from_json(ring: &PolyRing, v: &Value) -> Result<ValuedForm> {
        let arr = v.as_array().ok_or_else(|| Error::Invalid(format!("valued form must be an array, got {v}")))?;
        Ok(ValuedForm::new(ring, arr.iter().map(|w| OneForm::from_json(ring, w)).collect::<Result<_>>()?))
    }
}

/// The value space with its `p`-operation: column `e` of `phi` holds the
/// coordinates of `phi(e)`, possibly polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueDatum {
    pub basis: Vec<String>,
    pub phi: PolyMatrix,
}

impl ValueDatum {
    pub fn from_semilinear(ring: &PolyRing, m: &SemilinearMap) -> ValueDatum {
        ValueDatum { basis: m.basis.clone(), phi: PolyMatrix::from_constant(ring, &m.phi) }
    }

    /// `V = F_q`, `phi = 0`.
    pub fn alpha_p(ring: &PolyRing) -> ValueDatum {
        ValueDatum::from_semilinear(ring, &SemilinearMap::zero(ring.field(), 1))
    }

    /// `V = F_q`, `phi = Fr`.
    pub fn mu_p(ring: &PolyRing) -> ValueDatum {
        ValueDatum::from_semilinear(ring, &SemilinearMap::identity(ring.field(), 1))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn phi_tilde(datum: &ValueDatum, w: &ValuedForm) -> ValuedForm {
    let ring = w.ring();
    let m = datum.dim();
    let n = ring.nvars();
    let comps = (0..m)
        .map(|a| {
            let c = (0..n)
                .map(|i| {
                    (0..m).fold(MPoly::zero(ring), |acc, e| {
                        let f = datum.phi.get(a, e);
                        if f.is_zero() { acc } else { &acc + &(f * w.comp(e).comp(i)) }
                    })
                })
                .collect();
            OneForm::new(ring, c).expect("component count")
        })
        .collect();
    ValuedForm::new(ring, comps)
}

pub fn c_tilde(w: &ValuedForm) -> Result<ValuedForm> {
    Ok(ValuedForm::new(w.ring(), w.comps.iter().map(cartier).collect::<Result<_>>()?))
}

/// `C~ w = phi~ w` for a closed `w`.
pub fn in_kernel(datum: &ValueDatum, w: &ValuedForm) -> Result<bool> {
    Ok(c_tilde(w)? == phi_tilde(datum, w))
}

/// `V`-valued closed forms with coefficients within `domain_bound`, mapped
/// towards forms within `target_bound`.
#[derive(Debug, Clone)]
pub struct FormSpace {
    pub ring: PolyRing,
    pub datum: ValueDatum,
    pub domain_bound: u32,
    pub target_bound: u32,
    closed: Vec<OneForm>,
}

impl FormSpace {
    /// Domain bound `pD + p - 1`, the least one whose image under `C` covers
    /// every target of degree `<= D`.
    pub fn new(ring: &PolyRing, datum: ValueDatum, target_bound: u32) -> FormSpace {
        let p = ring.p();
        FormSpace::with_bounds(ring, datum, p * target_bound + p - 1, target_bound)
    }

    pub fn with_bounds(ring: &PolyRing, datum: ValueDatum, domain_bound: u32, target_bound: u32) -> FormSpace {
        let closed = closed_form_basis(ring, domain_bound);
        FormSpace { ring: ring.clone(), datum, domain_bound, target_bound, closed }
    }

    /// `F_q`-basis of the scalar closed forms in the domain.
    pub fn closed_basis(&self) -> &[OneForm] {
        &self.closed
    }

    /// `F_p`-basis `t^j * e (x) beta` of the domain.
    pub fn fp_basis(&self) -> Vec<ValuedForm> {
        let m = self.datum.dim();
        let field = self.ring.field();
        let mut out = Vec::with_capacity(self.closed.len() * m * field.k() as usize);
        for beta in &self.closed {
            for e in 0..m {
                for t in field.power_basis() {
                    out.push(ValuedForm::basic(&self.ring, m, e, beta.scale(t)));
                }
            }
        }
        out
    }

    pub fn fp_dim(&self) -> usize {
        self.closed.len() * self.datum.dim() * self.ring.field().k() as usize
    }

    /// Every target basis form `t^j * e (x) x^a dx_i` within the target bound.
    pub fn target_basis(&self) -> Vec<ValuedForm> {
        let m = self.datum.dim();
        let field = self.ring.field();
        let mut out = Vec::new();
        for e in 0..m {
            for i in 0..self.ring.nvars() {
                for a in self.ring.monomials(self.target_bound) {
                    for t in field.power_basis() {
                        let w = OneForm::basic(&self.ring, i, MPoly::monomial(&self.ring, a.clone(), t));
                        out.push(ValuedForm::basic(&self.ring, m, e, w));
                    }
                }
            }
        }
        out
    }
}

type CoordKey = (usize, usize, Exponent, usize);

/// Flattens valued forms into `F_p` coordinate vectors, numbering
/// coordinates in order of first appearance.
#[derive(Debug, Default)]
struct Flattener {
    index: BTreeMap<CoordKey, usize>,
}

impl Flattener {
    fn flatten(&mut self, field: &Field, w: &ValuedForm) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (e, form) in w.comps.iter().enumerate() {
            for (i, f) in form.comps().iter().enumerate() {
                for (mono, c) in f.terms() {
                    for (j, v) in field.coeffs(c).into_iter().enumerate() {
                        if v == 0 {
                            continue;
                        }
                        let next = self.index.len();
                        let r = *self.index.entry((e, i, mono.clone(), j)).or_insert(next);
                        out.push((r, v));
                    }
                }
            }
        }
        out
    }

    fn matrix(&self, fp: &Field, cols: &[Vec<(usize, u32)>]) -> Matrix {
        let mut a = Matrix::zeros(self.index.len(), cols.len());
        for (j, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                a.set(r, j, fp.from_int(v as i64));
            }
        }
        a
    }
}

/// Matrices of `C~` and `phi~` over `F_p` on the basis `domain`, with rows
/// indexed by a common coordinate set.
#[derive(Debug, Clone)]
pub struct Operators {
    pub domain: Vec<ValuedForm>,
    pub c: Matrix,
    pub phi: Matrix,
}

pub fn build_operators(fs: &FormSpace) -> Result<Operators> {
    let field = fs.ring.field();
    let fp = Field::prime(field.p())?;
    let domain = fs.fp_basis();
    if fs.datum.phi.dim() != fs.datum.dim() || fs.datum.phi.ring() != &fs.ring {
        return Err(Error::DimensionMismatch("value datum does not match the form space".into()));
    }
    let mut flat = Flattener::default();
    let mut c_cols = Vec::with_capacity(domain.len());
    let mut phi_cols = Vec::with_capacity(domain.len());
    for b in &domain {
        c_cols.push(flat.flatten(field, &c_tilde(b)?));
        phi_cols.push(flat.flatten(field, &phi_tilde(&fs.datum, b)));
    }
    Ok(Operators { c: flat.matrix(&fp, &c_cols), phi: flat.matrix(&fp, &phi_cols), domain })
}

/// `F_p`-basis of `{w closed in the domain : C~ w = phi~ w}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSpace {
    pub basis: Vec<ValuedForm>,
}

impl KernelSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Every `F_p`-combination of the basis, in lexicographic order of
    /// coefficient vectors.
    pub fn elements(&self, ring: &PolyRing, m: usize) -> Vec<ValuedForm> {
        let field = ring.field();
        let p = field.p() as usize;
        let mut out = vec![ValuedForm::zero(ring, m)];
        for b in self.basis.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * p);
            for c in 0..p {
                let scaled = b.scale(field.from_int(c as i64));
                next.extend(out.iter().map(|w| scaled.add(w)));
            }
            out = next;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "dim": self.basis.len(), "basis": self.basis.iter().map(ValuedForm::to_json).collect::<Vec<_>>() })
    }
}

pub fn kernel_a(fs: &FormSpace) -> Result<KernelSpace> {
    let ops = build_operators(fs)?;
    let fp = Field::prime(fs.ring.p())?;
    let diff = ops.c.sub(&fp, &ops.phi);
    let field = fs.ring.field();
    let m = fs.datum.dim();
    let basis = diff
        .nullspace(&fp)
        .into_iter()
        .map(|v| {
            v.iter().zip(&ops.domain).filter(|(c, _)| !c.is_zero()).fold(ValuedForm::zero(&fs.ring, m), |acc, (c, b)| {
                acc.add(&b.scale(field.from_int(c.index() as i64)))
            })
        })
        .collect();
    Ok(KernelSpace { basis })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectivityReport {
    pub surjective: bool,
    pub image_rank: usize,
    pub target_dim: usize,
    /// A target basis form outside the image, when not surjective.
    pub certificate: Option<ValuedForm>,
}

impl SurjectivityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "surjective": self.surjective,
            "image_rank": self.image_rank,
            "target_dim": self.target_dim,
            "certificate": self.certificate.as_ref().map(ValuedForm::to_json),
        })
    }
}

/// Whether `C~` maps the domain onto every form within the target bound.
pub fn check_linearization_surjective(fs: &FormSpace) -> Result<SurjectivityReport> {
    let field = fs.ring.field();
    let fp = Field::prime(field.p())?;
    let mut flat = Flattener::default();
    let targets = fs.target_basis();
    let target_cols: Vec<_> = targets.iter().map(|t| flat.flatten(field, t)).collect();
    let image_cols =
        fs.fp_basis().iter().map(|b| Ok(flat.flatten(field, &c_tilde(b)?))).collect::<Result<Vec<_>>>()?;
    let image = flat.matrix(&fp, &image_cols);
    let image_rank = image.rank(&fp);
    let rows = flat.index.len();
    let mut certificate = None;
    for (t, col) in targets.iter().zip(&target_cols) {
        let mut b = vec![fp.zero(); rows];
        for &(r, v) in col {
            b[r] = fp.from_int(v as i64);
        }
        if image.solve(&fp, &b).is_none() {
            certificate = Some(t.clone());
            break;
        }
    }
    Ok(SurjectivityReport { surjective: certificate.is_none(), image_rank, target_dim: targets.len(), certificate })
}

/// `da` as a form valued in the one-dimensional space.
pub fn alpha_p_image(a: &MPoly) -> ValuedForm {
    ValuedForm::new(a.ring(), vec![d0(a)])
}

/// `dlog(c x^k) = k dx / x` on the Laurent chart.
pub fn mu_p_image(ring: &PolyRing, c: FqElem, k: i32) -> Result<ValuedForm> {
    if !ring.is_laurent() {
        return Err(Error::Invalid("dlog of a non-constant unit needs the Laurent chart".into()));
    }
    if c.is_zero() {
        return Err(Error::NotInvertible);
    }
    let field = ring.field();
    let w = OneForm::basic(ring, 0, MPoly::monomial(ring, vec![-1], field.from_int(k as i64)));
    Ok(ValuedForm::new(ring, vec![w]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::exact_primitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_p_kernel_is_exact_forms() {
        for (p, k) in [(2, 1), (3, 1), (2, 2)] {
            let ring = PolyRing::new(Field::new(p, k).unwrap(), 1);
            let fs = FormSpace::with_bounds(&ring, ValueDatum::alpha_p(&ring), 3, 3);
            let ker = kernel_a(&fs).unwrap();
            for w in &ker.basis {
                assert!(exact_primitive(w.comp(0), 3).is_some(), "{w:?}");
            }
            // exact forms within degree 3: d(x^j), j = 1..4, j not divisible by p,
            // over F_q and thus with k * #j dimensions over F_p
            let exact = (1..=4).filter(|j| j % p != 0).count() * k as usize;
            assert_eq!(ker.dim(), exact);
        }
    }

    #[test]
    fn mu_p_dlog_in_kernel() {
        let ring = PolyRing::laurent(Field::prime(3).unwrap());
        let datum = ValueDatum::mu_p(&ring);
        for k in -4..=4 {
            for c in 1..3 {
                let w = mu_p_image(&ring, ring.field().from_int(c), k).unwrap();
                assert!(in_kernel(&datum, &w).unwrap());
            }
        }
        let fs = FormSpace::with_bounds(&ring, datum, 3, 3);
        let ker = kernel_a(&fs).unwrap();
        assert!(ker.basis.iter().any(|w| *w == mu_p_image(&ring, ring.field().one(), 1).unwrap()));
        assert!(mu_p_image(&PolyRing::new(Field::prime(3).unwrap(), 1), ring.field().one(), 1).is_err());
    }

    #[test]
    fn operator_examples() {
        let ring = PolyRing::new(Field::prime(2).unwrap(), 1);
        let dx = ValuedForm::new(&ring, vec![OneForm::basic(&ring, 0, MPoly::one(&ring))]);
        assert!(c_tilde(&dx).unwrap().is_zero());
        assert!(phi_tilde(&ValueDatum::alpha_p(&ring), &dx).is_zero());
        let lring = PolyRing::laurent(Field::prime(5).unwrap());
        let f = lring.field();
        for k in 0..5 {
            let w = mu_p_image(&lring, f.one(), k).unwrap();
            assert_eq!(phi_tilde(&ValueDatum::mu_p(&lring), &w), w);
        }
        let ops = build_operators(&FormSpace::new(&ring, ValueDatum::alpha_p(&ring), 1)).unwrap();
        assert_eq!(ops.domain.len(), 4);
        assert_eq!(ops.phi.rank(&Field::prime(2).unwrap()), 0);
    }

    #[test]
    fn surjectivity() {
        for q in [2, 4] {
            for d in 0..=4 {
                let ring = PolyRing::new(Field::of_order(q).unwrap(), 1);
                let rep = check_linearization_surjective(&FormSpace::new(&ring, ValueDatum::mu_p(&ring), d)).unwrap();
                assert!(rep.surjective, "q={q} D={d}");
            }
        }
        for d in 0..=2 {
            let ring = PolyRing::new(Field::prime(2).unwrap(), 2);
            assert!(check_linearization_surjective(&FormSpace::new(&ring, ValueDatum::mu_p(&ring), d)).unwrap().surjective);
        }
        let ring = PolyRing::new(Field::prime(2).unwrap(), 1);
        let rep = check_linearization_surjective(&FormSpace::with_bounds(&ring, ValueDatum::mu_p(&ring), 4, 3)).unwrap();
        assert!(!rep.surjective);
        let cert = rep.certificate.unwrap();
        assert_eq!(cert.comp(0).comp(0).degree(), Some(2));
    }

    #[test]
    fn random_alpha_p_images_in_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, k) in [(2, 1), (2, 2), (3, 1), (5, 1)] {
            let ring = PolyRing::new(Field::new(p, k).unwrap(), 2);
            let datum = ValueDatum::alpha_p(&ring);
            for _ in 0..20 {
                let a = MPoly::random(&ring, rng.gen_range(0..8), 0.5, &mut rng);
                assert!(in_kernel(&datum, &alpha_p_image(&a)).unwrap());
            }
        }
    }

    #[test]
    fn kernel_elements_enumerate_span() {
        let ring = PolyRing::new(Field::prime(3).unwrap(), 1);
        let fs = FormSpace::with_bounds(&ring, ValueDatum::alpha_p(&ring), 4, 4);
        let ker = kernel_a(&fs).unwrap();
        let all = ker.elements(&ring, 1);
        assert_eq!(all.len(), 3usize.pow(ker.dim() as u32));
        for w in &all {
            assert!(in_kernel(&fs.datum, w).unwrap());
        }
    }
}
