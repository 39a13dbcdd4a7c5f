//! Connections `d + omega` with `g_1`-valued `omega` on a trivialized chart:
//! the Kodaira-Spencer form, p-curvature by literal operator powers, the Katz
//! condition `pCurv = -KS`, and the brute-force solution sets.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::artinmilne::{in_kernel, kernel_a, FormSpace, ValueDatum, ValuedForm};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::groupdata::{grading, Cochar, GradedGroupData};
use crate::lau::g1_basis_names;
use crate::matrix::Mat;
use crate::poly::{cartier, closed_form_basis, MPoly, OneForm, PolyMatrix, PolyRing};

/// Which frame the connection form is gauge-transformed by: the chart `X`
/// itself, or `X^{-1}` (the opposite matrix convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    Standard,
    Flipped,
}

impl SignConvention {
    pub fn parse(s: &str) -> Result<SignConvention> {
        match s {
            "standard" => Ok(SignConvention::Standard),
            "flipped" => Ok(SignConvention::Flipped),
            _ => Err(Error::Invalid(format!("unknown sign convention {s:?} (expected standard or flipped)"))),
        }
    }
}

/// `sum_i A_i dx_i` with `A_i` a `d x d` matrix over `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatForm {
    ring: PolyRing,
    d: usize,
    comps: Vec<PolyMatrix>,
}

pub type ConnectionForm = MatForm;
pub type GOneForm = MatForm;

impl MatForm {
    pub fn zero(ring: &PolyRing, d: usize) -> MatForm {
        MatForm { ring: ring.clone(), d, comps: vec![PolyMatrix::zero(ring, d); ring.nvars()] }
    }

    pub fn new(ring: &PolyRing, d: usize, comps: Vec<PolyMatrix>) -> Result<MatForm> {
        if comps.len() != ring.nvars() {
            return Err(Error::DimensionMismatch(format!("{} components for {} variables", comps.len(), ring.nvars())));
        }
        if comps.iter().any(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch(format!("components must be {d}x{d}")));
        }
        Ok(MatForm { ring: ring.clone(), d, comps })
    }

    /// `f E_ab dx_i`.
    pub fn basic(ring: &PolyRing, d: usize, i: usize, a: usize, b: usize, f: MPoly) -> MatForm {
        let mut w = MatForm::zero(ring, d);
        w.comps[i] = PolyMatrix::unit(ring, d, a, b, f);
        w
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn comps(&self) -> &[PolyMatrix] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &PolyMatrix {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(PolyMatrix::is_zero)
    }

    fn zip(&self, other: &MatForm, f: impl Fn(&PolyMatrix, &PolyMatrix) -> PolyMatrix) -> MatForm {
        MatForm { ring: self.ring.clone(), d: self.d, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &MatForm) -> MatForm {
        self.zip(other, PolyMatrix::add)
    }

    pub fn sub(&self, other: &MatForm) -> MatForm {
        self.zip(other, PolyMatrix::sub)
    }

    pub fn neg(&self) -> MatForm {
        MatForm { ring: self.ring.clone(), d: self.d, comps: self.comps.iter().map(PolyMatrix::neg).collect() }
    }

    pub fn scale(&self, c: crate::field::FqElem) -> MatForm {
        MatForm { ring: self.ring.clone(), d: self.d, comps: self.comps.iter().map(|m| m.map(|f| f.scale(c))).collect() }
    }

    /// The scalar 1-form in matrix position `(a, b)`.
    pub fn entry(&self, a: usize, b: usize) -> OneForm {
        OneForm::new(&self.ring, self.comps.iter().map(|m| m.get(a, b).clone()).collect()).expect("component count")
    }

    pub fn in_g1(&self, ggd: &GradedGroupData) -> bool {
        self.comps.iter().all(|m| m.support().all(|(a, b)| ggd.weight(a, b) == 1))
    }

    /// Entrywise `d omega = 0`.
    pub fn is_closed(&self) -> bool {
        (0..self.d).all(|a| (0..self.d).all(|b| self.entry(a, b).is_closed()))
    }

    pub fn fits_bound(&self, bound: u32) -> bool {
        self.comps.iter().all(|m| m.support().all(|(a, b)| m.get(a, b).fits_bound(bound)))
    }

    pub fn project_g1(&self, ggd: &GradedGroupData) -> MatForm {
        MatForm {
            ring: self.ring.clone(),
            d: self.d,
            comps: self.comps.iter().map(|m| project_g1(ggd, m)).collect(),
        }
    }

    /// Coordinates in the matrix-unit basis of `g_1`.
    pub fn to_valued(&self, ggd: &GradedGroupData) -> Result<ValuedForm> {
        if !self.in_g1(ggd) {
            return Err(Error::NotInG1);
        }
        Ok(ValuedForm::new(&self.ring, ggd.g1().iter().map(|&(a, b)| self.entry(a, b)).collect()))
    }

    pub fn from_valued(ggd: &GradedGroupData, w: &ValuedForm) -> MatForm {
        let ring = w.ring();
        let mut out = MatForm::zero(ring, ggd.d());
        for (k, &(a, b)) in ggd.g1().iter().enumerate() {
            for i in 0..ring.nvars() {
                out.comps[i].set(a, b, w.comp(k).comp(i).clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(PolyMatrix::to_json).collect())
    }

    pub fn from_json(ring: &PolyRing, d: usize, v: &Value) -> Result<MatForm> {
        let arr = v.as_array().ok_or_else(|| Error::Invalid("form must be an array of matrices".into()))?;
        let comps = arr.iter().map(|m| PolyMatrix::from_json(ring, m)).collect::<Result<Vec<_>>>()?;
        MatForm::new(ring, d, comps)
    }
}

pub fn project_g1(ggd: &GradedGroupData, m: &PolyMatrix) -> PolyMatrix {
    let mut out = PolyMatrix::zero(m.ring(), m.dim());
    for &(a, b) in ggd.g1() {
        out.set(a, b, m.get(a, b).clone());
    }
    out
}

/// A chart matrix `X in GL(d, R)` with its grading data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyChart {
    ring: PolyRing,
    ggd: GradedGroupData,
    x: PolyMatrix,
    convention: SignConvention,
    frame: PolyMatrix,
    frame_inv: PolyMatrix,
}

impl PolyChart {
    pub fn new(ring: &PolyRing, ggd: &GradedGroupData, x: PolyMatrix, convention: SignConvention) -> Result<PolyChart> {
        if x.dim() != ggd.d() {
            return Err(Error::DimensionMismatch(format!("chart is {0}x{0}, cocharacter has d = {1}", x.dim(), ggd.d())));
        }
        let xinv = x.inverse()?;
        let (frame, frame_inv) = match convention {
            SignConvention::Standard => (x.clone(), xinv),
            SignConvention::Flipped => (xinv, x.clone()),
        };
        Ok(PolyChart { ring: ring.clone(), ggd: ggd.clone(), x, convention, frame, frame_inv })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn ggd(&self) -> &GradedGroupData {
        &self.ggd
    }

    pub fn x(&self) -> &PolyMatrix {
        &self.x
    }

    pub fn d(&self) -> usize {
        self.ggd.d()
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    pub fn with_convention(&self, convention: SignConvention) -> PolyChart {
        PolyChart::new(&self.ring, &self.ggd, self.x.clone(), convention).expect("already validated")
    }

    /// `Ad(Y^{-1})` for the frame `Y`.
    fn conj(&self, m: &PolyMatrix) -> PolyMatrix {
        self.frame_inv.mul(m).mul(&self.frame)
    }

    /// Column `e` holds the `g_1` coordinates of `pr(Y^{-1} E_e Y)`.
    pub fn phi_matrix(&self) -> PolyMatrix {
        let ring = &self.ring;
        let g1 = self.ggd.g1();
        let mut out = PolyMatrix::zero(ring, g1.len());
        for (col, &(a, b)) in g1.iter().enumerate() {
            let img = self.conj(&PolyMatrix::unit(ring, self.d(), a, b, MPoly::one(ring)));
            for (row, &(r, s)) in g1.iter().enumerate() {
                out.set(row, col, img.get(r, s).clone());
            }
        }
        out
    }

    pub fn value_datum(&self) -> ValueDatum {
        ValueDatum { basis: g1_basis_names(&self.ggd), phi: self.phi_matrix() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.ring.field().spec(),
            "n": self.ring.nvars(),
            "laurent": self.ring.is_laurent(),
            "d": self.d(),
            "w": self.ggd.cochar().w,
            "X": self.x.to_json(),
        })
    }

    /// `{field, n, d, w, X}` with optional `laurent`; `w` defaults to the
    /// normal form given `dprime`.
    pub fn from_json(v: &Value, convention: SignConvention) -> Result<PolyChart> {
        let bad = |what: &str| Error::Invalid(format!("chart: {what}"));
        let field = Field::from_json(v.get("field").ok_or_else(|| bad("missing field"))?)?;
        let laurent = v.get("laurent").and_then(Value::as_bool).unwrap_or(false);
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing n"))? as usize;
        let ring = if laurent {
            if n != 1 {
                return Err(bad("the Laurent chart has exactly one variable"));
            }
            PolyRing::laurent(field)
        } else {
            PolyRing::new(field, n)
        };
        let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| bad("missing d"))? as usize;
        let cochar = match (v.get("w"), v.get("dprime")) {
            (Some(w), _) => Cochar::new(serde_json::from_value(w.clone()).map_err(|e| bad(&format!("bad w: {e}")))?),
            (None, Some(dp)) => Cochar::normal_form(d, dp.as_u64().ok_or_else(|| bad("bad dprime"))? as usize)?,
            (None, None) => return Err(bad("missing w")),
        };
        if cochar.d != d {
            return Err(bad("length of w differs from d"));
        }
        let ggd = grading(&cochar)?;
        let x = PolyMatrix::from_json(&ring, v.get("X").ok_or_else(|| bad("missing X"))?)?;
        PolyChart::new(&ring, &ggd, x, convention)
    }
}

/// `pr_{g_1}(Y^{-1} dY + Y^{-1} omega Y)`.
pub fn ks_form(chart: &PolyChart, omega: &MatForm) -> MatForm {
    let comps = (0..chart.ring.nvars())
        .map(|i| {
            let gauge = chart.frame_inv.mul(&chart.frame.derivative(i)).add(&chart.conj(omega.comp(i)));
            project_g1(&chart.ggd, &gauge)
        })
        .collect();
    MatForm { ring: chart.ring.clone(), d: chart.d(), comps }
}

/// `pr_{g_1}(Y^{-1} dY)`, the Kodaira-Spencer form of `omega = 0`.
pub fn ks_base(chart: &PolyChart) -> MatForm {
    ks_form(chart, &MatForm::zero(&chart.ring, chart.d()))
}

/// `delta -> pr_{g_1}(Y^{-1} delta Y)` on `g_1`-valued forms.
pub fn phi_tilde_chart(chart: &PolyChart, delta: &MatForm) -> MatForm {
    let comps = delta.comps.iter().map(|m| project_g1(&chart.ggd, &chart.conj(m))).collect();
    MatForm { ring: chart.ring.clone(), d: chart.d(), comps }
}

/// Entrywise Cartier operator.
pub fn c_tilde_form(delta: &MatForm) -> Result<MatForm> {
    let ring = &delta.ring;
    let d = delta.d;
    let mut out = MatForm::zero(ring, d);
    for a in 0..d {
        for b in 0..d {
            let e = delta.entry(a, b);
            if e.is_zero() {
                continue;
            }
            let c = cartier(&e)?;
            for i in 0..ring.nvars() {
                out.comps[i].set(a, b, c.comp(i).clone());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PCurvature {
    /// Columns of `(d_i + A_i)^p` on the standard basis.
    pub raw: MatForm,
    /// Entrywise `p`-th roots of `raw`.
    pub untwisted: MatForm,
}

fn apply_connection(i: usize, a: &PolyMatrix, v: &[MPoly]) -> Vec<MPoly> {
    let av = a.mul_vec(v);
    v.iter().zip(av).map(|(f, g)| &f.derivative(i) + &g).collect()
}

fn connection_power(ring: &PolyRing, i: usize, a: &PolyMatrix, v: Vec<MPoly>) -> Vec<MPoly> {
    (0..ring.p()).fold(v, |acc, _| apply_connection(i, a, &acc))
}

/// p-curvature of `d + omega` by expanding `(d_i + A_i)^p`, checking that
/// the result is `R`-linear on `x_j e_b`.
pub fn p_curvature(omega: &MatForm) -> Result<PCurvature> {
    if !omega.is_closed() {
        return Err(Error::NotClosed);
    }
    let ring = &omega.ring;
    let d = omega.d;
    let mut raw = MatForm::zero(ring, d);
    for i in 0..ring.nvars() {
        let a = omega.comp(i);
        for b in 0..d {
            let mut e = vec![MPoly::zero(ring); d];
            e[b] = MPoly::one(ring);
            let col = connection_power(ring, i, a, e.clone());
            for j in 0..ring.nvars() {
                let xj = MPoly::var(ring, j);
                let shifted = connection_power(ring, i, a, e.iter().map(|f| f * &xj).collect());
                if shifted.iter().zip(&col).any(|(s, c)| *s != c * &xj) {
                    return Err(Error::NotLinear);
                }
            }
            for (r, f) in col.into_iter().enumerate() {
                raw.comps[i].set(r, b, f);
            }
        }
    }
    let untwisted = MatForm {
        ring: ring.clone(),
        d,
        comps: raw.comps.iter().map(|m| m.try_map(MPoly::pth_root)).collect::<Result<_>>()?,
    };
    Ok(PCurvature { raw, untwisted })
}

/// `d_i^{p-1}(A_i)`, what the p-curvature collapses to on closed `g_1`-valued forms.
pub fn collapse_formula(omega: &MatForm) -> MatForm {
    let p = omega.ring.p();
    MatForm {
        ring: omega.ring.clone(),
        d: omega.d,
        comps: omega.comps.iter().enumerate().map(|(i, m)| m.map(|f| f.derivative_n(i, p - 1))).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatzReport {
    pub g1_valued: bool,
    pub closed: bool,
    pub equation: bool,
    pub ks: Option<MatForm>,
    pub p_curvature: Option<MatForm>,
    /// Untwisted p-curvature plus KS.
    pub residual: Option<MatForm>,
}

impl KatzReport {
    pub fn satisfied(&self) -> bool {
        self.g1_valued && self.closed && self.equation
    }

    pub fn to_json(&self) -> Value {
        json!({
            "satisfied": self.satisfied(),
            "g1_valued": self.g1_valued,
            "closed": self.closed,
            "equation": self.equation,
            "ks": self.ks.as_ref().map(MatForm::to_json),
            "p_curvature": self.p_curvature.as_ref().map(MatForm::to_json),
            "residual": self.residual.as_ref().map(MatForm::to_json),
        })
    }
}

pub fn katz_check(chart: &PolyChart, omega: &MatForm) -> KatzReport {
    let g1_valued = omega.in_g1(&chart.ggd);
    let closed = omega.is_closed();
    let mut report = KatzReport { g1_valued, closed, equation: false, ks: None, p_curvature: None, residual: None };
    if !g1_valued || !closed {
        return report;
    }
    let ks = ks_form(chart, omega);
    let pc = p_curvature(omega).expect("closed g_1-valued input");
    let residual = pc.untwisted.add(&ks);
    report.equation = residual.is_zero();
    report.ks = Some(ks);
    report.p_curvature = Some(pc.untwisted);
    report.residual = Some(residual);
    report
}

/// `F_q`-basis of closed `g_1`-valued forms within `bound`.
pub fn closed_g1_basis(chart: &PolyChart, bound: u32) -> Vec<MatForm> {
    let ring = &chart.ring;
    let mut out = Vec::new();
    for beta in closed_form_basis(ring, bound) {
        for &(a, b) in chart.ggd.g1() {
            let mut w = MatForm::zero(ring, chart.d());
            for i in 0..ring.nvars() {
                w.comps[i].set(a, b, beta.comp(i).clone());
            }
            out.push(w);
        }
    }
    out
}

/// Every closed `g_1`-valued `omega` within `bound` satisfying the Katz
/// condition, in lexicographic order of coordinates.
pub fn brute_force_solve(chart: &PolyChart, bound: u32, limit: u128) -> Result<Vec<MatForm>> {
    let basis = closed_g1_basis(chart, bound);
    let field = chart.ring.field();
    let q = field.q() as u128;
    let size = q.checked_pow(basis.len() as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::SizeLimit { size, limit });
    }
    let zero = MatForm::zero(&chart.ring, chart.d());
    let sols = (0..size as u64)
        .into_par_iter()
        .filter_map(|code| {
            let mut rest = code;
            let mut digits = vec![0usize; basis.len()];
            for slot in digits.iter_mut().rev() {
                *slot = (rest % q as u64) as usize;
                rest /= q as u64;
            }
            let omega = basis
                .iter()
                .zip(&digits)
                .filter(|(_, &c)| c != 0)
                .fold(zero.clone(), |acc, (b, &c)| acc.add(&b.scale(field.elem(c))));
            katz_check(chart, &omega).satisfied().then_some(omega)
        })
        .collect();
    Ok(sols)
}

/// The solution set against `ker(C~ - phi~)` within one degree bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsorReport {
    pub solutions: usize,
    pub kernel_dim: usize,
    pub differences_in_kernel: bool,
    pub closed_under_kernel: bool,
    /// The solutions are exactly one translate of the bounded kernel.
    pub is_translate: bool,
}

impl TorsorReport {
    pub fn passed(&self) -> bool {
        self.solutions > 0 && self.differences_in_kernel && self.closed_under_kernel && self.is_translate
    }

    pub fn to_json(&self) -> Value {
        json!({
            "solutions": self.solutions,
            "kernel_dim": self.kernel_dim,
            "differences_in_kernel": self.differences_in_kernel,
            "closed_under_kernel": self.closed_under_kernel,
            "is_translate": self.is_translate,
        })
    }
}

pub fn torsor_check(chart: &PolyChart, bound: u32, limit: u128) -> Result<TorsorReport> {
    let sols = brute_force_solve(chart, bound, limit)?;
    let ggd = &chart.ggd;
    let datum = chart.value_datum();
    let fs = FormSpace::with_bounds(&chart.ring, datum.clone(), bound, bound);
    let kernel = kernel_a(&fs)?;
    let mut report = TorsorReport {
        solutions: sols.len(),
        kernel_dim: kernel.dim(),
        differences_in_kernel: true,
        closed_under_kernel: true,
        is_translate: false,
    };
    let Some(base) = sols.first() else { return Ok(report) };
    for s in &sols {
        let diff = s.sub(base).to_valued(ggd)?;
        report.differences_in_kernel &= in_kernel(&datum, &diff)?;
    }
    let kernel_elems = kernel.elements(&chart.ring, ggd.dim(1));
    let mut translate = Vec::with_capacity(kernel_elems.len());
    for s in sols.iter().take(4) {
        for k in &kernel_elems {
            let moved = s.add(&MatForm::from_valued(ggd, k));
            report.closed_under_kernel &= moved.fits_bound(bound) && katz_check(chart, &moved).satisfied();
        }
    }
    for k in &kernel_elems {
        translate.push(base.add(&MatForm::from_valued(ggd, k)));
    }
    report.is_translate = translate.len() == sols.len() && translate.iter().all(|t| sols.contains(t));
    Ok(report)
}

/// A constant matrix as a chart.
pub fn constant_chart(ring: &PolyRing, ggd: &GradedGroupData, x: &Mat) -> Result<PolyChart> {
    PolyChart::new(ring, ggd, PolyMatrix::from_constant(ring, x), SignConvention::Standard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artinmilne::{c_tilde, phi_tilde};
    use crate::freelie::jacobson_split;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LIMIT: u128 = 10_000_000;

    fn setup(p: u32, k: u32, n: usize) -> (PolyRing, GradedGroupData) {
        let ring = PolyRing::new(Field::new(p, k).unwrap(), n);
        (ring, grading(&Cochar::normal_form(2, 1).unwrap()).unwrap())
    }

    fn x(ring: &PolyRing) -> MPoly {
        MPoly::var(ring, 0)
    }

    fn chart_unipotent(ring: &PolyRing, g: &GradedGroupData, a: usize, b: usize, f: MPoly) -> PolyChart {
        let m = PolyMatrix::identity(ring, 2).add(&PolyMatrix::unit(ring, 2, a, b, f));
        PolyChart::new(ring, g, m, SignConvention::Standard).unwrap()
    }

    fn e12(ring: &PolyRing, f: MPoly) -> MatForm {
        MatForm::basic(ring, 2, 0, 0, 1, f)
    }

    #[test]
    fn ks_examples() {
        let (ring, g) = setup(3, 1, 1);
        let id = PolyChart::new(&ring, &g, PolyMatrix::identity(&ring, 2), SignConvention::Standard).unwrap();
        assert!(ks_form(&id, &MatForm::zero(&ring, 2)).is_zero());
        let up = chart_unipotent(&ring, &g, 0, 1, x(&ring));
        assert_eq!(ks_form(&up, &MatForm::zero(&ring, 2)), e12(&ring, MPoly::one(&ring)));
        let low = chart_unipotent(&ring, &g, 1, 0, x(&ring));
        assert!(ks_form(&low, &MatForm::zero(&ring, 2)).is_zero());
    }

    #[test]
    fn p_curvature_examples() {
        let (ring, _) = setup(2, 1, 1);
        assert!(p_curvature(&MatForm::zero(&ring, 2)).unwrap().raw.is_zero());
        assert!(p_curvature(&e12(&ring, MPoly::one(&ring))).unwrap().raw.is_zero());
        for p in [2, 3, 5, 7] {
            let (ring, _) = setup(p, 1, 1);
            let w = e12(&ring, x(&ring).pow(p - 1));
            let pc = p_curvature(&w).unwrap();
            let minus_one = MPoly::constant(&ring, ring.field().from_int(-1));
            assert_eq!(pc.raw, e12(&ring, minus_one.clone()), "p={p}");
            assert_eq!(pc.untwisted, e12(&ring, minus_one));
        }
    }

    #[test]
    fn not_closed_rejected() {
        let (ring, _) = setup(3, 1, 2);
        let w = MatForm::basic(&ring, 2, 0, 0, 1, MPoly::var(&ring, 1));
        assert_eq!(p_curvature(&w), Err(Error::NotClosed));
    }

    #[test]
    fn katz_examples() {
        let (ring, g) = setup(2, 1, 1);
        let id = PolyChart::new(&ring, &g, PolyMatrix::identity(&ring, 2), SignConvention::Standard).unwrap();
        assert!(katz_check(&id, &MatForm::zero(&ring, 2)).satisfied());
        assert!(!katz_check(&id, &e12(&ring, MPoly::one(&ring))).satisfied());
        let up = chart_unipotent(&ring, &g, 0, 1, x(&ring));
        assert!(katz_check(&up, &e12(&ring, MPoly::one(&ring))).satisfied());
        let not_g1 = MatForm::basic(&ring, 2, 0, 1, 0, MPoly::one(&ring));
        let rep = katz_check(&id, &not_g1);
        assert!(!rep.g1_valued && !rep.satisfied());
    }

    fn random_g1_form(ring: &PolyRing, bound: u32, rng: &mut ChaCha8Rng) -> MatForm {
        // closed: d of a random function plus random x_i^{p-1}-type pieces
        let n = ring.nvars();
        let f = MPoly::random(ring, bound, 0.6, rng);
        let mut w = MatForm::zero(ring, 2);
        for i in 0..n {
            let mut c = f.derivative(i);
            if rng.gen_bool(0.5) {
                let g = MPoly::random(ring, 1, 0.7, rng).frobenius();
                let e = MPoly::var(ring, i).pow(ring.p() - 1);
                c = &c + &(&g * &e);
            }
            w.comps[i].set(0, 1, c);
        }
        w
    }

    #[test]
    fn change_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (p, k, n) in [(2, 1, 1), (3, 1, 1), (2, 2, 1), (2, 1, 2), (3, 1, 2)] {
            let (ring, g) = setup(p, k, n);
            for _ in 0..8 {
                let x = PolyMatrix::random_unimodular(&ring, 2, 2, 3, &mut rng);
                let chart = PolyChart::new(&ring, &g, x, SignConvention::Standard).unwrap();
                let w = random_g1_form(&ring, 4, &mut rng);
                let dlt = random_g1_form(&ring, 4, &mut rng);
                assert!(w.is_closed() && dlt.is_closed());
                let ks_diff = ks_form(&chart, &w.add(&dlt)).sub(&ks_form(&chart, &w));
                assert_eq!(ks_diff, phi_tilde_chart(&chart, &dlt));
                let datum = chart.value_datum();
                let via_datum = phi_tilde(&datum, &dlt.to_valued(&g).unwrap());
                assert_eq!(MatForm::from_valued(&g, &via_datum), ks_diff);
                let pc_diff = p_curvature(&w.add(&dlt)).unwrap().untwisted.sub(&p_curvature(&w).unwrap().untwisted);
                assert_eq!(pc_diff, c_tilde_form(&dlt).unwrap().neg());
                let via_c = c_tilde(&dlt.to_valued(&g).unwrap()).unwrap();
                assert_eq!(MatForm::from_valued(&g, &via_c).neg(), pc_diff);
                assert_eq!(p_curvature(&w).unwrap().raw, collapse_formula(&w));
            }
        }
    }

    #[test]
    fn flipped_convention_is_internally_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ring, g) = setup(3, 1, 1);
        for _ in 0..5 {
            let x = PolyMatrix::random_unimodular(&ring, 2, 2, 3, &mut rng);
            let chart = PolyChart::new(&ring, &g, x.clone(), SignConvention::Flipped).unwrap();
            let inv = PolyChart::new(&ring, &g, x.inverse().unwrap(), SignConvention::Standard).unwrap();
            let w = random_g1_form(&ring, 3, &mut rng);
            let dlt = random_g1_form(&ring, 3, &mut rng);
            assert_eq!(ks_form(&chart, &w), ks_form(&inv, &w));
            let ks_diff = ks_form(&chart, &w.add(&dlt)).sub(&ks_form(&chart, &w));
            assert_eq!(ks_diff, phi_tilde_chart(&chart, &dlt));
        }
    }

    #[test]
    fn collapse_matches_jacobson_substitution() {
        // (d + A)^p - d^p = J_1(d, A) + .. where every J_i with i >= 2 dies
        // because g_1 is abelian and square-zero; J_1 = ad_d^{p-1}(A).
        for p in [2, 3, 5] {
            let comps = jacobson_split(p).unwrap();
            let field = Field::prime(p).unwrap();
            let a = Mat::unit(3, 0, 2, field.one());
            let b = Mat::unit(3, 1, 2, field.one());
            for j in comps.iter().skip(1) {
                assert!(j.evaluate(&field, &a, &b).is_zero());
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let (ring, g) = setup(2, 1, 1);
        let up = chart_unipotent(&ring, &g, 0, 1, x(&ring));
        let sols = brute_force_solve(&up, 3, LIMIT).unwrap();
        assert!(sols.contains(&e12(&ring, MPoly::one(&ring))));
        let id = PolyChart::new(&ring, &g, PolyMatrix::identity(&ring, 2), SignConvention::Standard).unwrap();
        for d in 0..=3 {
            assert!(brute_force_solve(&id, d, LIMIT).unwrap().contains(&MatForm::zero(&ring, 2)));
        }
        assert!(matches!(brute_force_solve(&id, 30, 1000), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn torsor_property() {
        let (ring, g) = setup(2, 1, 1);
        let xx = x(&ring);
        let charts = vec![
            PolyMatrix::identity(&ring, 2),
            PolyMatrix::identity(&ring, 2).add(&PolyMatrix::unit(&ring, 2, 0, 1, xx.clone())),
            PolyMatrix::identity(&ring, 2).add(&PolyMatrix::unit(&ring, 2, 0, 1, xx.pow(3))),
            PolyMatrix::identity(&ring, 2).add(&PolyMatrix::unit(&ring, 2, 1, 0, xx.clone())),
        ];
        for xm in charts {
            let chart = PolyChart::new(&ring, &g, xm, SignConvention::Standard).unwrap();
            let rep = torsor_check(&chart, 4, LIMIT).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn chart_json_roundtrip() {
        let (ring, g) = setup(3, 2, 1);
        let up = chart_unipotent(&ring, &g, 0, 1, x(&ring));
        let back = PolyChart::from_json(&up.to_json(), SignConvention::Standard).unwrap();
        assert_eq!(back, up);
    }
}
