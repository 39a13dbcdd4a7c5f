//! `GL(d)` with a diagonal cocharacter: the weight grading of `gl(d)`, the
//! subgroups `M`, `P+`, `P-`, `U+`, `U-` as entry predicates, and the point
//! level checks of their structure.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Field, FqElem};
use crate::matrix::{gl_order, Mat};

/// Weight vector of the cocharacter `t -> diag(t^{w_1}, .., t^{w_d})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cochar {
    pub d: usize,
    pub w: Vec<i32>,
}

impl Cochar {
    pub fn new(w: Vec<i32>) -> Cochar {
        Cochar { d: w.len(), w }
    }

    /// `d'` ones followed by `d - d'` zeros.
    pub fn normal_form(d: usize, dprime: usize) -> Result<Cochar> {
        if dprime > d || d == 0 {
            return Err(Error::Invalid(format!("need 0 <= d' <= d and d >= 1, got d={d}, d'={dprime}")));
        }
        Ok(Cochar::new((0..d).map(|a| i32::from(a < dprime)).collect()))
    }

    pub fn weight(&self, a: usize, b: usize) -> i64 {
        self.w[a] as i64 - self.w[b] as i64
    }

    /// First pair violating `w_a - w_b <= 1`, if any.
    pub fn check_one_bounded(&self) -> Result<()> {
        if self.w.len() != self.d {
            return Err(Error::DimensionMismatch(format!("{} weights for d = {}", self.w.len(), self.d)));
        }
        for a in 0..self.d {
            for b in 0..self.d {
                let diff = self.weight(a, b);
                if diff > 1 {
                    return Err(Error::NotOneBounded { a, b, diff });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({ "d": self.d, "w": self.w })
    }
}

/// The grading `g = g_{-1} + g_0 + g_1` as matrix-unit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedGroupData {
    cochar: Cochar,
    g_minus: Vec<(usize, usize)>,
    g_zero: Vec<(usize, usize)>,
    g_one: Vec<(usize, usize)>,
}

pub fn grading(c: &Cochar) -> Result<GradedGroupData> {
    c.check_one_bounded()?;
    let mut g = GradedGroupData { cochar: c.clone(), g_minus: vec![], g_zero: vec![], g_one: vec![] };
    for a in 0..c.d {
        for b in 0..c.d {
            match c.weight(a, b) {
                -1 => g.g_minus.push((a, b)),
                0 => g.g_zero.push((a, b)),
                _ => g.g_one.push((a, b)),
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubgroupKind {
    M,
    PPlus,
    PMinus,
    UPlus,
    UMinus,
}

impl SubgroupKind {
    pub const ALL: [SubgroupKind; 5] =
        [SubgroupKind::M, SubgroupKind::PPlus, SubgroupKind::PMinus, SubgroupKind::UPlus, SubgroupKind::UMinus];

    pub fn name(self) -> &'static str {
        match self {
            SubgroupKind::M => "M",
            SubgroupKind::PPlus => "P+",
            SubgroupKind::PMinus => "P-",
            SubgroupKind::UPlus => "U+",
            SubgroupKind::UMinus => "U-",
        }
    }

    fn allows(self, weight: i64) -> bool {
        match self {
            SubgroupKind::M => weight == 0,
            SubgroupKind::PPlus | SubgroupKind::UPlus => weight >= 0,
            SubgroupKind::PMinus | SubgroupKind::UMinus => weight <= 0,
        }
    }

    fn unipotent(self) -> bool {
        matches!(self, SubgroupKind::UPlus | SubgroupKind::UMinus)
    }
}

impl GradedGroupData {
    pub fn cochar(&self) -> &Cochar {
        &self.cochar
    }

    pub fn d(&self) -> usize {
        self.cochar.d
    }

    /// Matrix-unit positions spanning `g_i`, row-major order.
    pub fn positions(&self, i: i32) -> &[(usize, usize)] {
        match i {
            -1 => &self.g_minus,
            0 => &self.g_zero,
            1 => &self.g_one,
            _ => &[],
        }
    }

    pub fn g1(&self) -> &[(usize, usize)] {
        &self.g_one
    }

    pub fn dim(&self, i: i32) -> usize {
        self.positions(i).len()
    }

    pub fn weight(&self, a: usize, b: usize) -> i64 {
        self.cochar.weight(a, b)
    }

    /// Sizes of the weight classes, largest weight first: the blocks of `M`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut ws: Vec<i32> = self.cochar.w.clone();
        ws.sort_unstable_by(|a, b| b.cmp(a));
        ws.dedup();
        ws.iter().map(|&v| self.cochar.w.iter().filter(|&&x| x == v).count()).collect()
    }

    pub fn contains(&self, field: &Field, kind: SubgroupKind, m: &Mat) -> bool {
        self.shape_ok(field, kind, m) && m.is_invertible(field)
    }

    fn shape_ok(&self, field: &Field, kind: SubgroupKind, m: &Mat) -> bool {
        let d = self.d();
        m.dim() == d
            && (0..d).all(|a| {
                (0..d).all(|b| {
                    let w = self.weight(a, b);
                    let e = m.get(a, b);
                    if !kind.allows(w) {
                        e.is_zero()
                    } else if kind.unipotent() && w == 0 {
                        e == if a == b { field.one() } else { field.zero() }
                    } else {
                        true
                    }
                })
            })
    }

    /// `|H(F_q)|` from the block description.
    pub fn order(&self, kind: SubgroupKind, q: u64) -> u128 {
        let m: u128 = self.block_sizes().iter().map(|&n| gl_order(n, q)).product();
        let u = |i: i32| (q as u128).pow(self.dim(i) as u32);
        match kind {
            SubgroupKind::M => m,
            SubgroupKind::PPlus => m * u(1),
            SubgroupKind::PMinus => m * u(-1),
            SubgroupKind::UPlus => u(1),
            SubgroupKind::UMinus => u(-1),
        }
    }

    fn free_positions(&self, kind: SubgroupKind) -> Vec<(usize, usize)> {
        let d = self.d();
        (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                let w = self.weight(a, b);
                kind.allows(w) && !(kind.unipotent() && w == 0)
            })
            .collect()
    }

    /// All elements of `H(F_q)` in lexicographic order.
    pub fn enumerate(&self, field: &Field, kind: SubgroupKind, limit: u128) -> Result<Vec<Mat>> {
        let free = self.free_positions(kind);
        let size = (field.q() as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
        if size > limit {
            return Err(Error::SizeLimit { size, limit });
        }
        let base = if kind.unipotent() { Mat::identity(field, self.d()) } else { Mat::zero(self.d()) };
        let mut out = Vec::new();
        for_each_filling(field, &base, &free, |m| {
            if !kind.unipotent() && !m.is_invertible(field) {
                return;
            }
            out.push(m.clone());
        });
        Ok(out)
    }

    /// The retraction `P+- -> M`: zero every entry off `g_0`.
    pub fn levi_project(&self, field: &Field, g: &Mat) -> Result<Mat> {
        if !self.contains(field, SubgroupKind::PPlus, g) && !self.contains(field, SubgroupKind::PMinus, g) {
            return Err(Error::NotInSubgroup("P+ or P-"));
        }
        Ok(self.levi_part(g))
    }

    /// Entries on `g_0` only, without a membership check.
    pub fn levi_part(&self, g: &Mat) -> Mat {
        let mut m = Mat::zero(self.d());
        for &(a, b) in &self.g_zero {
            m.set(a, b, g.get(a, b));
        }
        m
    }

    /// `N -> I + N`, inverse of the isomorphism `U+ -> g_1`.
    pub fn u_plus_iso(&self, field: &Field, n: &Mat) -> Result<Mat> {
        if !self.in_g1(n) {
            return Err(Error::NotInG1);
        }
        Ok(Mat::identity(field, self.d()).add(field, n))
    }

    pub fn in_g1(&self, n: &Mat) -> bool {
        let d = self.d();
        n.dim() == d && (0..d).all(|a| (0..d).all(|b| self.weight(a, b) == 1 || n.get(a, b).is_zero()))
    }

    /// Projection of a matrix onto `g_1`.
    pub fn project_g1(&self, m: &Mat) -> Mat {
        let mut out = Mat::zero(self.d());
        for &(a, b) in &self.g_one {
            out.set(a, b, m.get(a, b));
        }
        out
    }

    /// Coordinates of a matrix's `g_1` part in the basis `g1()`.
    pub fn g1_coords(&self, m: &Mat) -> Vec<FqElem> {
        self.g_one.iter().map(|&(a, b)| m.get(a, b)).collect()
    }

    pub fn from_g1_coords(&self, c: &[FqElem]) -> Mat {
        let mut out = Mat::zero(self.d());
        for (&(a, b), &v) in self.g_one.iter().zip(c) {
            out.set(a, b, v);
        }
        out
    }

    /// Generators of `M(F_q)`: elementary matrices inside each block (with
    /// entries from an `F_p`-basis) and a primitive element on each diagonal slot.
    pub fn levi_generators(&self, field: &Field) -> Vec<Mat> {
        let d = self.d();
        let mut gens = Vec::new();
        for &(a, b) in &self.g_zero {
            if a == b {
                let mut m = Mat::identity(field, d);
                m.set(a, a, field.primitive_element());
                gens.push(m);
            } else {
                for c in field.power_basis() {
                    gens.push(Mat::identity(field, d).add(field, &Mat::unit(d, a, b, c)));
                }
            }
        }
        gens
    }
}

/// Call `f` on every matrix equal to `base` off `free`, in lexicographic order.
pub(crate) fn for_each_filling(field: &Field, base: &Mat, free: &[(usize, usize)], mut f: impl FnMut(&Mat)) {
    let q = field.q();
    let mut m = base.clone();
    for &(a, b) in free {
        m.set(a, b, field.zero());
    }
    let mut counter = vec![0usize; free.len()];
    loop {
        f(&m);
        let mut i = free.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            let (a, b) = free[i];
            counter[i] += 1;
            if counter[i] < q {
                m.set(a, b, field.elem(counter[i]));
                break;
            }
            counter[i] = 0;
            m.set(a, b, field.zero());
        }
    }
}

/// The `p`-operation of `gl(d)`: the `p`-th matrix power.
pub fn p_operation(field: &Field, x: &Mat) -> Mat {
    x.pow(field, field.p() as u64)
}

pub fn bracket(field: &Field, x: &Mat, y: &Mat) -> Mat {
    x.mul(field, y).sub(field, &y.mul(field, x))
}

/// Outcome of the point-level structure checks for one `(w, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub cochar: Cochar,
    pub q: usize,
    pub semidirect_plus: bool,
    pub semidirect_minus: bool,
    pub intersection_is_levi: bool,
    pub cardinalities: bool,
    pub open_cell_injective: bool,
    pub dimension_identity: bool,
    pub bracket_grading: bool,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.semidirect_plus
            && self.semidirect_minus
            && self.intersection_is_levi
            && self.cardinalities
            && self.open_cell_injective
            && self.dimension_identity
            && self.bracket_grading
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cochar": self.cochar.to_json(),
            "q": self.q,
            "semidirect_plus": self.semidirect_plus,
            "semidirect_minus": self.semidirect_minus,
            "intersection_is_levi": self.intersection_is_levi,
            "cardinalities": self.cardinalities,
            "open_cell_injective": self.open_cell_injective,
            "dimension_identity": self.dimension_identity,
            "bracket_grading": self.bracket_grading,
        })
    }
}

/// Every element of `P` factors uniquely as `m * u` with `m = levi(g)`.
fn semidirect(g: &GradedGroupData, field: &Field, p: &[Mat], m: &[Mat], u: &[Mat], ukind: SubgroupKind) -> bool {
    if p.len() != m.len() * u.len() {
        return false;
    }
    let mut seen = HashSet::with_capacity(p.len());
    p.iter().all(|x| {
        let levi = g.levi_part(x);
        let Some(inv) = levi.inverse(field) else { return false };
        let unip = inv.mul(field, x);
        g.contains(field, SubgroupKind::M, &levi) && g.contains(field, ukind, &unip) && seen.insert((levi, unip))
    })
}

pub fn structure_report(g: &GradedGroupData, field: &Field, limit: u128) -> Result<StructureReport> {
    use SubgroupKind::*;
    let q = field.q();
    let en = |k| g.enumerate(field, k, limit);
    let (m, pp, pm, up, um) = (en(M)?, en(PPlus)?, en(PMinus)?, en(UPlus)?, en(UMinus)?);

    let cardinalities = [(M, &m), (PPlus, &pp), (PMinus, &pm), (UPlus, &up), (UMinus, &um)]
        .iter()
        .all(|(k, list)| list.len() as u128 == g.order(*k, q as u64));

    let inter: Vec<&Mat> = pp.iter().filter(|x| g.contains(field, PMinus, x)).collect();
    let intersection_is_levi = inter.len() == m.len() && inter.iter().zip(&m).all(|(a, b)| *a == b);

    let cell = um.len() as u128 * m.len() as u128 * up.len() as u128;
    if cell > limit {
        return Err(Error::SizeLimit { size: cell, limit });
    }
    let mut seen = HashSet::with_capacity(cell as usize);
    let mut open_cell_injective = true;
    'outer: for a in &um {
        for b in &m {
            let ab = a.mul(field, b);
            for c in &up {
                if !seen.insert(ab.mul(field, c)) {
                    open_cell_injective = false;
                    break 'outer;
                }
            }
        }
    }

    let d = g.d();
    let dimension_identity =
        g.dim(-1) + g.dim(0) + g.dim(1) == d * d && (g.dim(0) + g.dim(1)) + (g.dim(0) + g.dim(-1)) - g.dim(0) == d * d;

    let mut bracket_grading = true;
    for i in -1..=1 {
        for j in -1..=1 {
            for &(a, b) in g.positions(i) {
                for &(c, e) in g.positions(j) {
                    let br = bracket(field, &Mat::unit(d, a, b, field.one()), &Mat::unit(d, c, e, field.one()));
                    let ok = (0..d).all(|r| {
                        (0..d).all(|s| br.get(r, s).is_zero() || g.weight(r, s) == (i + j) as i64)
                    });
                    bracket_grading &= ok;
                }
            }
        }
    }

    Ok(StructureReport {
        cochar: g.cochar.clone(),
        q,
        semidirect_plus: semidirect(g, field, &pp, &m, &up, UPlus),
        semidirect_minus: semidirect(g, field, &pm, &m, &um, UMinus),
        intersection_is_levi,
        cardinalities,
        open_cell_injective,
        dimension_identity,
        bracket_grading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const LIMIT: u128 = 10_000_000;

    fn gd(d: usize, dp: usize) -> GradedGroupData {
        grading(&Cochar::normal_form(d, dp).unwrap()).unwrap()
    }

    #[test]
    fn grading_examples() {
        let g = gd(2, 1);
        assert_eq!(g.positions(-1), &[(1, 0)]);
        assert_eq!(g.positions(0), &[(0, 0), (1, 1)]);
        assert_eq!(g.positions(1), &[(0, 1)]);
        let g = gd(3, 2);
        assert_eq!(g.g1(), &[(0, 2), (1, 2)]);
        for d in 1..=5 {
            for dp in 0..=d {
                assert_eq!(gd(d, dp).dim(1), dp * (d - dp));
            }
        }
        assert_eq!(grading(&Cochar::new(vec![2, 0])), Err(Error::NotOneBounded { a: 0, b: 1, diff: 2 }));
        assert!(grading(&Cochar::new(vec![0, 1, 0])).is_ok());
    }

    #[test]
    fn levi_projection() {
        let f = Field::of_order(3).unwrap();
        let g = gd(2, 1);
        let x = Mat::from_entries(2, vec![f.elem(2), f.elem(1), f.zero(), f.elem(1)]);
        assert_eq!(g.levi_project(&f, &x).unwrap(), Mat::diagonal(&[f.elem(2), f.elem(1)]));
        let low = Mat::from_entries(2, vec![f.one(), f.zero(), f.one(), f.one()]);
        assert!(g.levi_project(&f, &low).is_ok());
        let full = Mat::from_entries(2, vec![f.one(), f.one(), f.one(), f.zero()]);
        assert_eq!(g.levi_project(&f, &full), Err(Error::NotInSubgroup("P+ or P-")));

        let f = Field::of_order(4).unwrap();
        let g = gd(3, 1);
        for m in g.enumerate(&f, SubgroupKind::M, LIMIT).unwrap().iter().step_by(37) {
            assert_eq!(&g.levi_project(&f, m).unwrap(), m);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pp = g.enumerate(&f, SubgroupKind::PPlus, LIMIT).unwrap();
        use rand::seq::SliceRandom;
        for _ in 0..100 {
            let a = pp.choose(&mut rng).unwrap();
            let b = pp.choose(&mut rng).unwrap();
            let lhs = g.levi_project(&f, &a.mul(&f, b)).unwrap();
            let rhs = g.levi_project(&f, a).unwrap().mul(&f, &g.levi_project(&f, b).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn u_plus_iso_is_a_homomorphism() {
        let f2 = Field::prime(2).unwrap();
        let g = gd(2, 1);
        let e12 = Mat::unit(2, 0, 1, f2.one());
        let u = g.u_plus_iso(&f2, &e12).unwrap();
        assert_eq!(u.mul(&f2, &u), Mat::identity(&f2, 2));
        assert_eq!(g.u_plus_iso(&f2, &Mat::zero(2)).unwrap(), Mat::identity(&f2, 2));
        assert_eq!(g.u_plus_iso(&f2, &Mat::unit(2, 1, 0, f2.one())), Err(Error::NotInG1));
        for (d, dp) in [(2, 1), (3, 1), (3, 2)] {
            for q in [2, 3, 4] {
                let f = Field::of_order(q).unwrap();
                let g = gd(d, dp);
                let all: Vec<Mat> = g
                    .enumerate(&f, SubgroupKind::UPlus, LIMIT)
                    .unwrap()
                    .iter()
                    .map(|u| u.sub(&f, &Mat::identity(&f, d)))
                    .collect();
                assert_eq!(all.len() as u128, g.order(SubgroupKind::UPlus, q as u64));
                for n in &all {
                    for m in &all {
                        let lhs = g.u_plus_iso(&f, n).unwrap().mul(&f, &g.u_plus_iso(&f, m).unwrap());
                        assert_eq!(lhs, g.u_plus_iso(&f, &n.add(&f, m)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn p_operation_vanishes_on_g1() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, k) in [(2, 1), (2, 2), (3, 1), (5, 1)] {
            let f = Field::new(p, k).unwrap();
            assert!(p_operation(&f, &Mat::unit(2, 0, 1, f.one())).is_zero());
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            assert_eq!(
                p_operation(&f, &Mat::diagonal(&[a, b])),
                Mat::diagonal(&[f.frobenius(a), f.frobenius(b)])
            );
            for d in 2..=4 {
                for dp in 1..d {
                    let g = gd(d, dp);
                    for _ in 0..10 {
                        let c: Vec<FqElem> = (0..g.dim(1)).map(|_| f.random(&mut rng)).collect();
                        assert!(p_operation(&f, &g.from_g1_coords(&c)).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn structure_checks_small() {
        for (d, dp) in [(2, 1), (3, 1), (3, 2)] {
            for q in [2, 3] {
                let f = Field::of_order(q).unwrap();
                let rep = structure_report(&gd(d, dp), &f, LIMIT).unwrap();
                assert!(rep.passed(), "{rep:?}");
            }
        }
    }

    #[test]
    fn enumeration_is_sorted_and_limited() {
        let f = Field::of_order(3).unwrap();
        let g = gd(3, 1);
        let pp = g.enumerate(&f, SubgroupKind::PPlus, LIMIT).unwrap();
        assert!(pp.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(g.enumerate(&f, SubgroupKind::PPlus, 10), Err(Error::SizeLimit { .. })));
    }
}
