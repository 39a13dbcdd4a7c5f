//! Points of the quotient `G / K` over `F_q`, where
//! `K = {(g, h) in P+ x P- : levi(g) = Fr(levi(h))}` acts on `G = GL(d)` by
//! `x -> h x g^{-1}`.
//!
//! Orbits are found by union-find over `GL(d, F_q)` using a small generating
//! set of `K`; stabilizers are counted directly.

use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::groupdata::{for_each_filling, GradedGroupData, SubgroupKind};
use crate::matrix::{gl_order, Mat};

/// A pair `(g, h)` with `g in P+`, `h in P-`, `levi(g) = Fr(levi(h))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KElement {
    pub g: Mat,
    pub h: Mat,
}

impl KElement {
    pub fn identity(field: &Field, d: usize) -> KElement {
        KElement { g: Mat::identity(field, d), h: Mat::identity(field, d) }
    }

    pub fn new(ggd: &GradedGroupData, field: &Field, g: Mat, h: Mat) -> Result<KElement> {
        if !ggd.contains(field, SubgroupKind::PPlus, &g) {
            return Err(Error::NotInSubgroup("P+"));
        }
        if !ggd.contains(field, SubgroupKind::PMinus, &h) {
            return Err(Error::NotInSubgroup("P-"));
        }
        if ggd.levi_part(&g) != ggd.levi_part(&h).frobenius(field) {
            return Err(Error::NotInSubgroup("K"));
        }
        Ok(KElement { g, h })
    }

    /// `(g2 g1, h2 h1)`.
    pub fn compose(&self, field: &Field, other: &KElement) -> KElement {
        KElement { g: self.g.mul(field, &other.g), h: self.h.mul(field, &other.h) }
    }

    pub fn act(&self, field: &Field, x: &Mat) -> Mat {
        let ginv = self.g.inverse(field).expect("K element with singular g");
        self.h.mul(field, x).mul(field, &ginv)
    }
}

/// A point of `G(F_q)` in the quotient presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DisplayPoint {
    pub x: Mat,
}

impl DisplayPoint {
    pub fn new(field: &Field, x: Mat) -> Result<DisplayPoint> {
        if !x.is_invertible(field) {
            return Err(Error::NotInvertible);
        }
        Ok(DisplayPoint { x })
    }
}

pub fn act(field: &Field, k: &KElement, pt: &DisplayPoint) -> DisplayPoint {
    DisplayPoint { x: k.act(field, &pt.x) }
}

pub fn k_order(ggd: &GradedGroupData, q: u64) -> u128 {
    ggd.order(SubgroupKind::PMinus, q) * ggd.order(SubgroupKind::UPlus, q)
}

/// All of `K(F_q)`, ordered by `h` then by the `U+` factor of `g`.
pub fn enumerate_k(ggd: &GradedGroupData, field: &Field, limit: u128) -> Result<Vec<KElement>> {
    let size = k_order(ggd, field.q() as u64);
    if size > limit {
        return Err(Error::SizeLimit { size, limit });
    }
    let pm = ggd.enumerate(field, SubgroupKind::PMinus, limit)?;
    let up = ggd.enumerate(field, SubgroupKind::UPlus, limit)?;
    let mut out = Vec::with_capacity(size as usize);
    for h in &pm {
        let gm = ggd.levi_part(h).frobenius(field);
        for u in &up {
            out.push(KElement { g: gm.mul(field, u), h: h.clone() });
        }
    }
    Ok(out)
}

/// A generating set of `K(F_q)`.
pub fn k_generators(ggd: &GradedGroupData, field: &Field) -> Vec<KElement> {
    let d = ggd.d();
    let id = Mat::identity(field, d);
    let mut gens = Vec::new();
    for c in field.power_basis() {
        for &(a, b) in ggd.positions(1) {
            gens.push(KElement { g: id.add(field, &Mat::unit(d, a, b, c)), h: id.clone() });
        }
        for &(a, b) in ggd.positions(-1) {
            gens.push(KElement { g: id.clone(), h: id.add(field, &Mat::unit(d, a, b, c)) });
        }
    }
    for m in ggd.levi_generators(field) {
        gens.push(KElement { g: m.frobenius(field), h: m });
    }
    gens
}

/// All invertible `d x d` matrices, lexicographically sorted.
pub fn enumerate_gl(field: &Field, d: usize, limit: u128) -> Result<Vec<Mat>> {
    let size = (field.q() as u128).checked_pow((d * d) as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::SizeLimit { size, limit });
    }
    let all: Vec<(usize, usize)> = (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
    let mut out = Vec::with_capacity(gl_order(d, field.q() as u64) as usize);
    for_each_filling(field, &Mat::zero(d), &all, |m| {
        if m.is_invertible(field) {
            out.push(m.clone());
        }
    });
    Ok(out)
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// The smaller root wins, so every root is the least index of its class.
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// `GL(d, F_q)` in lexicographic order together with the orbit label of
/// every element; labels number the orbits by their least element.
#[derive(Debug, Clone)]
pub struct Partition {
    pub elements: Vec<Mat>,
    pub labels: Vec<u32>,
    pub num_orbits: usize,
}

impl Partition {
    pub fn index_of(&self, x: &Mat) -> Option<usize> {
        self.elements.binary_search(x).ok()
    }

    pub fn label_of(&self, x: &Mat) -> Option<u32> {
        self.index_of(x).map(|i| self.labels[i])
    }
}

const CHUNK: usize = 1 << 14;

pub fn orbit_partition(ggd: &GradedGroupData, field: &Field, limit: u128) -> Result<Partition> {
    let elements = enumerate_gl(field, ggd.d(), limit)?;
    let gens: Vec<(Mat, Mat)> = k_generators(ggd, field)
        .into_iter()
        .map(|k| (k.h, k.g.inverse(field).expect("generator with singular g")))
        .collect();
    let mut uf = UnionFind::new(elements.len());
    for (c, chunk) in elements.chunks(CHUNK).enumerate() {
        let edges: Vec<u32> = chunk
            .par_iter()
            .flat_map_iter(|x| {
                gens.iter().map(|(h, ginv)| {
                    let y = h.mul(field, x).mul(field, ginv);
                    elements.binary_search(&y).expect("action left GL(d)") as u32
                })
            })
            .collect();
        for (i, targets) in edges.chunks(gens.len().max(1)).enumerate() {
            let src = (c * CHUNK + i) as u32;
            for &t in targets {
                uf.union(src, t);
            }
        }
    }
    let mut labels = vec![0u32; elements.len()];
    let mut root_label = vec![u32::MAX; elements.len()];
    let mut num_orbits = 0usize;
    for i in 0..elements.len() {
        let r = uf.find(i as u32) as usize;
        if root_label[r] == u32::MAX {
            root_label[r] = num_orbits as u32;
            num_orbits += 1;
        }
        labels[i] = root_label[r];
    }
    Ok(Partition { elements, labels, num_orbits })
}

/// Orbit labels computed from the full action of `K(F_q)`.
pub fn orbit_partition_full(ggd: &GradedGroupData, field: &Field, limit: u128) -> Result<Partition> {
    let elements = enumerate_gl(field, ggd.d(), limit)?;
    let ks: Vec<(Mat, Mat)> =
        enumerate_k(ggd, field, limit)?.into_iter().map(|k| (k.h, k.g.inverse(field).unwrap())).collect();
    let mut labels = vec![u32::MAX; elements.len()];
    let mut num_orbits = 0usize;
    for i in 0..elements.len() {
        if labels[i] != u32::MAX {
            continue;
        }
        for (h, ginv) in &ks {
            let y = h.mul(field, &elements[i]).mul(field, ginv);
            labels[elements.binary_search(&y).unwrap()] = num_orbits as u32;
        }
        num_orbits += 1;
    }
    Ok(Partition { elements, labels, num_orbits })
}

/// Number of `(g, h) in K(F_q)` fixing `x`: those `h in P-` whose conjugate
/// `g = x^{-1} h x` lies in `P+` with `levi(g) = Fr(levi(h))`.
pub fn stabilizer_order(ggd: &GradedGroupData, field: &Field, x: &Mat, limit: u128) -> Result<u128> {
    let xinv = x.inverse(field).ok_or(Error::NotInvertible)?;
    let pm = ggd.enumerate(field, SubgroupKind::PMinus, limit)?;
    let count = pm
        .par_iter()
        .filter(|h| {
            let g = xinv.mul(field, h).mul(field, x);
            ggd.contains(field, SubgroupKind::PPlus, &g) && ggd.levi_part(&g) == ggd.levi_part(h).frobenius(field)
        })
        .count();
    Ok(count as u128)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitClass {
    pub rep: Mat,
    pub size: u128,
    pub stabilizer: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitReport {
    pub ggd: GradedGroupData,
    pub field: Field,
    pub group_order: u128,
    pub k_order: u128,
    /// Sorted by representative.
    pub classes: Vec<OrbitClass>,
}

impl OrbitReport {
    pub fn num_orbits(&self) -> usize {
        self.classes.len()
    }

    pub fn mass(&self) -> Ratio<u128> {
        groupoid_mass(self)
    }

    /// Sizes sum to `|G|`, each `size * |stab| = |K|`, and the mass equals `|G|/|K|`.
    pub fn consistent(&self) -> bool {
        self.classes.iter().map(|c| c.size).sum::<u128>() == self.group_order
            && self.classes.iter().all(|c| c.size * c.stabilizer == self.k_order)
            && self.mass() == Ratio::new(self.group_order, self.k_order)
    }

    pub fn to_json(&self) -> Value {
        let f = &self.field;
        json!({
            "cochar": self.ggd.cochar().to_json(),
            "field": f.spec(),
            "orbits": self.classes.len(),
            "mass": self.mass().to_string(),
            "group_order": self.group_order as u64,
            "k_order": self.k_order as u64,
            "classes": self.classes.iter().map(|c| json!({
                "rep": c.rep.to_json(f),
                "size": c.size as u64,
                "stabilizer": c.stabilizer as u64,
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn report_from_partition(ggd: &GradedGroupData, field: &Field, part: &Partition, limit: u128) -> Result<OrbitReport> {
    let mut sizes = vec![0u128; part.num_orbits];
    let mut reps: Vec<Option<Mat>> = vec![None; part.num_orbits];
    for (x, &l) in part.elements.iter().zip(&part.labels) {
        sizes[l as usize] += 1;
        reps[l as usize].get_or_insert_with(|| x.clone());
    }
    let mut classes = Vec::with_capacity(part.num_orbits);
    for (rep, size) in reps.into_iter().zip(sizes) {
        let rep = rep.expect("empty orbit");
        let stabilizer = stabilizer_order(ggd, field, &rep, limit)?;
        classes.push(OrbitClass { rep, size, stabilizer });
    }
    classes.sort_by(|a, b| a.rep.cmp(&b.rep));
    Ok(OrbitReport {
        ggd: ggd.clone(),
        field: field.clone(),
        group_order: gl_order(ggd.d(), field.q() as u64),
        k_order: k_order(ggd, field.q() as u64),
        classes,
    })
}

pub fn orbit_decomposition(ggd: &GradedGroupData, field: &Field, limit: u128) -> Result<OrbitReport> {
    let part = orbit_partition(ggd, field, limit)?;
    report_from_partition(ggd, field, &part, limit)
}

/// `sum 1/|stab|` over the orbits.
pub fn groupoid_mass(report: &OrbitReport) -> Ratio<u128> {
    report.classes.iter().fold(Ratio::from_integer(0), |acc, c| acc + Ratio::new(1, c.stabilizer))
}

/// Number of classes of `K(F_q)`-orbits under the entrywise Frobenius.
pub fn frobenius_merged_count(ggd: &GradedGroupData, field: &Field, limit: u128) -> Result<usize> {
    let part = orbit_partition(ggd, field, limit)?;
    let mut uf = UnionFind::new(part.num_orbits);
    for (x, &l) in part.elements.iter().zip(&part.labels) {
        let fx = x.frobenius(field);
        uf.union(l, part.label_of(&fx).expect("Frobenius left GL(d)"));
    }
    Ok((0..part.num_orbits as u32).filter(|&i| uf.find(i) == i).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupdata::{grading, Cochar};

    const LIMIT: u128 = 10_000_000;

    fn gd(d: usize, dp: usize) -> GradedGroupData {
        grading(&Cochar::normal_form(d, dp).unwrap()).unwrap()
    }

    fn m2(f: &Field, e: [i64; 4]) -> Mat {
        Mat::from_entries(2, e.iter().map(|&v| f.from_int(v)).collect())
    }

    #[test]
    fn k_sizes() {
        let g = gd(2, 1);
        for (q, n) in [(2, 4), (3, 36), (4, 144)] {
            let f = Field::of_order(q).unwrap();
            let ks = enumerate_k(&g, &f, LIMIT).unwrap();
            assert_eq!(ks.len(), n);
            assert!(ks.contains(&KElement::identity(&f, 2)));
            let mut sorted = ks.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), n);
            for k in &ks {
                assert!(KElement::new(&g, &f, k.g.clone(), k.h.clone()).is_ok());
            }
        }
    }

    #[test]
    fn action_examples() {
        let f = Field::prime(2).unwrap();
        let g = gd(2, 1);
        let id = Mat::identity(&f, 2);
        let x = DisplayPoint::new(&f, m2(&f, [1, 1, 0, 1])).unwrap();
        assert_eq!(act(&f, &KElement::identity(&f, 2), &x), x);
        let k = KElement::new(&g, &f, m2(&f, [1, 1, 0, 1]), id.clone()).unwrap();
        assert_eq!(act(&f, &k, &DisplayPoint { x: id.clone() }).x, m2(&f, [1, 1, 0, 1]));
    }

    #[test]
    fn action_axioms() {
        let f = Field::prime(3).unwrap();
        let g = gd(2, 1);
        let ks = enumerate_k(&g, &f, LIMIT).unwrap();
        let gl = enumerate_gl(&f, 2, LIMIT).unwrap();
        for (i, k1) in ks.iter().enumerate().step_by(5) {
            let k2 = &ks[(i * 7 + 3) % ks.len()];
            for x in gl.iter().step_by(11) {
                let lhs = k2.act(&f, &k1.act(&f, x));
                assert_eq!(lhs, k2.compose(&f, k1).act(&f, x));
            }
        }
    }

    #[test]
    fn census_d2_q2() {
        let f = Field::prime(2).unwrap();
        let rep = orbit_decomposition(&gd(2, 1), &f, LIMIT).unwrap();
        assert_eq!(rep.group_order, 6);
        assert_eq!(rep.k_order, 4);
        assert_eq!(rep.num_orbits(), 2);
        let swap = m2(&f, [0, 1, 1, 0]);
        let id = Mat::identity(&f, 2);
        let part = orbit_partition(&gd(2, 1), &f, LIMIT).unwrap();
        let li = part.label_of(&id).unwrap() as usize;
        let ls = part.label_of(&swap).unwrap() as usize;
        assert_ne!(li, ls);
        let class_of = |m: &Mat| {
            let l = part.label_of(m).unwrap();
            rep.classes.iter().find(|c| part.label_of(&c.rep).unwrap() == l).unwrap().clone()
        };
        assert_eq!((class_of(&id).size, class_of(&id).stabilizer), (4, 1));
        assert_eq!((class_of(&swap).size, class_of(&swap).stabilizer), (2, 2));
        assert_eq!(rep.mass(), Ratio::new(3, 2));
        assert!(rep.consistent());
        assert_eq!(rep.to_json()["mass"], "3/2");
    }

    #[test]
    fn mass_identity_and_generic_stabilizer() {
        for (d, dp, q) in [(2, 1, 3), (2, 1, 4), (2, 1, 5), (3, 1, 2), (3, 2, 2), (3, 1, 3)] {
            let f = Field::of_order(q).unwrap();
            let g = gd(d, dp);
            let rep = orbit_decomposition(&g, &f, LIMIT).unwrap();
            assert!(rep.consistent(), "({d},{dp},{q})");
            if f.k() == 1 {
                let stab = stabilizer_order(&g, &f, &Mat::identity(&f, d), LIMIT).unwrap();
                assert_eq!(stab, g.order(SubgroupKind::M, f.p() as u64));
            }
        }
        let f = Field::of_order(3).unwrap();
        let rep = orbit_decomposition(&gd(2, 1), &f, LIMIT).unwrap();
        assert_eq!(rep.mass(), Ratio::new(4, 3));
    }

    #[test]
    fn generators_match_full_action() {
        for q in [2, 3, 4, 5] {
            let f = Field::of_order(q).unwrap();
            for dp in 0..=2 {
                let g = gd(2, dp);
                let a = orbit_partition(&g, &f, LIMIT).unwrap();
                let b = orbit_partition_full(&g, &f, LIMIT).unwrap();
                assert_eq!(a.labels, b.labels, "q={q} d'={dp}");
            }
        }
    }

    #[test]
    fn dimension_zero() {
        for d in 1..=5 {
            for dp in 0..=d {
                let g = gd(d, dp);
                assert_eq!((g.dim(0) + g.dim(1)) + (g.dim(0) + g.dim(-1)) - g.dim(0), d * d);
            }
        }
    }

    #[test]
    fn frobenius_merged_counts() {
        let counts = |d, dp, qs: &[u32]| -> Vec<usize> {
            qs.iter()
                .map(|&q| frobenius_merged_count(&gd(d, dp), &Field::of_order(q).unwrap(), LIMIT).unwrap())
                .collect()
        };
        assert_eq!(counts(2, 1, &[2, 4, 8]), vec![2, 3, 2]);
        assert_eq!(counts(3, 1, &[2, 4]), vec![5, 6]);
        assert_eq!(orbit_decomposition(&gd(2, 1), &Field::of_order(4).unwrap(), LIMIT).unwrap().num_orbits(), 4);
    }

    #[test]
    fn size_limit() {
        let f = Field::of_order(3).unwrap();
        assert!(matches!(orbit_decomposition(&gd(3, 1), &f, 1000), Err(Error::SizeLimit { .. })));
    }
}
