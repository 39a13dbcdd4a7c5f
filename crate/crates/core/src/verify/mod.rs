//! The verification suites behind `fzip verify`. Each suite is a list of
//! named exact checks; randomized checks draw from fixed seeds so reports are
//! reproducible byte for byte.

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::artinmilne::{
    alpha_p_image, check_linearization_surjective, in_kernel, mu_p_image, FormSpace, ValueDatum,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::freelie::{a_generator_names, jacobson_report};
use crate::fzip::{orbit_decomposition, orbit_partition, stabilizer_order};
use crate::groupdata::{grading, structure_report, Cochar, GradedGroupData, SubgroupKind};
use crate::katz::{
    brute_force_solve, c_tilde_form, collapse_formula, katz_check, ks_form, p_curvature, phi_tilde_chart, torsor_check, MatForm,
    PolyChart, SignConvention,
};
use crate::lau::{lau_invariants, phi_at};
use crate::fzip::DisplayPoint;
use crate::matrix::Mat;
use crate::poly::{cartier, d0, MPoly, OneForm, PolyMatrix, PolyRing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Jacobson,
    Cartier,
    Change,
    Orbits,
    Lau,
    Torsor,
    ArtinMilne,
    Structure,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Jacobson,
        Suite::Cartier,
        Suite::Change,
        Suite::Orbits,
        Suite::Lau,
        Suite::Torsor,
        Suite::ArtinMilne,
        Suite::Structure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Jacobson => "jacobson",
            Suite::Cartier => "cartier",
            Suite::Change => "change",
            Suite::Orbits => "orbits",
            Suite::Lau => "lau",
            Suite::Torsor => "torsor",
            Suite::ArtinMilne => "artin-milne",
            Suite::Structure => "structure",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite {s:?}")))
    }

    /// Acceptance criterion number.
    pub fn criterion(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
    /// Extra lines for the table rendering.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.name(),
            "criterion": self.suite.criterion(),
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut out = format!(
            "suite {} (criterion {}): {} ({ok}/{} checks)\n",
            self.suite.name(),
            self.suite.criterion(),
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        for c in &self.checks {
            out.push_str(&format!("  [{}] {}\n", if c.passed { "pass" } else { "FAIL" }, c.name));
            for n in &c.notes {
                out.push_str(&format!("      {n}\n"));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Restricts the primes of the jacobson, cartier and change suites.
    pub primes: Option<Vec<u32>>,
    pub limit: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { primes: None, limit: crate::enumeration_limit() }
    }
}

impl VerifyOptions {
    fn primes(&self, default: &[u32]) -> Vec<u32> {
        match &self.primes {
            Some(ps) => ps.clone(),
            None => default.to_vec(),
        }
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, outcome: Result<(bool, Value)>) {
        let (passed, detail) = match outcome {
            Ok(x) => x,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        self.0.push(Check { name: name.into(), passed, detail, notes: Vec::new() });
    }

    fn note(&mut self, lines: Vec<String>) {
        if let Some(last) = self.0.last_mut() {
            last.notes = lines;
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let mut checks = Checks(Vec::new());
    match suite {
        Suite::Jacobson => jacobson(&mut checks, opts),
        Suite::Cartier => cartier_suite(&mut checks, opts),
        Suite::Change => change(&mut checks, opts),
        Suite::Orbits => orbits(&mut checks, opts),
        Suite::Lau => lau(&mut checks, opts),
        Suite::Torsor => torsor(&mut checks, opts),
        Suite::ArtinMilne => artin_milne(&mut checks, opts),
        Suite::Structure => structure(&mut checks, opts),
    }
    SuiteReport { suite, checks: checks.0 }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect()
}

fn jacobson(checks: &mut Checks, opts: &VerifyOptions) {
    for p in opts.primes(&[2, 3, 5]) {
        let report = jacobson_report(p);
        let mut notes = Vec::new();
        if let Ok(r) = &report {
            let names = a_generator_names(p);
            for (i, j) in r.components.iter().enumerate() {
                notes.push(format!("J_{} = {j}", i + 1));
                if i == 0 {
                    notes.push(format!("  J_1 = ad_x^{}(y): {}", p - 1, r.j1_is_ad_power));
                } else if let Some(Some(c)) = r.derived_certificates.get(i - 1) {
                    notes.push(format!("  in [a,a]: {}", c.render(&names)));
                }
            }
        }
        checks.push(
            format!("jacobson p={p}"),
            report.map(|r| {
                let mut detail = r.to_json();
                detail["generators"] = json!(a_generator_names(p));
                (r.passed(), detail)
            }),
        );
        checks.note(notes);
    }
}

fn cartier_suite(checks: &mut Checks, opts: &VerifyOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCA27);
    for p in opts.primes(&[2, 3]) {
        for k in [1, 2] {
            let outcome = Field::new(p, k).map(|field| {
                let ring = PolyRing::new(field.clone(), 1);
                let mut compared = 0;
                let mut agree = true;
                for a in 0..=12 {
                    for c in field.elements().skip(1) {
                        let w = OneForm::basic(&ring, 0, MPoly::monomial(&ring, vec![a], c));
                        compared += 1;
                        agree &= matches!((cartier(&w), oracle::cartier_by_decomposition(&w)), (Ok(x), Ok(y)) if x == y);
                    }
                }
                (agree, json!({ "monomials": compared }))
            });
            checks.push(format!("oracle agreement q={}^{k}", p), outcome);
        }
    }
    let primes = opts.primes(&[2, 3]);
    let mut exact_ok = true;
    let mut linear_ok = true;
    let mut instances = 0;
    for i in 0..200 {
        let p = primes[i % primes.len()];
        let k = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=2);
        let Ok(field) = Field::new(p, k) else { continue };
        let ring = PolyRing::new(field, n);
        let u = MPoly::random(&ring, 8, 0.5, &mut rng);
        exact_ok &= cartier(&d0(&u)).map(|c| c.is_zero()).unwrap_or(false);
        let f = MPoly::random(&ring, 2, 0.6, &mut rng);
        let w = random_closed(&ring, 4, &mut rng);
        let lhs = cartier(&w.mul_fn(&f.frobenius()));
        let rhs = cartier(&w).map(|c| c.mul_fn(&f));
        linear_ok &= matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b);
        instances += 1;
    }
    checks.push("C(exact) = 0", Ok((exact_ok, json!({ "instances": instances }))));
    checks.push("C(f^p w) = f C(w)", Ok((linear_ok, json!({ "instances": instances }))));
}

/// `du + sum_i g_i^p x_i^{p-1} dx_i`, which is closed in any number of variables.
pub fn random_closed<R: Rng + ?Sized>(ring: &PolyRing, bound: u32, rng: &mut R) -> OneForm {
    let p = ring.p();
    let mut w = d0(&MPoly::random(ring, bound + 1, 0.5, rng));
    for i in 0..ring.nvars() {
        let g = MPoly::random(ring, bound / p, 0.6, rng);
        let piece = OneForm::basic(ring, i, &g.frobenius() * &MPoly::var(ring, i).pow(p - 1));
        w = OneForm::new(ring, w.comps().iter().zip(piece.comps()).map(|(a, b)| a + b).collect()).expect("same ring");
    }
    w
}

pub fn random_closed_g1<R: Rng + ?Sized>(ring: &PolyRing, ggd: &GradedGroupData, bound: u32, rng: &mut R) -> MatForm {
    let mut out = MatForm::zero(ring, ggd.d());
    for &(a, b) in ggd.g1() {
        let w = random_closed(ring, bound, rng);
        for i in 0..ring.nvars() {
            out = out.add(&MatForm::basic(ring, ggd.d(), i, a, b, w.comp(i).clone()));
        }
    }
    out
}

fn change(checks: &mut Checks, opts: &VerifyOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4A6);
    let ggd = grading(&Cochar::normal_form(2, 1).expect("valid")).expect("valid");
    for p in opts.primes(&[2, 3]) {
        for (n, instances, convention) in
            [(1, 30, SignConvention::Standard), (2, 6, SignConvention::Standard), (1, 6, SignConvention::Flipped)]
        {
            let outcome = Field::prime(p).map(|field| {
                let ring = PolyRing::new(field, n);
                let (mut ks_ok, mut pc_ok, mut collapse_ok) = (true, true, true);
                for _ in 0..instances {
                    let x = PolyMatrix::random_unimodular(&ring, 2, 2, 3, &mut rng);
                    let Ok(chart) = PolyChart::new(&ring, &ggd, x, convention) else {
                        ks_ok = false;
                        continue;
                    };
                    let w = random_closed_g1(&ring, &ggd, 4, &mut rng);
                    let dl = random_closed_g1(&ring, &ggd, 4, &mut rng);
                    let sum = w.add(&dl);
                    ks_ok &= ks_form(&chart, &sum).sub(&ks_form(&chart, &w)) == phi_tilde_chart(&chart, &dl);
                    match (p_curvature(&sum), p_curvature(&w), c_tilde_form(&dl)) {
                        (Ok(a), Ok(b), Ok(c)) => {
                            pc_ok &= a.untwisted.sub(&b.untwisted) == c.neg();
                            collapse_ok &= a.raw == collapse_formula(&sum);
                        }
                        _ => pc_ok = false,
                    }
                }
                (ks_ok && pc_ok && collapse_ok, json!({ "instances": instances, "ks": ks_ok, "p_curvature": pc_ok, "collapse": collapse_ok }))
            });
            let conv = match convention {
                SignConvention::Standard => "standard",
                SignConvention::Flipped => "flipped",
            };
            checks.push(format!("change formulas p={p} n={n} {conv}"), outcome);
        }
    }
}

fn orbits(checks: &mut Checks, opts: &VerifyOptions) {
    let census = (|| {
        let ggd = grading(&Cochar::normal_form(2, 1)?)?;
        let r = orbit_decomposition(&ggd, &Field::prime(2)?, opts.limit)?;
        let mut stabs: Vec<u128> = r.classes.iter().map(|c| c.stabilizer).collect();
        stabs.sort();
        let ok = r.group_order == 6
            && r.k_order == 4
            && r.num_orbits() == 2
            && stabs == [1, 2]
            && r.mass().to_string() == "3/2";
        Ok((ok, r.to_json()))
    })();
    checks.push("census d=2 d'=1 q=2", census);
    for d in 2..=3 {
        for dp in 1..d {
            for q in [2, 3, 4] {
                let outcome = (|| {
                    let ggd = grading(&Cochar::normal_form(d, dp)?)?;
                    let field = Field::of_order(q)?;
                    let r = orbit_decomposition(&ggd, &field, opts.limit)?;
                    let stab_sum: num_rational::Ratio<u128> =
                        r.classes.iter().map(|c| num_rational::Ratio::new(1, c.stabilizer)).sum();
                    let mut ok = r.consistent() && stab_sum == r.mass();
                    let mut detail = json!({ "orbits": r.num_orbits(), "mass": r.mass().to_string() });
                    if field.k() == 1 {
                        let stab = stabilizer_order(&ggd, &field, &Mat::identity(&field, d), opts.limit)?;
                        let levi = ggd.order(SubgroupKind::M, q as u64);
                        ok &= stab == levi;
                        detail["stabilizer_of_identity"] = json!(stab as u64);
                    }
                    Ok((ok, detail))
                })();
                checks.push(format!("mass d={d} d'={dp} q={q}"), outcome);
            }
        }
    }
}

fn lau(checks: &mut Checks, opts: &VerifyOptions) {
    for (d, dp, q) in [(2, 1, 2), (2, 1, 3), (2, 1, 4), (3, 1, 2), (3, 2, 2), (3, 1, 3)] {
        let outcome = (|| {
            let ggd = grading(&Cochar::normal_form(d, dp)?)?;
            let field = Field::of_order(q)?;
            let identity = phi_at(&ggd, &field, &DisplayPoint::new(&field, Mat::identity(&field, d))?);
            let identity_ok = identity.phi == Mat::identity(&field, ggd.dim(1));
            let part = orbit_partition(&ggd, &field, opts.limit)?;
            let mut per_orbit = vec![None; part.num_orbits];
            let mut constant = true;
            let mut exponent_ok = true;
            for (x, &label) in part.elements.iter().zip(&part.labels) {
                let inv = lau_invariants(&phi_at(&ggd, &field, &DisplayPoint { x: x.clone() }));
                exponent_ok &= inv.order_exponent == dp * (d - dp);
                let slot = &mut per_orbit[label as usize];
                match slot {
                    None => *slot = Some(inv),
                    Some(prev) => constant &= *prev == inv,
                }
            }
            let detail = json!({
                "points": part.elements.len(),
                "orbits": part.num_orbits,
                "identity_is_semilinear_identity": identity_ok,
                "order_exponent": exponent_ok,
                "constant_on_orbits": constant,
            });
            Ok((identity_ok && constant && exponent_ok, detail))
        })();
        checks.push(format!("invariants d={d} d'={dp} q={q}"), outcome);
    }
}

fn katz_examples() -> Result<(bool, Value)> {
    let ggd = grading(&Cochar::normal_form(2, 1)?)?;
    let ring = PolyRing::new(Field::prime(2)?, 1);
    let x = MPoly::var(&ring, 0);
    let id = PolyChart::new(&ring, &ggd, PolyMatrix::identity(&ring, 2), SignConvention::Standard)?;
    let up = unipotent(&ring, &ggd, 0, 1, x)?;
    let e12 = MatForm::basic(&ring, 2, 0, 0, 1, MPoly::one(&ring));
    let zero = MatForm::zero(&ring, 2);
    let a = katz_check(&id, &zero).satisfied();
    let b = katz_check(&up, &e12).satisfied();
    let c = !katz_check(&id, &e12).satisfied();
    Ok((a && b && c, json!({ "identity_zero": a, "unipotent_e12": b, "identity_e12_rejected": c })))
}

fn unipotent(ring: &PolyRing, ggd: &GradedGroupData, a: usize, b: usize, f: MPoly) -> Result<PolyChart> {
    let m = PolyMatrix::identity(ring, 2).add(&PolyMatrix::unit(ring, 2, a, b, f));
    PolyChart::new(ring, ggd, m, SignConvention::Standard)
}

/// The charts of the torsor suite over `F_2[x]`, with names.
pub fn torsor_charts(ring: &PolyRing, ggd: &GradedGroupData) -> Result<Vec<(String, PolyChart)>> {
    let field = ring.field();
    let x = MPoly::var(ring, 0);
    let one = MPoly::one(ring);
    let mut out = vec![(
        "I".to_string(),
        PolyChart::new(ring, ggd, PolyMatrix::identity(ring, 2), SignConvention::Standard)?,
    )];
    out.push(("I + x E12".into(), unipotent(ring, ggd, 0, 1, x.clone())?));
    out.push(("I + x^3 E12".into(), unipotent(ring, ggd, 0, 1, x.pow(3))?));
    out.push(("I + (x + x^2) E12".into(), unipotent(ring, ggd, 0, 1, &x + &x.pow(2))?));
    out.push(("I + x E21".into(), unipotent(ring, ggd, 1, 0, x.clone())?));
    let swap = PolyMatrix::from_entries(ring, 2, vec![MPoly::zero(ring), one.clone(), one.clone(), MPoly::zero(ring)])?;
    out.push(("swap".into(), PolyChart::new(ring, ggd, swap, SignConvention::Standard)?));
    let zero = MPoly::zero(ring);
    let antidiag = PolyMatrix::from_entries(ring, 2, vec![x.clone(), one.clone(), one.clone(), zero.clone()])?;
    out.push(("[[x, 1], [1, 0]]".into(), PolyChart::new(ring, ggd, antidiag, SignConvention::Standard)?));
    let constant = PolyMatrix::from_entries(ring, 2, vec![one.clone(), one.clone(), one.clone(), zero])?;
    out.push(("[[1, 1], [1, 0]]".into(), PolyChart::new(ring, ggd, constant, SignConvention::Standard)?));
    debug_assert_eq!(field.q(), 2);
    Ok(out)
}

fn torsor(checks: &mut Checks, opts: &VerifyOptions) {
    checks.push("katz examples", katz_examples());
    let setup = (|| {
        let ggd = grading(&Cochar::normal_form(2, 1)?)?;
        let ring = PolyRing::new(Field::prime(2)?, 1);
        let charts = torsor_charts(&ring, &ggd)?;
        Ok::<_, Error>(charts)
    })();
    let charts = match setup {
        Ok(c) => c,
        Err(e) => {
            checks.push("torsor charts", Err(e));
            return;
        }
    };
    for (name, chart) in &charts {
        for bound in [3, 4] {
            let outcome = torsor_check(chart, bound, opts.limit).map(|r| (r.passed(), r.to_json()));
            checks.push(format!("torsor X = {name} D={bound}"), outcome);
        }
    }
    // Recorded, not asserted: phi = (1 + x^2)^2 pushes any solution past the bound.
    let observed = (|| {
        let ggd = grading(&Cochar::normal_form(2, 1)?)?;
        let ring = PolyRing::new(Field::prime(2)?, 1);
        let x = MPoly::var(&ring, 0);
        let one = MPoly::one(&ring);
        let m = PolyMatrix::from_entries(&ring, 2, vec![one.clone(), x.clone(), x.clone(), &one + &x.pow(2)])?;
        let chart = PolyChart::new(&ring, &ggd, m, SignConvention::Standard)?;
        let counts: Vec<usize> = (0..=4).map(|b| brute_force_solve(&chart, b, opts.limit).map(|s| s.len())).collect::<Result<_>>()?;
        Ok((true, json!({ "solutions_by_bound": counts })))
    })();
    checks.push("observation X = [[1, x], [x, 1 + x^2]]", observed);
}

fn artin_milne(checks: &mut Checks, _opts: &VerifyOptions) {
    let surj = |n: usize, q: u32, bound: u32| -> Result<(bool, Value)> {
        let ring = PolyRing::new(Field::of_order(q)?, n);
        let fs = FormSpace::new(&ring, ValueDatum::alpha_p(&ring), bound);
        let r = check_linearization_surjective(&fs)?;
        Ok((r.surjective, r.to_json()))
    };
    for bound in 0..=3 {
        for q in [2, 4] {
            checks.push(format!("C~ surjective n=1 q={q} D={bound}"), surj(1, q, bound));
        }
        checks.push(format!("C~ surjective n=2 q=2 D={bound}"), surj(2, 2, bound));
    }
    let small = (|| {
        let ring = PolyRing::new(Field::prime(2)?, 1);
        let fs = FormSpace::with_bounds(&ring, ValueDatum::alpha_p(&ring), 2, 2);
        let r = check_linearization_surjective(&fs)?;
        Ok((!r.surjective, r.to_json()))
    })();
    checks.push("small domain is detected", small);

    let mut rng = ChaCha8Rng::seed_from_u64(0xA1F4);
    let alpha = (|| {
        let mut ok = true;
        for i in 0..100 {
            let p = [2, 3][i % 2];
            let field = Field::new(p, rng.gen_range(1..=2))?;
            let ring = PolyRing::new(field, rng.gen_range(1..=2));
            let a = MPoly::random(&ring, 6, 0.5, &mut rng);
            ok &= in_kernel(&ValueDatum::alpha_p(&ring), &alpha_p_image(&a))?;
        }
        Ok((ok, json!({ "instances": 100 })))
    })();
    checks.push("alpha_p family in kernel", alpha);
    let mu = (|| {
        let mut ok = true;
        for i in 0..100 {
            let p = [2, 3][i % 2];
            let field = Field::new(p, rng.gen_range(1..=2))?;
            let ring = PolyRing::laurent(field.clone());
            let c = field.random_nonzero(&mut rng);
            let k = rng.gen_range(-20..=20);
            ok &= in_kernel(&ValueDatum::mu_p(&ring), &mu_p_image(&ring, c, k)?)?;
        }
        Ok((ok, json!({ "instances": 100 })))
    })();
    checks.push("mu_p family in kernel", mu);
}

fn structure(checks: &mut Checks, opts: &VerifyOptions) {
    for d in 1..=3 {
        for dp in 0..=d {
            for q in [2, 3, 4] {
                let outcome = (|| {
                    let ggd = grading(&Cochar::normal_form(d, dp)?)?;
                    let r = structure_report(&ggd, &Field::of_order(q)?, opts.limit)?;
                    Ok((r.passed(), r.to_json()))
                })();
                checks.push(format!("structure d={d} d'={dp} q={q}"), outcome);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn quick_suites_pass() {
        let opts = VerifyOptions { primes: Some(vec![2]), limit: 10_000_000 };
        for s in [Suite::Jacobson, Suite::Cartier, Suite::Torsor] {
            let r = run_suite(s, &opts);
            assert!(r.passed(), "{}", r.render());
        }
    }

    #[test]
    fn random_closed_forms_are_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2, 3] {
            let ring = PolyRing::new(Field::prime(p).unwrap(), 2);
            for _ in 0..10 {
                assert!(random_closed(&ring, 5, &mut rng).is_closed());
            }
        }
    }
}
