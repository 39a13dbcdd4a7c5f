mod golden;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fzip_core::artinmilne::{kernel_a, FormSpace, ValueDatum};
use fzip_core::field::Field;
use fzip_core::fzip::{frobenius_merged_count, orbit_decomposition, DisplayPoint};
use fzip_core::groupdata::{grading, structure_report, Cochar, GradedGroupData};
use fzip_core::katz::{brute_force_solve, katz_check, MatForm, PolyChart, SignConvention};
use fzip_core::lau::{g1_basis_names, lau_invariants, phi_at};
use fzip_core::poly::{PolyMatrix, PolyRing};
use fzip_core::verify::{run_suite, Suite, VerifyOptions};
use fzip_core::{enumeration_limit, Error};
use serde_json::{json, Value};

use crate::golden::Family;
use crate::io::{fmt_mat, read_json, to_pretty, CliError, CliResult};

#[derive(Parser)]
#[command(name = "fzip", version, about = "Exact computations with F-zips, Cartier operators and Katz connections")]
struct Cli {
    /// Emit JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Frame used to gauge-transform connection forms.
    #[arg(long, global = true, value_enum, default_value_t = Convention::Standard)]
    sign_convention: Convention,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Standard,
    Flipped,
}

impl From<Convention> for SignConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Standard => SignConvention::Standard,
            Convention::Flipped => SignConvention::Flipped,
        }
    }
}

#[derive(Args)]
struct CocharArgs {
    /// Matrix size.
    #[arg(long)]
    d: Option<usize>,
    /// Number of weight-1 entries in the normal form (1,..,1,0,..,0).
    #[arg(long)]
    dprime: Option<usize>,
    /// Explicit weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["d", "dprime"])]
    w: Option<Vec<i32>>,
}

impl CocharArgs {
    fn cochar(&self) -> CliResult<Cochar> {
        match (&self.w, self.d, self.dprime) {
            (Some(w), _, _) => Ok(Cochar::new(w.clone())),
            (None, Some(d), Some(dp)) => Ok(Cochar::normal_form(d, dp)?),
            _ => Err(CliError::Input("give either --w or both --d and --dprime".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Weight decomposition of gl_d and, with --q, the point-level structure checks.
    Grading {
        #[command(flatten)]
        cochar: CocharArgs,
        #[arg(long)]
        q: Option<u32>,
    },
    /// K-orbits on GL_d(F_q) with stabilizers and groupoid mass.
    Orbits {
        #[command(flatten)]
        cochar: CocharArgs,
        #[arg(long)]
        q: u32,
        /// Also count orbits up to the Frobenius twist.
        #[arg(long)]
        merged: bool,
    },
    /// Invariants of the semilinear map at each orbit representative.
    Lau {
        #[command(flatten)]
        cochar: CocharArgs,
        #[arg(long)]
        q: u32,
    },
    /// Kernel of C~ - phi~ on bounded closed forms.
    AmKernel {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Checks the Katz condition for one connection form.
    KatzCheck {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        omega: PathBuf,
    },
    /// Every solution of the Katz condition within a degree bound.
    Solve {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        deg: u32,
    },
    /// Runs verification suites.
    Verify {
        #[arg(long, conflicts_with = "all")]
        suite: Option<String>,
        #[arg(long)]
        all: bool,
        /// Restrict primes (repeatable or comma separated).
        #[arg(long, value_delimiter = ',')]
        p: Vec<u32>,
        /// Compare against golden files in this directory.
        #[arg(long)]
        testdata: Option<PathBuf>,
        /// Regenerate the golden files instead of comparing.
        #[arg(long, requires = "testdata")]
        bless: bool,
    },
}

struct Output {
    json: Value,
    table: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json { to_pretty(&out.json) + "\n" } else { out.table };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    let limit = enumeration_limit();
    match &cli.command {
        Command::Grading { cochar, q } => cmd_grading(&grading(&cochar.cochar()?)?, *q, limit),
        Command::Orbits { cochar, q, merged } => cmd_orbits(&grading(&cochar.cochar()?)?, *q, *merged, limit),
        Command::Lau { cochar, q } => cmd_lau(&grading(&cochar.cochar()?)?, *q, limit),
        Command::AmKernel { spec } => cmd_am_kernel(&read_json(spec)?),
        Command::KatzCheck { chart, omega } => {
            let chart = PolyChart::from_json(&read_json(chart)?, cli.sign_convention.into())?;
            let omega = MatForm::from_json(chart.ring(), chart.d(), &read_json(omega)?)?;
            cmd_katz_check(&chart, &omega)
        }
        Command::Solve { chart, deg } => {
            let chart = PolyChart::from_json(&read_json(chart)?, cli.sign_convention.into())?;
            cmd_solve(&chart, *deg, limit)
        }
        Command::Verify { suite, all, p, testdata, bless } => {
            let suites = match (suite, all) {
                (Some(s), false) => vec![Suite::parse(s)?],
                (None, true) => Suite::ALL.to_vec(),
                _ => return Err(CliError::Input("give --suite NAME or --all".into())),
            };
            let opts = VerifyOptions { primes: (!p.is_empty()).then(|| p.clone()), limit };
            cmd_verify(&suites, &opts, testdata.as_deref(), *bless)
        }
    }
}

fn position_name((a, b): (usize, usize)) -> String {
    format!("E{}{}", a + 1, b + 1)
}

fn cmd_grading(ggd: &GradedGroupData, q: Option<u32>, limit: u128) -> CliResult<Output> {
    let names = |i: i32| ggd.positions(i).iter().copied().map(position_name).collect::<Vec<_>>();
    let mut json = json!({
        "cochar": ggd.cochar().to_json(),
        "g_minus1": names(-1),
        "g0": names(0),
        "g1": names(1),
        "dims": [ggd.dim(-1), ggd.dim(0), ggd.dim(1)],
        "block_sizes": ggd.block_sizes(),
    });
    let mut table = format!(
        "w = {:?}\ng_-1: {}\ng_0:  {}\ng_1:  {}\ndims (-1, 0, 1): ({}, {}, {})\nLevi blocks: {:?}\n",
        ggd.cochar().w,
        names(-1).join(" "),
        names(0).join(" "),
        names(1).join(" "),
        ggd.dim(-1),
        ggd.dim(0),
        ggd.dim(1),
        ggd.block_sizes()
    );
    let mut ok = true;
    if let Some(q) = q {
        let report = structure_report(ggd, &Field::of_order(q)?, limit)?;
        ok = report.passed();
        table.push_str(&format!("structure checks over F_{q}: {}\n", if ok { "pass" } else { "FAIL" }));
        for (k, v) in report.to_json().as_object().expect("object") {
            if let Some(b) = v.as_bool() {
                table.push_str(&format!("  {k}: {b}\n"));
            }
        }
        json["structure"] = report.to_json();
    }
    Ok(Output { json, table, ok })
}

fn cmd_orbits(ggd: &GradedGroupData, q: u32, merged: bool, limit: u128) -> CliResult<Output> {
    let field = Field::of_order(q)?;
    let report = orbit_decomposition(ggd, &field, limit)?;
    let mut json = report.to_json();
    let mut table = format!(
        "w = {:?} over F_{q}: |G| = {}, |K| = {}, {} orbits, mass {}\n",
        ggd.cochar().w,
        report.group_order,
        report.k_order,
        report.num_orbits(),
        report.mass()
    );
    table.push_str("representative | size | stabilizer\n");
    for c in &report.classes {
        table.push_str(&format!("{} | {} | {}\n", fmt_mat(&field, &c.rep), c.size, c.stabilizer));
    }
    if merged {
        let n = frobenius_merged_count(ggd, &field, limit)?;
        json["frobenius_merged"] = json!(n);
        table.push_str(&format!("orbits up to Frobenius twist: {n}\n"));
    }
    Ok(Output { json, table, ok: report.consistent() })
}

fn cmd_lau(ggd: &GradedGroupData, q: u32, limit: u128) -> CliResult<Output> {
    let field = Field::of_order(q)?;
    let report = orbit_decomposition(ggd, &field, limit)?;
    let mut classes = Vec::new();
    let mut table = format!(
        "w = {:?} over F_{q}, g_1 basis {}\nrepresentative | size | phi | order exp | mult rank | nilp dim | nilp index\n",
        ggd.cochar().w,
        g1_basis_names(ggd).join(" ")
    );
    for c in &report.classes {
        let phi = phi_at(ggd, &field, &DisplayPoint::new(&field, c.rep.clone())?);
        let inv = lau_invariants(&phi);
        table.push_str(&format!(
            "{} | {} | {} | {} | {} | {} | {}\n",
            fmt_mat(&field, &c.rep),
            c.size,
            fmt_mat(&field, &phi.phi),
            inv.order_exponent,
            inv.mult_rank,
            inv.nilpotent_dim,
            inv.nilpotency_index
        ));
        classes.push(json!({
            "rep": c.rep.to_json(&field),
            "size": c.size as u64,
            "stabilizer": c.stabilizer as u64,
            "phi": phi.to_json(),
            "invariants": inv.to_json(),
        }));
    }
    let json = json!({
        "cochar": ggd.cochar().to_json(),
        "field": field.spec(),
        "orbits": report.num_orbits(),
        "mass": report.mass().to_string(),
        "classes": classes,
    });
    Ok(Output { json, table, ok: true })
}

fn cmd_am_kernel(spec: &Value) -> CliResult<Output> {
    let bad = |m: &str| CliError::Core(Error::Invalid(format!("am-kernel spec: {m}")));
    let field = Field::from_json(spec.get("field").ok_or_else(|| bad("missing field"))?)?;
    let n = spec.get("n").and_then(Value::as_u64).unwrap_or(1) as usize;
    let laurent = spec.get("laurent").and_then(Value::as_bool).unwrap_or(false);
    let ring = match (laurent, n) {
        (true, 1) => PolyRing::laurent(field),
        (true, _) => return Err(bad("the Laurent chart has exactly one variable")),
        (false, _) => PolyRing::new(field, n),
    };
    let bound = spec.get("D").and_then(Value::as_u64).ok_or_else(|| bad("missing D"))? as u32;
    let phi = PolyMatrix::from_json(&ring, spec.get("Phi").ok_or_else(|| bad("missing Phi"))?)?;
    let basis = match spec.get("basis") {
        Some(b) => serde_json::from_value(b.clone()).map_err(|_| bad("basis must be a list of names"))?,
        None => (1..=phi.dim()).map(|i| format!("e{i}")).collect(),
    };
    let datum = ValueDatum { basis, phi };
    let fs = FormSpace::with_bounds(&ring, datum, bound, bound);
    let kernel = kernel_a(&fs)?;
    let mut json = kernel.to_json();
    json["domain_fp_dim"] = json!(fs.fp_dim());
    let mut table = format!("kernel dimension over F_p: {} (domain dimension {})\n", kernel.dim(), fs.fp_dim());
    for b in &kernel.basis {
        table.push_str(&format!("  {}\n", b.to_json()));
    }
    Ok(Output { json, table, ok: true })
}

fn cmd_katz_check(chart: &PolyChart, omega: &MatForm) -> CliResult<Output> {
    let report = katz_check(chart, omega);
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut table = format!(
        "g_1-valued: {}\nclosed: {}\npCurv = -KS: {}\n",
        yes(report.g1_valued),
        yes(report.closed),
        yes(report.equation)
    );
    if let Some(r) = &report.residual {
        table.push_str(&format!("residual pCurv + KS: {}\n", r.to_json()));
    }
    table.push_str(&format!("Katz condition: {}\n", if report.satisfied() { "holds" } else { "fails" }));
    Ok(Output { json: report.to_json(), ok: report.satisfied(), table })
}

fn cmd_solve(chart: &PolyChart, deg: u32, limit: u128) -> CliResult<Output> {
    let sols = brute_force_solve(chart, deg, limit)?;
    let mut table = format!("{} solutions with coefficients of degree <= {deg}\n", sols.len());
    for s in &sols {
        table.push_str(&format!("  {}\n", s.to_json()));
    }
    let json = json!({ "degree_bound": deg, "count": sols.len(), "solutions": sols.iter().map(MatForm::to_json).collect::<Vec<_>>() });
    Ok(Output { json, table, ok: true })
}

fn cmd_verify(suites: &[Suite], opts: &VerifyOptions, testdata: Option<&std::path::Path>, bless: bool) -> CliResult<Output> {
    let reports: Vec<_> = suites.iter().map(|&s| run_suite(s, opts)).collect();
    let mut ok = reports.iter().all(|r| r.passed());
    let mut table: String = reports.iter().map(|r| r.render()).collect();
    let mut json = json!({ "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() });
    if let Some(dir) = testdata {
        let mut families = Vec::new();
        if suites.contains(&Suite::Orbits) {
            families.push(Family::Orbits);
        }
        if suites.contains(&Suite::Jacobson) {
            families.push(Family::Jacobson);
        }
        let mut entries = Vec::new();
        for f in families {
            entries.extend(golden::entries(dir, f, opts.limit)?);
        }
        if bless {
            golden::bless(&entries)?;
            table.push_str(&format!("blessed {} golden files\n", entries.len()));
            json["blessed"] = json!(entries.len());
        } else {
            let results = golden::compare(&entries)?;
            table.push_str("golden files:\n");
            for r in &results {
                let matches = r["matches"].as_bool().unwrap_or(false);
                ok &= matches;
                table.push_str(&format!("  [{}] {}\n", if matches { "pass" } else { "FAIL" }, r["file"].as_str().unwrap_or("")));
            }
            json["golden"] = Value::Array(results);
        }
    }
    json["passed"] = json!(ok);
    table.push_str(&format!("overall: {}\n", if ok { "PASS" } else { "FAIL" }));
    Ok(Output { json, table, ok })
}
