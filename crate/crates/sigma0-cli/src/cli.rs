//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sigma0::field::parse_ideal;
use sigma0::geodesics::q_f64;
use sigma0::mu::{TrigFunction, WeightIndex};
use sigma0::orders::{describe_index, relative_fundamental_unit, LatticeSpec, RelativeQuadraticOrder, UnitIndex};
use sigma0::stats::{
    equi_rect_report, equi_report, geometric_side, pgt_report, sign_invariance_report, theta_report, theta_weighted,
    units_report, ComparisonReport, GeodesicTable,
};
use sigma0::testfn::TestFunction;
use sigma0::{BaseField, FieldElement};

use crate::cache::ClassCache;
use crate::config::RunConfig;
use crate::pipeline;
use crate::report::{jnum, jopt, num, Report, Section};
use crate::table::{self, Enumeration};

#[derive(Parser, Debug)]
#[command(name = "sigma0", version, about = "Closed geodesics and holonomy statistics over real quadratic fields")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// key = value configuration file, overridden by flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON-lines cache of class numbers
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// csv, json or text
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    precision_bits: Option<String>,
    #[arg(long, global = true)]
    unit_height: Option<String>,
    #[arg(long, global = true)]
    ideal_norm_cap: Option<String>,
    #[arg(long, global = true)]
    node_limit: Option<String>,
    /// seed for random grids
    #[arg(long, global = true)]
    seed: Option<String>,
    /// worker threads, 0 for one per core
    #[arg(long, global = true)]
    threads: Option<String>,
    /// exit with status 3 when a result is not certified
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Base field data
    #[command(subcommand)]
    Field(FieldCmd),
    /// Hyperbolic-elliptic classes of length <= x
    Enumerate(EnumerateArgs),
    /// Counting and equidistribution statistics
    #[command(subcommand)]
    Stats(StatsCmd),
    #[command(subcommand)]
    Check(CheckCmd),
    #[command(subcommand)]
    Trace(TraceCmd),
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Subcommand, Debug)]
enum FieldCmd {
    Info {
        #[arg(long)]
        m: i128,
    },
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    m: i128,
    /// length cutoff
    #[arg(long)]
    x: f64,
    /// CSV file; a FILE.meta.json sidecar is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    /// finite ramified prime as an HNF "[[a,b],[0,c]]" (repeatable)
    #[arg(long)]
    ram: Vec<String>,
    /// number of ramified infinite places
    #[arg(long, default_value_t = 0)]
    ra: u32,
    /// covolume of the lattice
    #[arg(long)]
    vol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum StatsCmd {
    /// Prime geodesic counts and the weighted Chebyshev sum
    Pgt {
        #[arg(long = "in")]
        input: PathBuf,
        /// "a,b,c", "lo:hi:count" or "random:count:lo:hi"
        #[arg(long)]
        grid: Option<String>,
        /// count all classes instead of primitive ones
        #[arg(long)]
        all: bool,
    },
    /// Holonomy averages against mu
    Equi {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, conflicts_with = "rect", required_unless_present = "rect")]
        fm: Option<i64>,
        /// "lo:hi"
        #[arg(long, allow_hyphen_values = true)]
        rect: Option<String>,
        /// degree of the extremal polynomials
        #[arg(long = "N", default_value_t = 16)]
        degree: usize,
        #[arg(long)]
        grid: Option<String>,
        /// average over theta and -theta for asymmetric rectangles
        #[arg(long)]
        symmetrize: bool,
    },
    /// Relative units of bounded height
    Units {
        #[arg(long)]
        m: i128,
        #[arg(long = "T")]
        t_max: f64,
        /// weight the count by F_k instead of 1
        #[arg(long)]
        fm: Option<i64>,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    /// Whether the class number equals the narrow class number
    Narrow {
        #[arg(long)]
        m: i128,
    },
}

#[derive(Subcommand, Debug)]
enum TraceCmd {
    /// Geometric side of the trace formula
    Geometric {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        weight: i64,
        #[arg(long)]
        vol: f64,
        /// "indicator:X,EPS" or "bump:R"
        #[arg(long)]
        testfn: String,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Class number and unit index of one order
    ClassNumber {
        #[arg(long)]
        m: i128,
        /// "a+b*w"
        #[arg(long = "D", id = "big_d", allow_hyphen_values = true)]
        big_d: String,
        /// HNF "[[a,b],[0,c]]"
        #[arg(long = "d", id = "small_d")]
        small_d: String,
    },
}

struct Ctx {
    config: RunConfig,
    cache: ClassCache,
    strict: bool,
}

/// Command output and whether everything in it is certified.
struct Outcome {
    report: Report,
    certified: bool,
}

impl Outcome {
    fn exact(report: Report) -> Self {
        Outcome { report, certified: true }
    }
}

/// Runs one invocation and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return clap_status(&e);
        }
    };
    let strict = cli.global.strict;
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e, strict)
        }
    }
}

/// Help and version requests succeed; every other parse failure is a usage error.
fn clap_status(e: &clap::Error) -> i32 {
    if e.use_stderr() {
        1
    } else {
        0
    }
}

fn exit_code(e: &anyhow::Error, strict: bool) -> i32 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<sigma0::Error>() {
            return match err {
                sigma0::Error::Precondition(_) | sigma0::Error::Unsupported(_) => 2,
                sigma0::Error::SearchExhausted { .. } if strict => 3,
                _ => 1,
            };
        }
    }
    1
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(p) = &g.config {
        c.load_file(p)?;
    }
    let flags = [
        ("cache_path", g.cache.as_ref().map(|p| p.display().to_string())),
        ("format", g.format.clone()),
        ("precision_bits", g.precision_bits.clone()),
        ("unit_height", g.unit_height.clone()),
        ("ideal_norm_cap", g.ideal_norm_cap.clone()),
        ("node_limit", g.node_limit.clone()),
        ("seed", g.seed.clone()),
        ("threads", g.threads.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            c.set(k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
        }
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<i32> {
    let config = load_config(&cli.global)?;
    if config.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global();
    }
    let cache = ClassCache::open(config.cache_path.as_deref(), config.bounds())?;
    let ctx = Ctx { config, cache, strict: cli.global.strict };
    let out = match cli.cmd {
        Command::Field(FieldCmd::Info { m }) => field_info(&ctx, m)?,
        Command::Enumerate(a) => enumerate(&ctx, &a)?,
        Command::Stats(StatsCmd::Pgt { input, grid, all }) => stats_pgt(&ctx, &input, grid.as_deref(), all)?,
        Command::Stats(StatsCmd::Equi { input, fm, rect, degree, grid, symmetrize }) => {
            stats_equi(&ctx, &input, fm, rect.as_deref(), degree, grid.as_deref(), symmetrize)?
        }
        Command::Stats(StatsCmd::Units { m, t_max, fm }) => stats_units(&ctx, m, t_max, fm)?,
        Command::Check(CheckCmd::Narrow { m }) => check_narrow(m)?,
        Command::Trace(TraceCmd::Geometric { input, weight, vol, testfn }) => {
            trace_geometric(&input, weight, vol, &testfn)?
        }
        Command::Oracle(OracleCmd::ClassNumber { m, big_d, small_d }) => oracle_class_number(&ctx, m, &big_d, &small_d)?,
    };
    let Some(out) = out else { return Ok(0) };
    let text = out.report.render(ctx.config.format, &ctx.config.to_json(), &ctx.config.digest())?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    Ok(if ctx.strict && !out.certified { 3 } else { 0 })
}

fn field(m: i128) -> Result<BaseField> {
    Ok(BaseField::new(m)?)
}

fn field_info(ctx: &Ctx, m: i128) -> Result<Option<Outcome>> {
    let k = field(m)?;
    let prec = ctx.config.precision_bits;
    let e = k.eps_k;
    let s = Section::new("field")
        .field("m", m as i64)
        .field("disc", k.disc as i64)
        .field("omega", format!("w^2 = {}*w + {}", k.p, k.q))
        .field("h_K", k.h_k)
        .field("eps_K", e.to_text())
        .field("eps_K_norm", k.eps_norm)
        .field("eps_K_embeddings", json!([jnum(k.embed(&e, 0, prec).mid_f64()), jnum(k.embed(&e, 1, prec).mid_f64())]))
        .field("regulator", jnum(k.regulator()))
        .field("narrow_equals_class", k.sign_data().narrow_equals_class);
    Ok(Some(Outcome::exact(Report::new("field info", vec![s]))))
}

fn ram_spec(k: BaseField, ram: &[String], ra: u32, vol: Option<f64>) -> Result<LatticeSpec> {
    let ram_f = ram.iter().map(|s| parse_ideal(s)).collect::<sigma0::Result<Vec<_>>>()?;
    Ok(LatticeSpec::new(k, ram_f, ra, vol)?)
}

fn enumerate_run(ctx: &Ctx, spec: &LatticeSpec, x: f64) -> Result<Enumeration> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(sigma0::Error::Precondition(format!("x must be positive, got {x}")).into());
    }
    Ok(pipeline::enumerate(spec, x, &ctx.cache, &ctx.config.bounds())?)
}

fn enumerate(ctx: &Ctx, a: &EnumerateArgs) -> Result<Option<Outcome>> {
    let spec = ram_spec(field(a.m)?, &a.ram, a.ra, a.vol)?;
    let e = enumerate_run(ctx, &spec, a.x)?;
    let certified = e.table.uncertified() == 0;
    let Some(out) = &a.out else {
        let mut stdout = std::io::stdout().lock();
        table::write_csv(&mut stdout, &e.table.classes)?;
        return Ok(if ctx.strict && !certified { Some(quiet_failure()) } else { None });
    };
    table::save(out, &e, &ctx.config.to_json(), &ctx.config.digest())?;
    let s = Section::new("enumerate")
        .field("table", out.display().to_string())
        .field("metadata", table::meta_path(out).display().to_string())
        .field("m", a.m as i64)
        .field("x", jnum(a.x))
        .field("classes", e.table.classes.len())
        .field("elliptic_classes", e.elliptic.len())
        .field("uncertified", e.table.uncertified());
    Ok(Some(Outcome { report: Report::new("enumerate", vec![s]), certified }))
}

/// Nothing left to print, but the run was not certified.
fn quiet_failure() -> Outcome {
    Outcome { report: Report::new("", Vec::new()), certified: false }
}

/// Grid specs: "a,b,c", "lo:hi:count", "random:count:lo:hi" (seeded).
pub fn parse_grid(s: &str, seed: u64) -> Result<Vec<f64>> {
    let s = s.trim();
    let nums = |v: &[&str]| -> Result<Vec<f64>> {
        v.iter().map(|t| t.trim().parse::<f64>().with_context(|| format!("grid value '{t}'"))).collect()
    };
    let mut g = if let Some(rest) = s.strip_prefix("random:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            bail!("random grid is random:count:lo:hi");
        }
        let count: usize = p[0].parse().context("grid count")?;
        let (lo, hi) = (nums(&p[1..2])?[0], nums(&p[2..3])?[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| rng.gen_range(lo..=hi)).collect()
    } else if s.contains(':') {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            bail!("range grid is lo:hi:count");
        }
        let (lo, hi) = (nums(&p[0..1])?[0], nums(&p[1..2])?[0]);
        let count: usize = p[2].parse().context("grid count")?;
        match count {
            0 => Vec::new(),
            1 => vec![hi],
            c => (0..c).map(|i| lo + (hi - lo) * i as f64 / (c - 1) as f64).collect(),
        }
    } else {
        nums(&s.split(',').collect::<Vec<_>>())?
    };
    if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
        bail!("grid '{s}' is empty or not finite");
    }
    g.sort_by(|a, b| a.total_cmp(b));
    Ok(g)
}

fn grid_or_default(ctx: &Ctx, grid: Option<&str>, table: &GeodesicTable) -> Result<Vec<f64>> {
    match grid {
        Some(s) => parse_grid(s, ctx.config.seed),
        None => Ok(vec![table.x]),
    }
}

fn comparison(r: &ComparisonReport) -> Section {
    let mut s = Section::new(&r.name)
        .field("main_term", r.main_term.clone())
        .notes(&r.notes)
        .columns(&["x", "value", "value_hi", "main", "ratio"]);
    for row in &r.rows {
        s.row(vec![jnum(row.x), jnum(row.value), jnum(row.value_hi), jnum(row.main), jopt(row.ratio)]);
    }
    s
}

fn stats_pgt(ctx: &Ctx, input: &Path, grid: Option<&str>, all: bool) -> Result<Option<Outcome>> {
    let e = table::load(input)?;
    let grid = grid_or_default(ctx, grid, &e.table)?;
    let sections = vec![comparison(&pgt_report(&e.table, &grid, all)?), comparison(&theta_report(&e.table, &grid)?)];
    Ok(Some(Outcome { report: Report::new("stats pgt", sections), certified: e.table.uncertified() == 0 }))
}

/// "lo:hi[,lo:hi...]".
pub fn parse_rect(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|side| {
            let (lo, hi) = side.trim().split_once(':').ok_or_else(|| anyhow!("rectangle side '{side}' is not lo:hi"))?;
            let lo: f64 = lo.trim().parse().with_context(|| format!("rectangle bound '{lo}'"))?;
            let hi: f64 = hi.trim().parse().with_context(|| format!("rectangle bound '{hi}'"))?;
            Ok((lo, hi))
        })
        .collect()
}

fn weight(k: i64) -> Result<WeightIndex> {
    Ok(WeightIndex::new(&[k])?)
}

fn stats_equi(
    ctx: &Ctx,
    input: &Path,
    fm: Option<i64>,
    rect: Option<&str>,
    degree: usize,
    grid: Option<&str>,
    symmetrize: bool,
) -> Result<Option<Outcome>> {
    let e = table::load(input)?;
    let t = &e.table;
    let grid = grid_or_default(ctx, grid, t)?;
    let certified = t.uncertified() == 0;
    if let Some(k) = fm {
        let f = TrigFunction::fm(&weight(k)?)?;
        let r = equi_report(t, &f, &grid)?;
        let s = comparison(&r).field("target", format!("F_{k}"));
        return Ok(Some(Outcome { report: Report::new("stats equi", vec![s]), certified }));
    }
    let rect = parse_rect(rect.expect("clap requires --fm or --rect"))?;
    let r = equi_rect_report(t, &rect, degree, &grid, symmetrize)?;
    let rect_text = rect.iter().map(|(a, b)| format!("{}:{}", num(*a), num(*b))).collect::<Vec<_>>().join(",");
    let meta = |m: &sigma0::beurling::RectMeta| {
        json!({
            "mu_poly": jnum(m.mu_poly),
            "deviation": jnum(m.deviation),
            "stated_bound": jnum(m.stated_bound),
            "provable_bound": jnum(m.provable_bound),
            "cost": jnum(m.cost.total()),
        })
    };
    let mut s = Section::new("sandwich")
        .field("rect", rect_text)
        .field("N", degree)
        .field("symmetrized", r.symmetrized)
        .field("mu", jnum(r.mu))
        .field("majorant", meta(&r.majorant))
        .field("minorant", meta(&r.minorant))
        .notes(&r.notes)
        .columns(&["x", "count", "minorant", "frequency", "majorant", "mu", "width", "brackets"]);
    for row in &r.rows {
        s.row(vec![
            jnum(row.x),
            jnum(row.count),
            jnum(row.minorant),
            jnum(row.frequency),
            jnum(row.majorant),
            jnum(r.mu),
            jnum(r.width(row)),
            json!(r.brackets(row)),
        ]);
    }
    Ok(Some(Outcome { report: Report::new("stats equi", vec![s]), certified }))
}

fn stats_units(ctx: &Ctx, m: i128, t_max: f64, fm: Option<i64>) -> Result<Option<Outcome>> {
    if !(t_max > 1.0) || !t_max.is_finite() {
        return Err(sigma0::Error::Precondition(format!("T must exceed 1, got {t_max}")).into());
    }
    let spec = LatticeSpec::hilbert(field(m)?);
    let e = enumerate_run(ctx, &spec, 2.0 * t_max.ln())?;
    let (f, target) = match fm {
        Some(k) => (TrigFunction::fm(&weight(k)?)?, format!("F_{k}")),
        None => (TrigFunction::constant(spec.n() as usize, 1.0), "1".to_string()),
    };
    let r = units_report(&e.table, t_max, &f)?;
    let s = comparison(&r).field("target", target).field("m", m as i64);
    Ok(Some(Outcome { report: Report::new("stats units", vec![s]), certified: e.table.uncertified() == 0 }))
}

/// A unit that is positive at every place but is not a square.
fn nonsquare_totally_positive_unit(k: &BaseField) -> Option<FieldElement> {
    [k.eps_k, -k.eps_k]
        .into_iter()
        .find(|u| k.sign_at(u, 0) > 0 && k.sign_at(u, 1) > 0 && k.sqrt_elem(u).is_none())
}

fn check_narrow(m: i128) -> Result<Option<Outcome>> {
    let k = field(m)?;
    let r = sign_invariance_report(&k);
    let witness = nonsquare_totally_positive_unit(&k);
    let agrees = witness.is_none() == r.narrow_equals_class;
    if !agrees {
        return Err(anyhow!("sign data and the totally positive unit test disagree for m = {m}"));
    }
    let s = Section::new("narrow")
        .field("h_K == h_K+", r.narrow_equals_class)
        .field("m", m as i64)
        .field("eps_K", k.eps_k.to_text())
        .field("eps_K_norm", k.eps_norm)
        .field("nonsquare_totally_positive_unit", witness.map(|u| u.to_text()))
        .field("unit_test_agrees", agrees)
        .field(
            "guaranteed_sign_changes",
            r.guaranteed.iter().map(|v| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join(", "),
        )
        .field("statement", r.statement.clone());
    Ok(Some(Outcome::exact(Report::new("check narrow", vec![s]))))
}

fn trace_geometric(input: &Path, k: i64, vol: f64, testfn: &str) -> Result<Option<Outcome>> {
    let e = table::load(input)?;
    let tf = TestFunction::parse(testfn)?;
    let g = geometric_side(&e.table, &e.elliptic, &weight(k)?, &tf, vol)?;
    let certified = e.table.uncertified() == 0
        && e.elliptic.iter().all(|c| c.multiplicity.certified);
    let s = Section::new("geometric_side")
        .field("testfn", tf.name())
        .field("support", jnum(tf.support()))
        .field("weight", k)
        .field("vol", jnum(vol))
        .field("identity", jnum(g.identity))
        .field("hyperbolic", jnum(g.hyperbolic))
        .field("elliptic", jnum(g.elliptic))
        .field("total", jnum(g.total))
        .field("theta_weighted", jnum(theta_weighted(&e.table, &tf)))
        .field("classes", e.table.classes.len())
        .field("elliptic_classes", e.elliptic.len());
    Ok(Some(Outcome { report: Report::new("trace geometric", vec![s]), certified }))
}

fn oracle_class_number(ctx: &Ctx, m: i128, big_d: &str, small_d: &str) -> Result<Option<Outcome>> {
    let k = field(m)?;
    let dd = FieldElement::parse(big_d)?;
    let d = parse_ideal(small_d)?;
    let o = RelativeQuadraticOrder::build(&k, &dd, &d)?;
    let bounds = ctx.config.bounds();
    let units = relative_fundamental_unit(&o, &bounds)?;
    let class = ctx.cache.get(&o, &units)?;
    let h = &class.h_o;
    let eps = units.eps.map(|u| {
        let (x, y) = o.to_surd(&u);
        format!("{} + ({})*sqrt({})", x.to_text(), y.to_text(), o.dprime.to_text())
    });
    let certified = h.certified && matches!(class.unit_index, UnitIndex::Known(_));
    let s = Section::new("order")
        .field("m", m as i64)
        .field("D", dd.to_text())
        .field("d", d.to_string())
        .field("D_prime", o.dprime.to_text())
        .field("signature", o.signature.as_str())
        .field("conductor", o.conductor.to_string())
        .field("h_O", h.value)
        .field("h_values", json!(h.values))
        .field("oracle_bounds", json!([jnum(h.bounds[0]), jnum(h.bounds[1])]))
        .field("certified", h.certified)
        .field("unit_index", describe_index(&class.unit_index))
        .field("eps", eps.map(Value::String).unwrap_or(Value::Null))
        .field("regulator", jopt(units.reg))
        .field("torsion", units.torsion)
        .field("m1_hilbert", q_f64(&sigma0::orders::m1(&o, &class, &LatticeSpec::hilbert(k.clone()))?.lo));
    Ok(Some(Outcome { report: Report::new("oracle class-number", vec![s]), certified }))
}
