//! The `divlab` command line: subcommands, exit codes and plain-text
//! reports. [`run`] never prints; the binary forwards its [`Outcome`].
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails or a
//! size cap is exceeded, 2 for unreadable or invalid input.

pub mod format;
pub mod reproduce;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use crate::diversity::{
    induced_metric, verify_diversity_axioms, verify_diversity_axioms_reduced, AxiomReport, Coverage,
    FiniteDiversity, EXHAUSTIVE_AXIOM_CAP,
};
use crate::constructions::hypcon_check;
use crate::error::Error;
use crate::fixedpoint::{
    brute_force_fixed_points, diversity_nonexpansive_violation, metric_nonexpansive_violation,
    minimal_invariant_descent, DescentOptions, DescentOutcome, DescentStep, SelfMap,
};
use crate::rat::{parse_rat, Rat};
use crate::random::{bump_one, seeded};
use crate::sets::{GroundSet, SetFunction};
use crate::tightspan::{
    cardinality_order, delta_t, hyperconvexity_certificate_capped, is_lp_minimal, is_tight_point,
    kappa, mask_order, metric_hyperconvexity_certificate, px_constraints_capped, tighten,
    HyperconvexityVerdict, HYPERCONVEX_CAP, PX_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Overrides the per-command ground-size caps.
pub const CAP_ENV: &str = "DIVLAB_CAP";

#[derive(Parser, Debug)]
#[command(name = "divlab", version, about = "Exact computations with finite diversities")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    /// Subsets by bitmask.
    Lex,
    /// Subsets by size, then bitmask.
    Card,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check both diversity axioms over the whole table.
    Verify { path: PathBuf },
    /// Print the induced metric d(x, y) = δ({x, y}).
    Metric { path: PathBuf },
    /// Check (|A| − 1)·δ(A) ≤ Σ d over every set A.
    Hypcon { path: PathBuf },
    /// Embedded points, tightened perturbations and δ_T values.
    Tightspan {
        path: PathBuf,
        /// Only perturb the embedding of this point.
        #[arg(long)]
        seed_point: Option<String>,
        #[arg(long, value_enum, default_value_t = OrderArg::Card)]
        order: OrderArg,
        /// Perturbations per embedded point.
        #[arg(long, default_value_t = 2)]
        count: usize,
    },
    /// Decide hyperconvexity of the diversity and of its induced metric.
    Hyperconvex {
        path: PathBuf,
        /// Accepted slack for the metric check, as p/q.
        #[arg(long, value_parser = parse_rat_arg)]
        tolerance: Option<Rat>,
        #[arg(long)]
        metric_only: bool,
    },
    /// Run the minimal-invariant-set descent for a self-map.
    Fixedpoint {
        div: PathBuf,
        map: PathBuf,
        /// Start set such as {a,b}; defaults to the whole ground set.
        #[arg(long)]
        start: Option<String>,
        /// Largest displacement accepted in the terminal scan, as p/q.
        #[arg(long, value_parser = parse_rat_arg)]
        epsilon: Option<Rat>,
    },
    /// Counting diversity on three points: tight span not hyperconvex.
    ReproduceEx1,
    /// Glued six-leg gadget: an isometry that expands the diversity.
    ReproduceNoext {
        #[arg(long, default_value_t = 1)]
        grid: usize,
    },
}

fn parse_rat_arg(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

/// Exit code plus the text for each stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    text: String,
    warnings: Vec<String>,
    code: i32,
}

impl Report {
    fn new() -> Self {
        Self {
            text: String::new(),
            warnings: Vec::new(),
            code: EXIT_OK,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn fail(&mut self) {
        self.code = EXIT_FAIL;
    }
}

/// A failure before a report could be produced.
enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = std::result::Result<Report, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Verify { path } => cmd_verify(path),
        Command::Metric { path } => cmd_metric(path),
        Command::Hypcon { path } => cmd_hypcon(path),
        Command::Tightspan {
            path,
            seed_point,
            order,
            count,
        } => cmd_tightspan(path, seed_point.as_deref(), *order, *count, cli.seed),
        Command::Hyperconvex {
            path,
            tolerance,
            metric_only,
        } => cmd_hyperconvex(path, tolerance.clone().unwrap_or_else(Rat::zero), *metric_only),
        Command::Fixedpoint {
            div,
            map,
            start,
            epsilon,
        } => cmd_fixedpoint(div, map, start.as_deref(), epsilon.clone().unwrap_or_else(Rat::zero)),
        Command::ReproduceEx1 => cmd_reproduce_ex1(),
        Command::ReproduceNoext { grid } => cmd_reproduce_noext(*grid, cli.seed),
    };
    let mut outcome = match result {
        Ok(report) => Outcome {
            code: report.code,
            stderr: report
                .warnings
                .iter()
                .map(|w| format!("warning: {w}\n"))
                .collect(),
            stdout: report.text,
        },
        Err(f) => failure_outcome(f),
    };
    if let Some(out) = &cli.out {
        if let Err(e) = std::fs::write(out, &outcome.stdout) {
            outcome.stderr.push_str(&format!("error: cannot write {}: {e}\n", out.display()));
            outcome.code = EXIT_INPUT;
        }
    }
    outcome
}

fn failure_outcome(f: Failure) -> Outcome {
    let (code, message) = match f {
        Failure::Lib(Error::CapExceeded { size, cap }) => (
            EXIT_FAIL,
            format!("ground set of size {size} exceeds cap {cap} (set {CAP_ENV} to override)"),
        ),
        Failure::Lib(e) => (EXIT_INPUT, e.to_string()),
        Failure::Io(p, e) => (EXIT_INPUT, format!("cannot read {}: {e}", p.display())),
        Failure::Usage(m) => (EXIT_INPUT, m),
    };
    Outcome {
        code,
        stdout: String::new(),
        stderr: format!("error: {message}\n"),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load(path: &Path) -> std::result::Result<format::DiversityFile, Failure> {
    Ok(format::parse_diversity(&read(path)?)?)
}

fn cap(default: usize) -> std::result::Result<usize, Failure> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{CAP_ENV} must be a nonnegative integer, got `{v}`"))),
        Err(_) => Ok(default),
    }
}

fn table_lines(report: &mut Report, f: &SetFunction, indent: &str) {
    let g = f.ground();
    for s in g.nonempty_subsets() {
        report.line(format!("{indent}{} = {}", g.format_set(s), f.get(s)));
    }
}

fn render_axioms(report: &mut Report, g: &GroundSet, r: &AxiomReport) {
    const SHOWN: usize = 20;
    let coverage = match &r.coverage {
        Coverage::Exhaustive => "exhaustive".to_string(),
        Coverage::Reduced => "exhaustive (covering pairs and singleton-middle triples)".to_string(),
        Coverage::Sampled {
            triples,
            seed,
            fraction,
        } => format!("sampled: {triples} triples, seed {seed}, coverage fraction {fraction:.3e}"),
    };
    report.line(format!("coverage: {coverage}"));
    if r.is_empty() {
        report.line("no violations: the table is a diversity");
        return;
    }
    for v in r.axiom1.iter().take(SHOWN) {
        let why = if v.set.len() <= 1 { "must be 0" } else { "must be positive" };
        report.line(format!("axiom 1: delta({}) = {} {why}", g.format_set(v.set), v.value));
    }
    if r.axiom2_total > 0 {
        report.line(format!("axiom 2: {} violating triples", r.axiom2_total));
    }
    for v in r.axiom2.iter().take(SHOWN) {
        report.line(format!(
            "axiom 2: A={}, B={}, C={}: delta(A∪C) = {} > {} = delta(A∪B) + delta(B∪C)",
            g.format_set(v.a),
            g.format_set(v.b),
            g.format_set(v.c),
            v.lhs,
            v.rhs
        ));
    }
    for v in r.monotonicity.iter().take(SHOWN) {
        report.line(format!("monotonicity: {} ⊆ {} but the value drops", g.format_set(v.sub), g.format_set(v.sup)));
    }
    for v in r.subadditivity.iter().take(SHOWN) {
        report.line(format!(
            "subadditivity: {} and {} intersect: {} > {}",
            g.format_set(v.a),
            g.format_set(v.b),
            v.lhs,
            v.rhs
        ));
    }
}

fn cmd_verify(path: &Path) -> CmdResult {
    let table = load(path)?.table()?;
    let g = table.ground().clone();
    let r = if g.len() <= EXHAUSTIVE_AXIOM_CAP {
        verify_diversity_axioms(&table)
    } else {
        verify_diversity_axioms_reduced(&table)
    };
    let mut report = Report::new();
    report.line(format!("points: {}", g.names().join(" ")));
    render_axioms(&mut report, &g, &r);
    if !r.is_empty() {
        report.fail();
    }
    Ok(report)
}

fn cmd_metric(path: &Path) -> CmdResult {
    let div = load(path)?.build()?;
    let m = induced_metric(&div);
    let g = div.ground();
    let mut report = Report::new();
    report.line(format!("induced metric on {} points", g.len()));
    for x in 0..g.len() {
        for y in x + 1..g.len() {
            report.line(format!("d({}, {}) = {}", g.name(x), g.name(y), m.dist(x, y)));
        }
    }
    Ok(report)
}

fn cmd_hypcon(path: &Path) -> CmdResult {
    let div = load(path)?.build()?;
    let g = div.ground();
    let r = hypcon_check(&div);
    let mut report = Report::new();
    if r.holds() {
        report.line("(|A|-1)·delta(A) <= sum of pairwise distances holds for every A");
    } else {
        report.fail();
        report.line(format!("{} violations", r.violations.len()));
        for v in &r.violations {
            report.line(format!(
                "A={}: (|A|-1)·delta(A) = {} > {} = sum of pairwise distances",
                g.format_set(v.set),
                v.lhs,
                v.rhs
            ));
        }
    }
    Ok(report)
}

fn cmd_tightspan(
    path: &Path,
    seed_point: Option<&str>,
    order: OrderArg,
    count: usize,
    seed: u64,
) -> CmdResult {
    let div = load(path)?.build()?;
    let sys = px_constraints_capped(&div, cap(PX_CAP)?)?;
    let g = div.ground().clone();
    let order = match order {
        OrderArg::Lex => mask_order(&g),
        OrderArg::Card => cardinality_order(&g),
    };
    let mut report = Report::new();
    let kappas: Vec<SetFunction> = (0..g.len()).map(|x| kappa(&div, x)).collect::<Result<_, _>>()?;
    for (x, h) in kappas.iter().enumerate() {
        let tight = is_tight_point(&div, h);
        report.line(format!("h_{} = kappa({}): tight = {tight}", g.name(x), g.name(x)));
        table_lines(&mut report, h, "  ");
        if !tight {
            report.fail();
        }
    }
    let targets: Vec<usize> = match seed_point {
        Some(label) => vec![g.index_of(label)?],
        None => (0..g.len()).collect(),
    };
    let mut rng = seeded(seed);
    let mut tightened = Vec::new();
    for &x in &targets {
        for i in 0..count {
            let (f0, bumped) = bump_one(&mut rng, &kappas[x])?;
            let tp = tighten(&sys, &f0, &order)?;
            let tight = is_tight_point(&div, &tp.f);
            let minimal = is_lp_minimal(&sys, &tp.f)?;
            report.line(format!(
                "perturbation {i} of h_{}: raised {} to {}; tightened: tight = {tight}, coordinatewise minimal = {minimal}",
                g.name(x),
                g.format_set(bumped),
                f0.get(bumped)
            ));
            table_lines(&mut report, &tp.f, "  ");
            if !(tight && minimal) {
                report.fail();
            }
            tightened.push((x, tp.f));
        }
    }
    report.line("delta_T:");
    for x in 0..g.len() {
        let d = delta_t(&div, &kappas[x..=x])?;
        report.line(format!("  {{h_{}}} = {d}", g.name(x)));
    }
    for x in 0..g.len() {
        for y in x + 1..g.len() {
            let d = delta_t(&div, &[kappas[x].clone(), kappas[y].clone()])?;
            report.line(format!("  {{h_{}, h_{}}} = {d}", g.name(x), g.name(y)));
        }
    }
    let all = delta_t(&div, &kappas)?;
    report.line(format!("  all embedded points = {all} (delta(X) = {})", div.get(g.full())));
    for (x, f) in &tightened {
        let d = delta_t(&div, &[kappas[*x].clone(), f.clone()])?;
        report.line(format!("  {{h_{}, tightened}} = {d}", g.name(*x)));
    }
    Ok(report)
}

fn cmd_hyperconvex(path: &Path, tolerance: Rat, metric_only: bool) -> CmdResult {
    let div = load(path)?.build()?;
    let g = div.ground().clone();
    let mut report = Report::new();
    if !metric_only {
        let cap = cap(HYPERCONVEX_CAP)?;
        let verdict = hyperconvexity_certificate_capped(&div, cap)?;
        match &verdict {
            HyperconvexityVerdict::NotHyperconvex(cert) => {
                let sys = px_constraints_capped(&div, cap)?;
                if !cert.verify(&sys) {
                    return Err(Failure::Lib(Error::InfeasiblePoint(
                        "diversity certificate failed re-verification".into(),
                    )));
                }
                report.fail();
                report.line("diversity: NotHyperconvex");
                report.line("  radii r satisfying every family inequality:");
                table_lines(&mut report, &cert.r, "    ");
                for w in &cert.witnesses {
                    report.line(format!(
                        "  z = {}: Y = {}, delta(Y ∪ {{z}}) - r(Y) = {}",
                        g.name(w.point),
                        g.format_set(w.set),
                        w.margin
                    ));
                }
            }
            HyperconvexityVerdict::Hyperconvex => report.line("diversity: Hyperconvex"),
            HyperconvexityVerdict::HyperconvexWithinTolerance(t) => {
                report.line(format!("diversity: HyperconvexWithinTolerance({t})"))
            }
        }
        if !tolerance.is_zero() {
            report.line("  (the tolerance applies to the metric check only)");
        }
    }
    let metric = induced_metric(&div);
    match metric_hyperconvexity_certificate(&metric, &tolerance)? {
        HyperconvexityVerdict::NotHyperconvex(cert) => {
            if !cert.verify(&metric, &tolerance) {
                return Err(Failure::Lib(Error::InfeasiblePoint(
                    "metric certificate failed re-verification".into(),
                )));
            }
            report.fail();
            report.line("metric: NotHyperconvex");
            for (x, r) in cert.r.iter().enumerate() {
                report.line(format!("  r({}) = {r}", g.name(x)));
            }
            for w in &cert.witnesses {
                report.line(format!(
                    "  z = {}: d(z, {}) - r({}) = {} > {tolerance}",
                    g.name(w.point),
                    g.name(w.far),
                    g.name(w.far),
                    w.margin
                ));
            }
        }
        HyperconvexityVerdict::Hyperconvex => report.line("metric: Hyperconvex"),
        HyperconvexityVerdict::HyperconvexWithinTolerance(t) => {
            report.line(format!("metric: HyperconvexWithinTolerance({t})"))
        }
    }
    Ok(report)
}

fn describe_step(g: &GroundSet, step: &DescentStep) -> String {
    match step {
        DescentStep::Hull { from, to } => {
            format!("hull: {} -> {}", g.format_set(*from), g.format_set(*to))
        }
        DescentStep::Shrink {
            from,
            d,
            attaining,
            radii,
            to,
        } => {
            let radii: Vec<String> = from
                .iter()
                .map(|x| format!("{}:{}", g.name(x), radii[x]))
                .collect();
            format!(
                "shrink: {} with d = {} (attained on {}), radii [{}] -> A' = {}",
                g.format_set(*from),
                d,
                g.format_set(*attaining),
                radii.join(" "),
                g.format_set(*to)
            )
        }
    }
}

fn cmd_fixedpoint(div_path: &Path, map_path: &Path, start: Option<&str>, epsilon: Rat) -> CmdResult {
    let div: FiniteDiversity = load(div_path)?.build()?;
    let g = div.ground().clone();
    let map: SelfMap = format::parse_map(&read(map_path)?, &g)?;
    let start = match start {
        Some(s) => g.parse_set(s)?,
        None => g.full(),
    };
    let metric = induced_metric(&div);
    let mut report = Report::new();
    let metric_violation = metric_nonexpansive_violation(&map, &metric)?;
    match metric_violation {
        None => report.line("metric-nonexpansive: yes"),
        Some((x, y)) => {
            let (tx, ty) = (map.image(x), map.image(y));
            report.line(format!(
                "metric-nonexpansive: no, d(T{}, T{}) = {} > {} = d({}, {})",
                g.name(x),
                g.name(y),
                metric.dist(tx, ty),
                metric.dist(x, y),
                g.name(x),
                g.name(y)
            ));
            report
                .warnings
                .push("map is not metric-nonexpansive; hypothesis violated".into());
        }
    }
    match diversity_nonexpansive_violation(&map, &div)? {
        None => report.line("diversity-nonexpansive: yes"),
        Some(e) => report.line(format!(
            "diversity-nonexpansive: no, delta(T{}) = {} > {}",
            g.format_set(e.set),
            e.after,
            e.before
        )),
    }
    let opts = DescentOptions {
        epsilon,
        terminal_scan: true,
    };
    let outcome = minimal_invariant_descent(&div, &map, start, &opts)?;
    report.line(format!("descent from {}:", g.format_set(start)));
    for step in outcome.trace() {
        report.line(format!("  {}", describe_step(&g, step)));
    }
    let oracle = brute_force_fixed_points(&map);
    let label = if metric_violation.is_some() {
        " (hypothesis violated)"
    } else {
        ""
    };
    let consistent = match &outcome {
        DescentOutcome::FixedPoint { point, via, .. } => {
            report.line(format!("outcome{label}: FixedPoint({}) via {via:?}", g.name(*point)));
            oracle.contains(point)
        }
        DescentOutcome::ApproxFixedPoint {
            point,
            displacement,
            set,
            ..
        } => {
            report.line(format!(
                "outcome{label}: ApproxFixedPoint({}) with d(Tx, x) = {} in {}",
                g.name(*point),
                displacement,
                g.format_set(*set)
            ));
            metric.dist(map.image(*point), *point) == displacement && *displacement <= opts.epsilon
        }
        DescentOutcome::StuckMinimalSet { set, d, stall, .. } => {
            report.line(format!(
                "outcome{label}: StuckMinimalSet({}) with d = {d}, stall {stall:?}",
                g.format_set(*set)
            ));
            !oracle.iter().any(|&x| set.contains(x))
        }
    };
    let names: Vec<&str> = oracle.iter().map(|&x| g.name(x)).collect();
    report.line(format!("oracle fixed points: {{{}}}", names.join(",")));
    report.line(format!(
        "oracle check: {}",
        if consistent { "agrees" } else { "DISAGREES" }
    ));
    let found = matches!(
        outcome,
        DescentOutcome::FixedPoint { .. } | DescentOutcome::ApproxFixedPoint { .. }
    );
    if !(consistent && found) {
        report.fail();
    }
    Ok(report)
}

fn cmd_reproduce_ex1() -> CmdResult {
    let r = reproduce::reproduce_ex1()?;
    let mut report = Report::new();
    report.text = r.render();
    if !r.passed() {
        report.fail();
    }
    Ok(report)
}

fn cmd_reproduce_noext(grid: usize, seed: u64) -> CmdResult {
    if grid == 0 {
        return Err(Failure::Usage("--grid must be at least 1".into()));
    }
    let r = reproduce::reproduce_noext_default(grid, seed)?;
    let mut report = Report::new();
    report.text = r.render();
    if !r.passed() {
        report.fail();
    }
    Ok(report)
}
