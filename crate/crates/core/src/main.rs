use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use anosov_lab::cli::{csv_artifact, json_artifact, parse_list, parse_matrix, sibling, Header, EXIT_ERROR, EXIT_UNDECIDED};
use anosov_lab::cocycle::{a1_experiment, a3_experiment, a3_observable, default_beta, A1Options, A3Options};
use anosov_lab::conjugacy::{
    periodic_data_compare, regularity_probe, solve_conjugacy, weak_flag_check, ConjugacyField, ConjugacyOptions,
    Perturbation, WeakFlagOptions,
};
use anosov_lab::dynamics::{count_fixed, enumerate_fixed, itinerary_setup, realize_itinerary, select_j, JMode, PhiMode, SetupOptions};
use anosov_lab::genericity::{fit_exponent, scan, write_csv, Column, Mode, ScanOptions};
use anosov_lab::spectral::{classify_with, ClassifyOptions};
use anosov_lab::{Error, Result};

/// Experiments on hyperbolic toral automorphisms.
///
/// Exit codes: 0 success, 1 error, 2 some classification undecided.
#[derive(Parser, Debug, Serialize)]
#[command(name = "anosov-lab", version)]
struct Cli {
    /// Starting precision for certified root isolation.
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (.json or .csv); tables and reports go to siblings of it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum Cmd {
    /// Classify a matrix against the hypotheses of the rigidity theorem.
    Classify(ClassifyArgs),
    /// Count B_Z(d) and its exceptional subset over norm balls.
    Scan(ScanArgs),
    /// Count (and optionally list) points fixed by Lⁿ.
    Periodic(PeriodicArgs),
    /// Realize an itinerary between two fixed points of L^N.
    Itinerary(ItineraryArgs),
    /// Rotation-shear cocycle experiments.
    Cocycle(CocycleArgs),
    /// Solve the cohomological equation of the skew-product construction.
    Cohom(CohomArgs),
    /// Solve h∘L = f∘h for a perturbation f = L + εp.
    Conjugate(ConjugateArgs),
    /// Compare periodic data of f and L at corresponding periodic points.
    PeriodicCompare(PeriodicCompareArgs),
    /// Weak-flag growth-rate check on sampled leaf pairs.
    FlagsCheck(FlagsArgs),
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    /// Built-in (cat, B3, C6, D4), inline JSON rows, or a JSON file.
    #[arg(long)]
    matrix: String,
    /// Also report the four integer products for 3 ≤ d ≤ 8.
    #[arg(long)]
    products: bool,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[arg(long)]
    dim: usize,
    /// Comma-separated thresholds.
    #[arg(long)]
    t_list: String,
    #[arg(long, value_enum, default_value_t = ScanMode::Exhaustive)]
    mode: ScanMode,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
struct PeriodicArgs {
    #[arg(long)]
    matrix: String,
    /// Largest period.
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Also list the points.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ObsMode {
    Smooth,
    Analytic,
}

#[derive(Args, Debug, Serialize)]
struct ItineraryArgs {
    #[arg(long, default_value = "cat")]
    matrix: String,
    /// Explicit itinerary as a string of 1s and 2s; otherwise the J-itinerary.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long, value_enum, default_value_t = ObsMode::Analytic)]
    mode: ObsMode,
    #[arg(long, default_value_t = 200)]
    len: usize,
    /// Rotation number for J (default: the skew-product β).
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CocycleArgs {
    #[command(subcommand)]
    which: CocycleCmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase", tag = "variant")]
enum CocycleCmd {
    /// Rotation-shear cocycle over L^N along the J-itinerary.
    A1 {
        #[arg(long, default_value = "cat")]
        matrix: String,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = ObsMode::Analytic)]
        mode: ObsMode,
        #[arg(long, default_value_t = 3000)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
    },
    /// Derivative cocycle of the skew product on the invariant subbundle W.
    A3 {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 2000)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
    },
}

#[derive(Args, Debug, Serialize)]
struct CohomArgs {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 2000)]
    n_max: usize,
}

#[derive(Args, Debug, Serialize)]
struct PertArgs {
    #[arg(long, default_value = "cat")]
    matrix: String,
    /// sample1 (d = 2) or sample4 (d = 4), or a JSON file with a perturbation.
    #[arg(long, default_value = "sample1")]
    pert: String,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Solve-grid points per side; verification uses twice as many.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct ConjugateArgs {
    #[command(flatten)]
    pert: PertArgs,
    /// Run the regularity probe along this direction (comma-separated).
    #[arg(long)]
    probe_dir: Option<String>,
    /// Base point of the probe.
    #[arg(long)]
    probe_at: Option<String>,
    /// Probe scales 10^-1 … 10^-k.
    #[arg(long, default_value_t = 8)]
    probe_depth: i32,
}

#[derive(Args, Debug, Serialize)]
struct PeriodicCompareArgs {
    #[command(flatten)]
    pert: PertArgs,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
}

#[derive(Args, Debug, Serialize)]
struct FlagsArgs {
    #[command(flatten)]
    pert: PertArgs,
    /// Flag index; all indices when omitted.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 14)]
    horizon: usize,
    #[arg(long, default_value_t = 1e-7)]
    delta: f64,
    /// Relative margin around ρ_k.
    #[arg(long, default_value_t = 0.05)]
    margin: f64,
}

struct Outcome {
    summary: Vec<String>,
    result: Value,
    tables: Vec<(&'static str, Vec<u8>)>,
    undecided: bool,
}

impl Outcome {
    fn new(result: Value) -> Self {
        Outcome { summary: Vec::new(), result, tables: Vec::new(), undecided: false }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn obs(m: ObsMode) -> (PhiMode, JMode) {
    match m {
        ObsMode::Smooth => (PhiMode::Smooth, JMode::Smooth),
        ObsMode::Analytic => (PhiMode::Analytic, JMode::Analytic),
    }
}

fn run_classify(a: &ClassifyArgs, cli: &Cli) -> Result<Outcome> {
    let m = parse_matrix(&a.matrix)?;
    let opts = ClassifyOptions { start_prec: cli.precision_bits, exclusion_products: a.products, ..Default::default() };
    match classify_with(&m, &opts) {
        Ok(r) => {
            let f = &r.flags;
            let mut o = Outcome::new(to_value(&r)?);
            o.summary.push(format!(
                "satisfies_theorem: {}  irreducible: {}  hyperbolic: {}  max class size: {}  reasons: {:?}",
                f.satisfies_theorem, f.irreducible, f.hyperbolic, f.max_class_size, f.exclusion_reasons
            ));
            Ok(o)
        }
        Err(e) if e.is_undecided() => {
            let mut o = Outcome::new(json!({ "undecided": e.to_string() }));
            o.summary.push(format!("undecided: {e}"));
            o.undecided = true;
            Ok(o)
        }
        Err(e) => Err(e),
    }
}

fn run_scan(a: &ScanArgs, cli: &Cli) -> Result<Outcome> {
    let ts: Vec<f64> = parse_list(&a.t_list)?;
    let mode = match a.mode {
        ScanMode::Exhaustive => Mode::Exhaustive,
        ScanMode::Sampled => Mode::Sampled,
    };
    let opts = ScanOptions { mode, sample_size: a.samples, seed: cli.seed, ..Default::default() };
    let rows = scan(a.dim, &ts, &opts)?;
    let mut body = Vec::new();
    write_csv(&rows, &mut body)?;
    let (ball, excl) = if rows.len() >= 2 {
        (fit_exponent(&rows, Column::Ball).ok(), fit_exponent(&rows, Column::Excluded).ok())
    } else {
        (None, None)
    };
    let mut o = Outcome::new(json!({ "rows": rows, "ball_fit": ball, "excluded_fit": excl }));
    for r in &rows {
        o.summary.push(format!("T={} count={} excluded={} undecided={}", r.t, r.count_ball, r.count_excluded, r.undecided));
    }
    if let Some(b) = ball {
        o.summary.push(format!("ball exponent {:.4} ± {:.4}", b.slope, b.stderr));
    }
    if let Some(e) = excl {
        o.summary.push(format!("excluded exponent {:.4} ± {:.4}", e.slope, e.stderr));
    }
    o.undecided = rows.iter().any(|r| r.undecided > 0);
    o.tables.push(("", body));
    Ok(o)
}

fn run_periodic(a: &PeriodicArgs) -> Result<Outcome> {
    let m = parse_matrix(&a.matrix)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut body = String::from("n,count\n");
    for n in 1..=a.n {
        let c = count_fixed(&m, n)?;
        summary.push(format!("n={n}: {c}"));
        body.push_str(&format!("{n},{c}\n"));
        let pts = if a.list { Some(enumerate_fixed(&m, n)?) } else { None };
        rows.push(json!({ "n": n, "count": c.to_string(), "points": pts }));
    }
    let mut o = Outcome::new(json!({ "rows": rows }));
    o.summary = summary;
    o.tables.push(("", body.into_bytes()));
    Ok(o)
}

fn run_itinerary(a: &ItineraryArgs) -> Result<Outcome> {
    let m = parse_matrix(&a.matrix)?;
    let setup = itinerary_setup(&m, &SetupOptions::default())?;
    let sigma: Vec<u8> = match &a.sigma {
        Some(s) => s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidInput(format!("itinerary symbol {c:?} is not 1 or 2"))),
            })
            .collect::<Result<_>>()?,
        None => {
            let beta = match a.beta {
                Some(b) => b,
                None => default_beta()?,
            };
            anosov_lab::cocycle::j_itinerary(&select_j(beta, obs(a.mode).1, a.len as u64), a.len)
        }
    };
    let it = realize_itinerary(&m, &setup.spec(sigma), setup.power)?;
    let mut body = String::from("j,sigma,deviation\n");
    for (j, (s, d)) in it.sigma.iter().zip(&it.deviations).enumerate() {
        body.push_str(&format!("{j},{s},{d:e}\n"));
    }
    let mut o = Outcome::new(json!({ "setup": setup, "itinerary": it }));
    o.summary.push(format!(
        "N={} radius={:.4} deviation max {:.3e} ≤ bound {:.3e}, x* with {}-bit denominator",
        setup.power, setup.radius, it.max_deviation, it.deviation_bound, it.precision_bits
    ));
    o.tables.push(("_deviations", body.into_bytes()));
    Ok(o)
}

fn run_cocycle(a: &CocycleArgs) -> Result<Outcome> {
    match &a.which {
        CocycleCmd::A1 { matrix, eps, beta, mode, n_max, record_every } => {
            let m = parse_matrix(matrix)?;
            let beta = match beta {
                Some(b) => *b,
                None => default_beta()?,
            };
            let opts = A1Options {
                beta,
                epsilon: *eps,
                mode: obs(*mode).0,
                n_max: *n_max,
                record_every: *record_every,
                setup: SetupOptions::default(),
            };
            let e = a1_experiment(&m, &opts)?;
            let mut j = Vec::new();
            e.j_trace.write_csv(&mut j)?;
            let mut all2 = Vec::new();
            e.all2_trace.write_csv(&mut all2)?;
            let mut o = Outcome::new(to_value(&e)?);
            o.summary.push(format!(
                "N={} |J∩[1,n]|={} twisted norm {:.3} (slope {:.3e}), K {:.3e}, all-2 max twisted {:.3e}, dual-path {:.2e}",
                e.setup.power,
                e.j.len(),
                e.j_trace.final_twisted_norm,
                e.j_trace.twisted_slope,
                e.j_trace.final_distortion,
                e.all2_trace.max_twisted_norm,
                e.j_trace.dual_path_error
            ));
            o.tables.push(("_j", j));
            o.tables.push(("_all2", all2));
            Ok(o)
        }
        CocycleCmd::A3 { eps, n_max, record_every } => {
            let opts = A3Options { epsilon: *eps, n_max: *n_max, record_every: *record_every, setup: SetupOptions::default() };
            let e = a3_experiment(&opts)?;
            let mut t = Vec::new();
            e.write_trace_csv(&mut t)?;
            let mut o = Outcome::new(to_value(&e)?);
            o.summary.push(format!(
                "r={:.9} N={} invariance {:.2e} structure {:.2e} periodic {:.2e} cohomology {:.2e} distortion slope {:.3e}",
                e.bc.r,
                e.setup.power,
                e.invariance_residual,
                e.structure_residual,
                e.periodic.max_relative_error,
                e.cohomology.residual,
                e.trace.distortion_slope
            ));
            o.tables.push(("_trace", t));
            Ok(o)
        }
    }
}

fn run_cohom(a: &CohomArgs) -> Result<Outcome> {
    let opts = A3Options { epsilon: a.eps, n_max: a.n_max, ..Default::default() };
    let c = a3_observable(&opts)?;
    let mut o = Outcome::new(to_value(&c)?);
    o.summary.push(format!(
        "ridge {:?}, rate r^N = {:.6}, residual ‖(1/r)∂ψ/∂v − φ‖∞ = {:.3e}",
        c.setup.ridge, c.rate, c.cohomology.residual
    ));
    Ok(o)
}

fn perturbation(a: &PertArgs) -> Result<Perturbation> {
    if std::path::Path::new(&a.pert).exists() {
        let text = std::fs::read_to_string(&a.pert)?;
        let p: Perturbation = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("malformed perturbation: {e}")))?;
        let p = Perturbation::new(p.dim, p.terms, a.eps)?;
        return Ok(p);
    }
    Perturbation::by_name(&a.pert, a.eps)
}

fn field(a: &PertArgs, cli: &Cli) -> Result<ConjugacyField> {
    let m = parse_matrix(&a.matrix)?;
    let p = perturbation(a)?;
    let opts = ConjugacyOptions { tol: a.tol, grid: a.grid, seed: cli.seed, ..Default::default() };
    solve_conjugacy(&m, &p, &opts)
}

fn field_summary(f: &ConjugacyField) -> String {
    format!(
        "grid {}→{} residual {:.3e} (verify {:.3e}, off-grid {:.3e}) ‖u‖∞ {:.4e} contraction {:.3} inverse error {:.2e}",
        f.solve_grid, f.verify_grid, f.residual, f.verify_residual, f.offgrid_residual, f.sup_norm, f.budget.contraction, f.inverse_error
    )
}

fn run_conjugate(a: &ConjugateArgs, cli: &Cli) -> Result<Outcome> {
    let f = field(&a.pert, cli)?;
    let probe = match &a.probe_dir {
        Some(dir) => {
            let w: Vec<f64> = parse_list(dir)?;
            let x0: Vec<f64> = match &a.probe_at {
                Some(s) => parse_list(s)?,
                None => vec![0.3; f.dim],
            };
            let scales: Vec<f64> = (1..=a.probe_depth).map(|i| 10f64.powi(-i)).collect();
            Some(regularity_probe(&f, &w, &x0, &scales)?)
        }
        None => None,
    };
    let d = f.dim;
    let mut body = String::new();
    let cols: Vec<String> = (0..d).map(|i| format!("x{}", i + 1)).chain((0..d).map(|i| format!("u{}", i + 1))).collect();
    body.push_str(&cols.join(","));
    body.push('\n');
    let n = f.solve_grid;
    for (i, u) in f.grid_values().chunks(d).enumerate() {
        let mut r = i;
        let mut xs = vec![0.0; d];
        for k in (0..d).rev() {
            xs[k] = (r % n) as f64 / n as f64;
            r /= n;
        }
        let line: Vec<String> = xs.iter().chain(u).map(|v| format!("{v:e}")).collect();
        body.push_str(&line.join(","));
        body.push('\n');
    }
    let mut o = Outcome::new(json!({ "field": f, "probe": probe }));
    o.summary.push(field_summary(&f));
    if let Some(p) = &probe {
        o.summary.push(format!("regularity probe (diagnostic): max oscillation {:.3e} over {} scales", p.max_oscillation, p.scales.len()));
    }
    o.tables.push(("_grid", body.into_bytes()));
    Ok(o)
}

fn run_periodic_compare(a: &PeriodicCompareArgs, cli: &Cli) -> Result<Outcome> {
    let f = field(&a.pert, cli)?;
    let t = periodic_data_compare(&f, a.nmax)?;
    let mut body = String::from("period,seed,point,newton_residual,converged,log_differences,max_abs_difference\n");
    for r in &t.rows {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        body.push_str(&format!(
            "{},{},{},{:e},{},{},{:e}\n",
            r.period,
            fmt(&r.seed),
            fmt(&r.point),
            r.newton_residual,
            r.converged,
            fmt(&r.log_differences),
            r.max_abs_difference
        ));
    }
    let mut o = Outcome::new(json!({ "field": f, "table": t }));
    o.summary.push(field_summary(&f));
    o.summary.push(format!(
        "{} periodic points up to period {}; {} Newton failures; max |Δ log modulus| {:.3e}",
        t.rows.len(),
        a.nmax,
        t.failures,
        t.max_abs_difference
    ));
    o.tables.push(("_periodic", body.into_bytes()));
    Ok(o)
}

fn run_flags(a: &FlagsArgs, cli: &Cli) -> Result<Outcome> {
    let f = field(&a.pert, cli)?;
    let sp = anosov_lab::spectral::splitting(f.matrix())?;
    let l = sp.unstable_rates().len();
    let ks: Vec<usize> = match a.k {
        Some(k) => vec![k],
        None => (1..=l).collect(),
    };
    let opts = WeakFlagOptions { samples: a.samples, horizon: a.horizon, delta: a.delta, margin: a.margin, seed: cli.seed };
    let mut reports = Vec::new();
    let mut o = Outcome::new(Value::Null);
    o.summary.push(field_summary(&f));
    for k in ks {
        let r = weak_flag_check(&f, k, &opts)?;
        o.summary.push(format!(
            "k={k}: ρ_k={:.6} fitted {:.6} (in window: {}, below next: {}), leaf pass rate {:.2}, negative control pass rate {}",
            r.rho_k,
            r.top.fitted_rate,
            r.rate_in_window,
            r.below_next,
            r.leaf.pass_rate,
            r.negative.as_ref().map_or("n/a".to_string(), |n| format!("{:.2}", n.pass_rate))
        ));
        reports.push(r);
    }
    let monotone = reports.windows(2).all(|w| w[0].top.fitted_rate < w[1].top.fitted_rate);
    o.summary.push(format!("monotone in k: {monotone}"));
    o.result = json!({ "field": f, "reports": reports, "monotone": monotone });
    Ok(o)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Classify(a) => run_classify(a, cli),
        Cmd::Scan(a) => run_scan(a, cli),
        Cmd::Periodic(a) => run_periodic(a),
        Cmd::Itinerary(a) => run_itinerary(a),
        Cmd::Cocycle(a) => run_cocycle(a),
        Cmd::Cohom(a) => run_cohom(a),
        Cmd::Conjugate(a) => run_conjugate(a, cli),
        Cmd::PeriodicCompare(a) => run_periodic_compare(a, cli),
        Cmd::FlagsCheck(a) => run_flags(a, cli),
    }
}

fn command_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Classify(_) => "classify",
        Cmd::Scan(_) => "scan",
        Cmd::Periodic(_) => "periodic",
        Cmd::Itinerary(_) => "itinerary",
        Cmd::Cocycle(_) => "cocycle",
        Cmd::Cohom(_) => "cohom",
        Cmd::Conjugate(_) => "conjugate",
        Cmd::PeriodicCompare(_) => "periodic-compare",
        Cmd::FlagsCheck(_) => "flags-check",
    }
}

fn emit(cli: &Cli, o: &Outcome) -> Result<()> {
    let header = Header::new(command_name(&cli.cmd), to_value(cli)?);
    let report = json_artifact(&header, &o.result)?;
    match &cli.out {
        None => {
            println!("{report}");
            for line in &o.summary {
                eprintln!("{line}");
            }
        }
        Some(path) => {
            let is_csv = path.extension().and_then(|e| e.to_str()) == Some("csv");
            let json_path = if is_csv { path.with_extension("json") } else { path.clone() };
            std::fs::write(&json_path, report)?;
            let mut written = vec![json_path];
            for (suffix, body) in &o.tables {
                let p = if is_csv && suffix.is_empty() { path.clone() } else { sibling(path, suffix, "csv") };
                std::fs::write(&p, csv_artifact(&header, body))?;
                written.push(p);
            }
            for line in &o.summary {
                println!("{line}");
            }
            for p in written {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let outcome = dispatch(&cli).and_then(|o| emit(&cli, &o).map(|_| o));
    match outcome {
        Ok(o) if o.undecided => ExitCode::from(EXIT_UNDECIDED as u8),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
