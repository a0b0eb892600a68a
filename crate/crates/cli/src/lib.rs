//! Command-line runner: `run`, `critical-points`, `check` and `compare`.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 when a
//! run stops before `t_max` or a check fails.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use config::{OrbitSpec, Plan, RunConfig, System};
use solitonflow_core::analyze::{
    arclength, asymptotic_report, critical_points, oracle_compare, reconstruct_ricci_flat_metric,
    reconstruct_soliton_metric, ricci_flat_convergence, round_trip, ClaimFlag, Relation, RoundTrip, DEFAULT_TAIL_FRACTION,
    SKIP,
};
use solitonflow_core::integrate::{
    integrate, integrate_with_projection, Termination, Trajectory, XyMonitor, XySample, ZMonitor, ZSample,
};
use solitonflow_core::model::{xy_from_z, Mode, Orbit, SolitonParams, WarpedProductSpec, ZState};
use solitonflow_core::seed::{soliton_seed, two_summands_seed, xy_seed};
use solitonflow_core::suites::{run_suite, Suite, SuiteReport};
use solitonflow_core::systems::{project_ricci_flat, XyField, ZField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;

/// Caps the number of concurrent runs in a sweep.
pub const THREADS_ENV: &str = "SOLITONFLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "solitonflow", version, about = "Steady gradient Ricci soliton and Ricci-flat ODE experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one or more configurations, writing a CSV and a JSON report
    /// for each. Several `--config` flags run as a concurrent sweep.
    Run {
        #[arg(long = "config", value_name = "PATH", required = true)]
        configs: Vec<PathBuf>,
        /// Output directory; overrides the paths in the configs.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Keep every K-th sample; overrides `integrator.decimate`.
        #[arg(long, value_name = "K")]
        decimate: Option<usize>,
    },
    /// List the stationary points of the phase-space system.
    CriticalPoints {
        /// Take the orbit from a warped or xy config.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["d", "lambda"])]
        config: Option<PathBuf>,
        /// Factor dimensions, comma separated.
        #[arg(long, value_delimiter = ',', requires = "lambda")]
        d: Vec<usize>,
        /// Einstein constants, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "d")]
        lambda: Vec<f64>,
        /// Also write the points as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run acceptance suites and print every claim with its margin.
    Check {
        /// One of invariants, example1, ricci-flat, two-summands,
        /// convergence-order; all suites when omitted.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
        /// Also write the suite reports as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Integrate a warped-product config in both coordinate systems and
    /// compare them, plus the metric reconstruction round trip.
    Compare {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "K")]
        decimate: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn execute(command: Command) -> i32 {
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    pool.install(|| match command {
        Command::Run { configs, out, decimate } => cmd_run(&configs, out.as_deref(), decimate),
        Command::CriticalPoints { config, d, lambda, out } => cmd_critical_points(config.as_deref(), d, lambda, out.as_deref()),
        Command::Check { suite, out } => cmd_check(suite.as_deref(), out.as_deref()),
        Command::Compare { config, out, decimate } => cmd_compare(&config, out.as_deref(), decimate),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

fn load_plan(path: &Path, decimate: Option<usize>) -> Result<Plan, String> {
    let mut cfg = RunConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(k) = decimate {
        cfg.integrator.decimate = k;
    }
    cfg.validate().map_err(|e| format!("{}: {e}", path.display()))
}

struct Job {
    config: PathBuf,
    plan: Plan,
    csv: PathBuf,
    report: PathBuf,
}

/// Output paths: `--out DIR` gives `DIR/<stem>.csv` and
/// `DIR/<stem>.report.json`; otherwise the config's own paths, relative
/// to the config file, with the same defaults next to the config.
fn output_paths(config: &Path, plan: &Plan, out: Option<&Path>) -> (PathBuf, PathBuf) {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let base = config.parent().unwrap_or(Path::new("")).to_path_buf();
    match out {
        Some(dir) => (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.report.json"))),
        None => (
            plan.csv.as_ref().map(|p| base.join(p)).unwrap_or_else(|| base.join(format!("{stem}.csv"))),
            plan.report
                .as_ref()
                .map(|p| base.join(p))
                .unwrap_or_else(|| base.join(format!("{stem}.report.json"))),
        ),
    }
}

fn cmd_run(configs: &[PathBuf], out: Option<&Path>, decimate: Option<usize>) -> i32 {
    let mut jobs = vec![];
    for path in configs {
        match load_plan(path, decimate) {
            Ok(plan) => {
                let (csv, report) = output_paths(path, &plan, out);
                jobs.push(Job {
                    config: path.clone(),
                    plan,
                    csv,
                    report,
                });
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    for j in &jobs {
        for p in [&j.csv, &j.report] {
            if !seen.insert(p.clone()) {
                eprintln!("error: output path {} is used twice in this sweep", p.display());
                return EXIT_USAGE;
            }
        }
    }
    let results: Vec<(i32, String)> = jobs.par_iter().map(run_job).collect();
    for (c, line) in &results {
        if *c == EXIT_USAGE {
            eprintln!("error: {line}");
        } else {
            println!("{line}");
        }
    }
    // A failed run outranks an early stop.
    let codes: Vec<i32> = results.iter().map(|(c, _)| *c).collect();
    if codes.contains(&EXIT_USAGE) {
        EXIT_USAGE
    } else if codes.contains(&EXIT_INCOMPLETE) {
        EXIT_INCOMPLETE
    } else {
        EXIT_OK
    }
}

fn run_job(job: &Job) -> (i32, String) {
    let name = job.config.display().to_string();
    match run_plan(&job.plan, &job.csv, &job.report) {
        Ok((termination, rows)) => {
            let code = if termination.is_complete() { EXIT_OK } else { EXIT_INCOMPLETE };
            let line = format!(
                "{name}: {}, {rows} rows -> {}, {}",
                match termination {
                    Termination::ReachedTMax => termination.tag().to_string(),
                    other => format!("{} ({other:?})", other.tag()),
                },
                job.csv.display(),
                job.report.display()
            );
            (code, line)
        }
        Err(e) => (EXIT_USAGE, format!("{name}: {e}")),
    }
}

/// Flags and summary of a phase-space run.
#[derive(Debug, Serialize)]
pub struct XyRunReport {
    pub label: String,
    pub mode: Mode,
    pub termination: Termination,
    pub samples: usize,
    pub s_end: f64,
    pub max_projection: f64,
    pub claim_flags: Vec<ClaimFlag>,
}

/// Integrates a validated plan and writes its CSV and report.
pub fn run_plan(plan: &Plan, csv: &Path, report: &Path) -> Result<(Termination, usize), String> {
    let err = |e: std::io::Error| format!("writing output: {e}");
    match (&plan.orbit, plan.system) {
        (OrbitSpec::Warped(spec), System::Xy) => {
            let tr = xy_run(spec, plan)?;
            output::write_file(csv, |w| output::write_xy_csv(w, &tr, spec.r())).map_err(err)?;
            output::write_json(report, &xy_report(&tr, spec, plan)?).map_err(err)?;
            Ok((tr.termination(), tr.len()))
        }
        (OrbitSpec::Warped(spec), _) => {
            let z0 = soliton_seed(spec, &plan.params, &plan.seed).map_err(|e| e.to_string())?;
            z_outputs(spec, ZField::warped(spec, plan.params), &z0, plan, csv, report)
        }
        (OrbitSpec::TwoSummands(spec), _) => {
            let z0 = two_summands_seed(spec, &plan.params, &plan.seed).map_err(|e| e.to_string())?;
            z_outputs(spec, ZField::two_summands(spec, plan.params), &z0, plan, csv, report)
        }
    }
}

fn z_outputs<O: Orbit>(
    orbit: &O,
    field: ZField<'_, O>,
    z0: &ZState,
    plan: &Plan,
    csv: &Path,
    report: &Path,
) -> Result<(Termination, usize), String> {
    let tr = z_run(orbit, &field, z0, plan)?;
    let rep = asymptotic_report(&tr, orbit, &plan.params, plan.mode, DEFAULT_TAIL_FRACTION).map_err(|e| e.to_string())?;
    output::write_file(csv, |w| output::write_z_csv(w, &tr, orbit.r())).map_err(|e| format!("writing {}: {e}", csv.display()))?;
    output::write_json(report, &rep).map_err(|e| format!("writing {}: {e}", report.display()))?;
    Ok((tr.termination(), tr.len()))
}

fn z_run<O: Orbit>(orbit: &O, field: &ZField<'_, O>, z0: &ZState, plan: &Plan) -> Result<Trajectory<ZSample>, String> {
    integrate(field, &ZMonitor::new(orbit, plan.params), z0.t, &z0.to_vec(), &plan.integrator).map_err(|e| e.to_string())
}

fn xy_run(spec: &WarpedProductSpec, plan: &Plan) -> Result<Trajectory<XySample>, String> {
    let xy0 = xy_seed(spec, &plan.params, &plan.seed).map_err(|e| e.to_string())?;
    let mut v = xy0.to_vec();
    let (field, monitor) = (XyField::new(spec), XyMonitor::full(spec));
    let tr = if plan.project {
        project_ricci_flat(spec, &mut v).map_err(|e| e.to_string())?;
        let proj = |w: &mut [f64]| project_ricci_flat(spec, w);
        integrate_with_projection(&field, &monitor, 0.0, &v, &plan.integrator, &proj)
    } else {
        integrate(&field, &monitor, 0.0, &v, &plan.integrator)
    };
    tr.map_err(|e| e.to_string())
}

fn xy_report(tr: &Trajectory<XySample>, spec: &WarpedProductSpec, plan: &Plan) -> Result<XyRunReport, String> {
    let mut flags = vec![];
    if tr.termination().is_complete() {
        match plan.mode {
            Mode::RicciFlat => {
                flags = ricci_flat_convergence(tr, spec, DEFAULT_TAIL_FRACTION).map_err(|e| e.to_string())?;
            }
            Mode::Soliton => {
                let l: Vec<f64> = tr.monitors().iter().map(|m| m.lcal).collect();
                let steps: Vec<(f64, f64)> = (SKIP.min(l.len() - 1)..l.len() - 1).map(|k| (tr.time(k + 1), l[k + 1] - l[k])).collect();
                flags.push(ClaimFlag::series("Lcal strictly decreasing", steps, Relation::Lt, 0.0));
            }
        }
    }
    Ok(XyRunReport {
        label: tr.label().to_string(),
        mode: plan.mode,
        termination: tr.termination(),
        samples: tr.len(),
        s_end: tr.final_state().0,
        max_projection: tr.max_projection(),
        claim_flags: flags,
    })
}

#[derive(Debug, Serialize)]
struct CriticalPointRow {
    kind: solitonflow_core::analyze::StationaryKind,
    subset: Vec<usize>,
    family: Option<String>,
    x: Vec<f64>,
    y: Vec<f64>,
    lcal: f64,
    xy_rhs: f64,
}

fn cmd_critical_points(config: Option<&Path>, d: Vec<usize>, lambda: Vec<f64>, out: Option<&Path>) -> i32 {
    let spec = match config {
        Some(path) => match load_plan(path, None) {
            Ok(Plan {
                orbit: OrbitSpec::Warped(spec),
                ..
            }) => Ok(spec),
            Ok(_) => Err(format!("{}: critical points need a warped-product spec", path.display())),
            Err(e) => Err(e),
        },
        None if d.is_empty() => Err("give --config or --d with --lambda".to_string()),
        None => WarpedProductSpec::new(d, lambda)
            .and_then(|s| s.check_circle_first().map(|_| s))
            .map_err(|e| e.to_string()),
    };
    let spec = match spec {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let points = match critical_points(&spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let rows: Vec<CriticalPointRow> = points
        .iter()
        .map(|p| CriticalPointRow {
            kind: p.kind,
            subset: p.subset.clone(),
            family: p.family.clone(),
            x: p.point.x.clone(),
            y: p.point.y.clone(),
            lcal: p.lyapunov(&spec),
            xy_rhs: p.residual(&spec),
        })
        .collect();
    println!("d = {:?}, lambda = {:?}", spec.d(), spec.lambda());
    println!("{:<14} {:<10} {:>13} {:>10}  X; Y", "kind", "subset", "Lcal", "|xy_rhs|");
    for row in &rows {
        let kind = serde_json::to_value(row.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let subset = if row.subset.is_empty() {
            "-".to_string()
        } else {
            format!("{{{}}}", row.subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
        };
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(", ");
        print!("{kind:<14} {subset:<10} {:>13.6e} {:>10.2e}  ({}); ({})", row.lcal, row.xy_rhs, fmt(&row.x), fmt(&row.y));
        match &row.family {
            Some(f) => println!("  [{f}]"),
            None => println!(),
        }
    }
    if let Some(path) = out {
        if let Err(e) = output::write_json(path, &rows) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    EXIT_OK
}

fn cmd_check(suite: Option<&str>, out: Option<&Path>) -> i32 {
    let suites = match suite {
        None => Suite::ALL.to_vec(),
        Some(name) => match Suite::from_str(name) {
            Ok(s) => vec![s],
            Err(e) => {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                eprintln!("error: {e}; expected one of {}", names.join(", "));
                return EXIT_USAGE;
            }
        },
    };
    let mut reports: Vec<SuiteReport> = vec![];
    let mut code = EXIT_OK;
    for s in suites {
        let rep = match run_suite(s) {
            Ok(r) => r,
            Err(e) => {
                println!("suite {s}: ERROR {e}");
                code = EXIT_INCOMPLETE;
                continue;
            }
        };
        print!("{}", render_suite(&rep));
        if !rep.passed() {
            code = EXIT_INCOMPLETE;
        }
        reports.push(rep);
    }
    if let Some(path) = out {
        if let Err(e) = output::write_json(path, &reports) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    code
}

fn flag_line(f: &ClaimFlag) -> String {
    format!("{}, margin {:+.3e}", f.summary(), f.margin())
}

/// Criterion summaries, every flag with its margin, and the wall-clock.
pub fn render_suite(rep: &SuiteReport) -> String {
    let mut s = format!(
        "suite {}: {} in {:.3} s\n",
        rep.suite,
        if rep.passed() { "PASS" } else { "FAIL" },
        rep.seconds
    );
    for c in &rep.criteria {
        s.push_str(&format!("  {}\n", c.summary()));
        for f in &c.flags {
            s.push_str(&format!("    {}\n", flag_line(f)));
        }
        for f in &c.informational {
            s.push_str(&format!("    (info) {}\n", flag_line(f)));
        }
        for (name, v) in &c.measurements {
            s.push_str(&format!("    (measured) {name} = {v:.6e}\n"));
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct CompareReport {
    mode: Mode,
    t_window: [f64; 2],
    z_termination: Termination,
    xy_termination: Termination,
    samples: usize,
    max_deviation: f64,
    worst_t: f64,
    per_coordinate: Vec<f64>,
    round_trip: Option<RoundTrip>,
    round_trip_error: Option<String>,
}

fn cmd_compare(config: &Path, out: Option<&Path>, decimate: Option<usize>) -> i32 {
    let plan = match load_plan(config, decimate) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let spec = match (&plan.orbit, plan.system) {
        (OrbitSpec::Warped(s), System::Warped) => s.clone(),
        _ => {
            eprintln!("error: {}: compare needs system `warped`", config.display());
            return EXIT_USAGE;
        }
    };
    match compare(&spec, &plan) {
        Ok(rep) => {
            println!(
                "t in [{}, {}]: {} samples, max deviation {:.3e} at t = {:.4}",
                rep.t_window[0], rep.t_window[1], rep.samples, rep.max_deviation, rep.worst_t
            );
            println!("per coordinate: {:?}", rep.per_coordinate.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>());
            match (&rep.round_trip, &rep.round_trip_error) {
                (Some(rt), _) => println!(
                    "round trip, relative: t {:.3e}, g {:.3e}, u {:.3e} over {} samples",
                    rt.t, rt.g, rt.u, rt.samples
                ),
                (None, Some(e)) => println!("round trip failed: {e}"),
                _ => {}
            }
            if let Some(path) = out {
                if let Err(e) = output::write_json(path, &rep) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            if rep.z_termination.is_complete() && rep.xy_termination.is_complete() {
                EXIT_OK
            } else {
                EXIT_INCOMPLETE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn compare(spec: &WarpedProductSpec, plan: &Plan) -> Result<CompareReport, String> {
    let e = |e: solitonflow_core::Error| e.to_string();
    let p: SolitonParams = plan.params;
    let z0 = soliton_seed(spec, &p, &plan.seed).map_err(e)?;
    let ztr = z_run(spec, &ZField::warped(spec, p), &z0, plan)?;
    let (t_end, v_end) = ztr.final_state();
    let s_max = (arclength(&ZState::from_slice(t_end, v_end), &z0, spec) + 1.0).ceil();
    let xy0 = xy_from_z(&z0, spec.d()).map_err(e)?;
    let mut xcfg = plan.integrator;
    xcfg.t_max = s_max;
    // Every step, so that interpolating in s stays below the deviations.
    xcfg.decimate = 1;
    let xtr = integrate(&XyField::new(spec), &XyMonitor::full(spec), 0.0, &xy0.to_vec(), &xcfg).map_err(e)?;
    let window = (1.0f64.min(t_end), t_end);
    let dev = oracle_compare(&ztr, &xtr, spec, window).map_err(e)?;
    let series = match plan.mode {
        Mode::Soliton => reconstruct_soliton_metric(&xtr, spec, p.c, None, z0.t, z0.u),
        Mode::RicciFlat => reconstruct_ricci_flat_metric(&xtr, spec, z0.xi(spec.d()), None, z0.t, z0.u, 1e-3),
    };
    let rt = series.and_then(|m| round_trip(&ztr, spec, &m, 0.0, window));
    Ok(CompareReport {
        mode: plan.mode,
        t_window: [window.0, window.1],
        z_termination: ztr.termination(),
        xy_termination: xtr.termination(),
        samples: dev.samples,
        max_deviation: dev.max_deviation,
        worst_t: dev.worst_t,
        per_coordinate: dev.per_coordinate,
        round_trip_error: rt.as_ref().err().map(|e| e.to_string()),
        round_trip: rt.ok(),
    })
}
