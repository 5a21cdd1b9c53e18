//! Command-line front end: instance generation, single simulations, and the
//! experiment drivers.
//!
//! Exit status: 0 on success, 2 when a reproduced table differs from the
//! reference values beyond tolerance, 1 on any runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ksearch::combinatorics::Assignment;
use ksearch::hamiltonian::{build_hc_normalized, build_hk};
use ksearch::harness::config::{parse_angle, parse_usize_list};
use ksearch::harness::{self, emit_outputs, ExperimentConfig, ExperimentKind, MSpec, ResultRecord};
use ksearch::instances::{
    dimacs_read, generate_f, generate_ff, generate_fs, surviving_assignments, to_dimacs, Instance,
};
use ksearch::rng::{derive_seed, stream};
use ksearch::search::{classical_local_search, solve_max_kssat_with, HiddenTarget, SolverOptions};
use ksearch::simulator::{default_qs_cap, AdiabaticParams, ScheduleConvention, SearchEngine, ThresholdSearch};
use ksearch::spectral::{gap_scaling_fit, top_two_eigen, GapMode, Locality, OperatorHandle};
use ksearch::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "ksearch", version, about = "k-local quantum search and adiabatic search on random k-SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance and print or write it as DIMACS CNF.
    Generate(GenerateArgs),
    /// Fixed-angle k-local search: a trajectory, or its first local maximum.
    SimulateQs(SimulateArgs),
    /// Adiabatic k-local search: one schedule, or the fewest steps reaching a threshold.
    SimulateAqs(SimulateArgs),
    /// Spectral gap of the mixer-plus-objective operator.
    Gap(GapArgs),
    /// Classical bit-flip local search against hidden targets.
    Classical(ClassicalArgs),
    /// Solve satisfiable instances end to end.
    Solve(SolveArgs),
    /// Reproduce the first-local-maximum table.
    Table1(ExpArgs),
    /// Reproduce the adiabatic threshold table.
    Table2(ExpArgs),
    /// Success distributions across clause densities.
    DensitySweep(SweepArgs),
    /// Coverage of the clause-count concentration bound.
    Concentration(ExpArgs),
    /// Gap along the interpolation path for several n.
    Gapscan(ExpArgs),
    /// Run whatever experiment a configuration file describes.
    Run(ExpArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct ExpArgs {
    /// Key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Variable counts: comma list and/or inclusive ranges `a..b`.
    #[arg(long)]
    n: Option<String>,
    /// Locality (comma list for tables).
    #[arg(long)]
    k: Option<String>,
    /// Clause counts: `400`, `4.5n`, `2n^2`, comma separated.
    #[arg(long)]
    m: Option<String>,
    /// Clause densities c with m = c·n, comma separated.
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Instances per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Phase angle: a number, `pi`, `pi/x`.
    #[arg(long)]
    theta: Option<String>,
    /// Success threshold of the adiabatic step search.
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats, comma separated: csv, json, svg.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Angle convention of the adiabatic schedule.
    #[arg(long)]
    convention: Option<ScheduleConvention>,
    /// Fixed step count for density sweeps instead of the per-n search.
    #[arg(long)]
    steps: Option<usize>,
    /// Measurement shots per adiabatic round of the solver.
    #[arg(long)]
    shots: Option<usize>,
    /// Record per-task wall time (makes reruns differ byte-wise).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Qs,
    Aqs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Fixed-angle search (clause counts in n²) or adiabatic schedule (densities c).
    #[arg(long, value_enum, default_value = "aqs")]
    variant: Variant,
    #[command(flatten)]
    exp: ExpArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    /// Uniform clauses.
    F,
    /// Clauses satisfied by a planted target.
    Ff,
    /// Uniform clauses conditioned on satisfiability.
    Fs,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[command(flatten)]
    clauses: ClauseArgs,
    #[arg(long, value_enum, default_value = "fs")]
    model: Model,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (`.cnf`) or directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct ClauseArgs {
    /// Clause count.
    #[arg(long, conflicts_with = "c")]
    m: Option<usize>,
    /// Clause density; m = round(c·n).
    #[arg(long)]
    c: Option<f64>,
}

impl ClauseArgs {
    fn resolve(self, n: usize) -> Option<usize> {
        self.m.or_else(|| self.c.map(|c| (c * n as f64).round() as usize))
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Run on a random satisfiable instance with this many clauses instead of
    /// pure search; success is measured over all its interpretations.
    #[command(flatten)]
    clauses: ClauseArgs,
    /// Run on an instance read from a DIMACS file.
    #[arg(long, conflicts_with_all = ["m", "c"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Phase angle of fixed-angle search.
    #[arg(long, default_value = "pi")]
    theta: String,
    /// Steps to run; when absent, search for the first local maximum
    /// (fixed-angle) or the threshold step count (adiabatic).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 0.99)]
    threshold: f64,
    #[arg(long, default_value = "tabulated")]
    convention: ScheduleConvention,
}

#[derive(Args, Debug)]
struct GapArgs {
    /// One n, or a list for a scaling fit.
    #[arg(long)]
    n: String,
    /// Locality; `full` uses k = n.
    #[arg(long, default_value = "3")]
    k: String,
    /// Interpolation point; when absent, the unit-weight sum (or midpoint with --mode).
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "sum")]
    mode: GapMode,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Solve one instance read from a DIMACS file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Skip the adiabatic rounds and go straight to full-width search.
    #[arg(long)]
    no_aqs: bool,
    #[command(flatten)]
    exp: ExpArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors exit 1: status 2 is reserved for reference mismatches.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::SimulateQs(a) => simulate(a, false),
        Command::SimulateAqs(a) => simulate(a, true),
        Command::Gap(a) => gap(a),
        Command::Classical(a) => classical(a),
        Command::Solve(a) => solve(a),
        Command::Table1(a) => experiment(Some(ExperimentKind::Table1), &a),
        Command::Table2(a) => experiment(Some(ExperimentKind::Table2), &a),
        Command::DensitySweep(a) => {
            let kind = match a.variant {
                Variant::Qs => ExperimentKind::FigQsDensity,
                Variant::Aqs => ExperimentKind::FigAqsDensity,
            };
            experiment(Some(kind), &a.exp)
        }
        Command::Concentration(a) => experiment(Some(ExperimentKind::Concentration), &a),
        Command::Gapscan(a) => experiment(Some(ExperimentKind::Gapscan), &a),
        Command::Run(a) => experiment(None, &a),
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Configuration from the file (if any) and the kind's defaults, with flags
/// applied on top.
fn build_config(kind: Option<ExperimentKind>, a: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&a.config, kind) {
        (Some(path), _) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if let Some(kind) = kind.filter(|&k| k != cfg.kind) {
                return Err(config_error(format!("{} describes a {} run, not {kind}", path.display(), cfg.kind)));
            }
            cfg
        }
        (None, Some(kind)) => ExperimentConfig::for_kind(kind),
        (None, None) => return Err(config_error("`run` needs --config")),
    };
    if let Some(n) = &a.n {
        cfg.n_list = parse_usize_list(n)?;
    }
    if let Some(k) = &a.k {
        cfg.k_list = parse_usize_list(k)?;
    }
    if let Some(m) = &a.m {
        cfg.set("m", m)?;
    }
    if let Some(c) = &a.c {
        cfg.m_specs = c
            .split(',')
            .map(|t| t.trim().parse::<f64>().map(MSpec::PerN).map_err(|_| config_error(format!("bad density {t:?}"))))
            .collect::<Result<_>>()?;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.trials {
        cfg.instance_count = v;
    }
    if let Some(t) = &a.theta {
        cfg.theta = parse_angle(t)?;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = &a.out {
        cfg.out_dir = v.clone();
    }
    if let Some(f) = &a.format {
        cfg.set("format", f)?;
    }
    if let Some(v) = a.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = a.convention {
        cfg.convention = v;
    }
    if a.steps.is_some() {
        cfg.steps = a.steps;
    }
    if let Some(v) = a.shots {
        cfg.shots = v;
    }
    cfg.wall_time |= a.wall_time;
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(cfg: &ExperimentConfig, records: &[ResultRecord]) -> Result<()> {
    for path in emit_outputs(records, &cfg.formats, &cfg.out_dir, cfg.kind.as_str())? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn experiment(kind: Option<ExperimentKind>, a: &ExpArgs) -> Result<ExitCode> {
    let cfg = build_config(kind, a)?;
    run_config(&cfg)
}

fn run_config(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let mut code = ExitCode::SUCCESS;
    match cfg.kind {
        ExperimentKind::Table1 => {
            let rep = harness::run_table1(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
            if rep.compared_cells() > 0 && !rep.passes() {
                eprintln!("table differs from the reference values beyond tolerance");
                code = ExitCode::from(2);
            }
        }
        ExperimentKind::Table2 => {
            let rep = harness::run_table2(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
            if !rep.passes() {
                eprintln!("table differs from the reference values beyond tolerance");
                code = ExitCode::from(2);
            }
        }
        ExperimentKind::FigQsDensity | ExperimentKind::FigAqsDensity => {
            let rep = harness::run_density_sweep(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
        }
        ExperimentKind::Concentration => {
            let rep = harness::run_concentration(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
        }
        ExperimentKind::Gapscan => {
            let rep = harness::run_gapscan(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
            let path = cfg.out_dir.join("gapscan_points.csv");
            rep.write_points_csv(&path)?;
            eprintln!("wrote {}", path.display());
        }
        ExperimentKind::Solve => {
            let rep = harness::run_solve(cfg)?;
            print!("{}", rep.render());
            write_outputs(cfg, &rep.records)?;
        }
    }
    Ok(code)
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let m = a.clauses.resolve(a.n).ok_or_else(|| config_error("give --m or --c"))?;
    let inst = match a.model {
        Model::F => generate_f(a.n, m, a.k, a.seed)?,
        Model::Ff => generate_ff(a.n, m, a.k, a.seed, None)?,
        Model::Fs => generate_fs(a.n, m, a.k, a.seed)?,
    };
    let text = to_dimacs(&inst);
    match a.out {
        None => print!("{text}"),
        Some(path) => {
            let path = if path.extension().is_some_and(|e| e == "cnf") {
                path
            } else {
                std::fs::create_dir_all(&path)?;
                path.join(format!("n{}_m{m}_k{}_seed{}.cnf", a.n, a.k, a.seed))
            };
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// The cost diagonal, locality and success targets a simulation runs on.
fn simulation_problem(a: &SimulateArgs) -> Result<(SearchEngine, Vec<u64>, String)> {
    let from_instance = |inst: Instance, what: String| -> Result<(SearchEngine, Vec<u64>, String)> {
        let targets = surviving_assignments(&inst)?.to_vec();
        if targets.is_empty() {
            return Err(Error::Unsatisfiable);
        }
        let engine = SearchEngine::new(&build_hc_normalized(&inst)?, inst.k())?;
        let what = format!("{what}, {} interpretations", targets.len());
        Ok((engine, targets, what))
    };
    if let Some(path) = &a.input {
        let inst = dimacs_read(path)?;
        return from_instance(inst, format!("{}", path.display()));
    }
    let n = a.n.ok_or_else(|| config_error("give --n or --input"))?;
    match a.clauses.resolve(n) {
        Some(m) => {
            let inst = generate_fs(n, m, a.k, a.seed)?;
            from_instance(inst, format!("random satisfiable instance n={n} m={m} k={}", a.k))
        }
        None => {
            let engine = SearchEngine::new(&build_hk(n, a.k, &Assignment::zeros(n)?)?, a.k)?;
            Ok((engine, vec![0], format!("pure {}-local search, n={n}", a.k)))
        }
    }
}

fn simulate(a: SimulateArgs, adiabatic: bool) -> Result<ExitCode> {
    let (engine, targets, what) = simulation_problem(&a)?;
    println!("# {what}");
    if adiabatic {
        match a.p {
            Some(p) => {
                let prob = engine.aqs_probability(AdiabaticParams::with_convention(p, a.convention)?, &targets)?;
                println!("steps {p} prob {prob:.6}");
            }
            None => {
                let opts = ThresholdSearch { convention: a.convention, ..ThresholdSearch::default() };
                let r = engine.min_threshold_steps(a.threshold, &targets, opts)?;
                println!("steps {} prob {:.6} evaluations {}", r.p, r.prob, r.evaluations);
            }
        }
    } else {
        let theta = parse_angle(&a.theta)?;
        match a.p {
            Some(p) => {
                println!("p prob");
                for (i, prob) in engine.qs_trajectory(theta, p, &targets)?.iter().enumerate() {
                    println!("{i} {prob:.6}");
                }
            }
            None => {
                let lm = engine.first_local_max(theta, &targets, default_qs_cap(engine.n()))?;
                let note = if lm.plateau { " (plateau)" } else { "" };
                println!("first local maximum p {} prob {:.6}{note}", lm.p, lm.prob);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn gap(a: GapArgs) -> Result<ExitCode> {
    let ns = parse_usize_list(&a.n)?;
    let locality = if a.k == "full" {
        Locality::Full
    } else {
        Locality::Fixed(a.k.parse().map_err(|_| config_error(format!("bad locality {:?}", a.k)))?)
    };
    println!("n k s lambda1 lambda2 gap iterations");
    for &n in &ns {
        let k = locality.k(n);
        let cost = build_hk(n, k, &Assignment::zeros(n)?)?;
        let (op, s) = match (a.s, a.mode) {
            (Some(s), _) => (OperatorHandle::interpolated(&cost, k, s)?, Some(s)),
            (None, GapMode::Midpoint) => (OperatorHandle::interpolated(&cost, k, 0.5)?, Some(0.5)),
            (None, GapMode::Sum) => (OperatorHandle::sum(&cost, k)?, None),
        };
        let r = top_two_eigen(&op, 1e-10)?;
        let s = s.map_or_else(|| "sum".to_string(), |s| s.to_string());
        println!("{n} {k} {s} {:.12} {:.12} {:.6e} {}", r.lambda1, r.lambda2, r.gap, r.iterations);
    }
    if ns.len() >= 4 && a.s.is_none() {
        let fit = gap_scaling_fit(locality, &ns, a.mode)?;
        println!(
            "# log-log slope {:.4} (r² {:.4}); log-linear slope {:.4} (r² {:.4})",
            fit.slope, fit.r2_loglog, fit.slope_loglinear, fit.r2_loglinear
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn classical(a: ClassicalArgs) -> Result<ExitCode> {
    use rand::RngExt;
    let mut found = 0usize;
    let mut queries = 0usize;
    let mut restarts = 0usize;
    let mask = if a.n == 64 { u64::MAX } else { (1u64 << a.n) - 1 };
    for trial in 0..a.trials {
        let seed = derive_seed(a.seed, &[trial as u64]);
        let t = Assignment::new(a.n, stream(seed, 1).random::<u64>() & mask)?;
        let oracle = HiddenTarget::new(a.k, t)?;
        let out = classical_local_search(|x| oracle.query(x), a.n, seed)?;
        found += usize::from(out.assignment == t);
        queries += out.queries;
        restarts += out.restarts;
    }
    println!(
        "found {found}/{} targets; mean queries {:.1}; mean restarts {:.2}",
        a.trials,
        queries as f64 / a.trials as f64,
        restarts as f64 / a.trials as f64
    );
    Ok(if found == a.trials { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let mut opts = SolverOptions { aqs_enabled: !a.no_aqs, ..SolverOptions::default() };
    if let Some(v) = a.exp.convention {
        opts.convention = v;
    }
    if let Some(v) = a.exp.shots {
        opts.shots = v;
    }
    if let Some(path) = &a.input {
        return solve_one(path, a.exp.seed.unwrap_or(1), opts);
    }
    let mut cfg = build_config(Some(ExperimentKind::Solve), &a.exp)?;
    if a.no_aqs {
        return Err(config_error("--no-aqs applies to --input runs only"));
    }
    cfg.shots = opts.shots;
    run_config(&cfg)
}

fn solve_one(path: &Path, seed: u64, opts: SolverOptions) -> Result<ExitCode> {
    let inst = dimacs_read(path)?;
    let out = solve_max_kssat_with(&inst, seed, opts)?;
    println!(
        "{} satisfied={} method={} steps={} rounds={}",
        out.assignment, out.satisfied, out.method, out.steps_used, out.aqs_rounds
    );
    Ok(ExitCode::SUCCESS)
}
