use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dwaf_core::bench::{
    enumerate_full, render_comparison_tsv, render_strengthening_tsv, render_trace_json,
    run_matrix, RunRow, RunSpec,
};
use dwaf_core::dag::DEFAULT_ARC_CAP;
use dwaf_core::instance::{builtin_example, parse_solomon, subset, VrptwInstance};
use dwaf_core::master::{CgConfig, CutMode, PricerKind};
use dwaf_core::strengthen::{MasterForm, StrengthenMode};
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "dwaf", about = "Route-based and arc-based root relaxations of the VRPTW")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance's root relaxation with one master form.
    Solve(SolveArgs),
    /// Enumerate all ng-routes, compile the DAG and solve the full masters.
    Enumerate(EnumerateArgs),
    /// Run the route-vs-arc comparison matrix and write TSV/JSON reports.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Solomon-format instance file; the built-in micro example when absent.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Keep only the first n customers.
    #[arg(long)]
    customers: Option<usize>,
}

impl InstanceArgs {
    fn load(&self) -> Result<VrptwInstance> {
        let inst = match &self.instance {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_solomon(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => builtin_example(),
        };
        Ok(match self.customers {
            Some(n) => subset(&inst, n)?,
            None => inst,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Dw,
    Af,
}

#[derive(Clone, Copy, ValueEnum)]
enum PricerArg {
    Labeling,
    Dag,
    Beam,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutsArg {
    None,
    Src3,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrengthenArg {
    None,
    Dssr,
    Ce,
}

#[derive(Args)]
struct SolverKnobs {
    /// ng-set size.
    #[arg(long = "ng", default_value_t = 6)]
    ng: usize,
    /// Initial dual smoothing factor; defaults per form (0.65 DW / 0.50 AF).
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long, value_enum, default_value_t = PricerArg::Labeling)]
    pricer: PricerArg,
    #[arg(long, value_enum, default_value_t = CutsArg::None)]
    cuts: CutsArg,
    #[arg(long, value_enum, default_value_t = StrengthenArg::None)]
    strengthen: StrengthenArg,
    /// Wall-clock budget in seconds.
    #[arg(long = "time-limit", default_value_t = 600.0)]
    time_limit: f64,
    /// Columns or paths transferred to the master per pricing round.
    #[arg(long, default_value_t = 200)]
    limit: usize,
    #[arg(long = "beam-width", default_value_t = 3)]
    beam_width: usize,
    /// Starting ng size for the strengthening runs.
    #[arg(long = "start-ng", default_value_t = 0)]
    start_ng: usize,
    #[arg(long = "src-max", default_value_t = 100)]
    src_max: usize,
    #[arg(long = "src-per-round", default_value_t = 30)]
    src_per_round: usize,
    #[arg(long = "src-per-customer", default_value_t = 5)]
    src_per_customer: usize,
    #[arg(long = "src-min-violation", default_value_t = 0.1)]
    src_min_violation: f64,
    /// Compiled DAG arc cap; exceeding it is reported, not fatal.
    #[arg(long = "arc-cap", default_value_t = DEFAULT_ARC_CAP)]
    arc_cap: usize,
}

impl SolverKnobs {
    fn config(&self, form: MasterForm, strengthening: bool) -> CgConfig {
        let delta = if strengthening { self.start_ng } else { self.ng };
        let mut config = match form {
            MasterForm::Dw => CgConfig::dw(delta),
            MasterForm::Af => CgConfig::af(delta),
        };
        if let Some(alpha) = self.smoothing {
            config.smoothing_alpha = alpha;
        }
        config.pricer = match self.pricer {
            PricerArg::Labeling => PricerKind::Labeling,
            PricerArg::Dag => PricerKind::Dag,
            PricerArg::Beam => PricerKind::Beam,
        };
        config.cut_mode = match self.cuts {
            CutsArg::None => CutMode::None,
            CutsArg::Src3 => CutMode::Src3,
        };
        config.columns_per_round = self.limit;
        config.beam_width = self.beam_width;
        config.time_limit = Duration::from_secs_f64(self.time_limit);
        config.arc_cap = self.arc_cap;
        config.src_params.max_total = self.src_max;
        config.src_params.per_round = self.src_per_round;
        config.src_params.per_customer = self.src_per_customer;
        config.src_params.min_violation = self.src_min_violation;
        config
    }

    fn strengthen_mode(&self) -> Option<StrengthenMode> {
        match self.strengthen {
            StrengthenArg::None => None,
            StrengthenArg::Dssr => Some(StrengthenMode::Dssr),
            StrengthenArg::Ce => Some(StrengthenMode::Ce),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = FormArg::Dw)]
    form: FormArg,
    #[command(flatten)]
    knobs: SolverKnobs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long = "ng", default_value_t = 6)]
    ng: usize,
    /// Abort enumeration beyond this many routes.
    #[arg(long = "route-cap", default_value_t = 50_000_000)]
    route_cap: usize,
    #[arg(long = "arc-cap", default_value_t = DEFAULT_ARC_CAP)]
    arc_cap: usize,
    /// Solve the full arc master only below this row count.
    #[arg(long = "af-solve-rows", default_value_t = 4000)]
    af_solve_rows: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of Solomon files; every .txt inside is an instance.
    #[arg(long)]
    data: PathBuf,
    /// Customer count per instance (prefix subset).
    #[arg(long, default_value_t = 25)]
    customers: usize,
    /// Restrict to instances whose name starts with one of these prefixes
    /// (comma separated, e.g. "r1,c2").
    #[arg(long)]
    groups: Option<String>,
    /// ng-set sizes to run.
    #[arg(long, value_delimiter = ',', default_values_t = vec![6])]
    deltas: Vec<usize>,
    #[command(flatten)]
    knobs: SolverKnobs,
    /// Output directory for report.tsv and traces.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render wall-clock columns as '-' for byte-identical reruns.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (0 = all cores); DECOMP_BENCH_THREADS overrides.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => solve(args),
        Command::Enumerate(args) => enumerate(args),
        Command::Bench(args) => bench(args),
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let form = match args.form {
        FormArg::Dw => MasterForm::Dw,
        FormArg::Af => MasterForm::Af,
    };
    let strengthen = args.knobs.strengthen_mode();
    let config = args.knobs.config(form, strengthen.is_some());
    let mut spec = RunSpec::new(inst, form, config.delta);
    spec.cut_mode = config.cut_mode;
    spec.strengthen = strengthen;
    spec.config = config;
    let row = dwaf_core::bench::run_one(&spec)?;
    print_row(&row);
    if !row.solved {
        bail!("run did not certify within the time limit");
    }
    Ok(())
}

fn print_row(row: &RunRow) {
    println!(
        "{} form={} delta={} lb={:.4} iterations={} variables={} cuts={} rmp={:.2}s pp={:.2}s total={:.2}s solved={}",
        row.instance,
        match row.form {
            MasterForm::Dw => "dw",
            MasterForm::Af => "af",
        },
        row.delta,
        row.lb,
        row.iterations,
        row.variables,
        row.cuts,
        row.rmp_seconds,
        row.pp_seconds,
        row.total_seconds,
        row.solved,
    );
    if let Some(r) = row.recombination {
        println!("  recombination={r:.2}");
    }
    if let Some(rep) = &row.strengthening {
        println!(
            "  strengthenings={} eliminated={} dag_delta={} complete={} trace={:?}",
            rep.iterations, rep.eliminated, rep.dag_delta, rep.complete, rep.bound_trace
        );
    }
}

fn enumerate(args: EnumerateArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let report = enumerate_full(
        &inst,
        args.ng,
        args.route_cap,
        args.arc_cap,
        args.af_solve_rows,
    )?;
    println!(
        "{} delta={} routes={} paths={} match={} dag_nodes={} dag_arcs={} dw_mp_lb={:.4} af_mp_lb={} enum={:.2}s dw_solve={:.2}s af_solve={:.2}s",
        report.instance,
        report.delta,
        report.route_count,
        report.path_count,
        report.counts_match,
        report.dag_nodes,
        report.dag_arcs,
        report.dw_mp_lb,
        report
            .af_mp_lb
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "skipped(size)".into()),
        report.enumerate_seconds,
        report.dw_solve_seconds,
        report.af_solve_seconds,
    );
    if !report.counts_match {
        bail!(
            "route/path count mismatch under the truncate-to-one-decimal convention: \
             {} routes vs {} paths - check the distance rounding rule",
            report.route_count,
            report.path_count
        );
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    let prefixes: Option<Vec<String>> = args
        .groups
        .as_ref()
        .map(|g| g.split(',').map(|s| s.trim().to_lowercase()).collect());

    let mut specs = Vec::new();
    for path in &files {
        let stem = path.file_stem().unwrap().to_string_lossy().to_lowercase();
        if let Some(pre) = &prefixes {
            if !pre.iter().any(|p| stem.starts_with(p)) {
                continue;
            }
        }
        let text = std::fs::read_to_string(path)?;
        let inst = subset(&parse_solomon(&text)?, args.customers)?;
        for &delta in &args.deltas {
            for form in [MasterForm::Dw, MasterForm::Af] {
                let strengthen = args.knobs.strengthen_mode();
                let mut config = args.knobs.config(form, strengthen.is_some());
                if strengthen.is_none() {
                    config.delta = delta;
                }
                let mut spec = RunSpec::new(inst.clone(), form, config.delta);
                spec.cut_mode = config.cut_mode;
                spec.strengthen = strengthen;
                spec.config = config;
                specs.push(spec);
            }
        }
    }
    if specs.is_empty() {
        bail!("no instances matched under {}", args.data.display());
    }

    let threads = std::env::var("DECOMP_BENCH_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(args.threads);
    let threads = if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    };

    eprintln!(
        "# {} runs on {} threads; columns/round={}; recombination counts paths over all arcs \
         ever added (direct depot arc included) divided by distinct priced paths",
        specs.len(),
        threads,
        args.knobs.limit
    );
    let results = run_matrix(&specs, threads);
    let mut rows: Vec<RunRow> = Vec::new();
    let mut failures = 0;
    for (spec, result) in specs.iter().zip(results) {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => {
                failures += 1;
                eprintln!("run failed: {} {:?}: {e}", spec.instance.name, spec.form);
            }
        }
    }
    let unsolved = rows.iter().filter(|r| !r.solved).count();

    let tsv = if args.knobs.strengthen_mode().is_some() {
        render_strengthening_tsv(&rows, args.deterministic)
    } else {
        render_comparison_tsv(&rows, args.deterministic)
    };
    print!("{tsv}");
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("report.tsv"), &tsv)?;
        std::fs::write(out.join("traces.json"), render_trace_json(&rows))?;
        eprintln!("# wrote {}", out.join("report.tsv").display());
    }
    if failures > 0 || unsolved > 0 {
        bail!("{failures} runs failed, {unsolved} unsolved");
    }
    Ok(())
}
