//! Experiment harness: full-enumeration studies, the route-master versus
//! arc-master comparison matrix and report emission (TSV plus a JSON sidecar
//! of per-iteration bound traces).
//!
//! Reports are deterministic apart from wall-clock columns; the deterministic
//! mode renders those as `-` so repeated runs diff byte for byte.

use crate::dag::Dag;
use crate::instance::VrptwInstance;
use crate::master::af::AfMaster;
use crate::master::dw::DwMaster;
use crate::master::{CgConfig, CgStats, CutMode, SolveError};
use crate::pricing::{enumerate_routes, EnumerationOverflow, NgConfig};
use crate::strengthen::{run_until_elementary, MasterForm, StrengthenMode, StrengtheningReport};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationOverflow),
}

impl From<crate::dag::CompileOverflow> for BenchError {
    fn from(e: crate::dag::CompileOverflow) -> Self {
        BenchError::Solve(SolveError::Overflow(e))
    }
}

/// Full static enumeration of one instance at one relaxation strength.
#[derive(Debug, Clone)]
pub struct EnumerateReport {
    pub instance: String,
    pub delta: usize,
    /// Distinct feasible ng-routes, the empty route excluded.
    pub route_count: usize,
    /// Non-empty root-terminal paths of the compiled DAG.
    pub path_count: u128,
    pub counts_match: bool,
    pub dag_nodes: usize,
    pub dag_arcs: usize,
    pub dw_mp_lb: f64,
    /// Skipped (`None`) when the full flow LP is too large for the dense
    /// engine; the count assertions never depend on it.
    pub af_mp_lb: Option<f64>,
    pub enumerate_seconds: f64,
    pub dw_solve_seconds: f64,
    pub af_solve_seconds: f64,
}

/// Enumerate every ng-route, build both full masters and solve them
/// statically. The route count must equal the non-empty path count.
pub fn enumerate_full(
    inst: &VrptwInstance,
    delta: usize,
    route_cap: usize,
    arc_cap: usize,
    af_solve_row_cap: usize,
) -> Result<EnumerateReport, BenchError> {
    let ng = NgConfig::new(inst, delta);
    let t0 = Instant::now();
    let routes = enumerate_routes(inst, &ng, route_cap)?;
    let dag = Dag::compile(inst, &ng, &[], arc_cap)?;
    let path_count = dag.count_paths().saturating_sub(1);
    let enumerate_seconds = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let mut dw = DwMaster::build(inst, ng.clone());
    for route in &routes {
        dw.add_route_column(route);
    }
    let dw_mp_lb = dw.solve_static()?;
    let dw_solve_seconds = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let af_rows = dag.live_nodes() + inst.n;
    let af_mp_lb = if af_rows <= af_solve_row_cap {
        let mut af = AfMaster::build(inst, ng, dag.clone());
        af.register_all_arcs();
        Some(af.solve_static()?)
    } else {
        None
    };
    let af_solve_seconds = t0.elapsed().as_secs_f64();

    Ok(EnumerateReport {
        instance: inst.name.clone(),
        delta,
        route_count: routes.len(),
        path_count,
        counts_match: routes.len() as u128 == path_count,
        dag_nodes: dag.live_nodes(),
        dag_arcs: dag.live_arcs(),
        dw_mp_lb,
        af_mp_lb,
        enumerate_seconds,
        dw_solve_seconds,
        af_solve_seconds,
    })
}

/// One (instance, form, configuration) experiment.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub instance: VrptwInstance,
    pub form: MasterForm,
    pub delta: usize,
    pub cut_mode: CutMode,
    pub strengthen: Option<StrengthenMode>,
    pub config: CgConfig,
}

impl RunSpec {
    pub fn new(instance: VrptwInstance, form: MasterForm, delta: usize) -> RunSpec {
        let config = match form {
            MasterForm::Dw => CgConfig::dw(delta),
            MasterForm::Af => CgConfig::af(delta),
        };
        RunSpec {
            instance,
            form,
            delta,
            cut_mode: CutMode::None,
            strengthen: None,
            config,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRow {
    pub instance: String,
    pub group: String,
    pub form: MasterForm,
    pub delta: usize,
    pub solved: bool,
    pub lb: f64,
    pub cuts: usize,
    pub cuts_saturated: bool,
    pub rmp_seconds: f64,
    pub pp_seconds: f64,
    pub total_seconds: f64,
    pub iterations: usize,
    pub variables: usize,
    /// Arc-master only: encoded paths over explicitly priced paths.
    pub recombination: Option<f64>,
    pub strengthening: Option<StrengtheningReport>,
    pub trace: Vec<crate::master::IterTrace>,
}

/// Group key in the benchmark convention: distribution letter(s), window
/// type digit, customer count ("R1-25").
pub fn group_of(name: &str) -> String {
    let letters: String = name.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let rest = &name[letters.len()..];
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    let size = name.rsplit('-').next().unwrap_or("");
    let ty = digits.chars().next().unwrap_or('?');
    format!("{}{}-{}", letters.to_ascii_uppercase(), ty, size)
}

/// Run one experiment to completion or its time budget.
pub fn run_one(spec: &RunSpec) -> Result<RunRow, SolveError> {
    let inst = &spec.instance;
    let mut config = spec.config.clone();
    config.cut_mode = spec.cut_mode;
    let group = group_of(&inst.name);

    let (stats, recomb, strengthening): (CgStats, Option<f64>, Option<StrengtheningReport>) =
        if let Some(mode) = spec.strengthen {
            let out = run_until_elementary(inst, spec.form, mode, &config, config.time_limit)?;
            (out.stats, None, Some(out.report))
        } else {
            match spec.form {
                MasterForm::Dw => {
                    let mut master = DwMaster::build(inst, NgConfig::new(inst, spec.delta));
                    let stats = master.cg_loop(&config)?;
                    (stats, None, None)
                }
                MasterForm::Af => {
                    let ng = NgConfig::new(inst, spec.delta);
                    let dag = Dag::compile(inst, &ng, &[], config.arc_cap)?;
                    let mut master = AfMaster::build(inst, ng, dag);
                    let stats = master.cg_loop(&config)?;
                    let r = master.recombination();
                    (stats, Some(r), None)
                }
            }
        };

    Ok(RunRow {
        instance: inst.name.clone(),
        group,
        form: spec.form,
        delta: spec.delta,
        solved: stats.certified,
        lb: stats.lb,
        cuts: stats.cuts_added,
        cuts_saturated: stats.cuts_saturated,
        rmp_seconds: stats.rmp_seconds,
        pp_seconds: stats.pp_seconds,
        total_seconds: stats.total_seconds,
        iterations: stats.iterations,
        variables: stats.variables,
        recombination: recomb,
        strengthening,
        trace: stats.trace,
    })
}

/// Run the whole matrix on a small worker pool; rows come back in spec
/// order regardless of scheduling.
pub fn run_matrix(specs: &[RunSpec], threads: usize) -> Vec<Result<RunRow, String>> {
    let threads = threads.max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRow, String>>>> =
        Mutex::new(vec![None; specs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(specs.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= specs.len() {
                    break;
                }
                let row = run_one(&specs[k]).map_err(|e| e.to_string());
                results.lock().unwrap()[k] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

pub fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut log_sum = 0.0;
    let mut count = 0usize;
    for v in values {
        log_sum += v.max(1e-4).ln();
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        (log_sum / count as f64).exp()
    }
}

fn arith_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn fmt_time(v: f64, deterministic: bool) -> String {
    if deterministic {
        "-".into()
    } else {
        format!("{v:.2}")
    }
}

/// Pair up route-master and arc-master rows per (instance, delta) and render
/// the comparison table. Headers carry the benchmark column names; group
/// rows report geometric means and a Solved n/m tally, with per-instance
/// DW-to-AF ratios geometrically averaged.
pub fn render_comparison_tsv(rows: &[RunRow], deterministic: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# route-master vs arc-master comparison; columns per run: LB, Cuts, RMP (s), PP (s), Time (s); \
         arc side adds Recomb.; ratios are DW-to-AF per instance, geometric means per group"
    );
    let _ = writeln!(
        out,
        "Instance\tDelta\tLB\tCuts\tRMP (s)\tPP (s)\tTime (s)\tLB\tCuts\tRMP (s)\tPP (s)\tTime (s)\tRecomb.\tVariables\tIterations\tTime"
    );
    // pair rows
    let mut pairs: Vec<(&RunRow, &RunRow)> = Vec::new();
    for dw in rows.iter().filter(|r| r.form == MasterForm::Dw) {
        if let Some(af) = rows.iter().find(|r| {
            r.form == MasterForm::Af && r.instance == dw.instance && r.delta == dw.delta
        }) {
            pairs.push((dw, af));
        }
    }
    let mut groups: Vec<String> = pairs.iter().map(|(d, _)| d.group.clone()).collect();
    groups.dedup();

    for group in &groups {
        let members: Vec<&(&RunRow, &RunRow)> =
            pairs.iter().filter(|(d, _)| &d.group == group).collect();
        let solved: Vec<&(&RunRow, &RunRow)> = members
            .iter()
            .filter(|(d, a)| d.solved && a.solved)
            .copied()
            .collect();
        for (dw, af) in &members {
            let ratio = |x: f64, y: f64| {
                if y.abs() < 1e-12 {
                    "-".to_string()
                } else {
                    format!("{:.2}", x / y)
                }
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{:.2}\t{}\t{}\t{}\t{}\t{:.2}\t{}\t{}\t{}\t{}\t{:.2}\t{}\t{}\t{}",
                dw.instance,
                dw.delta,
                dw.lb,
                dw.cuts,
                fmt_time(dw.rmp_seconds, deterministic),
                fmt_time(dw.pp_seconds, deterministic),
                fmt_time(dw.total_seconds, deterministic),
                af.lb,
                af.cuts,
                fmt_time(af.rmp_seconds, deterministic),
                fmt_time(af.pp_seconds, deterministic),
                fmt_time(af.total_seconds, deterministic),
                af.recombination.unwrap_or(1.0),
                ratio(dw.variables as f64, af.variables as f64),
                ratio(dw.iterations as f64, af.iterations as f64),
                if deterministic {
                    "-".to_string()
                } else {
                    ratio(dw.total_seconds, af.total_seconds)
                },
            );
        }
        if !solved.is_empty() {
            let g = |f: &dyn Fn(&(&RunRow, &RunRow)) -> f64| {
                geometric_mean(solved.iter().map(|p| f(p)))
            };
            let _ = writeln!(
                out,
                "Geo. Mean {group}\t-\t{:.2}\t{:.1}\t{}\t{}\t{}\t{:.2}\t{:.1}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{}\tSolved {}/{}",
                g(&|p| p.0.lb),
                arith_mean(solved.iter().map(|p| p.0.cuts as f64)),
                fmt_time(g(&|p| p.0.rmp_seconds), deterministic),
                fmt_time(g(&|p| p.0.pp_seconds), deterministic),
                fmt_time(g(&|p| p.0.total_seconds), deterministic),
                g(&|p| p.1.lb),
                arith_mean(solved.iter().map(|p| p.1.cuts as f64)),
                fmt_time(g(&|p| p.1.rmp_seconds), deterministic),
                fmt_time(g(&|p| p.1.pp_seconds), deterministic),
                fmt_time(g(&|p| p.1.total_seconds), deterministic),
                g(&|p| p.1.recombination.unwrap_or(1.0)),
                g(&|p| p.0.variables as f64 / (p.1.variables.max(1)) as f64),
                g(&|p| p.0.iterations as f64 / (p.1.iterations.max(1)) as f64),
                if deterministic {
                    "-".to_string()
                } else {
                    format!("{:.2}", g(&|p| p.0.total_seconds / p.1.total_seconds.max(1e-4)))
                },
                solved.len(),
                members.len(),
            );
        }
    }
    out
}

/// Render strengthening runs in the shape of the comparison tables.
pub fn render_strengthening_tsv(rows: &[RunRow], deterministic: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Instance\tForm\tMode\tLB\tStrength. Iter.\tElim. Routes\tElim. Arcs\tTime (s)\tChange in DAG\tSolved"
    );
    for row in rows {
        let Some(rep) = &row.strengthening else {
            continue;
        };
        let (er, ea) = match row.form {
            MasterForm::Dw => (rep.eliminated.to_string(), "-".to_string()),
            MasterForm::Af => ("-".to_string(), rep.eliminated.to_string()),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t-\t{:.2}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.instance,
            match row.form {
                MasterForm::Dw => "DW",
                MasterForm::Af => "AF",
            },
            row.lb,
            rep.iterations,
            er,
            ea,
            fmt_time(row.total_seconds, deterministic),
            rep.dag_delta,
            if rep.complete { "yes" } else { "no" },
        );
    }
    out
}

/// JSON sidecar with the raw per-iteration traces of every run.
pub fn render_trace_json(rows: &[RunRow]) -> String {
    let runs: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "instance": r.instance,
                "form": match r.form { MasterForm::Dw => "dw", MasterForm::Af => "af" },
                "delta": r.delta,
                "lb": r.lb,
                "solved": r.solved,
                "trace": r.trace,
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "runs": runs })).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::builtin_example;

    #[test]
    fn geometric_mean_of_two_and_eight_is_four() {
        assert!((geometric_mean([2.0, 8.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn group_names_follow_the_convention() {
        assert_eq!(group_of("R101-25"), "R1-25");
        assert_eq!(group_of("RC207-50"), "RC2-50");
        assert_eq!(group_of("C109-25"), "C1-25");
    }

    #[test]
    fn enumerate_full_on_the_example() {
        let inst = builtin_example();
        let report = enumerate_full(&inst, 0, 10_000, 1_000_000, 10_000).unwrap();
        assert_eq!(report.route_count, 13);
        assert_eq!(report.path_count, 13);
        assert!(report.counts_match);
        assert!((report.dw_mp_lb - 30.0).abs() < 1e-9);
        let af = report.af_mp_lb.expect("small LP must be solved");
        assert!((af - 30.0).abs() < 1e-9);
    }

    #[test]
    fn matrix_runs_both_forms_and_renders() {
        let inst = builtin_example();
        let specs = vec![
            RunSpec::new(inst.clone(), MasterForm::Dw, 0),
            RunSpec::new(inst.clone(), MasterForm::Af, 0),
        ];
        let rows: Vec<RunRow> = run_matrix(&specs, 2)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        assert!((rows[0].lb - rows[1].lb).abs() < 1e-9);
        let tsv = render_comparison_tsv(&rows, true);
        assert!(tsv.contains("Instance\tDelta\tLB"));
        assert!(tsv.contains("Solved 1/1"));
        // deterministic renders are byte-identical across repeats
        let rows2: Vec<RunRow> = run_matrix(&specs, 1)
            .into_iter()
            .map(|r| r.unwrap())
            .collect();
        assert_eq!(tsv, render_comparison_tsv(&rows2, true));
        let json = render_trace_json(&rows);
        assert!(json.contains("\"form\": \"dw\""));
    }
}
