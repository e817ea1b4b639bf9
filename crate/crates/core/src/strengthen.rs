//! Iterative subproblem strengthening towards the elementary bound: the
//! global route (decremental state-space relaxation, growing ng-sets) and the
//! local route (column elimination, splitting DAG states to kill one cycle
//! per conflicting path). Both alternate converge / detect / strengthen until
//! the master support is elementary.

use crate::dag::{Dag, DagArc, DagNode, PathFlow};
use crate::instance::VrptwInstance;
use crate::master::af::AfMaster;
use crate::master::dw::DwMaster;
use crate::master::{CgConfig, CgStats, CutMode, PricerKind, SolveError};
use crate::pricing::NgConfig;
use crate::{Route, Vertex};
use std::collections::HashMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthenMode {
    Dssr,
    Ce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterForm {
    Dw,
    Af,
}

/// What a strengthening run did, in the shape of the comparison tables:
/// strengthening iterations, eliminations from the master, the signed change
/// in live DAG dimension and the per-convergence bound trace.
#[derive(Debug, Clone)]
pub struct StrengtheningReport {
    pub iterations: usize,
    /// Columns (route master) or arc variables (arc master) removed.
    pub eliminated: usize,
    /// (|E| + |N|) live, final minus initial.
    pub dag_delta: i64,
    pub bound_trace: Vec<f64>,
    pub complete: bool,
    /// Conflicting paths skipped because refinement had already detached them.
    pub stale_skips: usize,
}

/// All minimal revisit cycles of a route: (customer, first index, revisit
/// index), using the most recent previous occurrence. Empty iff elementary.
pub fn find_cycles(route: &Route) -> Vec<(Vertex, usize, usize)> {
    let mut last_seen: HashMap<Vertex, usize> = HashMap::new();
    let mut cycles = Vec::new();
    for (k, &v) in route.iter().enumerate() {
        if let Some(&p) = last_seen.get(&v) {
            cycles.push((v, p, k));
        }
        last_seen.insert(v, k);
    }
    cycles
}

/// Grow the ng-sets so every observed cycle becomes infeasible: the cycle's
/// customer enters the memory set of every customer strictly inside it.
pub fn dssr_step(ng: &NgConfig, conflicts: &[&Route]) -> NgConfig {
    let mut grown = ng.clone();
    for route in conflicts {
        for (j, s, e) in find_cycles(route) {
            for k in s + 1..e {
                grown.insert(route[k], j);
            }
        }
    }
    grown
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CeOutcome {
    pub added_nodes: usize,
    pub added_arcs: usize,
    pub removed_paths: usize,
    pub stale_skips: usize,
}

/// Validate that `arcs` is still a live root-terminal chain of the graph.
fn path_is_current(dag: &Dag, arcs: &[u32]) -> bool {
    if arcs.is_empty() {
        return false;
    }
    let mut at = dag.root;
    for &a in arcs {
        let arc = match dag.arcs.get(a as usize) {
            Some(arc) => arc,
            None => return false,
        };
        if !arc.alive || arc.tail != at {
            return false;
        }
        at = arc.head;
    }
    at == dag.term
}

/// Remove one cycle per conflicting path by local state splitting: the states
/// strictly inside the cycle are duplicated with the cycle customer added to
/// their memory, the cycle's entry arc is redirected to the duplicates, and
/// no duplicate keeps an arc revisiting that customer. Unreachable originals
/// are pruned afterwards.
pub fn ce_step(dag: &mut Dag, paths: &[Vec<u32>]) -> CeOutcome {
    let mut out = CeOutcome::default();
    for arcs in paths {
        if !path_is_current(dag, arcs) {
            out.stale_skips += 1;
            continue;
        }
        let route = dag.project_path(arcs);
        let cycles = find_cycles(&route);
        // the earliest-starting cycle of this path
        let Some(&(j, s, e)) = cycles.iter().min_by_key(|&&(_, s, e)| (s, e)) else {
            continue;
        };
        // the node visiting route position k is the head of arcs[k];
        // capture them before the entry arc gets redirected
        let originals: Vec<u32> = (s + 1..e)
            .map(|k| dag.arcs[arcs[k] as usize].head)
            .collect();
        let mut dup_of: HashMap<u32, u32> = HashMap::new();
        for &orig in &originals {
            let mut state = dag.nodes[orig as usize].state;
            state.mem |= 1 << j;
            let id = dag.nodes.len() as u32;
            dag.nodes.push(DagNode {
                state,
                out: Vec::new(),
                inc: Vec::new(),
                alive: true,
            });
            dup_of.insert(orig, id);
            out.added_nodes += 1;
        }
        // redirect the entry arc into the first duplicate
        let entry = arcs[s + 1];
        let old_head = dag.arcs[entry as usize].head;
        let new_head = dup_of[&old_head];
        dag.nodes[old_head as usize].inc.retain(|&a| a != entry);
        dag.arcs[entry as usize].head = new_head;
        dag.nodes[new_head as usize].inc.push(entry);
        // copy outgoing arcs onto the duplicates
        for (i, k) in (s + 1..e).enumerate() {
            let orig = originals[i];
            let dup = dup_of[&orig];
            let chain_next = if k + 1 < e { Some(arcs[k + 1]) } else { None };
            let outgoing: Vec<u32> = dag.nodes[orig as usize].out.clone();
            for a in outgoing {
                let arc = dag.arcs[a as usize].clone();
                if !arc.alive || arc.to == j {
                    continue; // the duplicate remembers j
                }
                let head = if Some(a) == chain_next {
                    dup_of[&arc.head]
                } else {
                    arc.head
                };
                let id = dag.arcs.len() as u32;
                dag.arcs.push(DagArc {
                    tail: dup,
                    head,
                    from: arc.from,
                    to: arc.to,
                    cost: arc.cost,
                    alive: true,
                });
                dag.nodes[dup as usize].out.push(id);
                dag.nodes[head as usize].inc.push(id);
                out.added_arcs += 1;
            }
        }
        out.removed_paths += 1;
        dag.locally_refined = true;
    }
    dag.prune();
    out
}

enum Master {
    Dw(DwMaster),
    Af(AfMaster),
}

#[derive(Debug)]
pub struct StrengthenOutcome {
    pub lb: f64,
    pub report: StrengtheningReport,
    /// Aggregated column-generation statistics across all convergences.
    pub stats: CgStats,
}

/// Alternate {converge column generation, detect cycles in the support
/// decomposition, strengthen} until the support is elementary or the budget
/// runs out. Both strengthening flavors run on the explicit DAG backend.
pub fn run_until_elementary(
    inst: &VrptwInstance,
    form: MasterForm,
    mode: StrengthenMode,
    config: &CgConfig,
    budget: Duration,
) -> Result<StrengthenOutcome, SolveError> {
    let start = Instant::now();
    let mut ng = NgConfig::new(inst, config.delta);
    let mut cfg = config.clone();
    cfg.pricer = PricerKind::Dag;

    let dag = Dag::compile(inst, &ng, &[], cfg.arc_cap)?;
    let initial_dim = dag.dimension();
    let mut master = match form {
        MasterForm::Dw => {
            let mut m = DwMaster::build(inst, ng.clone());
            m.dag = Some(dag);
            Master::Dw(m)
        }
        MasterForm::Af => Master::Af(AfMaster::build(inst, ng.clone(), dag)),
    };

    let mut report = StrengtheningReport {
        iterations: 0,
        eliminated: 0,
        dag_delta: 0,
        bound_trace: Vec::new(),
        complete: false,
        stale_skips: 0,
    };
    let mut total = CgStats::fresh();

    loop {
        cfg.time_limit = budget.saturating_sub(start.elapsed());
        let stats = match &mut master {
            Master::Dw(m) => m.cg_loop(&cfg)?,
            Master::Af(m) => m.cg_loop(&cfg)?,
        };
        total.iterations += stats.iterations;
        total.rmp_seconds += stats.rmp_seconds;
        total.pp_seconds += stats.pp_seconds;
        total.cuts_added += stats.cuts_added;
        total.misprices += stats.misprices;
        total.lb = stats.lb;
        total.variables = stats.variables;
        total.certified = stats.certified;
        total.cuts_saturated |= stats.cuts_saturated;
        report.bound_trace.push(stats.lb);
        if !stats.certified {
            break; // budget exhausted inside the convergence
        }
        // cuts are frozen once strengthening begins: a fresh subset-row cut
        // would recompile the DAG and discard local refinements
        cfg.cut_mode = CutMode::None;

        let (conflict_routes, conflict_paths): (Vec<Route>, Vec<Vec<u32>>) = match &master {
            Master::Dw(m) => {
                let dag = m.dag.as_ref().expect("explicit backend owns a DAG");
                let mut routes = Vec::new();
                let mut paths = Vec::new();
                for (idx, _) in m.support() {
                    let route = m.columns[idx].route.clone();
                    if !find_cycles(&route).is_empty() {
                        if let Ok(arcs) = dag.lift_route(&route) {
                            paths.push(arcs);
                        }
                        routes.push(route);
                    }
                }
                (routes, paths)
            }
            Master::Af(m) => {
                let mut routes = Vec::new();
                let mut paths = Vec::new();
                for PathFlow { arcs, .. } in m.support_paths() {
                    let route = m.dag.project_path(&arcs);
                    if !find_cycles(&route).is_empty() {
                        routes.push(route);
                        paths.push(arcs);
                    }
                }
                (routes, paths)
            }
        };
        if conflict_routes.is_empty() {
            report.complete = true;
            break;
        }
        if start.elapsed() >= budget {
            break;
        }
        report.iterations += 1;

        match mode {
            StrengthenMode::Dssr => {
                let refs: Vec<&Route> = conflict_routes.iter().collect();
                ng = dssr_step(&ng, &refs);
                match &mut master {
                    Master::Dw(m) => {
                        let dag = Dag::compile(inst, &ng, &m.cuts.srcs, cfg.arc_cap)?;
                        m.ng = ng.clone();
                        m.dag = Some(dag);
                        report.eliminated += m.purge_columns(|r| ng.route_feasible(r));
                    }
                    Master::Af(m) => {
                        let dag = Dag::compile(inst, &ng, &m.cuts.srcs, cfg.arc_cap)?;
                        m.ng = ng.clone();
                        let cuts = m.cuts.clone();
                        let (_, eliminated) = m.rebuild(dag, cuts);
                        report.eliminated += eliminated;
                    }
                }
            }
            StrengthenMode::Ce => match &mut master {
                Master::Dw(m) => {
                    let mut dag = m.dag.take().expect("explicit backend owns a DAG");
                    let outcome = ce_step(&mut dag, &conflict_paths);
                    report.stale_skips += outcome.stale_skips;
                    report.eliminated += m.purge_columns(|r| dag.lift_route(r).is_ok());
                    m.dag = Some(dag);
                }
                Master::Af(m) => {
                    let mut dag = m.dag.clone();
                    let outcome = ce_step(&mut dag, &conflict_paths);
                    report.stale_skips += outcome.stale_skips;
                    let cuts = m.cuts.clone();
                    let (_, eliminated) = m.rebuild(dag, cuts);
                    report.eliminated += eliminated;
                }
            },
        }
    }

    let final_dim = match &master {
        Master::Dw(m) => m.dag.as_ref().map(|d| d.dimension()).unwrap_or(initial_dim),
        Master::Af(m) => m.dag.dimension(),
    };
    report.dag_delta = final_dim - initial_dim;
    total.total_seconds = start.elapsed().as_secs_f64();
    Ok(StrengthenOutcome {
        lb: total.lb,
        report,
        stats: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::DEFAULT_ARC_CAP;
    use crate::instance::builtin_example;
    use crate::pricing::enumerate_routes;

    #[test]
    fn cycles_found_with_bounds() {
        assert_eq!(find_cycles(&vec![1, 2, 1]), vec![(1, 0, 2)]);
        assert!(find_cycles(&vec![1, 2, 3]).is_empty());
        assert_eq!(find_cycles(&vec![2, 3, 2]), vec![(2, 0, 2)]);
        assert_eq!(find_cycles(&vec![1, 2, 1, 2]), vec![(1, 0, 2), (2, 1, 3)]);
    }

    #[test]
    fn dssr_grows_figure_dag_by_two_nodes_three_arcs() {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        let before = Dag::compile(&inst, &ng, &[], DEFAULT_ARC_CAP).unwrap();
        let conflict = vec![1, 2, 1];
        let grown = dssr_step(&ng, &[&conflict]);
        assert!(grown.contains(2, 1)); // 1 joined M_2
        let after = Dag::compile(&inst, &grown, &[], DEFAULT_ARC_CAP).unwrap();
        assert_eq!(after.live_nodes() as i64 - before.live_nodes() as i64, 2);
        assert_eq!(after.live_arcs() as i64 - before.live_arcs() as i64, 3);
        // no conflicts, no change
        let again = dssr_step(&grown, &[]);
        assert_eq!(again, grown);
    }

    #[test]
    fn ce_removes_exactly_the_conflicting_path() {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        let mut dag = Dag::compile(&inst, &ng, &[], DEFAULT_ARC_CAP).unwrap();
        let nodes0 = dag.live_nodes();
        let arcs0 = dag.live_arcs();
        let paths0 = dag.count_paths();
        let conflict = dag.lift_route(&vec![1, 2, 1]).unwrap();
        let outcome = ce_step(&mut dag, &[conflict]);
        assert_eq!(outcome.added_nodes, 1);
        assert_eq!(outcome.added_arcs, 2);
        assert_eq!(dag.live_nodes(), nodes0 + 1);
        assert_eq!(dag.live_arcs(), arcs0 + 2);
        assert_eq!(dag.count_paths(), paths0 - 1);
        assert!(dag.lift_route(&vec![1, 2, 1]).is_err());
        // every other figure route survives
        let ng_routes = enumerate_routes(&inst, &ng, 1000).unwrap();
        for route in ng_routes {
            if route != vec![1, 2, 1] {
                assert!(dag.lift_route(&route).is_ok(), "lost {route:?}");
            }
        }
        // replaying the now-detached path reports a stale skip
        let stale = vec![0, 3, 8];
        let outcome = ce_step(&mut dag, &[stale]);
        assert_eq!(outcome.stale_skips, 1);
    }

    #[test]
    fn ce_keeps_elementary_routes() {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        let elementary = NgConfig::elementary(&inst);
        let mut dag = Dag::compile(&inst, &ng, &[], DEFAULT_ARC_CAP).unwrap();
        let all = enumerate_routes(&inst, &ng, 1000).unwrap();
        for target in &all {
            if find_cycles(target).is_empty() {
                continue;
            }
            let lifted = dag.lift_route(target).unwrap();
            ce_step(&mut dag, &[lifted]);
            for route in enumerate_routes(&inst, &elementary, 1000).unwrap() {
                assert!(dag.lift_route(&route).is_ok(), "{route:?} lost");
            }
        }
    }

    #[test]
    fn all_four_methods_reach_the_elementary_bound() {
        let inst = builtin_example();
        let budget = Duration::from_secs(60);
        let mut bounds = Vec::new();
        for form in [MasterForm::Dw, MasterForm::Af] {
            for mode in [StrengthenMode::Dssr, StrengthenMode::Ce] {
                let config = match form {
                    MasterForm::Dw => CgConfig::dw(0),
                    MasterForm::Af => CgConfig::af(0),
                };
                let out = run_until_elementary(&inst, form, mode, &config, budget).unwrap();
                assert!(out.report.complete, "{form:?}/{mode:?} incomplete");
                for w in out.report.bound_trace.windows(2) {
                    assert!(w[1] >= w[0] - 1e-6, "bound trace decreased");
                }
                bounds.push(out.lb);
            }
        }
        for &b in &bounds {
            assert!((b - bounds[0]).abs() < 1e-6, "bounds diverge: {bounds:?}");
        }
        assert!((bounds[0] - 30.0).abs() < 1e-7);
    }

    #[test]
    fn elementary_start_needs_no_strengthening() {
        let inst = builtin_example();
        let mut config = CgConfig::dw(inst.n - 1);
        config.pricer = PricerKind::Dag;
        let out = run_until_elementary(
            &inst,
            MasterForm::Dw,
            StrengthenMode::Dssr,
            &config,
            Duration::from_secs(30),
        )
        .unwrap();
        assert_eq!(out.report.iterations, 0);
        assert!(out.report.complete);
    }
}
