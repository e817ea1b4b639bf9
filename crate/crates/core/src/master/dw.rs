//! Route-based restricted master: aggregated identical-vehicle formulation
//! with one partition row per customer, one convexity row at the fleet size
//! and the a-priori rounded capacity cut, driven by column generation.
//!
//! Iterative strengthening is orchestrated on top of this loop by
//! [`crate::strengthen`]; the loop itself converges pricing and, when asked,
//! separates subset-row cuts until none are violated.

use crate::cuts::{separate_src3_full, GsecCut, SrcCut};
use crate::dag::Dag;
use crate::instance::{VrptwInstance, SCALE};
use crate::master::{
    duals_coincide, CgConfig, CgStats, CutMode, IterTrace, PricerKind, SmoothingState, SolveError,
};
use crate::pricing::{
    empty_route_rcost, run_labeling, ActiveCuts, DualValues, NgConfig, PricingMode, PRICING_TOL,
};
use crate::simplex::{ColId, LinearProgram, RowId, Sense, Status};
use crate::Route;
use std::collections::HashMap;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct DwColumn {
    pub route: Route,
    /// Scaled route cost.
    pub cost: i64,
    pub col: ColId,
    pub alive: bool,
}

pub struct DwMaster {
    pub inst: VrptwInstance,
    pub ng: NgConfig,
    lp: LinearProgram,
    partition_rows: Vec<RowId>,
    convexity_row: RowId,
    pub cuts: ActiveCuts,
    gsec_rows: Vec<RowId>,
    src_rows: Vec<RowId>,
    pub columns: Vec<DwColumn>,
    route_index: HashMap<Route, usize>,
    /// Explicit pricing graph, compiled on demand for the DAG backends.
    pub dag: Option<Dag>,
}

impl DwMaster {
    /// Rows, the a-priori capacity cut, singleton columns and the empty
    /// route.
    pub fn build(inst: &VrptwInstance, ng: NgConfig) -> DwMaster {
        let mut lp = LinearProgram::new();
        let mut partition_rows = vec![RowId(usize::MAX)];
        for _ in inst.customers() {
            partition_rows.push(lp.add_row(Sense::Eq, 1.0, &[]));
        }
        let convexity_row = lp.add_row(Sense::Eq, inst.vehicles as f64, &[]);
        let mut master = DwMaster {
            inst: inst.clone(),
            ng,
            lp,
            partition_rows,
            convexity_row,
            cuts: ActiveCuts::none(),
            gsec_rows: Vec::new(),
            src_rows: Vec::new(),
            columns: Vec::new(),
            route_index: HashMap::new(),
            dag: None,
        };
        let capacity = GsecCut::capacity_cut(inst);
        master.add_gsec(capacity);
        for i in inst.customers() {
            let singleton = vec![i];
            assert!(
                inst.route_feasible(&singleton).is_some(),
                "customer {i} cannot be served alone; instance is infeasible"
            );
            master.add_route_column(&singleton);
        }
        master.add_route_column(&Vec::new());
        master
    }

    fn column_entries(&self, route: &Route) -> Vec<(RowId, f64)> {
        let mut entries = Vec::new();
        let z = self.inst.visit_counts(route);
        for i in self.inst.customers() {
            if z[i] > 0 {
                entries.push((self.partition_rows[i], z[i] as f64));
            }
        }
        entries.push((self.convexity_row, 1.0));
        for (cut, &row) in self.cuts.gsecs.iter().zip(&self.gsec_rows) {
            let coeff = cut.dw_coeff(route);
            if coeff > 0 {
                entries.push((row, coeff as f64));
            }
        }
        for (cut, &row) in self.cuts.srcs.iter().zip(&self.src_rows) {
            let coeff = cut.dw_coeff(route);
            if coeff > 0 {
                entries.push((row, coeff as f64));
            }
        }
        entries
    }

    /// Add a route column unless it is already present.
    pub fn add_route_column(&mut self, route: &Route) -> Option<usize> {
        if self.route_index.contains_key(route) {
            return None;
        }
        let cost = self.inst.route_cost(route);
        let entries = self.column_entries(route);
        let col = self.lp.add_column(cost as f64 / SCALE as f64, &entries);
        let idx = self.columns.len();
        self.columns.push(DwColumn {
            route: route.clone(),
            cost,
            col,
            alive: true,
        });
        self.route_index.insert(route.clone(), idx);
        Some(idx)
    }

    /// Append a >= cut in the original space.
    pub fn add_gsec(&mut self, cut: GsecCut) -> RowId {
        let entries: Vec<(ColId, f64)> = self
            .columns
            .iter()
            .filter(|c| c.alive)
            .filter_map(|c| {
                let coeff = cut.dw_coeff(&c.route);
                (coeff > 0).then_some((c.col, coeff as f64))
            })
            .collect();
        let row = self.lp.add_row(Sense::Ge, cut.kappa as f64, &entries);
        self.gsec_rows.push(row);
        self.cuts.gsecs.push(cut);
        row
    }

    /// Append <= subset-row cuts on the partition rows.
    pub fn add_srcs(&mut self, cuts: &[SrcCut]) {
        for cut in cuts {
            let entries: Vec<(ColId, f64)> = self
                .columns
                .iter()
                .filter(|c| c.alive)
                .filter_map(|c| {
                    let coeff = cut.dw_coeff(&c.route);
                    (coeff > 0).then_some((c.col, coeff as f64))
                })
                .collect();
            let row = self.lp.add_row(Sense::Le, cut.rhs() as f64, &entries);
            self.src_rows.push(row);
            self.cuts.srcs.push(*cut);
        }
    }

    fn extract_duals(&self) -> DualValues {
        DualValues {
            depot: self.lp.dual_value(self.convexity_row),
            customer: {
                let mut d = vec![0.0];
                for i in self.inst.customers() {
                    d.push(self.lp.dual_value(self.partition_rows[i]));
                }
                d
            },
            gsec: self.gsec_rows.iter().map(|&r| self.lp.dual_value(r)).collect(),
            src: self.src_rows.iter().map(|&r| self.lp.dual_value(r)).collect(),
        }
    }

    /// Primal support: live columns with positive weight.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.alive)
            .filter_map(|(i, c)| {
                let v = self.lp.primal_value(c.col);
                (v > 1e-9).then_some((i, v))
            })
            .collect()
    }

    pub fn live_columns(&self) -> usize {
        self.columns.iter().filter(|c| c.alive).count()
    }

    /// Drop every live column whose route fails `keep`; returns the count.
    pub fn purge_columns(&mut self, keep: impl Fn(&Route) -> bool) -> usize {
        let mut dropped = Vec::new();
        for c in self.columns.iter_mut().filter(|c| c.alive) {
            if !keep(&c.route) {
                c.alive = false;
                dropped.push(c.col);
            }
        }
        for c in self.columns.iter().filter(|c| !c.alive) {
            self.route_index.remove(&c.route);
        }
        self.lp.drop_columns(&dropped);
        dropped.len()
    }

    /// Solve the master as it stands, no pricing: the static full-master
    /// studies use this after enumerating every column.
    pub fn solve_static(&mut self) -> Result<f64, SolveError> {
        match self.lp.solve()? {
            Status::Optimal => Ok(self.lp.objective()),
            Status::Infeasible => Err(SolveError::Infeasible),
            Status::Unbounded => Err(SolveError::Unbounded),
        }
    }

    /// Dual objective value of arbitrary (e.g. smoothed) duals.
    fn dual_objective(&self, duals: &DualValues) -> f64 {
        let mut v = duals.depot * self.inst.vehicles as f64;
        for i in self.inst.customers() {
            v += duals.customer[i];
        }
        for (cut, &mu) in self.cuts.gsecs.iter().zip(&duals.gsec) {
            v += mu * cut.kappa as f64;
        }
        for (cut, &mu) in self.cuts.srcs.iter().zip(&duals.src) {
            v += mu * cut.rhs() as f64;
        }
        v
    }

    fn ensure_dag(&mut self, config: &CgConfig) -> Result<(), SolveError> {
        if matches!(config.pricer, PricerKind::Dag | PricerKind::Beam) && self.dag.is_none() {
            self.dag = Some(Dag::compile(
                &self.inst,
                &self.ng,
                &self.cuts.srcs,
                config.arc_cap,
            )?);
        }
        Ok(())
    }

    /// One pricing round at the given duals. Returns candidate routes, the
    /// smallest reduced cost seen and whether an exact engine produced it.
    fn price(&self, duals: &DualValues, config: &CgConfig) -> (Vec<Route>, f64, bool) {
        match config.pricer {
            PricerKind::Labeling => {
                let heur = run_labeling(
                    &self.inst,
                    &self.ng,
                    duals,
                    &self.cuts,
                    PricingMode::Heuristic,
                    config.columns_per_round,
                );
                if !heur.routes.is_empty() {
                    let best = heur.best_value;
                    return (
                        heur.routes.into_iter().map(|r| r.route).collect(),
                        best,
                        false,
                    );
                }
                let exact = run_labeling(
                    &self.inst,
                    &self.ng,
                    duals,
                    &self.cuts,
                    PricingMode::Exact,
                    config.columns_per_round,
                );
                let best = exact.best_value;
                (
                    exact.routes.into_iter().map(|r| r.route).collect(),
                    best,
                    true,
                )
            }
            PricerKind::Dag => {
                let dag = self.dag.as_ref().expect("explicit pricer needs a DAG");
                let (path, value) = dag.shortest_path(duals, &self.cuts);
                let mut routes = Vec::new();
                if value < -PRICING_TOL {
                    routes.push(dag.project_path(&path));
                }
                (routes, value, true)
            }
            PricerKind::Beam => {
                let dag = self.dag.as_ref().expect("explicit pricer needs a DAG");
                let (path, value) = dag.beam_search(duals, &self.cuts, config.beam_width);
                if value < -PRICING_TOL {
                    return (vec![dag.project_path(&path)], value, false);
                }
                let (path, value) = dag.shortest_path(duals, &self.cuts);
                let mut routes = Vec::new();
                if value < -PRICING_TOL {
                    routes.push(dag.project_path(&path));
                }
                (routes, value, true)
            }
        }
    }

    /// Column generation to the LP optimum of the current relaxation,
    /// separating subset-row cuts when configured, within the time budget.
    pub fn cg_loop(&mut self, config: &CgConfig) -> Result<CgStats, SolveError> {
        let start = Instant::now();
        let deadline = start + config.time_limit;
        let mut stats = CgStats::fresh();
        let mut smoothing = SmoothingState::new(config.smoothing_alpha, config.misprice_factor);
        self.ensure_dag(config)?;

        loop {
            let t = Instant::now();
            let status = self.lp.solve()?;
            stats.rmp_seconds += t.elapsed().as_secs_f64();
            if status == Status::Unbounded {
                return Err(SolveError::Unbounded);
            }
            let objective = self.lp.objective();
            let duals = self.extract_duals();
            stats.iterations += 1;

            let smoothed = smoothing.smoothed(&duals);
            let t = Instant::now();
            let (candidates, best_value, exact) = self.price(&smoothed, config);
            stats.pp_seconds += t.elapsed().as_secs_f64();
            if exact {
                // pricing minimum over the whole subproblem, empty route in
                let pricing_min =
                    best_value.min(empty_route_rcost(&self.inst, &smoothed, &self.cuts));
                let lag =
                    self.dual_objective(&smoothed) + self.inst.vehicles as f64 * pricing_min;
                smoothing.update_best(&smoothed, lag);
            }
            stats.trace.push(IterTrace {
                iteration: stats.iterations,
                rmp_objective: objective,
                lower_bound: smoothing.best_bound(),
            });

            if !candidates.is_empty() {
                let mut added = 0;
                for route in &candidates {
                    if self.add_route_column(route).is_some() {
                        added += 1;
                    }
                }
                if added > 0 {
                    if Instant::now() >= deadline {
                        stats.lb = smoothing.best_bound();
                        break;
                    }
                    continue;
                }
                // everything was already in the master: a smoothing artifact
            }

            if exact && duals_coincide(&smoothed, &duals) {
                if status == Status::Infeasible {
                    return Err(SolveError::Infeasible);
                }
                if config.cut_mode == CutMode::Src3 {
                    let support = self.support();
                    let pairs: Vec<(&Route, f64)> = support
                        .iter()
                        .map(|&(i, w)| (&self.columns[i].route, w))
                        .collect();
                    let sep = separate_src3_full(
                        self.inst.n,
                        &pairs,
                        &self.cuts.srcs,
                        &config.src_params,
                    );
                    stats.cuts_saturated = sep.cuts.is_empty() && sep.blocked > 0;
                    let new_cuts = sep.cuts;
                    if !new_cuts.is_empty() {
                        stats.cuts_added += new_cuts.len();
                        self.add_srcs(&new_cuts);
                        if matches!(config.pricer, PricerKind::Dag | PricerKind::Beam) {
                            self.dag = Some(Dag::compile(
                                &self.inst,
                                &self.ng,
                                &self.cuts.srcs,
                                config.arc_cap,
                            )?);
                        }
                        if Instant::now() >= deadline {
                            stats.lb = objective;
                            break;
                        }
                        continue;
                    }
                }
                stats.lb = objective;
                stats.certified = true;
                break;
            }

            // pricing at stabilized duals came up empty or redundant
            smoothing.note_misprice();
            if Instant::now() >= deadline {
                stats.lb = smoothing.best_bound();
                break;
            }
        }
        stats.misprices = smoothing.misprices;
        stats.variables = self.live_columns();
        stats.total_seconds = start.elapsed().as_secs_f64();
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::builtin_example;

    #[test]
    fn build_gives_partition_convexity_and_capacity() {
        let inst = builtin_example();
        let master = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        assert_eq!(master.partition_rows.len() - 1, 3);
        assert_eq!(master.cuts.gsecs.len(), 1);
        assert_eq!(master.cuts.gsecs[0].kappa, 1);
        // 3 singletons + empty route
        assert_eq!(master.live_columns(), 4);
        let singleton = &master.columns[0];
        assert_eq!(singleton.route, vec![1]);
        assert_eq!(singleton.cost, 100); // scaled cost 10
        let empty = master.columns.last().unwrap();
        assert!(empty.route.is_empty());
        assert_eq!(empty.cost, 0);
    }

    #[test]
    fn builtin_example_lb_is_thirty() {
        let inst = builtin_example();
        let mut master = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        let stats = master.cg_loop(&CgConfig::dw(0)).unwrap();
        assert!(stats.certified);
        assert!((stats.lb - 30.0).abs() < 1e-7, "lb = {}", stats.lb);
        // partition rows hold exactly at the optimum
        let support = master.support();
        let mut cover = vec![0.0; 4];
        for (i, w) in &support {
            for &v in &master.columns[*i].route {
                cover[v] += w;
            }
        }
        for i in 1..=3 {
            assert!((cover[i] - 1.0).abs() < 1e-7);
        }
        // the Lagrangian bound never exceeded the final LB
        for t in &stats.trace {
            assert!(t.lower_bound <= stats.lb + 1e-6);
        }
    }

    #[test]
    fn explicit_dag_backend_matches_labeling() {
        let inst = builtin_example();
        let mut a = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        let sa = a.cg_loop(&CgConfig::dw(0)).unwrap();
        let mut config = CgConfig::dw(0);
        config.pricer = PricerKind::Dag;
        let mut b = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        let sb = b.cg_loop(&config).unwrap();
        assert!((sa.lb - sb.lb).abs() < 1e-9);
        let mut config = CgConfig::dw(0);
        config.pricer = PricerKind::Beam;
        let mut c = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        let sc = c.cg_loop(&config).unwrap();
        assert!((sa.lb - sc.lb).abs() < 1e-9);
    }

    #[test]
    fn purge_and_resolve_never_decreases_lb() {
        let inst = builtin_example();
        let mut master = DwMaster::build(&inst, NgConfig::new(&inst, 0));
        let before = master.cg_loop(&CgConfig::dw(0)).unwrap().lb;
        assert_eq!(master.purge_columns(|_| true), 0);
        // forbid the cycle 1->2->1 and drop its columns
        let purged = master.purge_columns(|r| {
            !r.windows(3).any(|w| w[0] == 1 && w[1] == 2 && w[2] == 1)
        });
        let after = master.cg_loop(&CgConfig::dw(0)).unwrap().lb;
        assert!(after >= before - 1e-6);
        let _ = purged;
    }
}
