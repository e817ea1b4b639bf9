//! The explicit unfolded state-transition DAG for the ng-SPPRC, optionally
//! expanded with subset-row resource bits, plus shortest-path and beam
//! pricing, flow decomposition and the route/path lift-project pair.
//!
//! Node states are exact integer tuples, so recompiling the same relaxation
//! reproduces the same graph arc for arc. Interior transition arcs are
//! numbered layer by load layer, sorted by (tail vertex, head vertex, rest of
//! tail state); terminal arcs follow, the direct root-terminal arc first.

use crate::cuts::{set_contains, CustomerSet, SrcCut};
use crate::instance::{VrptwInstance, SCALE};
use crate::pricing::{ActiveCuts, DualValues, NgConfig};
use crate::{Route, Vertex};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeState {
    pub load: i64,
    pub vertex: Vertex,
    pub time: i64,
    pub mem: CustomerSet,
    pub src_g: u128,
}

#[derive(Debug, Clone)]
pub struct DagNode {
    pub state: NodeState,
    pub out: Vec<u32>,
    pub inc: Vec<u32>,
    pub alive: bool,
}

#[derive(Debug, Clone)]
pub struct DagArc {
    pub tail: u32,
    pub head: u32,
    /// Original arc (i, j) this transition projects to.
    pub from: Vertex,
    pub to: Vertex,
    /// Scaled cost c_e = c_ij.
    pub cost: i64,
    pub alive: bool,
}

#[derive(Debug, thiserror::Error)]
#[error("DAG compilation exceeded the arc cap of {cap}")]
pub struct CompileOverflow {
    pub cap: usize,
}

#[derive(Debug, thiserror::Error)]
#[error("route is not representable in the current DAG (failed at step {step})")]
pub struct LiftFailure {
    pub step: usize,
}

/// Default arc cap; overflow is a first-class result, not a crash.
pub const DEFAULT_ARC_CAP: usize = 50_000_000;

#[derive(Debug, Clone)]
pub struct Dag {
    pub nodes: Vec<DagNode>,
    pub arcs: Vec<DagArc>,
    pub root: u32,
    pub term: u32,
    /// Subset-row cuts baked into the g component of the states.
    pub src_cuts: Vec<SrcCut>,
    /// Set once local refinements (state splits) detach the graph from the
    /// plain ng relaxation; implicit labeling is then no longer equivalent.
    pub locally_refined: bool,
}

/// A root-terminal path with a flow weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFlow {
    pub arcs: Vec<u32>,
    pub weight: f64,
}

impl Dag {
    /// Breadth-first unfolding by load layer using the pricing transitions.
    pub fn compile(
        inst: &VrptwInstance,
        ng: &NgConfig,
        src_cuts: &[SrcCut],
        arc_cap: usize,
    ) -> Result<Dag, CompileOverflow> {
        let root_state = NodeState {
            load: 0,
            vertex: inst.source(),
            time: inst.horizon_start(),
            mem: 0,
            src_g: 0,
        };
        let term_state = NodeState {
            load: i64::MAX,
            vertex: inst.sink(),
            time: 0,
            mem: 0,
            src_g: 0,
        };
        let mut dag = Dag {
            nodes: vec![
                DagNode {
                    state: root_state,
                    out: Vec::new(),
                    inc: Vec::new(),
                    alive: true,
                },
                DagNode {
                    state: term_state,
                    out: Vec::new(),
                    inc: Vec::new(),
                    alive: true,
                },
            ],
            arcs: Vec::new(),
            root: 0,
            term: 1,
            src_cuts: src_cuts.to_vec(),
            locally_refined: false,
        };
        let cap = inst.capacity as usize;
        let mut index: HashMap<NodeState, u32> = HashMap::new();
        let mut layers: Vec<Vec<u32>> = vec![Vec::new(); cap + 1];
        layers[0].push(dag.root);

        for load in 0..=cap {
            // a zero-demand customer keeps a label in its own layer, so the
            // layer is swept again until no new node lands in it
            let mut start = 0;
            loop {
                let mut batch: Vec<u32> = layers[load][start..].to_vec();
                start = layers[load].len();
                if batch.is_empty() {
                    break;
                }
                batch.sort_by_key(|&id| dag.nodes[id as usize].state);
                // candidate transitions ordered by (tail.v, j, rest of tail)
                let mut cands: Vec<(Vertex, Vertex, NodeState, u32)> = Vec::new();
                for &tid in &batch {
                    let ts = dag.nodes[tid as usize].state;
                    for j in inst.customers() {
                        if transition(inst, ng, src_cuts, &ts, j).is_some() {
                            cands.push((ts.vertex, j, ts, tid));
                        }
                    }
                }
                cands.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
                for (_, j, ts, tid) in cands {
                    let hs = transition(inst, ng, src_cuts, &ts, j).unwrap();
                    let hid = *index.entry(hs).or_insert_with(|| {
                        let id = dag.nodes.len() as u32;
                        dag.nodes.push(DagNode {
                            state: hs,
                            out: Vec::new(),
                            inc: Vec::new(),
                            alive: true,
                        });
                        layers[hs.load as usize].push(id);
                        id
                    });
                    let aid = dag.arcs.len() as u32;
                    dag.arcs.push(DagArc {
                        tail: tid,
                        head: hid,
                        from: ts.vertex,
                        to: j,
                        cost: inst.cost(ts.vertex, j),
                        alive: true,
                    });
                    dag.nodes[tid as usize].out.push(aid);
                    dag.nodes[hid as usize].inc.push(aid);
                    if dag.arcs.len() > arc_cap {
                        return Err(CompileOverflow { cap: arc_cap });
                    }
                }
            }
        }

        // terminal arcs: the empty-route arc first, then one return arc per
        // state that can still reach the depot in time, in state order
        if inst.has_arc(inst.source(), inst.sink()) {
            dag.push_terminal_arc(inst, dag.root);
        }
        let mut interior: Vec<u32> = (2..dag.nodes.len() as u32).collect();
        interior.sort_by_key(|&id| dag.nodes[id as usize].state);
        for id in interior {
            let s = dag.nodes[id as usize].state;
            if inst.has_arc(s.vertex, inst.sink())
                && s.time + inst.tau(s.vertex, inst.sink()) <= inst.horizon_end()
            {
                dag.push_terminal_arc(inst, id);
            }
            if dag.arcs.len() > arc_cap {
                return Err(CompileOverflow { cap: arc_cap });
            }
        }
        dag.prune();
        Ok(dag)
    }

    fn push_terminal_arc(&mut self, inst: &VrptwInstance, tail: u32) {
        let v = self.nodes[tail as usize].state.vertex;
        let aid = self.arcs.len() as u32;
        self.arcs.push(DagArc {
            tail,
            head: self.term,
            from: v,
            to: inst.sink(),
            cost: inst.cost(v, inst.sink()),
            alive: true,
        });
        self.nodes[tail as usize].out.push(aid);
        self.nodes[self.term as usize].inc.push(aid);
    }

    /// Recompute aliveness: a node or arc survives only on some root-terminal
    /// path through live arcs.
    pub fn prune(&mut self) {
        let n = self.nodes.len();
        let mut fwd = vec![false; n];
        let mut bwd = vec![false; n];
        fwd[self.root as usize] = true;
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            for &a in &self.nodes[u as usize].out {
                let arc = &self.arcs[a as usize];
                if arc.alive && !fwd[arc.head as usize] {
                    fwd[arc.head as usize] = true;
                    stack.push(arc.head);
                }
            }
        }
        bwd[self.term as usize] = true;
        stack.push(self.term);
        while let Some(u) = stack.pop() {
            for &a in &self.nodes[u as usize].inc {
                let arc = &self.arcs[a as usize];
                if arc.alive && !bwd[arc.tail as usize] {
                    bwd[arc.tail as usize] = true;
                    stack.push(arc.tail);
                }
            }
        }
        for (i, node) in self.nodes.iter_mut().enumerate() {
            node.alive = fwd[i] && bwd[i];
        }
        for arc in &mut self.arcs {
            if arc.alive {
                arc.alive =
                    self.nodes[arc.tail as usize].alive && self.nodes[arc.head as usize].alive;
            }
        }
    }

    pub fn live_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn live_arcs(&self) -> usize {
        self.arcs.iter().filter(|a| a.alive).count()
    }

    /// |E| + |N| over the live graph.
    pub fn dimension(&self) -> i64 {
        (self.live_nodes() + self.live_arcs()) as i64
    }

    /// Topological order of live nodes (root first, terminal last).
    fn topo_order(&self) -> Vec<u32> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for arc in &self.arcs {
            if arc.alive {
                indeg[arc.head as usize] += 1;
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut queue: Vec<u32> = (0..n as u32)
            .filter(|&i| self.nodes[i as usize].alive && indeg[i as usize] == 0)
            .collect();
        while let Some(u) = queue.pop() {
            order.push(u);
            for &a in &self.nodes[u as usize].out {
                let arc = &self.arcs[a as usize];
                if arc.alive {
                    indeg[arc.head as usize] -= 1;
                    if indeg[arc.head as usize] == 0 {
                        queue.push(arc.head);
                    }
                }
            }
        }
        order
    }

    /// Exact root-terminal path count, the empty-route arc included.
    pub fn count_paths(&self) -> u128 {
        self.count_paths_over(|_| true)
    }

    /// Root-terminal path count restricted to arcs passing `allow`.
    pub fn count_paths_over(&self, allow: impl Fn(u32) -> bool) -> u128 {
        let mut count = vec![0u128; self.nodes.len()];
        count[self.root as usize] = 1;
        for u in self.topo_order() {
            let c = count[u as usize];
            if c == 0 {
                continue;
            }
            for &a in &self.nodes[u as usize].out {
                let arc = &self.arcs[a as usize];
                if arc.alive && allow(a) {
                    count[arc.head as usize] = count[arc.head as usize].saturating_add(c);
                }
            }
        }
        count[self.term as usize]
    }

    /// Reduced cost of one arc under the given duals.
    fn arc_rcost(&self, duals: &DualValues, cuts: &ActiveCuts, a: u32) -> f64 {
        let arc = &self.arcs[a as usize];
        let mut c = arc.cost as f64 / SCALE as f64 - duals.pi(arc.from);
        for (cut, &mu) in cuts.gsecs.iter().zip(&duals.gsec) {
            if cut.covers_arc(arc.from, arc.to) {
                c -= mu;
            }
        }
        if !self.src_cuts.is_empty() {
            let tail_g = self.nodes[arc.tail as usize].state.src_g;
            for (m, (cut, &mu)) in self.src_cuts.iter().zip(&duals.src).enumerate() {
                if set_contains(cut.members, arc.to) && tail_g & (1 << m) != 0 {
                    c -= mu; // wrap: coefficient 1 on this arc
                }
            }
        }
        c
    }

    /// Whether arc `a` increments the coefficient of baked subset-row cut `m`.
    pub fn arc_wraps_src(&self, a: u32, m: usize) -> bool {
        let arc = &self.arcs[a as usize];
        set_contains(self.src_cuts[m].members, arc.to)
            && self.nodes[arc.tail as usize].state.src_g & (1 << m) != 0
    }

    /// Minimum-reduced-cost root-terminal path. Ties break to the
    /// lexicographically smallest arc-id sequence.
    pub fn shortest_path(&self, duals: &DualValues, cuts: &ActiveCuts) -> (Vec<u32>, f64) {
        self.best_path(duals, cuts, usize::MAX)
    }

    /// Heuristic pricing: only the `width` cheapest extensions out of every
    /// node are explored. The returned value never beats the exact optimum
    /// and an empty improvement is no certificate.
    pub fn beam_search(&self, duals: &DualValues, cuts: &ActiveCuts, width: usize) -> (Vec<u32>, f64) {
        self.best_path(duals, cuts, width.max(1))
    }

    fn best_path(&self, duals: &DualValues, cuts: &ActiveCuts, width: usize) -> (Vec<u32>, f64) {
        debug_assert_eq!(duals.src.len(), self.src_cuts.len());
        let n = self.nodes.len();
        // the direct root-terminal arc is a permanent master column, so path
        // pricing searches routes with at least one customer
        let skip = |a: u32| {
            let arc = &self.arcs[a as usize];
            arc.tail == self.root && arc.head == self.term
        };
        let mut allowed: Vec<Option<Vec<u32>>> = vec![None; n];
        if width != usize::MAX {
            for u in 0..n {
                if !self.nodes[u].alive {
                    continue;
                }
                let mut outs: Vec<(f64, u32)> = self.nodes[u]
                    .out
                    .iter()
                    .filter(|&&a| self.arcs[a as usize].alive && !skip(a))
                    .map(|&a| (self.arc_rcost(duals, cuts, a), a))
                    .collect();
                outs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
                outs.truncate(width);
                allowed[u] = Some(outs.into_iter().map(|(_, a)| a).collect());
            }
        }
        let arc_ok = |u: usize, a: u32| -> bool {
            self.arcs[a as usize].alive
                && !skip(a)
                && match &allowed[u] {
                    None => true,
                    Some(list) => list.contains(&a),
                }
        };

        // backward value-to-terminal, then a forward greedy walk taking the
        // smallest arc id among epsilon-optimal continuations
        let order = self.topo_order();
        let mut value = vec![f64::INFINITY; n];
        value[self.term as usize] = 0.0;
        for &u in order.iter().rev() {
            let u = u as usize;
            if u == self.term as usize || !self.nodes[u].alive {
                continue;
            }
            let mut best = f64::INFINITY;
            for &a in &self.nodes[u].out {
                if arc_ok(u, a) {
                    let h = self.arcs[a as usize].head as usize;
                    if value[h].is_finite() {
                        best = best.min(self.arc_rcost(duals, cuts, a) + value[h]);
                    }
                }
            }
            value[u] = best;
        }
        let mut path = Vec::new();
        let mut total = 0.0;
        let mut u = self.root as usize;
        while u != self.term as usize {
            let target = value[u];
            let mut pick: Option<u32> = None;
            for &a in &self.nodes[u].out {
                if !arc_ok(u, a) {
                    continue;
                }
                let h = self.arcs[a as usize].head as usize;
                let v = self.arc_rcost(duals, cuts, a) + value[h];
                if v <= target + 1e-9 && pick.map_or(true, |p| a < p) {
                    pick = Some(a);
                }
            }
            let a = pick.expect("live root must reach the terminal");
            total += self.arc_rcost(duals, cuts, a);
            path.push(a);
            u = self.arcs[a as usize].head as usize;
        }
        (path, total)
    }

    /// Decompose nonnegative arc flows (summing to `k` at the source) into
    /// path flows: repeatedly trace the smallest-id positive arc from the
    /// root and subtract the path minimum.
    pub fn flow_decompose(&self, flows: &[f64], k: f64) -> Vec<PathFlow> {
        assert_eq!(flows.len(), self.arcs.len(), "flow vector length mismatch");
        // conservation contract
        for (u, node) in self.nodes.iter().enumerate() {
            if u as u32 == self.root || u as u32 == self.term || !node.alive {
                continue;
            }
            let inflow: f64 = node.inc.iter().map(|&a| flows[a as usize]).sum();
            let outflow: f64 = node.out.iter().map(|&a| flows[a as usize]).sum();
            assert!(
                (inflow - outflow).abs() <= 1e-7,
                "flow conservation violated at node {u}: in {inflow} out {outflow}"
            );
        }
        let source_out: f64 = self.nodes[self.root as usize]
            .out
            .iter()
            .map(|&a| flows[a as usize])
            .sum();
        assert!(
            (source_out - k).abs() <= 1e-7,
            "source outflow {source_out} does not match {k}"
        );

        let mut rem = flows.to_vec();
        let mut paths = Vec::new();
        for _ in 0..self.arcs.len() {
            // trace from the root along the smallest-id positive arc
            let mut u = self.root;
            let mut arcs = Vec::new();
            let mut theta = f64::INFINITY;
            while u != self.term {
                let a = self.nodes[u as usize]
                    .out
                    .iter()
                    .copied()
                    .filter(|&a| rem[a as usize] > 1e-9)
                    .min();
                let Some(a) = a else { break };
                theta = theta.min(rem[a as usize]);
                arcs.push(a);
                u = self.arcs[a as usize].head;
            }
            if u != self.term || arcs.is_empty() && theta.is_infinite() {
                break;
            }
            for &a in &arcs {
                rem[a as usize] -= theta;
            }
            paths.push(PathFlow {
                arcs,
                weight: theta,
            });
        }
        paths
    }

    /// Greedy lift: replay the route's transitions from the root; fails when
    /// some step has no matching arc in the current graph.
    pub fn lift_route(&self, route: &Route) -> Result<Vec<u32>, LiftFailure> {
        let mut u = self.root;
        let mut arcs = Vec::new();
        for (step, &j) in route.iter().enumerate() {
            let next = self.nodes[u as usize]
                .out
                .iter()
                .copied()
                .find(|&a| self.arcs[a as usize].alive && self.arcs[a as usize].to == j);
            match next {
                Some(a) => {
                    arcs.push(a);
                    u = self.arcs[a as usize].head;
                }
                None => return Err(LiftFailure { step }),
            }
        }
        let last = self.nodes[u as usize]
            .out
            .iter()
            .copied()
            .find(|&a| self.arcs[a as usize].alive && self.arcs[a as usize].head == self.term);
        match last {
            Some(a) => {
                arcs.push(a);
                Ok(arcs)
            }
            None => Err(LiftFailure { step: route.len() }),
        }
    }

    /// Project a path back to its route (customer sequence).
    pub fn project_path(&self, arcs: &[u32]) -> Route {
        let mut route = Vec::new();
        for &a in arcs {
            let arc = &self.arcs[a as usize];
            if arc.head != self.term {
                route.push(arc.to);
            }
        }
        route
    }

    /// Plain-text edge list for diffing against the worked figures.
    pub fn debug_export(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.alive {
                continue;
            }
            let st = &node.state;
            let mem: Vec<String> = (0..128)
                .filter(|&b| st.mem & (1u128 << b) != 0)
                .map(|b| b.to_string())
                .collect();
            let _ = writeln!(
                s,
                "node {i} v={} d={} t={} U={{{}}} g={:b}",
                st.vertex,
                st.load,
                st.time,
                mem.join(","),
                st.src_g
            );
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            if arc.alive {
                let _ = writeln!(
                    s,
                    "arc y{} {}->{} orig=({},{}) cost={}",
                    i + 1,
                    arc.tail,
                    arc.head,
                    arc.from,
                    arc.to,
                    arc.cost
                );
            }
        }
        s
    }
}

/// One forward transition of the compile-time state (mirrors pricing).
fn transition(
    inst: &VrptwInstance,
    ng: &NgConfig,
    src_cuts: &[SrcCut],
    s: &NodeState,
    j: Vertex,
) -> Option<NodeState> {
    if !inst.has_arc(s.vertex, j) || set_contains(s.mem, j) {
        return None;
    }
    let load = s.load + inst.demand[j];
    if load > inst.capacity {
        return None;
    }
    let time = (s.time + inst.tau(s.vertex, j)).max(inst.ready[j]);
    if time > inst.due[j] {
        return None;
    }
    let mem = (s.mem & ng.set(j)) | (1 << j);
    let mut src_g = s.src_g;
    for (m, cut) in src_cuts.iter().enumerate() {
        if set_contains(cut.members, j) {
            src_g ^= 1 << m;
        }
    }
    Some(NodeState {
        load,
        vertex: j,
        time,
        mem,
        src_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::builtin_example;
    use crate::pricing::{run_labeling, PricingMode};

    fn builtin_dag() -> Dag {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        Dag::compile(&inst, &ng, &[], DEFAULT_ARC_CAP).unwrap()
    }

    #[test]
    fn figure_graph_dimensions() {
        let dag = builtin_dag();
        assert_eq!(dag.live_nodes(), 11);
        assert_eq!(dag.live_arcs(), 21);
        assert_eq!(dag.count_paths(), 14);
    }

    #[test]
    fn figure_arc_numbering() {
        let inst = builtin_example();
        let dag = builtin_dag();
        // y1..y3: out of the root by head vertex
        let orig = |a: usize| {
            let arc = &dag.arcs[a];
            (arc.from, arc.to)
        };
        assert_eq!(orig(0), (0, 1));
        assert_eq!(orig(1), (0, 2));
        assert_eq!(orig(2), (0, 3));
        // y4..y7: layer d=1
        assert_eq!(orig(3), (1, 2));
        assert_eq!(orig(4), (2, 1));
        assert_eq!(orig(5), (2, 3));
        assert_eq!(orig(6), (3, 2));
        // y8..y11: layer d=2
        assert_eq!(orig(7), (1, 2));
        assert_eq!(orig(8), (2, 1));
        assert_eq!(orig(9), (2, 3));
        assert_eq!(orig(10), (3, 2));
        // y12: empty route, then terminal arcs in state order
        assert_eq!(orig(11), (0, inst.sink()));
        let tails: Vec<(i64, Vertex)> = (12..21)
            .map(|a| {
                let t = dag.arcs[a].tail as usize;
                (dag.nodes[t].state.load, dag.nodes[t].state.vertex)
            })
            .collect();
        assert_eq!(
            tails,
            vec![
                (1, 1),
                (1, 2),
                (1, 3),
                (2, 1),
                (2, 2),
                (2, 3),
                (3, 1),
                (3, 2),
                (3, 3)
            ]
        );
        // the two merged transitions both land on the single v=2 d=2 state
        assert_eq!(dag.arcs[3].head, dag.arcs[6].head);
    }

    #[test]
    fn src_expansion_splits_states_like_the_figure() {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        let cut = SrcCut::new(&[1, 2]);
        let dag = Dag::compile(&inst, &ng, &[cut], DEFAULT_ARC_CAP).unwrap();
        // v=2, d=2 splits by g; d=3 grows to six states
        let by_layer = |d: i64| {
            dag.nodes
                .iter()
                .filter(|n| n.alive && n.state.load == d && n.state.vertex != inst.sink())
                .count()
        };
        assert_eq!(by_layer(1), 3);
        assert_eq!(by_layer(2), 4);
        assert_eq!(by_layer(3), 6);
        assert_eq!(dag.live_nodes(), 15);
        // wrap arcs carry the cut coefficient: exactly y4, y5, y10, y13
        let wraps: Vec<usize> = (0..dag.arcs.len())
            .filter(|&a| dag.arcs[a].alive && dag.arc_wraps_src(a as u32, 0))
            .map(|a| a + 1)
            .collect();
        assert_eq!(wraps, vec![4, 5, 10, 13]);
    }

    #[test]
    fn shortest_path_zero_duals_takes_cheapest_route() {
        let inst = builtin_example();
        let dag = builtin_dag();
        let duals = DualValues::zero(inst.n);
        let (path, rc) = dag.shortest_path(&duals, &ActiveCuts::none());
        assert!((rc - 10.0).abs() < 1e-9);
        // ties break to the smaller arc ids: y1 then y13
        assert_eq!(path, vec![0, 12]);
        assert_eq!(dag.project_path(&path), vec![1]);
    }

    #[test]
    fn beam_search_degenerates_and_matches() {
        let inst = builtin_example();
        let dag = builtin_dag();
        let mut duals = DualValues::zero(inst.n);
        duals.customer = vec![0.0, 12.0, 25.0, 9.0];
        let (exact_path, exact) = dag.shortest_path(&duals, &ActiveCuts::none());
        let (wide_path, wide) = dag.beam_search(&duals, &ActiveCuts::none(), usize::MAX);
        assert_eq!(exact_path, wide_path);
        assert!((exact - wide).abs() < 1e-12);
        let (_, w3) = dag.beam_search(&duals, &ActiveCuts::none(), 3);
        assert!((w3 - exact).abs() < 1e-9); // tiny graph: width 3 is exact
        let (p1, w1) = dag.beam_search(&duals, &ActiveCuts::none(), 1);
        assert!(w1 >= exact - 1e-12);
        assert!(!p1.is_empty());
    }

    #[test]
    fn labeling_and_dag_pricing_agree() {
        let inst = builtin_example();
        let ng = NgConfig::new(&inst, 0);
        let dag = builtin_dag();
        let cuts = ActiveCuts::none();
        let mut duals = DualValues::zero(inst.n);
        for (a, b, c) in [(3.0, 11.0, 4.5), (20.0, 0.0, 7.25), (8.0, 8.0, 8.0)] {
            duals.customer = vec![0.0, a, b, c];
            let lab = run_labeling(&inst, &ng, &duals, &cuts, PricingMode::Exact, 50);
            let (_, sp) = dag.shortest_path(&duals, &cuts);
            assert!(
                (lab.best_value - sp).abs() < 1e-9,
                "labeling {} vs dag {}",
                lab.best_value,
                sp
            );
        }
    }

    #[test]
    fn lift_routes_from_figure() {
        let dag = builtin_dag();
        assert_eq!(dag.lift_route(&vec![1]).unwrap(), vec![0, 12]);
        assert_eq!(dag.lift_route(&vec![3, 2]).unwrap(), vec![2, 6, 16]);
        assert_eq!(dag.lift_route(&vec![]).unwrap(), vec![11]);
        assert!(dag.lift_route(&vec![1, 3]).is_err()); // arc (1,3) absent
        // round trips
        for route in [vec![1], vec![3, 2], vec![1, 2, 3], vec![2, 3, 2], vec![]] {
            let arcs = dag.lift_route(&route).unwrap();
            assert_eq!(dag.project_path(&arcs), route);
        }
    }

    #[test]
    fn flow_decomposition_reaggregates() {
        let dag = builtin_dag();
        let mut flows = vec![0.0; dag.arcs.len()];
        // one unit on 0->1->0, half on 0->3->0 and 0->3->2->0 each
        let p1 = dag.lift_route(&vec![1]).unwrap();
        let p2 = dag.lift_route(&vec![3]).unwrap();
        let p3 = dag.lift_route(&vec![3, 2]).unwrap();
        for &a in &p1 {
            flows[a as usize] += 1.0;
        }
        for &a in &p2 {
            flows[a as usize] += 0.5;
        }
        for &a in &p3 {
            flows[a as usize] += 0.5;
        }
        let paths = dag.flow_decompose(&flows, 2.0);
        let total: f64 = paths.iter().map(|p| p.weight).sum();
        assert!((total - 2.0).abs() < 1e-9);
        let mut re = vec![0.0; dag.arcs.len()];
        for p in &paths {
            for &a in &p.arcs {
                re[a as usize] += p.weight;
            }
        }
        for (a, b) in flows.iter().zip(&re) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn relaxed_paths_superset_of_elementary() {
        let inst = builtin_example();
        let ng0 = NgConfig::new(&inst, 0);
        let ng_full = NgConfig::elementary(&inst);
        let d0 = Dag::compile(&inst, &ng0, &[], DEFAULT_ARC_CAP).unwrap();
        let df = Dag::compile(&inst, &ng_full, &[], DEFAULT_ARC_CAP).unwrap();
        assert!(df.count_paths() <= d0.count_paths());
        assert_eq!(df.count_paths(), 10); // 9 elementary routes + empty
    }
}
