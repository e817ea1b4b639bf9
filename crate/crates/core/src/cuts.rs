//! Cut pool: rounded-capacity / generalized subtour cuts in the original
//! space and subset-row cuts on the partition rows.
//!
//! Subset-row cuts carry multiplier 1/2 on every member, so each one adds a
//! single bit of resource state to pricing: the fractional part lives in
//! {0, 1/2} and is stored as a numerator over the fixed denominator 2.

use crate::instance::VrptwInstance;
use crate::{Route, Vertex};

/// Customer subsets as bitsets over vertex indices `1..=n`.
pub type CustomerSet = u128;

pub fn set_contains(s: CustomerSet, v: Vertex) -> bool {
    v < 128 && s & (1 << v) != 0
}

pub fn set_of(members: &[Vertex]) -> CustomerSet {
    members.iter().fold(0, |s, &v| s | (1 << v))
}

/// A >= cut requiring at least `kappa` vehicles to enter `members`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GsecCut {
    pub members: CustomerSet,
    pub kappa: i64,
}

impl GsecCut {
    pub fn new(inst: &VrptwInstance, members: CustomerSet) -> GsecCut {
        let demand: i64 = inst
            .customers()
            .filter(|&i| set_contains(members, i))
            .map(|i| inst.demand[i])
            .sum();
        GsecCut {
            members,
            kappa: (demand + inst.capacity - 1) / inst.capacity,
        }
    }

    /// The a-priori rounded capacity cut over all customers.
    pub fn capacity_cut(inst: &VrptwInstance) -> GsecCut {
        let all: CustomerSet = inst.customers().map(|i| 1u128 << i).sum();
        GsecCut::new(inst, all)
    }

    /// Whether original arc (i, j) enters the member set.
    pub fn covers_arc(&self, i: Vertex, j: Vertex) -> bool {
        !set_contains(self.members, i) && set_contains(self.members, j)
    }

    /// Number of route arcs entering the member set.
    pub fn dw_coeff(&self, route: &Route) -> i64 {
        let mut prev_in = false; // source depot is outside
        let mut count = 0;
        for &v in route {
            let v_in = set_contains(self.members, v);
            if !prev_in && v_in {
                count += 1;
            }
            prev_in = v_in;
        }
        count
    }
}

/// A subset-row cut: multipliers 1/2 on each member, right hand side
/// floor(|members| / 2), sense <=.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrcCut {
    pub members: CustomerSet,
}

impl SrcCut {
    pub fn new(members: &[Vertex]) -> SrcCut {
        SrcCut {
            members: set_of(members),
        }
    }

    pub fn rhs(&self) -> i64 {
        (self.members.count_ones() / 2) as i64
    }

    /// floor of half the route's visits to the member set.
    pub fn dw_coeff(&self, route: &Route) -> i64 {
        let visits = route
            .iter()
            .filter(|&&v| set_contains(self.members, v))
            .count() as i64;
        visits / 2
    }
}

/// One resource-state transition: `g' = (g + u_j) mod 1` over denominator 2;
/// the cut coefficient increments exactly when the fraction wraps.
pub fn src_expand_state(g_num: u8, j: Vertex, cut: &SrcCut) -> (u8, i64) {
    if !set_contains(cut.members, j) {
        (g_num, 0)
    } else if g_num == 1 {
        (0, 1)
    } else {
        (1, 0)
    }
}

/// Separation rules for subset-row cuts on customer triplets.
#[derive(Debug, Clone, Copy)]
pub struct SrcParams {
    pub max_total: usize,
    pub per_round: usize,
    pub per_customer: usize,
    pub min_violation: f64,
}

impl Default for SrcParams {
    fn default() -> Self {
        SrcParams {
            max_total: 100,
            per_round: 30,
            per_customer: 5,
            min_violation: 0.1,
        }
    }
}

/// What one separation round saw: the cuts picked, and how many violated
/// candidates the caps forced it to leave behind.
#[derive(Debug, Clone, Default)]
pub struct SeparationOutcome {
    pub cuts: Vec<SrcCut>,
    pub blocked: usize,
}

/// Enumerate all customer triplets against the master support and return the
/// most violated new cuts, honoring the per-round, per-customer and global
/// caps. `support` pairs each route with its primal weight.
pub fn separate_src3(
    n: usize,
    support: &[(&Route, f64)],
    existing: &[SrcCut],
    params: &SrcParams,
) -> Vec<SrcCut> {
    separate_src3_full(n, support, existing, params).cuts
}

/// `separate_src3` plus the count of violated-but-capped candidates.
pub fn separate_src3_full(
    n: usize,
    support: &[(&Route, f64)],
    existing: &[SrcCut],
    params: &SrcParams,
) -> SeparationOutcome {
    if existing.len() >= params.max_total {
        let any = count_violated(n, support, existing, params);
        return SeparationOutcome {
            cuts: Vec::new(),
            blocked: any,
        };
    }
    let visits: Vec<Vec<i64>> = support
        .iter()
        .map(|(route, _)| {
            let mut z = vec![0i64; n + 1];
            for &v in route.iter() {
                z[v] += 1;
            }
            z
        })
        .collect();

    let mut candidates: Vec<(f64, [Vertex; 3])> = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                let set = set_of(&[a, b, c]);
                if existing.iter().any(|cut| cut.members == set) {
                    continue;
                }
                let mut lhs = 0.0;
                for ((_, weight), z) in support.iter().zip(&visits) {
                    let coeff = (z[a] + z[b] + z[c]) / 2;
                    if coeff > 0 {
                        lhs += coeff as f64 * weight;
                    }
                }
                let violation = lhs - 1.0;
                if violation > params.min_violation {
                    candidates.push((violation, [a, b, c]));
                }
            }
        }
    }
    candidates.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then_with(|| x.1.cmp(&y.1)));

    let mut appearances = vec![0usize; n + 1];
    for cut in existing {
        for v in 1..=n {
            if set_contains(cut.members, v) {
                appearances[v] += 1;
            }
        }
    }
    let mut picked = Vec::new();
    let mut blocked = 0;
    let mut total = existing.len();
    for (_, trip) in candidates {
        if picked.len() >= params.per_round
            || total >= params.max_total
            || trip.iter().any(|&v| appearances[v] >= params.per_customer)
        {
            blocked += 1;
            continue;
        }
        for &v in &trip {
            appearances[v] += 1;
        }
        picked.push(SrcCut::new(&trip));
        total += 1;
    }
    SeparationOutcome {
        cuts: picked,
        blocked,
    }
}

/// Number of violated triplets regardless of caps (used when the global cap
/// is already exhausted).
fn count_violated(
    n: usize,
    support: &[(&Route, f64)],
    existing: &[SrcCut],
    params: &SrcParams,
) -> usize {
    let visits: Vec<Vec<i64>> = support
        .iter()
        .map(|(route, _)| {
            let mut z = vec![0i64; n + 1];
            for &v in route.iter() {
                z[v] += 1;
            }
            z
        })
        .collect();
    let mut count = 0;
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                let set = set_of(&[a, b, c]);
                if existing.iter().any(|cut| cut.members == set) {
                    continue;
                }
                let mut lhs = 0.0;
                for ((_, weight), z) in support.iter().zip(&visits) {
                    let coeff = (z[a] + z[b] + z[c]) / 2;
                    if coeff > 0 {
                        lhs += coeff as f64 * weight;
                    }
                }
                if lhs - 1.0 > params.min_violation {
                    count += 1;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::builtin_example;

    #[test]
    fn gsec_on_builtin_example() {
        let inst = builtin_example();
        let cut = GsecCut::new(&inst, set_of(&[1, 3]));
        assert_eq!(cut.kappa, 1);
        // entering arcs are exactly (0,1), (0,3), (2,1), (2,3)
        let mut arcs = Vec::new();
        for i in 0..inst.num_vertices() {
            for j in 0..inst.num_vertices() {
                if inst.has_arc(i, j) && cut.covers_arc(i, j) {
                    arcs.push((i, j));
                }
            }
        }
        assert_eq!(arcs, vec![(0, 1), (0, 3), (2, 1), (2, 3)]);
    }

    #[test]
    fn gsec_route_coefficients() {
        let inst = builtin_example();
        let all = GsecCut::capacity_cut(&inst);
        assert_eq!(all.kappa, 1); // ceil(3 / 3)
        assert_eq!(all.dw_coeff(&vec![1]), 1); // singleton enters once
        assert_eq!(all.dw_coeff(&vec![]), 0); // empty route
        let s13 = GsecCut::new(&inst, set_of(&[1, 3]));
        assert_eq!(s13.dw_coeff(&vec![1, 2, 3]), 2); // enters at 1 and at 3
        assert_eq!(s13.dw_coeff(&vec![2]), 0);
    }

    #[test]
    fn src_coefficients_match_route_table() {
        let cut = SrcCut::new(&[1, 2]);
        assert_eq!(cut.rhs(), 1);
        assert_eq!(cut.dw_coeff(&vec![1, 2]), 1);
        assert_eq!(cut.dw_coeff(&vec![3, 2, 3]), 0);
        assert_eq!(cut.dw_coeff(&vec![2, 1, 2]), 1);
        let trip = SrcCut::new(&[1, 2, 3]);
        assert_eq!(trip.dw_coeff(&vec![1, 2, 3]), 1);
    }

    #[test]
    fn src_state_wraps_and_increments() {
        let cut = SrcCut::new(&[1, 2]);
        assert_eq!(src_expand_state(1, 2, &cut), (0, 1));
        assert_eq!(src_expand_state(0, 1, &cut), (1, 0));
        assert_eq!(src_expand_state(1, 3, &cut), (1, 0)); // u_3 = 0
    }

    #[test]
    fn separation_emits_hand_computed_cut() {
        // lambda = 1/2 on 0->1->2->0, 0->2->3->0, 0->1->3->0
        let r1 = vec![1, 2];
        let r2 = vec![2, 3];
        let r3 = vec![1, 3];
        let support: Vec<(&Route, f64)> = vec![(&r1, 0.5), (&r2, 0.5), (&r3, 0.5)];
        let cuts = separate_src3(3, &support, &[], &SrcParams::default());
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].members, set_of(&[1, 2, 3]));
    }

    #[test]
    fn integral_elementary_support_yields_no_cuts() {
        let r1 = vec![1, 2];
        let r2 = vec![3];
        let support: Vec<(&Route, f64)> = vec![(&r1, 1.0), (&r2, 1.0)];
        let cuts = separate_src3(3, &support, &[], &SrcParams::default());
        assert!(cuts.is_empty());
    }

    #[test]
    fn caps_are_enforced() {
        // a fractional mess violating lots of triplets
        let n = 12;
        let mut routes = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                routes.push(vec![a, b]);
            }
        }
        let support: Vec<(&Route, f64)> = routes.iter().map(|r| (r, 0.9)).collect();
        let params = SrcParams::default();
        let cuts = separate_src3(n, &support, &[], &params);
        assert!(cuts.len() <= params.per_round);
        let mut appearances = vec![0usize; n + 1];
        for cut in &cuts {
            for v in 1..=n {
                if set_contains(cut.members, v) {
                    appearances[v] += 1;
                }
            }
        }
        assert!(appearances.iter().all(|&k| k <= params.per_customer));
    }
}
