//! Solomon-format VRPTW instances.
//!
//! All times, costs and coordinates are stored as integers scaled by 10, so
//! that the one-decimal truncation convention for Euclidean distances gives
//! exact state keys everywhere downstream. Travel times include the service
//! time of the arc's tail.

use crate::{Route, Vertex};
use std::fmt::Write as _;

/// Everything times and costs are multiplied by internally.
pub const SCALE: i64 = 10;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("subset size {requested} exceeds available customers ({available})")]
    SubsetRange { requested: usize, available: usize },
}

/// A VRPTW instance over vertices `0` (source depot), `1..=n` (customers) and
/// `n + 1` (sink depot). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VrptwInstance {
    pub name: String,
    /// Customer count.
    pub n: usize,
    /// Fleet size K.
    pub vehicles: usize,
    /// Vehicle capacity C.
    pub capacity: i64,
    /// Coordinates by vertex, scaled by 10.
    pub coords: Vec<(i64, i64)>,
    /// Demand by vertex; zero at both depot copies.
    pub demand: Vec<i64>,
    /// Window opening e_i by vertex, scaled.
    pub ready: Vec<i64>,
    /// Window closing l_i by vertex, scaled.
    pub due: Vec<i64>,
    /// Service time by vertex, scaled.
    pub service: Vec<i64>,
    /// Arc costs c_ij (scaled); row-major over vertices.
    cost: Vec<i64>,
    /// Travel times tau_ij = distance + service_i (scaled).
    tau: Vec<i64>,
    /// Structural arc presence.
    present: Vec<bool>,
}

impl VrptwInstance {
    pub fn num_vertices(&self) -> usize {
        self.n + 2
    }

    pub fn source(&self) -> Vertex {
        0
    }

    pub fn sink(&self) -> Vertex {
        self.n + 1
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<Vertex> {
        1..=self.n
    }

    /// Depot window opening E (scaled).
    pub fn horizon_start(&self) -> i64 {
        self.ready[0]
    }

    /// Depot window closing L (scaled).
    pub fn horizon_end(&self) -> i64 {
        self.due[0]
    }

    pub fn has_arc(&self, i: Vertex, j: Vertex) -> bool {
        self.present[i * self.num_vertices() + j]
    }

    /// Arc cost c_ij, scaled by 10.
    pub fn cost(&self, i: Vertex, j: Vertex) -> i64 {
        self.cost[i * self.num_vertices() + j]
    }

    /// Travel time tau_ij (distance plus service at i), scaled by 10.
    pub fn tau(&self, i: Vertex, j: Vertex) -> i64 {
        self.tau[i * self.num_vertices() + j]
    }

    /// Total demand over all customers.
    pub fn total_demand(&self) -> i64 {
        self.customers().map(|i| self.demand[i]).sum()
    }

    /// Cost of a route given as its customer sequence (scaled by 10).
    pub fn route_cost(&self, route: &Route) -> i64 {
        let mut prev = self.source();
        let mut total = 0;
        for &v in route {
            total += self.cost(prev, v);
            prev = v;
        }
        total + self.cost(prev, self.sink())
    }

    /// Load and completion-time feasibility of a customer sequence, ignoring
    /// any elementarity or ng rules. Returns the service start at the sink.
    pub fn route_feasible(&self, route: &Route) -> Option<i64> {
        let mut load = 0;
        let mut time = self.horizon_start();
        let mut prev = self.source();
        for &v in route {
            if !self.has_arc(prev, v) {
                return None;
            }
            load += self.demand[v];
            time = (time + self.tau(prev, v)).max(self.ready[v]);
            if load > self.capacity || time > self.due[v] {
                return None;
            }
            prev = v;
        }
        if !self.has_arc(prev, self.sink()) {
            return None;
        }
        time += self.tau(prev, self.sink());
        (time <= self.horizon_end()).then_some(time)
    }

    /// The number of visits each customer receives from `route`.
    pub fn visit_counts(&self, route: &Route) -> Vec<i64> {
        let mut z = vec![0i64; self.n + 1];
        for &v in route {
            z[v] += 1;
        }
        z
    }
}

fn build_matrices(
    n: usize,
    coords: &[(i64, i64)],
    service: &[i64],
    absent: &[(Vertex, Vertex)],
) -> (Vec<i64>, Vec<i64>, Vec<bool>) {
    let nv = n + 2;
    let mut cost = vec![0i64; nv * nv];
    let mut tau = vec![0i64; nv * nv];
    let mut present = vec![false; nv * nv];
    for i in 0..nv {
        for j in 0..nv {
            if i == j {
                continue;
            }
            // no arcs into the source or out of the sink, and none from
            // source straight to a depot other than the sink
            let from_ok = i != nv - 1;
            let into_ok = j != 0;
            if !(from_ok && into_ok) {
                continue;
            }
            if absent.contains(&(i, j)) {
                continue;
            }
            let dx = coords[i].0 - coords[j].0;
            let dy = coords[i].1 - coords[j].1;
            // one-decimal truncation: floor(10 * euclid) == isqrt of the
            // scaled squared distance, exact in integers
            let d = (dx * dx + dy * dy).isqrt();
            cost[i * nv + j] = d;
            tau[i * nv + j] = d + service[i];
            present[i * nv + j] = true;
        }
    }
    (cost, tau, present)
}

/// Parse a decimal literal into a ×10 integer, rejecting anything finer than
/// one decimal place.
fn parse_scaled(tok: &str, line: usize) -> Result<i64, InstanceError> {
    let err = |msg: String| InstanceError::Parse { line, msg };
    let (sign, rest) = match tok.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, tok),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((a, b)) => (a, b.trim_end_matches('0')),
        None => (rest, ""),
    };
    if frac_part.len() > 1 {
        return Err(err(format!(
            "value '{tok}' has more than one decimal place"
        )));
    }
    let int: i64 = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| err(format!("expected a number, found '{tok}'")))?
    };
    let frac: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part
            .parse()
            .map_err(|_| err(format!("expected a number, found '{tok}'")))?
    };
    Ok(sign * (int * SCALE + frac))
}

/// Parse a Solomon-format instance.
///
/// Distances are Euclidean, truncated to one decimal and stored ×10;
/// `tau_ij = distance_ij + service_i` and `cost_ij = distance_ij`.
pub fn parse_solomon(text: &str) -> Result<VrptwInstance, InstanceError> {
    let err = |line: usize, msg: &str| InstanceError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate();

    let mut name = None;
    for (i, raw) in &mut lines {
        let t = raw.trim();
        if !t.is_empty() {
            name = Some((i, t.to_string()));
            break;
        }
    }
    let (name_line, name) = name.ok_or_else(|| err(1, "empty file"))?;

    // VEHICLE section: header line, column names, then NUMBER / CAPACITY
    let mut vehicle = None;
    for (i, raw) in &mut lines {
        if raw.trim().eq_ignore_ascii_case("VEHICLE") {
            vehicle = Some(i);
            break;
        }
    }
    let vehicle_at = vehicle.ok_or_else(|| err(name_line + 1, "missing VEHICLE section"))?;
    let mut fleet = None;
    for (i, raw) in &mut lines {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() || toks[0].eq_ignore_ascii_case("NUMBER") {
            continue;
        }
        if toks.len() < 2 {
            return Err(err(i + 1, "expected NUMBER and CAPACITY values"));
        }
        let k: usize = toks[0]
            .parse()
            .map_err(|_| err(i + 1, "vehicle count is not an integer"))?;
        let c = parse_scaled(toks[1], i + 1)? / SCALE;
        fleet = Some((i, k, c));
        break;
    }
    let (fleet_line, vehicles, capacity) =
        fleet.ok_or_else(|| err(vehicle_at + 1, "missing NUMBER/CAPACITY line"))?;
    if capacity <= 0 {
        return Err(err(fleet_line + 1, "zero capacity"));
    }

    let mut customer_at = None;
    for (i, raw) in &mut lines {
        if raw.trim().eq_ignore_ascii_case("CUSTOMER") {
            customer_at = Some(i);
            break;
        }
    }
    let customer_at = customer_at.ok_or_else(|| err(fleet_line + 1, "missing CUSTOMER section"))?;

    // rows: CUST NO., XCOORD., YCOORD., DEMAND, READY TIME, DUE DATE, SERVICE TIME
    let mut rows: Vec<(usize, [i64; 7])> = Vec::new();
    for (i, raw) in &mut lines {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0].chars().next().is_some_and(|c| !c.is_ascii_digit()) {
            continue; // column header
        }
        if toks.len() < 7 {
            return Err(err(i + 1, "customer row has fewer than 7 columns"));
        }
        let mut vals = [0i64; 7];
        for (k, tok) in toks[..7].iter().enumerate() {
            vals[k] = parse_scaled(tok, i + 1)?;
        }
        rows.push((i, vals));
    }
    if rows.len() < 2 {
        return Err(err(customer_at + 1, "fewer than 1 customer"));
    }

    let n = rows.len() - 1;
    let nv = n + 2;
    let mut coords = Vec::with_capacity(nv);
    let mut demand = Vec::with_capacity(nv);
    let mut ready = Vec::with_capacity(nv);
    let mut due = Vec::with_capacity(nv);
    let mut service = Vec::with_capacity(nv);
    for (line, v) in &rows {
        let [_, x, y, d, e, l, s] = *v;
        if d % SCALE != 0 {
            return Err(err(line + 1, "fractional demand"));
        }
        coords.push((x, y));
        demand.push(d / SCALE);
        ready.push(e);
        due.push(l);
        service.push(s);
    }
    // depot row copied into source and sink, demand 0 and window [E, L]
    coords.push(coords[0]);
    demand.push(0);
    ready.push(ready[0]);
    due.push(due[0]);
    service.push(0);
    demand[0] = 0;
    service[0] = 0;

    let (cost, tau, present) = build_matrices(n, &coords, &service, &[]);
    Ok(VrptwInstance {
        name,
        n,
        vehicles,
        capacity,
        coords,
        demand,
        ready,
        due,
        service,
        cost,
        tau,
        present,
    })
}

/// Emit the Solomon layout back out; `parse_solomon` of the result gives the
/// identical instance.
pub fn serialize_solomon(inst: &VrptwInstance) -> String {
    fn dec(v: i64) -> String {
        if v % SCALE == 0 {
            format!("{}", v / SCALE)
        } else {
            format!("{}.{}", v / SCALE, (v % SCALE).abs())
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}\n", inst.name);
    let _ = writeln!(out, "VEHICLE\nNUMBER     CAPACITY");
    let _ = writeln!(out, "  {}         {}\n", inst.vehicles, inst.capacity);
    let _ = writeln!(out, "CUSTOMER");
    let _ = writeln!(
        out,
        "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n"
    );
    for v in 0..=inst.n {
        let _ = writeln!(
            out,
            "{:>5} {:>9} {:>10} {:>10} {:>12} {:>9} {:>10}",
            v,
            dec(inst.coords[v].0),
            dec(inst.coords[v].1),
            inst.demand[v],
            dec(inst.ready[v]),
            dec(inst.due[v]),
            dec(inst.service[v]),
        );
    }
    out
}

/// Keep the first `n` customers in file order; depot and fleet unchanged.
pub fn subset(inst: &VrptwInstance, n: usize) -> Result<VrptwInstance, InstanceError> {
    if n > inst.n {
        return Err(InstanceError::SubsetRange {
            requested: n,
            available: inst.n,
        });
    }
    if n == inst.n {
        return Ok(inst.clone());
    }
    let keep: Vec<Vertex> = (0..=n).chain([inst.sink()]).collect();
    let coords: Vec<_> = keep.iter().map(|&v| inst.coords[v]).collect();
    let demand: Vec<_> = keep.iter().map(|&v| inst.demand[v]).collect();
    let ready: Vec<_> = keep.iter().map(|&v| inst.ready[v]).collect();
    let due: Vec<_> = keep.iter().map(|&v| inst.due[v]).collect();
    let service: Vec<_> = keep.iter().map(|&v| inst.service[v]).collect();
    let (cost, tau, present) = build_matrices(n, &coords, &service, &[]);
    Ok(VrptwInstance {
        name: format!("{}-{}", inst.name, n),
        n,
        vehicles: inst.vehicles,
        capacity: inst.capacity,
        coords,
        demand,
        ready,
        due,
        service,
        cost,
        tau,
        present,
    })
}

/// The three-customer micro-instance: K = 2, C = 3, unit demands, symmetric
/// costs equal to travel times and no arc between customers 1 and 3.
pub fn builtin_example() -> VrptwInstance {
    let n = 3;
    let nv = n + 2;
    let coords = vec![(0, 0); nv];
    let demand = vec![0, 1, 1, 1, 0];
    let ready = vec![0, 50, 250, 50, 0];
    let due = vec![600, 400, 500, 400, 600];
    let service = vec![0; nv];
    let mut cost = vec![0i64; nv * nv];
    let mut present = vec![false; nv * nv];
    let mut set = |i: usize, j: usize, c: i64| {
        cost[i * nv + j] = c;
        present[i * nv + j] = true;
    };
    // vertex 0 of the figure is both depot copies: depot arcs split into
    // source -> customer and customer -> sink
    for (c, w) in [(1, 50), (2, 100), (3, 50)] {
        set(0, c, w);
        set(c, n + 1, w);
    }
    for (a, b, w) in [(1, 2, 100), (2, 3, 100)] {
        set(a, b, w);
        set(b, a, w);
    }
    set(0, n + 1, 0); // empty route
    let tau = cost.clone();
    VrptwInstance {
        name: "example".into(),
        n,
        vehicles: 2,
        capacity: 3,
        coords,
        demand,
        ready,
        due,
        service,
        cost,
        tau,
        present,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_distance_truncates_exactly() {
        let coords = vec![(0, 0), (30, 40), (0, 0)];
        let service = vec![0, 0, 0];
        let (cost, tau, present) = build_matrices(1, &coords, &service, &[]);
        assert!(present[1]); // 0 -> 1
        assert_eq!(cost[1], 50);
        assert_eq!(tau[1], 50);
    }

    #[test]
    fn truncation_is_idempotent() {
        // already-truncated squared distances hit exact integers
        for d in [0i64, 1, 7, 50, 123, 999] {
            assert_eq!((d * d).isqrt(), d);
        }
    }

    #[test]
    fn builtin_example_matches_figure() {
        let inst = builtin_example();
        assert_eq!(inst.vehicles, 2);
        assert_eq!(inst.capacity, 3);
        assert_eq!((inst.ready[2], inst.due[2]), (250, 500));
        assert_eq!(inst.cost(0, 1), 50);
        assert_eq!(inst.cost(0, 2), 100);
        assert_eq!(inst.cost(1, 2), 100);
        assert!(!inst.has_arc(1, 3));
        assert!(!inst.has_arc(3, 1));
        assert!(inst.has_arc(3, 4)); // customer 3 -> sink
        assert_eq!(inst.cost(3, 4), 50);
        for i in inst.customers() {
            assert_eq!(inst.demand[i], 1);
        }
        assert_eq!(inst.demand[0], 0);
        assert_eq!(inst.demand[4], 0);
    }

    #[test]
    fn parse_depot_copies() {
        let text = "toy\n\nVEHICLE\nNUMBER     CAPACITY\n  2         10\n\nCUSTOMER\nCUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n\n 0 0 0 0 0 100 0\n 1 3 4 5 0 90 2\n";
        let inst = parse_solomon(text).unwrap();
        assert_eq!(inst.n, 1);
        assert_eq!(inst.demand[0], 0);
        assert_eq!(inst.demand[2], 0);
        assert_eq!((inst.ready[2], inst.due[2]), (0, 1000));
        assert_eq!(inst.cost(0, 1), 50);
        assert_eq!(inst.tau(1, 2), 50 + 20); // distance + service at 1
    }

    #[test]
    fn parse_errors_name_lines() {
        let text = "toy\n\nVEHICLE\nNUMBER     CAPACITY\n  2         x\n";
        match parse_solomon(text) {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        let zero_cap = "toy\n\nVEHICLE\nNUMBER     CAPACITY\n  2         0\n";
        assert!(matches!(
            parse_solomon(zero_cap),
            Err(InstanceError::Parse { line: 5, .. })
        ));
        let no_customers = "toy\n\nVEHICLE\nNUMBER CAPACITY\n 2 10\n\nCUSTOMER\nCUST NO. X\n\n 0 0 0 0 0 100 0\n";
        assert!(parse_solomon(no_customers).is_err());
    }

    #[test]
    fn roundtrip_through_serializer() {
        let text = "toy\n\nVEHICLE\nNUMBER     CAPACITY\n  2         10\n\nCUSTOMER\nCUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n\n 0 0 0 0 0 100 0\n 1 3 4 5 0 90 2\n 2 1 1 3 5 80 1\n";
        let a = parse_solomon(text).unwrap();
        let b = parse_solomon(&serialize_solomon(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subset_keeps_prefix() {
        let text = "toy\n\nVEHICLE\nNUMBER     CAPACITY\n  2         10\n\nCUSTOMER\nCUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n\n 0 0 0 0 0 100 0\n 1 3 4 5 0 90 2\n 2 1 1 3 5 80 1\n";
        let a = parse_solomon(text).unwrap();
        let s = subset(&a, 1).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(s.num_vertices(), 3);
        assert_eq!(s.vehicles, a.vehicles);
        assert_eq!(s.demand[1], 5);
        let full = subset(&a, 2).unwrap();
        assert_eq!(full.n, a.n);
        assert!(matches!(
            subset(&a, 3),
            Err(InstanceError::SubsetRange { .. })
        ));
    }
}
