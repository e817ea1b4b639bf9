//! Dynamic LP engine for the restricted masters.
//!
//! A dense revised simplex over columns with bounds `[0, +inf)`: columns and
//! rows can be appended between solves and the basis carries over, so the
//! column-generation loops re-solve in a handful of pivots. The basis inverse
//! is held explicitly and refactorized periodically; every row starts out
//! covered by a big-M artificial, and a solution reporting `Optimal` has all
//! artificials at zero.

const BIG: f64 = 1e7;
const DJ_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const DEGEN_EPS: f64 = 1e-12;
const BLAND_AFTER: u32 = 1000;
const REFACTOR_EVERY: u32 = 256;
const MAX_PIVOTS: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("numerical failure: no simplex progress after {pivots} pivots")]
    NumericalFailure { pivots: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    /// Structural column.
    Col(usize),
    /// Slack (Le) or surplus (Ge) of a row.
    Logical(usize),
    /// Big-M artificial of a row; `true` flags negative orientation.
    Artificial(usize, bool),
}

struct Column {
    cost: f64,
    entries: Vec<(usize, f64)>,
    alive: bool,
}

struct Row {
    sense: Sense,
    rhs: f64,
}

/// One dynamically growing minimization LP. Confined to a single thread.
pub struct LinearProgram {
    cols: Vec<Column>,
    rows: Vec<Row>,
    basis: Vec<Var>,
    in_basis_col: Vec<bool>,
    in_basis_logical: Vec<bool>,
    /// Dense row-major basis inverse, valid when `factored`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    factored: bool,
    solved: bool,
    primal: Vec<f64>,
    duals: Vec<f64>,
    objective: f64,
    pub pivots_total: u64,
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram {
            cols: Vec::new(),
            rows: Vec::new(),
            basis: Vec::new(),
            in_basis_col: Vec::new(),
            in_basis_logical: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            factored: false,
            solved: false,
            primal: Vec::new(),
            duals: Vec::new(),
            objective: 0.0,
            pivots_total: 0,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.iter().filter(|c| c.alive).count()
    }

    /// Append a column; entries must reference existing rows.
    pub fn add_column(&mut self, cost: f64, entries: &[(RowId, f64)]) -> ColId {
        let m = self.rows.len();
        for &(RowId(r), _) in entries {
            assert!(r < m, "add_column: unknown row id {r}");
        }
        let id = ColId(self.cols.len());
        self.cols.push(Column {
            cost,
            entries: entries.iter().map(|&(RowId(r), a)| (r, a)).collect(),
            alive: true,
        });
        self.in_basis_col.push(false);
        self.solved = false;
        id
    }

    /// Append a row; entries may reference existing columns. The basis is
    /// extended with the row's logical or an artificial, so prior work keeps.
    pub fn add_row(&mut self, sense: Sense, rhs: f64, entries: &[(ColId, f64)]) -> RowId {
        for &(ColId(c), _) in entries {
            assert!(c < self.cols.len(), "add_row: unknown column id {c}");
        }
        let r = self.rows.len();
        self.rows.push(Row { sense, rhs });
        self.in_basis_logical.push(false);
        for &(ColId(c), a) in entries {
            self.cols[c].entries.push((r, a));
        }
        if self.factored {
            self.extend_basis_with_row(r, entries);
        }
        self.solved = false;
        RowId(r)
    }

    /// Drop columns; a shrunken LP restarts cold on the next solve.
    pub fn drop_columns(&mut self, ids: &[ColId]) {
        for &ColId(c) in ids {
            assert!(c < self.cols.len(), "drop_columns: unknown column id {c}");
            self.cols[c].alive = false;
        }
        if !ids.is_empty() {
            self.factored = false;
            self.solved = false;
        }
    }

    pub fn primal_value(&self, ColId(c): ColId) -> f64 {
        assert!(self.solved, "primal_value before solve");
        self.primal[c]
    }

    pub fn dual_value(&self, RowId(r): RowId) -> f64 {
        assert!(self.solved, "dual_value before solve");
        self.duals[r]
    }

    pub fn objective(&self) -> f64 {
        assert!(self.solved, "objective before solve");
        self.objective
    }

    /// Plain-text dump of the LP for oracle cross-checks.
    pub fn debug_dump(&self) -> String {
        use std::fmt::Write as _;
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rows.len()];
        for (j, c) in self.cols.iter().enumerate() {
            if !c.alive {
                continue;
            }
            for &(r, a) in &c.entries {
                if a != 0.0 {
                    by_row[r].push((j, a));
                }
            }
        }
        let mut s = String::from("min\n");
        for (j, c) in self.cols.iter().enumerate() {
            if c.alive {
                let _ = writeln!(s, "  x{j} cost {}", c.cost);
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let terms: Vec<String> = by_row[r]
                .iter()
                .map(|(j, a)| format!("{a}*x{j}"))
                .collect();
            let _ = writeln!(s, "  r{r}: {} {op} {}", terms.join(" + "), row.rhs);
        }
        s
    }

    fn var_cost(&self, v: Var) -> f64 {
        match v {
            Var::Col(c) => self.cols[c].cost,
            Var::Logical(_) => 0.0,
            Var::Artificial(..) => BIG,
        }
    }

    fn logical_coeff(&self, r: usize) -> f64 {
        match self.rows[r].sense {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => unreachable!("equality rows have no logical"),
        }
    }

    /// Dense column of a variable in row space.
    fn var_column(&self, v: Var, out: &mut [f64]) {
        out.fill(0.0);
        match v {
            Var::Col(c) => {
                for &(r, a) in &self.cols[c].entries {
                    out[r] += a;
                }
            }
            Var::Logical(r) => out[r] = self.logical_coeff(r),
            Var::Artificial(r, neg) => out[r] = if neg { -1.0 } else { 1.0 },
        }
    }

    fn set_in_basis(&mut self, v: Var, val: bool) {
        match v {
            Var::Col(c) => self.in_basis_col[c] = val,
            Var::Logical(r) => self.in_basis_logical[r] = val,
            Var::Artificial(..) => {}
        }
    }

    /// Grow the factorization by one row whose basic variable is fresh.
    fn extend_basis_with_row(&mut self, r: usize, entries: &[(ColId, f64)]) {
        let m = r; // old dimension
        debug_assert_eq!(self.basis.len(), m);
        let mut activity = 0.0;
        for &(ColId(c), a) in entries {
            if self.cols[c].alive {
                activity += a * self.basic_col_value(c);
            }
        }
        let residual = self.rows[r].rhs - activity;
        let (var, value) = self.pick_cover_var(r, residual);
        let s = match var {
            Var::Logical(rr) => self.logical_coeff(rr),
            Var::Artificial(_, neg) => {
                if neg {
                    -1.0
                } else {
                    1.0
                }
            }
            Var::Col(_) => unreachable!(),
        };
        // B_new^{-1} = [[B^{-1}, 0], [-(aB B^{-1})/s, 1/s]]
        let mut ab = vec![0.0; m];
        for (k, &bv) in self.basis.iter().enumerate() {
            if let Var::Col(c) = bv {
                for &(rr, a) in &self.cols[c].entries {
                    if rr == r {
                        ab[k] += a;
                    }
                }
            }
        }
        let nm = m + 1;
        let mut nb = vec![0.0; nm * nm];
        for i in 0..m {
            nb[i * nm..i * nm + m].copy_from_slice(&self.binv[i * m..i * m + m]);
        }
        for j in 0..m {
            let mut acc = 0.0;
            for (k, &abk) in ab.iter().enumerate() {
                if abk != 0.0 {
                    acc += abk * self.binv[k * m + j];
                }
            }
            nb[m * nm + j] = -acc / s;
        }
        nb[m * nm + m] = 1.0 / s;
        self.binv = nb;
        self.set_in_basis(var, true);
        self.basis.push(var);
        self.xb.push(value);
    }

    /// Value of a structural column in the currently factored basis.
    fn basic_col_value(&self, c: usize) -> f64 {
        if !self.in_basis_col[c] {
            return 0.0;
        }
        self.basis
            .iter()
            .zip(&self.xb)
            .find_map(|(&bv, &x)| (bv == Var::Col(c)).then_some(x))
            .unwrap_or(0.0)
    }

    /// Basic variable that covers row `r` at a given residual.
    fn pick_cover_var(&self, r: usize, residual: f64) -> (Var, f64) {
        match self.rows[r].sense {
            Sense::Le if residual >= 0.0 => (Var::Logical(r), residual),
            Sense::Ge if residual <= 0.0 => (Var::Logical(r), -residual),
            _ => (Var::Artificial(r, residual < 0.0), residual.abs()),
        }
    }

    fn cold_start(&mut self) {
        let m = self.rows.len();
        self.in_basis_col.iter_mut().for_each(|b| *b = false);
        self.in_basis_logical.iter_mut().for_each(|b| *b = false);
        self.basis.clear();
        self.xb.clear();
        self.binv = vec![0.0; m * m];
        for r in 0..m {
            let (v, x) = self.pick_cover_var(r, self.rows[r].rhs);
            let s = match v {
                Var::Logical(rr) => self.logical_coeff(rr),
                Var::Artificial(_, neg) => {
                    if neg {
                        -1.0
                    } else {
                        1.0
                    }
                }
                Var::Col(_) => unreachable!(),
            };
            self.set_in_basis(v, true);
            self.basis.push(v);
            self.xb.push(x);
            self.binv[r * m + r] = 1.0 / s;
        }
        self.factored = true;
    }

    /// Rebuild the inverse from the basis columns; false when singular.
    fn refactor(&mut self) -> bool {
        let m = self.rows.len();
        let mut mat = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &bv) in self.basis.iter().enumerate() {
            self.var_column(bv, &mut col);
            for i in 0..m {
                mat[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let mut piv = k;
            let mut best = mat[k * m + k].abs();
            for i in k + 1..m {
                let v = mat[i * m + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-11 {
                return false;
            }
            if piv != k {
                for j in 0..m {
                    mat.swap(piv * m + j, k * m + j);
                    inv.swap(piv * m + j, k * m + j);
                }
            }
            let d = mat[k * m + k];
            for j in 0..m {
                mat[k * m + j] /= d;
                inv[k * m + j] /= d;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = mat[i * m + k];
                if f != 0.0 {
                    for j in 0..m {
                        mat[i * m + j] -= f * mat[k * m + j];
                        inv[i * m + j] -= f * inv[k * m + j];
                    }
                }
            }
        }
        self.binv = inv;
        self.recompute_xb();
        true
    }

    fn recompute_xb(&mut self) {
        let m = self.rows.len();
        for i in 0..m {
            let mut acc = 0.0;
            for r in 0..m {
                acc += self.binv[i * m + r] * self.rows[r].rhs;
            }
            self.xb[i] = acc;
        }
    }

    fn compute_duals(&self) -> Vec<f64> {
        let m = self.rows.len();
        let mut y = vec![0.0; m];
        for (k, &bv) in self.basis.iter().enumerate() {
            let c = self.var_cost(bv);
            if c != 0.0 {
                for r in 0..m {
                    y[r] += c * self.binv[k * m + r];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, v: Var, y: &[f64]) -> f64 {
        let mut d = self.var_cost(v);
        match v {
            Var::Col(c) => {
                for &(r, a) in &self.cols[c].entries {
                    d -= y[r] * a;
                }
            }
            Var::Logical(r) => d -= y[r] * self.logical_coeff(r),
            Var::Artificial(r, neg) => d -= if neg { -y[r] } else { y[r] },
        }
        d
    }

    /// Solve to optimality, warm-starting from the previous basis when the
    /// LP only grew since the last call.
    pub fn solve(&mut self) -> Result<Status, LpError> {
        let m = self.rows.len();
        assert!(
            m > 0 && self.num_cols() > 0,
            "solve: LP needs at least one row and one column"
        );
        if !self.factored {
            self.cold_start();
        }
        let mut degenerate_run: u32 = 0;
        let mut bland = false;
        let mut since_refactor: u32 = 0;
        let mut pivots: u64 = 0;
        let mut col_buf = vec![0.0; m];
        let mut w = vec![0.0; m];
        let mut cold_retries = 0;

        let status = loop {
            if pivots > MAX_PIVOTS {
                return Err(LpError::NumericalFailure { pivots });
            }
            let y = self.compute_duals();
            let mut enter: Option<(Var, f64)> = None;
            for (c, colm) in self.cols.iter().enumerate() {
                if !colm.alive || self.in_basis_col[c] {
                    continue;
                }
                let v = Var::Col(c);
                let d = self.reduced_cost(v, &y);
                if d < -DJ_TOL && pick_entering(&mut enter, v, d, bland) && bland {
                    break;
                }
            }
            if !(bland && enter.is_some()) {
                for r in 0..m {
                    if self.rows[r].sense == Sense::Eq || self.in_basis_logical[r] {
                        continue;
                    }
                    let v = Var::Logical(r);
                    let d = self.reduced_cost(v, &y);
                    if d < -DJ_TOL {
                        pick_entering(&mut enter, v, d, bland);
                    }
                }
            }
            let Some((entering, _)) = enter else {
                let art_level: f64 = self
                    .basis
                    .iter()
                    .zip(&self.xb)
                    .filter(|(bv, _)| matches!(bv, Var::Artificial(..)))
                    .map(|(_, &x)| x.abs())
                    .fold(0.0, f64::max);
                break if art_level > 1e-7 {
                    Status::Infeasible
                } else {
                    Status::Optimal
                };
            };

            self.var_column(entering, &mut col_buf);
            for i in 0..m {
                let mut acc = 0.0;
                for r in 0..m {
                    acc += self.binv[i * m + r] * col_buf[r];
                }
                w[i] = acc;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if w[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / w[i];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-12
                                || (ratio < lr + 1e-12 && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((li, step)) = leave else {
                break Status::Unbounded;
            };

            if step < DEGEN_EPS {
                degenerate_run += 1;
                if degenerate_run > BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            let piv = w[li];
            for i in 0..m {
                if i != li {
                    self.xb[i] -= w[i] * step;
                }
            }
            self.xb[li] = step;
            let (head, tail) = self.binv.split_at_mut(li * m);
            let (prow, rest) = tail.split_at_mut(m);
            for v in prow.iter_mut() {
                *v /= piv;
            }
            for (i, chunk) in head.chunks_mut(m).enumerate() {
                let f = w[i];
                if f != 0.0 {
                    for (a, &p) in chunk.iter_mut().zip(prow.iter()) {
                        *a -= f * p;
                    }
                }
            }
            for (ii, chunk) in rest.chunks_mut(m).enumerate() {
                let f = w[li + 1 + ii];
                if f != 0.0 {
                    for (a, &p) in chunk.iter_mut().zip(prow.iter()) {
                        *a -= f * p;
                    }
                }
            }
            self.set_in_basis(self.basis[li], false);
            self.set_in_basis(entering, true);
            self.basis[li] = entering;
            pivots += 1;
            self.pivots_total += 1;
            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                since_refactor = 0;
                if !self.refactor() {
                    if cold_retries > 0 {
                        return Err(LpError::NumericalFailure { pivots });
                    }
                    cold_retries += 1;
                    self.cold_start();
                }
            }
        };

        if status == Status::Optimal {
            if !self.refactor() {
                if cold_retries > 0 {
                    return Err(LpError::NumericalFailure { pivots });
                }
                self.cold_start();
                return self.solve();
            }
            if self.primal_residual() > FEAS_TOL {
                return Err(LpError::NumericalFailure { pivots });
            }
        }

        self.primal = vec![0.0; self.cols.len()];
        for (k, &bv) in self.basis.iter().enumerate() {
            if let Var::Col(c) = bv {
                self.primal[c] = self.xb[k];
            }
        }
        self.duals = self.compute_duals();
        self.objective = self
            .basis
            .iter()
            .zip(&self.xb)
            .map(|(&bv, &x)| self.var_cost(bv) * x)
            .sum();
        self.solved = true;
        Ok(status)
    }

    fn primal_residual(&self) -> f64 {
        let m = self.rows.len();
        let mut act = vec![0.0; m];
        let mut col = vec![0.0; m];
        for (k, &bv) in self.basis.iter().enumerate() {
            self.var_column(bv, &mut col);
            for r in 0..m {
                act[r] += col[r] * self.xb[k];
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..m {
            worst = worst.max((act[r] - self.rows[r].rhs).abs());
        }
        for &x in &self.xb {
            worst = worst.max(-x);
        }
        worst
    }
}

/// Entering-variable choice: Dantzig by default, Bland when anti-cycling.
/// Ties break to the lowest variable ordinal. Returns whether `cand` won.
fn pick_entering(enter: &mut Option<(Var, f64)>, v: Var, d: f64, bland: bool) -> bool {
    let better = match (bland, enter.as_ref()) {
        (_, None) => true,
        (true, Some((bv, _))) => v < *bv,
        (false, Some((bv, bd))) => d < *bd - 1e-12 || (d < *bd + 1e-12 && v < *bv),
    };
    if better {
        *enter = Some((v, d));
    }
    better
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_lp() {
        // min x s.t. x >= 1
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Sense::Ge, 1.0, &[]);
        let x = lp.add_column(1.0, &[(r, 1.0)]);
        assert_eq!(lp.solve().unwrap(), Status::Optimal);
        assert!((lp.objective() - 1.0).abs() < 1e-9);
        assert!((lp.primal_value(x) - 1.0).abs() < 1e-9);
        assert!((lp.dual_value(r) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_assignment_duals() {
        // min 10 l1 + 10 l2 s.t. l1 = 1, l2 = 1
        let mut lp = LinearProgram::new();
        let r1 = lp.add_row(Sense::Eq, 1.0, &[]);
        let r2 = lp.add_row(Sense::Eq, 1.0, &[]);
        lp.add_column(10.0, &[(r1, 1.0)]);
        lp.add_column(10.0, &[(r2, 1.0)]);
        assert_eq!(lp.solve().unwrap(), Status::Optimal);
        assert!((lp.objective() - 20.0).abs() < 1e-9);
        assert!((lp.dual_value(r1) - 10.0).abs() < 1e-9);
        assert!((lp.dual_value(r2) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn adding_column_never_increases_objective() {
        let mut lp = LinearProgram::new();
        let r1 = lp.add_row(Sense::Eq, 1.0, &[]);
        let r2 = lp.add_row(Sense::Eq, 1.0, &[]);
        lp.add_column(5.0, &[(r1, 1.0)]);
        lp.add_column(7.0, &[(r2, 1.0)]);
        lp.solve().unwrap();
        let before = lp.objective();
        lp.add_column(9.0, &[(r1, 1.0), (r2, 1.0)]);
        lp.solve().unwrap();
        assert!(lp.objective() <= before + 1e-9);
        assert!((lp.objective() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn dropping_last_cover_of_equality_is_infeasible() {
        let mut lp = LinearProgram::new();
        let r1 = lp.add_row(Sense::Eq, 1.0, &[]);
        let c = lp.add_column(1.0, &[(r1, 1.0)]);
        lp.solve().unwrap();
        lp.drop_columns(&[c]);
        lp.add_column(1.0, &[]); // keep >= 1 column so solve() is legal
        assert_eq!(lp.solve().unwrap(), Status::Infeasible);
    }

    #[test]
    fn row_added_after_columns_warm_starts() {
        let mut lp = LinearProgram::new();
        let r1 = lp.add_row(Sense::Eq, 1.0, &[]);
        let a = lp.add_column(1.0, &[(r1, 1.0)]);
        let b = lp.add_column(2.0, &[(r1, 1.0)]);
        lp.solve().unwrap();
        assert!((lp.objective() - 1.0).abs() < 1e-9);
        // new >= row satisfied only by the expensive column
        let r2 = lp.add_row(Sense::Ge, 1.0, &[(b, 1.0)]);
        lp.solve().unwrap();
        assert!((lp.objective() - 2.0).abs() < 1e-9);
        assert!((lp.primal_value(b) - 1.0).abs() < 1e-9);
        assert!(lp.primal_value(a).abs() < 1e-9);
        assert!(lp.dual_value(r2) >= -1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Sense::Le, 5.0, &[]);
        lp.add_column(-1.0, &[(r, -1.0)]);
        assert_eq!(lp.solve().unwrap(), Status::Unbounded);
    }

    #[test]
    fn duals_price_basic_columns_to_zero() {
        let mut lp = LinearProgram::new();
        let rows: Vec<RowId> = (0..4).map(|_| lp.add_row(Sense::Eq, 1.0, &[])).collect();
        let mut cols = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            cols.push((lp.add_column(1.0 + k as f64, &[(r, 1.0)]), 1.0 + k as f64));
        }
        lp.add_column(3.5, &[(rows[0], 1.0), (rows[2], 1.0)]);
        lp.solve().unwrap();
        for (k, &(c, cost)) in cols.iter().enumerate() {
            if lp.primal_value(c) > 1e-9 {
                let d = cost - lp.dual_value(rows[k]);
                assert!(d.abs() < 1e-7, "basic column not priced to zero: {d}");
            }
        }
    }

    #[test]
    fn le_duals_are_nonpositive_and_ge_nonnegative() {
        // min x + y s.t. x + y >= 2, x <= 5
        let mut lp = LinearProgram::new();
        let ge = lp.add_row(Sense::Ge, 2.0, &[]);
        let le = lp.add_row(Sense::Le, 5.0, &[]);
        lp.add_column(1.0, &[(ge, 1.0), (le, 1.0)]);
        lp.add_column(1.0, &[(ge, 1.0)]);
        lp.solve().unwrap();
        assert!((lp.objective() - 2.0).abs() < 1e-9);
        assert!(lp.dual_value(ge) >= -1e-9);
        assert!(lp.dual_value(le) <= 1e-9);
    }
}
