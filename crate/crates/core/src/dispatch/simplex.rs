//! Bounded-variable primal simplex over a dense basis inverse.
//!
//! Two phases with artificial variables, a singleton crash basis, Dantzig
//! pricing with lowest-index tie-breaks, and a switch to Bland's rule when
//! the objective stalls so the method cannot cycle. Everything is sequential
//! and tie-broken by variable index, so identical inputs yield identical
//! pivots and solutions.

// Dense indexed linear algebra reads better as explicit range loops.
#![allow(clippy::needless_range_loop)]

pub const DEFAULT_OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-8;
const STALL_LIMIT: usize = 40;
const REFACTOR_EVERY: usize = 256;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_rows: usize,
    /// Sparse columns: (row, coefficient).
    pub cols: Vec<Vec<(usize, f64)>>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Reduced-cost tolerance for optimality.
    pub opt_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { opt_tol: DEFAULT_OPT_TOL, max_iterations: 500_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest reduced-cost violation at termination (optimality certificate).
    pub max_dual_infeasibility: f64,
    /// Largest `|Ax - b|` residual at termination.
    pub max_primal_residual: f64,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SimplexError {
    #[error("infeasible: no point satisfies rows {rows:?}")]
    Infeasible { rows: Vec<usize> },
    #[error("objective unbounded below")]
    Unbounded,
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("singular basis")]
    SingularBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Solver {
    m: usize,
    n_structural: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    iterations: usize,
    bland: bool,
    stall: usize,
    opts: SolverOptions,
    feas_tol: f64,
}

pub fn solve(lp: &LinearProgram, opts: SolverOptions) -> Result<Solution, SimplexError> {
    let mut solver = Solver::new(lp, opts);
    solver.phase1()?;
    solver.phase2(lp)
}

impl Solver {
    fn new(lp: &LinearProgram, opts: SolverOptions) -> Self {
        let m = lp.num_rows;
        let n = lp.cols.len();
        let scale = lp
            .rhs
            .iter()
            .chain(lp.upper.iter().filter(|u| u.is_finite()))
            .chain(lp.lower.iter())
            .fold(1.0f64, |acc, v| acc.max(v.abs()));
        let feas_tol = 1e-9 * scale;

        let mut cols = lp.cols.clone();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x: Vec<f64> = (0..n)
            .map(|j| if lp.lower[j].is_finite() { lp.lower[j] } else { 0.0 })
            .collect();
        let mut status = vec![VarStatus::AtLower; n];

        // Row residuals with every structural variable at its lower bound.
        let mut residual = lp.rhs.clone();
        for (j, col) in lp.cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(r, a) in col {
                    residual[r] -= a * x[j];
                }
            }
        }

        // Singleton crash: a structural column that can absorb the whole
        // residual of its row starts basic (free slacks, curtailment).
        let mut basis = vec![usize::MAX; m];
        for (j, col) in lp.cols.iter().enumerate() {
            if col.len() != 1 {
                continue;
            }
            let (r, a) = col[0];
            if basis[r] != usize::MAX || a.abs() < PIVOT_TOL {
                continue;
            }
            let value = x[j] + residual[r] / a;
            if value >= lower[j] - feas_tol && value <= upper[j] + feas_tol {
                basis[r] = j;
                status[j] = VarStatus::Basic(r);
                x[j] = value;
                residual[r] = 0.0;
            }
        }

        // Artificials for the remaining rows.
        let mut cost = vec![0.0; n];
        for r in 0..m {
            if basis[r] != usize::MAX {
                continue;
            }
            let sign = if residual[r] >= 0.0 { 1.0 } else { -1.0 };
            let j = cols.len();
            cols.push(vec![(r, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            cost.push(1.0);
            x.push(residual[r].abs());
            status.push(VarStatus::Basic(r));
            basis[r] = j;
        }

        let mut solver = Solver {
            m,
            n_structural: n,
            cols,
            lower,
            upper,
            rhs: lp.rhs.clone(),
            cost,
            status,
            basis,
            x,
            binv: vec![0.0; m * m],
            iterations: 0,
            bland: false,
            stall: 0,
            opts,
            feas_tol,
        };
        solver.refactor().expect("crash basis is nonsingular");
        solver
    }

    fn phase1(&mut self) -> Result<(), SimplexError> {
        let feasible_now = self.objective_value() <= self.feas_tol;
        if !feasible_now {
            self.bland = false;
            self.stall = 0;
            self.run_simplex()?;
            if self.objective_value() > self.feas_tol.max(1e-7) {
                let rows = (0..self.m)
                    .filter(|&r| self.basis[r] >= self.n_structural && self.x[self.basis[r]] > self.feas_tol)
                    .collect();
                return Err(SimplexError::Infeasible { rows });
            }
            self.drive_out_artificials();
        }
        for j in self.n_structural..self.cols.len() {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
        }
        Ok(())
    }

    fn phase2(&mut self, lp: &LinearProgram) -> Result<Solution, SimplexError> {
        self.cost[..self.n_structural].copy_from_slice(&lp.objective);
        for c in &mut self.cost[self.n_structural..] {
            *c = 0.0;
        }
        self.bland = false;
        self.stall = 0;
        self.run_simplex()?;

        // Certify against a freshly refactorized basis; resume if the
        // certificate still finds an improving direction (numerical drift).
        for _ in 0..4 {
            self.refactor()?;
            if self.find_entering().is_none() {
                break;
            }
            self.run_simplex()?;
        }

        Ok(Solution {
            x: self.x[..self.n_structural].to_vec(),
            objective: self.objective_value(),
            iterations: self.iterations,
            max_dual_infeasibility: self.dual_infeasibility(),
            max_primal_residual: self.primal_residual(),
        })
    }

    fn objective_value(&self) -> f64 {
        self.x.iter().zip(&self.cost).map(|(x, c)| x * c).sum()
    }

    /// Pivots zero-valued basic artificials onto structural columns where a
    /// nonzero pivot exists; rows without one are redundant and keep their
    /// artificial pinned at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n_structural {
                continue;
            }
            let mut candidate = None;
            for j in 0..self.n_structural {
                if matches!(self.status[j], VarStatus::Basic(_)) {
                    continue;
                }
                let w_r: f64 = self.cols[j]
                    .iter()
                    .map(|&(row, a)| a * self.binv[r * self.m + row])
                    .sum();
                if w_r.abs() > 1e-7 {
                    candidate = Some(j);
                    break;
                }
            }
            if let Some(j) = candidate {
                let w = self.ftran(j);
                let leaving = self.basis[r];
                self.basis[r] = j;
                self.status[j] = VarStatus::Basic(r);
                self.status[leaving] = VarStatus::AtLower;
                self.x[leaving] = 0.0;
                self.update_binv(r, &w);
            }
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        for &(row, a) in &self.cols[j] {
            if a != 0.0 {
                for r in 0..self.m {
                    w[r] += a * self.binv[r * self.m + row];
                }
            }
        }
        w
    }

    fn dual_values(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for r in 0..self.m {
            let c_b = self.cost[self.basis[r]];
            if c_b != 0.0 {
                let row = &self.binv[r * self.m..(r + 1) * self.m];
                for (k, y_k) in y.iter_mut().enumerate() {
                    *y_k += c_b * row[k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(r, a)| a * y[r]).sum::<f64>()
    }

    fn find_entering(&self) -> Option<(usize, f64)> {
        let y = self.dual_values();
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols.len() {
            if self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = match self.status[j] {
                VarStatus::Basic(_) => continue,
                VarStatus::AtLower => {
                    let d = self.reduced_cost(j, &y);
                    if d >= -tol {
                        continue;
                    }
                    d
                }
                VarStatus::AtUpper => {
                    let d = self.reduced_cost(j, &y);
                    if d <= tol {
                        continue;
                    }
                    d
                }
            };
            if self.bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, b): (usize, f64)| d.abs() > b.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn run_simplex(&mut self) -> Result<(), SimplexError> {
        loop {
            let Some((entering, _)) = self.find_entering() else {
                return Ok(());
            };
            self.iterations += 1;
            if self.iterations > self.opts.max_iterations {
                return Err(SimplexError::IterationLimit(self.iterations));
            }
            if self.iterations.is_multiple_of(REFACTOR_EVERY) {
                self.refactor()?;
            }

            let dir = if self.status[entering] == VarStatus::AtLower { 1.0 } else { -1.0 };
            let w = self.ftran(entering);

            // Ratio test: the entering variable either reaches its opposite
            // bound or some basic variable reaches one of its bounds first.
            // Ties prefer a basis exchange with the lowest variable index.
            let own_range = self.upper[entering] - self.lower[entering];
            let mut limit = own_range;
            let mut leaving: Option<(usize, bool)> = None; // (row, leaves at upper)
            for r in 0..self.m {
                let rate = dir * w[r]; // basic value decreases at this rate
                let b = self.basis[r];
                let (room, to_upper) = if rate > PIVOT_TOL {
                    (((self.x[b] - self.lower[b]) / rate).max(0.0), false)
                } else if rate < -PIVOT_TOL && self.upper[b].is_finite() {
                    (((self.upper[b] - self.x[b]) / -rate).max(0.0), true)
                } else {
                    continue;
                };
                let tie_tol = 1e-10 * (1.0 + if limit.is_finite() { limit.abs() } else { 0.0 });
                let replace = match leaving {
                    _ if room < limit - tie_tol => true,
                    None => room <= limit + tie_tol,
                    Some((row0, _)) => room <= limit + tie_tol && b < self.basis[row0],
                };
                if replace {
                    limit = limit.min(room);
                    leaving = Some((r, to_upper));
                }
            }

            if limit.is_infinite() {
                return Err(SimplexError::Unbounded);
            }

            if limit <= self.feas_tol {
                self.stall += 1;
                if self.stall >= STALL_LIMIT {
                    self.bland = true;
                }
            } else {
                self.stall = 0;
            }

            match leaving {
                None => {
                    // Bound flip: no basis change.
                    for r in 0..self.m {
                        let b = self.basis[r];
                        self.x[b] -= dir * w[r] * own_range;
                    }
                    self.x[entering] = if dir > 0.0 { self.upper[entering] } else { self.lower[entering] };
                    self.status[entering] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                }
                Some((row, to_upper)) => {
                    for r in 0..self.m {
                        let b = self.basis[r];
                        self.x[b] -= dir * w[r] * limit;
                    }
                    let leaving_var = self.basis[row];
                    self.x[leaving_var] = if to_upper { self.upper[leaving_var] } else { self.lower[leaving_var] };
                    self.status[leaving_var] = if to_upper { VarStatus::AtUpper } else { VarStatus::AtLower };
                    let start = if dir > 0.0 { self.lower[entering] } else { self.upper[entering] };
                    self.x[entering] = start + dir * limit;
                    self.basis[row] = entering;
                    self.status[entering] = VarStatus::Basic(row);
                    self.update_binv(row, &w);
                }
            }
        }
    }

    fn update_binv(&mut self, pivot_row: usize, w: &[f64]) {
        let m = self.m;
        let inv_p = 1.0 / w[pivot_row];
        for k in 0..m {
            self.binv[pivot_row * m + k] *= inv_p;
        }
        for r in 0..m {
            if r == pivot_row {
                continue;
            }
            let factor = w[r];
            if factor != 0.0 {
                for k in 0..m {
                    self.binv[r * m + k] -= factor * self.binv[pivot_row * m + k];
                }
            }
        }
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting and recomputes the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), SimplexError> {
        let m = self.m;
        let width = 2 * m;
        let mut a = vec![0.0; m * width];
        for (position, &j) in self.basis.iter().enumerate() {
            for &(row, coef) in &self.cols[j] {
                a[row * width + position] = coef;
            }
        }
        for r in 0..m {
            a[r * width + m + r] = 1.0;
        }
        for col in 0..m {
            let mut pivot = col;
            let mut best = a[col * width + col].abs();
            for r in col + 1..m {
                let v = a[r * width + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-12 {
                return Err(SimplexError::SingularBasis);
            }
            if pivot != col {
                for k in 0..width {
                    a.swap(col * width + k, pivot * width + k);
                }
            }
            let inv = 1.0 / a[col * width + col];
            for k in 0..width {
                a[col * width + k] *= inv;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * width + col];
                    if f != 0.0 {
                        for k in 0..width {
                            a[r * width + k] -= f * a[col * width + k];
                        }
                    }
                }
            }
        }
        for r in 0..m {
            for k in 0..m {
                self.binv[r * m + k] = a[r * width + m + k];
            }
        }

        // Hold nonbasic values, recompute basic ones.
        let mut residual = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if matches!(self.status[j], VarStatus::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for &(row, coef) in col {
                residual[row] -= coef * self.x[j];
            }
        }
        for r in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[r * m + k] * residual[k];
            }
            self.x[self.basis[r]] = v;
        }
        Ok(())
    }

    fn dual_infeasibility(&self) -> f64 {
        let y = self.dual_values();
        let mut worst = 0.0f64;
        for j in 0..self.cols.len() {
            if self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            match self.status[j] {
                VarStatus::Basic(_) => {}
                VarStatus::AtLower => worst = worst.max(-self.reduced_cost(j, &y)),
                VarStatus::AtUpper => worst = worst.max(self.reduced_cost(j, &y)),
            }
        }
        worst
    }

    fn primal_residual(&self) -> f64 {
        let mut residual = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            for &(row, coef) in col {
                residual[row] -= coef * self.x[j];
            }
        }
        residual.iter().fold(0.0f64, |acc, r| acc.max(r.abs()))
    }
}
