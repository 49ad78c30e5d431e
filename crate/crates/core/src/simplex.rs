//! Bounded-variable primal simplex over a dense basis inverse.
//!
//! Two-phase method: phase 1 drives artificial variables to zero, phase 2
//! maximizes the real objective. Variables live between (possibly infinite)
//! bounds and nonbasic variables sit at one of them; the ratio test handles
//! bound flips. Dantzig pricing with a Bland's-rule fallback when the
//! objective stalls (cycling guard), and periodic refactorization of the
//! basis inverse to keep drift in check.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use crate::model::RowOp;

const FEAS_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-10;
const RATIO_TIE_EPS: f64 = 1e-10;
const REFACTOR_EVERY: u64 = 120;
const STALL_LIMIT: u64 = 400;

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub op: RowOp,
    pub rhs: f64,
}

/// A maximization LP with bounded variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub obj: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexError {
    SingularBasis,
    IterationLimit,
    BadBounds(usize),
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::SingularBasis => write!(f, "basis became numerically singular"),
            SimplexError::IterationLimit => write!(f, "simplex iteration limit exceeded"),
            SimplexError::BadBounds(j) => write!(f, "variable {j} has an empty bound interval"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

struct Tableau {
    m: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: u64,
    last_refactor: u64,
}

impl Tableau {
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Basic(r) => self.xb[r],
        }
    }

    fn objective_value(&self, obj: &[f64]) -> f64 {
        (0..self.ncols)
            .map(|j| obj[j] * self.nonbasic_value(j))
            .sum()
    }

    /// Rebuild B^-1 and the basic values from scratch.
    fn refactorize(&mut self) -> Result<(), SimplexError> {
        let m = self.m;
        // Dense B alongside an identity that becomes B^-1.
        let mut b = vec![0.0f64; m * m];
        let mut inv = vec![0.0f64; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for (c, &j) in self.basis.iter().enumerate() {
            for &(r, a) in &self.cols[j] {
                b[r * m + c] = a;
            }
        }
        // Gauss-Jordan with partial pivoting.
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = fabs(b[col * m + col]);
            for r in col + 1..m {
                let v = fabs(b[r * m + col]);
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return Err(SimplexError::SingularBasis);
            }
            if piv_row != col {
                for c in 0..m {
                    b.swap(piv_row * m + c, col * m + c);
                    inv.swap(piv_row * m + c, col * m + c);
                }
            }
            let scale = b[col * m + col];
            for c in 0..m {
                b[col * m + c] /= scale;
                inv[col * m + c] /= scale;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for c in 0..m {
                    b[r * m + c] -= f * b[col * m + c];
                    inv[r * m + c] -= f * inv[col * m + c];
                }
            }
        }
        self.binv = inv;
        // xb = B^-1 (rhs - N x_N)
        let mut resid = self.rhs.clone();
        for j in 0..self.ncols {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for &(r, a) in &self.cols[j] {
                    resid[r] -= a * v;
                }
            }
        }
        for r in 0..m {
            let mut acc = 0.0;
            for c in 0..m {
                acc += self.binv[r * m + c] * resid[c];
            }
            self.xb[r] = acc;
        }
        Ok(())
    }

    /// Run the simplex loop for the objective currently in `self.obj`.
    /// Returns false when the objective is unbounded above.
    fn optimize(&mut self) -> Result<bool, SimplexError> {
        let m = self.m;
        let max_iter = 200 + 60 * (self.ncols as u64 + m as u64);
        let mut iter: u64 = 0;
        let mut bland = false;
        let mut stall: u64 = 0;
        let mut last_obj = f64::NEG_INFINITY;
        loop {
            iter += 1;
            if iter > max_iter {
                return Err(SimplexError::IterationLimit);
            }
            if self.pivots - self.last_refactor >= REFACTOR_EVERY {
                self.refactorize()?;
                self.last_refactor = self.pivots;
            }

            // Duals y = c_B B^-1.
            let mut y = vec![0.0f64; m];
            for (r, &j) in self.basis.iter().enumerate() {
                let c = self.obj[j];
                if c != 0.0 {
                    for col in 0..m {
                        y[col] += c * self.binv[r * m + col];
                    }
                }
            }

            // Price nonbasic columns.
            let mut entering: Option<(usize, f64, i8)> = None;
            for j in 0..self.ncols {
                let dir = match self.state[j] {
                    VarState::Basic(_) => continue,
                    VarState::AtLower => 1i8,
                    VarState::AtUpper => -1i8,
                };
                let mut d = self.obj[j];
                for &(r, a) in &self.cols[j] {
                    d -= y[r] * a;
                }
                let improving = (dir == 1 && d > COST_EPS) || (dir == -1 && d < -COST_EPS);
                if !improving {
                    continue;
                }
                if bland {
                    entering = Some((j, d, dir));
                    break;
                }
                match entering {
                    Some((_, best, _)) if fabs(d) <= fabs(best) => {}
                    _ => entering = Some((j, d, dir)),
                }
            }
            let Some((j, _d, dir_sign)) = entering else {
                return Ok(true);
            };
            let dir = dir_sign as f64;

            // w = B^-1 A_j
            let mut w = vec![0.0f64; m];
            for &(r, a) in &self.cols[j] {
                if a != 0.0 {
                    for row in 0..m {
                        w[row] += self.binv[row * m + r] * a;
                    }
                }
            }

            // Ratio test with bound flip.
            let span = self.upper[j] - self.lower[j];
            let mut t_best = f64::INFINITY;
            let mut leaving: Option<(usize, VarState)> = None;
            for r in 0..m {
                let wr = w[r];
                if fabs(wr) < PIVOT_EPS {
                    continue;
                }
                let rate = dir * wr; // x_B[r] decreases at this rate
                let bvar = self.basis[r];
                let (t_r, target) = if rate > 0.0 {
                    let lb = self.lower[bvar];
                    if lb == f64::NEG_INFINITY {
                        continue;
                    }
                    ((self.xb[r] - lb) / rate, VarState::AtLower)
                } else {
                    let ub = self.upper[bvar];
                    if ub == f64::INFINITY {
                        continue;
                    }
                    ((ub - self.xb[r]) / (-rate), VarState::AtUpper)
                };
                let t_r = t_r.max(0.0);
                let replace = match leaving {
                    None => t_r < t_best,
                    Some((best_r, _)) => {
                        t_r < t_best - RATIO_TIE_EPS
                            || (t_r < t_best + RATIO_TIE_EPS && bvar < self.basis[best_r])
                    }
                };
                if replace {
                    t_best = t_r;
                    leaving = Some((r, target));
                }
            }

            if span <= t_best + RATIO_TIE_EPS {
                if span == f64::INFINITY {
                    return Ok(false); // unbounded direction
                }
                // Bound flip: move j to its other bound.
                for r in 0..m {
                    self.xb[r] -= dir * span * w[r];
                }
                self.state[j] = match self.state[j] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    VarState::Basic(_) => unreachable!(),
                };
            } else {
                let (rp, target) = leaving.expect("finite ratio implies a leaving row");
                let t = t_best;
                let enter_val = self.nonbasic_value(j) + dir * t;
                let wp = w[rp];
                // Update basic values.
                for r in 0..m {
                    if r != rp {
                        self.xb[r] -= dir * t * w[r];
                    }
                }
                let leaving_var = self.basis[rp];
                self.state[leaving_var] = target;
                self.basis[rp] = j;
                self.state[j] = VarState::Basic(rp);
                self.xb[rp] = enter_val;
                // Product-form update of B^-1.
                let inv_wp = 1.0 / wp;
                for c in 0..m {
                    self.binv[rp * m + c] *= inv_wp;
                }
                for r in 0..m {
                    if r == rp {
                        continue;
                    }
                    let f = w[r];
                    if f == 0.0 {
                        continue;
                    }
                    for c in 0..m {
                        self.binv[r * m + c] -= f * self.binv[rp * m + c];
                    }
                }
                self.pivots += 1;
            }

            // Cycling guard: switch to Bland's rule when the objective stalls.
            let obj_now = self.objective_value(&self.obj.clone());
            if obj_now > last_obj + 1e-12 {
                last_obj = obj_now;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
        }
    }
}

/// Solve a bounded-variable LP to proven optimality (within tolerances).
pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome, SimplexError> {
    let nstruct = problem.obj.len();
    let m = problem.rows.len();

    for j in 0..nstruct {
        if problem.lower[j] > problem.upper[j] + 1e-12 {
            return Ok(LpOutcome::Infeasible);
        }
        if problem.lower[j] == f64::NEG_INFINITY && problem.upper[j] == f64::INFINITY {
            return Err(SimplexError::BadBounds(j));
        }
    }
    if m == 0 {
        // Pure bound optimization.
        let mut x = vec![0.0; nstruct];
        let mut value = 0.0;
        for j in 0..nstruct {
            x[j] = if problem.obj[j] >= 0.0 {
                if problem.upper[j] == f64::INFINITY {
                    if problem.obj[j] > 0.0 {
                        return Ok(LpOutcome::Unbounded);
                    }
                    problem.lower[j]
                } else {
                    problem.upper[j]
                }
            } else if problem.lower[j] == f64::NEG_INFINITY {
                return Ok(LpOutcome::Unbounded);
            } else {
                problem.lower[j]
            };
            value += problem.obj[j] * x[j];
        }
        return Ok(LpOutcome::Optimal { value, x });
    }

    // Column scaling keeps every structural variable within about [0, 1].
    let mut col_scale = vec![1.0f64; nstruct];
    for j in 0..nstruct {
        let mag = fabs(problem.lower[j]).max(fabs(problem.upper[j]));
        if mag.is_finite() && mag > 1.0 {
            col_scale[j] = mag;
        }
    }

    // Row scaling by the largest structural coefficient.
    let mut scaled_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nstruct];
    let mut row_scale = vec![1.0f64; m];
    for (r, row) in problem.rows.iter().enumerate() {
        let mut maxc = 0.0f64;
        for &(j, a) in &row.coeffs {
            maxc = maxc.max(fabs(a * col_scale[j]));
        }
        if maxc > 0.0 {
            row_scale[r] = 1.0 / maxc;
        }
    }
    let mut rhs = vec![0.0f64; m];
    for (r, row) in problem.rows.iter().enumerate() {
        rhs[r] = row.rhs * row_scale[r];
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                scaled_cols[j].push((r, a * col_scale[j] * row_scale[r]));
            }
        }
    }

    let mut cols = scaled_cols;
    let mut lower: Vec<f64> = (0..nstruct)
        .map(|j| problem.lower[j] / col_scale[j])
        .collect();
    let mut upper: Vec<f64> = (0..nstruct)
        .map(|j| problem.upper[j] / col_scale[j])
        .collect();
    let mut obj: Vec<f64> = (0..nstruct)
        .map(|j| problem.obj[j] * col_scale[j])
        .collect();

    // Slack per row: a.x + s = b.
    let slack_base = cols.len();
    for (r, row) in problem.rows.iter().enumerate() {
        cols.push(vec![(r, 1.0)]);
        let (lo, hi) = match row.op {
            RowOp::Le => (0.0, f64::INFINITY),
            RowOp::Ge => (f64::NEG_INFINITY, 0.0),
            RowOp::Eq => (0.0, 0.0),
        };
        lower.push(lo);
        upper.push(hi);
        obj.push(0.0);
    }

    // Nonbasic start: every structural and slack variable at a finite bound.
    let mut state: Vec<VarState> = (0..cols.len())
        .map(|j| {
            if lower[j] != f64::NEG_INFINITY {
                VarState::AtLower
            } else {
                VarState::AtUpper
            }
        })
        .collect();

    // Residuals decide which rows need an artificial variable.
    let mut resid = rhs.clone();
    for j in 0..slack_base {
        let v = match state[j] {
            VarState::AtLower => lower[j],
            VarState::AtUpper => upper[j],
            VarState::Basic(_) => unreachable!(),
        };
        if v != 0.0 {
            for &(r, a) in &cols[j] {
                resid[r] -= a * v;
            }
        }
    }

    let mut basis = vec![usize::MAX; m];
    let mut xb = vec![0.0f64; m];
    let mut binv = vec![0.0f64; m * m];
    let mut phase1_obj: Vec<f64> = vec![0.0; cols.len()];
    let mut any_artificial = false;
    for r in 0..m {
        let s = slack_base + r;
        let within = resid[r] >= lower[s] - FEAS_EPS && resid[r] <= upper[s] + FEAS_EPS;
        if within {
            basis[r] = s;
            state[s] = VarState::Basic(r);
            xb[r] = resid[r];
            binv[r * m + r] = 1.0;
        } else {
            // Park the slack at the bound nearest the residual and absorb the
            // remaining violation in an artificial >= 0.
            let s_val = if resid[r] < lower[s] {
                lower[s]
            } else {
                upper[s]
            };
            state[s] = if s_val == lower[s] {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            let violation = resid[r] - s_val;
            let sign = if violation >= 0.0 { 1.0 } else { -1.0 };
            let art = cols.len();
            cols.push(vec![(r, sign)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            obj.push(0.0);
            phase1_obj.push(-1.0);
            state.push(VarState::Basic(r));
            basis[r] = art;
            xb[r] = fabs(violation);
            binv[r * m + r] = sign;
            any_artificial = true;
        }
    }
    while phase1_obj.len() < cols.len() {
        phase1_obj.push(0.0);
    }

    let ncols = cols.len();
    let mut tab = Tableau {
        m,
        ncols,
        cols,
        lower,
        upper,
        rhs,
        obj: phase1_obj,
        state,
        basis,
        binv,
        xb,
        pivots: 0,
        last_refactor: 0,
    };

    if any_artificial {
        let bounded = tab.optimize()?;
        debug_assert!(bounded, "phase-1 objective is bounded above by zero");
        let infeas: f64 = (slack_base + m..tab.ncols)
            .map(|j| tab.nonbasic_value(j))
            .sum();
        if infeas > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // Lock artificials at zero for phase 2.
        for j in slack_base + m..tab.ncols {
            tab.upper[j] = 0.0;
        }
    }

    tab.obj = obj.clone();
    // Artificial columns carry zero cost already (obj was sized pre-artificial).
    while tab.obj.len() < tab.ncols {
        tab.obj.push(0.0);
    }
    let bounded = tab.optimize()?;
    if !bounded {
        return Ok(LpOutcome::Unbounded);
    }
    tab.refactorize()?;

    let mut x = vec![0.0f64; nstruct];
    for j in 0..nstruct {
        x[j] = tab.nonbasic_value(j) * col_scale[j];
    }
    let value = (0..nstruct).map(|j| problem.obj[j] * x[j]).sum();
    Ok(LpOutcome::Optimal { value, x })
}
