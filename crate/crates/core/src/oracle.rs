//! Brute-force vertex enumeration for tiny LPs.
//!
//! Free variables are split into differences of nonnegative parts so the
//! feasible set is pointed; then every basic solution of
//! `A x - s = 0, x in C, s in K` is enumerated. A nonempty pointed polyhedron
//! has a vertex, so finding none means infeasible. Unboundedness is decided by
//! minimizing `c` over the recession cone intersected with the unit box.

use crate::error::{Error, Result};
use crate::model::{primal_objective, LpProblem};

pub const MAX_ORACLE_DIM: usize = 10;
const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub status: OracleStatus,
    /// Optimal vertex; empty unless `status` is optimal.
    pub x: Vec<f64>,
    /// `<c, x> + constant` in the sense the problem was stated in.
    pub objective: f64,
}

/// Dense standard form: variables `v = (x', s)` with `[A' -I] v = 0`.
struct Enumeration {
    m: usize,
    nx: usize,
    /// `m x (nx + m)` row-major
    mat: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    /// original variable j = sum of (split index, sign)
    recombine: Vec<Vec<(usize, f64)>>,
}

struct Best {
    obj: f64,
    x: Vec<f64>,
}

impl Enumeration {
    fn new(prob: &LpProblem) -> Self {
        let (m, n) = (prob.num_rows(), prob.num_vars());
        let dense = prob.a.to_dense();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut cost = Vec::new();
        let mut recombine = Vec::with_capacity(n);
        for j in 0..n {
            let col: Vec<f64> = (0..m).map(|i| dense[i][j]).collect();
            let (l, u) = (prob.var_lower[j], prob.var_upper[j]);
            if l.is_finite() || u.is_finite() {
                recombine.push(vec![(cols.len(), 1.0)]);
                cols.push(col);
                lower.push(l);
                upper.push(u);
                cost.push(prob.c[j]);
            } else {
                let plus = cols.len();
                recombine.push(vec![(plus, 1.0), (plus + 1, -1.0)]);
                cols.push(col.clone());
                cols.push(col.iter().map(|v| -v).collect());
                lower.extend([0.0, 0.0]);
                upper.extend([f64::INFINITY, f64::INFINITY]);
                cost.extend([prob.c[j], -prob.c[j]]);
            }
        }
        let nx = cols.len();
        let total = nx + m;
        let mut mat = vec![0.0; m * total];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..m {
                mat[i * total + j] = col[i];
            }
        }
        for i in 0..m {
            mat[i * total + nx + i] = -1.0;
        }
        lower.extend(&prob.row_lower);
        upper.extend(&prob.row_upper);
        cost.extend(std::iter::repeat_n(0.0, m));
        Self {
            m,
            nx,
            mat,
            lower,
            upper,
            cost,
            recombine,
        }
    }

    fn original_x(&self, v: &[f64]) -> Vec<f64> {
        self.recombine
            .iter()
            .map(|parts| parts.iter().map(|&(k, s)| s * v[k]).sum())
            .collect()
    }

    fn within(&self, k: usize, v: f64) -> bool {
        let (l, u) = (self.lower[k], self.upper[k]);
        v >= l - FEAS_TOL * (1.0 + l.abs()) && v <= u + FEAS_TOL * (1.0 + u.abs())
    }

    /// Best feasible vertex, or `None` when no basic solution is feasible.
    fn best_vertex(&self) -> Option<Best> {
        let total = self.nx + self.m;
        let mut best: Option<Best> = None;
        let mut basis: Vec<usize> = (0..self.m).collect();
        loop {
            self.visit_basis(&basis, total, &mut best);
            if !next_combination(&mut basis, total) {
                break;
            }
        }
        best
    }

    fn visit_basis(&self, basis: &[usize], total: usize, best: &mut Option<Best>) {
        let m = self.m;
        let mut in_basis = vec![false; total];
        basis.iter().for_each(|&k| in_basis[k] = true);
        let nonbasic: Vec<usize> = (0..total).filter(|&k| !in_basis[k]).collect();

        // each nonbasic variable sits at one of its finite bounds
        let mut choices: Vec<Vec<f64>> = Vec::with_capacity(nonbasic.len());
        for &k in &nonbasic {
            let mut opts = Vec::with_capacity(2);
            if self.lower[k].is_finite() {
                opts.push(self.lower[k]);
            }
            if self.upper[k].is_finite() && self.upper[k] != self.lower[k] {
                opts.push(self.upper[k]);
            }
            if opts.is_empty() {
                return;
            }
            choices.push(opts);
        }

        // g = -B^{-1} N, m x |nonbasic|
        let b: Vec<f64> = (0..m)
            .flat_map(|i| basis.iter().map(move |&k| (i, k)))
            .map(|(i, k)| self.mat[i * total + k])
            .collect();
        let rhs: Vec<f64> = (0..m)
            .flat_map(|i| nonbasic.iter().map(move |&k| (i, k)))
            .map(|(i, k)| -self.mat[i * total + k])
            .collect();
        let Some(g) = solve_dense(b, m, rhs, nonbasic.len()) else {
            return;
        };

        let mut pick = vec![0usize; nonbasic.len()];
        let mut v = vec![0.0; total];
        loop {
            for (idx, &k) in nonbasic.iter().enumerate() {
                v[k] = choices[idx][pick[idx]];
            }
            let mut feasible = true;
            for (row, &kb) in basis.iter().enumerate() {
                let val: f64 = nonbasic
                    .iter()
                    .enumerate()
                    .map(|(idx, &k)| g[row * nonbasic.len() + idx] * v[k])
                    .sum();
                if !self.within(kb, val) {
                    feasible = false;
                    break;
                }
                v[kb] = val;
            }
            if feasible {
                self.consider(&v, best);
            }
            // odometer over bound choices
            let mut d = 0;
            loop {
                if d == pick.len() {
                    return;
                }
                pick[d] += 1;
                if pick[d] < choices[d].len() {
                    break;
                }
                pick[d] = 0;
                d += 1;
            }
        }
    }

    fn consider(&self, v: &[f64], best: &mut Option<Best>) {
        let obj: f64 = self.cost.iter().zip(v).map(|(c, v)| c * v).sum();
        let x = self.original_x(v);
        let replace = match best {
            None => true,
            Some(b) => {
                let tol = FEAS_TOL * (1.0 + b.obj.abs());
                obj < b.obj - tol || (obj <= b.obj + tol && lex_less(&x, &b.x))
            }
        };
        if replace {
            *best = Some(Best { obj, x });
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        let tol = FEAS_TOL * (1.0 + x.abs().max(y.abs()));
        if x < &(y - tol) {
            return true;
        }
        if x > &(y + tol) {
            return false;
        }
    }
    false
}

/// Advances `comb` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves `B X = R` for square `B` (row-major `m x m`) and `R` (`m x cols`)
/// by Gaussian elimination with partial pivoting. `None` if `B` is singular.
fn solve_dense(mut b: Vec<f64>, m: usize, mut r: Vec<f64>, cols: usize) -> Option<Vec<f64>> {
    let scale = b.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for p in 0..m {
        let piv = (p..m).max_by(|&i, &j| b[i * m + p].abs().total_cmp(&b[j * m + p].abs()))?;
        if b[piv * m + p].abs() <= PIVOT_TOL * scale {
            return None;
        }
        if piv != p {
            for j in 0..m {
                b.swap(p * m + j, piv * m + j);
            }
            for j in 0..cols {
                r.swap(p * cols + j, piv * cols + j);
            }
        }
        let d = b[p * m + p];
        for i in p + 1..m {
            let f = b[i * m + p] / d;
            if f == 0.0 {
                continue;
            }
            for j in p..m {
                b[i * m + j] -= f * b[p * m + j];
            }
            for j in 0..cols {
                r[i * cols + j] -= f * r[p * cols + j];
            }
        }
    }
    for p in (0..m).rev() {
        let d = b[p * m + p];
        for j in 0..cols {
            let mut acc = r[p * cols + j];
            for q in p + 1..m {
                acc -= b[p * m + q] * r[q * cols + j];
            }
            r[p * cols + j] = acc / d;
        }
    }
    Some(r)
}

fn recession_problem(prob: &LpProblem) -> LpProblem {
    let cone = |l: f64, u: f64| -> (f64, f64) {
        match (l.is_finite(), u.is_finite()) {
            (true, true) => (0.0, 0.0),
            (true, false) => (0.0, f64::INFINITY),
            (false, true) => (f64::NEG_INFINITY, 0.0),
            (false, false) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    };
    let (rl, ru): (Vec<f64>, Vec<f64>) = prob
        .row_lower
        .iter()
        .zip(&prob.row_upper)
        .map(|(&l, &u)| cone(l, u))
        .unzip();
    let (vl, vu): (Vec<f64>, Vec<f64>) = prob
        .var_lower
        .iter()
        .zip(&prob.var_upper)
        .map(|(&l, &u)| {
            let (l, u) = cone(l, u);
            (l.max(-1.0), u.min(1.0))
        })
        .unzip();
    LpProblem {
        c: prob.c.clone(),
        a: prob.a.clone(),
        row_lower: rl,
        row_upper: ru,
        var_lower: vl,
        var_upper: vu,
        obj_constant: 0.0,
        sense: prob.sense,
    }
}

/// Exact-by-enumeration solve of a tiny LP (at most ten rows and ten columns).
pub fn oracle_solve(prob: &LpProblem) -> Result<OracleSolution> {
    prob.validate()?;
    let (m, n) = (prob.num_rows(), prob.num_vars());
    if m > MAX_ORACLE_DIM || n > MAX_ORACLE_DIM {
        return Err(Error::OracleTooLarge { n, m });
    }
    let Some(best) = Enumeration::new(prob).best_vertex() else {
        return Ok(OracleSolution {
            status: OracleStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
        });
    };
    let ray = Enumeration::new(&recession_problem(prob))
        .best_vertex()
        .expect("zero direction is always feasible");
    if ray.obj < -FEAS_TOL {
        return Ok(OracleSolution {
            status: OracleStatus::Unbounded,
            x: Vec::new(),
            objective: prob.reported_objective(f64::NEG_INFINITY),
        });
    }
    let objective = prob.reported_objective(primal_objective(&best.x, prob));
    Ok(OracleSolution {
        status: OracleStatus::Optimal,
        x: best.x,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn segment_optimum_breaks_ties_lexicographically() {
        // min -x - y, x + y <= 1, x, y in [0, 1]
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0]], 2).unwrap();
        let prob = LpProblem::new(vec![-1.0, -1.0], a, vec![-INF], vec![1.0], vec![0.0; 2], vec![1.0; 2]).unwrap();
        let sol = oracle_solve(&prob).unwrap();
        assert_eq!(sol.status, OracleStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-12);
        assert_eq!(sol.x, vec![0.0, 1.0]);
    }

    #[test]
    fn box_only_problem() {
        let prob = LpProblem::new(vec![1.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![2.0], vec![3.0]).unwrap();
        let sol = oracle_solve(&prob).unwrap();
        assert_eq!(sol.status, OracleStatus::Optimal);
        assert_eq!(sol.x, vec![2.0]);
        assert_eq!(sol.objective, 2.0);
    }

    #[test]
    fn unbounded_ray() {
        let prob = LpProblem::new(vec![-1.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![0.0], vec![INF]).unwrap();
        assert_eq!(oracle_solve(&prob).unwrap().status, OracleStatus::Unbounded);
    }

    #[test]
    fn infeasible_rows() {
        // x >= 2 and x <= 1 through two rows
        let a = SparseMatrix::from_dense(&[vec![1.0], vec![1.0]], 1).unwrap();
        let prob = LpProblem::new(vec![1.0], a, vec![2.0, -INF], vec![INF, 1.0], vec![-INF], vec![INF]).unwrap();
        assert_eq!(oracle_solve(&prob).unwrap().status, OracleStatus::Infeasible);
    }

    #[test]
    fn free_variables_with_equality() {
        // min x1 + x2 s.t. x1 - x2 = 1, x1 + x2 >= 0, both free  => x1 + x2 = 0 at (0.5, -0.5)
        let a = SparseMatrix::from_dense(&[vec![1.0, -1.0], vec![1.0, 1.0]], 2).unwrap();
        let prob = LpProblem::new(vec![1.0, 1.0], a, vec![1.0, 0.0], vec![1.0, INF], vec![-INF; 2], vec![INF; 2]).unwrap();
        let sol = oracle_solve(&prob).unwrap();
        assert_eq!(sol.status, OracleStatus::Optimal);
        assert!(sol.objective.abs() < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && (sol.x[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximization_reports_stated_sense() {
        let prob = LpProblem::new(vec![2.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![0.0], vec![4.0])
            .unwrap()
            .with_objective_constant(1.0)
            .into_maximization();
        let sol = oracle_solve(&prob).unwrap();
        assert_eq!(sol.x, vec![4.0]);
        assert_eq!(sol.objective, 9.0);
    }

    #[test]
    fn rejects_large_instances() {
        let prob = LpProblem::new(vec![0.0; 11], SparseMatrix::zeros(0, 11), vec![], vec![], vec![0.0; 11], vec![1.0; 11]).unwrap();
        assert!(matches!(oracle_solve(&prob), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
