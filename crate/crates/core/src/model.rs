//! General-form LP data, box projections, objectives and KKT residuals.
//!
//! The primal problem is
//!
//! ```text
//! min <c, x>   s.t.   A x in K = [row_lower, row_upper],   x in C = [var_lower, var_upper]
//! ```
//!
//! and its dual is `min supp_K(-y) + supp_C(-z)` subject to `A^T y + z = c`,
//! where `supp_S` is the support function of the box `S`. Infinite bounds
//! are IEEE infinities.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::sparse::{norm, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    #[default]
    Minimize,
    Maximize,
}

/// A linear program, always stored in minimization form.
///
/// A maximization objective is negated when the problem is built and
/// `sense` remembers the flip so reported objective values can undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
    pub obj_constant: f64,
    pub sense: ObjSense,
}

impl LpProblem {
    pub fn new(
        c: Vec<f64>,
        a: SparseMatrix,
        row_lower: Vec<f64>,
        row_upper: Vec<f64>,
        var_lower: Vec<f64>,
        var_upper: Vec<f64>,
    ) -> Result<Self> {
        let prob = Self {
            c,
            a,
            row_lower,
            row_upper,
            var_lower,
            var_upper,
            obj_constant: 0.0,
            sense: ObjSense::Minimize,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_objective_constant(mut self, constant: f64) -> Self {
        self.obj_constant = constant;
        self
    }

    /// Treats the current objective as one to be maximized: negates `c` and
    /// the constant, and records the flip for reporting. Zeros stay `+0.0`.
    pub fn into_maximization(mut self) -> Self {
        if self.sense == ObjSense::Minimize {
            self.c.iter_mut().for_each(|v| *v = 0.0 - *v);
            self.obj_constant = 0.0 - self.obj_constant;
            self.sense = ObjSense::Maximize;
        }
        self
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_vars(&self) -> usize {
        self.a.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        check_len("objective length", n, self.c.len())?;
        check_len("row lower bounds", m, self.row_lower.len())?;
        check_len("row upper bounds", m, self.row_upper.len())?;
        check_len("variable lower bounds", n, self.var_lower.len())?;
        check_len("variable upper bounds", n, self.var_upper.len())?;
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective vector"));
        }
        if !self.obj_constant.is_finite() {
            return Err(Error::NonFinite("objective constant"));
        }
        check_bounds("row", &self.row_lower, &self.row_upper)?;
        check_bounds("variable", &self.var_lower, &self.var_upper)?;
        Ok(())
    }

    /// Maps an internal (minimization) objective value back to the sense
    /// the problem was stated in.
    pub fn reported_objective(&self, internal: f64) -> f64 {
        match self.sense {
            ObjSense::Minimize => internal,
            ObjSense::Maximize => -internal,
        }
    }

    /// Rows whose lower and upper bounds coincide.
    pub fn all_rows_equality(&self) -> bool {
        self.row_lower.iter().zip(&self.row_upper).all(|(l, u)| l == u)
    }
}

fn check_bounds(kind: &str, lower: &[f64], upper: &[f64]) -> Result<()> {
    for (i, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
            return Err(Error::InvalidProblem(format!(
                "{kind} {i} has inconsistent bounds [{l}, {u}]"
            )));
        }
    }
    Ok(())
}

/// The triple `w = (y, z, x)` evolved by every method in this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl Iterate {
    pub fn new(y: Vec<f64>, z: Vec<f64>, x: Vec<f64>) -> Self {
        Self { y, z, x }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            y: vec![0.0; m],
            z: vec![0.0; n],
            x: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().chain(&self.z).chain(&self.x).all(|v| v.is_finite())
    }

    pub fn check_dims(&self, prob: &LpProblem) -> Result<()> {
        check_len("iterate y", prob.num_rows(), self.y.len())?;
        check_len("iterate z", prob.num_vars(), self.z.len())?;
        check_len("iterate x", prob.num_vars(), self.x.len())
    }

    /// `alpha * self + beta * other`, blockwise.
    pub fn lincomb(&self, alpha: f64, other: &Iterate, beta: f64) -> Iterate {
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| alpha * u + beta * v).collect();
        Iterate {
            y: comb(&self.y, &other.y),
            z: comb(&self.z, &other.z),
            x: comb(&self.x, &other.x),
        }
    }

    pub fn sub(&self, other: &Iterate) -> Iterate {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn norm(&self) -> f64 {
        self.y
            .iter()
            .chain(&self.z)
            .chain(&self.x)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute entry over all three blocks.
    pub fn max_abs(&self) -> f64 {
        self.y.iter().chain(&self.z).chain(&self.x).fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// The three blocks of the KKT residual mapping and their norms.
#[derive(Debug, Clone, PartialEq)]
pub struct KktResidual {
    /// `A x - Pi_K(A x - y)`
    pub primal: Vec<f64>,
    /// `x - Pi_C(x - z)`
    pub dual_box: Vec<f64>,
    /// `c - A^T y - z`
    pub dual_eq: Vec<f64>,
    pub primal_norm: f64,
    pub dual_box_norm: f64,
    pub dual_eq_norm: f64,
}

impl KktResidual {
    pub fn norm(&self) -> f64 {
        (self.primal_norm.powi(2) + self.dual_box_norm.powi(2) + self.dual_eq_norm.powi(2)).sqrt()
    }
}

/// Relative residuals used by the termination test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeResiduals {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub gap: f64,
    pub primal: f64,
    pub dual: f64,
}

impl RelativeResiduals {
    pub fn max(&self) -> f64 {
        self.gap.max(self.primal).max(self.dual)
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        self.gap <= tol && self.primal <= tol && self.dual <= tol
    }
}

/// Componentwise `min(max(v, l), u)`; infinite bounds leave that side open.
pub fn project_box(v: &[f64], lower: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    check_len("projection lower bounds", v.len(), lower.len())?;
    check_len("projection upper bounds", v.len(), upper.len())?;
    let mut out = vec![0.0; v.len()];
    project_box_into(v, lower, upper, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn clamp(v: f64, l: f64, u: f64) -> f64 {
    v.max(l).min(u)
}

pub(crate) fn project_box_into(v: &[f64], lower: &[f64], upper: &[f64], out: &mut [f64]) {
    for (((o, &vi), &l), &u) in out.iter_mut().zip(v).zip(lower).zip(upper) {
        *o = clamp(vi, l, u);
    }
}

/// Support function of the box `[lower, upper]` at `s`, with `0 * inf = 0`.
pub fn box_support(s: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((&si, &l), &u) in s.iter().zip(lower).zip(upper) {
        if si > 0.0 {
            if u == f64::INFINITY {
                return f64::INFINITY;
            }
            total += u * si;
        } else if si < 0.0 {
            if l == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            total += l * si;
        }
    }
    total
}

pub fn kkt_residual(w: &Iterate, prob: &LpProblem) -> Result<KktResidual> {
    w.check_dims(prob)?;
    if !w.is_finite() {
        return Err(Error::NonFinite("iterate"));
    }
    let ax = prob.a.spmv(&w.x)?;
    let aty = prob.a.spmv_t(&w.y)?;

    let primal: Vec<f64> = ax
        .iter()
        .zip(&w.y)
        .enumerate()
        .map(|(i, (&axi, &yi))| axi - clamp(axi - yi, prob.row_lower[i], prob.row_upper[i]))
        .collect();
    let dual_box: Vec<f64> = w
        .x
        .iter()
        .zip(&w.z)
        .enumerate()
        .map(|(j, (&xj, &zj))| xj - clamp(xj - zj, prob.var_lower[j], prob.var_upper[j]))
        .collect();
    let dual_eq: Vec<f64> = prob
        .c
        .iter()
        .zip(&aty)
        .zip(&w.z)
        .map(|((&cj, &atyj), &zj)| cj - atyj - zj)
        .collect();

    Ok(KktResidual {
        primal_norm: norm(&primal),
        dual_box_norm: norm(&dual_box),
        dual_eq_norm: norm(&dual_eq),
        primal,
        dual_box,
        dual_eq,
    })
}

/// `supp_K(-y) + supp_C(-z)`: the objective of the dual problem in its
/// minimization form. `+inf` whenever a multiplier pushes against an open
/// side of a box.
///
/// Panics if `y` or `z` have the wrong length.
pub fn dual_objective(y: &[f64], z: &[f64], prob: &LpProblem) -> f64 {
    assert_eq!(y.len(), prob.num_rows(), "dual_objective: y length");
    assert_eq!(z.len(), prob.num_vars(), "dual_objective: z length");
    let neg_y: Vec<f64> = y.iter().map(|v| -v).collect();
    let neg_z: Vec<f64> = z.iter().map(|v| -v).collect();
    let rows = box_support(&neg_y, &prob.row_lower, &prob.row_upper);
    if rows == f64::INFINITY {
        return rows;
    }
    rows + box_support(&neg_z, &prob.var_lower, &prob.var_upper)
}

/// `<c, x> + obj_constant`, in the internal minimization sense.
pub fn primal_objective(x: &[f64], prob: &LpProblem) -> f64 {
    assert_eq!(x.len(), prob.num_vars(), "primal_objective: x length");
    prob.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + prob.obj_constant
}

/// `max(|l|, |u|)` per row with infinite entries counted as zero.
pub fn bound_magnitudes(lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let finite_abs = |v: f64| if v.is_finite() { v.abs() } else { 0.0 };
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| finite_abs(l).max(finite_abs(u)))
        .collect()
}

/// Objective gap, primal infeasibility and dual infeasibility ratios of the
/// termination test. The gap compares `<c, x>` with the negated dual
/// objective; the objective constant is left out of both sides.
pub fn relative_residuals(w: &Iterate, prob: &LpProblem) -> RelativeResiduals {
    let ax = prob.a.spmv(&w.x).expect("x length matches problem");
    let aty = prob.a.spmv_t(&w.y).expect("y length matches problem");

    let primal_obj = primal_objective(&w.x, prob) - prob.obj_constant;
    let dual_obj = dual_objective(&w.y, &w.z, prob);
    let gap = if dual_obj.is_finite() {
        (-dual_obj - primal_obj).abs() / (1.0 + dual_obj.abs() + primal_obj.abs())
    } else {
        f64::INFINITY
    };

    let primal_violation: f64 = ax
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = v - clamp(v, prob.row_lower[i], prob.row_upper[i]);
            d * d
        })
        .sum::<f64>()
        .sqrt();
    let b_bar = norm(&bound_magnitudes(&prob.row_lower, &prob.row_upper));

    let dual_violation: f64 = prob
        .c
        .iter()
        .zip(&aty)
        .zip(&w.z)
        .map(|((&c, &a), &z)| (c - a - z).powi(2))
        .sum::<f64>()
        .sqrt();

    RelativeResiduals {
        gap,
        primal: primal_violation / (1.0 + b_bar),
        dual: dual_violation / (1.0 + norm(&prob.c)),
    }
}
