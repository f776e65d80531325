//! Diagonal equilibration of the constraint matrix.
//!
//! `A_s = D_r A D_c`, `c_s = D_c c`, row bounds `D_r [l_c, u_c]` and variable
//! bounds `D_c^{-1} [l_v, u_v]`. Iterates map back by `x = D_c x_s`,
//! `y = D_r y_s`, `z = D_c^{-1} z_s`.

use serde::{Deserialize, Serialize};

use crate::model::{Iterate, LpProblem};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scaling {
    None,
    /// `iters` Ruiz sweeps followed by one column l2 pass.
    Ruiz { iters: usize },
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling::Ruiz { iters: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct ScaledProblem {
    pub prob: LpProblem,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl ScaledProblem {
    pub fn identity(prob: &LpProblem) -> Self {
        Self {
            prob: prob.clone(),
            row_scale: vec![1.0; prob.num_rows()],
            col_scale: vec![1.0; prob.num_vars()],
        }
    }

    /// Maps an iterate of the scaled problem back to the original one.
    pub fn unscale(&self, w: &Iterate) -> Iterate {
        Iterate {
            y: w.y.iter().zip(&self.row_scale).map(|(y, d)| y * d).collect(),
            z: w.z.iter().zip(&self.col_scale).map(|(z, d)| z / d).collect(),
            x: w.x.iter().zip(&self.col_scale).map(|(x, d)| x * d).collect(),
        }
    }

    /// Maps an iterate of the original problem into scaled coordinates.
    pub fn scale(&self, w: &Iterate) -> Iterate {
        Iterate {
            y: w.y.iter().zip(&self.row_scale).map(|(y, d)| y / d).collect(),
            z: w.z.iter().zip(&self.col_scale).map(|(z, d)| z * d).collect(),
            x: w.x.iter().zip(&self.col_scale).map(|(x, d)| x / d).collect(),
        }
    }
}

fn inv_sqrt_or_one(v: f64) -> f64 {
    if v > 0.0 {
        1.0 / v.sqrt()
    } else {
        1.0
    }
}

/// Ruiz equilibration: each sweep divides every row and column by the
/// square root of its largest absolute entry. Returns `(D_r, D_c)`.
pub fn ruiz_equilibrate(a: &SparseMatrix, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut row_scale = vec![1.0; a.nrows()];
    let mut col_scale = vec![1.0; a.ncols()];
    let mut current = a.clone();
    for _ in 0..iters {
        let r: Vec<f64> = current.row_max_abs().into_iter().map(inv_sqrt_or_one).collect();
        let c: Vec<f64> = current.col_max_abs().into_iter().map(inv_sqrt_or_one).collect();
        current = current.scaled(&r, &c);
        row_scale.iter_mut().zip(&r).for_each(|(d, s)| *d *= s);
        col_scale.iter_mut().zip(&c).for_each(|(d, s)| *d *= s);
    }
    (row_scale, col_scale)
}

pub fn apply_scaling(prob: &LpProblem, scaling: Scaling) -> ScaledProblem {
    let iters = match scaling {
        Scaling::None => return ScaledProblem::identity(prob),
        Scaling::Ruiz { iters } => iters,
    };
    let (row_scale, mut col_scale) = ruiz_equilibrate(&prob.a, iters);
    let ruizzed = prob.a.scaled(&row_scale, &col_scale);
    for (d, nrm) in col_scale.iter_mut().zip(ruizzed.col_norms()) {
        *d *= inv_sqrt_or_one(nrm);
    }

    let a = prob.a.scaled(&row_scale, &col_scale);
    let c = prob.c.iter().zip(&col_scale).map(|(c, d)| c * d).collect();
    let row_lower = prob.row_lower.iter().zip(&row_scale).map(|(l, d)| l * d).collect();
    let row_upper = prob.row_upper.iter().zip(&row_scale).map(|(u, d)| u * d).collect();
    let var_lower = prob.var_lower.iter().zip(&col_scale).map(|(l, d)| l / d).collect();
    let var_upper = prob.var_upper.iter().zip(&col_scale).map(|(u, d)| u / d).collect();
    ScaledProblem {
        prob: LpProblem {
            c,
            a,
            row_lower,
            row_upper,
            var_lower,
            var_upper,
            obj_constant: prob.obj_constant,
            sense: prob.sense,
        },
        row_scale,
        col_scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::relative_residuals;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn identity_is_already_equilibrated() {
        let prob = LpProblem::new(vec![1.0; 3], SparseMatrix::identity(3), vec![0.0; 3], vec![1.0; 3], vec![0.0; 3], vec![INF; 3])
            .unwrap();
        let s = apply_scaling(&prob, Scaling::default());
        assert_eq!(s.row_scale, vec![1.0; 3]);
        assert_eq!(s.col_scale, vec![1.0; 3]);
    }

    #[test]
    fn ruiz_balances_badly_scaled_diagonal() {
        let a = SparseMatrix::from_dense(&[vec![100.0, 0.0], vec![0.0, 0.01]], 2).unwrap();
        let (dr, dc) = ruiz_equilibrate(&a, 10);
        let s = a.scaled(&dr, &dc);
        let lo = 1.0 / 2f64.sqrt();
        let hi = 2f64.sqrt();
        for v in s.row_max_abs().into_iter().chain(s.col_max_abs()) {
            assert!(v >= lo && v <= hi, "{v}");
        }
    }

    #[test]
    fn zero_rows_and_columns_keep_unit_scale() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 0.0], vec![0.0, 0.0]], 2).unwrap();
        let (dr, dc) = ruiz_equilibrate(&a, 5);
        assert_eq!(dr[1], 1.0);
        assert_eq!(dc[1], 1.0);
    }

    #[test]
    fn iterate_round_trip_and_residual_invariance() {
        let a = SparseMatrix::from_dense(&[vec![200.0, 3.0], vec![0.5, 0.002]], 2).unwrap();
        let prob = LpProblem::new(vec![1.0, -7.0], a, vec![1.0, -INF], vec![5.0, 2.0], vec![0.0, -3.0], vec![10.0, INF]).unwrap();
        let s = apply_scaling(&prob, Scaling::default());
        let w = Iterate::new(vec![0.3, -1.7], vec![2.5, 0.0], vec![1.25, -0.5]);
        let back = s.unscale(&s.scale(&w));
        assert!(back.sub(&w).max_abs() <= 1e-15 * w.max_abs());

        // A^T y + z - c transforms covariantly, so the dual residual of a
        // scaled iterate maps to the unscaled one exactly (up to roundoff)
        let ws = s.scale(&w);
        let r_orig = relative_residuals(&w, &prob);
        let r_back = relative_residuals(&s.unscale(&ws), &prob);
        assert!((r_orig.dual - r_back.dual).abs() < 1e-12);
    }
}
