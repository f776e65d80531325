//! Base iterations of the Halpern Peaceman-Rachford family.
//!
//! With the proximal term `T1 = lambda_A I - A A^T` the splitting step has a
//! closed form built from two box projections:
//!
//! ```text
//! xi    = x + sigma (A^T y - c)          x_bar = Pi_C(xi)        z_bar = (x_bar - xi) / sigma
//! zeta  = A (2 x_bar - x) - sigma lambda_A y                     y_bar = (Pi_K(zeta) - zeta) / (sigma lambda_A)
//! w_hat = (1 + rho) w_bar - rho w
//! ```
//!
//! `rho = 1` is the Peaceman-Rachford reflection, `rho = 0` the
//! Douglas-Rachford step and `rho = gamma` the reflected PDHG variant. When
//! every row is an equality and `T1 = 0`, `y_bar` instead solves
//! `A A^T y_bar = (b - A (x_bar + sigma (z_bar - c))) / sigma`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{clamp, Iterate, LpProblem};
use crate::sparse::{norm, SparseMatrix};

/// Largest row count for which `A A^T` is factorized densely.
pub const MAX_DENSE_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    /// Halpern-anchored Peaceman-Rachford.
    Hpr,
    /// Halpern-anchored Douglas-Rachford (`w_hat = w_bar`).
    Hdr,
    /// Plain Peaceman-Rachford: `w <- w_hat`, no anchor.
    Pr,
    /// Peaceman-Rachford with ergodic averaging of the iterates.
    Epr,
    /// Reflected Halpern PDHG with reflection parameter `gamma` in `[0, 1]`.
    Rhpdhg { gamma: f64 },
}

impl Mode {
    /// Weight `rho` in `w_hat = (1 + rho) w_bar - rho w`.
    pub fn reflection(&self) -> f64 {
        match *self {
            Mode::Hpr | Mode::Pr | Mode::Epr => 1.0,
            Mode::Hdr => 0.0,
            Mode::Rhpdhg { gamma } => gamma,
        }
    }

    pub fn is_anchored(&self) -> bool {
        matches!(self, Mode::Hpr | Mode::Hdr | Mode::Rhpdhg { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Hpr => "hpr",
            Mode::Hdr => "hdr",
            Mode::Pr => "pr",
            Mode::Epr => "epr",
            Mode::Rhpdhg { .. } => "rhpdhg",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rhpdhg { gamma } => write!(f, "rhpdhg({gamma})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    /// Parses `hpr`, `hdr`, `pr`, `epr`, `rhpdhg` (gamma 1) or `rhpdhg:<gamma>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (lower.as_str(), None),
        };
        let mode = match (head, arg) {
            ("hpr", None) => Mode::Hpr,
            ("hdr", None) => Mode::Hdr,
            ("pr", None) => Mode::Pr,
            ("epr", None) => Mode::Epr,
            ("rhpdhg", None) => Mode::Rhpdhg { gamma: 1.0 },
            ("rhpdhg", Some(g)) => Mode::Rhpdhg {
                gamma: g
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad reflection parameter {g:?}")))?,
            },
            _ => return Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        };
        Ok(mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub sigma: f64,
    pub lambda_a: f64,
    pub mode: Mode,
    /// Solve the `T1 = 0` linear system for `y_bar` (equality rows only).
    pub t1_zero_path: bool,
}

impl EngineConfig {
    pub fn new(sigma: f64, lambda_a: f64) -> Self {
        Self {
            sigma,
            lambda_a,
            mode: Mode::Hpr,
            t1_zero_path: false,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.lambda_a > 0.0 && self.lambda_a.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda_A must be positive, got {}", self.lambda_a)));
        }
        if let Mode::Rhpdhg { gamma } = self.mode {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(Error::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
            }
        }
        Ok(())
    }
}

/// Intermediate quantities of one splitting step.
#[derive(Debug, Clone, PartialEq)]
pub struct PrStepTrace {
    pub xi: Vec<f64>,
    /// Empty when `y_bar` came from the `T1 = 0` linear solve.
    pub zeta: Vec<f64>,
    pub w_bar: Iterate,
    pub w_hat: Iterate,
}

impl PrStepTrace {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            xi: vec![0.0; n],
            zeta: vec![0.0; m],
            w_bar: Iterate::zeros(m, n),
            w_hat: Iterate::zeros(m, n),
        }
    }
}

/// Where a projection output sits relative to its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    Inactive,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    pub vars: Vec<Activity>,
    pub rows: Vec<Activity>,
}

impl ActiveSets {
    pub fn var_indices(&self) -> Vec<usize> {
        active_indices(&self.vars)
    }

    pub fn row_indices(&self) -> Vec<usize> {
        active_indices(&self.rows)
    }
}

fn active_indices(acts: &[Activity]) -> Vec<usize> {
    acts.iter()
        .enumerate()
        .filter(|(_, a)| **a != Activity::Inactive)
        .map(|(i, _)| i)
        .collect()
}

fn activity(projected: f64, lower: f64, upper: f64) -> Activity {
    if lower.is_finite() && projected == lower {
        Activity::Lower
    } else if upper.is_finite() && projected == upper {
        Activity::Upper
    } else {
        Activity::Inactive
    }
}

/// Dense Cholesky factor of `A A^T` for the `T1 = 0` path.
#[derive(Debug, Clone)]
pub struct AatFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    aat: DMatrix<f64>,
}

impl AatFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let m = a.nrows();
        if m > MAX_DENSE_ROWS {
            return Err(Error::InvalidConfig(format!(
                "dense A A^T factorization limited to {MAX_DENSE_ROWS} rows, got {m}"
            )));
        }
        let mut aat = DMatrix::<f64>::zeros(m, m);
        for j in 0..a.ncols() {
            let col: Vec<(usize, f64)> = a.col(j).collect();
            for &(i, vi) in &col {
                for &(k, vk) in &col {
                    aat[(i, k)] += vi * vk;
                }
            }
        }
        let singular = || Error::Singular("A A^T is not positive definite".into());
        let chol = nalgebra::Cholesky::new(aat.clone()).ok_or_else(singular)?;
        let scale = aat.diagonal().max();
        if chol.l_dirty().diagonal().iter().any(|&d| !(d * d > 1e-12 * scale)) {
            return Err(singular());
        }
        Ok(Self { chol, aat })
    }

    /// Solves `A A^T y = rhs`, with one step of iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("A A^T right-hand side", self.aat.nrows(), rhs.len())?;
        let b = DVector::from_column_slice(rhs);
        let mut y = self.chol.solve(&b);
        let r = &b - &self.aat * &y;
        y += self.chol.solve(&r);
        let resid = (&b - &self.aat * &y).norm();
        if !(resid <= 1e-10 * (1.0 + b.norm())) {
            return Err(Error::Singular(format!("A A^T solve residual {resid:.3e} too large")));
        }
        Ok(y.as_slice().to_vec())
    }
}

/// `y_bar` of the `T1 = 0` path: `A A^T y_bar = (b - A (x_bar + sigma (z_bar - c))) / sigma`.
pub fn y_update_t1_zero(
    z_bar: &[f64],
    x_bar: &[f64],
    prob: &LpProblem,
    sigma: f64,
    factor: &AatFactor,
) -> Result<Vec<f64>> {
    check_len("z_bar", prob.num_vars(), z_bar.len())?;
    check_len("x_bar", prob.num_vars(), x_bar.len())?;
    let shifted: Vec<f64> = x_bar
        .iter()
        .zip(z_bar)
        .zip(&prob.c)
        .map(|((&x, &z), &c)| x + sigma * (z - c))
        .collect();
    let a_shift = prob.a.spmv(&shifted)?;
    let rhs: Vec<f64> = prob
        .row_lower
        .iter()
        .zip(&a_shift)
        .map(|(&b, &v)| (b - v) / sigma)
        .collect();
    factor.solve(&rhs)
}

/// Stateful stepper that owns scratch buffers and, on the `T1 = 0` path,
/// the cached factorization.
pub struct Engine<'a> {
    prob: &'a LpProblem,
    cfg: EngineConfig,
    factor: Option<AatFactor>,
    aty: Vec<f64>,
    reflected: Vec<f64>,
    a_reflected: Vec<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(prob: &'a LpProblem, cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let factor = if cfg.t1_zero_path {
            if !prob.all_rows_equality() || prob.row_lower.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidConfig(
                    "the T1 = 0 path needs every row to be a finite equality".into(),
                ));
            }
            match AatFactor::new(&prob.a) {
                Ok(f) => Some(f),
                Err(e) => {
                    log::warn!("falling back to the lambda_A proximal term: {e}");
                    None
                }
            }
        } else {
            None
        };
        let (m, n) = (prob.num_rows(), prob.num_vars());
        Ok(Self {
            prob,
            cfg,
            factor,
            aty: vec![0.0; n],
            reflected: vec![0.0; n],
            a_reflected: vec![0.0; m],
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// True when `y_bar` comes from the cached `A A^T` factorization.
    pub fn uses_linear_solve(&self) -> bool {
        self.factor.is_some()
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        debug_assert!(sigma > 0.0);
        self.cfg.sigma = sigma;
    }

    pub fn pr_step(&mut self, w: &Iterate) -> Result<PrStepTrace> {
        w.check_dims(self.prob)?;
        let mut out = PrStepTrace::zeros(self.prob.num_rows(), self.prob.num_vars());
        self.step_into(w, &mut out)?;
        Ok(out)
    }

    /// One splitting step from `w`, written into `out`.
    pub fn step_into(&mut self, w: &Iterate, out: &mut PrStepTrace) -> Result<()> {
        let prob = self.prob;
        let EngineConfig { sigma, lambda_a, mode, .. } = self.cfg;

        x_half_step(prob, sigma, w, &mut self.aty, out, |j, xi| {
            clamp(xi, prob.var_lower[j], prob.var_upper[j])
        });
        match &self.factor {
            Some(factor) => {
                out.zeta.clear();
                out.w_bar.y = y_update_t1_zero(&out.w_bar.z, &out.w_bar.x, prob, sigma, factor)?;
            }
            None => {
                out.zeta.resize(prob.num_rows(), 0.0);
                y_half_step(
                    prob,
                    sigma,
                    lambda_a,
                    w,
                    &mut self.reflected,
                    &mut self.a_reflected,
                    out,
                    |i, zeta| clamp(zeta, prob.row_lower[i], prob.row_upper[i]),
                );
            }
        }
        reflect(mode.reflection(), w, &out.w_bar, &mut out.w_hat);
        if !out.w_bar.is_finite() || !out.w_hat.is_finite() {
            return Err(Error::NonFinite("splitting step"));
        }
        Ok(())
    }
}

/// One splitting step on the `lambda_A` path (or the `T1 = 0` path when
/// `cfg.t1_zero_path` is set).
pub fn pr_step(w: &Iterate, prob: &LpProblem, cfg: &EngineConfig) -> Result<PrStepTrace> {
    Engine::new(prob, *cfg)?.pr_step(w)
}

fn x_half_step(
    prob: &LpProblem,
    sigma: f64,
    w: &Iterate,
    aty: &mut [f64],
    out: &mut PrStepTrace,
    project: impl Fn(usize, f64) -> f64,
) {
    prob.a.mul_t_into(&w.y, aty);
    for j in 0..prob.num_vars() {
        let xi = w.x[j] + sigma * (aty[j] - prob.c[j]);
        let x_bar = project(j, xi);
        out.xi[j] = xi;
        out.w_bar.x[j] = x_bar;
        out.w_bar.z[j] = (x_bar - xi) / sigma;
    }
}

#[allow(clippy::too_many_arguments)]
fn y_half_step(
    prob: &LpProblem,
    sigma: f64,
    lambda_a: f64,
    w: &Iterate,
    reflected: &mut [f64],
    a_reflected: &mut [f64],
    out: &mut PrStepTrace,
    project: impl Fn(usize, f64) -> f64,
) {
    for j in 0..prob.num_vars() {
        reflected[j] = 2.0 * out.w_bar.x[j] - w.x[j];
    }
    prob.a.mul_into(reflected, a_reflected);
    let s = sigma * lambda_a;
    for i in 0..prob.num_rows() {
        let zeta = a_reflected[i] - s * w.y[i];
        out.zeta[i] = zeta;
        out.w_bar.y[i] = (project(i, zeta) - zeta) / s;
    }
}

fn reflect(rho: f64, w: &Iterate, w_bar: &Iterate, w_hat: &mut Iterate) {
    let blend = |bar: &[f64], cur: &[f64], out: &mut [f64]| {
        for ((o, &b), &c) in out.iter_mut().zip(bar).zip(cur) {
            *o = (1.0 + rho) * b - rho * c;
        }
    };
    blend(&w_bar.y, &w.y, &mut w_hat.y);
    blend(&w_bar.z, &w.z, &mut w_hat.z);
    blend(&w_bar.x, &w.x, &mut w_hat.x);
}

/// Halpern update `w0 / (t + 2) + (t + 1) / (t + 2) * w_hat`.
pub fn halpern_step(w0: &Iterate, w_hat: &Iterate, t: usize) -> Iterate {
    let mut out = w_hat.clone();
    halpern_into(w0, w_hat, t, &mut out);
    out
}

pub(crate) fn halpern_into(w0: &Iterate, w_hat: &Iterate, t: usize, out: &mut Iterate) {
    let anchor = 1.0 / (t as f64 + 2.0);
    let keep = (t as f64 + 1.0) / (t as f64 + 2.0);
    let mix = |a: &[f64], h: &[f64], o: &mut [f64]| {
        for ((o, &a), &h) in o.iter_mut().zip(a).zip(h) {
            *o = anchor * a + keep * h;
        }
    };
    mix(&w0.y, &w_hat.y, &mut out.y);
    mix(&w0.z, &w_hat.z, &mut out.z);
    mix(&w0.x, &w_hat.x, &mut out.x);
}

/// Folds the `count`-th sample into a running uniform mean.
pub fn epr_accumulate(mean: &mut Iterate, sample: &Iterate, count: usize) {
    assert!(count >= 1, "epr_accumulate: count starts at 1");
    let inv = 1.0 / count as f64;
    let fold = |m: &mut [f64], s: &[f64]| {
        for (m, &s) in m.iter_mut().zip(s) {
            *m += (s - *m) * inv;
        }
    };
    fold(&mut mean.y, &sample.y);
    fold(&mut mean.z, &sample.z);
    fold(&mut mean.x, &sample.x);
}

/// Uniform running means of the `w_bar` and `w` sequences of the ergodic
/// method.
///
/// The `w` mean starts from `w^0`, so after `k + 1` steps it averages
/// `w^0, ..., w^{k+1}`. That is the sequence the Halpern iterates reproduce
/// when the splitting map is affine. Only the `w_bar` mean carries a
/// convergence guarantee.
#[derive(Debug, Clone)]
pub struct ErgodicAverages {
    w_bar_mean: Option<Iterate>,
    w_bar_count: usize,
    w_mean: Iterate,
    w_count: usize,
}

impl ErgodicAverages {
    pub fn new(w0: &Iterate) -> Self {
        Self {
            w_bar_mean: None,
            w_bar_count: 0,
            w_mean: w0.clone(),
            w_count: 1,
        }
    }

    pub fn push(&mut self, w_bar: &Iterate, w_next: &Iterate) {
        self.w_bar_count += 1;
        match &mut self.w_bar_mean {
            Some(mean) => epr_accumulate(mean, w_bar, self.w_bar_count),
            None => self.w_bar_mean = Some(w_bar.clone()),
        }
        self.w_count += 1;
        epr_accumulate(&mut self.w_mean, w_next, self.w_count);
    }

    pub fn w_bar_average(&self) -> Option<&Iterate> {
        self.w_bar_mean.as_ref()
    }

    pub fn w_average(&self) -> &Iterate {
        &self.w_mean
    }

    pub fn steps(&self) -> usize {
        self.w_bar_count
    }
}

/// Dual/primal pair `u = (y, x)` of the PDHG iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDual {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

impl PrimalDual {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            y: vec![0.0; m],
            x: vec![0.0; n],
        }
    }
}

impl From<&Iterate> for PrimalDual {
    fn from(w: &Iterate) -> Self {
        Self {
            y: w.y.clone(),
            x: w.x.clone(),
        }
    }
}

fn check_pdhg_params(eta: f64, omega: f64, gamma: f64) -> Result<()> {
    if !(eta > 0.0 && omega > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "stepsize and primal weight must be positive, got {eta} and {omega}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

/// PDHG map with stepsize `eta` and primal weight `omega`:
///
/// ```text
/// x_bar = Pi_C(x - (eta / omega) (c - A^T y))
/// y_bar = y - eta omega A (2 x_bar - x) - eta omega Pi_{-K}(y / (eta omega) - A (2 x_bar - x))
/// ```
pub fn pdhg_map(u: &PrimalDual, prob: &LpProblem, eta: f64, omega: f64) -> Result<PrimalDual> {
    check_pdhg_params(eta, omega, 0.0)?;
    check_len("pdhg y", prob.num_rows(), u.y.len())?;
    check_len("pdhg x", prob.num_vars(), u.x.len())?;
    let primal_step = eta / omega;
    let dual_step = eta * omega;
    let aty = prob.a.spmv_t(&u.y)?;
    let x_bar: Vec<f64> = (0..prob.num_vars())
        .map(|j| {
            clamp(
                u.x[j] - primal_step * (prob.c[j] - aty[j]),
                prob.var_lower[j],
                prob.var_upper[j],
            )
        })
        .collect();
    let reflected: Vec<f64> = x_bar.iter().zip(&u.x).map(|(&b, &x)| 2.0 * b - x).collect();
    let a_ref = prob.a.spmv(&reflected)?;
    let y_bar: Vec<f64> = (0..prob.num_rows())
        .map(|i| {
            let arg = u.y[i] / dual_step - a_ref[i];
            // projection onto -K = [-u_c, -l_c]
            let proj = clamp(arg, -prob.row_upper[i], -prob.row_lower[i]);
            u.y[i] - dual_step * a_ref[i] - dual_step * proj
        })
        .collect();
    Ok(PrimalDual { y: y_bar, x: x_bar })
}

/// Anchored, reflected PDHG step:
/// `u^{k+1} = (k+1)/(k+2) ((1 + gamma) PDHG(u^k) - gamma u^k) + u^0 / (k+2)`.
#[allow(clippy::too_many_arguments)]
pub fn rhpdhg_step(
    u: &PrimalDual,
    u0: &PrimalDual,
    prob: &LpProblem,
    eta: f64,
    omega: f64,
    gamma: f64,
    k: usize,
) -> Result<PrimalDual> {
    check_pdhg_params(eta, omega, gamma)?;
    let bar = pdhg_map(u, prob, eta, omega)?;
    let keep = (k as f64 + 1.0) / (k as f64 + 2.0);
    let anchor = 1.0 / (k as f64 + 2.0);
    let combine = |b: &[f64], cur: &[f64], start: &[f64]| -> Vec<f64> {
        b.iter()
            .zip(cur)
            .zip(start)
            .map(|((&b, &c), &s)| anchor * s + keep * ((1.0 + gamma) * b - gamma * c))
            .collect()
    };
    let next = PrimalDual {
        y: combine(&bar.y, &u.y, &u0.y),
        x: combine(&bar.x, &u.x, &u0.x),
    };
    if next.y.iter().chain(&next.x).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reflected PDHG step"));
    }
    Ok(next)
}

/// Stepsize and primal weight that make the reflected PDHG iteration with
/// `gamma = 1` reproduce the HPR iteration with the given `sigma`, `lambda_A`.
pub fn pdhg_parameters(sigma: f64, lambda_a: f64) -> (f64, f64) {
    let eta = 1.0 / lambda_a.sqrt();
    (eta, eta / sigma)
}

/// Which bounds the projections inside a splitting step landed on.
pub fn identify_active_sets(trace: &PrStepTrace, prob: &LpProblem) -> ActiveSets {
    let vars = (0..prob.num_vars())
        .map(|j| activity(trace.w_bar.x[j], prob.var_lower[j], prob.var_upper[j]))
        .collect();
    let rows = if trace.zeta.is_empty() {
        // linear-solve path: every row is a finite equality
        (0..prob.num_rows())
            .map(|i| activity(prob.row_lower[i], prob.row_lower[i], prob.row_upper[i]))
            .collect()
    } else {
        (0..prob.num_rows())
            .map(|i| {
                let p = clamp(trace.zeta[i], prob.row_lower[i], prob.row_upper[i]);
                activity(p, prob.row_lower[i], prob.row_upper[i])
            })
            .collect()
    };
    ActiveSets { vars, rows }
}

/// The splitting map `w -> w_hat` with both projections frozen to fixed
/// faces: active coordinates are pinned to their bound, inactive ones pass
/// through unchanged. The result is affine in `w`.
pub struct FrozenAffineMap<'a> {
    prob: &'a LpProblem,
    cfg: EngineConfig,
    active: ActiveSets,
    factor: Option<AatFactor>,
}

pub fn frozen_affine_map<'a>(active: ActiveSets, prob: &'a LpProblem, cfg: &EngineConfig) -> Result<FrozenAffineMap<'a>> {
    cfg.validate()?;
    check_len("active variable set", prob.num_vars(), active.vars.len())?;
    check_len("active row set", prob.num_rows(), active.rows.len())?;
    let factor = if cfg.t1_zero_path {
        Some(AatFactor::new(&prob.a)?)
    } else {
        None
    };
    Ok(FrozenAffineMap {
        prob,
        cfg: *cfg,
        active,
        factor,
    })
}

fn pinned(act: Activity, value: f64, lower: f64, upper: f64) -> f64 {
    match act {
        Activity::Inactive => value,
        Activity::Lower => lower,
        Activity::Upper => upper,
    }
}

impl FrozenAffineMap<'_> {
    pub fn active_sets(&self) -> &ActiveSets {
        &self.active
    }

    pub fn apply(&self, w: &Iterate) -> Result<Iterate> {
        let prob = self.prob;
        w.check_dims(prob)?;
        let EngineConfig { sigma, lambda_a, mode, .. } = self.cfg;
        let (m, n) = (prob.num_rows(), prob.num_vars());
        let mut out = PrStepTrace::zeros(m, n);
        let mut aty = vec![0.0; n];
        x_half_step(prob, sigma, w, &mut aty, &mut out, |j, xi| {
            pinned(self.active.vars[j], xi, prob.var_lower[j], prob.var_upper[j])
        });
        match &self.factor {
            Some(f) => out.w_bar.y = y_update_t1_zero(&out.w_bar.z, &out.w_bar.x, prob, sigma, f)?,
            None => {
                let mut reflected = vec![0.0; n];
                let mut a_reflected = vec![0.0; m];
                y_half_step(prob, sigma, lambda_a, w, &mut reflected, &mut a_reflected, &mut out, |i, z| {
                    pinned(self.active.rows[i], z, prob.row_lower[i], prob.row_upper[i])
                });
            }
        }
        reflect(mode.reflection(), w, &out.w_bar, &mut out.w_hat);
        Ok(out.w_hat)
    }

    /// Linear part `R w = F(w) - F(0)`.
    pub fn apply_linear(&self, w: &Iterate) -> Result<Iterate> {
        let zero = Iterate::zeros(self.prob.num_rows(), self.prob.num_vars());
        Ok(self.apply(w)?.sub(&self.apply(&zero)?))
    }
}

/// Euclidean distance between two `(y, x)` pairs relative to the larger norm.
pub fn relative_pair_distance(a: &PrimalDual, b: &PrimalDual) -> f64 {
    let diff: f64 = a
        .y
        .iter()
        .zip(&b.y)
        .chain(a.x.iter().zip(&b.x))
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = norm(&a.y).hypot(norm(&a.x)).max(norm(&b.y).hypot(norm(&b.x))).max(1.0);
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kkt_residual;

    const INF: f64 = f64::INFINITY;

    /// m = n = 1, A = [1], c = 0, C = R, K = {1}.
    fn scalar_fixture() -> LpProblem {
        let a = SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        LpProblem::new(vec![0.0], a, vec![1.0], vec![1.0], vec![-INF], vec![INF]).unwrap()
    }

    #[test]
    fn pr_step_on_scalar_fixture() {
        let prob = scalar_fixture();
        let cfg = EngineConfig::new(1.0, 1.0);
        let tr = pr_step(&Iterate::zeros(1, 1), &prob, &cfg).unwrap();
        assert_eq!(tr.xi, vec![0.0]);
        assert_eq!(tr.w_bar, Iterate::new(vec![1.0], vec![0.0], vec![0.0]));
        assert_eq!(tr.zeta, vec![0.0]);
        assert_eq!(tr.w_hat, Iterate::new(vec![2.0], vec![0.0], vec![0.0]));
    }

    #[test]
    fn pr_step_without_rows() {
        let prob = LpProblem::new(vec![1.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![0.0], vec![INF]).unwrap();
        let cfg = EngineConfig::new(2.0, 1.0);
        let tr = pr_step(&Iterate::new(vec![], vec![0.0], vec![3.0]), &prob, &cfg).unwrap();
        assert_eq!(tr.xi, vec![1.0]);
        assert_eq!(tr.w_bar.x, vec![1.0]);
        assert_eq!(tr.w_bar.z, vec![0.0]);
    }

    #[test]
    fn hdr_mode_returns_w_bar() {
        let prob = scalar_fixture();
        let cfg = EngineConfig::new(1.0, 1.0).with_mode(Mode::Hdr);
        let tr = pr_step(&Iterate::new(vec![0.3], vec![0.0], vec![0.2]), &prob, &cfg).unwrap();
        assert_eq!(tr.w_hat, tr.w_bar);
    }

    #[test]
    fn kkt_point_is_a_fixed_point() {
        // min x s.t. x >= 1 (row), x free: x* = 1, y* = 1, z* = 0
        let a = SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        let prob = LpProblem::new(vec![1.0], a, vec![1.0], vec![INF], vec![-INF], vec![INF]).unwrap();
        let w = Iterate::new(vec![1.0], vec![0.0], vec![1.0]);
        assert_eq!(kkt_residual(&w, &prob).unwrap().norm(), 0.0);
        for sigma in [0.5, 1.0, 3.0] {
            let tr = pr_step(&w, &prob, &EngineConfig::new(sigma, 1.5)).unwrap();
            assert!(tr.w_hat.sub(&w).norm() <= 1e-12);
        }
    }

    #[test]
    fn halpern_weights() {
        let w0 = Iterate::new(vec![2.0], vec![0.0], vec![4.0]);
        let wh = Iterate::new(vec![0.0], vec![2.0], vec![8.0]);
        assert_eq!(halpern_step(&w0, &wh, 0), Iterate::new(vec![1.0], vec![1.0], vec![6.0]));
        assert_eq!(halpern_step(&wh, &wh, 5), wh);
        let zero = Iterate::zeros(1, 1);
        let h = halpern_step(&zero, &wh, 8);
        assert!(h.sub(&wh.lincomb(0.9, &zero, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn running_means() {
        let v = Iterate::new(vec![3.0], vec![1.0], vec![-2.0]);
        let mut mean = v.clone();
        epr_accumulate(&mut mean, &v, 2);
        assert_eq!(mean, v);

        let mut mean = Iterate::new(vec![0.0], vec![0.0], vec![0.0]);
        epr_accumulate(&mut mean, &Iterate::new(vec![2.0], vec![2.0], vec![2.0]), 2);
        assert_eq!(mean, Iterate::new(vec![1.0], vec![1.0], vec![1.0]));

        let mut avg = ErgodicAverages::new(&Iterate::zeros(1, 1));
        assert!(avg.w_bar_average().is_none());
        avg.push(&v, &Iterate::new(vec![2.0], vec![2.0], vec![2.0]));
        assert_eq!(avg.w_bar_average().unwrap(), &v);
        assert_eq!(avg.w_average(), &Iterate::new(vec![1.0], vec![1.0], vec![1.0]));
    }

    #[test]
    fn pdhg_step_on_scalar_fixture() {
        // eta = omega = 1, gamma = 1, from zero:
        // x_bar = Pi_R(0 - (0 - 0)) = 0; A(2 x_bar - x) = 0;
        // y_bar = 0 - 0 - Pi_{[-1,-1]}(0) = 1; u1 = 1/2 (2 (1, 0) - 0) + 0 = (1, 0)
        let prob = scalar_fixture();
        let u0 = PrimalDual::zeros(1, 1);
        let bar = pdhg_map(&u0, &prob, 1.0, 1.0).unwrap();
        assert_eq!(bar, PrimalDual { y: vec![1.0], x: vec![0.0] });
        let u1 = rhpdhg_step(&u0, &u0, &prob, 1.0, 1.0, 1.0, 0).unwrap();
        assert_eq!(u1, PrimalDual { y: vec![1.0], x: vec![0.0] });
        // and it agrees with HPR from the same start (sigma = 1, lambda = 1)
        let tr = pr_step(&Iterate::zeros(1, 1), &prob, &EngineConfig::new(1.0, 1.0)).unwrap();
        let w1 = halpern_step(&Iterate::zeros(1, 1), &tr.w_hat, 0);
        assert_eq!(PrimalDual::from(&w1), u1);
    }

    #[test]
    fn pdhg_fixed_point_is_unchanged() {
        let a = SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        let prob = LpProblem::new(vec![1.0], a, vec![1.0], vec![INF], vec![-INF], vec![INF]).unwrap();
        let u = PrimalDual { y: vec![1.0], x: vec![1.0] };
        let next = rhpdhg_step(&u, &u, &prob, 0.7, 1.3, 0.5, 12).unwrap();
        assert!(relative_pair_distance(&next, &u) < 1e-15);
    }

    #[test]
    fn pdhg_parameter_validation() {
        let prob = scalar_fixture();
        let u = PrimalDual::zeros(1, 1);
        assert!(rhpdhg_step(&u, &u, &prob, 1.0, 1.0, 1.5, 0).is_err());
        assert!(rhpdhg_step(&u, &u, &prob, 0.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn t1_zero_solve() {
        let a = SparseMatrix::from_dense(&[vec![2.0]], 1).unwrap();
        let prob = LpProblem::new(vec![0.0], a, vec![2.0], vec![2.0], vec![-INF], vec![INF]).unwrap();
        let f = AatFactor::new(&prob.a).unwrap();
        let y = y_update_t1_zero(&[0.0], &[0.0], &prob, 1.0, &f).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);

        let eye = LpProblem::new(vec![0.0; 2], SparseMatrix::identity(2), vec![0.0; 2], vec![0.0; 2], vec![-INF; 2], vec![INF; 2])
            .unwrap();
        let f = AatFactor::new(&eye.a).unwrap();
        assert_eq!(y_update_t1_zero(&[0.0; 2], &[0.0; 2], &eye, 1.0, &f).unwrap(), vec![0.0, 0.0]);
        assert_eq!(f.solve(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn singular_aat_is_reported_and_engine_falls_back() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]], 2).unwrap();
        assert!(matches!(AatFactor::new(&a), Err(Error::Singular(_))));
        let prob = LpProblem::new(vec![0.0; 2], a, vec![1.0; 2], vec![1.0; 2], vec![0.0; 2], vec![INF; 2]).unwrap();
        let mut cfg = EngineConfig::new(1.0, 4.2);
        cfg.t1_zero_path = true;
        let engine = Engine::new(&prob, cfg).unwrap();
        assert!(!engine.uses_linear_solve());
    }

    #[test]
    fn t1_zero_path_rejects_inequality_rows() {
        let a = SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        let prob = LpProblem::new(vec![0.0], a, vec![0.0], vec![1.0], vec![0.0], vec![INF]).unwrap();
        let mut cfg = EngineConfig::new(1.0, 1.0);
        cfg.t1_zero_path = true;
        assert!(Engine::new(&prob, cfg).is_err());
    }

    #[test]
    fn active_sets_on_fixtures() {
        let prob = scalar_fixture();
        let tr = pr_step(&Iterate::zeros(1, 1), &prob, &EngineConfig::new(1.0, 1.0)).unwrap();
        let act = identify_active_sets(&tr, &prob);
        assert_eq!(act.row_indices(), vec![0]);
        assert!(act.var_indices().is_empty());

        // xi below the lower bound of a variable
        let prob = LpProblem::new(vec![5.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![0.0], vec![1.0]).unwrap();
        let tr = pr_step(&Iterate::new(vec![], vec![0.0], vec![0.5]), &prob, &EngineConfig::new(1.0, 1.0)).unwrap();
        assert_eq!(identify_active_sets(&tr, &prob).vars, vec![Activity::Lower]);
        // strictly interior xi
        let prob = LpProblem::new(vec![0.0], SparseMatrix::zeros(0, 1), vec![], vec![], vec![0.0], vec![1.0]).unwrap();
        let tr = pr_step(&Iterate::new(vec![], vec![0.0], vec![0.5]), &prob, &EngineConfig::new(1.0, 1.0)).unwrap();
        assert!(identify_active_sets(&tr, &prob).var_indices().is_empty());
    }

    #[test]
    fn frozen_map_matches_pr_step_on_fixture() {
        let prob = scalar_fixture();
        let cfg = EngineConfig::new(1.0, 1.0);
        let w = Iterate::zeros(1, 1);
        let tr = pr_step(&w, &prob, &cfg).unwrap();
        let map = frozen_affine_map(identify_active_sets(&tr, &prob), &prob, &cfg).unwrap();
        assert_eq!(map.apply(&w).unwrap(), tr.w_hat);
    }

    #[test]
    fn fully_clamped_map_has_constant_x_bar() {
        let prob = LpProblem::new(vec![1.0, -1.0], SparseMatrix::zeros(0, 2), vec![], vec![], vec![0.0, 0.0], vec![1.0, 1.0])
            .unwrap();
        let cfg = EngineConfig::new(1.0, 1.0).with_mode(Mode::Hdr);
        let act = ActiveSets {
            vars: vec![Activity::Lower, Activity::Upper],
            rows: vec![],
        };
        let map = frozen_affine_map(act, &prob, &cfg).unwrap();
        for x in [[0.3, 0.1], [5.0, -2.0]] {
            let out = map.apply(&Iterate::new(vec![], vec![0.0, 0.0], x.to_vec())).unwrap();
            assert_eq!(out.x, vec![0.0, 1.0]);
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("HPR".parse::<Mode>().unwrap(), Mode::Hpr);
        assert_eq!("rhpdhg:0.5".parse::<Mode>().unwrap(), Mode::Rhpdhg { gamma: 0.5 });
        assert!("admm".parse::<Mode>().is_err());
        assert_eq!(Mode::Rhpdhg { gamma: 0.25 }.reflection(), 0.25);
    }
}
