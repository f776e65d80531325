//! Restarted Halpern Peaceman-Rachford driver.
//!
//! Each outer loop `r` runs Halpern steps anchored at its start point
//! `w^{r,0}`. When a restart criterion fires, the next loop starts from the
//! latest `w_bar` and `sigma` is re-estimated from the loop's primal and dual
//! progress. Termination is tested on the `w_bar` sequence, unscaled, against
//! the original problem data.

mod diagnostics;
mod scaling;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use diagnostics::{complexity_diagnostics, ComplexityMonitor, ComplexityReport};
pub use scaling::{apply_scaling, ruiz_equilibrate, ScaledProblem, Scaling};

use crate::adaptive::{
    check_restart, m_distance, sigma_update, MNormContext, ProximalTerm, RestartConfig, RestartDecision,
    SigmaUpdateInputs, DEFAULT_SIGMA_BOUNDS,
};
use crate::engine::{halpern_into, Engine, EngineConfig, ErgodicAverages, Mode, PrStepTrace};
use crate::error::{Error, Result};
use crate::model::{clamp, dual_objective, primal_objective, relative_residuals, Iterate, LpProblem, RelativeResiduals};
use crate::sparse::{estimate_lambda_a, DEFAULT_LAMBDA_SAFETY, DEFAULT_POWER_MAX_ITER, DEFAULT_POWER_REL_TOL};

/// Iterates with an entry above this magnitude are treated as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    /// Wall-clock limit in seconds, checked every `check_interval` iterations.
    pub time_limit: Option<f64>,
    pub iter_limit: usize,
    pub check_interval: usize,
    pub mode: Mode,
    pub restart: RestartConfig,
    pub sigma0: f64,
    pub adaptive_sigma: bool,
    pub sigma_bounds: (f64, f64),
    pub scaling: Scaling,
    pub lambda_safety: f64,
    pub power_rel_tol: f64,
    pub t1_zero_path: bool,
    /// Starting point in the coordinates of the original problem.
    pub warm_start: Option<Iterate>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            time_limit: None,
            iter_limit: 1_000_000,
            check_interval: 100,
            mode: Mode::Hpr,
            restart: RestartConfig::default(),
            sigma0: 1.0,
            adaptive_sigma: true,
            sigma_bounds: DEFAULT_SIGMA_BOUNDS,
            scaling: Scaling::default(),
            lambda_safety: DEFAULT_LAMBDA_SAFETY,
            power_rel_tol: DEFAULT_POWER_REL_TOL,
            t1_zero_path: false,
            warm_start: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.check_interval == 0 {
            return Err(Error::InvalidConfig("check interval must be at least 1".into()));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        let (lo, hi) = self.sigma_bounds;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::InvalidConfig(format!("bad sigma bounds ({lo}, {hi})")));
        }
        if let Some(limit) = self.time_limit {
            if !(limit >= 0.0) {
                return Err(Error::InvalidConfig(format!("time limit must be nonnegative, got {limit}")));
            }
        }
        self.restart.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    IterLimit,
    TimeLimit,
    NumericalError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::IterLimit => "iter_limit",
            Status::TimeLimit => "time_limit",
            Status::NumericalError => "numerical_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub r: usize,
    pub t: usize,
    pub sigma: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub rel_gap: f64,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub merit: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    /// Total iteration count at the restart.
    pub k: usize,
    /// Index of the outer loop that ended.
    pub r: usize,
    /// Length of that loop.
    pub t: usize,
    pub reason: RestartDecision,
    pub sigma_before: f64,
    pub sigma_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub mode: Mode,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `<c, x> + constant`, in the sense the problem was stated in.
    pub primal_obj: f64,
    /// Dual objective in the stated sense; infinite for sign-infeasible duals.
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub dual_obj: f64,
    pub rel_residuals: RelativeResiduals,
    pub iterations: usize,
    pub restarts: usize,
    pub sigma: f64,
    pub lambda_a: f64,
    pub solve_seconds: f64,
    pub message: Option<String>,
    pub trace: Vec<TraceRecord>,
    pub events: Vec<RestartEvent>,
}

impl SolveResult {
    pub fn iterate(&self) -> Iterate {
        Iterate::new(self.y.clone(), self.z.clone(), self.x.clone())
    }
}

/// Candidate output of the solve, kept in original coordinates.
struct Checked {
    w: Iterate,
    rr: RelativeResiduals,
}

fn badness(rr: &RelativeResiduals) -> f64 {
    rr.gap.min(f64::MAX).max(rr.primal).max(rr.dual)
}

fn unscaled_output(scaled: &ScaledProblem, w_bar: &Iterate, prob: &LpProblem) -> Iterate {
    let mut w = scaled.unscale(w_bar);
    // w_bar.x lies in the scaled box; undo roundoff from unscaling
    for (j, x) in w.x.iter_mut().enumerate() {
        *x = clamp(*x, prob.var_lower[j], prob.var_upper[j]);
    }
    w
}

/// Solves `prob` with the configured method.
pub fn solve(prob: &LpProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    prob.validate()?;
    cfg.validate()?;
    let start_time = Instant::now();
    let (m, n) = (prob.num_rows(), prob.num_vars());

    let scaled = apply_scaling(prob, cfg.scaling);
    let sp = &scaled.prob;
    let lambda_a = match estimate_lambda_a(&sp.a, cfg.power_rel_tol, DEFAULT_POWER_MAX_ITER, cfg.lambda_safety) {
        Ok(l) => l,
        // any positive value satisfies lambda_A >= |A|^2 = 0
        Err(Error::ZeroMatrix) => 1.0,
        Err(e) => return Err(e),
    };

    let mut sigma = cfg.sigma0.clamp(cfg.sigma_bounds.0, cfg.sigma_bounds.1);
    let mut engine = Engine::new(
        sp,
        EngineConfig {
            sigma,
            lambda_a,
            mode: cfg.mode,
            t1_zero_path: cfg.t1_zero_path,
        },
    )?;
    let proximal = if engine.uses_linear_solve() {
        ProximalTerm::Zero
    } else {
        ProximalTerm::Lambda(lambda_a)
    };

    let mut w = match &cfg.warm_start {
        Some(w0) => {
            w0.check_dims(prob)?;
            scaled.scale(w0)
        }
        None => Iterate::zeros(m, n),
    };
    let mut w_start = w.clone();
    let mut w_next = w.clone();
    let mut step = PrStepTrace::zeros(m, n);
    let mut averages = (cfg.mode == Mode::Epr).then(|| ErgodicAverages::new(&w));

    let restarts_allowed = !matches!(cfg.mode, Mode::Pr);
    // the merit drives the adaptive criteria; otherwise it is only traced
    let needs_merit = restarts_allowed && cfg.restart.enabled;
    let mut trace = Vec::new();
    let mut events = Vec::new();
    let (mut k, mut t, mut r) = (0usize, 0usize, 0usize);
    let (mut merit0, mut merit_prev) = (0.0f64, 0.0f64);
    let mut best: Option<Checked> = None;
    let mut status = Status::IterLimit;
    let mut message = None;
    let mut final_pick: Option<Checked> = None;

    while k < cfg.iter_limit {
        if let Err(e) = engine.step_into(&w, &mut step) {
            status = Status::NumericalError;
            message = Some(e.to_string());
            break;
        }
        let ctx = MNormContext {
            sigma,
            proximal,
            a: &sp.a,
        };

        match averages.as_mut() {
            Some(avg) => {
                w_next.clone_from(&step.w_hat);
                avg.push(&step.w_bar, &w_next);
            }
            None if cfg.mode.is_anchored() => halpern_into(&w_start, &step.w_hat, t, &mut w_next),
            None => w_next.clone_from(&step.w_hat),
        }
        k += 1;
        t += 1;
        // EPR measures the averaged progress |w^{r,0} - w^{r,t}|_M / t
        let merit_now = || match averages {
            Some(_) => m_distance(&w_start, &w_next, &ctx) / t as f64,
            None => m_distance(&w, &step.w_hat, &ctx),
        };
        let checkpoint = k % cfg.check_interval == 0 || k == cfg.iter_limit;
        let merit = if needs_merit || checkpoint || t == 1 {
            merit_now()
        } else {
            f64::NAN
        };

        let decision = if !restarts_allowed {
            RestartDecision::None
        } else if t == 1 {
            merit0 = merit;
            RestartDecision::None
        } else {
            check_restart(merit0, merit_prev, merit, t, k, &cfg.restart)
        };
        merit_prev = merit;

        let output = match &averages {
            Some(avg) => avg.w_bar_average().expect("at least one step taken"),
            None => &step.w_bar,
        };

        if checkpoint || decision.fires() {
            let merit = if merit.is_nan() { merit_now() } else { merit };
            let candidate = unscaled_output(&scaled, output, prob);
            let rr = relative_residuals(&candidate, prob);
            trace.push(TraceRecord {
                k,
                r,
                t,
                sigma,
                rel_gap: rr.gap,
                rel_primal: rr.primal,
                rel_dual: rr.dual,
                merit,
                seconds: start_time.elapsed().as_secs_f64(),
            });
            let checked = Checked { w: candidate, rr };
            if rr.satisfied(cfg.tol) {
                status = Status::Optimal;
                final_pick = Some(checked);
                break;
            }
            if best.as_ref().is_none_or(|b| badness(&rr) < badness(&b.rr)) {
                best = Some(checked);
            }
            if w_next.max_abs() > DIVERGENCE_THRESHOLD {
                status = Status::NumericalError;
                message = Some(format!("iterates diverged (|w| > {DIVERGENCE_THRESHOLD:e}) after {k} iterations"));
                break;
            }
            if let Some(limit) = cfg.time_limit {
                if start_time.elapsed().as_secs_f64() >= limit {
                    status = Status::TimeLimit;
                    break;
                }
            }
        }

        if decision.fires() {
            let restart_point = output.clone();
            let sigma_before = sigma;
            if cfg.adaptive_sigma {
                let inputs = SigmaUpdateInputs::from_progress(&restart_point, &w_start, &ctx);
                sigma = sigma_update(&inputs, sigma, cfg.sigma_bounds);
                engine.set_sigma(sigma);
            }
            events.push(RestartEvent {
                k,
                r,
                t,
                reason: decision,
                sigma_before,
                sigma_after: sigma,
            });
            w.clone_from(&restart_point);
            w_start = restart_point;
            if let Some(avg) = averages.as_mut() {
                *avg = ErgodicAverages::new(&w);
            }
            t = 0;
            r += 1;
        } else {
            std::mem::swap(&mut w, &mut w_next);
        }
    }

    if status == Status::IterLimit && k >= cfg.iter_limit && cfg.mode == Mode::Pr {
        message = Some(format!("no convergence within {} iterations", cfg.iter_limit));
    }
    let picked = match final_pick.or(best) {
        Some(c) => c,
        None => {
            let w0 = unscaled_output(&scaled, &w, prob);
            let rr = relative_residuals(&w0, prob);
            Checked { w: w0, rr }
        }
    };
    let Checked { w: out, rr } = picked;
    let primal_obj = prob.reported_objective(primal_objective(&out.x, prob));
    let dual_internal = dual_objective(&out.y, &out.z, prob);
    let dual_obj = if dual_internal.is_finite() {
        prob.reported_objective(-dual_internal + prob.obj_constant)
    } else {
        prob.reported_objective(f64::NEG_INFINITY)
    };

    Ok(SolveResult {
        status,
        mode: cfg.mode,
        x: out.x,
        y: out.y,
        z: out.z,
        primal_obj,
        dual_obj,
        rel_residuals: rr,
        iterations: k,
        restarts: r,
        sigma,
        lambda_a,
        solve_seconds: start_time.elapsed().as_secs_f64(),
        message,
        trace,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    const INF: f64 = f64::INFINITY;

    fn tiny() -> LpProblem {
        // min -x  s.t.  x <= 1,  0 <= x <= 10
        let a = SparseMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        LpProblem::new(vec![-1.0], a, vec![-INF], vec![1.0], vec![0.0], vec![10.0]).unwrap()
    }

    #[test]
    fn scalar_example() {
        let res = solve(&tiny(), &SolverConfig::default()).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert!((res.x[0] - 1.0).abs() < 1e-7);
        assert!((res.primal_obj + 1.0).abs() < 1e-7);
        assert!(res.rel_residuals.max() <= 1e-8);
    }

    #[test]
    fn zero_objective_is_solved_at_a_feasible_point() {
        let mut p = tiny();
        p.c = vec![0.0];
        let res = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert!(res.x[0] <= 1.0 + 1e-8 && res.x[0] >= 0.0);
        assert!(res.primal_obj.abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_configs() {
        let p = tiny();
        for cfg in [
            SolverConfig { tol: 0.0, ..Default::default() },
            SolverConfig { check_interval: 0, ..Default::default() },
            SolverConfig { sigma0: -1.0, ..Default::default() },
            SolverConfig { sigma_bounds: (1.0, 0.5), ..Default::default() },
            SolverConfig { restart: RestartConfig::fixed(0), ..Default::default() },
        ] {
            assert!(matches!(solve(&p, &cfg), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn iteration_limit_is_reported() {
        let cfg = SolverConfig { iter_limit: 1, tol: 1e-14, ..Default::default() };
        let res = solve(&tiny(), &cfg).unwrap();
        assert_eq!(res.iterations, 1);
        assert_ne!(res.status, Status::Optimal);
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn zero_time_limit_stops_at_first_check() {
        let cfg = SolverConfig {
            time_limit: Some(0.0),
            tol: 1e-14,
            check_interval: 5,
            restart: RestartConfig::disabled(),
            ..Default::default()
        };
        let res = solve(&tiny(), &cfg).unwrap();
        assert_eq!(res.status, Status::TimeLimit);
        assert_eq!(res.iterations, 5);
    }

    #[test]
    fn warm_start_at_solution_stops_immediately() {
        let w = Iterate::new(vec![-1.0], vec![0.0], vec![1.0]);
        let cfg = SolverConfig { warm_start: Some(w), check_interval: 1, ..Default::default() };
        let res = solve(&tiny(), &cfg).unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn status_names() {
        assert_eq!(Status::IterLimit.as_str(), "iter_limit");
        assert_eq!(serde_json::to_string(&Status::NumericalError).unwrap(), "\"numerical_error\"");
    }
}
