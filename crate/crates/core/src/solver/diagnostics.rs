//! Runtime check of the O(1/k) iteration bounds of the unrestarted method.
//!
//! With `R0 = |w^0 - w*|_M`, every iteration must satisfy
//!
//! ```text
//! |w_bar^{k+1} - w^k|_M          <= R0 / (k+1)
//! |R(w_bar^{k+1})|               <= (sigma (|A| + |sqrt T1|) + 1) / sqrt(sigma) * R0 / (k+1)
//! -|x*| / sqrt(sigma) R0/(k+1)   <= h(y_bar, z_bar) <= (3 R0 + |x*| / sqrt(sigma)) R0 / (k+1)
//! ```
//!
//! where `h` is the dual objective error. Both `|A|` and `|sqrt T1|` are
//! bounded above by `sqrt(lambda_A)`.

use crate::adaptive::{m_distance, MNormContext};
use crate::engine::{halpern_into, Engine, EngineConfig, PrStepTrace};
use crate::error::{Error, Result};
use crate::model::{dual_objective, kkt_residual, Iterate, LpProblem};
use crate::sparse::norm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub r0: f64,
    pub kkt_constant: f64,
    pub iterations: usize,
    /// Largest observed `lhs / rhs` for each of the three bounds.
    pub max_ratio_m: f64,
    pub max_ratio_kkt: f64,
    pub max_ratio_obj: f64,
}

impl ComplexityReport {
    pub fn max_ratio(&self) -> f64 {
        self.max_ratio_m.max(self.max_ratio_kkt).max(self.max_ratio_obj)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub struct ComplexityMonitor<'a> {
    prob: &'a LpProblem,
    ctx: MNormContext<'a>,
    sigma: f64,
    r0: f64,
    kkt_constant: f64,
    x_star_norm: f64,
    dual_star: f64,
    report: ComplexityReport,
}

impl<'a> ComplexityMonitor<'a> {
    pub fn new(prob: &'a LpProblem, sigma: f64, lambda_a: f64, w0: &Iterate, w_star: &Iterate) -> Result<Self> {
        w0.check_dims(prob)?;
        w_star.check_dims(prob)?;
        let ctx = MNormContext::new(sigma, lambda_a, &prob.a);
        let r0 = m_distance(w0, w_star, &ctx);
        let root_lambda = lambda_a.sqrt();
        let kkt_constant = (sigma * (root_lambda + root_lambda) + 1.0) / sigma.sqrt();
        let dual_star = dual_objective(&w_star.y, &w_star.z, prob);
        if !dual_star.is_finite() {
            return Err(Error::InvalidProblem("reference point is not dual feasible".into()));
        }
        Ok(Self {
            prob,
            ctx,
            sigma,
            r0,
            kkt_constant,
            x_star_norm: norm(&w_star.x),
            dual_star,
            report: ComplexityReport {
                r0,
                kkt_constant,
                iterations: 0,
                max_ratio_m: 0.0,
                max_ratio_kkt: 0.0,
                max_ratio_obj: 0.0,
            },
        })
    }

    /// Records iteration `k`: the iterate `w^k` and the step output `w_bar^{k+1}`.
    pub fn observe(&mut self, k: usize, w_k: &Iterate, w_bar_next: &Iterate) -> Result<()> {
        let scale = self.r0 / (k as f64 + 1.0);
        let step = m_distance(w_bar_next, w_k, &self.ctx);
        let kkt = kkt_residual(w_bar_next, self.prob)?.norm();
        let h = dual_objective(&w_bar_next.y, &w_bar_next.z, self.prob) - self.dual_star;
        let lead = self.x_star_norm / self.sigma.sqrt();
        let obj_ratio = if h >= 0.0 {
            ratio(h, (3.0 * self.r0 + lead) * scale)
        } else {
            ratio(-h, lead * scale)
        };

        let rep = &mut self.report;
        rep.iterations = rep.iterations.max(k + 1);
        rep.max_ratio_m = rep.max_ratio_m.max(ratio(step, scale));
        rep.max_ratio_kkt = rep.max_ratio_kkt.max(ratio(kkt, self.kkt_constant * scale));
        rep.max_ratio_obj = rep.max_ratio_obj.max(obj_ratio);
        Ok(())
    }

    pub fn report(&self) -> ComplexityReport {
        self.report
    }
}

/// Runs `iterations` unrestarted Halpern steps from `w0` with fixed
/// `sigma`, `lambda_A` and reports the worst bound ratios against `w_star`.
pub fn complexity_diagnostics(
    prob: &LpProblem,
    cfg: &EngineConfig,
    w0: &Iterate,
    w_star: &Iterate,
    iterations: usize,
) -> Result<ComplexityReport> {
    if cfg.t1_zero_path {
        return Err(Error::InvalidConfig("bound diagnostics use the lambda_A proximal term".into()));
    }
    let mut engine = Engine::new(prob, *cfg)?;
    let mut monitor = ComplexityMonitor::new(prob, cfg.sigma, cfg.lambda_a, w0, w_star)?;
    let mut w = w0.clone();
    let mut next = w0.clone();
    let mut step = PrStepTrace::zeros(prob.num_rows(), prob.num_vars());
    for k in 0..iterations {
        engine.step_into(&w, &mut step)?;
        monitor.observe(k, &w, &step.w_bar)?;
        halpern_into(w0, &step.w_hat, k, &mut next);
        std::mem::swap(&mut w, &mut next);
    }
    Ok(monitor.report())
}
