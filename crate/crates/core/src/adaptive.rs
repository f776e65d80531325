//! Weighted merit function, restart rules and penalty updates.
//!
//! The seminorm is induced by
//!
//! ```text
//!     [ sigma A A^T + sigma T1   0   A       ]
//! M = [ 0                        0   0       ]
//!     [ A^T                      0   I/sigma ]
//! ```
//!
//! so with `T1 = lambda_A I - A A^T` the quadratic form is
//! `sigma lambda_A |y|^2 + 2 <y, A x> + |x|^2 / sigma`, and with `T1 = 0` it is
//! `|sqrt(sigma) A^T y + x / sqrt(sigma)|^2`. The `z` block never enters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Iterate;
use crate::sparse::{dot, norm, SparseMatrix};

pub const DEFAULT_SIGMA_BOUNDS: (f64, f64) = (1e-8, 1e8);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProximalTerm {
    /// `T1 = lambda_A I - A A^T`
    Lambda(f64),
    /// `T1 = 0`
    Zero,
}

#[derive(Debug, Clone, Copy)]
pub struct MNormContext<'a> {
    pub sigma: f64,
    pub proximal: ProximalTerm,
    pub a: &'a SparseMatrix,
}

impl<'a> MNormContext<'a> {
    pub fn new(sigma: f64, lambda_a: f64, a: &'a SparseMatrix) -> Self {
        Self {
            sigma,
            proximal: ProximalTerm::Lambda(lambda_a),
            a,
        }
    }

    pub fn t1_zero(sigma: f64, a: &'a SparseMatrix) -> Self {
        Self {
            sigma,
            proximal: ProximalTerm::Zero,
            a,
        }
    }
}

/// `<w, M w>` without clamping; may be slightly negative from roundoff.
pub fn m_quadratic(w: &Iterate, ctx: &MNormContext) -> f64 {
    let sigma = ctx.sigma;
    let xx = dot(&w.x, &w.x) / sigma;
    match ctx.proximal {
        ProximalTerm::Lambda(lambda_a) => {
            let ax = ctx.a.spmv(&w.x).expect("x length matches A");
            sigma * lambda_a * dot(&w.y, &w.y) + 2.0 * dot(&w.y, &ax) + xx
        }
        ProximalTerm::Zero => {
            let aty = ctx.a.spmv_t(&w.y).expect("y length matches A");
            sigma * dot(&aty, &aty) + 2.0 * dot(&aty, &w.x) + xx
        }
    }
}

pub fn m_norm(w: &Iterate, ctx: &MNormContext) -> f64 {
    m_quadratic(w, ctx).max(0.0).sqrt()
}

/// `|a - b|_M` without materializing the difference's `z` block.
pub fn m_distance(a: &Iterate, b: &Iterate, ctx: &MNormContext) -> f64 {
    let diff = Iterate {
        y: a.y.iter().zip(&b.y).map(|(u, v)| u - v).collect(),
        z: Vec::new(),
        x: a.x.iter().zip(&b.x).map(|(u, v)| u - v).collect(),
    };
    m_norm(&diff, ctx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// Enables the three merit-based criteria.
    pub enabled: bool,
    /// Restart every `n` inner iterations regardless of the merit.
    pub fixed_period: Option<usize>,
}

impl Default for RestartConfig {
    fn default() -> Self {
        Self {
            alpha1: 0.2,
            alpha2: 0.8,
            alpha3: 0.36,
            enabled: true,
            fixed_period: None,
        }
    }
}

impl RestartConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn fixed(period: usize) -> Self {
        Self {
            enabled: false,
            fixed_period: Some(period),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 < 1.0 && 0.0 < self.alpha3 && self.alpha3 < 1.0;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "restart thresholds need 0 < alpha1 < alpha2 < 1 and 0 < alpha3 < 1, got ({}, {}, {})",
                self.alpha1, self.alpha2, self.alpha3
            )));
        }
        if self.fixed_period == Some(0) {
            return Err(Error::InvalidConfig("fixed restart period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartDecision {
    None,
    Sufficient,
    NecessaryNoProgress,
    LongLoop,
    Fixed,
}

impl RestartDecision {
    pub fn fires(self) -> bool {
        self != RestartDecision::None
    }
}

/// Evaluates the restart criteria in priority order: sufficient decay,
/// necessary decay without local progress, long inner loop, fixed period.
///
/// `t` is the inner-loop length and `k` the total iteration count.
pub fn check_restart(
    merit0: f64,
    merit_prev: f64,
    merit_curr: f64,
    t: usize,
    k: usize,
    cfg: &RestartConfig,
) -> RestartDecision {
    if cfg.enabled {
        if merit_curr <= cfg.alpha1 * merit0 {
            return RestartDecision::Sufficient;
        }
        if merit_curr <= cfg.alpha2 * merit0 && merit_curr > merit_prev {
            return RestartDecision::NecessaryNoProgress;
        }
        if t as f64 >= cfg.alpha3 * k as f64 {
            return RestartDecision::LongLoop;
        }
    }
    match cfg.fixed_period {
        Some(p) if t >= p => RestartDecision::Fixed,
        _ => RestartDecision::None,
    }
}

/// Observed primal and dual progress over one outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaUpdateInputs {
    pub delta_x: f64,
    pub delta_y: f64,
    /// `|x_bar|`, scales the degeneracy safeguard on `delta_x`.
    pub x_norm: f64,
    /// `|y_bar|`, scales the degeneracy safeguard on `delta_y`.
    pub y_norm: f64,
}

impl SigmaUpdateInputs {
    /// `delta_x = |x_bar - x_start|` and
    /// `delta_y = sqrt(|dy|_T1^2 + |A^T dy|^2)` with `dy = y_bar - y_start`,
    /// i.e. `sqrt(lambda_A) |dy|` or `|A^T dy|` depending on `T1`.
    pub fn from_progress(w_bar: &Iterate, w_start: &Iterate, ctx: &MNormContext) -> Self {
        let dx: Vec<f64> = w_bar.x.iter().zip(&w_start.x).map(|(a, b)| a - b).collect();
        let dy: Vec<f64> = w_bar.y.iter().zip(&w_start.y).map(|(a, b)| a - b).collect();
        let delta_y = match ctx.proximal {
            ProximalTerm::Lambda(lambda_a) => lambda_a.sqrt() * norm(&dy),
            ProximalTerm::Zero => norm(&ctx.a.spmv_t(&dy).expect("y length matches A")),
        };
        Self {
            delta_x: norm(&dx),
            delta_y,
            x_norm: norm(&w_bar.x),
            y_norm: norm(&w_bar.y),
        }
    }
}

/// `clamp(delta_x / delta_y, sigma_min, sigma_max)`, keeping `sigma_prev`
/// when either progress measure is at roundoff level.
pub fn sigma_update(inputs: &SigmaUpdateInputs, sigma_prev: f64, bounds: (f64, f64)) -> f64 {
    let eps = f64::EPSILON;
    let SigmaUpdateInputs {
        delta_x,
        delta_y,
        x_norm,
        y_norm,
    } = *inputs;
    if !(delta_x > eps * (1.0 + x_norm)) || !(delta_y > eps * (1.0 + y_norm)) {
        return sigma_prev;
    }
    let ratio = delta_x / delta_y;
    if !ratio.is_finite() {
        return sigma_prev;
    }
    ratio.clamp(bounds.0, bounds.1)
}
