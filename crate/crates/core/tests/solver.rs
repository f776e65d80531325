mod common;

use hprlp::adaptive::RestartConfig;
use hprlp::engine::EngineConfig;
use hprlp::instances::{planted_lp, GeneratorOptions};
use hprlp::model::relative_residuals;
use hprlp::mps::load_mps;
use hprlp::oracle::{oracle_solve, OracleStatus};
use hprlp::solver::{complexity_diagnostics, Scaling};
use hprlp::sparse::estimate_lambda_a;
use hprlp::{solve, Iterate, LpProblem, Mode, SparseMatrix, SolverConfig, Status};

const INF: f64 = f64::INFINITY;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn random_five_by_eight_matches_oracle() {
    let inst = planted_lp(2024, GeneratorOptions::new(5, 8));
    let orc = oracle_solve(&inst.prob).unwrap();
    assert_eq!(orc.status, OracleStatus::Optimal);
    let res = solve(&inst.prob, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, Status::Optimal);
    assert!(rel_err(res.primal_obj, orc.objective) < 1e-6);
    assert!(rel_err(res.dual_obj, orc.objective) < 1e-6);
}

#[test]
fn every_mode_reaches_the_oracle_objective() {
    let modes = [Mode::Hpr, Mode::Hdr, Mode::Epr, Mode::Rhpdhg { gamma: 0.5 }];
    for seed in 0..4 {
        let inst = planted_lp(seed, GeneratorOptions::new(4, 6));
        let target = oracle_solve(&inst.prob).unwrap().objective;
        for mode in modes {
            let cfg = SolverConfig { mode, tol: 1e-7, iter_limit: 200_000, ..Default::default() };
            let res = solve(&inst.prob, &cfg).unwrap();
            assert_eq!(res.status, Status::Optimal, "seed {seed} {mode}");
            assert!(rel_err(res.primal_obj, target) < 1e-5, "seed {seed} {mode}");
        }
    }
}

#[test]
fn scaling_does_not_change_the_answer() {
    let inst = planted_lp(77, GeneratorOptions::new(7, 7));
    let a = solve(&inst.prob, &SolverConfig { scaling: Scaling::None, ..Default::default() }).unwrap();
    let b = solve(&inst.prob, &SolverConfig::default()).unwrap();
    assert_eq!(a.status, Status::Optimal);
    assert_eq!(b.status, Status::Optimal);
    assert!(rel_err(a.primal_obj, b.primal_obj) < 1e-6);
}

#[test]
fn identical_runs_give_identical_traces() {
    let inst = planted_lp(5, GeneratorOptions::new(20, 30));
    let cfg = SolverConfig { check_interval: 10, ..Default::default() };
    let a = solve(&inst.prob, &cfg).unwrap();
    let b = solve(&inst.prob, &cfg).unwrap();
    let strip = |r: &hprlp::SolveResult| {
        r.trace
            .iter()
            .map(|t| (t.k, t.r, t.t, t.sigma.to_bits(), t.rel_gap.to_bits(), t.rel_primal.to_bits(), t.merit.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.events, b.events);
    assert_eq!(a.x, b.x);
}

#[test]
fn trace_has_checkpoints_and_restart_rows() {
    let inst = planted_lp(9, GeneratorOptions::new(15, 20));
    let res = solve(&inst.prob, &SolverConfig { check_interval: 50, ..Default::default() }).unwrap();
    assert!(!res.events.is_empty());
    for ev in &res.events {
        assert!(res.trace.iter().any(|t| t.k == ev.k), "restart at {} not traced", ev.k);
    }
    assert!(res.trace.windows(2).all(|w| w[0].k < w[1].k));
}

#[test]
fn plain_pr_stalls_where_hpr_converges() {
    let inst = planted_lp(101, GeneratorOptions::new(5, 8));
    let pr = solve(&inst.prob, &SolverConfig { mode: Mode::Pr, tol: 1e-6, iter_limit: 50_000, ..Default::default() }).unwrap();
    assert_eq!(pr.status, Status::IterLimit);
    assert!(pr.message.is_some());
    let hpr = solve(&inst.prob, &SolverConfig { tol: 1e-6, iter_limit: 50_000, ..Default::default() }).unwrap();
    assert_eq!(hpr.status, Status::Optimal);
}

#[test]
fn equality_form_uses_the_linear_solve_path() {
    // min x1 + 2 x2 + 3 x3  s.t.  x1 + x2 + x3 = 1, x1 - x3 = 0, x >= 0
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0, 1.0], vec![1.0, 0.0, -1.0]], 3).unwrap();
    let prob = LpProblem::new(vec![1.0, 2.0, 3.0], a, vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0; 3], vec![INF; 3]).unwrap();
    let target = oracle_solve(&prob).unwrap().objective;
    let res = solve(&prob, &SolverConfig { t1_zero_path: true, ..Default::default() }).unwrap();
    assert_eq!(res.status, Status::Optimal);
    assert!(rel_err(res.primal_obj, target) < 1e-6);
    assert!(solve(&planted_lp(1, GeneratorOptions::new(3, 4)).prob, &SolverConfig { t1_zero_path: true, ..Default::default() }).is_err());
}

#[test]
fn maximization_fixture_reports_stated_objective() {
    let prob = load_mps(common::fixture_path("objsense_max.mps")).unwrap().problem;
    let res = solve(&prob, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, Status::Optimal);
    assert!(rel_err(res.primal_obj, 11.0) < 1e-7);
    assert!(rel_err(res.dual_obj, 11.0) < 1e-6);
}

#[test]
fn objective_constant_is_reported_but_not_in_the_gap() {
    let prob = load_mps(common::fixture_path("fixed_format.mps")).unwrap().problem;
    let res = solve(&prob, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, Status::Optimal);
    assert!(rel_err(res.primal_obj, 12.0) < 1e-7);
    let rr = relative_residuals(&res.iterate(), &prob);
    assert!(rr.gap <= 1e-8);
}

#[test]
fn warm_start_shortens_the_solve() {
    let inst = planted_lp(31, GeneratorOptions::new(20, 25));
    let cold = solve(&inst.prob, &SolverConfig::default()).unwrap();
    let warm = solve(&inst.prob, &SolverConfig { warm_start: Some(cold.iterate()), ..Default::default() }).unwrap();
    assert_eq!(warm.status, Status::Optimal);
    assert!(warm.iterations < cold.iterations);
    assert!(solve(&inst.prob, &SolverConfig { warm_start: Some(Iterate::zeros(1, 1)), ..Default::default() }).is_err());
}

#[test]
fn fixed_period_restarts_fire_on_schedule() {
    let inst = planted_lp(8, GeneratorOptions::new(12, 16));
    let cfg = SolverConfig { restart: RestartConfig::fixed(64), tol: 1e-10, iter_limit: 640, ..Default::default() };
    let res = solve(&inst.prob, &cfg).unwrap();
    assert!(res.events.iter().all(|e| e.t == 64 && e.k % 64 == 0));
}

#[test]
fn unrestarted_iterates_respect_the_complexity_bounds() {
    let inst = planted_lp(3, GeneratorOptions::new(6, 9));
    let lambda = estimate_lambda_a(&inst.prob.a, 1e-6, 10_000, 1.05).unwrap();
    let cfg = EngineConfig::new(1.0, lambda);
    let w0 = Iterate::zeros(6, 9);
    let rep = complexity_diagnostics(&inst.prob, &cfg, &w0, &inst.solution, 2000).unwrap();
    assert_eq!(rep.iterations, 2000);
    assert!(rep.r0 > 0.0);
    assert!(rep.max_ratio() <= 1.0 + 1e-9, "{rep:?}");
}
