//! Seeded random LPs with a planted, strictly complementary optimum.
//!
//! A primal point `x*` and a dual point `(y*, z*)` are drawn first, then the
//! bounds are placed so that every active bound carries a nonzero multiplier
//! of the right sign and every inactive one carries zero. Setting
//! `c = A^T y* + z*` makes `(y*, z*, x*)` a KKT point.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{primal_objective, Iterate, LpProblem};
use crate::sparse::SparseMatrix;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone)]
pub struct PlantedLp {
    pub prob: LpProblem,
    /// A KKT point of `prob`.
    pub solution: Iterate,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    pub rows: usize,
    pub cols: usize,
    /// Probability that an off-pattern entry of `A` is nonzero.
    pub density: f64,
    /// Allow variables without any finite bound.
    pub free_vars: bool,
}

impl GeneratorOptions {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            density: 0.4,
            free_vars: true,
        }
    }
}

fn multiplier(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.2..1.5)
}

fn matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut trips = Vec::new();
    for i in 0..m {
        for j in 0..n {
            // a cyclic diagonal keeps every row and column nonempty
            let forced = n > 0 && j == i % n || m > 0 && i == j % m;
            if forced || rng.random::<f64>() < density {
                let mag = rng.random_range(0.25..2.0);
                let v = if rng.random::<bool>() { mag } else { -mag };
                trips.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, &trips).expect("generated entries are finite and in range")
}

/// Generates an instance from `seed`; identical inputs give identical output.
pub fn planted_lp(seed: u64, opts: GeneratorOptions) -> PlantedLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (opts.rows, opts.cols);
    let a = matrix(&mut rng, m, n, opts.density);

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut vl = vec![0.0; n];
    let mut vu = vec![0.0; n];
    for j in 0..n {
        let roll: f64 = rng.random();
        let base = rng.random_range(-2.0..2.0);
        let width = rng.random_range(0.5..3.0);
        if roll < 0.3 {
            (vl[j], vu[j], x[j], z[j]) = (base, base + width, base, multiplier(&mut rng));
        } else if roll < 0.45 {
            (vl[j], vu[j], x[j], z[j]) = (base - width, base, base, -multiplier(&mut rng));
        } else if roll < 0.6 {
            (vl[j], vu[j], x[j], z[j]) = (base, INF, base, multiplier(&mut rng));
        } else if roll < 0.85 || !opts.free_vars {
            let inner = rng.random_range(0.2..0.8);
            (vl[j], vu[j], x[j]) = (base, base + width, base + inner * width);
        } else {
            (vl[j], vu[j], x[j]) = (-INF, INF, base);
        }
    }

    let ax = a.spmv(&x).expect("dimensions agree");
    let mut y = vec![0.0; m];
    let mut rl = vec![0.0; m];
    let mut ru = vec![0.0; m];
    for i in 0..m {
        let r = ax[i];
        let roll: f64 = rng.random();
        let slack = rng.random_range(0.5..2.0);
        if roll < 0.3 {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (rl[i], ru[i], y[i]) = (r, r, s * multiplier(&mut rng));
        } else if roll < 0.55 {
            (rl[i], ru[i], y[i]) = (r, INF, multiplier(&mut rng));
        } else if roll < 0.7 {
            (rl[i], ru[i], y[i]) = (-INF, r, -multiplier(&mut rng));
        } else if roll < 0.9 {
            (rl[i], ru[i]) = (r - slack, r + rng.random_range(0.5..2.0));
        } else {
            (rl[i], ru[i]) = (r - slack, INF);
        }
    }

    let aty = a.spmv_t(&y).expect("dimensions agree");
    let c: Vec<f64> = aty.iter().zip(&z).map(|(a, z)| a + z).collect();
    let prob = LpProblem::new(c, a, rl, ru, vl, vu).expect("generated bounds are ordered");
    let objective = primal_objective(&x, &prob);
    PlantedLp {
        prob,
        solution: Iterate::new(y, z, x),
        objective,
    }
}

/// `count` instances with seeds `base_seed, base_seed + 1, ...`.
pub fn planted_suite(base_seed: u64, count: usize, opts: GeneratorOptions) -> Vec<PlantedLp> {
    (0..count as u64).map(|i| planted_lp(base_seed + i, opts)).collect()
}
