#![allow(dead_code)]

use std::path::PathBuf;

use hprlp::ObjSense;

const INF: f64 = f64::INFINITY;

/// Hand-derived contents of one fixture file.
pub struct Expected {
    pub file: &'static str,
    pub c: Vec<f64>,
    /// `(row, col, value)`, column-major
    pub triplets: Vec<(usize, usize, f64)>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
    pub obj_constant: f64,
    pub sense: ObjSense,
    pub integer_columns: Vec<usize>,
    pub warnings: usize,
}

pub fn fixture_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(file)
}

fn base(file: &'static str) -> Expected {
    Expected {
        file,
        c: vec![],
        triplets: vec![],
        row_lower: vec![],
        row_upper: vec![],
        var_lower: vec![],
        var_upper: vec![],
        obj_constant: 0.0,
        sense: ObjSense::Minimize,
        integer_columns: vec![],
        warnings: 0,
    }
}

pub fn fixtures() -> Vec<Expected> {
    vec![
        Expected {
            c: vec![-1.0, -2.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 2.0), (0, 1, 1.0), (1, 1, -1.0)],
            row_lower: vec![-INF, -INF],
            row_upper: vec![4.0, 3.0],
            var_lower: vec![0.0, 0.0],
            var_upper: vec![3.0, 2.5],
            ..base("basic_l.mps")
        },
        Expected {
            c: vec![1.0, 2.0, 3.0],
            triplets: vec![(0, 0, 1.0), (2, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, 1.0), (2, 2, -1.0)],
            row_lower: vec![2.0, 3.0, -1.0],
            row_upper: vec![INF, INF, INF],
            var_lower: vec![0.0; 3],
            var_upper: vec![INF; 3],
            ..base("ge_rows.mps")
        },
        Expected {
            c: vec![2.0, 3.0, 1.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, -1.0), (0, 2, 1.0), (2, 2, 1.0)],
            row_lower: vec![4.0, 1.0, -INF],
            row_upper: vec![4.0, 1.0, 2.0],
            var_lower: vec![0.0; 3],
            var_upper: vec![INF; 3],
            ..base("eq_rows.mps")
        },
        Expected {
            c: vec![1.0, 1.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, 2.0)],
            row_lower: vec![3.0, 4.0],
            row_upper: vec![4.0, 6.0],
            var_lower: vec![0.0; 2],
            var_upper: vec![INF; 2],
            ..base("ranges_l.mps")
        },
        Expected {
            c: vec![-1.0, -1.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, -1.0)],
            row_lower: vec![2.0, 1.0],
            row_upper: vec![5.0, 2.5],
            var_lower: vec![0.0; 2],
            var_upper: vec![INF; 2],
            ..base("ranges_g.mps")
        },
        Expected {
            c: vec![1.0, -1.0, 1.0],
            triplets: vec![(0, 0, 1.0), (2, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, -1.0), (2, 2, 1.0)],
            row_lower: vec![3.0, -3.0, 2.0],
            row_upper: vec![5.0, 1.0, 2.0],
            var_lower: vec![0.0; 3],
            var_upper: vec![10.0; 3],
            ..base("ranges_e.mps")
        },
        Expected {
            c: vec![-1.0, 1.0, 1.0],
            triplets: vec![(1, 0, 1.0), (1, 1, 1.0), (0, 2, 1.0)],
            row_lower: vec![-3.0, -INF],
            row_upper: vec![INF, 6.0],
            var_lower: vec![0.0, -2.0, -INF],
            var_upper: vec![4.0, 5.0, -1.0],
            warnings: 1,
            ..base("bounds_up_lo.mps")
        },
        Expected {
            c: vec![0.0, 1.0, -1.0, 1.0],
            triplets: vec![(0, 0, -1.0), (0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)],
            row_lower: vec![1.0, -INF],
            row_upper: vec![1.0, 10.0],
            var_lower: vec![2.5, -INF, -INF, 1.0],
            var_upper: vec![2.5, INF, 3.0, INF],
            ..base("bounds_fx_fr_mi_pl.mps")
        },
        Expected {
            c: vec![-1.0, -1.0, 1.0],
            triplets: vec![(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)],
            row_lower: vec![-INF],
            row_upper: vec![3.0],
            var_lower: vec![0.0, 1.0, -5.0],
            var_upper: vec![1.0, 4.0, -2.0],
            ..base("bounds_bv_li_ui.mps")
        },
        Expected {
            // maximize 3x + 2y, stored as minimize -3x - 2y
            c: vec![-3.0, -2.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, 3.0)],
            row_lower: vec![-INF, -INF],
            row_upper: vec![4.0, 6.0],
            var_lower: vec![0.0; 2],
            var_upper: vec![3.0, INF],
            sense: ObjSense::Maximize,
            ..base("objsense_max.mps")
        },
        Expected {
            c: vec![-1.0, -2.0, -1.0],
            triplets: vec![(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)],
            row_lower: vec![-INF],
            row_upper: vec![5.5],
            var_lower: vec![0.0; 3],
            var_upper: vec![2.0, 3.0, 1.0],
            integer_columns: vec![0, 1],
            ..base("integer_markers.mps")
        },
        Expected {
            c: vec![1.0, -1.0],
            triplets: vec![(0, 0, 1.0), (0, 1, 1.0)],
            row_lower: vec![2.0],
            row_upper: vec![2.0],
            var_lower: vec![0.0; 2],
            var_upper: vec![INF, 1.5],
            warnings: 1,
            ..base("comments_no_endata.mps")
        },
        Expected {
            c: vec![3.0, 1.0],
            triplets: vec![(0, 0, 1.0), (1, 0, 2.0), (0, 1, 1.0), (1, 1, 1.0)],
            row_lower: vec![2.0, -INF],
            row_upper: vec![INF, 6.0],
            var_lower: vec![0.0; 2],
            var_upper: vec![INF; 2],
            obj_constant: 10.0,
            // dropped free row and the summed duplicate
            warnings: 2,
            ..base("fixed_format.mps")
        },
    ]
}

/// Bitwise comparison of two float slices (so `-0.0 != 0.0` and
/// infinities must match exactly).
pub fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Checks a loaded fixture against its expectation; returns a description
/// of the first mismatch.
pub fn compare(exp: &Expected, got: &hprlp::mps::MpsProblem) -> Result<(), String> {
    let p = &got.problem;
    let trip_ok = {
        let t = p.a.triplets();
        t.len() == exp.triplets.len()
            && t.iter().zip(&exp.triplets).all(|(a, b)| a.0 == b.0 && a.1 == b.1 && a.2.to_bits() == b.2.to_bits())
    };
    let checks: [(&str, bool); 9] = [
        ("c", bits_equal(&p.c, &exp.c)),
        ("A triplets", trip_ok),
        ("row lower", bits_equal(&p.row_lower, &exp.row_lower)),
        ("row upper", bits_equal(&p.row_upper, &exp.row_upper)),
        ("var lower", bits_equal(&p.var_lower, &exp.var_lower)),
        ("var upper", bits_equal(&p.var_upper, &exp.var_upper)),
        ("objective constant", p.obj_constant.to_bits() == exp.obj_constant.to_bits()),
        ("sense", p.sense == exp.sense),
        ("integer columns", got.integer_columns == exp.integer_columns),
    ];
    if let Some((what, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(format!("{}: {what} differs", exp.file));
    }
    if got.warnings.len() != exp.warnings {
        return Err(format!("{}: expected {} warnings, got {:?}", exp.file, exp.warnings, got.warnings));
    }
    Ok(())
}
