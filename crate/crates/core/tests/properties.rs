use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use ctstokes::experiment::{csv_string, parse_csv, ResultRow};
use ctstokes::linalg::{cg_solve, CgOptions, EnvelopeCholesky, SparseMatrix};
use ctstokes::mesh::{build_structured_mesh, Rect};
use ctstokes::scheme::TimeGrid;

fn spd(entries: &[f64], n: usize) -> (SparseMatrix, DMatrix<f64>) {
    let b = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    let a = &b * b.transpose() + DMatrix::identity(n, n) * (n as f64);
    let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).iter().copied().collect()).collect();
    (SparseMatrix::from_dense(&rows), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mesh_invariants(nx in 1usize..12, ny in 1usize..12, w in 0.5f64..3.0, h in 0.5f64..3.0) {
        let mesh = build_structured_mesh(Rect::new(-w, w, -h, 2.0 * h).unwrap(), nx, ny).unwrap();
        prop_assert_eq!(mesh.num_vertices(), (nx + 1) * (ny + 1));
        prop_assert_eq!(mesh.num_triangles(), 2 * nx * ny);
        prop_assert_eq!(mesh.num_edges() + 1, mesh.num_vertices() + mesh.num_triangles());
        let s = mesh.statistics();
        prop_assert!(s.min_area > 0.0);
        prop_assert!((s.total_area - 2.0 * w * 3.0 * h).abs() < 1e-12 * s.total_area);
        for t in 0..mesh.num_triangles() {
            prop_assert!(mesh.signed_area(t) > 0.0);
        }
    }

    #[test]
    fn cg_and_cholesky_match_dense_lu(n in 2usize..9, entries in prop::collection::vec(-1.0f64..1.0, 64), rhs in prop::collection::vec(-1.0f64..1.0, 8)) {
        let (a, dense) = spd(&entries, n);
        let b = &rhs[..n];
        let oracle = dense.lu().solve(&DVector::from_column_slice(b)).unwrap();
        let (x, report) = cg_solve(&a, b, &CgOptions { tol: 1e-13, ..Default::default() }).unwrap();
        prop_assert!(report.converged);
        let chol = EnvelopeCholesky::factor(&a).unwrap().solve(b).unwrap();
        for i in 0..n {
            prop_assert!((x[i] - oracle[i]).abs() < 1e-9);
            prop_assert!((chol[i] - oracle[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn uniform_grids_hit_the_horizon(n in 1usize..400, dt in 1e-3f64..0.5) {
        let horizon = n as f64 * dt;
        let grid = TimeGrid::uniform(horizon, dt).unwrap();
        prop_assert_eq!(grid.num_steps(), n);
        prop_assert!((grid.horizon() - horizon).abs() <= 1e-12 * horizon);
        prop_assert_eq!(grid.interval_of(grid.horizon()).unwrap(), n - 1);
    }

    #[test]
    fn csv_round_trip_preserves_bits(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 15)) {
        let row = ResultRow::from_values(values.clone().try_into().unwrap());
        let back = parse_csv(&csv_string(&[row])).unwrap();
        for (a, b) in row.values().iter().zip(back[0].values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn envelope_is_bounded_by_dense_storage() {
    let (a, _) = spd(&[0.3; 64], 8);
    let f = EnvelopeCholesky::factor(&a).unwrap();
    assert!(f.envelope_size() <= 8 * 9 / 2);
    assert_relative_eq!(
        f.solve(&[1.0; 8]).unwrap().iter().sum::<f64>(),
        {
            let lu = DMatrix::from_fn(8, 8, |i, j| a.get(i, j)).lu();
            lu.solve(&DVector::from_element(8, 1.0)).unwrap().sum()
        },
        max_relative = 1e-12
    );
}
