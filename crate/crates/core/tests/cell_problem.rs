use porohom::cell::{
    compute_effective_tensor, corrector_rhs, homogenized_matrix, solve_cell_corrector_with,
};
use porohom::fem::{apply_constraints, assemble_mass, assemble_stiffness, CgOptions, DofMap};
use porohom::geometry::{build_cell_mesh, CellGeometry, ObstaclePolygon};
use porohom::Error;
use proptest::prelude::*;

fn cell(p: ObstaclePolygon) -> CellGeometry {
    CellGeometry::with_obstacle(p, 0.05).unwrap()
}

fn ngon() -> CellGeometry {
    cell(ObstaclePolygon::regular(64, 0.25).unwrap())
}

#[test]
fn square_obstacle_is_isotropic() {
    let t = compute_effective_tensor(
        &cell(ObstaclePolygon::square(0.5).unwrap()),
        64,
        &CgOptions::default(),
    )
    .unwrap();
    assert!((t.q[0][0] - t.q[1][1]).abs() <= 1e-6);
    assert!(t.q[0][1].abs() <= 1e-6);
    assert!(t.q[0][0] > 0.0 && t.q[0][0] < 0.75);
    assert_eq!((t.theta, t.sigma), (0.75, 2.0));
}

#[test]
fn ngon_bounds() {
    let t = compute_effective_tensor(&ngon(), 64, &CgOptions::default()).unwrap();
    assert!(t.q[0][0] <= t.theta);
    assert!(t.q[0][1].abs() <= 1e-6);
    assert!(t.is_positive_definite());
    assert_eq!(t.subdivisions, 64);
    assert_eq!(t.obstacle, "ngon(64,0.25)");
}

#[test]
fn corrector_invariants() {
    let mesh = build_cell_mesh(&ngon(), 32).unwrap();
    let tol = 1e-10;
    let opts = CgOptions::with_tol(tol);
    let w1 = solve_cell_corrector_with(&mesh, 1, &opts).unwrap();
    let w2 = solve_cell_corrector_with(&mesh, 2, &opts).unwrap();
    let weights = assemble_mass(&mesh).row_sums();
    let k = assemble_stiffness(&mesh, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let dofs = DofMap::for_mesh(&mesh).unwrap();
    for w in [&w1, &w2] {
        let mean: f64 = weights.iter().zip(&w.values).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-10);
        for &(s, m) in mesh.periodic_pairs() {
            assert_eq!(w.values[s], w.values[m]);
        }
        // Condensed residual, with the compatible right-hand side.
        let b = corrector_rhs(&mesh, w.direction).unwrap();
        let (kc, mut bc) = apply_constraints(&k, &b, &dofs).unwrap();
        let avg = bc.iter().sum::<f64>() / bc.len() as f64;
        bc.iter_mut().for_each(|v| *v -= avg);
        let kw = kc.mul_vec(&dofs.restrict(&w.values));
        let r: f64 = kw
            .iter()
            .zip(&bc)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = bc.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r <= tol * bn * (1.0 + 1e-6), "{r} vs {}", tol * bn);
    }
    // Galerkin orthogonality: int (e_i + grad w_i) . grad w_j = 0.
    for (wi, wj) in [(&w1, &w1), (&w1, &w2), (&w2, &w1), (&w2, &w2)] {
        let bi = corrector_rhs(&mesh, wi.direction).unwrap();
        let v = k.bilinear(&wj.values, &wi.values)
            - bi.iter().zip(&wj.values).map(|(a, b)| a * b).sum::<f64>();
        assert!(v.abs() <= 10.0 * tol, "{v}");
    }
    let t = homogenized_matrix(&mesh, &w1, &w2).unwrap();
    assert!(t.form_discrepancy() <= 10.0 * tol);
    assert!(matches!(
        homogenized_matrix(&mesh, &w2, &w1),
        Err(Error::Argument(_))
    ));
    let other = build_cell_mesh(&ngon(), 16).unwrap();
    assert!(matches!(
        homogenized_matrix(&other, &w1, &w2),
        Err(Error::Argument(_))
    ));
}

#[test]
fn axis_relabeling_swaps_diagonal() {
    let rect =
        ObstaclePolygon::new(vec![[-0.3, -0.1], [0.3, -0.1], [0.3, 0.1], [-0.3, 0.1]]).unwrap();
    let a = cell(rect);
    let b = a.transposed();
    let opts = CgOptions::with_tol(1e-12);
    let ta = compute_effective_tensor(&a, 40, &opts).unwrap();
    let tb = compute_effective_tensor(&b, 40, &opts).unwrap();
    assert!((ta.q[0][0] - tb.q[1][1]).abs() <= 1e-8);
    assert!((ta.q[1][1] - tb.q[0][0]).abs() <= 1e-8);
    // Blocking the y direction more than x.
    assert!(ta.q[1][1] < ta.q[0][0]);
}

#[test]
fn clearance_below_two_over_m() {
    let c = cell(ObstaclePolygon::regular(32, 0.4).unwrap());
    assert!(matches!(
        compute_effective_tensor(&c, 16, &CgOptions::default()),
        Err(Error::Geometry(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn upper_bound_and_definiteness(
        n in 3usize..20,
        r in 0.05..0.4f64,
        xi in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 100),
    ) {
        let t = compute_effective_tensor(&cell(ObstaclePolygon::regular(n, r).unwrap()), 24, &CgOptions::default())
            .unwrap();
        prop_assert!((t.q[0][1] - t.q[1][0]).abs() <= 1e-8);
        prop_assert!(t.eigenvalues()[0] > 0.0);
        for (a, b) in xi.into_iter().chain([(1.0, 0.0), (0.0, 1.0)]) {
            let nrm = (a * a + b * b).sqrt().max(1e-3);
            let e = [a / nrm, b / nrm];
            prop_assert!(t.quadratic_form(e) <= t.theta * (e[0] * e[0] + e[1] * e[1]) + 1e-8);
        }
    }
}
