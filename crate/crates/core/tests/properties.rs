use std::f64::consts::PI;

use porohom::fem::{
    assemble_boundary_mass, assemble_mass, assemble_stiffness, solve_cg, SparseMatrix,
};
use porohom::geometry::{
    build_cell_mesh, build_perforated_mesh, geometric_coefficients, CellGeometry, DomainSpec,
    EdgeTag, Mesh, ObstaclePolygon,
};
use proptest::prelude::*;

/// Star-shaped polygons around the cell center are simple and CCW.
fn star_polygon() -> impl Strategy<Value = ObstaclePolygon> {
    (3usize..24, 0.0..(2.0 * PI))
        .prop_flat_map(|(n, phase)| {
            (
                Just(n),
                Just(phase),
                prop::collection::vec(0.08..0.34f64, n),
            )
        })
        .prop_map(|(n, phase, radii)| {
            let pts = radii
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let a = phase + 2.0 * PI * k as f64 / n as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect();
            ObstaclePolygon::new(pts).unwrap()
        })
}

fn cell_with(p: ObstaclePolygon) -> CellGeometry {
    CellGeometry::with_obstacle(p, 0.05).unwrap()
}

fn check_periodic(mesh: &Mesh) {
    let v = mesh.vertices();
    for &(s, m) in mesh.periodic_pairs() {
        let d = [v[s][0] - v[m][0], v[s][1] - v[m][1]];
        let unit = |a: f64| (a.abs() - 1.0).abs() <= 1e-12 || a.abs() <= 1e-12;
        assert!(unit(d[0]) && unit(d[1]) && (d[0].abs() + d[1].abs()) >= 1.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cell_mesh_area_and_perimeter(p in star_polygon(), m in 14usize..40) {
        let cell = cell_with(p);
        let mesh = build_cell_mesh(&cell, m).unwrap();
        let (theta, sigma) = geometric_coefficients(&cell);
        prop_assert!((mesh.area() - theta).abs() < 1e-10);
        prop_assert!((mesh.tagged_length(EdgeTag::Obstacle) - sigma).abs() < 1e-10);
        prop_assert_eq!(mesh.tagged_loop_count(EdgeTag::Obstacle), 1);
        check_periodic(&mesh);
        // Every slave vertex of the outer boundary is paired.
        let slaves: std::collections::HashSet<usize> =
            mesh.periodic_pairs().iter().map(|p| p.0).collect();
        for v in mesh.tagged_vertices(EdgeTag::PeriodicSlave) {
            prop_assert!(slaves.contains(&v));
        }
    }

    #[test]
    fn perforated_area_scales(p in star_polygon(), n in 1usize..4) {
        let cell = cell_with(p);
        let eps = 1.0 / n as f64;
        let l = 1.5;
        let domain = DomainSpec::new(l, eps * l).unwrap();
        let mesh = build_perforated_mesh(&domain, &cell, 16).unwrap();
        let (theta, sigma) = geometric_coefficients(&cell);
        prop_assert!((mesh.area() - theta * l * l).abs() < 1e-10);
        let eps = domain.epsilon();
        prop_assert!((mesh.tagged_length(EdgeTag::Obstacle) * eps - sigma * l * l).abs() < 1e-10);
        prop_assert_eq!(mesh.tagged_loop_count(EdgeTag::Obstacle), n * n);
        prop_assert!(mesh.periodic_pairs().is_empty());
    }

    #[test]
    fn operator_invariants(p in star_polygon(), x in prop::collection::vec(-1.0..1.0f64, 1000)) {
        let mesh = build_cell_mesh(&cell_with(p), 16).unwrap();
        let k = assemble_stiffness(&mesh, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let m = assemble_mass(&mesh);
        let b = assemble_boundary_mass(&mesh, EdgeTag::Obstacle);
        for a in [&k, &m, &b] {
            prop_assert_eq!(a.asymmetry(), 0.0);
        }
        let ones = vec![1.0; mesh.num_vertices()];
        prop_assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        prop_assert!((m.bilinear(&ones, &ones) - mesh.area()).abs() < 1e-12 * mesh.area());
        let perim = mesh.tagged_length(EdgeTag::Obstacle);
        prop_assert!((b.bilinear(&ones, &ones) - perim).abs() < 1e-12 * perim);
        let xv: Vec<f64> = x.iter().cycle().take(mesh.num_vertices()).copied().collect();
        prop_assert!(k.bilinear(&xv, &xv) >= -1e-12);
        prop_assert!(m.bilinear(&xv, &xv) >= 0.0);
        prop_assert!(b.bilinear(&xv, &xv) >= 0.0);
    }

    #[test]
    fn cg_matches_dense_solve(
        n in 1usize..50,
        seed in prop::collection::vec(-1.0..1.0f64, 2600),
    ) {
        // A = G G^T + n I is SPD.
        let g: Vec<Vec<f64>> = (0..n).map(|i| seed[i * n..(i + 1) * n].to_vec()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>();
            }
            a[i][i] += n as f64;
        }
        let b: Vec<f64> = seed[2500..2500 + n.min(100)].iter().copied().cycle().take(n).collect();
        let x = solve_cg(&SparseMatrix::from_dense(&a).unwrap(), &b, 1e-13, 10 * n).unwrap().x;
        let oracle = dense_solve(a, b);
        for (u, v) in x.iter().zip(&oracle) {
            prop_assert!((u - v).abs() <= 1e-8 * v.abs().max(1.0));
        }
    }
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

#[test]
fn refinement_shrinks_h() {
    let cell = cell_with(ObstaclePolygon::regular(64, 0.25).unwrap());
    let h: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&m| build_cell_mesh(&cell, m).unwrap().h())
        .collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
}

#[test]
fn dump_round_trip() {
    let cell = cell_with(ObstaclePolygon::regular(12, 0.3).unwrap());
    let mesh = build_cell_mesh(&cell, 16).unwrap();
    let text = mesh.to_dump();
    let back = Mesh::from_dump(&text).unwrap();
    assert_eq!(back.to_dump(), text);
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.periodic_pairs(), mesh.periodic_pairs());
}
