//! Homogenized problem on the unperforated domain:
//! `(theta + sigma) u' - div(Q grad u) + theta kappa u = theta f + sigma g`.

use std::sync::Arc;

use crate::cell::{sym_eigenvalues, HomogenizedCoefficients};
use crate::fem::{assemble_mass, assemble_stiffness, SparseMatrix};
use crate::geometry::{EdgeTag, Mesh};
use crate::problem::{ProblemData, TimeGrid};
use crate::stepping::{self, nodal, Scheme, StepOptions, TransientSolution};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LimitProblem {
    coefficients: HomogenizedCoefficients,
    data: ProblemData,
    mesh: Arc<Mesh>,
    grid: TimeGrid,
}

impl LimitProblem {
    pub fn new(
        coefficients: HomogenizedCoefficients,
        data: ProblemData,
        mesh: Arc<Mesh>,
        grid: TimeGrid,
    ) -> Result<Self> {
        let q = coefficients.q;
        if (q[0][1] - q[1][0]).abs() > 1e-8 * q[0][0].abs().max(q[1][1].abs()) {
            return Err(Error::Argument(format!("Q is not symmetric: {q:?}")));
        }
        if !(sym_eigenvalues(&q)[0] > 0.0) {
            return Err(Error::Argument(format!(
                "Q is not positive definite: {q:?}"
            )));
        }
        let (theta, sigma) = (coefficients.theta, coefficients.sigma);
        if !(theta > 0.0 && theta <= 1.0) || !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Argument(format!(
                "invalid coefficients theta = {theta}, sigma = {sigma}"
            )));
        }
        if mesh.edges_with_tag(EdgeTag::Obstacle).next().is_some() {
            return Err(Error::Argument("limit mesh must not be perforated".into()));
        }
        Ok(Self {
            coefficients,
            data,
            mesh,
            grid,
        })
    }

    pub fn coefficients(&self) -> &HomogenizedCoefficients {
        &self.coefficients
    }

    pub fn data(&self) -> &ProblemData {
        &self.data
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn scheme(&self) -> Result<Scheme> {
        let c = &self.coefficients;
        let m = assemble_mass(&self.mesh);
        let kq = assemble_stiffness(&self.mesh, &c.q)?;
        Ok(Scheme {
            s: SparseMatrix::linear_combination(&[(c.theta + c.sigma, &m)])?,
            a: SparseMatrix::linear_combination(&[(1.0, &kq), (c.theta * self.data.kappa(), &m)])?,
            m,
        })
    }

    /// `(theta + sigma) M / dt + K_Q + theta kappa M` before constraints.
    pub fn step_matrix(&self) -> Result<SparseMatrix> {
        self.scheme()?.step_matrix(self.grid.dt())
    }
}

pub fn run_limit(problem: &LimitProblem, cg_tol: f64) -> Result<TransientSolution> {
    run_limit_with(problem, &StepOptions::with_tol(cg_tol))
}

pub fn run_limit_with(problem: &LimitProblem, opts: &StepOptions) -> Result<TransientSolution> {
    let scheme = problem.scheme()?;
    let (theta, sigma) = (problem.coefficients.theta, problem.coefficients.sigma);
    let mesh = &problem.mesh;
    let data = &problem.data;
    let load = |t: f64| {
        let mf = scheme.m.mul_vec(&nodal(mesh, |x| data.f(x, t)));
        let mg = scheme.m.mul_vec(&nodal(mesh, |x| data.g(x, t)));
        mf.iter()
            .zip(&mg)
            .map(|(a, b)| theta * a + sigma * b)
            .collect()
    };
    stepping::integrate(
        mesh.clone(),
        &scheme,
        |x| data.u0(x),
        load,
        &problem.grid,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_square_mesh;
    use std::f64::consts::PI;

    fn coeffs() -> HomogenizedCoefficients {
        HomogenizedCoefficients {
            q: [[0.6, 0.05], [0.05, 0.7]],
            theta: 0.8,
            sigma: 1.5,
        }
    }

    #[test]
    fn zero_data() {
        let mesh = Arc::new(build_square_mesh(1.0, 6).unwrap());
        let data = ProblemData::new(1.0, 0.1).unwrap();
        let p = LimitProblem::new(coeffs(), data, mesh, TimeGrid::new(0.1, 3).unwrap()).unwrap();
        let sol = run_limit(&p, 1e-10).unwrap();
        assert!(sol.states().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn step_matrix_two_ways() {
        let mesh = Arc::new(build_square_mesh(1.0, 6).unwrap());
        let data = ProblemData::new(2.0, 0.1).unwrap();
        let grid = TimeGrid::new(0.1, 4).unwrap();
        let c = coeffs();
        let p = LimitProblem::new(c, data, mesh.clone(), grid).unwrap();
        let generic = p.step_matrix().unwrap().to_dense();
        let dt = grid.dt();
        let mut direct = vec![vec![0.0; mesh.num_vertices()]; mesh.num_vertices()];
        for (k, tri) in mesh.triangles().iter().enumerate() {
            let pts = mesh.triangle_points(k);
            let ke = crate::fem::local_stiffness(pts, &c.q);
            let me = crate::fem::local_mass(pts);
            for a in 0..3 {
                for b in 0..3 {
                    direct[tri[a]][tri[b]] +=
                        ke[a][b] + ((c.theta + c.sigma) / dt + c.theta * 2.0) * me[a][b];
                }
            }
        }
        for (r1, r2) in generic.iter().zip(&direct) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn weighted_decay() {
        let mesh = Arc::new(build_square_mesh(1.0, 8).unwrap());
        let data = ProblemData::new(1.0, 0.3)
            .unwrap()
            .with_initial(|p| (PI * p[0]).sin() * (PI * p[1]).sin());
        let p = LimitProblem::new(
            coeffs(),
            data,
            mesh.clone(),
            TimeGrid::new(0.3, 15).unwrap(),
        )
        .unwrap();
        let sol = run_limit(&p, 1e-12).unwrap();
        let e: Vec<f64> = sol.records().iter().map(|r| r.energy).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        let ext = mesh.tagged_vertices(EdgeTag::ExteriorDirichlet);
        assert!(sol
            .states()
            .iter()
            .all(|u| ext.iter().all(|&v| u[v] == 0.0)));
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mesh = Arc::new(build_square_mesh(1.0, 2).unwrap());
        let data = ProblemData::new(1.0, 0.1).unwrap();
        let grid = TimeGrid::new(0.1, 1).unwrap();
        let mut c = coeffs();
        c.q = [[1.0, 2.0], [2.0, 1.0]];
        assert!(LimitProblem::new(c, data.clone(), mesh.clone(), grid).is_err());
        let mut c = coeffs();
        c.theta = 0.0;
        assert!(LimitProblem::new(c, data, mesh, grid).is_err());
    }
}
