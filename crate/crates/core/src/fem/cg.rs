//! Jacobi-preconditioned conjugate gradients.

use super::sparse::SparseMatrix;
use super::{dot, norm};
use crate::{Error, Result};

pub const DEFAULT_CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `||Ax - b|| <= tol ||b||`.
    pub tol: f64,
    /// Defaults to `10 n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_CG_TOL,
            max_iter: None,
        }
    }
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual, recomputed from `b - Ax`.
    pub residual: f64,
}

/// CG bound to one matrix, reusable across right-hand sides.
pub struct CgSolver<'a> {
    matrix: &'a SparseMatrix,
    inv_diag: Vec<f64>,
    opts: CgOptions,
    mean_weights: Option<(Vec<f64>, f64)>,
}

impl<'a> CgSolver<'a> {
    pub fn new(matrix: &'a SparseMatrix, opts: CgOptions) -> Self {
        let inv_diag = matrix
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Self {
            matrix,
            inv_diag,
            opts,
            mean_weights: None,
        }
    }

    /// Project every iterate onto `{x : w.x = 0}` along the constant vector.
    /// Intended for semidefinite systems whose kernel is the constants.
    pub fn with_zero_mean(mut self, weights: Vec<f64>) -> Self {
        let total = weights.iter().sum();
        self.mean_weights = Some((weights, total));
        self
    }

    fn project(&self, x: &mut [f64]) {
        if let Some((w, total)) = &self.mean_weights {
            let mean = dot(w, x) / total;
            x.iter_mut().for_each(|v| *v -= mean);
        }
    }

    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>) -> Result<CgSolution> {
        self.solve_monitored(b, x0, |_, _| {})
    }

    /// As [`CgSolver::solve`], calling `monitor(iteration, x)` after every update.
    pub fn solve_monitored(
        &self,
        b: &[f64],
        x0: Option<&[f64]>,
        mut monitor: impl FnMut(usize, &[f64]),
    ) -> Result<CgSolution> {
        let a = self.matrix;
        let n = a.dim();
        if b.len() != n || x0.is_some_and(|x| x.len() != n) {
            return Err(Error::Argument(format!(
                "right-hand side length {} does not match matrix dimension {n}",
                b.len()
            )));
        }
        let max_iter = self.opts.max_iter.unwrap_or(10 * n.max(1));
        let bnorm = norm(b);
        let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(CgSolution {
                x,
                iterations: 0,
                residual: 0.0,
            });
        }
        self.project(&mut x);
        let target = self.opts.tol * bnorm;
        let mut ap = vec![0.0; n];
        let residual_of = |x: &[f64], ap: &mut Vec<f64>| -> Vec<f64> {
            a.mul_vec_into(x, ap);
            b.iter().zip(ap.iter()).map(|(bi, ai)| bi - ai).collect()
        };
        let mut r = residual_of(&x, &mut ap);
        if norm(&r) <= target {
            let residual = norm(&r) / bnorm;
            return Ok(CgSolution {
                x,
                iterations: 0,
                residual,
            });
        }
        let mut z: Vec<f64> = r
            .iter()
            .zip(&self.inv_diag)
            .map(|(ri, di)| ri * di)
            .collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);

        for it in 1..=max_iter {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Convergence {
                    iterations: it,
                    residual: norm(&r) / bnorm,
                    step: None,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            self.project(&mut x);
            monitor(it, &x);
            if norm(&r) <= target {
                let true_r = residual_of(&x, &mut ap);
                let rn = norm(&true_r);
                if rn <= target {
                    return Ok(CgSolution {
                        x,
                        iterations: it,
                        residual: rn / bnorm,
                    });
                }
                // Recursive residual drifted; restart from the true one.
                r = true_r;
                z = r
                    .iter()
                    .zip(&self.inv_diag)
                    .map(|(ri, di)| ri * di)
                    .collect();
                p.clone_from(&z);
                rz = dot(&r, &z);
                continue;
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let rn = norm(&residual_of(&x, &mut ap));
        Err(Error::Convergence {
            iterations: max_iter,
            residual: rn / bnorm,
            step: None,
        })
    }
}

/// Solves the symmetric positive-definite system `A x = b` from a zero guess.
pub fn solve_cg(
    matrix: &SparseMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let opts = CgOptions {
        tol,
        max_iter: Some(max_iter),
    };
    CgSolver::new(matrix, opts).solve(rhs, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.5];
        let s = solve_cg(&SparseMatrix::identity(3), &b, 1e-12, 10).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.x, b);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = solve_cg(&a, &[3.0, 3.0], 1e-14, 10).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal() {
        let d = [1.0, 4.0, 0.5, 10.0];
        let a = SparseMatrix::from_triplets(4, (0..4).map(|i| (i, i, d[i])).collect()).unwrap();
        let b = [1.0, 2.0, 3.0, 4.0];
        let s = solve_cg(&a, &b, 1e-10, 40).unwrap();
        for i in 0..4 {
            assert!((s.x[i] - b[i] / d[i]).abs() <= 1e-10 * b[i] / d[i]);
        }
    }

    #[test]
    fn zero_rhs() {
        let s = solve_cg(&SparseMatrix::identity(2), &[0.0, 0.0], 1e-10, 5).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.x, vec![0.0, 0.0]);
    }

    #[test]
    fn maxiter_exceeded() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, t).unwrap();
        let err = solve_cg(&a, &vec![1.0; n], 1e-12, 3).unwrap_err();
        match err {
            Error::Convergence {
                iterations,
                residual,
                ..
            } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn zero_mean_projection() {
        // Periodic 1D Laplacian: kernel is the constants.
        let n = 8;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let a = SparseMatrix::from_triplets(n, t).unwrap();
        let mut b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|v| *v -= mean);
        let s = CgSolver::new(&a, CgOptions::with_tol(1e-12))
            .with_zero_mean(vec![1.0; n])
            .solve(&b, None)
            .unwrap();
        assert!(s.x.iter().sum::<f64>().abs() < 1e-12);
        assert!(s.residual <= 1e-12);
    }
}
