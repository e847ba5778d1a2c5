use super::sparse::SparseMatrix;
use crate::geometry::{EdgeTag, Mesh};
use crate::{Error, Result};

/// Role of one mesh vertex in the constrained system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofKind {
    /// Unknown with the given index in the reduced system.
    Free(usize),
    /// Prescribed value.
    Dirichlet(f64),
    /// Carries the value of the given free index (periodic image).
    Slave(usize),
}

/// Map between vertex values and the reduced (free) unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kinds: Vec<DofKind>,
    free_vertices: Vec<usize>,
}

impl DofMap {
    pub fn unconstrained(n: usize) -> Self {
        Self {
            kinds: (0..n).map(DofKind::Free).collect(),
            free_vertices: (0..n).collect(),
        }
    }

    /// `dirichlet` lists `(vertex, value)`; `periodic` lists `(slave, master)`.
    /// Master chains are followed to their free end.
    pub fn new(n: usize, dirichlet: &[(usize, f64)], periodic: &[(usize, usize)]) -> Result<Self> {
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for &(v, val) in dirichlet {
            if v >= n {
                return Err(Error::Constraint(format!(
                    "Dirichlet vertex {v} out of range"
                )));
            }
            fixed[v] = Some(val);
        }
        let mut master: Vec<Option<usize>> = vec![None; n];
        for &(s, m) in periodic {
            if s >= n || m >= n || s == m {
                return Err(Error::Constraint(format!(
                    "invalid periodic pair ({s}, {m})"
                )));
            }
            if fixed[s].is_some() {
                return Err(Error::Constraint(format!(
                    "vertex {s} is both Dirichlet and periodic slave"
                )));
            }
            if master[s].is_some_and(|old| old != m) {
                return Err(Error::Constraint(format!(
                    "vertex {s} has two periodic masters"
                )));
            }
            master[s] = Some(m);
        }
        let mut root = vec![usize::MAX; n];
        for v in 0..n {
            let mut cur = v;
            let mut hops = 0;
            while let Some(m) = master[cur] {
                cur = m;
                hops += 1;
                if hops > n {
                    return Err(Error::Constraint(format!(
                        "periodic cycle through vertex {v}"
                    )));
                }
            }
            if master[v].is_some() && fixed[cur].is_some() {
                return Err(Error::Constraint(format!(
                    "periodic slave {v} maps to Dirichlet vertex {cur}"
                )));
            }
            root[v] = cur;
        }
        let mut free_index = vec![usize::MAX; n];
        let mut free_vertices = Vec::new();
        for v in 0..n {
            if master[v].is_none() && fixed[v].is_none() {
                free_index[v] = free_vertices.len();
                free_vertices.push(v);
            }
        }
        let kinds = (0..n)
            .map(|v| match (fixed[v], master[v]) {
                (Some(val), _) => DofKind::Dirichlet(val),
                (None, Some(_)) => DofKind::Slave(free_index[root[v]]),
                (None, None) => DofKind::Free(free_index[v]),
            })
            .collect();
        Ok(Self {
            kinds,
            free_vertices,
        })
    }

    /// Homogeneous Dirichlet on `EXTERIOR_DIRICHLET` vertices plus the
    /// mesh's periodic pairing.
    pub fn for_mesh(mesh: &Mesh) -> Result<Self> {
        let dirichlet: Vec<(usize, f64)> = mesh
            .tagged_vertices(EdgeTag::ExteriorDirichlet)
            .into_iter()
            .map(|v| (v, 0.0))
            .collect();
        Self::new(mesh.num_vertices(), &dirichlet, mesh.periodic_pairs())
    }

    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }

    pub fn kind(&self, v: usize) -> DofKind {
        self.kinds[v]
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free_vertices
    }

    pub fn is_dirichlet(&self, v: usize) -> bool {
        matches!(self.kinds[v], DofKind::Dirichlet(_))
    }

    /// Vertex values from reduced unknowns.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|k| match *k {
                DofKind::Free(i) | DofKind::Slave(i) => free[i],
                DofKind::Dirichlet(v) => v,
            })
            .collect()
    }

    /// Reduced vector obtained by summing slave entries into their masters
    /// (the transpose of [`DofMap::expand`] on the free part).
    pub fn condense_vector(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_free()];
        for (k, &x) in self.kinds.iter().zip(full) {
            if let DofKind::Free(i) | DofKind::Slave(i) = *k {
                out[i] += x;
            }
        }
        out
    }

    /// Values of the free vertices.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_vertices.iter().map(|&v| full[v]).collect()
    }
}

/// Reduces `A u = b` to the free unknowns: slave rows and columns are added
/// into their masters and Dirichlet columns move to the right-hand side.
pub fn apply_constraints(
    matrix: &SparseMatrix,
    rhs: &[f64],
    dofs: &DofMap,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = dofs.num_vertices();
    if matrix.dim() != n || rhs.len() != n {
        return Err(Error::Argument(format!(
            "system of size {} / rhs {} does not match {n} dofs",
            matrix.dim(),
            rhs.len()
        )));
    }
    let mut reduced_rhs = dofs.condense_vector(rhs);
    let mut triplets = Vec::with_capacity(matrix.nnz());
    for r in 0..n {
        let row = match dofs.kind(r) {
            DofKind::Free(i) | DofKind::Slave(i) => i,
            DofKind::Dirichlet(_) => continue,
        };
        for (c, v) in matrix.row(r) {
            match dofs.kind(c) {
                DofKind::Free(j) | DofKind::Slave(j) => triplets.push((row, j, v)),
                DofKind::Dirichlet(g) => reduced_rhs[row] -= v * g,
            }
        }
    }
    let reduced = SparseMatrix::from_triplets(dofs.num_free(), triplets)?.symmetrized();
    Ok((reduced, reduced_rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve_cg;

    fn chain() -> SparseMatrix {
        SparseMatrix::from_dense(&[
            vec![3.0, -1.0, -1.0],
            vec![-1.0, 3.0, -1.0],
            vec![-1.0, -1.0, 3.0],
        ])
        .unwrap()
    }

    #[test]
    fn no_constraints_is_identity() {
        let a = chain();
        let b = vec![1.0, 2.0, 3.0];
        let (ar, br) = apply_constraints(&a, &b, &DofMap::unconstrained(3)).unwrap();
        assert_eq!(ar, a);
        assert_eq!(br, b);
    }

    #[test]
    fn all_dirichlet() {
        let dofs = DofMap::new(3, &[(0, 1.0), (1, 2.0), (2, 3.0)], &[]).unwrap();
        let (ar, br) = apply_constraints(&chain(), &[0.0; 3], &dofs).unwrap();
        assert_eq!(ar.dim(), 0);
        assert!(br.is_empty());
        assert_eq!(dofs.expand(&[]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn periodic_chain_by_hand() {
        // Condensing 2 -> 0 gives [[4, -2], [-2, 3]] x = [4, 2], x = [2, 2].
        let dofs = DofMap::new(3, &[], &[(2, 0)]).unwrap();
        let (ar, br) = apply_constraints(&chain(), &[1.0, 2.0, 3.0], &dofs).unwrap();
        assert_eq!(ar.to_dense(), vec![vec![4.0, -2.0], vec![-2.0, 3.0]]);
        assert_eq!(br, vec![4.0, 2.0]);
        let x = solve_cg(&ar, &br, 1e-14, 10).unwrap().x;
        let u = dofs.expand(&x);
        assert_eq!(u[2], u[0]);
        assert!((u[0] - 2.0).abs() < 1e-12 && (u[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_rhs_correction() {
        let dofs = DofMap::new(3, &[(2, 5.0)], &[]).unwrap();
        let (ar, br) = apply_constraints(&chain(), &[0.0, 0.0, 0.0], &dofs).unwrap();
        assert_eq!(ar.dim(), 2);
        assert_eq!(br, vec![5.0, 5.0]);
    }

    #[test]
    fn slave_to_dirichlet_is_rejected() {
        let err = DofMap::new(3, &[(0, 0.0)], &[(2, 0)]).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn master_chain_resolves() {
        let dofs = DofMap::new(4, &[], &[(3, 2), (2, 0)]).unwrap();
        assert_eq!(dofs.num_free(), 2);
        assert_eq!(dofs.kind(3), DofKind::Slave(0));
    }
}
