//! Sparse direct solve behind a minimal interface.
//!
//! Both saddle-point systems in this crate (the Darcy system and the
//! transport step) are factored once and solved repeatedly, so the wrapper
//! splits construction from solves. The backend (`faer` sparse LU) is built
//! without threading, which keeps factorizations bit-reproducible from run
//! to run — several output-determinism guarantees rest on that.

use crate::assembly::SparseMatrix;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is {nrows} x {ncols}; direct solve needs a square matrix")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("matrix is singular (detected at pivot {index})")]
    Singular { index: usize },
    #[error("solution contains non-finite entries (numerically singular matrix)")]
    NonFiniteSolution,
    #[error("sparse matrix construction failed: {0}")]
    Construction(String),
}

/// An LU-factored square sparse matrix.
pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
}

impl Factorization {
    pub fn new(matrix: &SparseMatrix) -> Result<Self, SolverError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SolverError::NotSquare { nrows: matrix.nrows(), ncols: matrix.ncols() });
        }
        let n = matrix.nrows();
        let triplets: Vec<Triplet<usize, usize, f64>> = matrix
            .triplets()
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| SolverError::Construction(format!("{e:?}")))?;
        let symbolic = SymbolicLu::try_new(mat.symbolic())
            .map_err(|e| SolverError::Construction(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                SolverError::Singular { index }
            }
            other => SolverError::Construction(format!("{other:?}")),
        })?;
        Ok(Factorization { lu, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        assert_eq!(rhs.len(), self.n, "rhs length mismatch");
        let b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(SolverError::NonFiniteSolution)
        }
    }
}

/// Factor and solve in one call.
pub fn solve(matrix: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    Factorization::new(matrix)?.solve(rhs)
}
