//! Embedded first-order solver for cone programs
//!
//!     minimize    c'x
//!     subject to  A x = b,   x in K
//!
//! where K is a product of free, nonnegative, second-order and PSD
//! blocks. PSD blocks are stored in symmetric packed form (svec) with
//! off-diagonal entries scaled by sqrt(2) so that matrix inner products
//! are plain Euclidean dot products.
//!
//! The engine is ADMM on the homogeneous self-dual embedding with Ruiz
//! equilibration and over-relaxation; see [`solver`]. Problems can also
//! be serialized to a plain-text interchange format ([`io`]) so an
//! external solver can be swapped in.

mod cones;
mod io;
mod solver;

pub use cones::{project_cone, svec_dim, svec_pack, svec_unpack};
pub use io::{read_problem, write_problem};

use serde::Serialize;

/// One cone block of the variable vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeBlock {
    /// Unconstrained block of the given length.
    Free(usize),
    /// Componentwise nonnegative block of the given length.
    NonNeg(usize),
    /// Second-order cone { (t, z) : ||z||_2 <= t } of total length >= 1.
    Soc(usize),
    /// PSD cone of side `s`, packed length s(s+1)/2.
    Psd(usize),
}

impl ConeBlock {
    /// Length of the block inside the variable vector.
    pub fn dim(&self) -> usize {
        match *self {
            ConeBlock::Free(n) | ConeBlock::NonNeg(n) | ConeBlock::Soc(n) => n,
            ConeBlock::Psd(side) => svec_dim(side),
        }
    }
}

/// Sparse COO equality matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, v) in &self.entries {
            out[i] += v * x[j];
        }
    }

    pub fn mul_transpose_vec(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(i, j, v) in &self.entries {
            out[j] += v * y[i];
        }
    }
}

/// A cone program in the crate's standard primal form.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    /// Objective vector, length = sum of block dims.
    pub c: Vec<f64>,
    /// Equality constraint matrix.
    pub a: SparseMatrix,
    /// Right-hand side, length = a.nrows.
    pub b: Vec<f64>,
    /// Ordered cone blocks covering the variable vector.
    pub blocks: Vec<ConeBlock>,
    /// Optional warm start for the embedding iterates (u, v).
    pub warm_start: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("variable dimension {vars} does not match block total {blocks}")]
    VariableDim { vars: usize, blocks: usize },
    #[error("A has {a_rows} rows but b has {b_len} entries")]
    RhsDim { a_rows: usize, b_len: usize },
    #[error("A has {a_cols} columns but the variable dimension is {vars}")]
    MatrixCols { a_cols: usize, vars: usize },
    #[error("malformed problem file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

impl ConicProblem {
    pub fn new(c: Vec<f64>, a: SparseMatrix, b: Vec<f64>, blocks: Vec<ConeBlock>) -> Self {
        Self {
            c,
            a,
            b,
            blocks,
            warm_start: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let total: usize = self.blocks.iter().map(|b| b.dim()).sum();
        if total != self.c.len() {
            return Err(ConicError::VariableDim {
                vars: self.c.len(),
                blocks: total,
            });
        }
        if self.a.nrows != self.b.len() {
            return Err(ConicError::RhsDim {
                a_rows: self.a.nrows,
                b_len: self.b.len(),
            });
        }
        if self.a.ncols != self.c.len() {
            return Err(ConicError::MatrixCols {
                a_cols: self.a.ncols,
                vars: self.c.len(),
            });
        }
        Ok(())
    }
}

/// Solver options; defaults follow the crate-wide solver contract.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Target for primal/dual residuals and relative gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation parameter in (0, 2).
    pub alpha: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200_000,
            alpha: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal variables (all blocks, PSD packed).
    pub x: Vec<f64>,
    /// Constraint duals: equality rows first, then one entry per
    /// attached cone row.
    pub y: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Embedding iterates for warm starting a related problem.
    pub warm_start: (Vec<f64>, Vec<f64>),
}

/// Solve a validated problem; see [`solver`] for the algorithm.
pub fn solve(p: &ConicProblem, opts: &SolveOptions) -> Result<ConicSolution, ConicError> {
    p.validate()?;
    Ok(solver::admm_solve(p, opts))
}
