//! Sparse assembly and symmetric positive-definite solves, backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("sparse matrix assembly failed: {0}")]
    Assembly(String),
    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),
    #[error("solution contains non-finite values")]
    NonFinite,
}

/// Coordinate-format accumulator. Duplicate entries are summed.
#[derive(Debug, Clone)]
pub struct Triplets {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Triplets {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn scaled(&self, s: f64) -> Triplets {
        Triplets {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (i, j, v * s))
                .collect(),
        }
    }

    pub fn extend(&mut self, other: &Triplets) {
        assert_eq!(self.dim(), other.dim());
        self.entries.extend_from_slice(&other.entries);
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Keeps the entries whose row and column are both selected, renumbered through `map`.
    pub fn restrict(&self, map: &[Option<usize>], n: usize) -> Triplets {
        let mut out = Triplets::new(n, n);
        for &(i, j, v) in &self.entries {
            if let (Some(a), Some(b)) = (map[i], map[j]) {
                out.push(a, b, v);
            }
        }
        out
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>, SolveError> {
        let mut merged = self.entries.clone();
        merged.sort_unstable_by_key(|e| (e.1, e.0));
        let mut trip: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(merged.len());
        for (i, j, v) in merged {
            match trip.last_mut() {
                Some(last) if last.row == i && last.col == j => last.val += v,
                _ => trip.push(Triplet::new(i, j, v)),
            }
        }
        SparseColMat::try_new_from_triplets(self.rows, self.cols, &trip)
            .map_err(|e| SolveError::Assembly(format!("{e:?}")))
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub struct SpdSolver {
    llt: Llt<usize, f64>,
    n: usize,
}

impl SpdSolver {
    pub fn factor(matrix: &Triplets) -> Result<Self, SolveError> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(SolveError::Assembly(format!("non-square {rows}x{cols}")));
        }
        let a = matrix.to_faer()?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| SolveError::NotPositiveDefinite(format!("{e:?}")))?;
        Ok(SpdSolver { llt, n: rows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        assert_eq!(rhs.len(), self.n);
        let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.llt.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(SolveError::NonFinite)
        }
    }

    /// Solves for several right-hand sides at once (one per column).
    pub fn solve_columns(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SolveError> {
        let k = rhs.len();
        let b = Mat::from_fn(self.n, k, |i, j| rhs[j][i]);
        let x = self.llt.solve(&b);
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let col: Vec<f64> = (0..self.n).map(|i| x[(i, j)]).collect();
            if !col.iter().all(|v| v.is_finite()) {
                return Err(SolveError::NonFinite);
            }
            out.push(col);
        }
        Ok(out)
    }
}
