//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values counted by [`numerical_rank`] must exceed this fraction
/// of the largest one.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Gram matrices with a larger condition number are treated as singular.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub rank: usize,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
}

/// Builds a row-major matrix from equally long rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank of the matrix with the given rows. With `equilibrate`
/// each nonzero row is scaled to unit Euclidean norm first, so that rows of
/// very different magnitude do not hide each other.
pub fn numerical_rank(rows: &[Vec<f64>], rel_tol: f64, equilibrate: bool) -> RankEstimate {
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .filter_map(|row| {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                None
            } else if equilibrate {
                Some(row.iter().map(|v| v / norm).collect())
            } else {
                Some(row.clone())
            }
        })
        .collect();
    let sv = singular_values(&matrix_from_rows(&scaled));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| top > 0.0 && s > rel_tol * top).count();
    RankEstimate {
        rank,
        singular_values: sv,
        tolerance: rel_tol,
    }
}

/// Solves the symmetric positive definite system `gram · x = rhs`, refusing
/// ill-conditioned matrices.
pub fn solve_gram(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if gram.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let sv = singular_values(gram);
    let (top, bottom) = (sv[0], sv[sv.len() - 1]);
    let condition = if bottom > 0.0 { top / bottom } else { f64::INFINITY };
    if !(condition < MAX_GRAM_CONDITION) {
        return Err(Error::DegenerateBasis { condition });
    }
    gram.clone()
        .cholesky()
        .map(|c| c.solve(rhs))
        .ok_or(Error::DegenerateBasis { condition })
}

/// Least-squares solution of `a · x ≈ b` and the residual norm.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if a.ncols() == 0 {
        return Ok((DVector::zeros(0), b.norm()));
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let x = svd
        .solve(b, top * 1e-14)
        .map_err(|e| Error::Numerics(e.to_string()))?;
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}

/// Incremental modified Gram–Schmidt used to decide linear independence.
#[derive(Debug, Clone)]
pub struct IndependenceTest {
    orthonormal: Vec<Vec<f64>>,
    tolerance: f64,
}

impl IndependenceTest {
    pub fn new(tolerance: f64) -> Self {
        Self {
            orthonormal: Vec::new(),
            tolerance,
        }
    }

    pub fn rank(&self) -> usize {
        self.orthonormal.len()
    }

    /// Adds `v` if it is independent of the vectors accepted so far (relative
    /// residual above the tolerance). Returns whether it was accepted.
    pub fn try_add(&mut self, v: &[f64]) -> bool {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        let mut w: Vec<f64> = v.iter().map(|x| x / norm).collect();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for q in &self.orthonormal {
                let dot: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= dot * qi;
                }
            }
        }
        let rest = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rest <= self.tolerance {
            return false;
        }
        self.orthonormal.push(w.iter().map(|x| x / rest).collect());
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_product_is_one() {
        let rows: Vec<Vec<f64>> = (1..5).map(|i| (1..7).map(|j| (i * j) as f64).collect()).collect();
        assert_eq!(numerical_rank(&rows, RANK_TOLERANCE, false).rank, 1);
        assert_eq!(numerical_rank(&rows, RANK_TOLERANCE, true).rank, 1);
    }

    #[test]
    fn zero_rows_are_ignored() {
        let rows = vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(numerical_rank(&rows, RANK_TOLERANCE, true).rank, 2);
        assert_eq!(numerical_rank(&[], RANK_TOLERANCE, true).rank, 0);
    }

    #[test]
    fn equilibration_recovers_small_rows() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1e-10]];
        assert_eq!(numerical_rank(&rows, RANK_TOLERANCE, false).rank, 1);
        assert_eq!(numerical_rank(&rows, RANK_TOLERANCE, true).rank, 2);
    }

    #[test]
    fn gram_solve_rejects_singular() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            solve_gram(&g, &DVector::from_vec(vec![1.0, 1.0])),
            Err(Error::DegenerateBasis { .. })
        ));
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let x = solve_gram(&g, &DVector::from_vec(vec![2.0, 2.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn least_squares_residual() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 3.0, 4.0]);
        let (x, r) = least_squares(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((r - 5.0).abs() < 1e-14);
    }

    #[test]
    fn independence_test_detects_dependence() {
        let mut t = IndependenceTest::new(1e-10);
        assert!(t.try_add(&[1.0, 1.0, 0.0]));
        assert!(t.try_add(&[1.0, 0.0, 0.0]));
        assert!(!t.try_add(&[3.0, -2.0, 0.0]));
        assert!(t.try_add(&[0.0, 0.0, 1e-3]));
        assert_eq!(t.rank(), 3);
    }
}
