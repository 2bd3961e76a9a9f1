//! Exact linear algebra over the rationals.
//!
//! Small dense systems only: elimination is plain Gauss with first-nonzero
//! pivoting, every entry stays a reduced BigRational, and nothing is ever
//! rounded. Row order is tracked through swaps so an inconsistency can be
//! reported against an input row index.

#![allow(clippy::needless_range_loop)]

use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LinearOutcome {
    /// A solution with every free variable pinned to zero.
    Solution(Vec<BigRational>),
    /// No solution; `row` is the input row where elimination exposed
    /// 0 = nonzero.
    Inconsistent { row: usize },
}

/// Solves a x = b exactly. a is row-major with rows of equal length.
pub fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational]) -> LinearOutcome {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(r, rhs)| {
            assert_eq!(r.len(), cols, "ragged matrix");
            let mut row = r.clone();
            row.push(rhs.clone());
            row
        })
        .collect();
    let mut origin: Vec<usize> = (0..rows).collect();

    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        origin.swap(rank, p);
        let inv = m[rank][col].recip();
        for x in m[rank][col..].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=cols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }

    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return LinearOutcome::Inconsistent { row: origin[r] };
        }
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &col) in pivot_cols.iter().enumerate() {
        x[col] = m[r][cols].clone();
    }
    LinearOutcome::Solution(x)
}

/// Exact determinant of a square matrix.
pub fn det_exact(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    for row in &m {
        assert_eq!(row.len(), n, "determinant of a non-square matrix");
    }
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        det *= &m[col][col];
        let inv = m[col][col].recip();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Rank of an arbitrary rational matrix.
pub fn rank_exact(a: &[Vec<BigRational>]) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> = a.to_vec();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for r in rank + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..cols {
                let delta = &factor * &m[rank][c];
                m[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// The matrix with column `col` replaced by `v` (for Cramer solves).
pub fn with_column(a: &[Vec<BigRational>], col: usize, v: &[BigRational]) -> Vec<Vec<BigRational>> {
    let mut m = a.to_vec();
    for (row, value) in m.iter_mut().zip(v) {
        row[col] = value.clone();
    }
    m
}

/// The minor with one row and one column struck out.
pub fn strike(a: &[Vec<BigRational>], row: usize, col: usize) -> Vec<Vec<BigRational>> {
    a.iter()
        .enumerate()
        .filter(|(r, _)| *r != row)
        .map(|(_, rv)| {
            rv.iter()
                .enumerate()
                .filter(|(c, _)| *c != col)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_a_unique_system() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(-1)]];
        let b = vec![q(4), q(-1)];
        assert_eq!(
            solve_exact(&a, &b),
            LinearOutcome::Solution(vec![q(1), q(2)])
        );
    }

    #[test]
    fn free_variables_are_zero() {
        // One equation, two unknowns: x + 2y = 3 picks x = 3, y = 0.
        let a = vec![vec![q(1), q(2)]];
        let b = vec![q(3)];
        assert_eq!(
            solve_exact(&a, &b),
            LinearOutcome::Solution(vec![q(3), q(0)])
        );
    }

    #[test]
    fn reports_the_inconsistent_row() {
        let a = vec![vec![q(1), q(1)], vec![q(2), q(2)], vec![q(0), q(1)]];
        let b = vec![q(1), q(5), q(0)];
        assert_eq!(solve_exact(&a, &b), LinearOutcome::Inconsistent { row: 1 });
    }

    #[test]
    fn determinant_tracks_swaps_and_fractions() {
        let a = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(det_exact(&a), q(-1));
        let b = vec![vec![qq(1, 2), q(1)], vec![q(1), q(4)]];
        assert_eq!(det_exact(&b), q(1));
        let s = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(det_exact(&s), q(0));
    }

    #[test]
    fn rank_of_rectangular_matrices() {
        let a = vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ];
        assert_eq!(rank_exact(&a), 2);
        assert_eq!(rank_exact(&[]), 0);
    }

    #[test]
    fn cramer_helpers() {
        let a = vec![vec![q(1), q(2)], vec![q(3), q(4)]];
        let replaced = with_column(&a, 1, &[q(7), q(8)]);
        assert_eq!(replaced[0][1], q(7));
        assert_eq!(replaced[1][0], q(3));
        let cut = strike(&a, 0, 1);
        assert_eq!(cut, vec![vec![q(3)]]);
    }
}
