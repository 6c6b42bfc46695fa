//! Hungarian algorithm for square assignment problems, plus the zero-padding
//! reduction that turns rectangular profit-maximizing matchings into square
//! cost-minimizing ones.

use crate::error::{Error, Result};

/// Dense row-major real matrix, used both for costs and for profits.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Row-to-column matching with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `row_to_col[r]` is the column matched to row `r`, if any.
    pub row_to_col: Vec<Option<usize>>,
    /// Sum of the selected entries, accumulated in row order.
    pub total: f64,
}

impl Assignment {
    pub fn matched_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }

    pub fn num_matched(&self) -> usize {
        self.row_to_col.iter().filter(|c| c.is_some()).count()
    }
}

/// Minimum-cost perfect matching of a square cost matrix.
///
/// Shortest augmenting path formulation with row and column potentials,
/// `O(n^3)`. Rows are inserted in index order and the column scan keeps the
/// first (lowest-index) column on ties, so results are deterministic.
pub fn hungarian(cost: &Matrix) -> Result<Assignment> {
    if cost.rows != cost.cols {
        return Err(Error::NotSquare {
            rows: cost.rows,
            cols: cost.cols,
        });
    }
    if !cost.is_finite() {
        return Err(Error::NonFinite("cost matrix"));
    }
    let n = cost.rows;
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            total: 0.0,
        });
    }

    // 1-based with index 0 as the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);

        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; n];
    for j in 1..=n {
        row_to_col[row_of_col[j] - 1] = Some(j - 1);
    }
    let total = row_to_col
        .iter()
        .enumerate()
        .map(|(r, c)| cost.get(r, c.expect("perfect matching")))
        .sum();
    Ok(Assignment { row_to_col, total })
}

/// Squares a profit matrix by appending all-zero rows (when `R < C`) or
/// all-zero columns (when `R > C`), then negates it into cost form.
pub fn pad_to_square(profit: &Matrix) -> Matrix {
    let n = profit.rows.max(profit.cols);
    Matrix::from_fn(n, n, |r, c| {
        if r < profit.rows && c < profit.cols {
            -profit.get(r, c)
        } else {
            0.0
        }
    })
}

/// Maximum-profit injective matching of rows to columns.
///
/// Rows matched to padding, and pairs whose profit is exactly zero, are
/// reported as unmatched; neither changes the total.
pub fn solve_matching(profit: &Matrix) -> Result<Assignment> {
    if !profit.is_finite() {
        return Err(Error::NonFinite("profit matrix"));
    }
    if profit.data.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidConfig(
            "matching profits must be nonnegative".into(),
        ));
    }
    let square = hungarian(&pad_to_square(profit))?;
    let row_to_col: Vec<Option<usize>> = (0..profit.rows)
        .map(|r| {
            square.row_to_col[r].filter(|&c| c < profit.cols && profit.get(r, c) > 0.0)
        })
        .collect();
    let total = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| profit.get(r, c)))
        .sum();
    Ok(Assignment { row_to_col, total })
}
