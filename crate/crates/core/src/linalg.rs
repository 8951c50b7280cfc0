//! Exact Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Rational;

/// Brings `rows` to reduced row echelon form in place and returns the pivot
/// columns.
fn reduce(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut().skip(c) {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (k, pv) in pivot_row.iter().enumerate().skip(c) {
                if !pv.is_zero() {
                    row[k] -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a matrix given by rows.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    reduce(&mut rows, ncols).len()
}

/// The unique solution of `A y = b`, where `a` lists the rows of `A`.
///
/// Fails when the system is inconsistent or its solution is not unique.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>> {
    let ncols = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = reduce(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return Err(Error::Inconsistent(
            "right-hand side outside the column span".into(),
        ));
    }
    if pivots.len() < ncols {
        return Err(Error::Inconsistent(format!(
            "columns are dependent: rank {} < {}",
            pivots.len(),
            ncols
        )));
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &c) in aug.iter().zip(&pivots) {
        x[c] = row[ncols].clone();
    }
    Ok(x)
}

/// True when `a` is square with full rank.
pub fn is_invertible(a: &[Vec<Rational>]) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n) && rank(a.to_vec()) == n
}
