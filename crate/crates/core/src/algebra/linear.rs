//! Exact Gauss-Jordan elimination over linear polynomial rows.

use num::{BigRational, Zero};

use super::expr::AttrSymbol;
use super::poly::Poly;

/// A row reduced to `0 = c` with `c != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contradiction;

/// Reduces `rows` (each meaning `row = 0`, all of degree ≤ 1) and returns every
/// symbol whose value the system pins, in symbol order.
///
/// Columns are the symbols in ascending order and each pivot is the first
/// remaining row with a nonzero entry. Pinned values depend only on the row
/// space, not on row order.
pub fn solve_linear(rows: &[Poly]) -> Result<Vec<(AttrSymbol, BigRational)>, Contradiction> {
    let mut columns: Vec<AttrSymbol> = rows.iter().flat_map(|r| r.symbols()).collect();
    columns.sort();
    columns.dedup();
    let width = columns.len();

    // Each matrix row holds the coefficients followed by the right-hand side.
    let mut matrix: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            let mut row: Vec<BigRational> = columns.iter().map(|s| r.linear_coefficient(s)).collect();
            row.push(-r.constant_term());
            row
        })
        .collect();

    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..matrix.len()).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(rank, pivot);
        let lead = matrix[rank][col].clone();
        for v in matrix[rank].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = matrix[rank].clone();
        for (r, row) in matrix.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        rank += 1;
    }

    if matrix[rank..].iter().any(|row| !row[width].is_zero()) {
        return Err(Contradiction);
    }

    let mut pinned = Vec::new();
    for row in &matrix[..rank] {
        let mut nonzero = row[..width].iter().enumerate().filter(|(_, v)| !v.is_zero());
        if let (Some((col, _)), None) = (nonzero.next(), nonzero.next()) {
            pinned.push((columns[col].clone(), row[width].clone()));
        }
    }
    pinned.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(pinned)
}
