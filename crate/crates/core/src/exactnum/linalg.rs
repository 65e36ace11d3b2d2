//! Gaussian elimination over a single quadratic field.

use super::{NumError, QuadExt};

type Matrix = Vec<Vec<QuadExt>>;

fn check_rect(a: &[Vec<QuadExt>]) -> Result<usize, NumError> {
    let cols = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != cols) {
        return Err(NumError::Dimension("ragged matrix".into()));
    }
    Ok(cols)
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut Matrix) -> Result<Vec<usize>, NumError> {
    let cols = check_rect(m)?;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].checked_recip()?;
        for c in col..cols {
            m[row][c] = m[row][c].checked_mul(&inv)?;
        }
        for r in 0..m.len() {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..cols {
                let t = f.checked_mul(&m[row][c])?;
                m[r][c] = m[r][c].checked_sub(&t)?;
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    Ok(pivots)
}

pub fn rank(a: &[Vec<QuadExt>]) -> Result<usize, NumError> {
    let mut m = a.to_vec();
    Ok(rref(&mut m)?.len())
}

/// Basis of `{x : A x = 0}`.
pub fn nullspace(a: &[Vec<QuadExt>]) -> Result<Vec<Vec<QuadExt>>, NumError> {
    let cols = check_rect(a)?;
    let mut m = a.to_vec();
    let pivots = rref(&mut m)?;
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    Ok(free
        .iter()
        .map(|&f| {
            let mut v = vec![QuadExt::zero(); cols];
            v[f] = QuadExt::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -&m[r][f];
            }
            v
        })
        .collect())
}

/// Unique solution of the square system `A x = b`.
pub fn solve(a: &[Vec<QuadExt>], b: &[QuadExt]) -> Result<Vec<QuadExt>, NumError> {
    let n = a.len();
    if check_rect(a)? != n || b.len() != n {
        return Err(NumError::Dimension(format!("{n}x? system with {} right-hand sides", b.len())));
    }
    let mut m: Matrix = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let pivots = rref(&mut m)?;
    if pivots.len() < n || pivots.last() == Some(&n) {
        return Err(NumError::Singular);
    }
    Ok(m.into_iter().map(|mut r| r.pop().expect("augmented")).collect())
}

pub fn determinant(a: &[Vec<QuadExt>]) -> Result<QuadExt, NumError> {
    let n = a.len();
    if check_rect(a)? != n {
        return Err(NumError::Dimension("determinant of a non-square matrix".into()));
    }
    let mut m = a.to_vec();
    let mut det = QuadExt::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(QuadExt::zero());
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det = det.checked_mul(&m[col][col])?;
        let inv = m[col][col].checked_recip()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].checked_mul(&inv)?;
            for c in col..n {
                let t = f.checked_mul(&m[col][c])?;
                m[r][c] = m[r][c].checked_sub(&t)?;
            }
        }
    }
    Ok(det)
}
