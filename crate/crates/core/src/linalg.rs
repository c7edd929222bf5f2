use crate::error::{Error, Result};

/// Pivots smaller than this (relative to the largest matrix entry) count as zero.
const SINGULAR_PIVOT: f64 = 1e-14;

/// Solve `m · x = rhs` for a 3×3 system by Gaussian elimination with partial
/// pivoting.
pub(crate) fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Result<[f64; 3]> {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(libm::fabs(*v)));
    if scale == 0.0 {
        return Err(Error::SingularDrift);
    }
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&a, &b| libm::fabs(m[a][col]).total_cmp(&libm::fabs(m[b][col])))
            .unwrap_or(col);
        if libm::fabs(m[pivot_row][col]) <= SINGULAR_PIVOT * scale {
            return Err(Error::SingularDrift);
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Ok(x)
}
