use alloc::vec::Vec;

use crate::math;

/// Rank by row elimination with partial pivoting. A pivot counts when it
/// exceeds `rel_tol` times the largest input row norm.
pub(crate) fn rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let scale = a.iter().map(|r| math::sqrt(math::norm_sq(r))).fold(0.0, f64::max);
    if scale == 0.0 || a.is_empty() {
        return 0;
    }
    let threshold = rel_tol * scale;
    let cols = a[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if rank == a.len() {
            break;
        }
        let (pivot_row, pivot_abs) = (rank..a.len())
            .map(|r| (r, math::abs(a[r][col])))
            .fold((rank, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= threshold {
            continue;
        }
        a.swap(rank, pivot_row);
        let (top, below) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in below {
            let factor = row[col] / pivot_row[col];
            if factor != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Least-squares slope of `ys` against `xs` (at least two distinct `xs`).
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
