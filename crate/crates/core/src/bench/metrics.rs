use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `a − b` wrapped into `(−π, π]`; spatial frequencies are 2π-periodic.
pub fn wrapped_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// Minimum-cost perfect matching on a square cost matrix (row-major,
/// `n × n`). Returns `assignment[row] = col`.
///
/// Shortest augmenting path formulation of the Hungarian method with row and
/// column potentials, `O(n³)`.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(Error::invalid(format!(
            "cost matrix has {} entries, expected {n}×{n}",
            cost.len()
        )));
    }
    if let Some(bad) = cost.iter().find(|c| !c.is_finite()) {
        return Err(Error::invalid(format!("cost entries must be finite, got {bad}")));
    }
    // 1-based internals; index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = matched_row[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[matched_row[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            matched_row[col0] = matched_row[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        assignment[matched_row[col] - 1] = col - 1;
    }
    Ok(assignment)
}

/// `Σ_k (ν_k − ν̂_π(k))²` under the minimum-cost one-to-one pairing `π`,
/// with differences taken on the circle.
pub fn mse_frequencies(truth: &[f64], est: &[f64]) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::invalid(format!(
            "truth has {} frequencies but the estimate has {}",
            truth.len(),
            est.len()
        )));
    }
    if let Some(bad) = truth.iter().chain(est).find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("frequencies must be finite, got {bad}")));
    }
    let n = truth.len();
    let cost: Vec<f64> = truth
        .iter()
        .flat_map(|&t| est.iter().map(move |&e| wrapped_difference(t, e).powi(2)))
        .collect();
    let assignment = min_cost_assignment(&cost, n)?;
    Ok(assignment.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum())
}
