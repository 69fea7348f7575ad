use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};

pub fn euclidean(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    sqrt(dx * dx + dy * dy)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Protocol {
    /// Minimum total distance over all one-to-one assignments.
    #[default]
    Optimal,
    /// Repeatedly pairs the closest remaining (questionable, pool) couple.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `(questionable index, pool index)`, one per questionable point, in
    /// questionable order.
    pub pairs: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
    /// Sum of `distances` in questionable order.
    pub total_distance: f64,
}

pub fn match_cohorts(questionable: &[[f64; 2]], pool: &[[f64; 2]], protocol: Protocol) -> Result<MatchResult> {
    if pool.len() < questionable.len() {
        return Err(Error::PoolTooSmall {
            questionable: questionable.len(),
            pool: pool.len(),
        });
    }
    if questionable.iter().chain(pool).flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite feature".into()));
    }
    let cost: Vec<Vec<f64>> = questionable
        .iter()
        .map(|q| pool.iter().map(|r| euclidean(*q, *r)).collect())
        .collect();
    let chosen = match protocol {
        Protocol::Optimal => hungarian(&cost, pool.len()),
        Protocol::Greedy => greedy(&cost, pool.len()),
    };
    let pairs: Vec<(usize, usize)> = chosen.into_iter().enumerate().collect();
    let distances: Vec<f64> = pairs.iter().map(|&(i, j)| cost[i][j]).collect();
    Ok(MatchResult {
        total_distance: distances.iter().sum(),
        pairs,
        distances,
    })
}

/// Rectangular assignment (rows <= cols) by the shortest augmenting path
/// method with potentials. Returns the column assigned to each row.
fn hungarian(cost: &[Vec<f64>], m: usize) -> Vec<usize> {
    let n = cost.len();
    // 1-based; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            out[row_of[j] - 1] = j - 1;
        }
    }
    out
}

fn greedy(cost: &[Vec<f64>], m: usize) -> Vec<usize> {
    let n = cost.len();
    let mut edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    edges.sort_by(|a, b| cost[a.0][a.1].total_cmp(&cost[b.0][b.1]).then(a.cmp(b)));
    let mut out = vec![usize::MAX; n];
    let mut taken = vec![false; m];
    let mut left = n;
    for (i, j) in edges {
        if left == 0 {
            break;
        }
        if out[i] == usize::MAX && !taken[j] {
            out[i] = j;
            taken[j] = true;
            left -= 1;
        }
    }
    out
}
