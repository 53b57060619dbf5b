//! Progressive edge growth on a binary protomatrix.
//!
//! Column-wise placement follows the classic algorithm: each new edge of a
//! column goes to the check farthest from it in the current graph (an
//! unreachable check counts as infinitely far), ties broken by the lowest
//! current check degree and then the lowest index. Row-wise placement is the
//! mirror image used when a new check is appended.

use crate::matrix::IntMatrix;
use crate::{Error, Result};
use std::collections::VecDeque;

/// Breadth-first distances (in edges) from `start` over the bipartite graph
/// of `b`. Checks are indexed `0..rows`, variables `rows..rows+cols`.
fn distances(b: &IntMatrix, start: usize) -> Vec<usize> {
    let (m, n) = (b.rows(), b.cols());
    let mut dist = vec![usize::MAX; m + n];
    let mut queue = VecDeque::from([start]);
    dist[start] = 0;
    while let Some(x) = queue.pop_front() {
        let d = dist[x] + 1;
        if x < m {
            for v in 0..n {
                if b[(x, v)] != 0 && dist[m + v] == usize::MAX {
                    dist[m + v] = d;
                    queue.push_back(m + v);
                }
            }
        } else {
            for c in 0..m {
                if b[(c, x - m)] != 0 && dist[c] == usize::MAX {
                    dist[c] = d;
                    queue.push_back(c);
                }
            }
        }
    }
    dist
}

fn check_degree(b: &IntMatrix, c: usize) -> usize {
    b.row(c).iter().filter(|&&x| x != 0).count()
}

fn var_degree(b: &IntMatrix, v: usize) -> usize {
    (0..b.rows()).filter(|&c| b[(c, v)] != 0).count()
}

/// Completes the columns listed in `order` (in that order) up to `degrees[v]`
/// edges each, keeping every edge already present in `partial`. Edges may
/// only go where `allowed(check, var)` holds.
pub fn peg_place(
    partial: &IntMatrix,
    degrees: &[usize],
    order: &[usize],
    allowed: impl Fn(usize, usize) -> bool,
) -> Result<IntMatrix> {
    let mut b = partial.clone();
    let m = b.rows();
    if degrees.len() != b.cols() {
        return Err(Error::Design(format!(
            "{} degree targets for {} columns",
            degrees.len(),
            b.cols()
        )));
    }
    for &v in order {
        while var_degree(&b, v) < degrees[v] {
            let dist = distances(&b, m + v);
            let pick = (0..m)
                .filter(|&c| b[(c, v)] == 0 && allowed(c, v))
                .max_by(|&x, &y| {
                    dist[x]
                        .cmp(&dist[y])
                        .then(check_degree(&b, y).cmp(&check_degree(&b, x)))
                        .then(y.cmp(&x))
                })
                .ok_or_else(|| {
                    Error::Design(format!("no feasible check for column {v} (target {})", degrees[v]))
                })?;
            b[(pick, v)] = 1;
        }
    }
    Ok(b)
}

/// Adds edges from check `row` until it has `degree` edges. `first`, when
/// given, is placed before the greedy steps. The greedy step picks the
/// allowed variable farthest from the check, then the one furthest below its
/// `target` degree, then the lowest current degree, then the lowest index.
pub fn peg_add_row(
    partial: &IntMatrix,
    row: usize,
    degree: usize,
    first: Option<usize>,
    target: &[usize],
    allowed: impl Fn(usize) -> bool,
) -> Result<IntMatrix> {
    let mut b = partial.clone();
    if let Some(v) = first {
        if !allowed(v) {
            return Err(Error::Design(format!("column {v} not allowed in row {row}")));
        }
        b[(row, v)] = 1;
    }
    while check_degree(&b, row) < degree {
        let dist = distances(&b, row);
        let m = b.rows();
        let deficit = |v: usize| target.get(v).copied().unwrap_or(0) as i64 - var_degree(&b, v) as i64;
        let pick = (0..b.cols())
            .filter(|&v| b[(row, v)] == 0 && allowed(v))
            .max_by(|&x, &y| {
                dist[m + x]
                    .cmp(&dist[m + y])
                    .then(deficit(x).cmp(&deficit(y)))
                    .then(var_degree(&b, y).cmp(&var_degree(&b, x)))
                    .then(y.cmp(&x))
            })
            .ok_or_else(|| Error::Design(format!("row {row} cannot reach degree {degree}")))?;
        b[(row, pick)] = 1;
    }
    Ok(b)
}

/// Girth of the Tanner graph of `b` (`usize::MAX` when acyclic).
pub fn girth(b: &IntMatrix) -> usize {
    let (m, n) = (b.rows(), b.cols());
    let mut best = usize::MAX;
    for start in 0..m {
        // BFS with parent tracking; a non-tree edge closes a cycle
        let mut dist = vec![usize::MAX; m + n];
        let mut parent = vec![usize::MAX; m + n];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        while let Some(x) = queue.pop_front() {
            let nbrs: Vec<usize> = if x < m {
                (0..n).filter(|&v| b[(x, v)] != 0).map(|v| m + v).collect()
            } else {
                (0..m).filter(|&c| b[(c, x - m)] != 0).collect()
            };
            for y in nbrs {
                if y == parent[x] {
                    continue;
                }
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                } else {
                    best = best.min(dist[x] + dist[y] + 1);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_edge_goes_to_check_zero() {
        let b = peg_place(&IntMatrix::zeros(3, 1), &[1], &[0], |_, _| true).unwrap();
        assert_eq!(b[(0, 0)], 1);
    }

    #[test]
    fn respects_mask_and_reports_infeasible() {
        // column 1 is isolated, so checks 1 and 2 tie on distance and degree
        let b = peg_place(&IntMatrix::zeros(3, 2), &[2, 1], &[0, 1], |c, _| c != 0).unwrap();
        assert_eq!(b.to_rows(), vec![vec![0, 0], vec![1, 1], vec![1, 0]]);
        assert!(peg_place(&IntMatrix::zeros(2, 1), &[3], &[0], |_, _| true).is_err());
    }

    #[test]
    fn girth_of_small_graphs() {
        let square = IntMatrix::filled(2, 2, 1);
        assert_eq!(girth(&square), 4);
        let path = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(girth(&path), usize::MAX);
    }

    #[test]
    fn row_growth_prefers_far_and_deficient_columns() {
        let mut b = IntMatrix::zeros(2, 4);
        b[(0, 0)] = 1;
        b[(0, 1)] = 1;
        let out = peg_add_row(&b, 1, 2, Some(0), &[0, 0, 0, 3], |_| true).unwrap();
        // column 1 would close a 4-cycle; 2 and 3 are unreachable, 3 is short
        assert_eq!(out.row(1), &[1, 0, 0, 1]);
    }
}
