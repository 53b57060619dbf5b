//! Survival of proto cycles under spreading and circulant lifting, and
//! enumeration of the closed walks that lifting has to break.

use super::UnifiedGraph;
use crate::{Error, Result};
use std::collections::HashSet;

/// Checks that `walk = [v0, c0, v1, c1, ..]` is a closed walk on edges of `g`
/// that never immediately reverses, including across the wrap-around.
pub fn check_walk(g: &UnifiedGraph, walk: &[usize]) -> Result<()> {
    let n = walk.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::structure(format!("walk of length {n} is not a closed walk")));
    }
    for i in 0..n {
        let (a, b, c) = (walk[i], walk[(i + 1) % n], walk[(i + 2) % n]);
        if a == c {
            return Err(Error::structure(format!("walk backtracks at position {i}")));
        }
        let (chk, var) = if i % 2 == 0 { (b, a) } else { (a, b) };
        if g.edge_id(chk, var).is_none() {
            return Err(Error::structure(format!("({chk},{var}) is not an edge")));
        }
    }
    Ok(())
}

/// True when the walk closes in the coupled graph (zero path value) and in the
/// lifted graph (alternating shift sum divisible by the lifting size).
pub fn survives_lifting(g: &UnifiedGraph, walk: &[usize]) -> Result<bool> {
    check_walk(g, walk)?;
    let phi = g.path_value(walk).expect("checked walk");
    let z = g.lifting.max(1) as i64;
    let shift = g.shift_value(walk).expect("checked walk");
    Ok(phi == 0 && shift.rem_euclid(z) == 0)
}

/// Closed non-backtracking walks of each even length in `4..=max_len` whose
/// path value is zero, one representative per rotation/reversal class. Walks
/// start at their smallest variable node.
pub fn surviving_walks(g: &UnifiedGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut walk = Vec::new();
    for v in 0..g.vars {
        walk.clear();
        walk.push(v);
        extend(g, v, max_len, &mut walk, &mut seen, &mut out);
    }
    out
}

fn extend(
    g: &UnifiedGraph,
    root: usize,
    max_len: usize,
    walk: &mut Vec<usize>,
    seen: &mut HashSet<Vec<usize>>,
    out: &mut Vec<Vec<usize>>,
) {
    // walk ends at a variable node.
    let v = *walk.last().unwrap();
    let came_from = (walk.len() >= 2).then(|| walk[walk.len() - 2]);
    for &e in g.var_edges(v) {
        let c = g.edge(e).check;
        if Some(c) == came_from {
            continue;
        }
        walk.push(c);
        for &f in g.check_edges(c) {
            let u = g.edge(f).var;
            if u == v || u < root {
                continue;
            }
            if u == root && c != walk[1] && g.path_value(walk) == Some(0) {
                let key = canonical(walk);
                if seen.insert(key) {
                    out.push(walk.clone());
                }
            }
            if walk.len() + 2 <= max_len {
                walk.push(u);
                extend(g, root, max_len, walk, seen, out);
                walk.pop();
            }
        }
        walk.pop();
    }
}

/// Smallest rotation (by two positions) of the walk or its reversal.
fn canonical(walk: &[usize]) -> Vec<usize> {
    let n = walk.len();
    let mut best: Option<Vec<usize>> = None;
    let mut rev: Vec<usize> = walk.iter().rev().copied().collect();
    rev.rotate_right(1);
    for base in [walk.to_vec(), rev] {
        for r in (0..n).step_by(2) {
            let mut cand = base.clone();
            cand.rotate_left(r);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}
