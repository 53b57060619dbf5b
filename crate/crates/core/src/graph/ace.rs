//! Approximate cycle extrinsic message degree (ACE) of surviving cycles.
//!
//! The ACE of a cycle is `sum (d_v - 2)` over its variable nodes. Cycles are
//! those of the coupled graph: walks on the unified graph that return to the
//! root at the same spatial position and visit no node twice at the same
//! position. A proto node may appear twice at different positions.

use super::UnifiedGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Minimum ACE per cycle length; lengths without a surviving cycle map to
/// `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AceSpectrum {
    pub min_ace: BTreeMap<usize, Option<u32>>,
}

impl AceSpectrum {
    pub fn get(&self, l: usize) -> Option<u32> {
        self.min_ace.get(&l).copied().flatten()
    }

    /// True when every surviving cycle of length `l` has ACE at least
    /// `bound(l)`.
    pub fn meets(&self, bound: impl Fn(usize) -> u32) -> bool {
        self.min_ace.iter().all(|(&l, m)| m.is_none_or(|m| m >= bound(l)))
    }
}

/// ACE spectrum for lengths `4..=l_max`, computed exactly by a depth-first
/// search that abandons paths whose ACE already reaches the best value found
/// for every length still reachable.
pub fn ace_spectrum(g: &UnifiedGraph, l_max: usize) -> AceSpectrum {
    let ace: Vec<u32> = (0..g.vars).map(|v| g.var_degree(v).saturating_sub(2) as u32).collect();
    ace_spectrum_with(g, l_max, &ace)
}

/// As [`ace_spectrum`] with caller-supplied per-node ACE values.
pub fn ace_spectrum_with(g: &UnifiedGraph, l_max: usize, ace: &[u32]) -> AceSpectrum {
    let lengths: Vec<usize> = (4..=l_max).step_by(2).collect();
    let mut best: Vec<u32> = vec![u32::MAX; lengths.len()];
    let mut search = Search {
        g,
        l_max,
        ace,
        best: &mut best,
        path: Vec::new(),
    };
    for root in 0..g.vars {
        if g.var_degree(root) < 2 {
            continue;
        }
        search.path.clear();
        search.path.push((root, 0));
        search.dfs(root, ace[root]);
    }
    let min_ace = lengths
        .iter()
        .zip(best)
        .map(|(&l, b)| (l, (b != u32::MAX).then_some(b)))
        .collect();
    AceSpectrum { min_ace }
}

/// Some surviving cycle through check `root` whose ACE (per-node values
/// `ace`) falls below `bound(len)`, as `(len, ace)`, searching lengths up to
/// `l_max`.
pub fn ace_violation(
    g: &UnifiedGraph,
    root: usize,
    l_max: usize,
    ace: &[u32],
    bound: impl Fn(usize) -> u32,
) -> Option<(usize, u32)> {
    let bounds: Vec<u32> = (4..=l_max).step_by(2).map(&bound).collect();
    let mut walk = vec![(root, 0)];
    violation_dfs(g, &bounds, ace, l_max, &mut walk, 0)
}

/// True when `node` already sits at `pos` on the walk; variables occupy odd
/// or even slots depending on `var_parity`.
fn visited(walk: &[(usize, i64)], var_parity: usize, is_var: bool, node: usize, pos: i64) -> bool {
    walk.iter()
        .enumerate()
        .any(|(i, &(n, p))| (i % 2 == var_parity) == is_var && n == node && p == pos)
}

fn violation_dfs(
    g: &UnifiedGraph,
    bounds: &[u32],
    ace: &[u32],
    l_max: usize,
    walk: &mut Vec<(usize, i64)>,
    acc: u32,
) -> Option<(usize, u32)> {
    // walk = [c0, v1, c1, .., v_j-1, c_j-1] with positions; c0 sits at 0
    let (c, cp) = *walk.last().unwrap();
    let root = walk[0].0;
    for &e in g.check_edges(c) {
        let v = g.edge(e).var;
        let vp = cp - i64::from(g.edge(e).spread);
        if visited(walk, 1, true, v, vp) {
            continue;
        }
        let next = acc + ace[v];
        let len = walk.len() + 1;
        if len >= 4 && next < bounds[(len - 4) / 2] {
            if let Some(back) = g.edge_id(root, v) {
                if vp + i64::from(g.edge(back).spread) == 0 && back != e {
                    return Some((len, next));
                }
            }
        }
        if len + 2 > l_max || bounds[(len + 2 - 4) / 2..].iter().all(|&b| next >= b) {
            continue;
        }
        walk.push((v, vp));
        for &f in g.var_edges(v) {
            if f == e {
                continue;
            }
            let d = g.edge(f).check;
            let dp = vp + i64::from(g.edge(f).spread);
            if visited(walk, 1, false, d, dp) {
                continue;
            }
            walk.push((d, dp));
            let hit = violation_dfs(g, bounds, ace, l_max, walk, next);
            walk.pop();
            if hit.is_some() {
                return hit;
            }
        }
        walk.pop();
    }
    None
}

struct Search<'a> {
    g: &'a UnifiedGraph,
    l_max: usize,
    ace: &'a [u32],
    best: &'a mut Vec<u32>,
    /// `[v0, c0, v1, c1, ..]` with positions; v0 sits at 0.
    path: Vec<(usize, i64)>,
}

impl Search<'_> {
    fn dfs(&mut self, root: usize, acc: u32) {
        let (v, vp) = *self.path.last().unwrap();
        let g = self.g;
        for &e in g.var_edges(v) {
            let c = g.edge(e).check;
            let cp = vp + i64::from(g.edge(e).spread);
            if visited(&self.path, 0, false, c, cp) {
                continue;
            }
            self.path.push((c, cp));
            let len = self.path.len();
            for &f in g.check_edges(c) {
                if f == e {
                    continue;
                }
                let u = g.edge(f).var;
                let up = cp - i64::from(g.edge(f).spread);
                if u == root && up == 0 {
                    if len >= 4 {
                        let slot = (len - 4) / 2;
                        self.best[slot] = self.best[slot].min(acc);
                    }
                    continue;
                }
                // only cycles whose smallest variable node is the root
                if u < root || visited(&self.path, 0, true, u, up) || len + 2 > self.l_max {
                    continue;
                }
                let next = acc + self.ace[u];
                let first_reachable = (len + 2 - 4) / 2;
                if self.best[first_reachable..].iter().all(|&b| next >= b) {
                    continue;
                }
                self.path.push((u, up));
                self.dfs(root, next);
                self.path.pop();
            }
            self.path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_two_cycle_has_zero_ace() {
        let g = UnifiedGraph::new(2, 2, 0, [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)]).unwrap();
        let s = ace_spectrum(&g, 8);
        assert_eq!(s.get(4), Some(0));
        assert_eq!(s.get(6), None);
    }

    #[test]
    fn violation_matches_spectrum() {
        let g = UnifiedGraph::new(2, 3, 1, [(0, 0, 0), (0, 1, 0), (0, 2, 0), (1, 0, 0), (1, 1, 0)]).unwrap();
        let ace: Vec<u32> = (0..3).map(|v| g.var_degree(v).saturating_sub(2) as u32).collect();
        assert_eq!(ace_violation(&g, 0, 8, &ace, |_| 1), Some((4, 0)));
        assert_eq!(ace_violation(&g, 1, 8, &ace, |_| 0), None);
    }

    #[test]
    fn broken_cycles_are_ignored() {
        let g = UnifiedGraph::new(2, 2, 1, [(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 1, 0)]).unwrap();
        assert_eq!(ace_spectrum(&g, 8).get(4), None);
    }
}
