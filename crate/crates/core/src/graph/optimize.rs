//! Greedy edge-spreading optimization.
//!
//! Changing the label of edge `(c, v)` by `theta` shifts the path value of
//! every walk through `v` that leaves through `c` by `+theta` and of every walk
//! that returns through `c` by `-theta`. The root's polynomial therefore
//! predicts exactly how many cycles through `v` a relabeling removes or
//! creates, and since every such cycle passes through `v`, that is also the
//! change of the whole-graph count.

use super::counting::{count_at_var, CountOptions, CyclePolynomial, Factor, Term};
use rayon::prelude::*;
use super::UnifiedGraph;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// An accepted relabeling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub var: usize,
    pub check: usize,
    pub from: i32,
    pub to: i32,
    pub length: usize,
    /// Cycles of the target length through `var` removed by the move.
    pub removed: i64,
}

/// Polynomial of `poly.var` after relabeling edge `(check, poly.var)` to
/// `new_label`. Pure: `g` and `poly` are not modified.
pub fn eval_reallocation(
    g: &UnifiedGraph,
    poly: &CyclePolynomial,
    check: usize,
    new_label: i32,
) -> Result<CyclePolynomial> {
    let id = g
        .edge_id(check, poly.var)
        .ok_or_else(|| Error::structure(format!("no edge ({check},{})", poly.var)))?;
    let edge = g.edge(id);
    if new_label < 0 || new_label as usize > g.coupling_width {
        return Err(Error::structure(format!("label {new_label} outside [0,{}]", g.coupling_width)));
    }
    if edge.locked && new_label != edge.spread {
        return Err(Error::structure(format!("edge ({check},{}) is locked", poly.var)));
    }
    Ok(shifted(poly, check, new_label - edge.spread))
}

fn shifted(poly: &CyclePolynomial, check: usize, theta: i32) -> CyclePolynomial {
    let terms = poly
        .terms
        .iter()
        .map(|t| {
            let back = if t.returning == check { theta } else { 0 };
            let mut factors: Vec<(Factor, u64)> = t
                .factors
                .iter()
                .map(|&(f, n)| {
                    let out = if f.check == check { theta } else { 0 };
                    (Factor { check: f.check, phi: f.phi + out - back }, n)
                })
                .collect();
            factors.sort_unstable_by_key(|(f, _)| *f);
            Term { returning: t.returning, factors }
        })
        .collect();
    CyclePolynomial { var: poly.var, length: poly.length, terms }
}

/// Up to `max_moves` greedy relabelings, each removing as many surviving
/// `l_target`-cycles as possible without increasing the number of shorter
/// cycles through the relabeled node. Ties go to the lowest `(var, check, label)`.
pub fn optimize_spreading(
    g: &UnifiedGraph,
    l_target: usize,
    max_moves: usize,
    opts: &CountOptions,
) -> Result<(UnifiedGraph, Vec<Move>)> {
    let mut g = g.clone();
    let mut moves = Vec::new();
    let lengths: Vec<usize> = (4..=l_target).step_by(2).collect();
    // only nodes with a free edge can move
    let active: Vec<usize> =
        (0..g.vars).filter(|&v| g.var_edges(v).iter().any(|&e| !g.edge(e).locked)).collect();
    for _ in 0..max_moves {
        let polys: Vec<Vec<CyclePolynomial>> = lengths
            .iter()
            .map(|&l| {
                active
                    .par_iter()
                    .map(|&v| count_at_var(&g, v, l, opts, &mut 0).map(|(_, p)| p))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let (target, shorter) = polys.split_last().expect("at least one length");
        let mut best: Option<Move> = None;
        for (slot, &v) in active.iter().enumerate() {
            let mut edges: Vec<usize> = g.var_edges(v).to_vec();
            edges.sort_by_key(|&e| g.edge(e).check);
            for e in edges {
                let edge = g.edge(e).clone();
                if edge.locked {
                    continue;
                }
                let before = target[slot].zero_factors() as i64;
                for label in edge.floor.max(0)..=edge.ceil.min(g.coupling_width as i32) {
                    if label == edge.spread {
                        continue;
                    }
                    let theta = label - edge.spread;
                    let creates_short = shorter.iter().any(|p| {
                        shifted(&p[slot], edge.check, theta).zero_factors() > p[slot].zero_factors()
                    });
                    if creates_short {
                        continue;
                    }
                    let after = shifted(&target[slot], edge.check, theta).zero_factors() as i64;
                    let removed = (before - after) / 2;
                    if best.as_ref().is_none_or(|b| removed > b.removed) {
                        best = Some(Move {
                            var: v,
                            check: edge.check,
                            from: edge.spread,
                            to: label,
                            length: l_target,
                            removed,
                        });
                    }
                }
            }
        }
        match best {
            Some(m) if m.removed > 0 => {
                g.set_spread(m.check, m.var, m.to)?;
                moves.push(m);
            }
            _ => break,
        }
    }
    Ok((g, moves))
}
