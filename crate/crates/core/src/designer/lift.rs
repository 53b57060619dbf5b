//! Girth-targeted circulant lifting.
//!
//! Every closed walk of the unified graph shorter than the girth target that
//! survives spreading must get a non-zero alternating shift sum modulo `Z`.
//! Shifts are assigned edge by edge; when an edge completes a walk, the shift
//! values that would close it are avoided. Restarts shuffle the edge order and
//! the preferred shift of each edge.

use crate::graph::lifting::surviving_walks;
use crate::graph::UnifiedGraph;
use crate::matrix::IntMatrix;
use crate::profile::{CodeProfile, Shape};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub lifting: usize,
    pub girth: usize,
    /// Surviving walk classes that had to be broken.
    pub walks: usize,
    pub restarts_used: usize,
    /// Girth requested before any fallback.
    pub target_girth: usize,
    /// Walks left closed by the best pass at the requested girth; 0 when it
    /// was reached.
    pub closed_at_target: usize,
}

/// A walk as signed edge multiplicities.
struct Constraint {
    terms: Vec<(usize, i64)>,
}

fn constraints(g: &UnifiedGraph, max_len: usize) -> Vec<Constraint> {
    surviving_walks(g, max_len)
        .into_iter()
        .map(|w| {
            let h = w.len() / 2;
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for i in 0..h {
                let (v, c, next) = (w[2 * i], w[2 * i + 1], w[(2 * i + 2) % w.len()]);
                *acc.entry(g.edge_id(c, v).expect("walk edge")).or_default() += 1;
                *acc.entry(g.edge_id(c, next).expect("walk edge")).or_default() -= 1;
            }
            Constraint { terms: acc.into_iter().filter(|&(_, a)| a != 0).collect() }
        })
        .collect()
}

/// One greedy pass; returns the shifts and the number of walks left closed.
fn greedy(
    ne: usize,
    z: i64,
    cons: &[Constraint],
    order: &[usize],
    offset: &[i64],
) -> (Vec<i64>, usize) {
    let mut pos = vec![0; ne];
    for (i, &e) in order.iter().enumerate() {
        pos[e] = i;
    }
    // walks grouped by the edge that completes them
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); ne];
    let mut stuck = 0;
    for (k, c) in cons.iter().enumerate() {
        match c.terms.iter().max_by_key(|(e, _)| pos[*e]) {
            Some(&(e, _)) => closing[e].push(k),
            None => stuck += 1,
        }
    }
    let mut shift = vec![0i64; ne];
    let mut left = stuck;
    let mut bad = vec![0usize; z as usize];
    for &e in order {
        bad.iter_mut().for_each(|b| *b = 0);
        for &k in &closing[e] {
            let mut rest = 0i64;
            let mut coef = 0i64;
            for &(f, a) in &cons[k].terms {
                if f == e {
                    coef = a;
                } else {
                    rest += a * shift[f];
                }
            }
            for s in 0..z {
                if (rest + coef * s).rem_euclid(z) == 0 {
                    bad[s as usize] += 1;
                }
            }
        }
        let pick = (0..z)
            .map(|i| (i + offset[e]).rem_euclid(z))
            .min_by_key(|&s| bad[s as usize])
            .expect("z >= 1");
        left += bad[pick as usize];
        shift[e] = pick;
    }
    (shift, left)
}

/// Closed walks left by `shift`.
fn closed(z: i64, cons: &[Constraint], shift: &[i64]) -> usize {
    cons.iter()
        .filter(|c| c.terms.iter().map(|&(e, a)| a * shift[e]).sum::<i64>().rem_euclid(z) == 0)
        .count()
}

/// Coordinate descent: moves one edge at a time to the shift that closes the
/// fewest walks through it, until a full sweep changes nothing.
fn repair(ne: usize, z: i64, cons: &[Constraint], shift: &mut [i64], sweeps: usize) {
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (k, c) in cons.iter().enumerate() {
        for &(e, _) in &c.terms {
            through[e].push(k);
        }
    }
    let mut bad = vec![0usize; z as usize];
    for _ in 0..sweeps {
        let mut changed = false;
        for e in 0..ne {
            if through[e].is_empty() {
                continue;
            }
            bad.iter_mut().for_each(|b| *b = 0);
            for &k in &through[e] {
                let mut rest = 0i64;
                let mut coef = 0i64;
                for &(f, a) in &cons[k].terms {
                    if f == e {
                        coef = a;
                    } else {
                        rest += a * shift[f];
                    }
                }
                for s in 0..z {
                    if (rest + coef * s).rem_euclid(z) == 0 {
                        bad[s as usize] += 1;
                    }
                }
            }
            let cur = shift[e];
            let pick = (0..z).min_by_key(|&s| (bad[s as usize], s != cur, s)).expect("z >= 1");
            if pick != cur {
                shift[e] = pick;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Min-conflicts search: repeatedly picks a closed walk and moves one of its
/// edges to the shift closing the fewest walks through that edge. Returns
/// the number of walks still closed.
fn min_conflicts(
    ne: usize,
    z: i64,
    cons: &[Constraint],
    shift: &mut [i64],
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (k, c) in cons.iter().enumerate() {
        for &(e, _) in &c.terms {
            through[e].push(k);
        }
    }
    let sum = |c: &Constraint, shift: &[i64]| c.terms.iter().map(|&(e, a)| a * shift[e]).sum::<i64>();
    let mut is_closed: Vec<bool> = cons.iter().map(|c| sum(c, shift).rem_euclid(z) == 0).collect();
    let mut open_list: Vec<usize> = (0..cons.len()).filter(|&k| is_closed[k]).collect();
    let mut left = open_list.len();
    let mut best_left = left;
    let mut best_shift = shift.to_vec();
    let mut bad = vec![0usize; z as usize];
    for _ in 0..steps {
        open_list.retain(|&k| is_closed[k]);
        if open_list.is_empty() {
            break;
        }
        let k = open_list[rng.random_range(0..open_list.len())];
        let terms = &cons[k].terms;
        let (e, _) = terms[rng.random_range(0..terms.len())];
        bad.iter_mut().for_each(|b| *b = 0);
        for &j in &through[e] {
            let mut rest = 0i64;
            let mut coef = 0i64;
            for &(f, a) in &cons[j].terms {
                if f == e {
                    coef = a;
                } else {
                    rest += a * shift[f];
                }
            }
            for s in 0..z {
                if (rest + coef * s).rem_euclid(z) == 0 {
                    bad[s as usize] += 1;
                }
            }
        }
        let lo = *bad.iter().min().expect("z >= 1");
        let ties: Vec<i64> = (0..z).filter(|&s| bad[s as usize] == lo && s != shift[e]).collect();
        let Some(&pick) = ties.get(rng.random_range(0..ties.len().max(1))) else { continue };
        shift[e] = pick;
        for &j in &through[e] {
            let now = sum(&cons[j], shift).rem_euclid(z) == 0;
            if now && !is_closed[j] {
                open_list.push(j);
                left += 1;
            } else if !now && is_closed[j] {
                left -= 1;
            }
            is_closed[j] = now;
        }
        if left < best_left {
            best_left = left;
            best_shift.copy_from_slice(shift);
        }
    }
    shift.copy_from_slice(&best_shift);
    best_left
}

const MIN_CONFLICT_STEPS: usize = 100_000;

/// Best shifts found over `restarts` passes with the number of surviving
/// walks they leave closed.
fn search(
    profile: &CodeProfile,
    z: usize,
    girth: usize,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(CodeProfile, LiftReport, usize)> {
    if z == 0 {
        return Err(Error::param("lifting size must be at least 1"));
    }
    let g = UnifiedGraph::from_profile(&CodeProfile { shape: Shape { lifting: 0, ..profile.shape }, ..profile.clone() })?;
    let ne = g.edges().len();
    let cons = constraints(&g, girth.saturating_sub(2));
    let mut best: Option<(Vec<i64>, usize)> = None;
    let mut used = 0;
    for r in 0..restarts.max(1) {
        used = r + 1;
        let mut order: Vec<usize> = (0..ne).collect();
        let mut offset = vec![0i64; ne];
        if r > 0 {
            order.shuffle(rng);
            offset.iter_mut().for_each(|o| *o = rng.random_range(0..z as i64));
        }
        let (mut shift, mut left) = greedy(ne, z as i64, &cons, &order, &offset);
        if left > 0 {
            repair(ne, z as i64, &cons, &mut shift, 50);
            left = closed(z as i64, &cons, &shift);
        }
        if left > 0 {
            left = min_conflicts(ne, z as i64, &cons, &mut shift, MIN_CONFLICT_STEPS, rng);
        }
        if best.as_ref().is_none_or(|b| left < b.1) {
            best = Some((shift, left));
        }
        if left == 0 {
            break;
        }
    }
    let (shift, left) = best.expect("at least one pass");
    let s = profile.shape;
    let mut shifts = IntMatrix::filled(s.rows, s.cols, -1);
    for (id, e) in g.edges().iter().enumerate() {
        shifts[(e.check, e.var)] = shift[id] as i32;
    }
    let lifted = CodeProfile::from_shifts(
        Shape { lifting: z, ..s },
        shifts,
        profile.spread.clone(),
        profile.tail.clone(),
    );
    let report = LiftReport {
        lifting: z,
        girth,
        walks: cons.len(),
        restarts_used: used,
        target_girth: girth,
        closed_at_target: left,
    };
    Ok((lifted, report, left))
}

/// Assigns circulant shifts so that no surviving walk shorter than `girth`
/// closes in the lifted graph. Fails when `restarts` passes all leave at
/// least one walk closed.
pub fn lift_profile(
    profile: &CodeProfile,
    z: usize,
    girth: usize,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(CodeProfile, LiftReport)> {
    let (lifted, report, left) = search(profile, z, girth, restarts, rng)?;
    if left > 0 {
        return Err(Error::Design(format!(
            "{left} walks shorter than {girth} stay closed at Z={z} after {} passes",
            report.restarts_used
        )));
    }
    Ok((lifted, report))
}

/// Lifts with girth target `girth`, stepping the target down by 2 (not below
/// `floor`) while it cannot be met. The report keeps the original target and
/// how many walks it left closed.
pub fn lift_with_fallback(
    profile: &CodeProfile,
    z: usize,
    girth: usize,
    floor: usize,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(CodeProfile, LiftReport)> {
    let mut target = girth;
    let mut closed_at_target = 0;
    loop {
        let (lifted, mut report, left) = search(profile, z, target, restarts, rng)?;
        if target == girth {
            closed_at_target = left;
        }
        if left == 0 {
            report.target_girth = girth;
            report.closed_at_target = closed_at_target;
            return Ok((lifted, report));
        }
        if target <= floor.max(6) {
            return Err(Error::Design(format!(
                "{left} walks shorter than {target} stay closed at Z={z}; girth {girth} left {closed_at_target}"
            )));
        }
        target -= 2;
    }
}
