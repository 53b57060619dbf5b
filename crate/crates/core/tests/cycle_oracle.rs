//! Cycle counts from monomial message passing against exhaustive walk
//! enumeration on an explicitly built coupled graph.

use esrl_core::graph::counting::count_all;
use esrl_core::graph::{count_at_var, count_total, optimize_spreading, CountOptions, UnifiedGraph};
mod common;

use common::{random_graph, Coupled};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn message_passing_matches_walk_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = CountOptions::default();
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        for l in [4, 6, 8] {
            let coupled = Coupled::new(&g, l);
            let mut walks = 0;
            let mut zero = 0;
            for v in 0..g.vars {
                walks += coupled.walks(coupled.middle * coupled.vars + v, l);
                zero += count_at_var(&g, v, l, &opts, &mut 0).unwrap().1.zero_factors();
            }
            assert_eq!(walks, zero, "l={l} graph {:?}", g.edges());
            let half = (l / 2) as u64;
            if (walks / 2) % half == 0 {
                assert_eq!(count_total(&g, l, &opts).unwrap(), walks / 2 / half);
            } else {
                assert!(count_total(&g, l, &opts).is_err());
            }
        }
    }
}

#[test]
fn optimizer_moves_are_local_and_never_add_short_cycles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = CountOptions::default();
    for _ in 0..60 {
        let mut g = random_graph(&mut rng);
        if g.coupling_width == 0 {
            continue;
        }
        let before4 = count_total(&g, 4, &opts).unwrap();
        let (h, moves) = optimize_spreading(&g, 6, 20, &opts).unwrap();
        for m in &moves {
            let per_var: u64 = count_all(&g, 6, &opts).unwrap().iter().map(|p| p.cycles()).sum();
            g.set_spread(m.check, m.var, m.to).unwrap();
            let after: u64 = count_all(&g, 6, &opts).unwrap().iter().map(|p| p.cycles()).sum();
            // every removed cycle passes through m.var and is seen at each of
            // its three variable nodes
            assert_eq!((per_var as i64 - after as i64) / 3, m.removed);
            assert!(m.removed > 0);
        }
        assert_eq!(g.spread_matrix(), h.spread_matrix());
        assert!(count_total(&h, 4, &opts).unwrap() <= before4);
        let coupled = Coupled::new(&h, 6);
        let walks: u64 = (0..h.vars).map(|v| coupled.walks(coupled.middle * h.vars + v, 6)).sum();
        assert_eq!(walks / 2 / 3, count_total(&h, 6, &opts).unwrap());
    }
}

#[test]
fn counting_cost_stays_within_envelope_on_a_dense_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut triples = Vec::new();
    for c in 0..40 {
        for v in 0..62 {
            if rng.random_bool(0.127) {
                triples.push((c, v, rng.random_range(0..=1)));
            }
        }
    }
    let g = UnifiedGraph::new(40, 62, 1, triples).unwrap();
    let edges = g.edges().len() as u64;
    for l in [4, 6] {
        let mut ops = 0;
        let mut widest = 0;
        for v in 0..g.vars {
            let mut local = 0;
            let (_, p) = count_at_var(&g, v, l, &CountOptions::default(), &mut local).unwrap();
            ops += local;
            widest = widest.max(p.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0) as u64);
        }
        // messages have at most (checks x path values) distinct factors
        let m_bound = 40 * (l as u64 + 1);
        assert!(ops <= l as u64 * edges * m_bound * g.vars as u64, "ops {ops}");
        assert!(widest <= m_bound);
    }
}
