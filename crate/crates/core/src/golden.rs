//! Fixed reference instances and the golden-number checks run by `repro`.

use crate::graph::{count_at_var, count_total, eval_reallocation, optimize_spreading, CountOptions, UnifiedGraph};
use crate::profile::{code_rate, Shape};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Five-variable, four-check example graph with coupling width 1. Root node
/// 4 has no surviving 4-cycle and two surviving 6-cycles.
pub fn example_graph() -> UnifiedGraph {
    UnifiedGraph::new(
        4,
        5,
        1,
        [
            (0, 1, 0),
            (0, 2, 0),
            (0, 3, 1),
            (1, 2, 1),
            (1, 4, 1),
            (2, 0, 1),
            (2, 2, 1),
            (2, 3, 0),
            (2, 4, 0),
            (3, 0, 0),
            (3, 1, 1),
            (3, 4, 0),
        ],
    )
    .expect("static graph")
}

/// Parameters of the shipped design example.
pub fn design_shape(lifting: usize) -> Shape {
    Shape {
        hrc_rows: 4,
        hrc_cols: 26,
        rows: 40,
        cols: 62,
        coupling_width: 1,
        punctured: 1,
        lifting,
    }
}

pub const DESIGN_LENGTH: usize = 10;

/// Row counts of the six classical pruning points, highest rate first.
pub const CLASSICAL_ROWS: [usize; 6] = [4, 6, 9, 13, 20, 40];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl GoldenCheck {
    fn new(name: &str, expected: impl ToString, actual: impl ToString) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        GoldenCheck { name: name.into(), pass: expected == actual, expected, actual }
    }
}

/// Cycle counts, reallocation deltas and the optimizer's first move on the
/// example graph.
pub fn example_checks() -> Result<Vec<GoldenCheck>> {
    let g = example_graph();
    let opts = CountOptions::default();
    let (q4, p4) = count_at_var(&g, 4, 4, &opts, &mut 0)?;
    let (q6, p6) = count_at_var(&g, 4, 6, &opts, &mut 0)?;
    let mut deltas = Vec::new();
    for c in [1, 2, 3] {
        let cur = g.spread(c, 4).expect("edge");
        let q = eval_reallocation(&g, &p6, c, 1 - cur)?;
        deltas.push((p6.zero_factors() as i64 - q.zero_factors() as i64) / 2);
    }
    let new4 = eval_reallocation(&g, &p4, 2, 1)?.cycles();
    let (_, moves) = optimize_spreading(&g, 6, 1, &opts)?;
    let chosen = moves
        .first()
        .map(|m| format!("T[{}][{}] {}->{}", m.check, m.var, m.from, m.to))
        .unwrap_or_else(|| "none".into());
    Ok(vec![
        GoldenCheck::new("Q4 at v4", 0, q4),
        GoldenCheck::new("Q6 at v4", 2, q6),
        GoldenCheck::new("Q4 whole graph", 0, count_total(&g, 4, &opts)?),
        GoldenCheck::new("removable 6-cycles for c1,c2,c3", "{0,1,1}", format!("{{{},{},{}}}", deltas[0], deltas[1], deltas[2])),
        GoldenCheck::new("new 4-cycles for T[2][4] 0->1", 2, new4),
        GoldenCheck::new("optimizer first move", "T[3][4] 0->1", chosen),
    ])
}

/// Rates of the design family at the extreme pruning points and the
/// transmitted lengths at both lifting sizes.
pub fn rate_checks() -> Result<Vec<GoldenCheck>> {
    let s = design_shape(39);
    let high = code_rate(&s, DESIGN_LENGTH, 4, 26)?;
    let low = code_rate(&s, DESIGN_LENGTH, 40, 62)?;
    let n = |z: usize| (s.cols * DESIGN_LENGTH + s.rows - (DESIGN_LENGTH + 1)) * z;
    Ok(vec![
        GoldenCheck::new("highest rate 220/253", num_rational::Ratio::new(220, 253), high),
        GoldenCheck::new("lowest rate 220/649", num_rational::Ratio::new(220, 649), low),
        GoldenCheck::new("transmitted bits Z=39", 25311, n(39)),
        GoldenCheck::new("transmitted bits Z=390", 253110, n(390)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_all_pass() {
        for c in example_checks().unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn rates_all_pass() {
        for c in rate_checks().unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }
}
