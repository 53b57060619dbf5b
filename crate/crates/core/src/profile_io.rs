//! Plain-text profile format.
//!
//! ```text
//! # comment
//! hrc_rows 4
//! hrc_cols 26
//! rows 40
//! cols 62
//! coupling_width 1
//! punctured 1
//! lifting 39
//!
//! [shifts]
//!  12 -1  3 ...
//! [spread]
//!   0 -1  1 ...
//! [tail]
//!   1  0 ...
//! ```
//!
//! `-1` marks an absent entry. The base matrix is not stored; it is derived
//! from the shift matrix. [`to_text`] writes the canonical form (no comments,
//! columns right-aligned per section), which [`from_text`] reads back
//! unchanged.

use crate::matrix::IntMatrix;
use crate::profile::{CodeProfile, Shape};
use crate::{Error, Result};
use std::fmt::Write as _;

const SCALARS: [&str; 7] = [
    "hrc_rows",
    "hrc_cols",
    "rows",
    "cols",
    "coupling_width",
    "punctured",
    "lifting",
];

pub fn to_text(p: &CodeProfile) -> String {
    let s = &p.shape;
    let vals = [
        s.hrc_rows,
        s.hrc_cols,
        s.rows,
        s.cols,
        s.coupling_width,
        s.punctured,
        s.lifting,
    ];
    let mut out = String::new();
    for (k, v) in SCALARS.iter().zip(vals) {
        let _ = writeln!(out, "{k} {v}");
    }
    for (name, m) in [("shifts", &p.shifts), ("spread", &p.spread), ("tail", &p.tail)] {
        let _ = writeln!(out, "\n[{name}]");
        write_matrix(&mut out, m);
    }
    out
}

fn write_matrix(out: &mut String, m: &IntMatrix) {
    let width = (0..m.rows())
        .flat_map(|r| m.row(r).iter().map(|v| v.to_string().len()))
        .max()
        .unwrap_or(1);
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|v| format!("{v:>width$}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn from_text(text: &str) -> Result<CodeProfile> {
    let mut scalars: [Option<usize>; 7] = [None; 7];
    let mut sections: Vec<(String, usize, Vec<Vec<i32>>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if !["shifts", "spread", "tail"].contains(&name) {
                return Err(err(format!("unknown section [{name}]")));
            }
            if sections.iter().any(|(n, _, _)| n == name) {
                return Err(err(format!("duplicate section [{name}]")));
            }
            sections.push((name.to_string(), line_no, Vec::new()));
            continue;
        }
        if let Some((_, _, rows)) = sections.last_mut() {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<i32>().map_err(|_| err(format!("bad integer {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let value = parts.next().ok_or_else(|| err(format!("missing value for {key}")))?;
        if parts.next().is_some() {
            return Err(err(format!("trailing tokens after {key}")));
        }
        let slot = SCALARS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| err(format!("unknown key {key:?}")))?;
        if scalars[slot].is_some() {
            return Err(err(format!("duplicate key {key}")));
        }
        scalars[slot] = Some(value.parse().map_err(|_| err(format!("bad value {value:?}")))?);
    }
    let get = |i: usize| {
        scalars[i].ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key {}", SCALARS[i]) })
    };
    let shape = Shape {
        hrc_rows: get(0)?,
        hrc_cols: get(1)?,
        rows: get(2)?,
        cols: get(3)?,
        coupling_width: get(4)?,
        punctured: get(5)?,
        lifting: get(6)?,
    };
    let take = |name: &str, cols: usize| -> Result<IntMatrix> {
        let (_, line, rows) = sections
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing section [{name}]") })?;
        let m = if shape.rows == 0 {
            Some(IntMatrix::zeros(0, cols))
        } else {
            IntMatrix::from_rows(rows)
        };
        match m {
            Some(m) if m.rows() == shape.rows && m.cols() == cols => Ok(m),
            _ => Err(Error::Parse {
                line: *line,
                msg: format!("[{name}] must be {}x{cols}", shape.rows),
            }),
        }
    };
    let shifts = take("shifts", shape.cols)?;
    let spread = take("spread", shape.cols)?;
    let tail = take("tail", shape.rows * shape.coupling_width)?;
    Ok(CodeProfile::from_shifts(shape, shifts, spread, tail))
}

pub fn read(path: &std::path::Path) -> Result<CodeProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::param(format!("cannot read {}: {e}", path.display())))?;
    from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::tail_pattern;

    fn sample() -> CodeProfile {
        let shape = Shape {
            hrc_rows: 1,
            hrc_cols: 3,
            rows: 2,
            cols: 4,
            coupling_width: 1,
            punctured: 0,
            lifting: 13,
        };
        let shifts = IntMatrix::from_rows(&[vec![0, 12, 5, -1], vec![3, -1, 7, 0]]).unwrap();
        let spread = IntMatrix::from_rows(&[vec![1, 0, 0, -1], vec![0, -1, 1, 0]]).unwrap();
        CodeProfile::from_shifts(shape, shifts, spread, tail_pattern(2, 1))
    }

    #[test]
    fn canonical_round_trip() {
        let p = sample();
        let text = to_text(&p);
        let back = from_text(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let text = to_text(&sample()).replace("lifting 13", "# note\nlifting    13   # trailing");
        assert_eq!(from_text(&text).unwrap(), sample());
    }

    #[test]
    fn ragged_section_reports_line() {
        let text = to_text(&sample()).replace(" 3 -1  7  0", " 3 -1 7");
        match from_text(&text) {
            Err(Error::Parse { line, .. }) => assert!(line > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("colour 3\n{}", to_text(&sample()));
        assert!(matches!(from_text(&text), Err(Error::Parse { line: 1, .. })));
    }
}
