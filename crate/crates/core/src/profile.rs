//! The ESRL code profile: protomatrix, spreading labels, circulant shifts and
//! tail matrix, plus the structural operations on it (split, prune, rate,
//! validation).
//!
//! Column layout of the `rows x cols` protomatrix:
//!
//! ```text
//!            info (k)        HRC parity (m')   SSC (m - m')
//! HRC rows  [    ...      |   lower-tri      |     0      ]
//! IRC rows  [    ...      |      ...         | lower-tri  ]
//! ```
//!
//! so parity column `k + c` is the pivot of row `c` for every row.

use crate::gf2;
use crate::matrix::IntMatrix;
use crate::{Error, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Structural parameters of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    /// Rows of the highest-rate core.
    pub hrc_rows: usize,
    /// Columns of the highest-rate core.
    pub hrc_cols: usize,
    pub rows: usize,
    pub cols: usize,
    pub coupling_width: usize,
    /// Number of punctured leading columns.
    pub punctured: usize,
    /// Circulant size; 0 when the profile is not lifted yet.
    pub lifting: usize,
}

impl Shape {
    /// Information columns per spatial position.
    pub fn info_cols(&self) -> usize {
        self.cols - self.rows
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeProfile {
    pub shape: Shape,
    /// Binary protomatrix, derived from `shifts` when loaded from disk.
    pub base: IntMatrix,
    /// Spreading label per edge in `[0, coupling_width]`, -1 where absent.
    pub spread: IntMatrix,
    /// Circulant shift per edge in `[0, lifting)`, -1 where absent. Unlifted
    /// profiles carry 0 on every edge.
    pub shifts: IntMatrix,
    /// Tail blocks `Q_1..Q_w` side by side, `rows x (coupling_width * rows)`.
    pub tail: IntMatrix,
}

/// One structural problem found by [`CodeProfile::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { detail: String },
    NonBinaryBase { row: usize, col: usize, value: i32 },
    LabelOutOfRange { row: usize, col: usize, label: i32 },
    LabelBaseMismatch { row: usize, col: usize },
    ShiftOutOfRange { row: usize, col: usize, shift: i32 },
    ShiftBaseMismatch { row: usize, col: usize },
    UpperRightNonZero { row: usize, col: usize },
    SscNotLowerTriangular { row: usize, col: usize },
    MissingPivot { row: usize },
    PivotNotInFirstBlock { row: usize },
    ParityNotEncodable { row: usize, col: usize },
    TailEntry { block: usize, row: usize, col: usize, value: i32 },
    HrcColumnWeight { col: usize, weight: usize },
    PuncturedNotConnected { col: usize, row: usize },
    IrcRowWeight { row: usize, weight: usize },
    PuncturedTailOverlap { row: usize, col: usize, block: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Shape { detail } => write!(f, "shape: {detail}"),
            NonBinaryBase { row, col, value } => {
                write!(f, "base entry ({row},{col}) = {value} is not binary")
            }
            LabelOutOfRange { row, col, label } => {
                write!(f, "spreading label ({row},{col}) = {label} out of range")
            }
            LabelBaseMismatch { row, col } => {
                write!(f, "spreading label ({row},{col}) disagrees with base presence")
            }
            ShiftOutOfRange { row, col, shift } => {
                write!(f, "shift ({row},{col}) = {shift} out of range")
            }
            ShiftBaseMismatch { row, col } => {
                write!(f, "shift ({row},{col}) disagrees with base presence")
            }
            UpperRightNonZero { row, col } => {
                write!(f, "HRC row {row} touches SSC column {col}")
            }
            SscNotLowerTriangular { row, col } => {
                write!(f, "SSC entry ({row},{col}) above the diagonal")
            }
            MissingPivot { row } => write!(f, "row {row} has no parity pivot"),
            PivotNotInFirstBlock { row } => {
                write!(f, "pivot of row {row} is not spread to the first sub-matrix")
            }
            ParityNotEncodable { row, col } => write!(
                f,
                "parity entry ({row},{col}) above the pivot is in the first sub-matrix"
            ),
            TailEntry { block, row, col, value } => write!(
                f,
                "tail block {block} entry ({row},{col}) = {value} breaks the banded lower-triangular pattern"
            ),
            HrcColumnWeight { col, weight } => {
                write!(f, "HRC column {col} has weight {weight} inside the HRC")
            }
            PuncturedNotConnected { col, row } => {
                write!(f, "punctured column {col} misses HRC row {row}")
            }
            IrcRowWeight { row, weight } => {
                write!(f, "IRC row {row} has only {weight} edges outside the SSC")
            }
            PuncturedTailOverlap { row, col, block } => write!(
                f,
                "row {row} reaches punctured column {col} in the same tail row block as punctured tail column of block {block}"
            ),
        }
    }
}

/// Default tail block: unit diagonal plus the two sub-diagonals.
pub fn tail_block(m: usize) -> IntMatrix {
    let mut q = IntMatrix::zeros(m, m);
    for r in 0..m {
        for c in r.saturating_sub(2)..=r {
            q[(r, c)] = 1;
        }
    }
    q
}

/// Default tail matrix with `omega` identical blocks.
pub fn tail_pattern(m: usize, omega: usize) -> IntMatrix {
    let block = tail_block(m);
    let mut q = IntMatrix::zeros(m, omega * m);
    for j in 0..omega {
        for r in 0..m {
            for c in 0..m {
                q[(r, j * m + c)] = block[(r, c)];
            }
        }
    }
    q
}

/// Rate of the coupled code at pruning point `(m_sub, n_sub)`:
/// `k L / (n_sub L + m_sub w - rho (L + w))`.
pub fn code_rate(
    shape: &Shape,
    coupling_length: usize,
    m_sub: usize,
    n_sub: usize,
) -> Result<Ratio<i64>> {
    if n_sub < m_sub {
        return Err(Error::param("n_sub must be at least m_sub"));
    }
    let l = coupling_length as i64;
    let w = shape.coupling_width as i64;
    let k = (n_sub - m_sub) as i64;
    let den = n_sub as i64 * l + m_sub as i64 * w - shape.punctured as i64 * (l + w);
    if den <= 0 {
        return Err(Error::param(format!("rate denominator {den} is not positive")));
    }
    Ok(Ratio::new(k * l, den))
}

impl CodeProfile {
    /// Builds a profile from a binary base matrix; shifts are set to the
    /// unlifted placeholder (0 on every edge).
    pub fn from_base(shape: Shape, base: IntMatrix, spread: IntMatrix, tail: IntMatrix) -> Self {
        let mut shifts = IntMatrix::filled(base.rows(), base.cols(), -1);
        for r in 0..base.rows() {
            for c in 0..base.cols() {
                if base[(r, c)] != 0 {
                    shifts[(r, c)] = 0;
                }
            }
        }
        CodeProfile { shape, base, spread, shifts, tail }
    }

    /// Builds a profile whose base matrix is derived from the shift matrix.
    pub fn from_shifts(shape: Shape, shifts: IntMatrix, spread: IntMatrix, tail: IntMatrix) -> Self {
        let mut base = IntMatrix::zeros(shifts.rows(), shifts.cols());
        for r in 0..shifts.rows() {
            for c in 0..shifts.cols() {
                base[(r, c)] = i32::from(shifts[(r, c)] >= 0);
            }
        }
        CodeProfile { shape, base, spread, shifts, tail }
    }

    pub fn has_edge(&self, r: usize, c: usize) -> bool {
        self.base[(r, c)] != 0
    }

    /// Number of edges of the protomatrix.
    pub fn weight(&self) -> usize {
        self.base.count_present(0)
    }

    /// Splits the base matrix into `coupling_width + 1` binary sub-matrices
    /// according to the spreading labels.
    pub fn split(&self) -> Result<Vec<IntMatrix>> {
        let s = &self.shape;
        let mut out = vec![IntMatrix::zeros(s.rows, s.cols); s.coupling_width + 1];
        for r in 0..s.rows {
            for c in 0..s.cols {
                if !self.has_edge(r, c) {
                    continue;
                }
                let t = self.spread[(r, c)];
                if t < 0 || t as usize > s.coupling_width {
                    return Err(Error::structure(format!(
                        "label {t} at ({r},{c}) outside [0,{}]",
                        s.coupling_width
                    )));
                }
                out[t as usize][(r, c)] = 1;
            }
        }
        Ok(out)
    }

    /// Rate of the full (lowest-rate) code at coupling length `l`.
    pub fn rate(&self, l: usize) -> Result<Ratio<i64>> {
        code_rate(&self.shape, l, self.shape.rows, self.shape.cols)
    }

    /// Transmitted bits per coupled frame after puncturing.
    pub fn transmitted_bits(&self, l: usize) -> usize {
        let s = &self.shape;
        (s.cols * l + s.rows * s.coupling_width - s.punctured * (l + s.coupling_width)) * s.lifting
    }

    /// Information bits per coupled frame.
    pub fn info_bits(&self, l: usize) -> usize {
        self.shape.info_cols() * l * self.shape.lifting
    }

    /// Row counts of every legal pruning point, highest rate first.
    pub fn pruning_points(&self) -> std::ops::RangeInclusive<usize> {
        self.shape.hrc_rows..=self.shape.rows
    }

    /// Keeps the first `m_sub` rows (and the matching columns and tail
    /// sub-blocks).
    pub fn prune(&self, m_sub: usize) -> Result<CodeProfile> {
        let s = self.shape;
        if m_sub < s.hrc_rows || m_sub > s.rows {
            return Err(Error::param(format!(
                "pruning point {m_sub} outside [{}, {}]",
                s.hrc_rows, s.rows
            )));
        }
        let n_sub = s.hrc_cols + (m_sub - s.hrc_rows);
        let mut tail = IntMatrix::zeros(m_sub, s.coupling_width * m_sub);
        for j in 0..s.coupling_width {
            let mut block = IntMatrix::zeros(m_sub, m_sub);
            for r in 0..m_sub {
                for c in 0..m_sub {
                    block[(r, c)] = self.tail[(r, j * s.rows + c)];
                    tail[(r, j * m_sub + c)] = block[(r, c)];
                }
            }
            if gf2::rank(&block) != m_sub {
                return Err(Error::structure(format!(
                    "tail block {j} is rank deficient after pruning to {m_sub} rows"
                )));
            }
        }
        Ok(CodeProfile {
            shape: Shape { rows: m_sub, cols: n_sub, ..s },
            base: self.base.top_left(m_sub, n_sub),
            spread: self.spread.top_left(m_sub, n_sub),
            shifts: self.shifts.top_left(m_sub, n_sub),
            tail,
        })
    }

    /// Checks every structural invariant and reports each violation found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let s = &self.shape;
        let shape_err = |detail: String| vec![Violation::Shape { detail }];
        if s.rows < s.hrc_rows || s.cols < s.hrc_cols || s.hrc_cols < s.hrc_rows {
            return shape_err(format!(
                "inconsistent dimensions hrc {}x{}, full {}x{}",
                s.hrc_rows, s.hrc_cols, s.rows, s.cols
            ));
        }
        if s.cols - s.hrc_cols != s.rows - s.hrc_rows {
            return shape_err("extension must add one column per row".into());
        }
        for (name, m) in [("base", &self.base), ("spread", &self.spread), ("shifts", &self.shifts)] {
            if m.rows() != s.rows || m.cols() != s.cols {
                return shape_err(format!(
                    "{name} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    s.rows,
                    s.cols
                ));
            }
        }
        if self.tail.rows() != s.rows || self.tail.cols() != s.rows * s.coupling_width {
            return shape_err(format!(
                "tail is {}x{}, expected {}x{}",
                self.tail.rows(),
                self.tail.cols(),
                s.rows,
                s.rows * s.coupling_width
            ));
        }
        if s.punctured > s.info_cols() {
            return shape_err("more punctured columns than information columns".into());
        }

        let k = s.info_cols();
        let w = s.coupling_width as i32;
        for r in 0..s.rows {
            for c in 0..s.cols {
                let b = self.base[(r, c)];
                let t = self.spread[(r, c)];
                let p = self.shifts[(r, c)];
                if b != 0 && b != 1 {
                    out.push(Violation::NonBinaryBase { row: r, col: c, value: b });
                }
                if t < -1 || t > w {
                    out.push(Violation::LabelOutOfRange { row: r, col: c, label: t });
                } else if (t == -1) != (b == 0) {
                    out.push(Violation::LabelBaseMismatch { row: r, col: c });
                }
                let max_shift = if s.lifting == 0 { 0 } else { s.lifting as i32 - 1 };
                if p < -1 || p > max_shift {
                    out.push(Violation::ShiftOutOfRange { row: r, col: c, shift: p });
                } else if (p == -1) != (b == 0) {
                    out.push(Violation::ShiftBaseMismatch { row: r, col: c });
                }
            }
        }

        // Zero upper-right block and lower-triangular SSC.
        for r in 0..s.rows {
            for c in s.hrc_cols..s.cols {
                if self.base[(r, c)] == 0 {
                    continue;
                }
                if r < s.hrc_rows {
                    out.push(Violation::UpperRightNonZero { row: r, col: c });
                } else if c - s.hrc_cols > r - s.hrc_rows {
                    out.push(Violation::SscNotLowerTriangular { row: r, col: c });
                }
            }
        }

        // Parity part must be solvable row by row inside the first sub-matrix.
        for r in 0..s.rows {
            let pivot = k + r;
            if self.base[(r, pivot)] == 0 {
                out.push(Violation::MissingPivot { row: r });
            } else if self.spread[(r, pivot)] > 0 {
                out.push(Violation::PivotNotInFirstBlock { row: r });
            }
            for c in pivot + 1..s.hrc_cols.max(pivot + 1) {
                if self.base[(r, c)] != 0 && self.spread[(r, c)] == 0 {
                    out.push(Violation::ParityNotEncodable { row: r, col: c });
                }
            }
        }

        for j in 0..s.coupling_width {
            for r in 0..s.rows {
                for c in 0..s.rows {
                    let v = self.tail[(r, j * s.rows + c)];
                    let want = i32::from(r >= c && r - c <= 2);
                    let ok = if r == c { v == 1 } else if want == 0 { v == 0 } else { v == 0 || v == 1 };
                    if !ok {
                        out.push(Violation::TailEntry { block: j, row: r, col: c, value: v });
                    }
                }
            }
        }

        let min_hrc = s.hrc_rows.min(3);
        for c in 0..s.hrc_cols {
            let wgt = (0..s.hrc_rows).filter(|&r| self.base[(r, c)] != 0).count();
            if wgt < min_hrc {
                out.push(Violation::HrcColumnWeight { col: c, weight: wgt });
            }
        }
        for c in 0..s.punctured {
            for r in 0..s.hrc_rows {
                if self.base[(r, c)] == 0 {
                    out.push(Violation::PuncturedNotConnected { col: c, row: r });
                }
            }
        }
        for r in s.hrc_rows..s.rows {
            let wgt = (0..s.hrc_cols).filter(|&c| self.base[(r, c)] != 0).count();
            if wgt < 2 {
                out.push(Violation::IrcRowWeight { row: r, weight: wgt });
            }
        }

        // One-step recoverability in the termination rows: a row may not see
        // a punctured tail column and a punctured replica column at once.
        for j in 1..=s.coupling_width {
            for r in 0..s.rows {
                let hits_tail = (0..s.punctured.min(s.rows))
                    .any(|c| self.tail[(r, (j - 1) * s.rows + c)] != 0);
                if !hits_tail {
                    continue;
                }
                for c in 0..s.punctured {
                    if self.base[(r, c)] != 0 && self.spread[(r, c)] >= j as i32 {
                        out.push(Violation::PuncturedTailOverlap { row: r, col: c, block: j });
                    }
                }
            }
        }
        out
    }
}
