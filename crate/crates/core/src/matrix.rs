//! Small dense integer matrices used for protomatrices and label matrices.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i32>,
}

impl IntMatrix {
    pub fn filled(rows: usize, cols: usize, value: i32) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0)
    }

    /// Builds a matrix from row vectors. All rows must share one length.
    pub fn from_rows(rows: &[Vec<i32>]) -> Option<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[i32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Leading `rows x cols` block.
    pub fn top_left(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut out = IntMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        out
    }

    /// Non-zero entries of column `c`.
    pub fn col_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self[(r, c)] != 0).count()
    }

    /// Number of entries different from `absent`.
    pub fn count_present(&self, absent: i32) -> usize {
        self.data.iter().filter(|&&x| x != absent).count()
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i32;

    fn index(&self, (r, c): (usize, usize)) -> &i32 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i32 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            rows: usize,
            cols: usize,
            data: Vec<&'a [i32]>,
        }
        Repr {
            rows: self.rows,
            cols: self.cols,
            data: (0..self.rows).map(|r| self.row(r)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            rows: usize,
            cols: usize,
            data: Vec<Vec<i32>>,
        }
        let repr = Repr::deserialize(d)?;
        if repr.data.len() != repr.rows || repr.data.iter().any(|r| r.len() != repr.cols) {
            return Err(serde::de::Error::custom("matrix shape does not match its data"));
        }
        Ok(IntMatrix {
            rows: repr.rows,
            cols: repr.cols,
            data: repr.data.into_iter().flatten().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_round_trip_keeps_shape() {
        let m = IntMatrix::from_rows(&[vec![1, -1, 0], vec![2, 3, 4]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: IntMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(IntMatrix::from_rows(&[vec![1], vec![1, 2]]).is_none());
        let bad = r#"{"rows":2,"cols":2,"data":[[1,2]]}"#;
        assert!(serde_json::from_str::<IntMatrix>(bad).is_err());
    }
}
