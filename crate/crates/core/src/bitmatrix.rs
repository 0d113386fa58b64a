//! Small dense GF(2) matrices with rows packed into `u64` words.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols <= 64, "at most 64 columns");
        Self { rows, cols, data: vec![0; rows] }
    }

    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self> {
        if cols > 64 {
            return Err(Error::InvalidArgument(format!("{cols} columns exceeds 64")));
        }
        let limit = if cols == 64 { u64::MAX } else { (1u64 << cols) - 1 };
        if rows.iter().any(|r| r & !limit != 0) {
            return Err(Error::DimensionMismatch { expected: cols, actual: 64 });
        }
        Ok(Self { rows: rows.len(), cols, data: rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> u64 {
        self.data[r]
    }

    pub fn row_words(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r] >> c & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        if value {
            self.data[r] |= 1 << c;
        } else {
            self.data[r] &= !(1 << c);
        }
    }

    pub fn popcount(&self) -> u32 {
        self.data.iter().map(|r| r.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&r| r == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Row vector times matrix: XOR of the rows selected by `v`.
    pub fn left_mul(&self, v: u64) -> u64 {
        let mut acc = 0;
        let mut bits = v;
        while bits != 0 {
            let r = bits.trailing_zeros() as usize;
            acc ^= self.data[r];
            bits &= bits - 1;
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, actual: other.rows });
        }
        let data = self.data.iter().map(|&r| other.left_mul(r)).collect();
        Ok(Self { rows: self.rows, cols: other.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, actual: other.rows * other.cols });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a ^ b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.rows).all(|r| {
            let below_or_diag = if r + 1 >= 64 { u64::MAX } else { (1u64 << (r + 1)) - 1 };
            self.data[r] & below_or_diag == 0
        })
    }

    /// Rows as strings of `0`/`1`, column 0 first.
    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn from_row_strings(rows: &[String], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, s) in rows.iter().enumerate() {
            if s.chars().count() != cols {
                return Err(Error::Parse(format!("row {r} has {} entries, expected {cols}", s.chars().count())));
            }
            for (c, ch) in s.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(r, c, true),
                    other => return Err(Error::Parse(format!("unexpected matrix entry {other:?}"))),
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_row_strings() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}
