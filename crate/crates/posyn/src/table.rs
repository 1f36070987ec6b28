//! Exhaustive truth tables for small multi-output boolean functions.
//!
//! A table stores one output word per input assignment. Row `i` holds the
//! outputs for the assignment where bit `k` of `i` is the value of input `k`
//! (input 0 is the least significant index bit). Bit `k` of an output word is
//! output `k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on table width: 2^16 rows is the largest cone we ever evaluate.
pub const MAX_TABLE_INPUTS: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table has {0} inputs, maximum is {MAX_TABLE_INPUTS}")]
    TooManyInputs(usize),
    #[error("table row count {got} does not match 2^{inputs}")]
    RowCountMismatch { inputs: usize, got: usize },
    #[error("tables have mismatched shape: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
}

/// Multi-output truth table over at most [`MAX_TABLE_INPUTS`] inputs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TruthTable {
    num_inputs: usize,
    num_outputs: usize,
    rows: Vec<u32>,
}

impl TruthTable {
    pub fn new(num_inputs: usize, num_outputs: usize, rows: Vec<u32>) -> Result<Self, TableError> {
        if num_inputs > MAX_TABLE_INPUTS {
            return Err(TableError::TooManyInputs(num_inputs));
        }
        if rows.len() != 1usize << num_inputs {
            return Err(TableError::RowCountMismatch {
                inputs: num_inputs,
                got: rows.len(),
            });
        }
        let mask = Self::output_mask(num_outputs);
        let rows = rows.into_iter().map(|r| r & mask).collect();
        Ok(Self {
            num_inputs,
            num_outputs,
            rows,
        })
    }

    /// Builds a single-output table from a closure evaluated on every row.
    pub fn from_fn(num_inputs: usize, num_outputs: usize, mut f: impl FnMut(u32) -> u32) -> Self {
        let rows = (0..1u32 << num_inputs).map(&mut f).collect();
        Self::new(num_inputs, num_outputs, rows).expect("generator produced a well-formed table")
    }

    fn output_mask(num_outputs: usize) -> u32 {
        if num_outputs >= 32 {
            u32::MAX
        } else {
            (1u32 << num_outputs) - 1
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> u32 {
        self.rows[index]
    }

    /// Value of a single output bit on a given row.
    pub fn output_bit(&self, row: usize, output: usize) -> bool {
        (self.rows[row] >> output) & 1 == 1
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.num_inputs == other.num_inputs && self.num_outputs == other.num_outputs
    }

    /// One bit-plane per output: bit `r` of word `r / 64` is row `r`.
    /// This is the layout the evaluators use to run all rows in parallel.
    pub fn bitplanes(&self) -> Vec<Vec<u64>> {
        let words = self.num_rows().div_ceil(64);
        let mut planes = vec![vec![0u64; words]; self.num_outputs];
        for (r, &row) in self.rows.iter().enumerate() {
            for (out, plane) in planes.iter_mut().enumerate() {
                if (row >> out) & 1 == 1 {
                    plane[r / 64] |= 1u64 << (r % 64);
                }
            }
        }
        planes
    }

    /// Reassembles a table from per-output bit-planes.
    pub fn from_bitplanes(num_inputs: usize, planes: &[Vec<u64>]) -> Self {
        let num_rows = 1usize << num_inputs;
        let mut rows = vec![0u32; num_rows];
        for (out, plane) in planes.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                if (plane[r / 64] >> (r % 64)) & 1 == 1 {
                    *row |= 1 << out;
                }
            }
        }
        Self::new(num_inputs, planes.len(), rows).expect("bit-planes were well-formed")
    }

    /// The bit-plane of input variable `var`: its value on every row.
    pub fn input_plane(num_inputs: usize, var: usize) -> Vec<u64> {
        let num_rows = 1usize << num_inputs;
        let words = num_rows.div_ceil(64);
        let mut plane = vec![0u64; words];
        for r in 0..num_rows {
            if (r >> var) & 1 == 1 {
                plane[r / 64] |= 1u64 << (r % 64);
            }
        }
        plane
    }
}
