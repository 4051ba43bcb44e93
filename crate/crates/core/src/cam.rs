//! The simulated resistive CAM array.
//!
//! Storage is column-major: every physical bit column is a packed bit vector
//! over the rows, so a compare touches only the unmasked columns. Every cycle
//! observes the pre-cycle state of all rows.

use std::fmt::Write as _;

use crate::bits::{BitRow, ColumnSelector, RowPattern};
use crate::error::{Error, Result};

/// Shape of the simulated machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub rows: usize,
    pub row_bits: usize,
    pub subword_bits: usize,
    /// Number of daisy-chained dies the rows are split across.
    pub chips: usize,
}

impl Geometry {
    pub const DEFAULT_ROW_BITS: usize = 256;
    pub const DEFAULT_SUBWORD_BITS: usize = 32;
    /// Word Block size; used for reporting only.
    pub const WORD_BLOCK_ROWS: usize = 1024;

    pub fn with_rows(rows: usize) -> Self {
        Self {
            rows,
            row_bits: Self::DEFAULT_ROW_BITS,
            subword_bits: Self::DEFAULT_SUBWORD_BITS,
            chips: 1,
        }
    }

    pub fn subwords(&self) -> usize {
        self.row_bits / self.subword_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.row_bits == 0 || self.subword_bits == 0 {
            return Err(Error::Config("row and Sub-Word widths must be positive".into()));
        }
        if !self.row_bits.is_multiple_of(self.subword_bits) {
            return Err(Error::Config(format!(
                "row width {} is not a multiple of Sub-Word width {}",
                self.row_bits, self.subword_bits
            )));
        }
        if self.chips == 0 {
            return Err(Error::Config("at least one chip is required".into()));
        }
        if self.rows > 0 && self.chips > self.rows {
            return Err(Error::Config(format!(
                "{} chips cannot split {} rows",
                self.chips, self.rows
            )));
        }
        Ok(())
    }
}

/// Host view of one word row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRow {
    pub stored: RowPattern,
    pub tag: bool,
    /// A set tag blocks Match-line precharge for the rest of a compare burst.
    pub precharge_blocked: bool,
}

/// Row counts observed during one compare cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompareOutcome {
    /// Rows tagged after the cycle.
    pub tagged: usize,
    /// Rows that were not blocked and matched.
    pub matched: usize,
    /// Rows that were not blocked and did not match.
    pub mismatched: usize,
    /// Rows whose tag was already set; they skip precharge.
    pub blocked: usize,
}

#[derive(Debug, Clone)]
pub struct CamArray {
    geometry: Geometry,
    words: usize,
    last_word_mask: u64,
    columns: Vec<Vec<u64>>,
    tags: Vec<u64>,
    chip_boundaries: Vec<usize>,
    interdie_bits: u64,
}

impl CamArray {
    pub fn new(geometry: Geometry) -> Result<Self> {
        geometry.validate()?;
        let words = geometry.rows.div_ceil(64);
        let rem = geometry.rows % 64;
        let last_word_mask = if rem == 0 { u64::MAX } else { (1u64 << rem) - 1 };
        let chip_boundaries = if geometry.chips > 1 {
            let per_chip = geometry.rows.div_ceil(geometry.chips);
            (1..geometry.chips)
                .map(|k| k * per_chip - 1)
                .filter(|&b| b + 1 < geometry.rows)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            geometry,
            words,
            last_word_mask,
            columns: vec![vec![0; words]; geometry.row_bits],
            tags: vec![0; words],
            chip_boundaries,
            interdie_bits: 0,
        })
    }

    /// Replaces the default even split with explicit chip boundaries. Each
    /// boundary is the last row index of a die.
    pub fn with_chip_boundaries(mut self, boundaries: Vec<usize>) -> Result<Self> {
        let increasing = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !increasing || boundaries.last().is_some_and(|&b| b >= self.geometry.rows) {
            return Err(Error::Config(
                "chip boundaries must be strictly increasing and inside the array".into(),
            ));
        }
        self.chip_boundaries = boundaries;
        Ok(self)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn rows(&self) -> usize {
        self.geometry.rows
    }

    pub fn row_bits(&self) -> usize {
        self.geometry.row_bits
    }

    pub fn chip_boundaries(&self) -> &[usize] {
        &self.chip_boundaries
    }

    /// Total bits that crossed a die boundary during shift-down cycles.
    pub fn interdie_bits(&self) -> u64 {
        self.interdie_bits
    }

    fn check_width(&self, what: &str, row: &BitRow) -> Result<()> {
        if row.width() != self.geometry.row_bits {
            return Err(Error::WidthMismatch(format!(
                "{what} has {} bits, array rows have {}",
                row.width(),
                self.geometry.row_bits
            )));
        }
        Ok(())
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.geometry.rows {
            return Err(Error::RowOutOfRange {
                row,
                rows: self.geometry.rows,
            });
        }
        Ok(())
    }

    fn tagged_count(&self) -> usize {
        self.tags.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Compare cycle: every row whose unmasked bits equal the key is OR-ed
    /// into its tag. Tags are never cleared here.
    pub fn compare(&mut self, key: &RowPattern, mask: &ColumnSelector) -> Result<CompareOutcome> {
        self.check_width("key", key)?;
        self.check_width("mask", mask)?;
        let rows = self.geometry.rows;
        let blocked = self.tagged_count();
        let mut matched = 0;
        let mut hits = vec![u64::MAX; self.words];
        if let Some(last) = hits.last_mut() {
            *last = self.last_word_mask;
        }
        for c in mask.ones_iter() {
            let column = &self.columns[c];
            if key.get(c) {
                hits.iter_mut().zip(column).for_each(|(h, &v)| *h &= v);
            } else {
                hits.iter_mut().zip(column).for_each(|(h, &v)| *h &= !v);
            }
        }
        for (t, h) in self.tags.iter_mut().zip(&hits) {
            matched += (h & !*t).count_ones() as usize;
            *t |= h;
        }
        Ok(CompareOutcome {
            tagged: blocked + matched,
            matched,
            mismatched: rows - blocked - matched,
            blocked,
        })
    }

    /// Write cycle: unmasked columns of tagged rows take the key bits, then
    /// every tag resets. Returns the number of rows written.
    pub fn write(&mut self, key: &RowPattern, mask: &ColumnSelector) -> Result<usize> {
        self.check_width("key", key)?;
        self.check_width("mask", mask)?;
        let written = self.tagged_count();
        if written > 0 {
            for c in mask.ones_iter() {
                let column = &mut self.columns[c];
                if key.get(c) {
                    column.iter_mut().zip(&self.tags).for_each(|(v, &t)| *v |= t);
                } else {
                    column.iter_mut().zip(&self.tags).for_each(|(v, &t)| *v &= !t);
                }
            }
        }
        self.tags.iter_mut().for_each(|t| *t = 0);
        Ok(written)
    }

    /// Shift-down cycle on the tag chain: row `i + 1` takes the tag of row
    /// `i`, row 0 takes 0. Returns the number of die boundaries crossed.
    pub fn shift_tags(&mut self) -> usize {
        let mut carry = 0u64;
        for t in self.tags.iter_mut() {
            let next = *t >> 63;
            *t = (*t << 1) | carry;
            carry = next;
        }
        if let Some(last) = self.tags.last_mut() {
            *last &= self.last_word_mask;
        }
        let crossings = self.chip_boundaries.len();
        self.interdie_bits += crossings as u64;
        crossings
    }

    pub fn tag(&self, row: usize) -> bool {
        self.tags[row / 64] >> (row % 64) & 1 == 1
    }

    pub fn tags(&self) -> Vec<bool> {
        (0..self.geometry.rows).map(|r| self.tag(r)).collect()
    }

    /// Lowest-index tagged row, as a priority encoder would report it.
    pub fn first_tagged(&self) -> Option<usize> {
        self.tags
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    #[inline]
    pub fn bit(&self, row: usize, column: usize) -> bool {
        self.columns[column][row / 64] >> (row % 64) & 1 == 1
    }

    #[inline]
    fn set_bit(&mut self, row: usize, column: usize, value: bool) {
        let word = &mut self.columns[column][row / 64];
        let bit = 1u64 << (row % 64);
        if value {
            *word |= bit;
        } else {
            *word &= !bit;
        }
    }

    pub fn row(&self, row: usize) -> Result<WordRow> {
        self.check_row(row)?;
        let stored = BitRow::from_columns(
            self.geometry.row_bits,
            (0..self.geometry.row_bits).filter(|&c| self.bit(row, c)),
        );
        let tag = self.tag(row);
        Ok(WordRow {
            stored,
            tag,
            precharge_blocked: tag,
        })
    }

    /// Host read of the selected columns of one row. Masking does not apply
    /// to host access; unselected columns read as 0.
    pub fn read_field(&self, columns: &ColumnSelector, row: usize) -> Result<BitRow> {
        self.check_width("column selector", columns)?;
        self.check_row(row)?;
        Ok(BitRow::from_columns(
            self.geometry.row_bits,
            columns.ones_iter().filter(|&c| self.bit(row, c)),
        ))
    }

    /// Bulk host store of whole rows starting at `start`. Tags are untouched.
    pub fn load_rows(&mut self, start: usize, values: &[RowPattern]) -> Result<()> {
        if values.is_empty() {
            return Ok(());
        }
        self.check_row(start + values.len() - 1)?;
        for (offset, value) in values.iter().enumerate() {
            self.check_width("row value", value)?;
            for c in 0..self.geometry.row_bits {
                self.set_bit(start + offset, c, value.get(c));
            }
        }
        Ok(())
    }

    /// Host read of a field laid out over `columns` (LSB first).
    pub fn read_bits(&self, row: usize, columns: &[usize]) -> Result<u64> {
        self.check_row(row)?;
        Ok(columns
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (self.bit(row, c) as u64) << i))
    }

    /// Host store of a field laid out over `columns` (LSB first).
    pub fn store_bits(&mut self, row: usize, columns: &[usize], value: u64) -> Result<()> {
        self.check_row(row)?;
        for (i, &c) in columns.iter().enumerate() {
            self.set_bit(row, c, value >> i & 1 == 1);
        }
        Ok(())
    }

    /// Clears every stored bit and tag. Host-side reset between runs.
    pub fn clear(&mut self) {
        self.columns.iter_mut().flatten().for_each(|w| *w = 0);
        self.tags.iter_mut().for_each(|t| *t = 0);
    }

    /// Debug dump, one line per row: `row_index | hex | tag`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in 0..self.geometry.rows {
            let stored = self.row(r).expect("row in range").stored;
            let _ = writeln!(out, "{r} | {} | {}", stored.to_hex(), self.tag(r) as u8);
        }
        out
    }
}
