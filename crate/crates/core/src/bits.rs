//! Fixed-width bit strings used for the KEY, MASK and stored row contents.

use std::fmt;

/// A fixed-width bit string. Bit `i` corresponds to physical column `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    words: Vec<u64>,
    width: usize,
}

/// Compare/write pattern held in the KEY register.
pub type RowPattern = BitRow;

/// Active-column selector held in the MASK register; a set bit is unmasked.
pub type ColumnSelector = BitRow;

impl BitRow {
    pub fn zeros(width: usize) -> Self {
        Self {
            words: vec![0; width.div_ceil(64)],
            width,
        }
    }

    pub fn ones(width: usize) -> Self {
        let mut row = Self::zeros(width);
        for i in 0..width {
            row.set(i, true);
        }
        row
    }

    /// Builds a row with the listed columns set.
    pub fn from_columns(width: usize, columns: impl IntoIterator<Item = usize>) -> Self {
        let mut row = Self::zeros(width);
        for c in columns {
            row.set(c, true);
        }
        row
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.width, "bit {i} out of range for width {}", self.width);
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Big-endian hex rendering: the leftmost digit holds the highest columns.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.width && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Parses the format produced by [`BitRow::to_hex`].
    pub fn from_hex(width: usize, hex: &str) -> Option<Self> {
        if hex.len() != width.div_ceil(4) {
            return None;
        }
        let mut row = Self::zeros(width);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = d * 4 + b;
                    if i >= width {
                        return None;
                    }
                    row.set(i, true);
                }
            }
        }
        Some(row)
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({})", self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_is_big_endian() {
        let row = BitRow::from_columns(8, [0, 5]);
        assert_eq!(row.to_hex(), "21");
        assert_eq!(BitRow::from_hex(8, "21"), Some(row));
    }

    #[test]
    fn ones_iter_crosses_words() {
        let row = BitRow::from_columns(256, [1, 63, 64, 200]);
        assert_eq!(row.ones_iter().collect::<Vec<_>>(), vec![1, 63, 64, 200]);
        assert_eq!(row.count_ones(), 4);
    }

    #[test]
    fn from_hex_rejects_bad_input() {
        assert!(BitRow::from_hex(8, "2").is_none());
        assert!(BitRow::from_hex(8, "zz").is_none());
        assert!(BitRow::from_hex(6, "40").is_none());
    }
}
