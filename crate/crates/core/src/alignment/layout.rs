//! Column and row layouts used by the alignment engine.

use crate::cam::Geometry;
use crate::error::{Error, Result};
use crate::microcode::{alloc, ColumnMap, Field};

use super::scheme::{Alphabet, EncodedSequence};

pub const SEQ: &str = "A";
pub const QUERY: [&str; 2] = ["Q0", "Q1"];
pub const AD: [&str; 3] = ["AD0", "AD1", "AD2"];
pub const E: &str = "E";
pub const F: &str = "F";
pub const DIAG: &str = "DIAG";
pub const TMP: &str = "TMP";
pub const SIG: &str = "SIG";
pub const DIFF: &str = "DIFF";
pub const MAX: &str = "MAX";
pub const META: &str = "META";

pub const FIRST_ROW: &str = "first_row";
pub const BUFFER_ROW: &str = "buffer_row";
pub const IDLE: &str = "idle";
pub const LAST_ROW: &str = "last_row";
pub const LT: &str = "lt";
pub const CARRY: &str = "carry";
pub const CAND: &str = "cand";
pub const SEL: &str = "sel";
pub const EDGE: &str = "edge";

pub const META_BITS: usize = 16;

const SCORE_FIELDS: [&str; 10] = ["AD0", "AD1", "AD2", E, F, DIAG, TMP, SIG, DIFF, MAX];
const FLAGS: [&str; 9] = [FIRST_ROW, BUFFER_ROW, IDLE, LAST_ROW, LT, CARRY, CAND, SEL, EDGE];

/// Which of the three antidiagonal buffers plays each role in iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdRoles {
    /// Receives the antidiagonal computed in this iteration.
    pub right: usize,
    /// Written in the previous iteration.
    pub middle: usize,
    /// Written two iterations ago.
    pub left: usize,
}

pub fn ad_roles(t: usize) -> AdRoles {
    AdRoles {
        right: t % 3,
        middle: (t + 2) % 3,
        left: (t + 1) % 3,
    }
}

/// Columns of one streamed query slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryCols {
    pub symbol: Vec<usize>,
    pub valid: usize,
    pub last: usize,
    /// `symbol`, `valid` and `last` together, as shifted.
    pub all: Vec<usize>,
}

/// Field to column assignment for the wavefront engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavefrontLayout {
    map: ColumnMap,
    alphabet: Alphabet,
    width: usize,
}

impl WavefrontLayout {
    /// Allocates every field. With `eom`, bit `i` of all score fields share a
    /// Sub-Word, as do the sequence and query symbol bits and the row flags.
    pub fn new(alphabet: Alphabet, width: u32, geometry: &Geometry, eom: bool, with_meta: bool) -> Result<Self> {
        let width = width as usize;
        let sb = alphabet.bits();
        let mut fields = vec![
            Field::new(SEQ, sb),
            Field::new(QUERY[0], sb + 2),
            Field::new(QUERY[1], sb + 2),
        ];
        fields.extend(FLAGS.iter().map(|f| Field::new(f, 1)));
        fields.extend(SCORE_FIELDS.iter().map(|f| Field::new(f, width)));
        if with_meta {
            fields.push(Field::new(META, META_BITS));
        }
        let groups: Vec<Vec<String>> = vec![
            SCORE_FIELDS.iter().map(|s| s.to_string()).collect(),
            [SEQ, QUERY[0], QUERY[1]]
                .iter()
                .chain(&FLAGS)
                .map(|s| s.to_string())
                .collect(),
        ];
        let map = alloc(&fields, if eom { &groups } else { &[] }, eom, geometry)?;
        Ok(Self { map, alphabet, width })
    }

    pub fn map(&self) -> &ColumnMap {
        &self.map
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cols(&self, name: &str) -> &[usize] {
        self.map.get(name).expect("layout allocates every engine field")
    }

    pub fn flag(&self, name: &str) -> usize {
        self.cols(name)[0]
    }

    pub fn ad(&self, i: usize) -> &[usize] {
        self.cols(AD[i])
    }

    pub fn query(&self, slot: usize) -> QueryCols {
        let all = self.cols(QUERY[slot]).to_vec();
        let sb = self.alphabet.bits();
        QueryCols {
            symbol: all[..sb].to_vec(),
            valid: all[sb],
            last: all[sb + 1],
            all,
        }
    }

    pub fn has_meta(&self) -> bool {
        self.map.get(META).is_ok()
    }

    /// Columns that hold per-query state, cleared between queries.
    pub fn working_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = SCORE_FIELDS.iter().flat_map(|f| self.cols(f).to_vec()).collect();
        cols.extend(self.cols(QUERY[0]));
        cols.extend(self.cols(QUERY[1]));
        for f in [LT, CARRY, CAND, SEL, EDGE] {
            cols.push(self.flag(f));
        }
        cols
    }
}

/// Placement of one database sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DbEntry {
    pub index: usize,
    pub start: usize,
    pub len: usize,
    pub buffer_row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseLayout {
    pub entries: Vec<DbEntry>,
    /// Rows occupied by sequences and buffer rows.
    pub rows_used: usize,
    pub total_rows: usize,
    pub max_len: usize,
    /// Last row of each chip but the final one.
    pub chip_boundaries: Vec<usize>,
    pub fields: WavefrontLayout,
}

impl DatabaseLayout {
    /// Sequences are placed back to back, each followed by one buffer row.
    pub fn plan(
        db: &[EncodedSequence],
        fields: WavefrontLayout,
        total_rows: usize,
        chip_boundaries: Vec<usize>,
    ) -> Result<Self> {
        if db.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        if db.len() > 1 << META_BITS {
            return Err(Error::Config(format!(
                "at most {} database sequences are supported",
                1 << META_BITS
            )));
        }
        let mut entries = Vec::with_capacity(db.len());
        let mut row = 0;
        for (index, seq) in db.iter().enumerate() {
            if seq.alphabet() != fields.alphabet() {
                return Err(Error::AlphabetMismatch(format!(
                    "database sequence {index} is {}, expected {}",
                    seq.alphabet(),
                    fields.alphabet()
                )));
            }
            if seq.is_empty() {
                return Err(Error::Config(format!("database sequence {index} is empty")));
            }
            entries.push(DbEntry {
                index,
                start: row,
                len: seq.len(),
                buffer_row: row + seq.len(),
            });
            row += seq.len() + 1;
        }
        if row > total_rows {
            return Err(Error::CapacityExceeded {
                needed: row,
                rows: total_rows,
            });
        }
        Ok(Self {
            max_len: db.iter().map(|s| s.len()).max().unwrap_or(0),
            entries,
            rows_used: row,
            total_rows,
            chip_boundaries,
            fields,
        })
    }

    /// Rows needed to hold `db`.
    pub fn rows_needed(db: &[EncodedSequence]) -> usize {
        db.iter().map(|s| s.len() + 1).sum()
    }

    /// Indices of sequences whose rows (buffer row included) straddle a
    /// chip boundary.
    pub fn spanning_sequences(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| self.chip_boundaries.iter().any(|&b| b >= e.start && b < e.buffer_row))
            .map(|e| e.index)
            .collect()
    }
}
