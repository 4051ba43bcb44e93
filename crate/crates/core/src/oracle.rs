//! Scalar references: textbook dynamic programming for the three alignment
//! modes, and exhaustive checking of microcode programs against their
//! truth tables.
//!
//! The DP code deliberately shares nothing with the simulated arithmetic.
//! It only asks the scheme for substitution scores.

use crate::alignment::{EncodedSequence, ScoringScheme};
use crate::bits::BitRow;
use crate::cam::{CamArray, Geometry};
use crate::energy::EnergyLedger;
use crate::error::{Error, Result};
use crate::microcode::{execute, ColumnMap, MicroOp, MicroProgram, TruthTable};

/// Largest table `verify_program` enumerates.
pub const MAX_VERIFY_INPUT_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpMatrices {
    pub h: Vec<Vec<i64>>,
    /// Empty for the linear-gap modes.
    pub e: Vec<Vec<i64>>,
    pub f: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpResult {
    pub score: i64,
    pub matrices: Option<DpMatrices>,
}

fn sigma(scheme: &ScoringScheme, a: &EncodedSequence, b: &EncodedSequence, i: usize, j: usize) -> i64 {
    scheme.sigma(a.codes()[i - 1], b.codes()[j - 1]) as i64
}

/// Smith-Waterman with affine gaps; every boundary cell is 0.
pub fn sw_local(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme) -> DpResult {
    sw_local_with(a, b, scheme, false)
}

pub fn sw_local_with(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme, keep: bool) -> DpResult {
    let (n, m) = (a.len(), b.len());
    let (go, ge) = (scheme.g_first as i64, scheme.g_ext as i64);
    let mut h = vec![vec![0i64; m + 1]; n + 1];
    let mut e = vec![vec![0i64; m + 1]; n + 1];
    let mut f = vec![vec![0i64; m + 1]; n + 1];
    let mut best = 0;
    for i in 1..=n {
        for j in 1..=m {
            e[i][j] = (e[i][j - 1] - ge).max(h[i][j - 1] - go);
            f[i][j] = (f[i - 1][j] - ge).max(h[i - 1][j] - go);
            h[i][j] = (h[i - 1][j - 1] + sigma(scheme, a, b, i, j))
                .max(e[i][j])
                .max(f[i][j])
                .max(0);
            best = best.max(h[i][j]);
        }
    }
    DpResult {
        score: best,
        matrices: keep.then_some(DpMatrices { h, e, f }),
    }
}

fn linear_fill(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme, global: bool) -> Vec<Vec<i64>> {
    let (n, m) = (a.len(), b.len());
    let d = scheme.d as i64;
    let mut h = vec![vec![0i64; m + 1]; n + 1];
    if global {
        for (i, row) in h.iter_mut().enumerate() {
            row[0] = i as i64 * d;
        }
        for (j, cell) in h[0].iter_mut().enumerate() {
            *cell = j as i64 * d;
        }
    }
    for i in 1..=n {
        for j in 1..=m {
            h[i][j] = (h[i - 1][j - 1] + sigma(scheme, a, b, i, j))
                .max(h[i - 1][j] + d)
                .max(h[i][j - 1] + d);
        }
    }
    h
}

/// Needleman-Wunsch with linear gap score `d`.
pub fn nw_global(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme) -> DpResult {
    nw_global_with(a, b, scheme, false)
}

pub fn nw_global_with(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme, keep: bool) -> DpResult {
    let h = linear_fill(a, b, scheme, true);
    DpResult {
        score: h[a.len()][b.len()],
        matrices: keep.then(|| DpMatrices {
            h,
            e: Vec::new(),
            f: Vec::new(),
        }),
    }
}

/// Free end gaps: zero first row and column, best cell on the last row or
/// column.
pub fn semi_global(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme) -> DpResult {
    semi_global_with(a, b, scheme, false)
}

pub fn semi_global_with(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme, keep: bool) -> DpResult {
    let (n, m) = (a.len(), b.len());
    let h = linear_fill(a, b, scheme, false);
    let last_row = h[n].iter().copied().max().unwrap_or(0);
    let last_col = h.iter().map(|r| r[m]).max().unwrap_or(0);
    DpResult {
        score: last_row.max(last_col),
        matrices: keep.then(|| DpMatrices {
            h,
            e: Vec::new(),
            f: Vec::new(),
        }),
    }
}

/// First input combination on which a program disagrees with its table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Bit `k` is table input `k`.
    pub input: u32,
    /// Value the non-input columns started from (all zeros or all ones).
    pub background: bool,
    /// Expected output bits, `None` when the row should be left unchanged.
    pub expected: Option<u64>,
    pub got: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail(Counterexample),
}

impl Verification {
    pub fn passed(&self) -> bool {
        matches!(self, Verification::Pass)
    }
}

/// Runs `prog` on one row per input combination, twice: once with every
/// other column cleared and once with it set. Covered rows must hold the
/// table's output afterwards; uncovered rows must hold the default, or be
/// untouched when the table has none. Columns outside the table must never
/// change.
pub fn verify_program(tt: &TruthTable, map: &ColumnMap, prog: &MicroProgram) -> Result<Verification> {
    let k = tt.inputs.len();
    if k > MAX_VERIFY_INPUT_BITS {
        return Err(Error::TableTooLarge(k));
    }
    let table = tt.resolve(map)?;
    let row_bits = map.row_bits();
    let combos = 1usize << k;
    let has_shift = prog.ops().iter().any(|op| matches!(op, MicroOp::ShiftTag));

    let initial = |input: u32, background: bool| -> BitRow {
        let mut row = if background {
            BitRow::ones(row_bits)
        } else {
            BitRow::zeros(row_bits)
        };
        for (i, &c) in table.inputs.iter().enumerate() {
            row.set(c, input >> i & 1 == 1);
        }
        row
    };
    let expected_row = |input: u32, background: bool| -> (BitRow, Option<u64>) {
        let mut row = initial(input, background);
        let out = tt.lookup(input);
        if let Some(v) = out {
            for (i, &c) in table.outputs.iter().enumerate() {
                row.set(c, v >> i & 1 == 1);
            }
        }
        (row, out)
    };
    let read_outputs = |row: &BitRow| -> u64 {
        table
            .outputs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (row.get(c) as u64) << i)
    };

    let geometry = |rows: usize| Geometry {
        rows,
        row_bits,
        subword_bits: map.subword_bits(),
        chips: 1,
    };
    for background in [false, true] {
        let results: Vec<BitRow> = if has_shift {
            // rows interact through shifts, so isolate each combination
            (0..combos)
                .map(|x| {
                    let mut array = CamArray::new(geometry(1))?;
                    array.load_rows(0, &[initial(x as u32, background)])?;
                    execute(prog, &mut array, &mut EnergyLedger::default())?;
                    array.row(0).map(|r| r.stored)
                })
                .collect::<Result<_>>()?
        } else {
            let mut array = CamArray::new(geometry(combos))?;
            let rows: Vec<BitRow> = (0..combos).map(|x| initial(x as u32, background)).collect();
            array.load_rows(0, &rows)?;
            execute(prog, &mut array, &mut EnergyLedger::default())?;
            (0..combos)
                .map(|r| array.row(r).map(|w| w.stored))
                .collect::<Result<_>>()?
        };
        for (x, got) in results.iter().enumerate() {
            let (want, expected) = expected_row(x as u32, background);
            if *got != want {
                return Ok(Verification::Fail(Counterexample {
                    input: x as u32,
                    background,
                    expected,
                    got: read_outputs(got),
                }));
            }
        }
    }
    Ok(Verification::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::Alphabet;
    use crate::microcode::{builtin, schedule, ScheduleStrategy};

    fn dna(s: &str) -> EncodedSequence {
        EncodedSequence::encode(Alphabet::Dna, s).unwrap()
    }

    #[test]
    fn local_examples() {
        let s = ScoringScheme::default();
        assert_eq!(sw_local(&dna("ACGT"), &dna("ACGT"), &s).score, 8);
        assert_eq!(sw_local(&dna("ACGT"), &dna("AGGT"), &s).score, 5);
        assert_eq!(sw_local(&dna("A"), &dna("C"), &s).score, 0);
    }

    #[test]
    fn hand_filled_local_matrix() {
        // ACGT vs AGGT, +2/-1, open 2, extend 1
        let r = sw_local_with(&dna("ACGT"), &dna("AGGT"), &ScoringScheme::default(), true);
        let h = r.matrices.unwrap().h;
        assert_eq!(h[1], vec![0, 2, 0, 0, 0]);
        assert_eq!(h[2], vec![0, 0, 1, 0, 0]);
        assert_eq!(h[3], vec![0, 0, 2, 3, 1]);
        assert_eq!(h[4], vec![0, 0, 0, 1, 5]);
    }

    #[test]
    fn global_and_semi_global_examples() {
        let s = ScoringScheme::default();
        let empty = dna("");
        assert_eq!(nw_global(&empty, &empty, &s).score, 0);
        assert_eq!(nw_global(&dna("AC"), &dna("AC"), &s).score, 4);
        assert_eq!(nw_global(&dna("AACGT"), &dna("ACGT"), &s).score, 7);
        assert_eq!(nw_global(&dna("AAA"), &empty, &s).score, -3);
        assert_eq!(semi_global(&empty, &empty, &s).score, 0);
        assert_eq!(semi_global(&dna("TTACG"), &dna("ACGAA"), &s).score, 6);
    }

    #[test]
    fn all_negative_sigma_gives_zero() {
        let s = ScoringScheme::dna(-1, -3, 2, 1, -1);
        assert_eq!(sw_local(&dna("ACGTACGT"), &dna("ACGT"), &s).score, 0);
    }

    #[test]
    fn batched_full_add_verifies() {
        let map = ColumnMap::new(8, 4)
            .with_field("A", vec![0])
            .unwrap()
            .with_field("B", vec![1])
            .unwrap()
            .with_field("C", vec![2])
            .unwrap()
            .with_field("S", vec![3])
            .unwrap();
        let tt = builtin::full_add();
        for strategy in [
            ScheduleStrategy::Baseline,
            ScheduleStrategy::BatchGrouped,
            ScheduleStrategy::Auto,
        ] {
            let prog = schedule(&tt, strategy, &map).unwrap();
            assert!(verify_program(&tt, &map, &prog).unwrap().passed());
        }
    }

    #[test]
    fn dropped_write_is_caught() {
        let map = ColumnMap::new(8, 4)
            .with_field("A", vec![0])
            .unwrap()
            .with_field("B", vec![1])
            .unwrap()
            .with_field("Y", vec![2])
            .unwrap();
        let tt = builtin::xor();
        let prog = schedule(&tt, ScheduleStrategy::Baseline, &map).unwrap();
        let mut ops = prog.into_ops();
        // drop the write for the last entry (A=1, B=1) and its compare
        ops.truncate(ops.len() - 2);
        let broken = MicroProgram::from_ops(8, ops);
        match verify_program(&tt, &map, &broken).unwrap() {
            Verification::Fail(c) => {
                assert_eq!(c.input, 0b11);
                assert_eq!(c.expected, Some(0));
            }
            Verification::Pass => panic!("fault not detected"),
        }
    }

    #[test]
    fn oversized_table_is_rejected() {
        let inputs: Vec<_> = (0..21).map(|i| crate::microcode::ColRef::new("X", i)).collect();
        let tt = TruthTable {
            inputs,
            outputs: vec![],
            entries: vec![],
            default: None,
        };
        let map = ColumnMap::new(256, 32).with_field("X", (0..21).collect()).unwrap();
        assert!(matches!(
            verify_program(&tt, &map, &MicroProgram::new(256)),
            Err(Error::TableTooLarge(21))
        ));
    }
}
