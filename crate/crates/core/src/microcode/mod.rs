//! Microcode: truth tables, cycle scheduling, column allocation, and the
//! vector operations built on top of them.

mod alloc;
mod builder;
mod schedule;
mod table;

pub use alloc::{alloc, ColumnMap, Field};
pub use builder::{vec_add, vec_broadcast, vec_copy, vec_max, vec_sub, ProgramBuilder};
pub use schedule::{cover_cubes, schedule, schedule_resolved, ScheduleStrategy};
pub use table::{builtin, ColRef, Cube, ResolvedTable, TableEntry, TruthTable};

use std::fmt::Write as _;

use crate::bits::{ColumnSelector, RowPattern};
use crate::cam::{CamArray, CompareOutcome};
use crate::energy::{CycleCounts, EnergyLedger};
use crate::error::{Error, Result};

/// One machine cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MicroOp {
    Compare { key: RowPattern, mask: ColumnSelector },
    Write { key: RowPattern, mask: ColumnSelector },
    ShiftTag,
}

impl MicroOp {
    /// Sub-Words holding at least one unmasked column. Zero for shifts.
    pub fn active_subwords(&self, subword_bits: usize) -> usize {
        match self {
            MicroOp::Compare { mask, .. } | MicroOp::Write { mask, .. } => {
                let mut seen: Vec<usize> = mask.ones_iter().map(|c| c / subword_bits).collect();
                seen.dedup();
                seen.len()
            }
            MicroOp::ShiftTag => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroProgram {
    row_bits: usize,
    ops: Vec<MicroOp>,
}

impl MicroProgram {
    pub fn new(row_bits: usize) -> Self {
        Self {
            row_bits,
            ops: Vec::new(),
        }
    }

    pub fn from_ops(row_bits: usize, ops: Vec<MicroOp>) -> Self {
        Self { row_bits, ops }
    }

    pub fn row_bits(&self) -> usize {
        self.row_bits
    }

    pub fn ops(&self) -> &[MicroOp] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<MicroOp> {
        self.ops
    }

    pub fn push(&mut self, op: MicroOp) {
        self.ops.push(op);
    }

    pub fn extend(&mut self, other: MicroProgram) {
        self.ops.extend(other.ops);
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn cycle_count(&self) -> usize {
        self.ops.len()
    }

    pub fn counts(&self) -> CycleCounts {
        let mut counts = CycleCounts::default();
        for op in &self.ops {
            match op {
                MicroOp::Compare { .. } => counts.compare += 1,
                MicroOp::Write { .. } => counts.write += 1,
                MicroOp::ShiftTag => counts.shift += 1,
            }
        }
        counts
    }

    /// Active Sub-Word count of every op, in program order.
    pub fn active_subwords(&self, subword_bits: usize) -> Vec<usize> {
        self.ops.iter().map(|op| op.active_subwords(subword_bits)).collect()
    }

    /// Every write must follow at least one compare issued since the
    /// previous write.
    pub fn is_well_formed(&self) -> bool {
        let mut compared = false;
        for op in &self.ops {
            match op {
                MicroOp::Compare { .. } => compared = true,
                MicroOp::Write { .. } if !compared => return false,
                MicroOp::Write { .. } => compared = false,
                MicroOp::ShiftTag => {}
            }
        }
        true
    }

    /// Text dump: optional `# field` header lines, then one line per op.
    pub fn dump(&self, map: Option<&ColumnMap>) -> String {
        let mut out = String::new();
        if let Some(map) = map {
            for (name, columns) in map.fields() {
                let cols: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(out, "# field {name} {}", cols.join(","));
            }
        }
        for op in &self.ops {
            match op {
                MicroOp::Compare { key, mask } => {
                    let _ = writeln!(out, "CMP key={} mask={}", key.to_hex(), mask.to_hex());
                }
                MicroOp::Write { key, mask } => {
                    let _ = writeln!(out, "WR key={} mask={}", key.to_hex(), mask.to_hex());
                }
                MicroOp::ShiftTag => out.push_str("SHIFT\n"),
            }
        }
        out
    }
}

/// Runs `prog` on `array`, recording every cycle in `ledger`.
pub fn execute(prog: &MicroProgram, array: &mut CamArray, ledger: &mut EnergyLedger) -> Result<()> {
    if prog.row_bits != array.row_bits() {
        return Err(Error::WidthMismatch(format!(
            "program is {} columns wide, array rows have {}",
            prog.row_bits,
            array.row_bits()
        )));
    }
    for op in &prog.ops {
        execute_op(op, array, ledger)?;
    }
    Ok(())
}

/// Runs one cycle. Compares return their outcome so a controller can
/// branch on match counts.
pub fn execute_op(op: &MicroOp, array: &mut CamArray, ledger: &mut EnergyLedger) -> Result<Option<CompareOutcome>> {
    let subword_bits = array.geometry().subword_bits;
    match op {
        MicroOp::Compare { key, mask } => {
            let out = array.compare(key, mask)?;
            ledger.record_compare(
                op.active_subwords(subword_bits),
                out.matched,
                out.mismatched,
                out.blocked,
            );
            Ok(Some(out))
        }
        MicroOp::Write { key, mask } => {
            let written = array.write(key, mask)?;
            ledger.record_write(mask.count_ones(), written);
            Ok(None)
        }
        MicroOp::ShiftTag => {
            let crossings = array.shift_tags();
            ledger.record_shift(array.rows(), crossings);
            Ok(None)
        }
    }
}
