//! Bit-serial vector operations over fields of the array.
//!
//! Scores are two's-complement; subtraction wraps. Fields are slices of
//! physical columns, LSB first. Condition columns are appended to every
//! compare of table-driven steps, so conditional operations only touch rows
//! whose condition columns hold the requested values.

use super::alloc::ColumnMap;
use super::schedule::{schedule_resolved, ScheduleStrategy};
use super::table::ResolvedTable;
use super::{MicroOp, MicroProgram};
use crate::bits::BitRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ProgramBuilder {
    row_bits: usize,
    strategy: ScheduleStrategy,
    conditions: Vec<(usize, bool)>,
    prog: MicroProgram,
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|c| !b.contains(c))
}

fn same_width(what: &str, a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::WidthMismatch(format!(
            "{what}: {} bits vs {} bits",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

impl ProgramBuilder {
    pub fn new(row_bits: usize, strategy: ScheduleStrategy) -> Self {
        Self {
            row_bits,
            strategy,
            conditions: Vec::new(),
            prog: MicroProgram::new(row_bits),
        }
    }

    pub fn strategy(&self) -> ScheduleStrategy {
        self.strategy
    }

    pub fn cycle_count(&self) -> usize {
        self.prog.cycle_count()
    }

    pub fn finish(self) -> MicroProgram {
        self.prog
    }

    /// Runs `f` with extra condition columns in force.
    pub fn with_conditions<T>(
        &mut self,
        conditions: &[(usize, bool)],
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        let saved = self.conditions.len();
        self.conditions.extend_from_slice(conditions);
        let out = f(self);
        self.conditions.truncate(saved);
        out
    }

    fn pattern(&self, bits: &[(usize, bool)]) -> (BitRow, BitRow) {
        let mut key = BitRow::zeros(self.row_bits);
        let mut mask = BitRow::zeros(self.row_bits);
        for &(c, v) in bits {
            mask.set(c, true);
            key.set(c, v);
        }
        (key, mask)
    }

    /// Compare cycle on `bits` plus the active conditions.
    pub fn compare(&mut self, bits: &[(usize, bool)]) {
        let mut all = self.conditions.clone();
        all.extend_from_slice(bits);
        let (key, mask) = self.pattern(&all);
        self.prog.push(MicroOp::Compare { key, mask });
    }

    pub fn write(&mut self, bits: &[(usize, bool)]) {
        let (key, mask) = self.pattern(bits);
        self.prog.push(MicroOp::Write { key, mask });
    }

    pub fn shift(&mut self) {
        self.prog.push(MicroOp::ShiftTag);
    }

    pub fn append(&mut self, prog: MicroProgram) {
        self.prog.extend(prog);
    }

    /// Evaluates a table on the rows meeting the active conditions.
    pub fn table(&mut self, table: &ResolvedTable) -> Result<()> {
        let prog = schedule_resolved(table, self.strategy, self.row_bits, &self.conditions)?;
        self.prog.extend(prog);
        Ok(())
    }

    /// Writes `value` into `fields` (concatenated, LSB first) of every row
    /// meeting the conditions. Two cycles.
    pub fn broadcast(&mut self, field: &[usize], value: u64) {
        self.compare(&[]);
        let bits: Vec<(usize, bool)> = field
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i < 64 && value >> i & 1 == 1))
            .collect();
        self.write(&bits);
    }

    pub fn clear(&mut self, fields: &[&[usize]]) {
        let all: Vec<usize> = fields.iter().flat_map(|f| f.iter().copied()).collect();
        self.broadcast(&all, 0);
    }

    /// `dst <- src`: clear, then one compare/write pair per bit.
    pub fn copy(&mut self, src: &[usize], dst: &[usize]) -> Result<()> {
        same_width("copy", src, dst)?;
        if src == dst {
            return Ok(());
        }
        if !disjoint(src, dst) {
            return Err(Error::WidthMismatch("copy between overlapping fields".into()));
        }
        self.clear(&[dst]);
        for (&s, &d) in src.iter().zip(dst) {
            self.compare(&[(s, true)]);
            self.write(&[(d, true)]);
        }
        Ok(())
    }

    /// `carry | sum <- a + b + carry`, one full-add per bit, LSB first. The
    /// carry column must hold the carry-in (normally 0) beforehand.
    pub fn vec_add(&mut self, a: &[usize], b: &[usize], sum: &[usize], carry: usize) -> Result<()> {
        same_width("add a/b", a, b)?;
        same_width("add a/sum", a, sum)?;
        for i in 0..a.len() {
            let t = ResolvedTable::from_fn(vec![a[i], b[i], carry], vec![carry, sum[i]], |x| {
                let s = (x & 1) + (x >> 1 & 1) + (x >> 2 & 1);
                (s >> 1) as u64 | ((s & 1) as u64) << 1
            });
            self.table(&t)?;
        }
        Ok(())
    }

    /// `sum <- a + k` for a constant, wrapping at the field width. The carry
    /// column must be 0 beforehand.
    pub fn vec_add_const(&mut self, a: &[usize], k: i64, sum: &[usize], carry: usize) -> Result<()> {
        same_width("add const", a, sum)?;
        for i in 0..a.len() {
            let kb = (k >> i.min(63)) as u32 & 1;
            let t = ResolvedTable::from_fn(vec![a[i], carry], vec![carry, sum[i]], |x| {
                let s = (x & 1) + kb + (x >> 1 & 1);
                (s >> 1) as u64 | ((s & 1) as u64) << 1
            });
            self.table(&t)?;
        }
        Ok(())
    }

    /// `diff <- a - b`, wrapping. The borrow column must be 0 beforehand.
    pub fn vec_sub(&mut self, a: &[usize], b: &[usize], diff: &[usize], borrow: usize) -> Result<()> {
        same_width("sub a/b", a, b)?;
        same_width("sub a/diff", a, diff)?;
        for i in 0..a.len() {
            let t = ResolvedTable::from_fn(vec![a[i], b[i], borrow], vec![borrow, diff[i]], |x| {
                let d = (x & 1) as i32 - (x >> 1 & 1) as i32 - (x >> 2 & 1) as i32;
                (d < 0) as u64 | ((d & 1) as u64) << 1
            });
            self.table(&t)?;
        }
        Ok(())
    }

    /// Sets `flag` to `a < b` (signed) on rows meeting the conditions.
    /// `scratch` receives `a - b`; the sign rule is exact even when the
    /// difference wraps.
    pub fn less_than(&mut self, a: &[usize], b: &[usize], scratch: &[usize], borrow: usize, flag: usize) -> Result<()> {
        if a.is_empty() {
            return Err(Error::WidthMismatch("empty operand".into()));
        }
        self.clear(&[&[borrow]]);
        self.vec_sub(a, b, scratch, borrow)?;
        let top = a.len() - 1;
        let t = ResolvedTable::from_fn(vec![a[top], b[top], scratch[top]], vec![flag], |x| {
            let (sa, sb, sd) = (x & 1, x >> 1 & 1, x >> 2 & 1);
            (if sa != sb { sa } else { sd }) as u64
        });
        self.table(&t)
    }

    /// `dst <- max(a, b)`, signed. `dst` may alias `a` or `b`.
    #[allow(clippy::too_many_arguments)]
    pub fn vec_max(
        &mut self,
        a: &[usize],
        b: &[usize],
        dst: &[usize],
        scratch: &[usize],
        borrow: usize,
        flag: usize,
    ) -> Result<()> {
        same_width("max a/b", a, b)?;
        same_width("max a/dst", a, dst)?;
        same_width("max scratch", a, scratch)?;
        self.less_than(a, b, scratch, borrow, flag)?;
        if dst == a {
            self.with_conditions(&[(flag, true)], |p| p.copy(b, a))
        } else if dst == b {
            self.with_conditions(&[(flag, false)], |p| p.copy(a, b))
        } else {
            self.copy(a, dst)?;
            self.with_conditions(&[(flag, true)], |p| p.copy(b, dst))
        }
    }

    /// `a <- max(a, 0)`: rows with the sign bit set are zeroed. Two cycles.
    pub fn clamp_min_zero(&mut self, a: &[usize]) {
        let sign = *a.last().expect("non-empty field");
        self.compare(&[(sign, true)]);
        let zeros: Vec<(usize, bool)> = a.iter().map(|&c| (c, false)).collect();
        self.write(&zeros);
    }

    /// Moves `src` one row down into `dst` on every row: `dst` is cleared,
    /// then each bit takes compare, tag shift-down, write. Row 0 receives 0.
    /// Conditions do not apply.
    pub fn shift_down(&mut self, src: &[usize], dst: &[usize]) -> Result<()> {
        same_width("shift", src, dst)?;
        if !disjoint(src, dst) {
            return Err(Error::WidthMismatch(
                "shift-down needs a destination distinct from its source".into(),
            ));
        }
        let saved = std::mem::take(&mut self.conditions);
        self.clear(&[dst]);
        for (&s, &d) in src.iter().zip(dst) {
            self.compare(&[(s, true)]);
            self.shift();
            self.write(&[(d, true)]);
        }
        self.conditions = saved;
        Ok(())
    }

    /// Rows meeting `condition` (and the active conditions) take the value
    /// from the row above; other rows keep their own `dst`.
    pub fn shift_down_where(
        &mut self,
        src: &[usize],
        dst: &[usize],
        scratch: &[usize],
        condition: &[(usize, bool)],
    ) -> Result<()> {
        self.shift_down(src, scratch)?;
        self.with_conditions(condition, |p| p.copy(scratch, dst))
    }
}

fn field<'a>(map: &'a ColumnMap, name: &str) -> Result<&'a [usize]> {
    map.get(name)
}

fn single(map: &ColumnMap, name: &str) -> Result<usize> {
    let cols = map.get(name)?;
    if cols.len() != 1 {
        return Err(Error::WidthMismatch(format!("`{name}` must be one bit wide")));
    }
    Ok(cols[0])
}

fn condition_of(map: &ColumnMap, condition: Option<&str>) -> Result<Vec<(usize, bool)>> {
    condition
        .map(|c| single(map, c).map(|col| vec![(col, true)]))
        .transpose()
        .map(Option::unwrap_or_default)
}

/// `carry | sum <- a + b + carry` over named fields. With a condition
/// field, only rows holding 1 there are updated.
pub fn vec_add(
    map: &ColumnMap,
    a: &str,
    b: &str,
    sum: &str,
    carry: &str,
    condition: Option<&str>,
    strategy: ScheduleStrategy,
) -> Result<MicroProgram> {
    let mut p = ProgramBuilder::new(map.row_bits(), strategy);
    let (a, b, sum, carry) = (field(map, a)?, field(map, b)?, field(map, sum)?, single(map, carry)?);
    p.with_conditions(&condition_of(map, condition)?, |p| p.vec_add(a, b, sum, carry))?;
    Ok(p.finish())
}

/// `diff <- a - b` over named fields; the borrow column is cleared first.
pub fn vec_sub(
    map: &ColumnMap,
    a: &str,
    b: &str,
    diff: &str,
    borrow: &str,
    condition: Option<&str>,
    strategy: ScheduleStrategy,
) -> Result<MicroProgram> {
    let mut p = ProgramBuilder::new(map.row_bits(), strategy);
    let (a, b, diff, borrow) = (field(map, a)?, field(map, b)?, field(map, diff)?, single(map, borrow)?);
    p.with_conditions(&condition_of(map, condition)?, |p| {
        p.clear(&[&[borrow]]);
        p.vec_sub(a, b, diff, borrow)
    })?;
    Ok(p.finish())
}

/// `dst <- max(a, b)` over named fields.
#[allow(clippy::too_many_arguments)]
pub fn vec_max(
    map: &ColumnMap,
    a: &str,
    b: &str,
    dst: &str,
    scratch: &str,
    borrow: &str,
    flag: &str,
    condition: Option<&str>,
    strategy: ScheduleStrategy,
) -> Result<MicroProgram> {
    let mut p = ProgramBuilder::new(map.row_bits(), strategy);
    let (a, b, dst, scratch) = (field(map, a)?, field(map, b)?, field(map, dst)?, field(map, scratch)?);
    let (borrow, flag) = (single(map, borrow)?, single(map, flag)?);
    p.with_conditions(&condition_of(map, condition)?, |p| {
        p.vec_max(a, b, dst, scratch, borrow, flag)
    })?;
    Ok(p.finish())
}

pub fn vec_copy(map: &ColumnMap, src: &str, dst: &str, condition: Option<&str>) -> Result<MicroProgram> {
    let mut p = ProgramBuilder::new(map.row_bits(), ScheduleStrategy::Baseline);
    let (src, dst) = (field(map, src)?, field(map, dst)?);
    p.with_conditions(&condition_of(map, condition)?, |p| p.copy(src, dst))?;
    Ok(p.finish())
}

/// Writes `value` into `name` on every row whose `flags` all hold 1.
pub fn vec_broadcast(map: &ColumnMap, name: &str, value: u64, flags: &[&str]) -> Result<MicroProgram> {
    let mut p = ProgramBuilder::new(map.row_bits(), ScheduleStrategy::Baseline);
    let conditions: Vec<(usize, bool)> = flags
        .iter()
        .map(|f| single(map, f).map(|c| (c, true)))
        .collect::<Result<_>>()?;
    let cols = field(map, name)?;
    p.with_conditions(&conditions, |p| {
        p.broadcast(cols, value);
        Ok(())
    })?;
    Ok(p.finish())
}
