//! Truth table to compare/write cycle scheduling.
//!
//! A schedule is a sequence of units. Each unit compares one or more input
//! cubes (tags accumulate) and then issues a single write of the unit's
//! output. When outputs overlap inputs (an in-place carry, for instance) a
//! row written by one unit may afterwards match the cube of a later unit;
//! units are ordered so that never happens across different outputs.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::alloc::ColumnMap;
use super::table::{check_consistency, low_mask, Cube, ResolvedTable, TableEntry, TruthTable};
use super::{MicroOp, MicroProgram};
use crate::bits::BitRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleStrategy {
    /// One compare and one write per entry.
    Baseline,
    /// All compares of one output value, then a single write.
    BatchGrouped,
    /// Like `BatchGrouped`, with each group first covered by don't-care cubes.
    BatchCubes,
    /// Tag every row and write the most frequent output first, then the
    /// remaining groups.
    BatchDefaultWrite,
    /// Cheapest legal batch schedule.
    Auto,
}

impl std::str::FromStr for ScheduleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "baseline" => Self::Baseline,
            "batch-grouped" | "grouped" => Self::BatchGrouped,
            "batch-cubes" | "cubes" => Self::BatchCubes,
            "batch-default-write" | "default-write" => Self::BatchDefaultWrite,
            "auto" => Self::Auto,
            other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
        })
    }
}

#[derive(Debug, Clone)]
struct Unit {
    cubes: Vec<Cube>,
    output: u64,
    is_default: bool,
}

pub fn schedule(tt: &TruthTable, strategy: ScheduleStrategy, map: &ColumnMap) -> Result<MicroProgram> {
    let resolved = tt.resolve(map)?;
    schedule_resolved(&resolved, strategy, map.row_bits(), &[])
}

/// Schedules a table already bound to physical columns. Every compare also
/// requires the `conditions` columns to hold the given values.
pub fn schedule_resolved(
    table: &ResolvedTable,
    strategy: ScheduleStrategy,
    row_bits: usize,
    conditions: &[(usize, bool)],
) -> Result<MicroProgram> {
    check_columns(table, row_bits, conditions)?;
    check_consistency(&table.entries)?;
    if strategy == ScheduleStrategy::Auto {
        let mut best: Option<MicroProgram> = None;
        let mut first_err = None;
        for s in [
            ScheduleStrategy::BatchGrouped,
            ScheduleStrategy::BatchCubes,
            ScheduleStrategy::BatchDefaultWrite,
        ] {
            match schedule_with(table, s, row_bits, conditions) {
                Ok(p) if best.as_ref().is_none_or(|b| p.cycle_count() < b.cycle_count()) => best = Some(p),
                Ok(_) => {}
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        return best.ok_or_else(|| first_err.expect("at least one strategy ran"));
    }
    schedule_with(table, strategy, row_bits, conditions)
}

fn check_columns(table: &ResolvedTable, row_bits: usize, conditions: &[(usize, bool)]) -> Result<()> {
    let all = table
        .inputs
        .iter()
        .chain(&table.outputs)
        .chain(conditions.iter().map(|(c, _)| c));
    if let Some(c) = all.clone().find(|&&c| c >= row_bits) {
        return Err(Error::WidthMismatch(format!("column {c} outside a {row_bits}-bit row")));
    }
    let distinct = |cols: &[usize]| cols.iter().collect::<HashSet<_>>().len() == cols.len();
    if !distinct(&table.inputs) || !distinct(&table.outputs) {
        return Err(Error::InconsistentTable("repeated column in table".into()));
    }
    if table.inputs.len() > 32 {
        return Err(Error::InconsistentTable("more than 32 inputs".into()));
    }
    let cond_cols: HashSet<usize> = conditions.iter().map(|&(c, _)| c).collect();
    if table.outputs.iter().any(|c| cond_cols.contains(c)) {
        return Err(Error::InconsistentTable("a condition column is also an output".into()));
    }
    Ok(())
}

fn group_by_output(entries: &[TableEntry]) -> Vec<Unit> {
    let mut units: Vec<Unit> = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    for e in entries {
        let i = *index.entry(e.output).or_insert_with(|| {
            units.push(Unit {
                cubes: Vec::new(),
                output: e.output,
                is_default: false,
            });
            units.len() - 1
        });
        units[i].cubes.push(e.input);
    }
    units
}

fn build_units(table: &ResolvedTable, strategy: ScheduleStrategy) -> Vec<Unit> {
    let inputs = table.inputs.len();
    let mut units = Vec::new();
    if let Some(output) = table.default {
        units.push(Unit {
            cubes: vec![Cube::ANY],
            output,
            is_default: true,
        });
    }
    match strategy {
        ScheduleStrategy::Baseline => units.extend(table.entries.iter().map(|e| Unit {
            cubes: vec![e.input],
            output: e.output,
            is_default: false,
        })),
        ScheduleStrategy::BatchGrouped => units.extend(group_by_output(&table.entries)),
        ScheduleStrategy::BatchCubes => units.extend(group_by_output(&table.entries).into_iter().map(|mut u| {
            let cover = cover_cubes(&u.cubes, inputs);
            if cover.len() < u.cubes.len() {
                u.cubes = cover;
            }
            u
        })),
        ScheduleStrategy::BatchDefaultWrite => {
            let mut groups = group_by_output(&table.entries);
            if table.default.is_none() && !groups.is_empty() {
                let size = |u: &Unit| -> u64 { u.cubes.iter().map(|c| 1u64 << c.dont_cares(inputs)).sum() };
                let (largest, _) =
                    groups.iter().enumerate().fold(
                        (0, 0),
                        |(bi, bs), (i, u)| if size(u) > bs { (i, size(u)) } else { (bi, bs) },
                    );
                let output = groups.remove(largest).output;
                units.push(Unit {
                    cubes: vec![Cube::ANY],
                    output,
                    is_default: true,
                });
            }
            units.extend(groups);
        }
        ScheduleStrategy::Auto => unreachable!("auto is resolved by the caller"),
    }
    units
}

/// Whether every input combination hits some entry. Tables too wide to
/// enumerate count as incomplete.
fn covers_all_inputs(table: &ResolvedTable) -> bool {
    let k = table.inputs.len();
    k <= 20 && (0..1u32 << k).all(|x| table.entries.iter().any(|e| e.input.contains(x)))
}

fn schedule_with(
    table: &ResolvedTable,
    strategy: ScheduleStrategy,
    row_bits: usize,
    conditions: &[(usize, bool)],
) -> Result<MicroProgram> {
    // promoting a group to the default would overwrite rows the table leaves alone
    if strategy == ScheduleStrategy::BatchDefaultWrite && table.default.is_none() && !covers_all_inputs(table) {
        return Err(Error::NotApplicable(
            "default-write needs an explicit default or a table covering every input".into(),
        ));
    }
    let units = build_units(table, strategy);
    let order = order_units(table, &units)?;
    let mut prog = MicroProgram::new(row_bits);
    for i in order {
        let unit = &units[i];
        for cube in &unit.cubes {
            let mut key = BitRow::zeros(row_bits);
            let mut mask = BitRow::zeros(row_bits);
            for (k, &col) in table.inputs.iter().enumerate() {
                if cube.care >> k & 1 == 1 {
                    mask.set(col, true);
                    key.set(col, cube.value >> k & 1 == 1);
                }
            }
            for &(col, value) in conditions {
                mask.set(col, true);
                key.set(col, value);
            }
            prog.push(MicroOp::Compare { key, mask });
        }
        let mut key = BitRow::zeros(row_bits);
        let mut mask = BitRow::zeros(row_bits);
        for (k, &col) in table.outputs.iter().enumerate() {
            mask.set(col, true);
            key.set(col, unit.output >> k & 1 == 1);
        }
        prog.push(MicroOp::Write { key, mask });
    }
    Ok(prog)
}

/// Hazard-free unit order. The default unit, if any, goes first.
fn order_units(table: &ResolvedTable, units: &[Unit]) -> Result<Vec<usize>> {
    // (input index, output index) pairs sharing a physical column
    let overlap: Vec<(usize, usize)> = table
        .inputs
        .iter()
        .enumerate()
        .filter_map(|(k, c)| table.outputs.iter().position(|o| o == c).map(|j| (k, j)))
        .collect();
    if overlap.is_empty() {
        // writes never change inputs
        let mut order: Vec<usize> = (0..units.len()).filter(|&i| units[i].is_default).collect();
        order.extend((0..units.len()).filter(|&i| !units[i].is_default));
        return Ok(order);
    }
    if units.iter().any(|u| u.is_default) {
        return Err(Error::Hazard("a default write would overwrite input columns".into()));
    }
    let image = |cube: &Cube, output: u64| -> Cube {
        let mut img = *cube;
        for &(k, j) in &overlap {
            img.care |= 1 << k;
            if output >> j & 1 == 1 {
                img.value |= 1 << k;
            } else {
                img.value &= !(1 << k);
            }
        }
        img
    };
    let n = units.len();
    // before[g] holds the units that must run before g
    let mut indegree = vec![0usize; n];
    let mut after: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, ug) in units.iter().enumerate() {
        let images: Vec<Cube> = ug.cubes.iter().map(|c| image(c, ug.output)).collect();
        for (h, uh) in units.iter().enumerate() {
            if h == g || uh.output == ug.output {
                continue;
            }
            let hit = images.iter().any(|img| uh.cubes.iter().any(|c| c.intersects(img)));
            if hit {
                after[h].push(g);
                indegree[g] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &g in &after[i] {
            indegree[g] -= 1;
            if indegree[g] == 0 {
                ready.insert(g);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Hazard(
            "in-place outputs create a cyclic ordering constraint".into(),
        ));
    }
    Ok(order)
}

/// Greedy cover of the minterms of `cubes` by prime implicants lying
/// entirely inside them, largest cube first. Returns the input cubes
/// unchanged when the on-set is too large to enumerate.
pub fn cover_cubes(cubes: &[Cube], inputs: usize) -> Vec<Cube> {
    const MAX_MINTERMS: usize = 1 << 14;
    let mut on_set: HashSet<u32> = HashSet::new();
    for c in cubes {
        if (1usize << c.dont_cares(inputs)) + on_set.len() > MAX_MINTERMS {
            return cubes.to_vec();
        }
        on_set.extend(c.minterms(inputs));
    }
    if on_set.is_empty() {
        return Vec::new();
    }
    let full = low_mask(inputs);
    let mut level: HashSet<Cube> = on_set.iter().map(|&m| Cube { value: m, care: full }).collect();
    let mut primes: Vec<Cube> = Vec::new();
    while !level.is_empty() {
        let mut next: HashSet<Cube> = HashSet::new();
        let mut merged: HashSet<Cube> = HashSet::new();
        let mut sorted: Vec<Cube> = level.iter().copied().collect();
        sorted.sort();
        for cube in &sorted {
            let mut care = cube.care;
            while care != 0 {
                let bit = care & care.wrapping_neg();
                care &= care - 1;
                let partner = Cube {
                    value: cube.value ^ bit,
                    care: cube.care,
                };
                if level.contains(&partner) {
                    next.insert(Cube {
                        value: cube.value & !bit,
                        care: cube.care & !bit,
                    });
                    merged.insert(*cube);
                    merged.insert(partner);
                }
            }
        }
        primes.extend(sorted.into_iter().filter(|c| !merged.contains(c)));
        level = next;
    }
    primes.sort_by_key(|c| (std::cmp::Reverse(c.dont_cares(inputs)), c.care, c.value));
    let mut uncovered = on_set;
    let mut cover = Vec::new();
    while !uncovered.is_empty() {
        let best = primes
            .iter()
            .map(|p| (p, p.minterms(inputs).filter(|m| uncovered.contains(m)).count()))
            .filter(|(_, n)| *n > 0)
            .fold(None::<(&Cube, usize)>, |best, (p, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((p, n)),
            })
            .map(|(p, _)| *p)
            .expect("every minterm lies in some prime");
        for m in best.minterms(inputs) {
            uncovered.remove(&m);
        }
        cover.push(best);
    }
    cover
}
