//! Cycle and energy accounting.
//!
//! Constants are per word row. Compare energy depends on how many Sub-Words
//! are precharged; it is interpolated linearly between the one-Sub-Word
//! (minimum) and all-Sub-Word (maximum) anchors.

use serde::{Deserialize, Serialize};

const FEMTO: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub cycle_time_s: f64,
    /// (one active Sub-Word, all Sub-Words active), femtojoules per row.
    pub compare_match_fj: (f64, f64),
    pub compare_mismatch_fj: (f64, f64),
    pub write_bit_fj: f64,
    pub shift_row_fj: f64,
    pub interdie_bit_j: f64,
    pub interdie_bits_per_s: f64,
    pub subwords_per_row: usize,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            cycle_time_s: 2e-9,
            compare_match_fj: (10.0, 19.0),
            compare_mismatch_fj: (0.35, 11.0),
            write_bit_fj: 206.0,
            shift_row_fj: 217.0,
            interdie_bit_j: 1e-9,
            interdie_bits_per_s: 500e6,
            subwords_per_row: 8,
        }
    }
}

impl EnergyParams {
    fn interpolate(&self, (lo, hi): (f64, f64), active: usize) -> f64 {
        match active {
            0 => 0.0,
            1 => lo,
            a if a >= self.subwords_per_row => hi,
            a => lo + (hi - lo) * (a - 1) as f64 / (self.subwords_per_row - 1) as f64,
        }
    }

    /// Femtojoules for one matching row with `active` precharged Sub-Words.
    pub fn compare_match_fj(&self, active: usize) -> f64 {
        self.interpolate(self.compare_match_fj, active)
    }

    pub fn compare_mismatch_fj(&self, active: usize) -> f64 {
        self.interpolate(self.compare_mismatch_fj, active)
    }
}

/// One recorded cycle, kept when the ledger log is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Compare {
        active_subwords: usize,
        matched: usize,
        mismatched: usize,
        blocked: usize,
    },
    Write {
        bits: usize,
        tagged_rows: usize,
    },
    Shift {
        rows: usize,
        crossings: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CycleCounts {
    pub compare: u64,
    pub write: u64,
    pub shift: u64,
}

impl CycleCounts {
    pub fn total(&self) -> u64 {
        self.compare + self.write + self.shift
    }

    pub fn saturating_sub(&self, other: &CycleCounts) -> CycleCounts {
        CycleCounts {
            compare: self.compare.saturating_sub(other.compare),
            write: self.write.saturating_sub(other.write),
            shift: self.shift.saturating_sub(other.shift),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub compare: f64,
    pub write: f64,
    pub shift: f64,
    pub interdie: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.compare + self.write + self.shift + self.interdie
    }
}

#[derive(Debug, Clone)]
pub struct EnergyLedger {
    params: EnergyParams,
    cycles: CycleCounts,
    interdie_bits: u64,
    /// Femtojoules for compare/write/shift; joules for inter-die.
    compare_fj: f64,
    write_fj: f64,
    shift_fj: f64,
    log: Option<Vec<Event>>,
    iteration_mark: Option<(f64, f64)>,
    peak_power_w: f64,
}

impl Default for EnergyLedger {
    fn default() -> Self {
        Self::new(EnergyParams::default())
    }
}

impl EnergyLedger {
    pub fn new(params: EnergyParams) -> Self {
        Self {
            params,
            cycles: CycleCounts::default(),
            interdie_bits: 0,
            compare_fj: 0.0,
            write_fj: 0.0,
            shift_fj: 0.0,
            log: None,
            iteration_mark: None,
            peak_power_w: 0.0,
        }
    }

    /// Keeps every event so totals can be recomputed independently.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn params(&self) -> &EnergyParams {
        &self.params
    }

    pub fn events(&self) -> Option<&[Event]> {
        self.log.as_deref()
    }

    pub fn cycles(&self) -> CycleCounts {
        self.cycles
    }

    pub fn interdie_bits(&self) -> u64 {
        self.interdie_bits
    }

    pub fn record_compare(&mut self, active_subwords: usize, matched: usize, mismatched: usize, blocked: usize) {
        self.cycles.compare += 1;
        self.compare_fj += matched as f64 * self.params.compare_match_fj(active_subwords)
            + mismatched as f64 * self.params.compare_mismatch_fj(active_subwords);
        if let Some(log) = &mut self.log {
            log.push(Event::Compare {
                active_subwords,
                matched,
                mismatched,
                blocked,
            });
        }
    }

    pub fn record_write(&mut self, bits: usize, tagged_rows: usize) {
        self.cycles.write += 1;
        self.write_fj += self.params.write_bit_fj * bits as f64 * tagged_rows as f64;
        if let Some(log) = &mut self.log {
            log.push(Event::Write { bits, tagged_rows });
        }
    }

    pub fn record_shift(&mut self, rows: usize, crossings: usize) {
        self.cycles.shift += 1;
        self.shift_fj += self.params.shift_row_fj * rows as f64;
        self.interdie_bits += crossings as u64;
        if let Some(log) = &mut self.log {
            log.push(Event::Shift { rows, crossings });
        }
    }

    pub fn energy(&self) -> EnergyBreakdown {
        EnergyBreakdown {
            compare: self.compare_fj * FEMTO,
            write: self.write_fj * FEMTO,
            shift: self.shift_fj * FEMTO,
            interdie: self.interdie_bits as f64 * self.params.interdie_bit_j,
        }
    }

    /// Modelled wall time: cycles at the clock period plus inter-die
    /// transfer time. Links between dies run in parallel and each shift
    /// moves one bit over every link, so the transfer time is that of one
    /// link.
    pub fn runtime_s(&self, boundaries: usize) -> f64 {
        let per_link_bits = if boundaries == 0 {
            0.0
        } else {
            self.interdie_bits as f64 / boundaries as f64
        };
        self.cycles.total() as f64 * self.params.cycle_time_s + per_link_bits / self.params.interdie_bits_per_s
    }

    fn cycle_energy_and_time(&self) -> (f64, f64) {
        (
            self.energy().total(),
            self.cycles.total() as f64 * self.params.cycle_time_s,
        )
    }

    /// Starts or closes an iteration window for peak-power tracking.
    pub fn mark_iteration(&mut self) {
        let (energy, time) = self.cycle_energy_and_time();
        if let Some((e0, t0)) = self.iteration_mark {
            let dt = time - t0;
            if dt > 0.0 {
                self.peak_power_w = self.peak_power_w.max((energy - e0) / dt);
            }
        }
        self.iteration_mark = Some((energy, time));
    }

    pub fn peak_power_w(&self) -> f64 {
        self.peak_power_w
    }

    /// Sums another ledger into this one. Order-independent.
    pub fn merge(&mut self, other: &EnergyLedger) {
        self.cycles.compare += other.cycles.compare;
        self.cycles.write += other.cycles.write;
        self.cycles.shift += other.cycles.shift;
        self.interdie_bits += other.interdie_bits;
        self.compare_fj += other.compare_fj;
        self.write_fj += other.write_fj;
        self.shift_fj += other.shift_fj;
        self.peak_power_w = self.peak_power_w.max(other.peak_power_w);
        if let (Some(mine), Some(theirs)) = (&mut self.log, &other.log) {
            mine.extend_from_slice(theirs);
        }
    }

    pub fn report(&self, cell_updates: u64, chips: usize) -> RunReport {
        RunReport::from_ledger(self, cell_updates, chips)
    }
}

/// Recomputes the energy of a list of events without going through a ledger.
pub fn energy_of_events(params: &EnergyParams, events: &[Event]) -> EnergyBreakdown {
    let mut out = EnergyBreakdown::default();
    for event in events {
        match *event {
            Event::Compare {
                active_subwords,
                matched,
                mismatched,
                ..
            } => {
                out.compare += (matched as f64 * params.compare_match_fj(active_subwords)
                    + mismatched as f64 * params.compare_mismatch_fj(active_subwords))
                    * FEMTO;
            }
            Event::Write { bits, tagged_rows } => {
                out.write += params.write_bit_fj * (bits * tagged_rows) as f64 * FEMTO;
            }
            Event::Shift { rows, crossings } => {
                out.shift += params.shift_row_fj * rows as f64 * FEMTO;
                out.interdie += crossings as f64 * params.interdie_bit_j;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub cycles: CycleCounts,
    pub total_cycles: u64,
    pub energy_j: EnergyBreakdown,
    pub energy_total_j: f64,
    pub interdie_bits: u64,
    pub runtime_s: f64,
    pub average_power_w: f64,
    pub cell_updates: u64,
    pub cups: f64,
    pub peak_power_w_per_chip: f64,
}

impl RunReport {
    pub fn from_ledger(ledger: &EnergyLedger, cell_updates: u64, chips: usize) -> Self {
        let chips = chips.max(1);
        let energy = ledger.energy();
        let runtime_s = ledger.runtime_s(chips - 1);
        let per_second = |x: f64| if runtime_s > 0.0 { x / runtime_s } else { 0.0 };
        Self {
            cycles: ledger.cycles(),
            total_cycles: ledger.cycles().total(),
            energy_j: energy,
            energy_total_j: energy.total(),
            interdie_bits: ledger.interdie_bits(),
            runtime_s,
            average_power_w: per_second(energy.total()),
            cell_updates,
            cups: per_second(cell_updates as f64),
            peak_power_w_per_chip: ledger.peak_power_w() / chips as f64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
