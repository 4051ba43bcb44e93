//! Antidiagonal wavefront alignment.
//!
//! The longer sequence sits one symbol per row. The other one streams down
//! the rows, one row per iteration, so in iteration `t` row `r` scores cell
//! `(r + 1, t - r + 1)` and every row on the current antidiagonal works in
//! parallel. Three antidiagonal buffers rotate through the right, middle and
//! left roles; values from the row above arrive through shift-downs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::cam::{CamArray, CompareOutcome};
use crate::energy::{CycleCounts, EnergyLedger};
use crate::error::{Error, Result};
use crate::microcode::{
    execute, execute_op, ColRef, Cube, MicroOp, MicroProgram, ProgramBuilder, ResolvedTable, ScheduleStrategy,
    TableEntry, TruthTable,
};

use super::layout::*;
use super::scheme::{Alphabet, EncodedSequence, ScoringScheme, Substitution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignMode {
    Local,
    Global,
    SemiGlobal,
}

impl fmt::Display for AlignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignMode::Local => "local",
            AlignMode::Global => "global",
            AlignMode::SemiGlobal => "semi-global",
        })
    }
}

impl FromStr for AlignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "local" => Ok(AlignMode::Local),
            "global" => Ok(AlignMode::Global),
            "semi-global" | "semiglobal" | "semi" => Ok(AlignMode::SemiGlobal),
            other => Err(Error::Config(format!("unknown alignment mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub strategy: ScheduleStrategy,
    /// Co-locate operand bits in shared Sub-Words.
    pub eom: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            strategy: ScheduleStrategy::Auto,
            eom: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairwiseOutcome {
    pub mode: AlignMode,
    pub score: i64,
    pub width: u32,
    /// Rows holding the longer sequence.
    pub rows: usize,
    pub query_len: usize,
    /// The second sequence was the longer one and went into the rows.
    pub transposed: bool,
    pub iterations: usize,
    pub per_iteration: CycleCounts,
    pub extraction: CycleCounts,
    pub cell_updates: u64,
}

/// Substitution scores of `scheme` as a table from (row symbol, query
/// symbol) to a `width`-bit two's-complement value. Match/mismatch schemes
/// use the short form: the diagonal entries plus a mismatch default.
pub fn sigma_entries(scheme: &ScoringScheme, width: usize) -> (Vec<TableEntry>, Option<u64>) {
    let bits = scheme.alphabet.bits();
    let mask = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
    let enc = |v: i32| v as i64 as u64 & mask;
    let pair = |a: u8, b: u8| Cube::minterm(a as u32 | (b as u32) << bits, 2 * bits);
    match &scheme.substitution {
        Substitution::MatchMismatch { match_score, mismatch } => {
            let matchable = if scheme.alphabet == Alphabet::DnaMasked {
                4
            } else {
                scheme.alphabet.size()
            };
            let entries = (0..matchable as u8)
                .map(|s| TableEntry {
                    input: pair(s, s),
                    output: enc(*match_score),
                })
                .collect();
            (entries, Some(enc(*mismatch)))
        }
        Substitution::Matrix(_) => {
            let n = scheme.alphabet.size() as u8;
            let entries = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .map(|(a, b)| TableEntry {
                    input: pair(a, b),
                    output: enc(scheme.sigma(a, b)),
                })
                .collect();
            (entries, None)
        }
    }
}

/// The substitution table over fields `A` and `B` (symbols) and `S`
/// (score), for schedule inspection.
pub fn match_truth_table(scheme: &ScoringScheme, width: usize) -> TruthTable {
    let bits = scheme.alphabet.bits();
    let (entries, default) = sigma_entries(scheme, width);
    let mut inputs: Vec<ColRef> = (0..bits).map(|i| ColRef::new("A", i)).collect();
    inputs.extend((0..bits).map(|i| ColRef::new("B", i)));
    TruthTable {
        inputs,
        outputs: (0..width).map(|i| ColRef::new("S", i)).collect(),
        entries,
        default,
    }
}

fn sign_extend(v: u64, width: usize) -> i64 {
    let shift = 64 - width as u32;
    ((v << shift) as i64) >> shift
}

fn truncate(v: i64, width: usize) -> u64 {
    v as u64 & if width >= 64 { u64::MAX } else { (1u64 << width) - 1 }
}

/// Issues single cycles on behalf of the host-side controller.
pub(crate) struct Controller<'a> {
    pub array: &'a mut CamArray,
    pub ledger: &'a mut EnergyLedger,
}

impl Controller<'_> {
    pub fn run(&mut self, prog: &MicroProgram) -> Result<()> {
        execute(prog, self.array, self.ledger)
    }

    fn pattern(&self, bits: &[(usize, bool)]) -> (BitRow, BitRow) {
        let w = self.array.row_bits();
        let mut key = BitRow::zeros(w);
        let mut mask = BitRow::zeros(w);
        for &(c, v) in bits {
            mask.set(c, true);
            key.set(c, v);
        }
        (key, mask)
    }

    pub fn compare(&mut self, bits: &[(usize, bool)]) -> Result<CompareOutcome> {
        let (key, mask) = self.pattern(bits);
        let out = execute_op(&MicroOp::Compare { key, mask }, self.array, self.ledger)?;
        Ok(out.expect("compare yields an outcome"))
    }

    pub fn write(&mut self, bits: &[(usize, bool)]) -> Result<()> {
        let (key, mask) = self.pattern(bits);
        execute_op(&MicroOp::Write { key, mask }, self.array, self.ledger)?;
        Ok(())
    }

    /// Finds the largest signed value of `field` among rows meeting `init`,
    /// using `cand` as the candidate flag. Ties go to the lowest row.
    /// Two cycles per bit, plus six.
    pub fn max_find(&mut self, field: &[usize], cand: usize, init: &[(usize, bool)]) -> Result<Option<(usize, i64)>> {
        self.compare(&[])?;
        self.write(&[(cand, false)])?;
        let mut count = self.compare(init)?.tagged;
        self.write(&[(cand, true)])?;
        if count == 0 {
            return Ok(None);
        }
        let top = field.len() - 1;
        let mut value = 0u64;
        for bit in (0..field.len()).rev() {
            // prefer 1, except in the sign bit
            let prefer = bit != top;
            let losers = self.compare(&[(cand, true), (field[bit], !prefer)])?.tagged;
            let chosen = if losers < count {
                self.write(&[(cand, false)])?;
                count -= losers;
                prefer
            } else {
                self.write(&[])?;
                !prefer
            };
            value |= (chosen as u64) << bit;
        }
        self.compare(&[(cand, true)])?;
        let row = self.array.first_tagged().expect("a candidate survives");
        self.write(&[])?;
        Ok(Some((row, sign_extend(value, field.len()))))
    }

    pub fn read_signed(&self, row: usize, field: &[usize]) -> Result<i64> {
        Ok(sign_extend(self.array.read_bits(row, field)?, field.len()))
    }
}

/// Straight-line microcode for one mode, built once per run.
pub(crate) struct Kernel<'a> {
    layout: &'a WavefrontLayout,
    mode: AlignMode,
    strategy: ScheduleStrategy,
    g_first: i64,
    g_ext: i64,
    d: i64,
    sigma: [MicroProgram; 2],
    cache: HashMap<usize, (MicroProgram, MicroProgram)>,
}

impl<'a> Kernel<'a> {
    pub fn new(
        layout: &'a WavefrontLayout,
        scheme: &ScoringScheme,
        mode: AlignMode,
        strategy: ScheduleStrategy,
    ) -> Result<Self> {
        let w = layout.width();
        let (entries, default) = sigma_entries(scheme, w);
        let mut sigma = Vec::with_capacity(2);
        for slot in 0..2 {
            let q = layout.query(slot);
            let mut inputs = layout.cols(SEQ).to_vec();
            inputs.extend(&q.symbol);
            let table = ResolvedTable {
                inputs,
                outputs: layout.cols(SIG).to_vec(),
                entries: entries.clone(),
                default,
            };
            let mut p = ProgramBuilder::new(layout.map().row_bits(), strategy);
            p.with_conditions(&Self::valid(layout, slot), |p| p.table(&table))?;
            sigma.push(p.finish());
        }
        let sigma: [MicroProgram; 2] = sigma.try_into().expect("two query slots");
        Ok(Self {
            layout,
            mode,
            strategy,
            g_first: scheme.g_first as i64,
            g_ext: scheme.g_ext as i64,
            d: scheme.d as i64,
            sigma,
            cache: HashMap::new(),
        })
    }

    /// Rows scoring a cell in this iteration.
    fn valid(layout: &WavefrontLayout, slot: usize) -> Vec<(usize, bool)> {
        vec![
            (layout.query(slot).valid, true),
            (layout.flag(BUFFER_ROW), false),
            (layout.flag(IDLE), false),
        ]
    }

    fn builder(&self) -> ProgramBuilder {
        ProgramBuilder::new(self.layout.map().row_bits(), self.strategy)
    }

    /// Moves the query one row down and feeds symbol `t` (or nothing, once
    /// the query is exhausted) into every first row.
    pub fn prologue(&self, t: usize, query: &[u8]) -> Result<MicroProgram> {
        let cur = self.layout.query(t % 2);
        let prev = self.layout.query((t + 1) % 2);
        let mut p = self.builder();
        p.shift_down(&prev.all, &cur.all)?;
        p.compare(&[(self.layout.flag(FIRST_ROW), true)]);
        let mut bits: Vec<(usize, bool)> = Vec::with_capacity(cur.all.len());
        let code = query.get(t).copied();
        for (i, &c) in cur.symbol.iter().enumerate() {
            bits.push((c, code.is_some_and(|s| s >> i & 1 == 1)));
        }
        bits.push((cur.valid, code.is_some()));
        bits.push((cur.last, t + 1 == query.len()));
        p.write(&bits);
        Ok(p.finish())
    }

    /// Sets the first-row boundary cells of iteration `t`.
    pub fn boundary(&self, t: usize) -> MicroProgram {
        let l = self.layout;
        let mut p = self.builder();
        let first = [(l.flag(FIRST_ROW), true)];
        let _ = p.with_conditions(&first, |p| {
            match self.mode {
                AlignMode::Global => {
                    let w = l.width();
                    p.broadcast(l.cols(DIAG), truncate(t as i64 * self.d, w));
                    p.broadcast(l.cols(F), truncate((t as i64 + 1) * self.d, w));
                }
                AlignMode::Local | AlignMode::SemiGlobal => p.clear(&[l.cols(DIAG), l.cols(F)]),
            }
            Ok(())
        });
        p.finish()
    }

    fn build_parts(&self, t: usize) -> Result<(MicroProgram, MicroProgram)> {
        let l = self.layout;
        let roles = ad_roles(t);
        let slot = t % 2;
        let (right, mid, left) = (l.ad(roles.right), l.ad(roles.middle), l.ad(roles.left));
        let (diag, f, e, tmp, sig, diff, max) = (
            l.cols(DIAG),
            l.cols(F),
            l.cols(E),
            l.cols(TMP),
            l.cols(SIG),
            l.cols(DIFF),
            l.cols(MAX),
        );
        let (carry, lt) = (l.flag(CARRY), l.flag(LT));

        let mut p1 = self.builder();
        p1.shift_down(left, diag)?;
        match self.mode {
            AlignMode::Local => {
                p1.clear(&[&[carry]]);
                p1.vec_add_const(f, -self.g_ext, tmp, carry)?;
                p1.clear(&[&[carry]]);
                p1.vec_add_const(mid, -self.g_first, sig, carry)?;
                p1.vec_max(sig, tmp, sig, diff, carry, lt)?;
                p1.shift_down(sig, f)?;
            }
            AlignMode::Global | AlignMode::SemiGlobal => p1.shift_down(mid, f)?,
        }

        let mut p2 = self.builder();
        p2.append(self.sigma[slot].clone());
        p2.with_conditions(&Self::valid(l, slot), |p| {
            p.clear(&[&[carry]]);
            p.vec_add(diag, sig, right, carry)?;
            match self.mode {
                AlignMode::Local => {
                    p.clear(&[&[carry]]);
                    p.vec_add_const(e, -self.g_ext, e, carry)?;
                    p.clear(&[&[carry]]);
                    p.vec_add_const(mid, -self.g_first, sig, carry)?;
                    p.vec_max(e, sig, e, diff, carry, lt)?;
                    p.vec_max(right, e, right, diff, carry, lt)?;
                    p.vec_max(right, f, right, diff, carry, lt)?;
                    p.clamp_min_zero(right);
                    p.vec_max(max, right, max, diff, carry, lt)?;
                }
                AlignMode::Global | AlignMode::SemiGlobal => {
                    p.clear(&[&[carry]]);
                    p.vec_add_const(f, self.d, tmp, carry)?;
                    p.vec_max(right, tmp, right, diff, carry, lt)?;
                    p.clear(&[&[carry]]);
                    p.vec_add_const(mid, self.d, tmp, carry)?;
                    p.vec_max(right, tmp, right, diff, carry, lt)?;
                    if self.mode == AlignMode::SemiGlobal {
                        let q = l.query(slot);
                        let edge = ResolvedTable::from_fn(vec![l.flag(LAST_ROW), q.last], vec![l.flag(EDGE)], |x| {
                            (x != 0) as u64
                        });
                        p.table(&edge)?;
                        p.with_conditions(&[(l.flag(EDGE), true)], |p| p.vec_max(max, right, max, diff, carry, lt))?;
                    }
                }
            }
            Ok(())
        })?;
        Ok((p1.finish(), p2.finish()))
    }

    /// Runs iteration `t`.
    pub fn iterate(&mut self, ctl: &mut Controller<'_>, t: usize, query: &[u8]) -> Result<()> {
        let key = t % 6;
        if !self.cache.contains_key(&key) {
            let parts = self.build_parts(t)?;
            self.cache.insert(key, parts);
        }
        ctl.run(&self.prologue(t, query)?)?;
        let (p1, p2) = &self.cache[&key];
        ctl.run(p1)?;
        ctl.run(&self.boundary(t))?;
        ctl.run(p2)?;
        Ok(())
    }
}

fn check_inputs(a: &EncodedSequence, b: &EncodedSequence, scheme: &ScoringScheme) -> Result<()> {
    scheme.validate()?;
    for (name, s) in [("first", a), ("second", b)] {
        if s.alphabet() != scheme.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{name} sequence is {}, scheme is {}",
                s.alphabet(),
                scheme.alphabet
            )));
        }
    }
    Ok(())
}

/// Aligns `a` against `b` on `array` in the given mode.
pub fn align(
    mode: AlignMode,
    a: &EncodedSequence,
    b: &EncodedSequence,
    scheme: &ScoringScheme,
    options: &EngineOptions,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<PairwiseOutcome> {
    check_inputs(a, b, scheme)?;
    let transposed = b.len() > a.len();
    let (rows_seq, query, scheme) = if transposed {
        (b, a, scheme.transposed())
    } else {
        (a, b, scheme.clone())
    };
    let (n, m) = (rows_seq.len(), query.len());
    let width = scheme.resolve_width(n, m)?;
    let mut outcome = PairwiseOutcome {
        mode,
        score: 0,
        width,
        rows: n,
        query_len: m,
        transposed,
        iterations: 0,
        per_iteration: CycleCounts::default(),
        extraction: CycleCounts::default(),
        cell_updates: (n * m) as u64,
    };
    if m == 0 {
        outcome.score = match mode {
            AlignMode::Global => (n + m) as i64 * scheme.d as i64,
            AlignMode::Local | AlignMode::SemiGlobal => 0,
        };
        return Ok(outcome);
    }
    if n > array.rows() {
        return Err(Error::SequenceTooLong {
            len: n,
            rows: array.rows(),
        });
    }

    let layout = WavefrontLayout::new(scheme.alphabet, width, array.geometry(), options.eom, false)?;
    load_pairwise(array, &layout, rows_seq, mode, scheme.d as i64)?;

    let mut kernel = Kernel::new(&layout, &scheme, mode, options.strategy)?;
    let mut ctl = Controller { array, ledger };
    let iterations = n + m - 1;
    ctl.ledger.mark_iteration();
    for t in 0..iterations {
        let before = ctl.ledger.cycles();
        kernel.iterate(&mut ctl, t, query.codes())?;
        let spent = ctl.ledger.cycles().saturating_sub(&before);
        if t == 0 {
            outcome.per_iteration = spent;
        }
        debug_assert_eq!(spent, outcome.per_iteration, "iteration {t} is not straight-line");
        ctl.ledger.mark_iteration();
    }
    outcome.iterations = iterations;

    let before = ctl.ledger.cycles();
    outcome.score = match mode {
        AlignMode::Global => {
            let last = ad_roles(iterations - 1).right;
            ctl.read_signed(n - 1, layout.ad(last))?
        }
        AlignMode::Local | AlignMode::SemiGlobal => ctl
            .max_find(layout.cols(MAX), layout.flag(CAND), &[(layout.flag(IDLE), false)])?
            .map(|(_, v)| v)
            .unwrap_or(0),
    };
    outcome.extraction = ctl.ledger.cycles().saturating_sub(&before);
    Ok(outcome)
}

/// Host-side load: sequence symbols, row flags and boundary values.
fn load_pairwise(
    array: &mut CamArray,
    layout: &WavefrontLayout,
    seq: &EncodedSequence,
    mode: AlignMode,
    d: i64,
) -> Result<()> {
    array.clear();
    let n = seq.len();
    let w = layout.width();
    for (r, &code) in seq.codes().iter().enumerate() {
        array.store_bits(r, layout.cols(SEQ), code as u64)?;
        if mode == AlignMode::Global {
            let init = truncate((r as i64 + 1) * d, w);
            for i in 0..3 {
                array.store_bits(r, layout.ad(i), init)?;
            }
        }
    }
    array.store_bits(0, &[layout.flag(FIRST_ROW)], 1)?;
    array.store_bits(n - 1, &[layout.flag(LAST_ROW)], 1)?;
    for r in n..array.rows() {
        array.store_bits(r, &[layout.flag(IDLE)], 1)?;
    }
    Ok(())
}

fn default_run(
    mode: AlignMode,
    a: &EncodedSequence,
    b: &EncodedSequence,
    scheme: &ScoringScheme,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<i64> {
    align(mode, a, b, scheme, &EngineOptions::default(), array, ledger).map(|o| o.score)
}

pub fn align_pairwise_local(
    a: &EncodedSequence,
    b: &EncodedSequence,
    scheme: &ScoringScheme,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<i64> {
    default_run(AlignMode::Local, a, b, scheme, array, ledger)
}

pub fn align_pairwise_global(
    a: &EncodedSequence,
    b: &EncodedSequence,
    scheme: &ScoringScheme,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<i64> {
    default_run(AlignMode::Global, a, b, scheme, array, ledger)
}

pub fn align_semi_global(
    a: &EncodedSequence,
    b: &EncodedSequence,
    scheme: &ScoringScheme,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<i64> {
    default_run(AlignMode::SemiGlobal, a, b, scheme, array, ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cam::Geometry;

    fn dna(s: &str) -> EncodedSequence {
        EncodedSequence::encode(Alphabet::Dna, s).unwrap()
    }

    fn run(mode: AlignMode, a: &str, b: &str) -> i64 {
        let mut array = CamArray::new(Geometry::with_rows(16)).unwrap();
        let mut ledger = EnergyLedger::default();
        align(
            mode,
            &dna(a),
            &dna(b),
            &ScoringScheme::default(),
            &EngineOptions::default(),
            &mut array,
            &mut ledger,
        )
        .unwrap()
        .score
    }

    #[test]
    fn local_examples() {
        assert_eq!(run(AlignMode::Local, "ACGT", "ACGT"), 8);
        assert_eq!(run(AlignMode::Local, "ACGT", "AGGT"), 5);
        assert_eq!(run(AlignMode::Local, "A", "C"), 0);
    }

    #[test]
    fn global_examples() {
        assert_eq!(run(AlignMode::Global, "", ""), 0);
        assert_eq!(run(AlignMode::Global, "AC", "AC"), 4);
        assert_eq!(run(AlignMode::Global, "AACGT", "ACGT"), 7);
        assert_eq!(run(AlignMode::Global, "ACGT", "AACGT"), 7);
        assert_eq!(run(AlignMode::Global, "GGG", ""), -3);
    }

    #[test]
    fn semi_global_example() {
        assert_eq!(run(AlignMode::SemiGlobal, "TTACG", "ACGAA"), 6);
        assert_eq!(run(AlignMode::SemiGlobal, "", "ACG"), 0);
    }

    #[test]
    fn iteration_count_is_antidiagonal_count() {
        let mut array = CamArray::new(Geometry::with_rows(16)).unwrap();
        let mut ledger = EnergyLedger::default();
        let out = align(
            AlignMode::Local,
            &dna("ACGTAC"),
            &dna("GTA"),
            &ScoringScheme::default(),
            &EngineOptions::default(),
            &mut array,
            &mut ledger,
        )
        .unwrap();
        assert_eq!(out.iterations, 8);
        assert_eq!(
            ledger.cycles().total(),
            out.iterations as u64 * out.per_iteration.total() + out.extraction.total()
        );
    }

    #[test]
    fn too_long_sequence_is_rejected() {
        let mut array = CamArray::new(Geometry::with_rows(3)).unwrap();
        let err = align_pairwise_local(
            &dna("ACGT"),
            &dna("AC"),
            &ScoringScheme::default(),
            &mut array,
            &mut EnergyLedger::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SequenceTooLong { len: 4, rows: 3 }));
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let p = EncodedSequence::encode(Alphabet::Protein, "ACG").unwrap();
        let mut array = CamArray::new(Geometry::with_rows(4)).unwrap();
        let err = align_pairwise_local(
            &p,
            &p,
            &ScoringScheme::default(),
            &mut array,
            &mut EnergyLedger::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch(_)));
    }

    #[test]
    fn dna_match_table_cycle_counts() {
        use crate::microcode::{schedule, ColumnMap};
        let s = ScoringScheme::default();
        let tt = match_truth_table(&s, 4);
        let map = ColumnMap::new(256, 32)
            .with_field("A", vec![0, 1])
            .unwrap()
            .with_field("B", vec![2, 3])
            .unwrap()
            .with_field("S", vec![4, 5, 6, 7])
            .unwrap();
        let count = |st| schedule(&tt, st, &map).unwrap().cycle_count();
        assert_eq!(count(ScheduleStrategy::Baseline), 10);
        assert_eq!(count(ScheduleStrategy::BatchDefaultWrite), 7);
    }
}
