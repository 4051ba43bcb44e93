//! Whole-database local alignment: every stored sequence is aligned against
//! the same query at once, then each sequence's best score is gathered into
//! its buffer row.

use serde::Serialize;

use crate::cam::CamArray;
use crate::energy::{CycleCounts, EnergyLedger};
use crate::error::{Error, Result};
use crate::microcode::ProgramBuilder;

use super::engine::{AlignMode, Controller, EngineOptions, Kernel};
use super::layout::*;
use super::scheme::{EncodedSequence, ScoringScheme};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    /// Best local score of each database sequence, by sequence index.
    pub scores: Vec<i64>,
    /// Sequence holding the highest score; ties go to the lowest row.
    pub argmax: usize,
    pub best_score: i64,
    pub iterations: usize,
    pub per_iteration: CycleCounts,
    pub reduction: CycleCounts,
    pub extraction: CycleCounts,
    pub cell_updates: u64,
}

/// Stores `db` in `array`: one symbol per row, a buffer row after each
/// sequence carrying its index, and the row flags. The values are loaded
/// by the host, so no cycles are charged.
///
/// `max_query_len` sizes the score field when the scheme leaves the width
/// open; longer queries are rejected later.
pub fn init_database(
    db: &[EncodedSequence],
    scheme: &ScoringScheme,
    options: &EngineOptions,
    max_query_len: usize,
    array: &mut CamArray,
) -> Result<DatabaseLayout> {
    scheme.validate()?;
    let max_len = db.iter().map(|s| s.len()).max().unwrap_or(0);
    let width = scheme.resolve_width(max_len, max_query_len.max(1))?;
    let fields = WavefrontLayout::new(scheme.alphabet, width, array.geometry(), options.eom, true)?;
    let layout = DatabaseLayout::plan(db, fields, array.rows(), array.chip_boundaries().to_vec())?;
    let f = &layout.fields;
    array.clear();
    for (entry, seq) in layout.entries.iter().zip(db) {
        for (o, &code) in seq.codes().iter().enumerate() {
            array.store_bits(entry.start + o, f.cols(SEQ), code as u64)?;
        }
        array.store_bits(entry.start, &[f.flag(FIRST_ROW)], 1)?;
        array.store_bits(entry.buffer_row - 1, &[f.flag(LAST_ROW)], 1)?;
        array.store_bits(entry.buffer_row, &[f.flag(BUFFER_ROW)], 1)?;
        array.store_bits(entry.buffer_row, f.cols(META), entry.index as u64)?;
    }
    for r in layout.rows_used..array.rows() {
        array.store_bits(r, &[f.flag(IDLE)], 1)?;
    }
    Ok(layout)
}

/// Aligns `query` against every stored sequence. The working fields must be
/// clear, as after [`init_database`] or [`reset_after_query`].
pub fn db_search(
    query: &EncodedSequence,
    layout: &DatabaseLayout,
    scheme: &ScoringScheme,
    options: &EngineOptions,
    array: &mut CamArray,
    ledger: &mut EnergyLedger,
) -> Result<SearchOutcome> {
    let f = &layout.fields;
    if query.alphabet() != f.alphabet() || scheme.alphabet != f.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "query is {}, scheme is {}, database is {}",
            query.alphabet(),
            scheme.alphabet,
            f.alphabet()
        )));
    }
    if array.rows() != layout.total_rows {
        return Err(Error::Config("array does not hold this database".into()));
    }
    let required = scheme.required_width(layout.max_len, query.len().max(1));
    if required as usize > f.width() {
        return Err(Error::ScoreWidth {
            width: f.width() as u32,
            required,
        });
    }
    let m = query.len();
    let cell_updates = layout.entries.iter().map(|e| (e.len * m) as u64).sum();
    let mut ctl = Controller { array, ledger };
    let mut outcome = SearchOutcome {
        scores: vec![0; layout.entries.len()],
        argmax: 0,
        best_score: 0,
        iterations: 0,
        per_iteration: CycleCounts::default(),
        reduction: CycleCounts::default(),
        extraction: CycleCounts::default(),
        cell_updates,
    };
    if m == 0 {
        return Ok(outcome);
    }

    let mut kernel = Kernel::new(f, scheme, AlignMode::Local, options.strategy)?;
    let iterations = layout.max_len + m - 1;
    ctl.ledger.mark_iteration();
    for t in 0..iterations {
        let before = ctl.ledger.cycles();
        kernel.iterate(&mut ctl, t, query.codes())?;
        let spent = ctl.ledger.cycles().saturating_sub(&before);
        if t == 0 {
            outcome.per_iteration = spent;
        }
        debug_assert_eq!(spent, outcome.per_iteration);
        ctl.ledger.mark_iteration();
    }
    outcome.iterations = iterations;

    // running maxima flow down to each buffer row
    let before = ctl.ledger.cycles();
    let step = reduction_step(f, options)?;
    for _ in 0..layout.max_len {
        ctl.run(&step)?;
    }
    outcome.reduction = ctl.ledger.cycles().saturating_sub(&before);

    for e in &layout.entries {
        outcome.scores[e.index] = ctl.read_signed(e.buffer_row, f.cols(MAX))?;
    }
    let before = ctl.ledger.cycles();
    let (row, best) = ctl
        .max_find(f.cols(MAX), f.flag(CAND), &[(f.flag(BUFFER_ROW), true)])?
        .ok_or(Error::EmptyDatabase)?;
    outcome.extraction = ctl.ledger.cycles().saturating_sub(&before);
    outcome.argmax = ctl.array.read_bits(row, f.cols(META))? as usize;
    outcome.best_score = best;
    Ok(outcome)
}

fn reduction_step(f: &WavefrontLayout, options: &EngineOptions) -> Result<crate::microcode::MicroProgram> {
    let mut p = ProgramBuilder::new(f.map().row_bits(), options.strategy);
    p.shift_down(f.cols(MAX), f.cols(TMP))?;
    p.with_conditions(&[(f.flag(FIRST_ROW), false), (f.flag(IDLE), false)], |p| {
        p.vec_max(
            f.cols(MAX),
            f.cols(TMP),
            f.cols(MAX),
            f.cols(DIFF),
            f.flag(CARRY),
            f.flag(LT),
        )
    })?;
    Ok(p.finish())
}

/// Zeroes every per-query field in one compare/write pair, keeping the
/// stored sequences, their row flags and metadata.
pub fn reset_after_query(array: &mut CamArray, layout: &DatabaseLayout, ledger: &mut EnergyLedger) -> Result<()> {
    let cols = layout.fields.working_columns();
    let mut ctl = Controller { array, ledger };
    ctl.compare(&[])?;
    let zeros: Vec<(usize, bool)> = cols.into_iter().map(|c| (c, false)).collect();
    ctl.write(&zeros)
}

/// The `k` best sequences after a search, as `(sequence index, score)`,
/// best first; equal scores keep row order.
pub fn top_k(
    array: &mut CamArray,
    layout: &DatabaseLayout,
    k: usize,
    ledger: &mut EnergyLedger,
) -> Result<Vec<(usize, i64)>> {
    let available = layout.entries.len();
    if k > available {
        return Err(Error::TopKTooLarge { k, available });
    }
    let f = &layout.fields;
    let sel = f.flag(SEL);
    let mut ctl = Controller { array, ledger };
    ctl.compare(&[])?;
    ctl.write(&[(sel, false)])?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let (row, score) = ctl
            .max_find(f.cols(MAX), f.flag(CAND), &[(f.flag(BUFFER_ROW), true), (sel, false)])?
            .ok_or(Error::TopKTooLarge { k, available })?;
        out.push((ctl.array.read_bits(row, f.cols(META))? as usize, score));
        ctl.array.store_bits(row, &[sel], 1)?;
    }
    Ok(out)
}
