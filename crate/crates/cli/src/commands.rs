use std::fmt::Write as _;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde_json::{json, Value};

use recam::alignment::{
    align, db_search, init_database, match_truth_table, reset_after_query, top_k, AlignMode, DatabaseLayout,
    ScoringScheme,
};
use recam::microcode::{builtin, schedule, ColumnMap, ScheduleStrategy, TruthTable};
use recam::oracle::{nw_global, semi_global, sw_local};
use recam::{CamArray, EnergyLedger, Error, RunReport};

use crate::args::{load_fasta, read, AlignArgs, BuiltinOp, MicrocodeArgs, ReportArgs, RunArgs, SearchArgs};
use crate::{ConfigError, OracleMismatch};

fn oracle(
    mode: AlignMode,
    a: &recam::alignment::EncodedSequence,
    b: &recam::alignment::EncodedSequence,
    s: &ScoringScheme,
) -> i64 {
    match mode {
        AlignMode::Local => sw_local(a, b, s).score,
        AlignMode::Global => nw_global(a, b, s).score,
        AlignMode::SemiGlobal => semi_global(a, b, s).score,
    }
}

fn emit(run: &RunArgs, report: &Value, summary: &str) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &run.output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            print!("{summary}");
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn config_json(run: &RunArgs, scheme: &ScoringScheme) -> Value {
    let m = &run.machine;
    json!({
        "scheme": scheme,
        "row_bits": m.row_bits,
        "subword_bits": m.subword_bits,
        "chips": m.chips,
        "strategy": m.strategy,
        "eom": m.eom,
        "check_oracle": run.check_oracle,
    })
}

pub fn cmd_align(args: &AlignArgs) -> anyhow::Result<()> {
    let run = &args.run;
    let scheme = run.scheme.build()?;
    let a = load_fasta(&args.a, &scheme)?;
    let b = load_fasta(&args.b, &scheme)?;
    let pairs: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).collect();

    // everything is validated before the first cycle runs
    let mut jobs = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (sa, sb) = (&a[i].1, &b[j].1);
        let geometry = run.machine.geometry(sa.len().max(sb.len()))?;
        scheme.resolve_width(sa.len().max(sb.len()), sa.len().min(sb.len()).max(1))?;
        if sa.len().max(sb.len()) > geometry.rows {
            return Err(Error::SequenceTooLong {
                len: sa.len().max(sb.len()),
                rows: geometry.rows,
            }
            .into());
        }
        CamArray::new(geometry)?;
        jobs.push((i, j, geometry));
    }

    let options = run.machine.options();
    let results: Vec<anyhow::Result<Value>> = jobs
        .par_iter()
        .map(|&(i, j, geometry)| {
            let (ra, sa) = &a[i];
            let (rb, sb) = &b[j];
            let mut array = CamArray::new(geometry)?;
            let mut ledger = EnergyLedger::default();
            let out = align(args.mode, sa, sb, &scheme, &options, &mut array, &mut ledger)?;
            let expected = run.check_oracle.then(|| oracle(args.mode, sa, sb, &scheme));
            if let Some(want) = expected {
                if want != out.score {
                    return Err(OracleMismatch(format!(
                        "{} vs {}: simulated {}, reference {want}",
                        ra.id, rb.id, out.score
                    ))
                    .into());
                }
            }
            Ok(json!({
                "a": ra.id,
                "b": rb.id,
                "outcome": out,
                "oracle_score": expected,
                "run": RunReport::from_ledger(&ledger, out.cell_updates, geometry.chips),
            }))
        })
        .collect();
    let results: Vec<Value> = results.into_iter().collect::<anyhow::Result<_>>()?;

    let mut summary = String::new();
    for r in &results {
        let _ = writeln!(
            summary,
            "{} vs {}: score {}",
            r["a"].as_str().unwrap_or(""),
            r["b"].as_str().unwrap_or(""),
            r["outcome"]["score"]
        );
    }
    let report = json!({
        "command": "align",
        "mode": args.mode,
        "config": config_json(run, &scheme),
        "pairs": results,
    });
    emit(run, &report, &summary)
}

pub fn cmd_search(args: &SearchArgs) -> anyhow::Result<()> {
    let run = &args.run;
    let scheme = run.scheme.build()?;
    let queries = load_fasta(&args.query, &scheme)?;
    let db = load_fasta(&args.db, &scheme)?;
    let seqs: Vec<_> = db.iter().map(|(_, s)| s.clone()).collect();
    if args.top_k > seqs.len() {
        return Err(Error::TopKTooLarge {
            k: args.top_k,
            available: seqs.len(),
        }
        .into());
    }
    let longest_query = queries.iter().map(|(_, q)| q.len()).max().unwrap_or(0);
    let geometry = run.machine.geometry(DatabaseLayout::rows_needed(&seqs))?;
    let options = run.machine.options();
    let mut array = CamArray::new(geometry)?;
    let layout = init_database(&seqs, &scheme, &options, longest_query, &mut array)?;
    let max_len = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
    for (_, q) in &queries {
        scheme.resolve_width(max_len, q.len().max(1))?;
        let required = scheme.required_width(max_len, q.len().max(1));
        if required as usize > layout.fields.width() {
            return Err(Error::ScoreWidth {
                width: layout.fields.width() as u32,
                required,
            }
            .into());
        }
    }

    let mut results = Vec::new();
    let mut summary = String::new();
    for (n, (record, query)) in queries.iter().enumerate() {
        // the reset is charged to the query it prepares for
        let mut ledger = EnergyLedger::default();
        if n > 0 {
            reset_after_query(&mut array, &layout, &mut ledger)?;
        }
        let out = db_search(query, &layout, &scheme, &options, &mut array, &mut ledger)?;
        let hits = top_k(&mut array, &layout, args.top_k, &mut ledger)?;
        let expected: Option<Vec<i64>> = run
            .check_oracle
            .then(|| seqs.iter().map(|s| sw_local(s, query, &scheme).score).collect());
        if let Some(want) = &expected {
            for (k, (&got, &w)) in out.scores.iter().zip(want).enumerate() {
                if got != w {
                    bail!(OracleMismatch(format!(
                        "{} vs {}: simulated {got}, reference {w}",
                        record.id, db[k].0.id
                    )));
                }
            }
            let mut ranked: Vec<(usize, i64)> = want.iter().copied().enumerate().collect();
            ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
            if hits != ranked[..args.top_k] {
                bail!(OracleMismatch(format!(
                    "{}: top-{} ranking differs from reference",
                    record.id, args.top_k
                )));
            }
        }
        let hit_json: Vec<Value> = hits
            .iter()
            .enumerate()
            .map(|(rank, &(index, score))| json!({"rank": rank + 1, "index": index, "id": db[index].0.id, "score": score}))
            .collect();
        for h in &hits {
            let _ = writeln!(summary, "{}: {} score {}", record.id, db[h.0].0.id, h.1);
        }
        results.push(json!({
            "query": record.id,
            "outcome": out,
            "top": hit_json,
            "oracle_scores": expected,
            "run": RunReport::from_ledger(&ledger, out.cell_updates, geometry.chips),
        }));
    }
    let report = json!({
        "command": "search",
        "config": config_json(run, &scheme),
        "database": db.iter().map(|(r, s)| json!({"id": r.id, "length": s.len()})).collect::<Vec<_>>(),
        "rows": geometry.rows,
        "queries": results,
    });
    emit(run, &report, &summary)
}

fn symbol_map(bits: usize, width: usize) -> anyhow::Result<ColumnMap> {
    Ok(ColumnMap::new(256, 32)
        .with_field("A", (0..bits).collect())?
        .with_field("B", (bits..2 * bits).collect())?
        .with_field("S", (2 * bits..2 * bits + width).collect())?)
}

fn builtin_table(op: BuiltinOp) -> anyhow::Result<(TruthTable, ColumnMap)> {
    let unit = || -> anyhow::Result<ColumnMap> {
        let mut map = ColumnMap::new(256, 32);
        for (i, f) in ["A", "B", "C", "S", "Y"].iter().enumerate() {
            map = map.with_field(f, vec![i])?;
        }
        Ok(map)
    };
    // substitution tables use a narrow score field; the counts do not depend on it
    Ok(match op {
        BuiltinOp::FullAdd => (builtin::full_add(), unit()?),
        BuiltinOp::HalfAdd => (builtin::half_add(), unit()?),
        BuiltinOp::Xor => (builtin::xor(), unit()?),
        BuiltinOp::And => (builtin::and(), unit()?),
        BuiltinOp::Or => (builtin::or(), unit()?),
        BuiltinOp::DnaMatch => (match_truth_table(&ScoringScheme::default(), 4), symbol_map(2, 4)?),
        BuiltinOp::Blosum62Match => (
            match_truth_table(&ScoringScheme::blosum62(11, 1, -4), 5),
            symbol_map(5, 5)?,
        ),
    })
}

pub fn cmd_microcode(args: &MicrocodeArgs) -> anyhow::Result<()> {
    let (table, map) = match (&args.table, args.op) {
        (Some(path), _) => {
            let t =
                TruthTable::parse_text(&read(path)?).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let map = t.packed_map(256, 32)?;
            (t, map)
        }
        (None, Some(op)) => builtin_table(op)?,
        (None, None) => unreachable!("clap requires an operation or a table"),
    };
    let baseline = schedule(&table, ScheduleStrategy::Baseline, &map)?;
    let chosen = schedule(&table, args.strategy, &map)?;
    println!("baseline {}, batched {}", baseline.cycle_count(), chosen.cycle_count());
    for s in [
        ScheduleStrategy::Baseline,
        ScheduleStrategy::BatchGrouped,
        ScheduleStrategy::BatchCubes,
        ScheduleStrategy::BatchDefaultWrite,
        ScheduleStrategy::Auto,
    ] {
        let name = serde_json::to_value(s)?;
        match schedule(&table, s, &map) {
            Ok(p) => {
                let c = p.counts();
                println!(
                    "  {:<20} {:>6} cycles ({} compare, {} write)",
                    name.as_str().unwrap_or(""),
                    p.cycle_count(),
                    c.compare,
                    c.write
                )
            }
            Err(e) => println!("  {:<20} n/a ({e})", name.as_str().unwrap_or("")),
        }
    }
    if !args.counts_only {
        print!("{}", chosen.dump(Some(&map)));
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> anyhow::Result<()> {
    let text = read(&args.report)?;
    let report: Value =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", args.report.display())))?;
    let runs: Vec<(String, &Value)> = match report["command"].as_str() {
        Some("align") => report["pairs"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|p| {
                (
                    format!(
                        "{} vs {}: score {}",
                        p["a"].as_str().unwrap_or("?"),
                        p["b"].as_str().unwrap_or("?"),
                        p["outcome"]["score"]
                    ),
                    p,
                )
            })
            .collect(),
        Some("search") => report["queries"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|q| {
                (
                    format!(
                        "{}: best {} at #{}",
                        q["query"].as_str().unwrap_or("?"),
                        q["outcome"]["best_score"],
                        q["outcome"]["argmax"]
                    ),
                    q,
                )
            })
            .collect(),
        _ => return Err(ConfigError(format!("{} is not an align or search report", args.report.display())).into()),
    };
    let (mut cycles, mut energy, mut runtime, mut cells) = (0u64, 0f64, 0f64, 0u64);
    for (line, v) in &runs {
        let r = &v["run"];
        println!(
            "{line}  [{} cycles, {:.3e} J, {:.3e} s]",
            r["total_cycles"],
            r["energy_total_j"].as_f64().unwrap_or(0.0),
            r["runtime_s"].as_f64().unwrap_or(0.0)
        );
        cycles += r["total_cycles"].as_u64().unwrap_or(0);
        energy += r["energy_total_j"].as_f64().unwrap_or(0.0);
        runtime += r["runtime_s"].as_f64().unwrap_or(0.0);
        cells += r["cell_updates"].as_u64().unwrap_or(0);
    }
    let cups = if runtime > 0.0 { cells as f64 / runtime } else { 0.0 };
    println!(
        "total: {} runs, {cycles} cycles, {energy:.3e} J, {runtime:.3e} s, {cups:.3e} CUPS",
        runs.len()
    );
    Ok(())
}
