use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recam::alignment::{AlignMode, Alphabet, EncodedSequence, EngineOptions, ScoringScheme};
use recam::io::{parse_fasta, parse_matrix, FastaRecord};
use recam::microcode::ScheduleStrategy;
use recam::Geometry;

use crate::ConfigError;

/// Cycle- and energy-level simulator for associative sequence alignment.
///
/// Exit codes: 0 success, 1 internal failure, 2 input or configuration
/// error, 3 simulated score disagrees with the reference (`--check-oracle`).
#[derive(Debug, Parser)]
#[command(name = "recam", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align every record of A against every record of B.
    Align(AlignArgs),
    /// Local alignment of each query against a stored database.
    Search(SearchArgs),
    /// Schedule a truth table and show its cycle counts and program.
    Microcode(MicrocodeArgs),
    /// Summarize a JSON report written by `align` or `search`.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, env = "RECAM_MODE", default_value = "local", value_parser = parse_mode)]
    pub mode: AlignMode,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    pub query: PathBuf,
    pub db: PathBuf,
    /// Report the k best database sequences per query.
    #[arg(long, env = "RECAM_TOP_K", default_value_t = 1)]
    pub top_k: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub machine: MachineArgs,
    /// Compare every simulated score against the reference DP; any
    /// disagreement is fatal.
    #[arg(long, env = "RECAM_CHECK_ORACLE")]
    pub check_oracle: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, env = "RECAM_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphabetArg {
    Dna,
    Protein,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// Defaults to protein when a matrix is given, DNA otherwise.
    #[arg(long, env = "RECAM_ALPHABET")]
    pub alphabet: Option<AlphabetArg>,
    #[arg(
        long = "match",
        env = "RECAM_MATCH",
        default_value_t = 2,
        allow_negative_numbers = true
    )]
    pub match_score: i32,
    #[arg(long, env = "RECAM_MISMATCH", default_value_t = -1, allow_negative_numbers = true)]
    pub mismatch: i32,
    /// Substitution matrix in NCBI text format.
    #[arg(long, env = "RECAM_MATRIX", conflicts_with = "blosum62")]
    pub matrix: Option<PathBuf>,
    /// Use the built-in BLOSUM62 matrix.
    #[arg(long)]
    pub blosum62: bool,
    /// Penalty of the first gap symbol (local mode).
    #[arg(long, env = "RECAM_GAP_OPEN", default_value_t = 2)]
    pub gap_open: i32,
    /// Penalty of each further gap symbol (local mode).
    #[arg(long, env = "RECAM_GAP_EXTEND", default_value_t = 1)]
    pub gap_extend: i32,
    /// Linear gap score for global and semi-global modes.
    #[arg(long, env = "RECAM_GAP", default_value_t = -1, allow_negative_numbers = true)]
    pub gap: i32,
    /// Score field width in bits, or `auto` to size it from the inputs.
    #[arg(long, env = "RECAM_SCORE_WIDTH", default_value = "16", value_parser = parse_width)]
    pub score_width: WidthArg,
    /// Map non-ACGT DNA letters to a symbol that mismatches everything.
    #[arg(long, env = "RECAM_MASK_AMBIGUOUS")]
    pub mask_ambiguous: bool,
}

#[derive(Debug, Args)]
pub struct MachineArgs {
    /// Word rows; defaults to the smallest array that fits the inputs.
    #[arg(long, env = "RECAM_ROWS")]
    pub rows: Option<usize>,
    #[arg(long, env = "RECAM_ROW_BITS", default_value_t = Geometry::DEFAULT_ROW_BITS)]
    pub row_bits: usize,
    #[arg(long, env = "RECAM_SUBWORD_BITS", default_value_t = Geometry::DEFAULT_SUBWORD_BITS)]
    pub subword_bits: usize,
    #[arg(long, env = "RECAM_CHIPS", default_value_t = 1)]
    pub chips: usize,
    #[arg(long, env = "RECAM_STRATEGY", default_value = "auto", value_parser = parse_strategy)]
    pub strategy: ScheduleStrategy,
    /// Co-locate operand bits in shared Sub-Words.
    #[arg(long, env = "RECAM_EOM", default_value_t = true, action = clap::ArgAction::Set)]
    pub eom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinOp {
    FullAdd,
    HalfAdd,
    Xor,
    And,
    Or,
    DnaMatch,
    Blosum62Match,
}

#[derive(Debug, Args)]
pub struct MicrocodeArgs {
    #[arg(required_unless_present = "table", conflicts_with = "table")]
    pub op: Option<BuiltinOp>,
    /// Truth table in the text table format.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, env = "RECAM_STRATEGY", default_value = "auto", value_parser = parse_strategy)]
    pub strategy: ScheduleStrategy,
    /// Omit the program listing.
    #[arg(long)]
    pub counts_only: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub report: PathBuf,
}

fn parse_mode(s: &str) -> Result<AlignMode, String> {
    s.parse().map_err(|e: recam::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<ScheduleStrategy, String> {
    s.parse().map_err(|e: recam::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthArg {
    Auto,
    Bits(u32),
}

fn parse_width(s: &str) -> Result<WidthArg, String> {
    if s == "auto" {
        return Ok(WidthArg::Auto);
    }
    s.parse()
        .map(WidthArg::Bits)
        .map_err(|_| format!("expected a bit count or `auto`, got `{s}`"))
}

impl SchemeArgs {
    fn alphabet(&self) -> Alphabet {
        match self.alphabet {
            Some(AlphabetArg::Protein) => Alphabet::Protein,
            Some(AlphabetArg::Dna) => Alphabet::Dna,
            None if self.matrix.is_some() || self.blosum62 => Alphabet::Protein,
            None => Alphabet::Dna,
        }
    }

    pub fn build(&self) -> anyhow::Result<ScoringScheme> {
        let alphabet = self.alphabet();
        let mut scheme = if let Some(path) = &self.matrix {
            let text = read(path)?;
            let matrix = parse_matrix(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            ScoringScheme::from_matrix(alphabet, &matrix, self.gap_open, self.gap_extend, self.gap)?
        } else if self.blosum62 {
            if alphabet != Alphabet::Protein {
                return Err(ConfigError("BLOSUM62 scores protein sequences".into()).into());
            }
            ScoringScheme::blosum62(self.gap_open, self.gap_extend, self.gap)
        } else if alphabet == Alphabet::Protein {
            return Err(ConfigError("protein alignment needs --blosum62 or --matrix".into()).into());
        } else {
            ScoringScheme::dna(
                self.match_score,
                self.mismatch,
                self.gap_open,
                self.gap_extend,
                self.gap,
            )
        };
        if self.mask_ambiguous {
            scheme = scheme.masked()?;
        }
        if let WidthArg::Bits(w) = self.score_width {
            scheme = scheme.with_width(w);
        }
        scheme.validate()?;
        Ok(scheme)
    }
}

impl MachineArgs {
    pub fn geometry(&self, needed_rows: usize) -> anyhow::Result<Geometry> {
        let rows = self.rows.unwrap_or(needed_rows.max(self.chips).max(1));
        let g = Geometry {
            rows,
            row_bits: self.row_bits,
            subword_bits: self.subword_bits,
            chips: self.chips,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn options(&self) -> EngineOptions {
        EngineOptions {
            strategy: self.strategy,
            eom: self.eom,
        }
    }
}

pub fn read(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())).into())
}

/// A FASTA file's records, encoded for `scheme`.
pub fn load_fasta(path: &PathBuf, scheme: &ScoringScheme) -> anyhow::Result<Vec<(FastaRecord, EncodedSequence)>> {
    let text = read(path)?;
    let records = parse_fasta(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    records
        .into_iter()
        .map(|r| {
            let encoded = if scheme.alphabet == Alphabet::DnaMasked {
                EncodedSequence::encode_masked(&r.sequence)
            } else {
                EncodedSequence::encode(scheme.alphabet, &r.sequence)
            }
            .map_err(|e| ConfigError(format!("{}: record `{}`: {e}", path.display(), r.id)))?;
            Ok((r, encoded))
        })
        .collect()
}
