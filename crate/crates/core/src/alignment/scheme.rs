//! Alphabets, encoded sequences and scoring schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{parse_matrix, SubstitutionMatrix, BLOSUM62_TEXT};

const DNA: &str = "ACGT";
const DNA_MASKED: &str = "ACGTN";
const PROTEIN: &str = "ARNDCQEGHILKMFPSTWYVBZX";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alphabet {
    /// `ACGT`, 2 bits.
    Dna,
    /// `ACGT` plus `N`, 3 bits. `N` scores as a mismatch against anything.
    DnaMasked,
    /// 20 amino acids plus `B`, `Z`, `X`; 5 bits.
    Protein,
}

impl Alphabet {
    pub fn symbols(self) -> &'static str {
        match self {
            Alphabet::Dna => DNA,
            Alphabet::DnaMasked => DNA_MASKED,
            Alphabet::Protein => PROTEIN,
        }
    }

    pub fn size(self) -> usize {
        self.symbols().len()
    }

    /// Bits per stored symbol.
    pub fn bits(self) -> usize {
        match self {
            Alphabet::Dna => 2,
            Alphabet::DnaMasked => 3,
            Alphabet::Protein => 5,
        }
    }

    pub fn code(self, symbol: char) -> Result<u8> {
        let up = symbol.to_ascii_uppercase();
        self.symbols()
            .find(up)
            .map(|i| i as u8)
            .ok_or(Error::SymbolOutOfAlphabet {
                symbol,
                alphabet: self.symbols(),
            })
    }

    pub fn symbol(self, code: u8) -> char {
        self.symbols().as_bytes()[code as usize] as char
    }

    pub fn is_dna(self) -> bool {
        matches!(self, Alphabet::Dna | Alphabet::DnaMasked)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alphabet::Dna => "dna",
            Alphabet::DnaMasked => "dna-masked",
            Alphabet::Protein => "protein",
        })
    }
}

impl FromStr for Alphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dna" => Ok(Alphabet::Dna),
            "dna-masked" => Ok(Alphabet::DnaMasked),
            "protein" => Ok(Alphabet::Protein),
            other => Err(Error::Config(format!("unknown alphabet `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedSequence {
    alphabet: Alphabet,
    codes: Vec<u8>,
}

impl EncodedSequence {
    pub fn encode(alphabet: Alphabet, text: &str) -> Result<Self> {
        let codes = text.chars().map(|c| alphabet.code(c)).collect::<Result<_>>()?;
        Ok(Self { alphabet, codes })
    }

    /// Like [`encode`](Self::encode), but DNA symbols outside `ACGT` become
    /// `N` in the masked alphabet.
    pub fn encode_masked(text: &str) -> Result<Self> {
        let codes = text
            .chars()
            .map(|c| match Alphabet::Dna.code(c) {
                Ok(code) => Ok(code),
                Err(_) if c.is_ascii_alphabetic() => Ok(4),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            alphabet: Alphabet::DnaMasked,
            codes,
        })
    }

    pub fn from_codes(alphabet: Alphabet, codes: Vec<u8>) -> Result<Self> {
        if let Some(&c) = codes.iter().find(|&&c| c as usize >= alphabet.size()) {
            return Err(Error::SymbolOutOfAlphabet {
                symbol: char::from_digit(c as u32 % 36, 36).unwrap_or('?'),
                alphabet: alphabet.symbols(),
            });
        }
        Ok(Self { alphabet, codes })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

impl fmt::Display for EncodedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.codes {
            write!(f, "{}", self.alphabet.symbol(c))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Substitution {
    MatchMismatch {
        match_score: i32,
        mismatch: i32,
    },
    /// Square matrix indexed by alphabet code.
    Matrix(Vec<Vec<i32>>),
}

/// Scores for the three alignment modes. The affine penalties `g_first`
/// and `g_ext` are subtracted; the linear gap score `d` is added (so it is
/// normally negative).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringScheme {
    pub alphabet: Alphabet,
    pub substitution: Substitution,
    pub g_first: i32,
    pub g_ext: i32,
    pub d: i32,
    /// Score field width in bits; `None` picks the smallest safe width.
    pub score_width: Option<u32>,
}

impl Default for ScoringScheme {
    fn default() -> Self {
        Self::dna(2, -1, 2, 1, -1)
    }
}

impl ScoringScheme {
    pub fn dna(match_score: i32, mismatch: i32, g_first: i32, g_ext: i32, d: i32) -> Self {
        Self {
            alphabet: Alphabet::Dna,
            substitution: Substitution::MatchMismatch { match_score, mismatch },
            g_first,
            g_ext,
            d,
            score_width: None,
        }
    }

    pub fn blosum62(g_first: i32, g_ext: i32, d: i32) -> Self {
        let matrix = blosum62();
        Self::from_matrix(Alphabet::Protein, &matrix, g_first, g_ext, d)
            .expect("embedded BLOSUM62 covers the protein alphabet")
    }

    /// Uses the rows/columns of `matrix` named by the alphabet's symbols.
    pub fn from_matrix(
        alphabet: Alphabet,
        matrix: &SubstitutionMatrix,
        g_first: i32,
        g_ext: i32,
        d: i32,
    ) -> Result<Self> {
        let symbols: Vec<char> = alphabet.symbols().chars().collect();
        let sub = matrix
            .select(&symbols)
            .ok_or_else(|| Error::AlphabetMismatch(format!("matrix does not cover every {alphabet} symbol")))?;
        Ok(Self {
            alphabet,
            substitution: Substitution::Matrix(sub.scores),
            g_first,
            g_ext,
            d,
            score_width: None,
        })
    }

    pub fn with_width(mut self, width: u32) -> Self {
        self.score_width = Some(width);
        self
    }

    /// The same scheme over `ACGTN`; only valid for match/mismatch schemes.
    pub fn masked(mut self) -> Result<Self> {
        match (&self.substitution, self.alphabet) {
            (Substitution::MatchMismatch { .. }, Alphabet::Dna | Alphabet::DnaMasked) => {
                self.alphabet = Alphabet::DnaMasked;
                Ok(self)
            }
            _ => Err(Error::Config(
                "ambiguity masking needs a DNA match/mismatch scheme".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.g_first < 0 || self.g_ext < 0 {
            return Err(Error::Config("gap penalties must be non-negative".into()));
        }
        if self.g_first < self.g_ext {
            return Err(Error::Config(format!(
                "gap-open penalty {} is smaller than gap-extend penalty {}",
                self.g_first, self.g_ext
            )));
        }
        if let Substitution::Matrix(m) = &self.substitution {
            let n = self.alphabet.size();
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::AlphabetMismatch(format!("substitution matrix is not {n}x{n}")));
            }
        }
        if let Some(w) = self.score_width {
            if !(2..=32).contains(&w) {
                return Err(Error::Config(format!("score width {w} is outside 2..=32")));
            }
        }
        Ok(())
    }

    /// Substitution score of two alphabet codes.
    pub fn sigma(&self, a: u8, b: u8) -> i32 {
        match &self.substitution {
            Substitution::MatchMismatch { match_score, mismatch } => {
                let masked = self.alphabet == Alphabet::DnaMasked && (a == 4 || b == 4);
                if a == b && !masked {
                    *match_score
                } else {
                    *mismatch
                }
            }
            Substitution::Matrix(m) => m[a as usize][b as usize],
        }
    }

    pub fn max_abs_sigma(&self) -> i32 {
        let n = self.alphabet.size() as u8;
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.sigma(a, b).abs())
            .max()
            .unwrap_or(0)
    }

    /// The scheme with `sigma(a, b)` and `sigma(b, a)` swapped.
    pub fn transposed(&self) -> Self {
        let mut out = self.clone();
        if let Substitution::Matrix(m) = &self.substitution {
            let n = m.len();
            out.substitution = Substitution::Matrix((0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect());
        }
        out
    }

    /// Distinct substitution scores over the alphabet.
    pub fn distinct_scores(&self) -> usize {
        let n = self.alphabet.size() as u8;
        let mut v: Vec<i32> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.sigma(a, b))
            .collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// Smallest two's-complement width that holds every intermediate value
    /// of an `n` by `m` alignment in any mode.
    pub fn required_width(&self, n: usize, m: usize) -> u32 {
        let step = self
            .max_abs_sigma()
            .max(self.g_first.saturating_add(self.g_ext))
            .max(self.d.abs()) as u64;
        let bound = (n as u64 + m as u64 + 2) * step.max(1);
        (64 - bound.leading_zeros()) + 1
    }

    /// The configured width, or the required width when none is set.
    pub fn resolve_width(&self, n: usize, m: usize) -> Result<u32> {
        let required = self.required_width(n, m);
        match self.score_width {
            None => Ok(required),
            Some(width) if width >= required => Ok(width),
            Some(width) => Err(Error::ScoreWidth { width, required }),
        }
    }
}

pub fn blosum62() -> SubstitutionMatrix {
    parse_matrix(BLOSUM62_TEXT).expect("embedded BLOSUM62 parses")
}
