use super::alloc::ColumnMap;
use crate::error::{Error, Result};

/// Input pattern over up to 32 table inputs. Bit `k` refers to input `k`;
/// inputs whose `care` bit is clear are don't-cares (masked in the compare).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub value: u32,
    pub care: u32,
}

impl Cube {
    pub const ANY: Cube = Cube { value: 0, care: 0 };

    pub fn minterm(value: u32, inputs: usize) -> Self {
        Self {
            value,
            care: low_mask(inputs),
        }
    }

    pub fn intersects(&self, other: &Cube) -> bool {
        (self.value ^ other.value) & self.care & other.care == 0
    }

    pub fn contains(&self, input: u32) -> bool {
        (input ^ self.value) & self.care == 0
    }

    pub fn dont_cares(&self, inputs: usize) -> u32 {
        inputs as u32 - self.care.count_ones()
    }

    /// Every concrete input the cube matches.
    pub fn minterms(&self, inputs: usize) -> impl Iterator<Item = u32> + '_ {
        let free = low_mask(inputs) & !self.care;
        let count = 1u64 << free.count_ones();
        (0..count).map(move |i| {
            // deposit the counter bits into the free positions
            let mut out = self.value & self.care;
            let mut src = i;
            let mut f = free;
            while f != 0 {
                let bit = f & f.wrapping_neg();
                if src & 1 == 1 {
                    out |= bit;
                }
                src >>= 1;
                f &= f - 1;
            }
            out
        })
    }

    /// Parses `"01-"`: character `k` is input `k`, `-` is a don't-care.
    pub fn parse(text: &str) -> Option<Cube> {
        let mut cube = Cube::ANY;
        for (k, ch) in text.chars().enumerate() {
            match ch {
                '0' => cube.care |= 1 << k,
                '1' => {
                    cube.care |= 1 << k;
                    cube.value |= 1 << k;
                }
                '-' | 'x' | 'X' => {}
                _ => return None,
            }
        }
        Some(cube)
    }
}

pub(crate) fn low_mask(bits: usize) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableEntry {
    pub input: Cube,
    /// Bit `k` is written to output `k`.
    pub output: u64,
}

/// A virtual column: bit `bit` of field `field`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColRef {
    pub field: String,
    pub bit: usize,
}

impl ColRef {
    pub fn new(field: &str, bit: usize) -> Self {
        Self {
            field: field.to_string(),
            bit,
        }
    }

    /// `name` or `name[bit]`.
    pub fn parse(text: &str) -> Option<Self> {
        let (field, bit) = match text.split_once('[') {
            Some((f, rest)) => (f, rest.strip_suffix(']')?.parse().ok()?),
            None => (text, 0),
        };
        let valid = !field.is_empty() && field.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        valid.then(|| Self::new(field, bit))
    }
}

/// A Boolean function to be evaluated associatively. Rows whose inputs match
/// no entry are left unchanged, unless a default output is declared, in
/// which case they receive it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub inputs: Vec<ColRef>,
    pub outputs: Vec<ColRef>,
    pub entries: Vec<TableEntry>,
    pub default: Option<u64>,
}

impl TruthTable {
    /// Builds a table from `(inputs, outputs)` strings where character `k`
    /// of each string refers to input/output `k`.
    pub fn from_rows(inputs: Vec<ColRef>, outputs: Vec<ColRef>, rows: &[(&str, &str)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len());
        for (i, (input, output)) in rows.iter().enumerate() {
            if input.len() != inputs.len() || output.len() != outputs.len() {
                return Err(Error::InconsistentTable(format!("entry {i} has the wrong width")));
            }
            let input = Cube::parse(input)
                .ok_or_else(|| Error::InconsistentTable(format!("entry {i}: bad input `{input}`")))?;
            let mut value = 0u64;
            for (k, ch) in output.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => value |= 1 << k,
                    _ => return Err(Error::InconsistentTable(format!("entry {i}: bad output `{output}`"))),
                }
            }
            entries.push(TableEntry { input, output: value });
        }
        let table = Self {
            inputs,
            outputs,
            entries,
            default: None,
        };
        table.validate()?;
        Ok(table)
    }

    /// Reads the text table format:
    ///
    /// ```text
    /// # comment
    /// inputs A B C
    /// outputs C S
    /// default 00
    /// 01- 10
    /// ```
    ///
    /// Columns are `field` (bit 0) or `field[bit]`. Entry lines hold an input
    /// cube and the output bits, both in declaration order.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut inputs = None;
        let mut outputs: Option<Vec<ColRef>> = None;
        let mut default_text = None;
        let mut rows: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or_default();
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            match head {
                "inputs" | "outputs" => {
                    let refs = words
                        .map(ColRef::parse)
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| parse_err("bad column name".into()))?;
                    if head == "inputs" {
                        inputs = Some(refs);
                    } else {
                        outputs = Some(refs);
                    }
                }
                "default" => default_text = Some((i + 1, words.next().unwrap_or_default().to_string())),
                cube => {
                    let out = words
                        .next()
                        .ok_or_else(|| parse_err("entry needs an input and an output".into()))?;
                    if words.next().is_some() {
                        return Err(parse_err("trailing text after entry".into()));
                    }
                    rows.push((i + 1, cube.to_string(), out.to_string()));
                }
            }
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("missing `{what}` line"),
        };
        let inputs = inputs.ok_or_else(|| missing("inputs"))?;
        let outputs = outputs.ok_or_else(|| missing("outputs"))?;
        let pairs: Vec<(&str, &str)> = rows.iter().map(|(_, a, b)| (a.as_str(), b.as_str())).collect();
        let mut table = Self::from_rows(inputs, outputs, &pairs).map_err(|e| {
            let line = rows.first().map_or(0, |r| r.0);
            match e {
                Error::InconsistentTable(m) => Error::Parse { line, message: m },
                other => other,
            }
        })?;
        if let Some((line, bits)) = default_text {
            let probe = Self::from_rows(vec![], table.outputs.clone(), &[("", &bits)]).map_err(|_| Error::Parse {
                line,
                message: format!("bad default `{bits}`"),
            })?;
            table.default = Some(probe.entries[0].output);
        }
        Ok(table)
    }

    /// Packs every referenced field left to right, each as wide as its
    /// highest referenced bit.
    pub fn packed_map(&self, row_bits: usize, subword_bits: usize) -> Result<ColumnMap> {
        let mut fields: Vec<(String, usize)> = Vec::new();
        for c in self.inputs.iter().chain(&self.outputs) {
            match fields.iter_mut().find(|(n, _)| *n == c.field) {
                Some((_, w)) => *w = (*w).max(c.bit + 1),
                None => fields.push((c.field.clone(), c.bit + 1)),
            }
        }
        let mut map = ColumnMap::new(row_bits, subword_bits);
        let mut next = 0;
        for (name, width) in fields {
            if next + width > row_bits {
                return Err(Error::InsufficientColumns {
                    needed: next + width,
                    available: row_bits,
                });
            }
            map.insert(&name, (next..next + width).collect())?;
            next += width;
        }
        Ok(map)
    }

    pub fn input_bits(&self) -> usize {
        self.inputs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() > 32 || self.outputs.len() > 64 {
            return Err(Error::InconsistentTable("too many inputs or outputs".into()));
        }
        let in_mask = low_mask(self.inputs.len());
        let out_mask = if self.outputs.len() >= 64 {
            u64::MAX
        } else {
            (1u64 << self.outputs.len()) - 1
        };
        for (i, e) in self.entries.iter().enumerate() {
            if e.input.care & !in_mask != 0 || e.input.value & !e.input.care != 0 {
                return Err(Error::InconsistentTable(format!("entry {i} has stray input bits")));
            }
            if e.output & !out_mask != 0 {
                return Err(Error::InconsistentTable(format!("entry {i} has stray output bits")));
            }
        }
        check_consistency(&self.entries)
    }

    /// Output for a concrete input, `None` when no entry matches and there
    /// is no default.
    pub fn lookup(&self, input: u32) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| e.input.contains(input))
            .map(|e| e.output)
            .or(self.default)
    }

    pub fn resolve(&self, map: &ColumnMap) -> Result<ResolvedTable> {
        self.validate()?;
        let column = |c: &ColRef| -> Result<usize> {
            map.get(&c.field)?
                .get(c.bit)
                .copied()
                .ok_or_else(|| Error::UnallocatedField(format!("{}[{}]", c.field, c.bit)))
        };
        Ok(ResolvedTable {
            inputs: self.inputs.iter().map(column).collect::<Result<_>>()?,
            outputs: self.outputs.iter().map(column).collect::<Result<_>>()?,
            entries: self.entries.clone(),
            default: self.default,
        })
    }
}

pub(crate) fn check_consistency(entries: &[TableEntry]) -> Result<()> {
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            if a.output != b.output && a.input.intersects(&b.input) {
                return Err(Error::InconsistentTable(format!(
                    "inputs {:?} and {:?} overlap with different outputs",
                    a.input, b.input
                )));
            }
        }
    }
    Ok(())
}

/// A truth table bound to physical columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedTable {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub entries: Vec<TableEntry>,
    pub default: Option<u64>,
}

impl ResolvedTable {
    /// Enumerates every concrete input of `inputs` bits through `f`.
    pub fn from_fn(inputs: Vec<usize>, outputs: Vec<usize>, f: impl Fn(u32) -> u64) -> Self {
        let n = inputs.len();
        let entries = (0..1u32 << n)
            .map(|x| TableEntry {
                input: Cube::minterm(x, n),
                output: f(x),
            })
            .collect();
        Self {
            inputs,
            outputs,
            entries,
            default: None,
        }
    }
}

/// The tables of the standard bit-level operations, over fields named
/// `A`, `B`, `C` (carry), `S` (sum) and `Y` (logic result).
pub mod builtin {
    use super::*;

    fn refs(names: &[&str]) -> Vec<ColRef> {
        names.iter().map(|n| ColRef::new(n, 0)).collect()
    }

    fn table(inputs: &[&str], outputs: &[&str], f: impl Fn(u32) -> u64) -> TruthTable {
        let n = inputs.len();
        TruthTable {
            inputs: refs(inputs),
            outputs: refs(outputs),
            entries: (0..1u32 << n)
                .map(|x| TableEntry {
                    input: Cube::minterm(x, n),
                    output: f(x),
                })
                .collect(),
            default: None,
        }
    }

    /// Inputs `A, B, C`; outputs `C, S`. The carry is updated in place.
    pub fn full_add() -> TruthTable {
        table(&["A", "B", "C"], &["C", "S"], |x| {
            let sum = (x & 1) + (x >> 1 & 1) + (x >> 2 & 1);
            (sum >> 1) as u64 | ((sum & 1) as u64) << 1
        })
    }

    /// Inputs `A, B`; outputs `C, S`.
    pub fn half_add() -> TruthTable {
        table(&["A", "B"], &["C", "S"], |x| {
            let sum = (x & 1) + (x >> 1 & 1);
            (sum >> 1) as u64 | ((sum & 1) as u64) << 1
        })
    }

    pub fn xor() -> TruthTable {
        table(&["A", "B"], &["Y"], |x| ((x ^ x >> 1) & 1) as u64)
    }

    pub fn and() -> TruthTable {
        table(&["A", "B"], &["Y"], |x| (x & x >> 1 & 1) as u64)
    }

    pub fn or() -> TruthTable {
        table(&["A", "B"], &["Y"], |x| ((x | x >> 1) & 1) as u64)
    }
}
