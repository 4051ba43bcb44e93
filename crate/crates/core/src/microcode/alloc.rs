//! Virtual field to physical column assignment.
//!
//! With operand mapping enabled, bit `i` of every field in a co-location
//! group lands in the same Sub-Word, so a bit-serial step over the group
//! precharges one Sub-Word instead of one per operand.

use std::collections::{BTreeMap, HashSet};

use crate::cam::Geometry;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub width: usize,
}

impl Field {
    pub fn new(name: &str, width: usize) -> Self {
        Self {
            name: name.to_string(),
            width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    row_bits: usize,
    subword_bits: usize,
    fields: BTreeMap<String, Vec<usize>>,
}

impl ColumnMap {
    pub fn new(row_bits: usize, subword_bits: usize) -> Self {
        Self {
            row_bits,
            subword_bits,
            fields: BTreeMap::new(),
        }
    }

    /// Adds a field at explicit columns (LSB first).
    pub fn with_field(mut self, name: &str, columns: Vec<usize>) -> Result<Self> {
        self.insert(name, columns)?;
        Ok(self)
    }

    pub fn insert(&mut self, name: &str, columns: Vec<usize>) -> Result<()> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.row_bits) {
            return Err(Error::InsufficientColumns {
                needed: c + 1,
                available: self.row_bits,
            });
        }
        let used: HashSet<usize> = self.fields.values().flatten().copied().collect();
        if columns.iter().any(|c| used.contains(c)) || self.fields.contains_key(name) {
            return Err(Error::Config(format!("field `{name}` overlaps an existing field")));
        }
        self.fields.insert(name.to_string(), columns);
        Ok(())
    }

    pub fn row_bits(&self) -> usize {
        self.row_bits
    }

    pub fn subword_bits(&self) -> usize {
        self.subword_bits
    }

    pub fn get(&self, name: &str) -> Result<&[usize]> {
        self.fields
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnallocatedField(name.to_string()))
    }

    pub fn fields(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.fields.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn subword_of(&self, column: usize) -> usize {
        column / self.subword_bits
    }
}

pub fn alloc(fields: &[Field], colocate: &[Vec<String>], eom: bool, geometry: &Geometry) -> Result<ColumnMap> {
    let row_bits = geometry.row_bits;
    let subword_bits = geometry.subword_bits;
    let needed: usize = fields.iter().map(|f| f.width).sum();
    if needed > row_bits {
        return Err(Error::InsufficientColumns {
            needed,
            available: row_bits,
        });
    }
    let mut map = ColumnMap::new(row_bits, subword_bits);
    if !eom {
        let mut next = 0;
        for f in fields {
            map.insert(&f.name, (next..next + f.width).collect())?;
            next += f.width;
        }
        return Ok(map);
    }

    let width_of = |name: &str| -> Result<usize> {
        fields
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.width)
            .ok_or_else(|| Error::UnallocatedField(name.to_string()))
    };
    let mut grouped: HashSet<&str> = HashSet::new();
    for group in colocate {
        for name in group {
            width_of(name)?;
            if !grouped.insert(name) {
                return Err(Error::InfeasibleColocation(format!(
                    "field `{name}` appears in more than one group"
                )));
            }
        }
    }

    let mut used = vec![false; row_bits];
    let mut assigned: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let (mut subword, mut offset) = (0usize, 0usize);
    for group in colocate {
        let widths: Vec<usize> = group.iter().map(|n| width_of(n)).collect::<Result<_>>()?;
        let depth = widths.iter().copied().max().unwrap_or(0);
        // groups never share a Sub-Word with each other
        if offset > 0 {
            subword += 1;
            offset = 0;
        }
        for bit in 0..depth {
            let members: Vec<&String> = group
                .iter()
                .zip(&widths)
                .filter(|(_, &w)| w > bit)
                .map(|(n, _)| n)
                .collect();
            if members.len() > subword_bits {
                return Err(Error::InfeasibleColocation(format!(
                    "bit {bit} of {} fields cannot share a {subword_bits}-bit Sub-Word",
                    members.len()
                )));
            }
            if offset + members.len() > subword_bits {
                subword += 1;
                offset = 0;
            }
            if (subword + 1) * subword_bits > row_bits {
                return Err(Error::InsufficientColumns {
                    needed,
                    available: row_bits,
                });
            }
            for name in members {
                let col = subword * subword_bits + offset;
                used[col] = true;
                assigned.entry(name.clone()).or_default().push(col);
                offset += 1;
            }
        }
    }
    // untouched Sub-Words first, then the leftovers inside grouped ones
    let first_fresh = if offset > 0 { subword + 1 } else { subword };
    let fresh_start = (first_fresh * subword_bits).min(row_bits);
    let mut free = (fresh_start..row_bits).chain(0..fresh_start).filter(|&c| !used[c]);
    for f in fields {
        if grouped.contains(f.name.as_str()) {
            map.insert(&f.name, assigned.remove(&f.name).unwrap_or_default())?;
        } else {
            let cols: Vec<usize> = free.by_ref().take(f.width).collect();
            if cols.len() < f.width {
                return Err(Error::InsufficientColumns {
                    needed,
                    available: row_bits,
                });
            }
            map.insert(&f.name, cols)?;
        }
    }
    Ok(map)
}
