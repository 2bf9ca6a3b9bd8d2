use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Role of a qudit within its site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// Physical qudit; sites may carry several (index distinguishes them).
    System(u8),
    /// Ancilla attached to the site.
    Ancilla(u16),
}

/// Address of one qudit in a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntryKey {
    pub site: usize,
    pub slot: Slot,
}

impl EntryKey {
    pub fn sys(site: usize) -> Self {
        EntryKey { site, slot: Slot::System(0) }
    }

    pub fn sys_k(site: usize, k: u8) -> Self {
        EntryKey { site, slot: Slot::System(k) }
    }

    pub fn anc(site: usize, k: u16) -> Self {
        EntryKey { site, slot: Slot::Ancilla(k) }
    }

    pub fn is_ancilla(&self) -> bool {
        matches!(self.slot, Slot::Ancilla(_))
    }
}

impl fmt::Display for EntryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Slot::System(0) => write!(f, "s{}", self.site),
            Slot::System(k) => write!(f, "s{}.{}", self.site, k),
            Slot::Ancilla(k) => write!(f, "a{}.{}", self.site, k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    #[serde(flatten)]
    pub key: EntryKey,
    pub dim: usize,
}

impl Entry {
    pub fn new(key: EntryKey, dim: usize) -> Self {
        Entry { key, dim }
    }
}

/// Ordered list of qudits; the order fixes the amplitude index convention
/// (first entry slowest-varying).
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Entry>", into = "Vec<Entry>")]
pub struct QuditRegister {
    entries: Vec<Entry>,
    #[serde(skip)]
    index: HashMap<EntryKey, usize>,
}

impl TryFrom<Vec<Entry>> for QuditRegister {
    type Error = crate::Error;
    fn try_from(v: Vec<Entry>) -> Result<Self> {
        QuditRegister::new(v)
    }
}

impl From<QuditRegister> for Vec<Entry> {
    fn from(r: QuditRegister) -> Self {
        r.entries
    }
}

impl QuditRegister {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.dim < 2 {
                return invalid(format!("entry {} has dimension {} < 2", e.key, e.dim));
            }
            if index.insert(e.key, i).is_some() {
                return invalid(format!("duplicate entry {}", e.key));
            }
        }
        Ok(QuditRegister { entries, index })
    }

    /// One system qudit of dimension `d` per site.
    pub fn uniform(n_sites: usize, d: usize) -> Self {
        QuditRegister::new((0..n_sites).map(|s| Entry::new(EntryKey::sys(s), d)).collect())
            .expect("valid register")
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn keys(&self) -> Vec<EntryKey> {
        self.entries.iter().map(|e| e.key).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, key: &EntryKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn contains(&self, key: &EntryKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn dim_of(&self, key: &EntryKey) -> Option<usize> {
        self.position(key).map(|i| self.entries[i].dim)
    }

    pub fn total_dim(&self) -> u128 {
        self.entries.iter().map(|e| e.dim as u128).product()
    }

    pub fn push(&mut self, e: Entry) -> Result<()> {
        if e.dim < 2 {
            return invalid(format!("entry {} has dimension {} < 2", e.key, e.dim));
        }
        if self.index.contains_key(&e.key) {
            return invalid(format!("duplicate entry {}", e.key));
        }
        self.index.insert(e.key, self.entries.len());
        self.entries.push(e);
        Ok(())
    }

    pub fn remove(&mut self, key: &EntryKey) -> Option<Entry> {
        let i = self.index.remove(key)?;
        let e = self.entries.remove(i);
        for v in self.index.values_mut() {
            if *v > i {
                *v -= 1;
            }
        }
        Some(e)
    }
}
