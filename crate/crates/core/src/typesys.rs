//! Entity type system: four coarse name-tagger classes plus a fine-grained
//! hierarchy loaded from a tab-separated mapping file.
//!
//! Each row of the mapping file is
//!
//! ```text
//! entity_name <TAB> fine_type <TAB> coarse_type <TAB> depth
//! ```
//!
//! Rows with depth `0` must name the coarse type itself as their fine type.
//! They register the entity (for gazetteer lookup) without a fine type.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TypeMapError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: {msg}")]
    Schema {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read type map {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse entity class produced by a name tagger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoarseType {
    Person,
    Location,
    Organization,
    Miscellaneous,
}

impl CoarseType {
    pub const ALL: [CoarseType; 4] = [
        CoarseType::Person,
        CoarseType::Location,
        CoarseType::Organization,
        CoarseType::Miscellaneous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseType::Person => "Person",
            CoarseType::Location => "Location",
            CoarseType::Organization => "Organization",
            CoarseType::Miscellaneous => "Miscellaneous",
        }
    }
}

impl fmt::Display for CoarseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown coarse type {0:?}")]
pub struct UnknownCoarseType(pub String);

impl FromStr for CoarseType {
    type Err = UnknownCoarseType;

    /// Accepts the full names (any case) and the CoNLL-style abbreviations.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "person" | "per" => Ok(CoarseType::Person),
            "location" | "loc" => Ok(CoarseType::Location),
            "organization" | "organisation" | "org" => Ok(CoarseType::Organization),
            "miscellaneous" | "misc" => Ok(CoarseType::Miscellaneous),
            _ => Err(UnknownCoarseType(s.to_string())),
        }
    }
}

impl Serialize for CoarseType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CoarseType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fine-grained type such as `Athlete` under `Person`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineType {
    pub name: String,
    pub parent: CoarseType,
    /// Position in the hierarchy; smaller is more general. Always `>= 1`.
    pub depth: u32,
}

/// The type carried by a template slot: either a fine type name or a coarse
/// class when no fine type applies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotType {
    Coarse(CoarseType),
    Fine(String),
}

impl SlotType {
    pub fn name(&self) -> &str {
        match self {
            SlotType::Coarse(c) => c.as_str(),
            SlotType::Fine(name) => name,
        }
    }
}

impl From<CoarseType> for SlotType {
    fn from(c: CoarseType) -> Self {
        SlotType::Coarse(c)
    }
}

impl fmt::Display for SlotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SlotType {
    type Err = std::convert::Infallible;

    /// Exact coarse names map to [`SlotType::Coarse`]; anything else is fine.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(CoarseType::ALL
            .iter()
            .find(|c| c.as_str() == s)
            .map(|&c| SlotType::Coarse(c))
            .unwrap_or_else(|| SlotType::Fine(s.to_string())))
    }
}

impl Serialize for SlotType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SlotType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(s.parse().unwrap_or_else(|e: std::convert::Infallible| match e {}))
    }
}

/// Case-folds and collapses runs of whitespace to a single space.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
struct IndexEntry {
    coarse: CoarseType,
    /// Indices into `TypeSystem::fine_types`, in file order.
    fine: Vec<usize>,
}

/// Immutable after construction.
#[derive(Debug, Clone, Default)]
pub struct TypeSystem {
    fine_types: Vec<FineType>,
    by_name: HashMap<String, usize>,
    entity_index: HashMap<String, IndexEntry>,
}

impl TypeSystem {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TypeMapError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TypeMapError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses mapping-file text. `origin` is used in error messages only.
    pub fn parse(text: &str, origin: &str) -> Result<Self, TypeMapError> {
        let mut ts = TypeSystem::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim_end_matches('\r');
            if row.trim().is_empty() || row.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = row.split('\t').collect();
            let parse_err = |msg: String| TypeMapError::Parse {
                path: origin.to_string(),
                line,
                msg,
            };
            let schema_err = |msg: String| TypeMapError::Schema {
                path: origin.to_string(),
                line,
                msg,
            };
            if cols.len() != 4 {
                return Err(parse_err(format!("expected 4 tab-separated columns, found {}", cols.len())));
            }
            let name = normalize_name(cols[0]);
            let fine_name = cols[1].trim();
            if name.is_empty() || fine_name.is_empty() {
                return Err(parse_err("empty entity name or fine type".into()));
            }
            let coarse: CoarseType = cols[2].parse().map_err(|e: UnknownCoarseType| schema_err(e.to_string()))?;
            let depth: u32 = cols[3]
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("depth {:?} is not a non-negative integer", cols[3].trim())))?;

            let fine_idx = if depth == 0 {
                if fine_name != coarse.as_str() {
                    return Err(schema_err(format!(
                        "depth 0 is reserved for coarse types, got fine type {fine_name:?}"
                    )));
                }
                None
            } else {
                if CoarseType::ALL.iter().any(|c| c.as_str() == fine_name) {
                    return Err(schema_err(format!("fine type {fine_name:?} shadows a coarse type")));
                }
                Some(ts.intern(fine_name, coarse, depth).map_err(schema_err)?)
            };

            let entry = ts.entity_index.entry(name).or_insert_with(|| IndexEntry {
                coarse,
                fine: Vec::new(),
            });
            if let Some(idx) = fine_idx {
                if !entry.fine.contains(&idx) {
                    entry.fine.push(idx);
                }
            }
        }
        Ok(ts)
    }

    fn intern(&mut self, name: &str, parent: CoarseType, depth: u32) -> Result<usize, String> {
        if let Some(&idx) = self.by_name.get(name) {
            let existing = &self.fine_types[idx];
            if existing.parent != parent || existing.depth != depth {
                return Err(format!(
                    "fine type {name:?} redeclared as {parent}/{depth}, first declared as {}/{}",
                    existing.parent, existing.depth
                ));
            }
            return Ok(idx);
        }
        self.fine_types.push(FineType {
            name: name.to_string(),
            parent,
            depth,
        });
        self.by_name.insert(name.to_string(), self.fine_types.len() - 1);
        Ok(self.fine_types.len() - 1)
    }

    pub fn fine_types(&self) -> &[FineType] {
        &self.fine_types
    }

    pub fn fine_type(&self, name: &str) -> Option<&FineType> {
        self.by_name.get(name).map(|&i| &self.fine_types[i])
    }

    /// Fine types indexed for `name`, in file order. Empty for unknown names.
    pub fn lookup(&self, name: &str) -> Vec<&FineType> {
        self.entity_index
            .get(&normalize_name(name))
            .map(|e| e.fine.iter().map(|&i| &self.fine_types[i]).collect())
            .unwrap_or_default()
    }

    /// Coarse class recorded for an indexed entity (first row wins).
    pub fn entity_coarse(&self, name: &str) -> Option<CoarseType> {
        self.entity_index.get(&normalize_name(name)).map(|e| e.coarse)
    }

    /// Normalized entity names with their coarse class, for gazetteer building.
    pub fn entities(&self) -> impl Iterator<Item = (&str, CoarseType)> {
        self.entity_index.iter().map(|(k, e)| (k.as_str(), e.coarse))
    }

    pub fn is_empty(&self) -> bool {
        self.entity_index.is_empty()
    }

    /// Picks the most general fine type under `coarse`; ties go to the
    /// earliest row. Falls back to the coarse class.
    pub fn resolve_slot_type(&self, name: &str, coarse: CoarseType) -> SlotType {
        self.lookup(name)
            .into_iter()
            .filter(|ft| ft.parent == coarse)
            .min_by_key(|ft| ft.depth)
            .map(|ft| SlotType::Fine(ft.name.clone()))
            .unwrap_or(SlotType::Coarse(coarse))
    }

    /// True when `slot` is a coarse class or a fine type declared here.
    pub fn knows(&self, slot: &SlotType) -> bool {
        match slot {
            SlotType::Coarse(_) => true,
            SlotType::Fine(name) => self.by_name.contains_key(name),
        }
    }
}

pub fn load_type_system(path: impl AsRef<Path>) -> Result<TypeSystem, TypeMapError> {
    TypeSystem::load(path)
}

pub fn resolve_slot_type(name: &str, coarse: CoarseType, ts: &TypeSystem) -> SlotType {
    ts.resolve_slot_type(name, coarse)
}
