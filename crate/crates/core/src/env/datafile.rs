use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ini;
use crate::error::{Error, Result};
use crate::sim::WorldState;

/// Built-in state extractors a data file can bind names to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extractor {
    XPixels,
    YPixels,
    Lives,
    FrameCounter,
}

impl Extractor {
    pub const ALL: [Extractor; 4] = [
        Extractor::XPixels,
        Extractor::YPixels,
        Extractor::Lives,
        Extractor::FrameCounter,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Extractor::XPixels => "x_pixels",
            Extractor::YPixels => "y_pixels",
            Extractor::Lives => "lives",
            Extractor::FrameCounter => "frame_counter",
        }
    }

    pub fn from_id(id: &str) -> Option<Extractor> {
        Extractor::ALL.into_iter().find(|e| e.id() == id)
    }

    pub fn read(self, world: &WorldState) -> i64 {
        match self {
            Extractor::XPixels => world.x_px() as i64,
            Extractor::YPixels => world.y_px() as i64,
            Extractor::Lives => world.lives as i64,
            Extractor::FrameCounter => world.frame_counter as i64,
        }
    }
}

/// Maps variable names to extractors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataFile {
    variables: BTreeMap<String, Extractor>,
}

impl Default for DataFile {
    /// Every built-in extractor under its own name.
    fn default() -> Self {
        Self {
            variables: Extractor::ALL.into_iter().map(|e| (e.id().to_string(), e)).collect(),
        }
    }
}

impl DataFile {
    pub fn new(variables: BTreeMap<String, Extractor>) -> Self {
        Self { variables }
    }

    pub fn get(&self, name: &str) -> Option<Extractor> {
        self.variables.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.variables.contains_key(name)
    }

    pub fn variables(&self) -> impl Iterator<Item = (&str, Extractor)> {
        self.variables.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn extract_all(&self, world: &WorldState) -> BTreeMap<String, i64> {
        self.variables
            .iter()
            .map(|(name, e)| (name.clone(), e.read(world)))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut variables = BTreeMap::new();
        for section in ini::parse(text)? {
            if section.name != "variables" {
                return Err(Error::Syntax {
                    line: section.line,
                    column: 2,
                    message: format!("unknown section [{}]", section.name),
                });
            }
            for entry in &section.entries {
                let id = entry.parse_ident()?;
                let extractor =
                    Extractor::from_id(&id).ok_or_else(|| entry.error(format!("unsupported extractor {id:?}")))?;
                variables.insert(entry.key.clone(), extractor);
            }
        }
        Ok(Self { variables })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[variables]\n");
        for (name, e) in &self.variables {
            let _ = writeln!(out, "{name} = {}", e.id());
        }
        out
    }
}
