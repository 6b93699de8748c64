use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::datafile::DataFile;
use super::environment::{EnvOptions, Environment};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::rng::chacha;
use crate::sim::{generate_level, generate_zone_set, LevelSpec, ZoneParams, ZoneSetConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;
pub const DEFAULT_SCENARIO: &str = "default";
/// Number of zones contributing a test act in the default split.
pub const DEFAULT_TEST_ZONES: usize = 11;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaveStateEntry {
    pub id: String,
    pub zone_id: u32,
    pub act_id: u32,
    pub level_file: String,
    /// Hex fingerprint of the level layout, checked on load.
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub name: String,
    pub master_seed: u64,
    pub zones: Vec<ZoneParams>,
    pub save_states: Vec<SaveStateEntry>,
    /// Scenario id to file name.
    pub scenarios: BTreeMap<String, String>,
    pub data_file: String,
}

/// Levels, scenarios and the data file making up one benchmark game.
#[derive(Clone, Debug)]
pub struct GamePackage {
    pub manifest: Manifest,
    levels: BTreeMap<String, Arc<LevelSpec>>,
    scenarios: BTreeMap<String, Scenario>,
    data: DataFile,
}

pub fn save_state_id(zone_id: u32, act_index: u32) -> String {
    format!("Zone{zone_id:02}.Act{}", act_index + 1)
}

fn hex(v: u64) -> String {
    format!("{v:016x}")
}

impl GamePackage {
    /// Generates every act of every zone drawn from `cfg`, with the default
    /// scenario and data file.
    pub fn generate(name: &str, cfg: &ZoneSetConfig) -> Result<Self> {
        let zones = generate_zone_set(cfg)?;
        Self::from_zones(name, cfg.master_seed, zones)
    }

    pub fn from_zones(name: &str, master_seed: u64, zones: Vec<ZoneParams>) -> Result<Self> {
        let jobs: Vec<(usize, u32)> = zones
            .iter()
            .enumerate()
            .flat_map(|(z, zone)| (0..zone.act_count).map(move |a| (z, a)))
            .collect();
        let levels: Vec<LevelSpec> = jobs
            .par_iter()
            .map(|&(z, a)| generate_level(&zones[z], a))
            .collect::<Result<_>>()?;

        let mut entries = Vec::with_capacity(levels.len());
        let mut by_id = BTreeMap::new();
        for level in levels {
            let id = save_state_id(level.zone_id, level.act_id);
            entries.push(SaveStateEntry {
                level_file: format!("levels/{id}.json"),
                zone_id: level.zone_id,
                act_id: level.act_id,
                fingerprint: hex(level.fingerprint()),
                id: id.clone(),
            });
            by_id.insert(id, Arc::new(level));
        }
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            name: name.to_string(),
            master_seed,
            zones,
            save_states: entries,
            scenarios: BTreeMap::from([(DEFAULT_SCENARIO.to_string(), "scenario.txt".to_string())]),
            data_file: "data.txt".to_string(),
        };
        Ok(Self {
            manifest,
            levels: by_id,
            scenarios: BTreeMap::from([(DEFAULT_SCENARIO.to_string(), Scenario::default())]),
            data: DataFile::default(),
        })
    }

    /// Builds a package from explicit levels, mainly for tests and tools.
    pub fn from_levels(name: &str, levels: Vec<(String, LevelSpec)>, scenario: Scenario) -> Result<Self> {
        let data = DataFile::default();
        scenario.validate(&data)?;
        let mut entries = Vec::new();
        let mut by_id = BTreeMap::new();
        for (id, level) in levels {
            if by_id.contains_key(&id) {
                return Err(Error::config(format!("duplicate save state id {id}")));
            }
            entries.push(SaveStateEntry {
                level_file: format!("levels/{id}.json"),
                zone_id: level.zone_id,
                act_id: level.act_id,
                fingerprint: hex(level.fingerprint()),
                id: id.clone(),
            });
            by_id.insert(id, Arc::new(level));
        }
        Ok(Self {
            manifest: Manifest {
                version: MANIFEST_VERSION,
                name: name.to_string(),
                master_seed: 0,
                zones: Vec::new(),
                save_states: entries,
                scenarios: BTreeMap::from([(DEFAULT_SCENARIO.to_string(), "scenario.txt".to_string())]),
                data_file: "data.txt".to_string(),
            },
            levels: by_id,
            scenarios: BTreeMap::from([(DEFAULT_SCENARIO.to_string(), scenario)]),
            data,
        })
    }

    pub fn name(&self) -> &str {
        &self.manifest.name
    }

    pub fn data_file(&self) -> &DataFile {
        &self.data
    }

    /// Save-state ids in manifest order.
    pub fn level_ids(&self) -> Vec<String> {
        self.manifest.save_states.iter().map(|s| s.id.clone()).collect()
    }

    pub fn level(&self, id: &str) -> Result<&Arc<LevelSpec>> {
        self.levels.get(id).ok_or_else(|| Error::NotFound {
            kind: "save state",
            id: id.to_string(),
        })
    }

    pub fn scenario(&self, id: &str) -> Result<&Scenario> {
        self.scenarios.get(id).ok_or_else(|| Error::NotFound {
            kind: "scenario",
            id: id.to_string(),
        })
    }

    pub fn scenario_ids(&self) -> impl Iterator<Item = &str> {
        self.scenarios.keys().map(String::as_str)
    }

    /// Adds or replaces a scenario.
    pub fn insert_scenario(&mut self, id: &str, scenario: Scenario) -> Result<()> {
        scenario.validate(&self.data)?;
        self.manifest
            .scenarios
            .insert(id.to_string(), format!("scenario-{id}.txt"));
        self.scenarios.insert(id.to_string(), scenario);
        Ok(())
    }

    /// A fresh environment positioned at the save state.
    pub fn environment(&self, save_state_id: &str, scenario_id: &str, options: EnvOptions) -> Result<Environment> {
        let level = self.level(save_state_id)?.clone();
        let scenario = self.scenario(scenario_id)?.clone();
        Environment::new(save_state_id, level, scenario, self.data.clone(), options)
    }

    /// Writes the manifest, level files, scenarios and data file into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let levels_dir = dir.join("levels");
        fs::create_dir_all(&levels_dir).map_err(|e| Error::io(&levels_dir, e))?;
        let write = |rel: &str, text: &str| {
            let path = dir.join(rel);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        for entry in &self.manifest.save_states {
            write(&entry.level_file, &self.levels[&entry.id].to_json()?)?;
        }
        for (id, file) in &self.manifest.scenarios {
            write(file, &self.scenarios[id].to_text())?;
        }
        write(&self.manifest.data_file, &self.data.to_text())?;
        write(MANIFEST_FILE, &serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |rel: &str| {
            let path = dir.join(rel);
            fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
        };
        let manifest: Manifest = serde_json::from_str(&read(MANIFEST_FILE)?)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "package manifest",
                found: manifest.version.min(u16::MAX as u32) as u16,
                expected: MANIFEST_VERSION as u16,
            });
        }
        let data = DataFile::parse(&read(&manifest.data_file)?)?;
        let mut scenarios = BTreeMap::new();
        for (id, file) in &manifest.scenarios {
            scenarios.insert(id.clone(), Scenario::parse_with(&read(file)?, &data)?);
        }
        let mut levels = BTreeMap::new();
        for entry in &manifest.save_states {
            let level = LevelSpec::from_json(&read(&entry.level_file)?)?;
            if hex(level.fingerprint()) != entry.fingerprint {
                return Err(Error::Corrupt(format!(
                    "{}: level fingerprint {} does not match manifest {}",
                    entry.id,
                    hex(level.fingerprint()),
                    entry.fingerprint
                )));
            }
            if levels.insert(entry.id.clone(), Arc::new(level)).is_some() {
                return Err(Error::Corrupt(format!("duplicate save state id {}", entry.id)));
            }
        }
        Ok(Self {
            manifest,
            levels,
            scenarios,
            data,
        })
    }
}

/// A train/test partition of a package's save states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Picks `test_zones` zones with more than one act and holds out one random
/// act from each. If fewer multi-act zones exist, all of them are used.
pub fn split_levels(pkg: &GamePackage, seed: u64, test_zones: usize) -> Result<Split> {
    let mut acts_by_zone: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for entry in &pkg.manifest.save_states {
        acts_by_zone.entry(entry.zone_id).or_default().push(entry.id.clone());
    }
    let mut multi: Vec<u32> = acts_by_zone
        .iter()
        .filter(|(_, acts)| acts.len() > 1)
        .map(|(&z, _)| z)
        .collect();
    if multi.is_empty() {
        return Err(Error::config("split needs at least one zone with two or more acts"));
    }
    let mut rng = chacha(seed);
    multi.shuffle(&mut rng);
    multi.truncate(test_zones.max(1));
    multi.sort_unstable();

    let mut held_out = BTreeSet::new();
    for zone in &multi {
        let acts = &acts_by_zone[zone];
        held_out.insert(acts[rng.gen_range(0..acts.len())].clone());
    }
    let (test, train) = pkg
        .manifest
        .save_states
        .iter()
        .map(|e| e.id.clone())
        .partition(|id| held_out.contains(id));
    Ok(Split { seed, train, test })
}
