use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{chacha, derive_seed};

/// Parameter bundle shared by every act of one zone.
///
/// Acts differ only in their entry of `layout_seeds`; palette and generator
/// rates are common to the whole zone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    pub zone_id: u32,
    pub palette_seed: u64,
    pub terrain_roughness: f64,
    pub gap_rate: f64,
    pub wall_rate: f64,
    pub backtrack_pocket_rate: f64,
    pub act_count: u32,
    pub level_length_px: u32,
    pub layout_seeds: Vec<u64>,
}

impl ZoneParams {
    /// A featureless zone: flat corridor, no gaps, walls or pockets.
    pub fn flat(zone_id: u32, level_length_px: u32, seed: u64) -> Self {
        Self {
            zone_id,
            palette_seed: derive_seed(seed, 0xF1A7),
            terrain_roughness: 0.0,
            gap_rate: 0.0,
            wall_rate: 0.0,
            backtrack_pocket_rate: 0.0,
            act_count: 1,
            level_length_px,
            layout_seeds: vec![derive_seed(seed, 0x1A70)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("terrain_roughness", self.terrain_roughness),
            ("gap_rate", self.gap_rate),
            ("wall_rate", self.wall_rate),
            ("backtrack_pocket_rate", self.backtrack_pocket_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!(
                    "zone {}: {name} = {v} outside [0, 1]",
                    self.zone_id
                )));
            }
        }
        if self.act_count == 0 || self.layout_seeds.len() != self.act_count as usize {
            return Err(Error::config(format!(
                "zone {}: act_count {} with {} layout seeds",
                self.zone_id,
                self.act_count,
                self.layout_seeds.len()
            )));
        }
        if self.level_length_px < 320 {
            return Err(Error::config(format!(
                "zone {}: level_length_px {} shorter than one screen",
                self.zone_id, self.level_length_px
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZoneSetConfig {
    pub master_seed: u64,
    pub zone_count: u32,
    pub acts_range: (u32, u32),
    /// Total number of acts across all zones. `None` lets every zone draw its
    /// act count independently.
    pub level_pool_size: Option<u32>,
    pub roughness_range: (f64, f64),
    pub gap_rate_range: (f64, f64),
    pub wall_rate_range: (f64, f64),
    pub backtrack_pocket_rate: f64,
    pub level_length_range: (u32, u32),
}

impl Default for ZoneSetConfig {
    fn default() -> Self {
        Self {
            master_seed: 7,
            zone_count: 26,
            acts_range: (1, 3),
            level_pool_size: Some(58),
            roughness_range: (0.1, 0.5),
            gap_rate_range: (0.05, 0.3),
            wall_rate_range: (0.1, 0.5),
            backtrack_pocket_rate: 0.3,
            level_length_range: (3200, 6400),
        }
    }
}

impl ZoneSetConfig {
    pub fn new(master_seed: u64, zone_count: u32, acts_range: (u32, u32)) -> Self {
        let defaults = Self::default();
        // The 58-act pool only applies to the default 26-zone layout.
        let level_pool_size = if zone_count == defaults.zone_count {
            defaults.level_pool_size
        } else {
            None
        };
        Self {
            master_seed,
            zone_count,
            acts_range,
            level_pool_size,
            ..defaults
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zone_count == 0 {
            return Err(Error::config("zone_count must be at least 1"));
        }
        let (lo, hi) = self.acts_range;
        if lo < 1 || hi > 3 || lo > hi {
            return Err(Error::config(format!("acts_range ({lo}, {hi}) must lie within [1, 3]")));
        }
        if let Some(pool) = self.level_pool_size {
            let (min, max) = (self.zone_count * lo, self.zone_count * hi);
            if pool < min || pool > max {
                return Err(Error::config(format!(
                    "level pool {pool} unreachable with {} zones of {lo}..={hi} acts",
                    self.zone_count
                )));
            }
        }
        for (name, (a, b)) in [
            ("roughness_range", self.roughness_range),
            ("gap_rate_range", self.gap_rate_range),
            ("wall_rate_range", self.wall_rate_range),
        ] {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
                return Err(Error::config(format!(
                    "{name} ({a}, {b}) must be an ordered sub-range of [0, 1]"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.backtrack_pocket_rate) {
            return Err(Error::config("backtrack_pocket_rate outside [0, 1]"));
        }
        if self.level_length_range.0 < 320 || self.level_length_range.0 > self.level_length_range.1 {
            return Err(Error::config("level_length_range must be ordered and at least 320 px"));
        }
        Ok(())
    }
}

fn sample_range<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws a deterministic set of zones from `cfg.master_seed`.
///
/// Act allocation: every zone first draws a count uniformly from
/// `acts_range`; if a pool size is configured, randomly chosen zones are then
/// incremented or decremented (within range) until the total matches.
pub fn generate_zone_set(cfg: &ZoneSetConfig) -> Result<Vec<ZoneParams>> {
    cfg.validate()?;
    let mut rng = chacha(derive_seed(cfg.master_seed, 0x2013E));
    let (lo, hi) = cfg.acts_range;

    let mut acts: Vec<u32> = (0..cfg.zone_count).map(|_| rng.gen_range(lo..=hi)).collect();
    if let Some(pool) = cfg.level_pool_size {
        let mut total: u32 = acts.iter().sum();
        while total != pool {
            let candidates: Vec<usize> = (0..acts.len())
                .filter(|&i| if total > pool { acts[i] > lo } else { acts[i] < hi })
                .collect();
            let &i = candidates
                .choose(&mut rng)
                .expect("pool size validated against zone count");
            if total > pool {
                acts[i] -= 1;
                total -= 1;
            } else {
                acts[i] += 1;
                total += 1;
            }
        }
    }

    let mut palettes = HashSet::new();
    let mut zones = Vec::with_capacity(acts.len());
    for (zone_id, &act_count) in acts.iter().enumerate() {
        let mut palette_seed = rng.gen::<u64>();
        while !palettes.insert(palette_seed) {
            palette_seed = rng.gen();
        }
        let length = rng.gen_range(cfg.level_length_range.0..=cfg.level_length_range.1);
        zones.push(ZoneParams {
            zone_id: zone_id as u32,
            palette_seed,
            terrain_roughness: sample_range(&mut rng, cfg.roughness_range),
            gap_rate: sample_range(&mut rng, cfg.gap_rate_range),
            wall_rate: sample_range(&mut rng, cfg.wall_rate_range),
            backtrack_pocket_rate: cfg.backtrack_pocket_rate,
            act_count,
            // Whole tiles keep the completion offset on a tile boundary.
            level_length_px: length / 16 * 16,
            layout_seeds: (0..act_count).map(|_| rng.gen()).collect(),
        });
    }
    Ok(zones)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pool_has_58_acts_over_26_zones() {
        let zones = generate_zone_set(&ZoneSetConfig::new(7, 26, (1, 3))).unwrap();
        assert_eq!(zones.len(), 26);
        let total: u32 = zones.iter().map(|z| z.act_count).sum();
        assert_eq!(total, 58);
        assert!(zones.iter().all(|z| (1..=3).contains(&z.act_count)));
        assert!(zones.iter().all(|z| z.validate().is_ok()));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_zone_set(&ZoneSetConfig::new(7, 26, (1, 3))).unwrap();
        let b = generate_zone_set(&ZoneSetConfig::new(7, 26, (1, 3))).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        let c = generate_zone_set(&ZoneSetConfig::new(8, 26, (1, 3))).unwrap();
        let seeds_a: Vec<_> = a.iter().flat_map(|z| z.layout_seeds.clone()).collect();
        let seeds_c: Vec<_> = c.iter().flat_map(|z| z.layout_seeds.clone()).collect();
        assert_ne!(seeds_a, seeds_c);
    }

    #[test]
    fn palettes_are_distinct() {
        let zones = generate_zone_set(&ZoneSetConfig::new(99, 26, (1, 3))).unwrap();
        let set: HashSet<_> = zones.iter().map(|z| z.palette_seed).collect();
        assert_eq!(set.len(), zones.len());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            generate_zone_set(&ZoneSetConfig::new(7, 0, (1, 3))),
            Err(Error::InvalidConfig(_))
        ));
        assert!(generate_zone_set(&ZoneSetConfig::new(7, 4, (1, 4))).is_err());
        let mut cfg = ZoneSetConfig::new(7, 4, (1, 3));
        cfg.level_pool_size = Some(58);
        assert!(generate_zone_set(&cfg).is_err(), "pool 58 > 12");
        assert!(generate_zone_set(&ZoneSetConfig::new(7, 4, (1, 3))).is_ok());
    }
}
