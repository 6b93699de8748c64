mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use retrobench::sim::*;
use retrobench::{Button, Buttons};

#[test]
fn default_zone_set_has_58_acts() {
    let zones = generate_zone_set(&ZoneSetConfig::default()).unwrap();
    assert_eq!(zones.len(), 26);
    let mut total = 0;
    for z in &zones {
        assert!((1..=3).contains(&z.act_count));
        assert_eq!(z.layout_seeds.len(), z.act_count as usize);
        total += z.act_count;
    }
    assert_eq!(total, 58);
    let mut palettes: Vec<u64> = zones.iter().map(|z| z.palette_seed).collect();
    palettes.sort_unstable();
    palettes.dedup();
    assert_eq!(palettes.len(), 26);
}

#[test]
fn zone_sets_depend_only_on_the_seed() {
    let a = generate_zone_set(&ZoneSetConfig::default()).unwrap();
    let b = generate_zone_set(&ZoneSetConfig::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = generate_zone_set(&ZoneSetConfig {
        master_seed: 8,
        ..ZoneSetConfig::default()
    })
    .unwrap();
    let seeds = |zs: &[ZoneParams]| zs.iter().flat_map(|z| z.layout_seeds.clone()).collect::<Vec<_>>();
    assert_ne!(seeds(&a), seeds(&c));
}

#[test]
fn zero_zones_is_a_config_error() {
    let cfg = ZoneSetConfig {
        zone_count: 0,
        ..ZoneSetConfig::default()
    };
    assert!(matches!(
        generate_zone_set(&cfg),
        Err(retrobench::Error::InvalidConfig(_))
    ));
}

#[test]
fn generated_levels_are_reachable_and_deterministic() {
    let pkg = small_generated(40);
    let zones = &pkg.manifest.zones;
    for z in zones {
        for act in 0..z.act_count {
            let level = generate_level(z, act).unwrap();
            assert_eq!(level, generate_level(z, act).unwrap());
            assert!(coarse_reachable(&level), "zone {} act {act}", z.zone_id);
            assert!(level.end_x_px() > level.start_x_px());
        }
    }
}

#[test]
fn flat_zone_is_a_corridor_the_right_runner_finishes() {
    let zone = ZoneParams::flat(0, 2000, 3);
    let level = Arc::new(generate_level(&zone, 0).unwrap());
    assert!(!level.has_pocket);
    let out = run_right_runner(&level, 4500);
    assert!(out.reached_end && !out.life_lost);
}

#[test]
fn acts_of_a_zone_share_a_palette() {
    let pkg = small_generated(41);
    for z in pkg.manifest.zones.iter().filter(|z| z.act_count > 1) {
        let a = generate_level(z, 0).unwrap();
        let b = generate_level(z, 1).unwrap();
        assert_eq!(a.palette_seed, b.palette_seed);
        assert_eq!(Palette::from_seed(a.palette_seed), Palette::from_seed(b.palette_seed));
        assert_ne!(a.tiles, b.tiles);
    }
}

fn world() -> WorldState {
    WorldState::at_spawn(Arc::new(flat(200)), 0)
}

#[test]
fn idle_grounded_player_is_a_fixed_point() {
    let s = world();
    assert!(s.player.grounded);
    let next = physics_step(&s, Buttons::NONE);
    assert_eq!(next.player, s.player);
    assert_eq!(next.frame_counter, s.frame_counter + 1);
}

#[test]
fn holding_right_moves_right_every_frame_after_the_first() {
    let mut s = world();
    let mut xs = vec![s.player.x];
    for _ in 0..60 {
        s = physics_step(&s, RIGHT);
        xs.push(s.player.x);
    }
    assert!(xs[1..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn no_double_jump() {
    let mut s = world();
    s = physics_step(&s, Buttons::NONE.with(Button::B));
    assert!(!s.player.grounded);
    for _ in 0..5 {
        let with = physics_step(&s, Buttons::NONE.with(Button::B));
        let without = physics_step(&s, Buttons::NONE);
        assert_eq!(with.player.vy, without.player.vy);
        s = with;
    }
}

#[test]
fn renders_are_deterministic_and_follow_the_player() {
    let s = world();
    let a = render(&s);
    assert_eq!(a, render(&s));
    assert_eq!((a.width(), a.height()), (OBS_WIDTH, OBS_HEIGHT));
    assert_eq!(a.pixels().len(), 320 * 224 * 3);
    let mut t = s.clone();
    t.player.x = s.player.x + retrobench::Fixed::from_px(320);
    assert_ne!(render(&t), a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blobs_round_trip_and_replay_bitwise(masks in prop::collection::vec(0u16..(1 << 12), 1..200), split in 0usize..200) {
        let level = Arc::new(strip(&format!("{}{}{}|{}", "#".repeat(15), ".".repeat(4), "#".repeat(10), "#".repeat(30))));
        let buttons: Vec<Buttons> = masks.iter().map(|&m| Buttons::from_mask(m).unwrap()).collect();
        let split = split.min(buttons.len());
        let mut s = WorldState::at_spawn(level.clone(), 9);
        for b in &buttons[..split] {
            s = physics_step(&s, *b);
        }
        let blob = s.to_bytes();
        let restored = WorldState::from_bytes(&blob, level.clone()).unwrap();
        prop_assert_eq!(&restored, &s);
        prop_assert_eq!(restored.to_bytes(), blob);
        let (mut a, mut b) = (s, restored);
        for x in &buttons[split..] {
            a = physics_step(&a, *x);
            b = physics_step(&b, *x);
            prop_assert_eq!(a.to_bytes(), b.to_bytes());
        }
    }

    #[test]
    fn solver_plans_finish_levels(seed in 0u64..1000) {
        let zones = ZoneSetConfig {
            level_length_range: (1600, 2400),
            ..ZoneSetConfig::new(seed, 1, (1, 1))
        };
        let zone = &generate_zone_set(&zones).unwrap()[0];
        let level = Arc::new(generate_level(zone, 0).unwrap());
        let plan = solve_level(&level, 4500, 1_000_000).expect("solvable");
        let mut s = WorldState::at_spawn(level.clone(), 0);
        for b in &plan {
            for _ in 0..4 {
                s = physics_step(&s, *b);
                prop_assert!(!s.life_lost);
            }
        }
        prop_assert!(s.x_px() >= level.end_x_px());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pockets_fit_in_short_levels(seed in any::<u64>()) {
        let zones = ZoneSetConfig {
            backtrack_pocket_rate: 1.0,
            level_length_range: (1600, 2400),
            ..ZoneSetConfig::new(seed, 1, (1, 1))
        };
        let zone = &generate_zone_set(&zones).unwrap()[0];
        let level = Arc::new(generate_level(zone, 0).unwrap());
        prop_assert!(level.has_pocket);
        prop_assert!(!run_right_runner(&level, 4500).reached_end);
        prop_assert!(solve_level(&level, 4500, 1_000_000).is_some());
    }
}
