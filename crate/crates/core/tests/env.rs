mod common;

use common::*;
use proptest::prelude::*;
use retrobench::env::{DoneReason, EnvOptions, Extractor};
use retrobench::sim::solve_level;
use retrobench::{Button, Buttons, Error};

#[test]
fn idle_agent_times_out_at_4500() {
    let mut env = env_for(flat(60));
    for t in 1..=4500 {
        let r = env.step(Buttons::NONE).unwrap();
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.done, t == 4500, "timestep {t}");
    }
    assert_eq!(env.done_reason(), DoneReason::Timeout);
    assert!(matches!(env.step(Buttons::NONE), Err(Error::Protocol(_))));
}

#[test]
fn falling_into_a_pit_ends_with_life_lost() {
    let mut env = env_for(strip(&format!("{}{}{}", "#".repeat(8), ".".repeat(10), "#".repeat(30))));
    let mut last = None;
    for _ in 0..200 {
        let r = env.step(RIGHT).unwrap();
        if r.done {
            last = Some(r);
            break;
        }
    }
    let r = last.expect("episode ended");
    assert_eq!(r.done_reason, DoneReason::LifeLost);
    assert!(r.frames <= 4);
    assert_eq!(r.info["lives"], 2);
}

#[test]
fn respawn_when_life_loss_does_not_end_the_episode() {
    let level = strip(&format!("{}{}{}", "#".repeat(8), ".".repeat(10), "#".repeat(30)));
    let pkg = package(vec![("pit", level)]);
    let mut scenario = pkg.scenario("default").unwrap().clone();
    scenario.done.life_lost = false;
    let mut pkg = pkg;
    pkg.insert_scenario("forgiving", scenario).unwrap();
    let mut env = pkg.environment("pit", "forgiving", EnvOptions::headless(0)).unwrap();
    let mut outcome = DoneReason::None;
    for _ in 0..4500 {
        let r = env.step(RIGHT).unwrap();
        if r.done {
            outcome = r.done_reason;
            break;
        }
    }
    // Three lives, each lost in the pit.
    assert_eq!(outcome, DoneReason::LifeLost);
    assert_eq!(env.world().lives, 0);
    assert_eq!(env.cumulative_offset(), env.episode_return());
}

#[test]
fn leaving_and_returning_cancels_out() {
    let mut env = env_for(flat(80));
    for _ in 0..10 {
        env.step(RIGHT).unwrap();
    }
    let mut x = env.world().x_px();
    for a in [LEFT, LEFT, LEFT, RIGHT, Buttons::NONE, LEFT] {
        let r = env.step(a).unwrap();
        let nx = env.world().x_px();
        assert_eq!(r.offset_reward > 0.0, nx > x);
        assert_eq!(r.offset_reward < 0.0, nx < x);
        x = nx;
    }
    let level = env.level().clone();
    let start = level.start_x_px();
    let mut env2 = env_for(flat(80));
    let mut total = 0.0;
    for _ in 0..6 {
        total += env2.step(LEFT).unwrap().reward;
    }
    assert!(total < 0.0);
    while env2.world().x_px() < start {
        total += env2.step(RIGHT).unwrap().reward;
    }
    let expected = 9000.0 * (env2.world().x_px() - start) as f64 / (level.end_x_px() - start) as f64;
    assert!((total - expected).abs() < 1e-5);
    assert_eq!(total, env2.cumulative_offset());
}

#[test]
fn two_environments_are_independent() {
    let pkg = package(vec![("flat", flat(60))]);
    let mut a = pkg.environment("flat", "default", EnvOptions::headless(0)).unwrap();
    let b = pkg.environment("flat", "default", EnvOptions::headless(0)).unwrap();
    let before = b.snapshot();
    for _ in 0..20 {
        a.step(RIGHT).unwrap();
    }
    assert_eq!(b.snapshot(), before);
    assert_ne!(a.snapshot(), before);
}

#[test]
fn load_then_reset_is_at_spawn() {
    let level = flat(60);
    let spawn = level.spawn;
    let pkg = package(vec![("flat", level)]);
    let mut env = pkg.environment("flat", "default", EnvOptions::headless(0)).unwrap();
    env.reset().unwrap();
    assert_eq!((env.world().player.x, env.world().player.y), spawn);
    assert_eq!(env.cumulative_offset(), 0.0);
    assert_eq!(env.timestep(), 0);
}

#[test]
fn completion_sums_to_9000_and_pays_the_bonus() {
    let pkg = small_generated(4);
    for id in pkg.level_ids() {
        let level = pkg.level(&id).unwrap();
        let plan = solve_level(level, 4500, 1_000_000).expect("solvable");
        let mut env = pkg.environment(&id, "default", EnvOptions::headless(0)).unwrap();
        let mut offset = 0.0;
        let mut bonus = 0.0;
        for (t, &a) in plan.iter().enumerate() {
            let r = env.step(a).unwrap();
            offset += r.offset_reward;
            bonus += r.bonus;
            assert_eq!(r.done, t + 1 == plan.len(), "{id} at {t}");
        }
        assert_eq!(env.done_reason(), DoneReason::Completed, "{id}");
        assert_eq!(offset, 9000.0, "{id}");
        let t_c = (plan.len() - 1) as f64;
        assert_eq!(bonus, 1000.0 * (1.0 - t_c / 4500.0), "{id}");
    }
}

#[test]
fn snapshot_restore_continues_identically() {
    let pkg = small_generated(9);
    let id = &pkg.level_ids()[0];
    let mut env =
        retrobench::wrappers::StickyEnv::new(pkg.environment(id, "default", EnvOptions::headless(3)).unwrap(), 11);
    let actions: Vec<Buttons> = (0..300)
        .map(|i| match i % 7 {
            0 | 1 => RIGHT.with(Button::B),
            5 => LEFT,
            _ => RIGHT,
        })
        .collect();
    for &a in &actions[..50] {
        if env.env().is_done() {
            break;
        }
        env.step(a).unwrap();
    }
    let snap = env.env().snapshot();
    let fork = env.clone();
    let play = |mut e: retrobench::wrappers::StickyEnv| {
        let mut out = Vec::new();
        for &a in &actions[50..150] {
            if e.env().is_done() {
                break;
            }
            out.push(e.step(a).unwrap());
        }
        (out, e.env().snapshot())
    };
    let (first, end_a) = play(env);
    let mut restored = fork;
    restored.env_mut().restore(&snap).unwrap();
    let (second, end_b) = play(restored);
    assert_eq!(first, second);
    assert_eq!(end_a, end_b);
}

#[test]
fn info_matches_world_fields() {
    let mut env = env_for(flat(300));
    for i in 0..50 {
        let a = if i % 9 == 0 { RIGHT.with(Button::B) } else { RIGHT };
        let r = env.step(a).unwrap();
        let w = env.world();
        for (name, e) in env.data_file().variables() {
            assert_eq!(r.info[name], e.read(w));
        }
        assert_eq!(r.info["x_pixels"], w.x_px() as i64);
        assert_eq!(r.info["frame_counter"], Extractor::FrameCounter.read(w));
        assert_eq!(r.info.len(), 4);
    }
}

#[test]
fn rendering_can_be_switched_off() {
    let mut env = env_for(flat(60));
    assert!(env.step(RIGHT).unwrap().observation.is_none());
    env.set_rendering(true);
    let obs = env.step(RIGHT).unwrap().observation.unwrap();
    assert_eq!((obs.width(), obs.height()), (320, 224));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reward_sign_follows_motion(actions in prop::collection::vec(0u16..6, 1..300)) {
        let table = [Buttons::NONE, RIGHT, LEFT, RIGHT.with(Button::B), LEFT.with(Button::B), Buttons::NONE.with(Button::B)];
        let mut env = env_for(strip(&format!("{}|{}", "#".repeat(20), "#".repeat(40))));
        let mut x = env.world().x_px();
        let mut cumulative = 0.0;
        for a in actions {
            if env.is_done() {
                break;
            }
            let r = env.step(table[a as usize]).unwrap();
            let nx = env.world().x_px();
            prop_assert!(r.reward.is_finite());
            if r.done_reason != DoneReason::Completed {
                prop_assert_eq!(r.offset_reward > 0.0, nx > x);
                prop_assert_eq!(r.offset_reward < 0.0, nx < x);
            }
            cumulative += r.offset_reward;
            prop_assert_eq!(cumulative, env.cumulative_offset());
            x = nx;
        }
    }
}
