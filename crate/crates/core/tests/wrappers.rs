mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use retrobench::env::DoneReason;
use retrobench::rng::chacha;
use retrobench::wrappers::{DiscreteActionMap, MaxX, StickyEnv, StickySkip};
use retrobench::{Button, Buttons};

const A1: Buttons = RIGHT;
const A2: Buttons = Buttons::NONE.with(Button::Left).with(Button::B);

/// Seed whose first two draws are (not delayed, delayed).
fn seed_with_pattern(first: bool, second: bool) -> u64 {
    (0..1000)
        .find(|&s| {
            let mut k = StickySkip::new(s);
            k.schedule(Buttons::NONE).1 == first && k.schedule(Buttons::NONE).1 == second
        })
        .expect("pattern within 1000 seeds")
}

#[test]
fn delayed_step_applies_the_previous_action_for_one_frame() {
    let seed = seed_with_pattern(false, true);
    let mut k = StickySkip::new(seed);
    let (s1, d1) = k.schedule(A1);
    let (s2, d2) = k.schedule(A2);
    assert!(!d1 && d2);
    let frames: Vec<Buttons> = s1.iter().chain(s2.iter()).copied().collect();
    assert_eq!(frames, [A1, A1, A1, A1, A1, A2, A2, A2]);
}

#[test]
fn delayed_first_step_applies_noop() {
    let seed = seed_with_pattern(true, false);
    let mut env = sticky(flat(100), seed);
    let step = env.step(A1).unwrap();
    assert!(step.delayed);
    assert_eq!(step.schedule, [Buttons::NONE, A1, A1, A1]);
    let step = env.step(A2).unwrap();
    assert_eq!(step.schedule, [A2; 4]);
}

#[test]
fn held_action_resets_between_episodes() {
    let mut k = StickySkip::with_probability(3, 1.0).unwrap();
    k.schedule(A1);
    k.reset_episode();
    assert_eq!(k.schedule(A2).0, [Buttons::NONE, A2, A2, A2]);
}

#[test]
fn delay_rate_is_a_quarter() {
    let mut k = StickySkip::new(2024);
    let n = 100_000;
    let delayed = (0..n).filter(|_| k.schedule(RIGHT).1).count();
    let rate = delayed as f64 / n as f64;
    assert!((0.24..=0.26).contains(&rate), "{rate}");
}

#[test]
fn sticky_env_and_frame_schedule_agree() {
    let mut rng = chacha(1);
    let map = DiscreteActionMap::eight_essential();
    let mut a = sticky(flat(200), 77);
    let mut b = env_for(flat(200));
    let mut k = StickySkip::new(77);
    for _ in 0..500 {
        if a.env().is_done() {
            break;
        }
        let act = map.combos()[rng.gen_range(0..map.len())];
        let ra = a.step(act).unwrap();
        let rb = b.step_frames(k.schedule(act).0).unwrap();
        assert_eq!(ra.result, rb);
    }
}

#[test]
fn stepping_a_finished_episode_does_not_consume_a_draw() {
    let mut a = sticky(flat(30), 5);
    while !a.step(RIGHT).unwrap().result.done {}
    assert!(a.step(RIGHT).is_err());
    let snapshot = a.skip().unwrap().clone();
    assert!(a.step(RIGHT).is_err());
    let mut x = a.skip().unwrap().clone();
    let mut y = snapshot;
    assert_eq!(x.schedule(LEFT), y.schedule(LEFT));
}

#[test]
fn action_maps() {
    let eight = DiscreteActionMap::eight_essential();
    let seven = DiscreteActionMap::seven_dqn();
    assert_eq!(eight.len(), 8);
    assert_eq!(seven.combos(), &eight.combos()[1..]);
    assert!(eight.buttons(8).is_err());
    assert_eq!(eight.combos()[0], Buttons::NONE);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn max_x_rewards_sum_to_the_running_maximum(seed in any::<u64>(), len in 1usize..600) {
        let map = DiscreteActionMap::eight_essential();
        let mut rng = chacha(seed);
        let mut env = sticky(strip(&format!("{}{}{}", "#".repeat(30), ".".repeat(3), "#".repeat(60))), seed);
        let mut maxx = MaxX::new();
        let mut sum = 0.0;
        let mut best: f64 = 0.0;
        for _ in 0..len {
            if env.env().is_done() {
                break;
            }
            let r = env.step(map.combos()[rng.gen_range(0..map.len())]).unwrap().result;
            let gain = maxx.transform(r.cumulative_offset);
            prop_assert!(gain >= 0.0);
            sum += gain;
            best = best.max(r.cumulative_offset);
        }
        prop_assert!((sum - best).abs() < 1e-9);
        prop_assert_eq!(maxx.max_cumulative(), best);
    }

    #[test]
    fn sticky_streams_are_reproducible(seed in any::<u64>()) {
        let run = || {
            let mut env: StickyEnv = sticky(flat(120), seed);
            let mut out = Vec::new();
            for i in 0..200 {
                if env.env().is_done() {
                    break;
                }
                let a = if i % 3 == 0 { RIGHT.with(Button::B) } else { RIGHT };
                out.push(env.step(a).unwrap());
            }
            (out, env.env().done_reason())
        };
        let (a, ra) = run();
        let (b, rb) = run();
        prop_assert_eq!(a, b);
        prop_assert!(ra == rb && ra != DoneReason::LifeLost);
    }
}
