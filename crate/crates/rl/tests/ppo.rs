mod common;

use common::{disruption, neutral_policy, random_policy, small_net};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttr_neural::{GradTape, Params, PolicyGrads, PolicyParams, Tensor};
use ttr_rl::ppo::{
    accumulate, binary_cross_entropy, binary_entropy, clipped_term, discounted_returns, LossWeights, Targets, PROB_FLOOR,
};
use ttr_rl::{rollout, RolloutConfig, Step};

const ONLY_POLICY: LossWeights = LossWeights { policy: 1.0, value: 0.0, entropy: 0.0, distill: 0.0 };

fn steps_from(seed: u64, params: &PolicyParams) -> Vec<Step> {
    for s in seed..seed + 200 {
        let inst = disruption(5, 6, s);
        let (_, traj) = rollout(&inst, params, &RolloutConfig::sampling(), &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        if traj.steps.len() >= 3 {
            return traj.steps;
        }
    }
    panic!("no rollout with decisions");
}

#[test]
fn clip_arithmetic() {
    assert_eq!(clipped_term(1.0, 1.0, 0.2), -1.0);
    assert!((clipped_term(2.0, 1.0, 0.2) - -1.2).abs() < 1e-12);
    assert!((clipped_term(0.5, -1.0, 0.2) - 0.8).abs() < 1e-12);
    assert_eq!(clipped_term(0.5, 1.0, 0.2), -0.5);
}

#[test]
fn entropy_and_cross_entropy_values() {
    assert!((binary_entropy(0.5) - 2f64.ln()).abs() < 1e-12);
    assert!(binary_entropy(1.0) < 1e-5);
    for q in [0.1, 0.5, 0.93] {
        assert!((binary_cross_entropy(q, q) - binary_entropy(q)).abs() < 1e-12);
        assert!(binary_cross_entropy(q, 0.3) >= binary_entropy(q));
    }
    assert!((binary_cross_entropy(1.0, 0.0) - -PROB_FLOOR.ln()).abs() < 1e-9);
}

#[test]
fn discounted_returns_example() {
    let g = discounted_returns(&[1.0, 0.0, 2.0], 0.5);
    assert_eq!(g, vec![1.5, 1.0, 2.0]);
}

#[test]
fn neutral_policy_entropy_is_ln_two_per_step() {
    let mut p = neutral_policy(small_net());
    let steps = steps_from(0, &p);
    let targets = Targets::new(&steps, 0.9, None);
    let mut tape = PolicyGrads::zeros(&p.cfg);
    let w = LossWeights { policy: 0.0, value: 0.0, entropy: 1.0, distill: 0.0 };
    let l = accumulate(&mut p, &steps, &targets, &w, 0.2, None, &mut tape).unwrap();
    assert!((l.entropy + steps.len() as f64 * 2f64.ln()).abs() < 1e-5);
}

#[test]
fn first_epoch_ratio_is_one() {
    let mut p = random_policy(5, small_net());
    let steps = steps_from(10, &p);
    let targets = Targets::new(&steps, 0.9, None);
    let mut tape = PolicyGrads::zeros(&p.cfg);
    let l = accumulate(&mut p, &steps, &targets, &ONLY_POLICY, 0.2, None, &mut tape).unwrap();
    let expected: f64 = -targets.advantages.iter().sum::<f64>();
    let scale: f64 = targets.advantages.iter().map(|a| a.abs()).sum();
    assert!((l.policy - expected).abs() <= 1e-6 * scale, "{} vs {}", l.policy, expected);
}

#[test]
fn distilling_from_itself_costs_the_entropy() {
    let mut p = random_policy(6, small_net());
    let steps = steps_from(20, &p);
    let teacher = ttr_rl::ppo::Teacher { params: &p.clone() }.swap_probs(&steps).unwrap();
    let targets = Targets::new(&steps, 0.9, Some(teacher.clone()));
    let mut tape = PolicyGrads::zeros(&p.cfg);
    let w = LossWeights { policy: 0.0, value: 0.0, entropy: 1.0, distill: 1.0 };
    // the student is evaluated with batch statistics, the teacher with running ones
    p.running_mean.iter_mut().for_each(|x| *x = 0.0);
    let l = accumulate(&mut p, &steps, &targets, &w, 0.2, None, &mut tape).unwrap();
    let student: Vec<f64> = steps.iter().map(|s| f64::from(s.prob)).collect();
    let ce: f64 = teacher.iter().zip(&steps).zip(&student).map(|((q, s), &pi)| {
        let ps = if s.swap { pi } else { 1.0 - pi };
        binary_cross_entropy(*q, ps)
    }).sum();
    assert!((l.distill - ce).abs() < 1e-4, "{} vs {}", l.distill, ce);
    assert!(l.distill + 1e-6 >= -l.entropy);
}

/// Weighted total of every loss at `params`, without touching running statistics.
fn total(params: &Params<f64>, steps: &[Step], targets: &Targets, w: &LossWeights) -> f64 {
    let mut p = params.clone();
    let mut tape = GradTape::zeros(&p.cfg);
    accumulate(&mut p, steps, targets, w, 0.2, None, &mut tape).unwrap().total
}

fn check_against_differences(w: LossWeights, seed: u64, with_teacher: bool) {
    let net = small_net();
    let policy = random_policy(seed, net);
    let steps = steps_from(seed * 10, &policy);
    let teacher = with_teacher.then(|| {
        let t = random_policy(seed + 1000, net);
        ttr_rl::ppo::Teacher { params: &t }.swap_probs(&steps).unwrap()
    });
    let targets = Targets::new(&steps, 0.9, teacher);
    let params: Params<f64> = policy.cast();
    let mut p = params.clone();
    let mut tape = GradTape::zeros(&net);
    accumulate(&mut p, &steps, &targets, &w, 0.2, None, &mut tape).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut probes = Vec::new();
    for t in Tensor::ALL {
        let len = params.get(t).len();
        for idx in rand::seq::index::sample(&mut rng, len, len.min(8)).iter() {
            let mut up = params.clone();
            up.get_mut(t)[idx] += h;
            let mut down = params.clone();
            down.get_mut(t)[idx] -= h;
            let numeric = (total(&up, &steps, &targets, &w) - total(&down, &steps, &targets, &w)) / (2.0 * h);
            probes.push((t, idx, tape.get(t)[idx], numeric));
        }
    }
    let floor = 1e-5 * probes.iter().map(|p| p.3.abs()).fold(0.0, f64::max);
    for &(t, idx, analytic, numeric) in &probes {
        let scale = analytic.abs().max(numeric.abs()).max(floor);
        assert!((analytic - numeric).abs() / scale < 1e-4, "{t:?}[{idx}]: {analytic} vs {numeric}");
    }
    let checked = probes.len();
    assert!(checked > 40);
}

#[test]
fn distillation_gradient_matches_differences() {
    check_against_differences(LossWeights { policy: 0.0, value: 0.0, entropy: 0.0, distill: 1.0 }, 1, true);
}

#[test]
fn combined_gradient_matches_differences() {
    check_against_differences(LossWeights { policy: 2.0, value: 2.0, entropy: 0.1, distill: 1.0 }, 2, true);
}

#[test]
fn value_gradient_matches_differences() {
    check_against_differences(LossWeights { policy: 0.0, value: 1.0, entropy: 0.0, distill: 0.0 }, 3, false);
}
