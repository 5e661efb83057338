//! Clipped policy-gradient, value, entropy and distillation losses with
//! their gradients.

use ttr_neural::{Evaluation, GradTape, Mode, NetError, Params, PolicyParams, Real};

use crate::rollout::Step;

/// Lower bound on probabilities inside logarithms.
pub const PROB_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub distill: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Losses {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub distill: f64,
    pub total: f64,
}

/// Discounted return from every step onward.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

/// Clipped surrogate term `-min(E A, clip(E, 1-eps, 1+eps) A)`.
pub fn clipped_term(ratio: f64, advantage: f64, clip: f64) -> f64 {
    -(ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

/// Whether the unclipped branch of [`clipped_term`] is the active one.
fn ratio_is_live(ratio: f64, advantage: f64, clip: f64) -> bool {
    ratio * advantage <= ratio.clamp(1.0 - clip, 1.0 + clip) * advantage
}

fn floored(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// Entropy of a two-way choice with probability `p`.
pub fn binary_entropy(p: f64) -> f64 {
    let (a, b) = (floored(p), floored(1.0 - p));
    -(a * a.ln() + b * b.ln())
}

/// Cross-entropy of the student swap probability under the teacher's.
pub fn binary_cross_entropy(teacher: f64, student: f64) -> f64 {
    -(teacher * floored(student).ln() + (1.0 - teacher) * floored(1.0 - student).ln())
}

/// Teacher inputs for the distillation term, one swap probability per step.
pub struct Teacher<'a> {
    pub params: &'a PolicyParams,
}

impl Teacher<'_> {
    pub fn swap_probs(&self, steps: &[Step]) -> Result<Vec<f64>, NetError> {
        steps
            .iter()
            .map(|s| {
                let e = Evaluation::run(self.params, &s.state.graph, s.state.first, s.state.second, Mode::Eval)?;
                Ok(f64::from(e.prob()))
            })
            .collect()
    }
}

/// Per-step targets fixed at collection time.
#[derive(Debug, Clone)]
pub struct Targets {
    pub returns: Vec<f64>,
    pub advantages: Vec<f64>,
    pub teacher: Option<Vec<f64>>,
}

impl Targets {
    pub fn new(steps: &[Step], gamma: f64, teacher: Option<Vec<f64>>) -> Self {
        let rewards: Vec<f64> = steps.iter().map(|s| s.reward).collect();
        let returns = discounted_returns(&rewards, gamma);
        let advantages = returns.iter().zip(steps).map(|(g, s)| g - f64::from(s.state.value)).collect();
        Self { returns, advantages, teacher }
    }
}

/// Evaluates every loss on `steps` under `params` and accumulates the
/// gradient of the weighted total into `tape`.
///
/// Batch statistics seen in train mode are blended into the running
/// statistics of `params` with `bn_momentum`.
pub fn accumulate<T: Real>(
    params: &mut Params<T>,
    steps: &[Step],
    targets: &Targets,
    w: &LossWeights,
    clip: f64,
    bn_momentum: Option<T>,
    tape: &mut GradTape<T>,
) -> Result<Losses, NetError> {
    let mut l = Losses::default();
    let n = steps.len() as f64;
    for (t, s) in steps.iter().enumerate() {
        let graph = s.state.graph.cast::<T>();
        let e = Evaluation::run(params, &graph, s.state.first, s.state.second, Mode::Train)?;
        let p = e.prob().to_f64().expect("finite");
        let z = e.actor.logit.to_f64().expect("finite");
        let slope = p * (1.0 - p);
        let (pi, dpi_dz) = if s.swap { (p, slope) } else { (1.0 - p, -slope) };
        let ratio = pi / f64::from(s.prob).max(PROB_FLOOR);
        let adv = targets.advantages[t];
        l.policy += clipped_term(ratio, adv, clip);
        let mut d_logit = 0.0;
        if ratio_is_live(ratio, adv, clip) {
            d_logit += w.policy * -adv * dpi_dz / f64::from(s.prob).max(PROB_FLOOR);
        }
        // dH/dz = -p (1 - p) z
        l.entropy -= binary_entropy(p);
        d_logit += w.entropy * slope * z;
        if let Some(q) = &targets.teacher {
            l.distill += binary_cross_entropy(q[t], p);
            d_logit += w.distill * (p - q[t]);
        }
        let v = e.value().to_f64().expect("finite");
        let err = v - targets.returns[t];
        l.value += err * err / n;
        let d_value = w.value * 2.0 * err / n;
        e.backward(params, &graph, T::lit(d_logit), T::lit(d_value), tape);
        if let Some(m) = bn_momentum.filter(|_| params.cfg.batch_norm) {
            let c = &e.gin.cache;
            params.update_running(c.batch_mean.as_slice().expect("contiguous"), c.batch_var.as_slice().expect("contiguous"), m);
        }
    }
    l.total = w.policy * l.policy + w.value * l.value + w.entropy * l.entropy + w.distill * l.distill;
    Ok(l)
}
