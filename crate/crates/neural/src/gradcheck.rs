//! Central finite-difference comparison of the analytic gradients.
//!
//! Both the analytic gradients and the reference differences are evaluated
//! in `f64` on the stored parameter values, so the comparison tests the
//! backward formulas rather than single-precision rounding.

use rand::seq::index::sample;
use rand::Rng;

use crate::graph::GraphInput;
use crate::network::{Evaluation, Mode};
use crate::params::{GradTape, Group, Params, Tensor};
use crate::real::Real;

/// Test loss `a * ln p + b * (V - target)^2` over one decision state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeLoss {
    pub a: f64,
    pub b: f64,
    pub target: f64,
}

impl ProbeLoss {
    pub fn value<T: Real>(&self, p: &Params<T>, g: &GraphInput<T>, first: usize, second: usize) -> f64 {
        let e = Evaluation::run(p, g, first, second, Mode::Train).expect("valid state");
        let prob = e.prob().to_f64().unwrap();
        let v = e.value().to_f64().unwrap();
        self.a * prob.ln() + self.b * (v - self.target).powi(2)
    }

    pub fn gradients<T: Real>(&self, p: &Params<T>, g: &GraphInput<T>, first: usize, second: usize) -> GradTape<T> {
        let e = Evaluation::run(p, g, first, second, Mode::Train).expect("valid state");
        let d_logit = T::lit(self.a) * (T::one() - e.prob());
        let d_value = T::lit(2.0 * self.b) * (e.value() - T::lit(self.target));
        let mut tape = GradTape::zeros(&p.cfg);
        e.backward(p, g, d_logit, d_value, &mut tape);
        tape
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub step: f64,
    /// Largest number of coordinates probed per tensor.
    pub per_tensor: usize,
    /// Fraction of the largest probed gradient below which entries are
    /// compared absolutely.
    pub floor: f64,
    /// Coordinates whose differences at `step` and `step / 10` disagree by
    /// more than this relative amount straddle a ReLU kink and are skipped.
    pub smoothness: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { step: 1e-6, per_tensor: 48, floor: 1e-5, smoothness: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupError {
    pub group: Group,
    pub checked: usize,
    /// Probed coordinates left out because the loss is not smooth there.
    pub skipped: usize,
    pub max_rel_error: f64,
    /// Tensor and coordinate of the worst entry.
    pub worst: (Tensor, usize),
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Worst relative error per parameter group.
///
/// Entries are compared with `relative_error`, using `cfg.floor` times the
/// largest numeric gradient magnitude as the floor.
pub fn check_gradients<R: Rng + ?Sized>(
    params: &Params<f32>,
    g: &GraphInput<f32>,
    first: usize,
    second: usize,
    loss: &ProbeLoss,
    cfg: &GradCheckConfig,
    rng: &mut R,
) -> Vec<GroupError> {
    let mut p64: Params<f64> = params.cast();
    let g64: GraphInput<f64> = g.cast();
    let analytic = loss.gradients(&p64, &g64, first, second);
    let mut central = |t: Tensor, idx: usize, h: f64| {
        let orig = p64.get(t)[idx];
        p64.get_mut(t)[idx] = orig + h;
        let up = loss.value(&p64, &g64, first, second);
        p64.get_mut(t)[idx] = orig - h;
        let down = loss.value(&p64, &g64, first, second);
        p64.get_mut(t)[idx] = orig;
        (up - down) / (2.0 * h)
    };
    let mut probes = Vec::new();
    for t in Tensor::ALL {
        let len = params.get(t).len();
        for idx in sample(rng, len, len.min(cfg.per_tensor)).iter() {
            let coarse = central(t, idx, cfg.step);
            let fine = central(t, idx, cfg.step / 10.0);
            probes.push((t, idx, analytic.get(t)[idx], coarse, fine));
        }
    }
    let scale = probes.iter().map(|p| p.3.abs()).fold(0.0, f64::max);
    let floor = cfg.floor * scale;
    let mut out: Vec<GroupError> = Vec::new();
    for (t, idx, a, coarse, fine) in probes {
        let pos = match out.iter().position(|e| e.group == t.group()) {
            Some(pos) => pos,
            None => {
                let empty = GroupError { group: t.group(), checked: 0, skipped: 0, max_rel_error: 0.0, worst: (t, idx) };
                out.push(empty);
                out.len() - 1
            }
        };
        let e = &mut out[pos];
        if relative_error(coarse, fine, floor) > cfg.smoothness {
            e.skipped += 1;
            continue;
        }
        e.checked += 1;
        let err = relative_error(a, coarse, floor);
        if err > e.max_rel_error {
            e.max_rel_error = err;
            e.worst = (t, idx);
        }
    }
    out
}
