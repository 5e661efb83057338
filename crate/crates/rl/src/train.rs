//! Episode loop: sample an instance, roll out, then several optimizer epochs
//! on that episode's decisions.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use ttr_core::instance_gen::{bundled_seed, generate, GenConfig, GenError};
use ttr_core::objective::objective;
use ttr_core::{F64Objective, Instance, ModelError};
use ttr_neural::{Adam, AdamConfig, NetConfig, NetError, PolicyGrads, PolicyParams};

use crate::config::{ConfigError, TrainConfig};
use crate::ppo::{accumulate, Losses, Targets, Teacher};
use crate::rollout::{rollout, solve_greedy, RolloutConfig, RolloutError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage 2 needs a stage-1 teacher checkpoint")]
    MissingTeacher,
    #[error("teacher network {found:?} does not match the configured {expected:?}")]
    TeacherShape { expected: NetConfig, found: NetConfig },
    #[error(transparent)]
    Rollout(#[from] RolloutError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Network(#[from] NetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("parameters became non-finite at episode {0}")]
    Diverged(u64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayKind {
    Disturbance,
    Disruption,
}

/// Draws training instances for one stage.
#[derive(Debug, Clone)]
pub struct InstanceSampler {
    seed_tt: Instance,
    small: GenConfig,
    large: GenConfig,
    p_small: f64,
}

impl InstanceSampler {
    pub fn new(cfg: &TrainConfig) -> Self {
        let base = GenConfig::disturbance(cfg.stations, cfg.trains);
        let p_small = match (cfg.stage, cfg.curriculum) {
            (1, _) => 1.0,
            (_, true) => cfg.p_small,
            (_, false) => 0.0,
        };
        Self {
            seed_tt: bundled_seed(cfg.stations, cfg.trains),
            small: GenConfig { tau2: cfg.tau2_small, ..base },
            large: GenConfig { tau2: cfg.tau2_large, ..base },
            p_small,
        }
    }

    pub fn draw_kind<R: Rng + ?Sized>(&self, rng: &mut R) -> DelayKind {
        if rng.gen::<f64>() < self.p_small {
            DelayKind::Disturbance
        } else {
            DelayKind::Disruption
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(DelayKind, Instance), GenError> {
        let kind = self.draw_kind(rng);
        let gen = match kind {
            DelayKind::Disturbance => &self.small,
            DelayKind::Disruption => &self.large,
        };
        Ok((kind, generate(&self.seed_tt, gen, rng)?))
    }
}

/// Frozen instances scored at every learning-curve point: disturbances in
/// stage 1, disruptions in stage 2.
pub fn validation_set(cfg: &TrainConfig) -> Result<Vec<Instance>, GenError> {
    let tau2 = if cfg.stage == 1 { cfg.tau2_small } else { cfg.tau2_large };
    let gen = GenConfig {
        tau2,
        seed: cfg.validation_seed,
        count: cfg.validation_size,
        ..GenConfig::disturbance(cfg.stations, cfg.trains)
    };
    ttr_core::instance_gen::generate_batch(&gen)
}

/// Mean objective of the greedy policy.
pub fn mean_greedy_objective(params: &PolicyParams, instances: &[Instance]) -> Result<f64, TrainError> {
    let obj = F64Objective::standard();
    let mut total = 0.0;
    for inst in instances {
        let sched = solve_greedy(inst, params)?;
        total += objective(&sched.solution, inst, &obj)?;
    }
    Ok(total / instances.len().max(1) as f64)
}

/// One row of the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: u64,
    /// Greedy mean objective on the validation set.
    pub mean_objective: f64,
    /// Mean objective of the sampled training episodes since the last row.
    pub train_objective: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy_loss: f64,
    pub distill_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub curve: Vec<CurvePoint>,
    pub episodes: u64,
    /// Policy decisions seen over all episodes.
    pub decisions: u64,
}

#[derive(Default)]
struct Window {
    episodes: u64,
    objective: f64,
    losses: Losses,
}

impl Window {
    fn point(&self, episode: u64, mean_objective: f64) -> CurvePoint {
        let n = self.episodes.max(1) as f64;
        CurvePoint {
            episode,
            mean_objective,
            train_objective: self.objective / n,
            policy_loss: self.losses.policy / n,
            value_loss: self.losses.value / n,
            entropy_loss: self.losses.entropy / n,
            distill_loss: self.losses.distill / n,
        }
    }
}

/// Trains one stage.
///
/// Stage 1 starts from a fresh initialisation; stage 2 starts from `teacher`,
/// which is also the distillation target when the curriculum is on.
/// `progress` sees every learning-curve row as it is produced.
pub fn train(
    cfg: &TrainConfig,
    teacher: Option<&PolicyParams>,
    mut progress: impl FnMut(&CurvePoint),
) -> Result<TrainOutcome, TrainError> {
    cfg.check()?;
    let net = NetConfig { hidden: cfg.hidden, include_flag: cfg.include_flag, batch_norm: true };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = match (cfg.stage, teacher) {
        (1, _) => PolicyParams::init(net, &mut rng),
        (_, None) => return Err(TrainError::MissingTeacher),
        (_, Some(t)) if t.cfg != net => return Err(TrainError::TeacherShape { expected: net, found: t.cfg }),
        (_, Some(t)) => t.clone(),
    };
    let teacher = teacher.filter(|_| cfg.distills()).map(|params| Teacher { params });
    let sampler = InstanceSampler::new(cfg);
    let validation = validation_set(cfg)?;
    let weights = cfg.weights();
    let mut adam = Adam::new(&net, AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut tape = PolicyGrads::zeros(&net);
    let obj = F64Objective::standard();

    let mut curve = Vec::new();
    let first = Window::default().point(0, mean_greedy_objective(&params, &validation)?);
    progress(&first);
    curve.push(first);
    let mut window = Window::default();
    let mut decisions = 0;
    for episode in 1..=cfg.episodes {
        let (_, inst) = sampler.sample(&mut rng)?;
        let (sched, traj) = rollout(&inst, &params, &RolloutConfig::sampling(), &mut rng)?;
        window.episodes += 1;
        window.objective += objective(&sched.solution, &inst, &obj)?;
        if !traj.steps.is_empty() {
            decisions += traj.steps.len() as u64;
            let teacher_probs = teacher.as_ref().map(|t| t.swap_probs(&traj.steps)).transpose()?;
            let targets = Targets::new(&traj.steps, cfg.gamma, teacher_probs);
            for epoch in 0..cfg.epochs {
                tape.zero();
                let l = accumulate(&mut params, &traj.steps, &targets, &weights, cfg.clip, Some(cfg.bn_momentum), &mut tape)?;
                if epoch == 0 {
                    window.losses.policy += l.policy;
                    window.losses.value += l.value;
                    window.losses.entropy += l.entropy;
                    window.losses.distill += l.distill;
                }
                adam.step(&mut params, &tape);
            }
            if !params.is_finite() {
                return Err(TrainError::Diverged(episode));
            }
        }
        if episode % cfg.eval_every == 0 || episode == cfg.episodes {
            let point = window.point(episode, mean_greedy_objective(&params, &validation)?);
            progress(&point);
            curve.push(point);
            window = Window::default();
        }
    }
    Ok(TrainOutcome { params, curve, episodes: cfg.episodes, decisions })
}

/// Learning curve as CSV with a header row.
pub fn write_curve<W: Write>(out: W, curve: &[CurvePoint]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve<R: std::io::Read>(input: R) -> Result<Vec<CurvePoint>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Mean validation objective over the first and the last `fraction` of the curve.
pub fn window_means(curve: &[CurvePoint], fraction: f64) -> Option<(f64, f64)> {
    let pts: Vec<f64> = curve.iter().map(|p| p.mean_objective).collect();
    if pts.is_empty() {
        return None;
    }
    let n = ((pts.len() as f64 * fraction).ceil() as usize).clamp(1, pts.len());
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Some((mean(&pts[..n]), mean(&pts[pts.len() - n..])))
}
