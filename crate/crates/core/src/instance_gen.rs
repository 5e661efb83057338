//! Randomised instance generation from a seed timetable.
//!
//! The seed is perturbed by bounded uniform noise, spread out by a per-train
//! offset that grows linearly with the train index, repaired into a
//! conflict-free plan by the timetabling heuristic and finally given random
//! origin delays and minimum running times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Minutes, ModelError, TrainId};
use crate::schedule::Schedule;
use crate::timetable::{capacity_feasible, TimetableConfig, TimetableError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("seed timetable needs at least one train and one station")]
    Degenerate,
    #[error("invalid generator setting: {0}")]
    Config(String),
    #[error("repair failed: {0}")]
    Repair(#[from] TimetableError),
    #[error("generated instance is invalid: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub stations: usize,
    pub trains: usize,
    /// Timetable noise amplitude in minutes.
    pub tau1: f64,
    /// Largest origin delay in minutes.
    pub tau2: Minutes,
    /// Fastest running time as a fraction of the seed running time.
    pub tau3: f64,
    pub seed: u64,
    pub count: usize,
}

impl GenConfig {
    /// Small delays on a `stations` x `trains` network.
    pub fn disturbance(stations: usize, trains: usize) -> Self {
        Self { stations, trains, tau1: 20.0, tau2: 60, tau3: 0.3, seed: 0, count: 1 }
    }

    /// Long delays on a `stations` x `trains` network.
    pub fn disruption(stations: usize, trains: usize) -> Self {
        Self { tau2: 180, ..Self::disturbance(stations, trains) }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.stations == 0 || self.trains == 0 {
            return Err(GenError::Degenerate);
        }
        if !(self.tau1 >= 0.0) || self.tau2 < 0 {
            return Err(GenError::Config("tau1 and tau2 must be non-negative".into()));
        }
        if !(self.tau3 > 0.0 && self.tau3 <= 1.0) {
            return Err(GenError::Config("tau3 must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Shape of the synthetic seed timetable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProfile {
    pub first_arrival: Minutes,
    pub spacing: Minutes,
    pub run: Minutes,
    pub supplement: Minutes,
    pub dwell: Minutes,
    pub headway: Minutes,
    pub capacity: usize,
}

impl Default for SeedProfile {
    fn default() -> Self {
        Self { first_arrival: 0, spacing: 5, run: 40, supplement: 4, dwell: 2, headway: 5, capacity: 3 }
    }
}

/// Deterministic evenly spaced timetable with identical trains.
pub fn bundled_seed(stations: usize, trains: usize) -> Instance {
    seed_timetable(stations, trains, &SeedProfile::default())
}

pub fn seed_timetable(stations: usize, trains: usize, p: &SeedProfile) -> Instance {
    let mut pa = vec![vec![0; stations]; trains];
    let mut pd = vec![vec![0; stations]; trains];
    for k in 0..trains {
        let mut t = p.first_arrival + p.spacing * k as Minutes;
        for i in 0..stations {
            pa[k][i] = t;
            pd[k][i] = t + p.dwell;
            t = pd[k][i] + p.run + p.supplement;
        }
    }
    Instance {
        num_stations: stations,
        num_trains: trains,
        planned_arrival: pa,
        planned_departure: pd,
        min_run: vec![vec![p.run; stations.saturating_sub(1)]; trains],
        min_dwell: vec![p.dwell; stations],
        headway: p.headway,
        track_capacity: vec![p.capacity; stations],
        occurred_delay: vec![vec![0; stations]; trains],
    }
}

/// Noise, spread and repair, without delays or running-time draws.
fn spread_and_repair<R: Rng + ?Sized>(seed_tt: &Instance, tau1: f64, rng: &mut R) -> Result<Instance, GenError> {
    let (k_n, i_n) = (seed_tt.num_trains, seed_tt.num_stations);
    let mut noisy_a = vec![vec![0.0f64; i_n]; k_n];
    let mut noisy_d = vec![vec![0.0f64; i_n]; k_n];
    for k in 0..k_n {
        for i in 0..i_n {
            noisy_a[k][i] = seed_tt.planned_arrival[k][i] as f64 + rng.gen::<f64>() * tau1;
            noisy_d[k][i] = seed_tt.planned_departure[k][i] as f64 + rng.gen::<f64>() * tau1;
        }
    }
    let max = noisy_a.iter().chain(&noisy_d).flatten().copied().fold(0.0f64, f64::max);
    let round_row = |row: &Vec<f64>, offset: f64| -> Vec<Minutes> { row.iter().map(|x| (x + offset).round() as Minutes).collect() };
    let mut rough = seed_tt.clone();
    for k in 0..k_n {
        let offset = k as f64 * max / k_n as f64;
        rough.planned_arrival[k] = round_row(&noisy_a[k], offset);
        rough.planned_departure[k] = round_row(&noisy_d[k], offset);
    }
    rough.occurred_delay = vec![vec![0; i_n]; k_n];

    let mut order: Vec<TrainId> = (0..k_n).collect();
    order.sort_by_key(|&k| (rough.planned_departure[k][0], k));
    let arrival_order = rough.origin_arrival_order();
    if !capacity_feasible(&arrival_order, &order, rough.track_capacity[0]) {
        order = arrival_order;
    }
    let orders = vec![order; i_n.saturating_sub(1)];
    let repaired = Schedule::build(&rough, TimetableConfig::default(), &orders)?;
    let mut out = rough;
    out.planned_arrival = repaired.solution.arrival;
    out.planned_departure = repaired.solution.departure;
    Ok(out)
}

/// One random instance derived from `seed_tt`.
pub fn generate<R: Rng + ?Sized>(seed_tt: &Instance, cfg: &GenConfig, rng: &mut R) -> Result<Instance, GenError> {
    cfg.check()?;
    if seed_tt.num_trains == 0 || seed_tt.num_stations == 0 {
        return Err(GenError::Degenerate);
    }
    let mut inst = spread_and_repair(seed_tt, cfg.tau1, rng)?;
    for k in 0..inst.num_trains {
        inst.occurred_delay[k][0] = rng.gen_range(0..=cfg.tau2);
        for s in 0..inst.num_stations - 1 {
            let full = seed_tt.min_run[k][s] as f64;
            let lo = cfg.tau3 * full;
            let draw = if full > lo { rng.gen_range(lo..=full) } else { full };
            inst.min_run[k][s] = (draw.round() as Minutes).clamp(1, seed_tt.min_run[k][s]);
        }
    }
    inst.check()?;
    Ok(inst)
}

/// `cfg.count` instances from the bundled seed; instance `n` uses seed `cfg.seed + n`.
pub fn generate_batch(cfg: &GenConfig) -> Result<Vec<Instance>, GenError> {
    let seed_tt = bundled_seed(cfg.stations, cfg.trains);
    (0..cfg.count as u64)
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(n));
            generate(&seed_tt, cfg, &mut rng)
        })
        .collect()
}

/// Single instance from the bundled seed, reproducible from `cfg.seed`.
pub fn generate_one(cfg: &GenConfig) -> Result<Instance, GenError> {
    let seed_tt = bundled_seed(cfg.stations, cfg.trains);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    generate(&seed_tt, cfg, &mut rng)
}
