//! Timetable data model.
//!
//! Indexing convention: trains and stations are 0-based everywhere in code
//! and in the text file format. `x[k][i]` is the value for train `k` at
//! station `i`; section `i` runs from station `i` to station `i + 1`.
//! Track indices are 1-based, `0` meaning "no track assigned".

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub type Minutes = i64;
pub type TrainId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A rescheduling problem: the planned timetable, infrastructure limits,
/// and the delays that have already occurred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub num_stations: usize,
    pub num_trains: usize,
    pub planned_arrival: Vec<Vec<Minutes>>,
    pub planned_departure: Vec<Vec<Minutes>>,
    /// `min_run[k][i]` for section `i`, so each row has `num_stations - 1` entries.
    pub min_run: Vec<Vec<Minutes>>,
    pub min_dwell: Vec<Minutes>,
    pub headway: Minutes,
    pub track_capacity: Vec<usize>,
    pub occurred_delay: Vec<Vec<Minutes>>,
}

impl Instance {
    pub fn trains(&self) -> std::ops::Range<TrainId> {
        0..self.num_trains
    }

    pub fn stations(&self) -> std::ops::Range<usize> {
        0..self.num_stations
    }

    pub fn is_terminal(&self, station: usize) -> bool {
        station + 1 == self.num_stations
    }

    /// Largest planned time in the timetable (at least 1).
    pub fn horizon(&self) -> Minutes {
        self.planned_arrival
            .iter()
            .chain(self.planned_departure.iter())
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Planned slack on section `section` beyond the minimum running time.
    pub fn planned_supplement(&self, train: TrainId, section: usize) -> Minutes {
        self.planned_arrival[train][section + 1]
            - self.planned_departure[train][section]
            - self.min_run[train][section]
    }

    /// Lower bound on the arrival imposed by an occurred delay, if any.
    pub fn delay_floor(&self, train: TrainId, station: usize) -> Option<Minutes> {
        let e = self.occurred_delay[train][station];
        (e > 0).then(|| self.planned_arrival[train][station] + e)
    }

    /// Trains sorted by planned departure at `station` (ties by index).
    pub fn planned_order(&self, station: usize) -> Vec<TrainId> {
        let mut order: Vec<TrainId> = self.trains().collect();
        order.sort_by_key(|&k| (self.planned_departure[k][station], k));
        order
    }

    /// Actual arrival at the origin: planned arrival plus the occurred delay.
    pub fn origin_arrival(&self, train: TrainId) -> Minutes {
        self.planned_arrival[train][0] + self.occurred_delay[train][0]
    }

    /// Order in which trains reach the origin (ties by planned departure, then index).
    pub fn origin_arrival_order(&self) -> Vec<TrainId> {
        let mut order: Vec<TrainId> = self.trains().collect();
        order.sort_by_key(|&k| (self.origin_arrival(k), self.planned_departure[k][0], k));
        order
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let (k_n, i_n) = (self.num_trains, self.num_stations);
        if k_n == 0 || i_n == 0 {
            return Err(ModelError::Invalid("need at least one train and one station".into()));
        }
        let grid = |name: &str, g: &Vec<Vec<Minutes>>, cols: usize| -> Result<(), ModelError> {
            if g.len() != k_n || g.iter().any(|row| row.len() != cols) {
                return Err(ModelError::Dimension(format!("{name} must be {k_n} x {cols}")));
            }
            Ok(())
        };
        grid("planned_arrival", &self.planned_arrival, i_n)?;
        grid("planned_departure", &self.planned_departure, i_n)?;
        grid("min_run", &self.min_run, i_n - 1)?;
        grid("occurred_delay", &self.occurred_delay, i_n)?;
        if self.min_dwell.len() != i_n || self.track_capacity.len() != i_n {
            return Err(ModelError::Dimension("min_dwell and track_capacity need one entry per station".into()));
        }
        if self.headway <= 0 {
            return Err(ModelError::Invalid("headway must be positive".into()));
        }
        if self.track_capacity.contains(&0) {
            return Err(ModelError::Invalid("track capacity must be at least 1".into()));
        }
        if self.min_dwell.iter().any(|&d| d < 0) {
            return Err(ModelError::Invalid("minimum dwell must be non-negative".into()));
        }
        for k in self.trains() {
            for i in self.stations() {
                let (a, d) = (self.planned_arrival[k][i], self.planned_departure[k][i]);
                if a < 0 || d < 0 {
                    return Err(ModelError::Invalid(format!("negative planned time for train {k} at station {i}")));
                }
                if a > d {
                    return Err(ModelError::Invalid(format!("train {k} departs station {i} before arriving")));
                }
                if self.occurred_delay[k][i] < 0 {
                    return Err(ModelError::Invalid(format!("negative occurred delay for train {k} at station {i}")));
                }
                if i + 1 < i_n {
                    let rt = self.min_run[k][i];
                    if rt <= 0 {
                        return Err(ModelError::Invalid(format!("non-positive run time for train {k} in section {i}")));
                    }
                    if d + rt > self.planned_arrival[k][i + 1] {
                        return Err(ModelError::Invalid(format!(
                            "planned section {i} of train {k} shorter than its minimum run time"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A rescheduled timetable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub arrival: Vec<Vec<Minutes>>,
    pub departure: Vec<Vec<Minutes>>,
    /// Departure order at each station.
    pub dep_order: Vec<Vec<TrainId>>,
    /// `track[k][i]`, 1-based; `0` where no track is modelled.
    pub track: Vec<Vec<usize>>,
}

impl Solution {
    pub fn check_dimensions(&self, inst: &Instance) -> Result<(), ModelError> {
        let (k_n, i_n) = (inst.num_trains, inst.num_stations);
        let ok_grid = |g: &Vec<Vec<Minutes>>| g.len() == k_n && g.iter().all(|r| r.len() == i_n);
        if !ok_grid(&self.arrival) || !ok_grid(&self.departure) {
            return Err(ModelError::Dimension(format!("times must be {k_n} x {i_n}")));
        }
        if self.track.len() != k_n || self.track.iter().any(|r| r.len() != i_n) {
            return Err(ModelError::Dimension(format!("track must be {k_n} x {i_n}")));
        }
        if self.dep_order.len() != i_n {
            return Err(ModelError::Dimension(format!("dep_order must have {i_n} entries")));
        }
        Ok(())
    }

    /// The planned timetable read as a solution, with departure orders from
    /// planned departures and tracks assigned greedily by arrival.
    pub fn planned(inst: &Instance) -> Solution {
        let dep_order: Vec<Vec<TrainId>> = inst.stations().map(|i| inst.planned_order(i)).collect();
        let mut track = vec![vec![0usize; inst.num_stations]; inst.num_trains];
        for i in inst.stations().skip(1) {
            let arrivals: Vec<Minutes> = inst.trains().map(|k| inst.planned_arrival[k][i]).collect();
            let departures: Vec<Minutes> = inst.trains().map(|k| inst.planned_departure[k][i]).collect();
            let assigned = assign_tracks_greedy(&arrivals, &departures, inst.track_capacity[i], inst.headway);
            for k in inst.trains() {
                track[k][i] = assigned[k];
            }
        }
        Solution {
            arrival: inst.planned_arrival.clone(),
            departure: inst.planned_departure.clone(),
            dep_order,
            track,
        }
    }
}

/// Interval-colouring track assignment: trains in arrival order take the
/// lowest track whose previous occupant left at least `headway` earlier.
/// Trains that do not fit are put on track 1 (the validator reports it).
pub fn assign_tracks_greedy(
    arrivals: &[Minutes],
    departures: &[Minutes],
    capacity: usize,
    headway: Minutes,
) -> Vec<usize> {
    let mut by_arrival: Vec<usize> = (0..arrivals.len()).collect();
    by_arrival.sort_by_key(|&k| (arrivals[k], departures[k], k));
    let mut free_from: Vec<Option<Minutes>> = vec![None; capacity];
    let mut out = vec![1usize; arrivals.len()];
    for k in by_arrival {
        let slot = free_from.iter().position(|f| f.is_none_or(|t| t <= arrivals[k]));
        if let Some(p) = slot {
            free_from[p] = Some(departures[k] + headway);
            out[k] = p + 1;
        }
    }
    out
}

/// Weight of early arrivals relative to late ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig<S> {
    pub lambda: S,
}

impl<S: Scalar> ObjectiveConfig<S> {
    pub fn new(lambda: S) -> Result<Self, ModelError> {
        if !(lambda > S::zero() && lambda <= S::one()) {
            return Err(ModelError::Config("lambda must lie in (0, 1]".into()));
        }
        Ok(Self { lambda })
    }

    /// λ = 0.3.
    pub fn standard() -> Self {
        Self { lambda: S::ratio(3, 10) }
    }

    /// How many trains ahead of a conflict may be advanced: `floor(1 / λ)`.
    pub fn advance_window(&self) -> usize {
        let inv = (S::one() / self.lambda).to_f64_lossy();
        // guard against 1/λ landing a hair below an integer
        (inv + 1e-9).floor().max(1.0) as usize
    }

    pub fn cast<T: Scalar>(&self) -> ObjectiveConfig<T> {
        let lambda = T::from_f64(self.lambda.to_f64_lossy()).expect("lambda representable");
        ObjectiveConfig { lambda }
    }
}

impl<S: Scalar> Default for ObjectiveConfig<S> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Big-M constant used when linearising ordering disjunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpExportConfig {
    pub big_m: Minutes,
}

impl LpExportConfig {
    /// Ten times the largest planned time.
    pub fn for_instance(inst: &Instance) -> Self {
        Self { big_m: 10 * inst.horizon() }
    }

    pub fn check(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.big_m < 10 * inst.horizon() {
            return Err(ModelError::Config(format!(
                "big M {} below 10 x horizon {}",
                self.big_m,
                inst.horizon()
            )));
        }
        Ok(())
    }
}
