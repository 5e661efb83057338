//! Heuristic timetabling for one station and the section leaving it.
//!
//! Given the entry arrivals at a station, the order in which trains reach it
//! and the order in which they leave, trains are admitted onto platform
//! tracks, given their earliest departures, and run to the next station.
//! Headway conflicts on arrival at the next station are then dissipated by
//! first advancing preceding trains into their running-time supplement and,
//! if that is not enough, delaying the followers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, Minutes, TrainId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimetableError {
    #[error("order at station {station} is not a permutation of the trains")]
    NotPermutation { station: usize },
    #[error("order at station {station} lets train {train} overtake more trains than there are spare tracks")]
    CapacityInfeasible { station: usize, train: TrainId },
}

/// How a free platform track is chosen when several are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackChoice {
    #[default]
    LowestIndex,
    /// Uniform among free tracks, reproducible from the seed and station.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimetableConfig {
    /// Number of trains, ending at the conflicting one, that may be advanced.
    pub advance_window: usize,
    pub track_choice: TrackChoice,
}

impl Default for TimetableConfig {
    fn default() -> Self {
        Self { advance_window: 3, track_choice: TrackChoice::LowestIndex }
    }
}

impl TimetableConfig {
    pub fn with_window(advance_window: usize) -> Self {
        Self { advance_window: advance_window.max(1), ..Self::default() }
    }
}

/// `max(d*, a + rd, d_prev + h)`, the last term only when a train departed before.
pub fn earliest_departure(
    planned_departure: Minutes,
    arrival: Minutes,
    min_dwell: Minutes,
    preceding_departure: Option<Minutes>,
    headway: Minutes,
) -> Minutes {
    let d = planned_departure.max(arrival + min_dwell);
    match preceding_departure {
        Some(p) => d.max(p + headway),
        None => d,
    }
}

/// `max(a*, d + rt)` at the next station.
pub fn earliest_arrival(planned_arrival: Minutes, departure: Minutes, min_run: Minutes) -> Minutes {
    planned_arrival.max(departure + min_run)
}

/// Separation beyond the headway between consecutive arrivals at the same station.
pub fn buffer_time(preceding_arrival: Minutes, arrival: Minutes, headway: Minutes) -> Minutes {
    arrival - preceding_arrival - headway
}

/// Record of one conflict dissipation between `preceding` and `train`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferReport {
    pub preceding: TrainId,
    pub train: TrainId,
    /// Buffer before any adjustment (negative: a conflict).
    pub buffer: Minutes,
    /// Per advanced train: (train, supplement, adjustable time, applied advance).
    pub advances: Vec<AdvanceEntry>,
    /// Whether followers had to be delayed.
    pub delayed_followers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvanceEntry {
    pub train: TrainId,
    pub supplement: Minutes,
    pub adjustable: Minutes,
    pub applied: Minutes,
}

/// Conflict dissipation at the arrival station.
///
/// `order` is the running order through the section, `pos` the index of the
/// conflicting (following) train in it, `arrival` the tentative arrivals at
/// the next station and `floor` the earliest each arrival may be advanced to.
pub fn dissipate_conflict(
    order: &[TrainId],
    pos: usize,
    arrival: &mut [Minutes],
    floor: &[Minutes],
    headway: Minutes,
    window: usize,
) -> BufferReport {
    assert!(pos >= 1 && pos < order.len());
    let (g2, k) = (order[pos - 1], order[pos]);
    let buffer = buffer_time(arrival[g2], arrival[k], headway);
    let mut report = BufferReport { preceding: g2, train: k, buffer, advances: Vec::new(), delayed_followers: false };
    if buffer >= 0 {
        return report;
    }

    let first = pos.saturating_sub(window.max(1));
    let members = &order[first..pos];
    let bh = |arr: &[Minutes], p: usize| buffer_time(arr[order[p - 1]], arr[order[p]], headway);

    // adjustable time, accumulated front to back
    let mut adjustable = Vec::with_capacity(members.len());
    for (j, &t) in members.iter().enumerate() {
        let supplement = arrival[t] - floor[t];
        let p = first + j;
        let h_aj = if j == 0 {
            // never advance into the train in front of the window
            if p > 0 {
                supplement.min(bh(arrival, p))
            } else {
                supplement
            }
        } else {
            supplement.min(adjustable[j - 1] + bh(arrival, p))
        };
        adjustable.push(h_aj.max(0));
    }

    let mut applied = vec![0; members.len()];
    let last = members.len() - 1;
    applied[last] = (-buffer).min(adjustable[last]).max(0);
    for j in (1..members.len()).rev() {
        applied[j - 1] = (applied[j] - bh(arrival, first + j)).max(0);
    }
    for (j, &t) in members.iter().enumerate() {
        report.advances.push(AdvanceEntry {
            train: t,
            supplement: arrival[t] - floor[t],
            adjustable: adjustable[j],
            applied: applied[j],
        });
    }
    for (j, &t) in members.iter().enumerate() {
        arrival[t] -= applied[j];
    }

    if applied[last] < -buffer {
        report.delayed_followers = true;
        for p in pos..order.len() {
            let need = arrival[order[p - 1]] + headway;
            if arrival[order[p]] >= need {
                break;
            }
            arrival[order[p]] = need;
        }
    }
    report
}

/// Times produced for one station (and the section leaving it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationTiming {
    pub station: usize,
    /// Arrivals at this station after track admission.
    pub arrival: Vec<Minutes>,
    pub departure: Vec<Minutes>,
    /// 1-based track per train.
    pub track: Vec<usize>,
    /// Arrivals at the next station; `None` at the terminal.
    pub next_arrival: Option<Vec<Minutes>>,
    pub reports: Vec<BufferReport>,
}

/// Number of trains that reach the station before `k` but leave after it, per train.
pub fn overtake_counts(arrival_order: &[TrainId], order: &[TrainId]) -> Vec<usize> {
    let n = arrival_order.len();
    let mut dep_pos = vec![usize::MAX; n];
    for (p, &k) in order.iter().enumerate() {
        dep_pos[k] = p;
    }
    let mut counts = vec![0; n];
    for (p, &k) in arrival_order.iter().enumerate() {
        counts[k] = arrival_order[..p].iter().filter(|&&j| dep_pos[j] > dep_pos[k]).count();
    }
    counts
}

/// Whether no train overtakes more than `capacity - 1` others.
pub fn capacity_feasible(arrival_order: &[TrainId], order: &[TrainId], capacity: usize) -> bool {
    overtake_counts(arrival_order, order).iter().all(|&c| c < capacity)
}

pub(crate) fn check_permutation(order: &[TrainId], n: usize, station: usize) -> Result<(), TimetableError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(TimetableError::NotPermutation { station });
    }
    for &k in order {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(TimetableError::NotPermutation { station });
        }
    }
    Ok(())
}

/// Runs the timetabling heuristic at `station`.
///
/// `entry` holds the arrivals at the station before track admission,
/// `arrival_order` the order in which trains reach it and `order` the order
/// in which they leave (and hence reach the next station).
pub fn timetable_station(
    inst: &Instance,
    station: usize,
    entry: &[Minutes],
    arrival_order: &[TrainId],
    order: &[TrainId],
    cfg: &TimetableConfig,
) -> Result<StationTiming, TimetableError> {
    let n = inst.num_trains;
    check_permutation(arrival_order, n, station)?;
    check_permutation(order, n, station)?;
    let h = inst.headway;
    let cap = inst.track_capacity[station];
    let mut rng = match cfg.track_choice {
        TrackChoice::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed ^ (station as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))),
        TrackChoice::LowestIndex => None,
    };

    let mut arrival = entry.to_vec();
    // None: held by a train that has not left yet
    let mut free_from: Vec<Option<Minutes>> = vec![Some(Minutes::MIN); cap];
    let mut track = vec![0usize; n];
    let mut arr_pos = vec![0usize; n];
    for (p, &k) in arrival_order.iter().enumerate() {
        arr_pos[k] = p;
    }
    let mut admitted = 0usize;
    let mut departure = vec![0; n];
    let mut last_dep: Option<Minutes> = None;

    for &k in order {
        // admit every train that physically arrives no later than k
        while admitted <= arr_pos[k] {
            let j = arrival_order[admitted];
            let free: Vec<usize> = (0..cap).filter(|&p| free_from[p].is_some_and(|t| t <= arrival[j])).collect();
            let slot = if free.is_empty() {
                let (p, t) = free_from
                    .iter()
                    .enumerate()
                    .filter_map(|(p, t)| t.map(|t| (p, t)))
                    .min_by_key(|&(p, t)| (t, p))
                    .ok_or(TimetableError::CapacityInfeasible { station, train: k })?;
                arrival[j] = t;
                for q in admitted + 1..n {
                    let (prev, next) = (arrival_order[q - 1], arrival_order[q]);
                    if arrival[next] >= arrival[prev] + h {
                        break;
                    }
                    arrival[next] = arrival[prev] + h;
                }
                p
            } else if let Some(rng) = rng.as_mut() {
                *free.choose(rng).expect("non-empty")
            } else {
                free[0]
            };
            free_from[slot] = None;
            track[j] = slot + 1;
            admitted += 1;
        }
        let d = earliest_departure(inst.planned_departure[k][station], arrival[k], inst.min_dwell[station], last_dep, h);
        departure[k] = d;
        last_dep = Some(d);
        free_from[track[k] - 1] = Some(d + h);
    }

    let mut reports = Vec::new();
    let next_arrival = if inst.is_terminal(station) {
        None
    } else {
        let next = station + 1;
        let mut floor = vec![0; n];
        let mut next_arr = vec![0; n];
        for k in 0..n {
            floor[k] = departure[k] + inst.min_run[k][station];
            if let Some(b) = inst.delay_floor(k, next) {
                floor[k] = floor[k].max(b);
            }
            next_arr[k] = earliest_arrival(inst.planned_arrival[k][next], departure[k], inst.min_run[k][station]).max(floor[k]);
        }
        for pos in 1..n {
            let (g2, k) = (order[pos - 1], order[pos]);
            if buffer_time(next_arr[g2], next_arr[k], h) < 0 {
                reports.push(dissipate_conflict(order, pos, &mut next_arr, &floor, h, cfg.advance_window));
            }
        }
        Some(next_arr)
    };

    Ok(StationTiming { station, arrival, departure, track, next_arrival, reports })
}
