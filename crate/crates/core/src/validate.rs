//! Constraint checking for rescheduled timetables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Instance, Minutes, ModelError, Solution, TrainId};

/// Which reading of the arrival-time lower bound to enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Every arrival satisfies `a - a* >= e*`, so no train is ever early.
    StrictMilp,
    /// Early arrivals are allowed; `a >= a* + e*` only where `e* > 0`.
    Operational,
}

impl std::str::FromStr for Profile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict-milp" | "strict" => Ok(Profile::StrictMilp),
            "operational" => Ok(Profile::Operational),
            other => Err(ModelError::Config(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    OrderNotPermutation,
    NegativeTime,
    MinRun,
    MinDwell,
    EarlyDeparture,
    ArrivalBound,
    DepartureHeadway,
    ArrivalHeadway,
    TrackIndex,
    TrackOccupation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub station: usize,
    pub trains: Vec<TrainId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at station {} trains {:?}: {}", self.kind, self.station, self.trains, self.detail)
    }
}

fn is_permutation(order: &[TrainId], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n && order.iter().all(|&k| k < n && !std::mem::replace(&mut seen[k], true))
}

/// Every constraint breach in `sol`; an empty list means feasible.
pub fn validate(sol: &Solution, inst: &Instance, profile: Profile) -> Result<Vec<Violation>, ModelError> {
    sol.check_dimensions(inst)?;
    let mut out = Vec::new();
    let mut push = |kind, station, trains: Vec<TrainId>, detail: String| {
        out.push(Violation { kind, station, trains, detail });
    };
    let h = inst.headway;
    let (a, d) = (&sol.arrival, &sol.departure);

    let orders_ok: Vec<bool> = sol.dep_order.iter().map(|o| is_permutation(o, inst.num_trains)).collect();
    for (i, ok) in orders_ok.iter().enumerate() {
        if !ok {
            push(ViolationKind::OrderNotPermutation, i, vec![], format!("{:?}", sol.dep_order[i]));
        }
    }

    for k in inst.trains() {
        for i in inst.stations() {
            if a[k][i] < 0 || d[k][i] < 0 {
                push(ViolationKind::NegativeTime, i, vec![k], format!("a={} d={}", a[k][i], d[k][i]));
            }
            if d[k][i] - a[k][i] < inst.min_dwell[i] {
                push(ViolationKind::MinDwell, i, vec![k], format!("dwell {} < {}", d[k][i] - a[k][i], inst.min_dwell[i]));
            }
            if d[k][i] < inst.planned_departure[k][i] {
                push(
                    ViolationKind::EarlyDeparture,
                    i,
                    vec![k],
                    format!("d={} before planned {}", d[k][i], inst.planned_departure[k][i]),
                );
            }
            let e = inst.occurred_delay[k][i];
            let bound = match profile {
                Profile::StrictMilp => Some(inst.planned_arrival[k][i] + e),
                Profile::Operational => inst.delay_floor(k, i),
            };
            if let Some(b) = bound {
                if a[k][i] < b {
                    push(ViolationKind::ArrivalBound, i, vec![k], format!("a={} below bound {}", a[k][i], b));
                }
            }
            if i + 1 < inst.num_stations && a[k][i + 1] - d[k][i] < inst.min_run[k][i] {
                push(
                    ViolationKind::MinRun,
                    i,
                    vec![k],
                    format!("run {} < {}", a[k][i + 1] - d[k][i], inst.min_run[k][i]),
                );
            }
        }
    }

    for i in inst.stations() {
        if !orders_ok[i] {
            continue;
        }
        for pair in sol.dep_order[i].windows(2) {
            let (k1, k2) = (pair[0], pair[1]);
            if d[k2][i] - d[k1][i] < h {
                push(
                    ViolationKind::DepartureHeadway,
                    i,
                    vec![k1, k2],
                    format!("departures {} then {}", d[k1][i], d[k2][i]),
                );
            }
            if i + 1 < inst.num_stations && a[k2][i + 1] - a[k1][i + 1] < h {
                push(
                    ViolationKind::ArrivalHeadway,
                    i + 1,
                    vec![k1, k2],
                    format!("arrivals {} then {}", a[k1][i + 1], a[k2][i + 1]),
                );
            }
        }
    }

    for i in inst.stations().skip(1) {
        let cap = inst.track_capacity[i];
        for k in inst.trains() {
            let z = sol.track[k][i];
            if z == 0 || z > cap {
                push(ViolationKind::TrackIndex, i, vec![k], format!("track {z} outside 1..={cap}"));
            }
        }
        if !orders_ok[i - 1] {
            continue;
        }
        // arrival order at station i is the departure order of the previous section
        let arrivals = &sol.dep_order[i - 1];
        for (p, &k1) in arrivals.iter().enumerate() {
            for &k2 in &arrivals[p + 1..] {
                if sol.track[k1][i] == sol.track[k2][i] && a[k2][i] - d[k1][i] < h {
                    push(
                        ViolationKind::TrackOccupation,
                        i,
                        vec![k1, k2],
                        format!("track {} freed at {} reused at {}", sol.track[k1][i], d[k1][i], a[k2][i]),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Convenience: number of distinct simultaneously dwelling trains at a station,
/// maximised over time.
pub fn peak_occupancy(sol: &Solution, station: usize, headway: Minutes) -> usize {
    let mut events: Vec<(Minutes, i32)> = Vec::new();
    for k in 0..sol.arrival.len() {
        events.push((sol.arrival[k][station], 1));
        events.push((sol.departure[k][station] + headway, -1));
    }
    // releases sort before arrivals at the same instant
    events.sort();
    let mut cur = 0i32;
    let mut peak = 0i32;
    for (_, delta) in events {
        cur += delta;
        peak = peak.max(cur);
    }
    peak as usize
}
