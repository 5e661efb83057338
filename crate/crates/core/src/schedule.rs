//! Section-by-section construction of a full rescheduled timetable.

use crate::model::{Instance, Minutes, Solution, TrainId};
use crate::timetable::{check_permutation, timetable_station, StationTiming, TimetableConfig, TimetableError};

/// Builds a solution one departure order at a time.
///
/// Station `s` is decided by [`Pipeline::commit`] with the order in which
/// trains leave it. When the last decision is made the terminal is timed as
/// well, keeping the order in which trains arrive there.
#[derive(Debug, Clone)]
pub struct Pipeline<'a> {
    inst: &'a Instance,
    cfg: TimetableConfig,
    station: usize,
    entry: Vec<Vec<Minutes>>,
    arrival_order: Vec<Vec<TrainId>>,
    arrival: Vec<Vec<Minutes>>,
    departure: Vec<Vec<Minutes>>,
    track: Vec<Vec<usize>>,
    dep_order: Vec<Vec<TrainId>>,
    complete: bool,
}

impl<'a> Pipeline<'a> {
    pub fn new(inst: &'a Instance, cfg: TimetableConfig) -> Result<Self, TimetableError> {
        let (k_n, i_n) = (inst.num_trains, inst.num_stations);
        let origin: Vec<Minutes> = inst.trains().map(|k| inst.origin_arrival(k)).collect();
        let mut arrival = vec![vec![0; i_n]; k_n];
        for k in inst.trains() {
            arrival[k][0] = origin[k];
        }
        let mut p = Pipeline {
            inst,
            cfg,
            station: 0,
            entry: vec![origin],
            arrival_order: vec![inst.origin_arrival_order()],
            arrival,
            departure: vec![vec![0; i_n]; k_n],
            track: vec![vec![0; i_n]; k_n],
            dep_order: Vec::with_capacity(i_n),
            complete: false,
        };
        if i_n == 1 {
            p.run_terminal()?;
        }
        Ok(p)
    }

    fn resume(inst: &'a Instance, cfg: TimetableConfig, from: &Schedule, station: usize) -> Self {
        let sol = &from.solution;
        Pipeline {
            inst,
            cfg,
            station,
            entry: from.entry[..=station].to_vec(),
            arrival_order: from.arrival_order[..=station].to_vec(),
            arrival: sol.arrival.clone(),
            departure: sol.departure.clone(),
            track: sol.track.clone(),
            dep_order: sol.dep_order[..station].to_vec(),
            complete: false,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Station whose departure order is decided next.
    pub fn station(&self) -> usize {
        self.station
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Order in which trains reach the current station.
    pub fn arrival_order(&self) -> &[TrainId] {
        &self.arrival_order[self.station]
    }

    /// Arrivals at the current station before track admission.
    pub fn entry_arrivals(&self) -> &[Minutes] {
        &self.entry[self.station]
    }

    /// Arrival times decided so far; stations beyond the frontier are unset.
    pub fn arrivals(&self) -> &[Vec<Minutes>] {
        &self.arrival
    }

    fn apply(&mut self, t: &StationTiming) {
        let s = t.station;
        let tracked = s > 0;
        for k in self.inst.trains() {
            self.arrival[k][s] = t.arrival[k];
            self.departure[k][s] = t.departure[k];
            self.track[k][s] = if tracked { t.track[k] } else { 0 };
            if let Some(next) = &t.next_arrival {
                self.arrival[k][s + 1] = next[k];
            }
        }
    }

    /// Times the current station with departure `order`.
    pub fn commit(&mut self, order: &[TrainId]) -> Result<StationTiming, TimetableError> {
        assert!(!self.complete, "pipeline already complete");
        let s = self.station;
        check_permutation(order, self.inst.num_trains, s)?;
        let timing = timetable_station(self.inst, s, &self.entry[s], &self.arrival_order[s], order, &self.cfg)?;
        self.apply(&timing);
        self.dep_order.push(order.to_vec());
        self.entry.push(timing.next_arrival.clone().expect("not terminal"));
        self.arrival_order.push(order.to_vec());
        self.station += 1;
        if self.inst.is_terminal(self.station) {
            self.run_terminal()?;
        }
        Ok(timing)
    }

    fn run_terminal(&mut self) -> Result<(), TimetableError> {
        let s = self.station;
        let order = self.arrival_order[s].clone();
        let timing = timetable_station(self.inst, s, &self.entry[s], &order, &order, &self.cfg)?;
        self.apply(&timing);
        self.dep_order.push(order);
        self.complete = true;
        Ok(())
    }

    pub fn finish(self) -> Schedule {
        assert!(self.complete, "pipeline finished before every section was decided");
        Schedule {
            solution: Solution {
                arrival: self.arrival,
                departure: self.departure,
                dep_order: self.dep_order,
                track: self.track,
            },
            entry: self.entry,
            arrival_order: self.arrival_order,
            cfg: self.cfg,
        }
    }
}

/// A complete solution together with the intermediate state needed to
/// re-time it from any station onward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub solution: Solution,
    /// Arrivals at each station before track admission.
    pub entry: Vec<Vec<Minutes>>,
    /// Order in which trains reach each station.
    pub arrival_order: Vec<Vec<TrainId>>,
    pub cfg: TimetableConfig,
}

impl Schedule {
    /// Times the instance with the given departure order per decided station
    /// (`num_stations - 1` orders).
    pub fn build(inst: &Instance, cfg: TimetableConfig, orders: &[Vec<TrainId>]) -> Result<Schedule, TimetableError> {
        assert_eq!(orders.len(), inst.num_stations - 1, "one order per section");
        let mut p = Pipeline::new(inst, cfg)?;
        for o in orders {
            p.commit(o)?;
        }
        Ok(p.finish())
    }

    /// Decided departure orders (all stations but the terminal).
    pub fn decided_orders(&self) -> &[Vec<TrainId>] {
        let n = self.solution.dep_order.len();
        &self.solution.dep_order[..n - 1]
    }

    /// Replaces the order at `station` and re-times from there, reusing the
    /// stored timetable once a downstream station sees unchanged input.
    pub fn with_order(&self, inst: &Instance, station: usize, order: &[TrainId]) -> Result<Schedule, TimetableError> {
        assert!(station + 1 < inst.num_stations, "terminal order is not a decision");
        let mut p = Pipeline::resume(inst, self.cfg, self, station);
        p.commit(order)?;
        while !p.is_complete() {
            let s = p.station();
            if p.entry[s] == self.entry[s] && p.arrival_order[s] == self.arrival_order[s] {
                return Ok(self.splice(p, s));
            }
            let o = self.solution.dep_order[s].clone();
            p.commit(&o)?;
        }
        Ok(p.finish())
    }

    fn splice(&self, p: Pipeline<'_>, from: usize) -> Schedule {
        let mut sol = Solution { arrival: p.arrival, departure: p.departure, dep_order: p.dep_order, track: p.track };
        for k in 0..sol.arrival.len() {
            for i in from..sol.arrival[k].len() {
                sol.arrival[k][i] = self.solution.arrival[k][i];
                sol.departure[k][i] = self.solution.departure[k][i];
                sol.track[k][i] = self.solution.track[k][i];
            }
        }
        sol.dep_order.extend_from_slice(&self.solution.dep_order[from..]);
        let mut entry = p.entry;
        entry.extend_from_slice(&self.entry[from + 1..]);
        let mut arrival_order = p.arrival_order;
        arrival_order.extend_from_slice(&self.arrival_order[from + 1..]);
        Schedule { solution: sol, entry, arrival_order, cfg: self.cfg }
    }
}
