use std::collections::VecDeque;

use rand::{Rng, SeedableRng};

use super::demand::{schedule_demand, Insertion};
use super::idm::idm_acceleration;
use super::mobil::{mobil_decision, Follower, LaneDecision, LaneNeighbors, Leader, Subject};
use super::{
    Corridor, Destination, DetectorReading, DynamicsParams, EntryRecord, Origin, Passage, RampKind,
    SimError, SimOutput, SimParams, TraceSample, TripTrace,
};
use crate::config::ScenarioConfig;
use crate::fleet::{VehicleId, VehicleSpec};
use crate::rng::{SeedStreams, Stream, StreamRng};

/// Below this speed a vehicle counts as standing still.
const STALL_SPEED: f64 = 0.1;

#[derive(Debug, Clone)]
struct Active {
    id: VehicleId,
    dynamics: DynamicsParams,
    lane: usize,
    position: f64,
    speed: f64,
    exit_position: f64,
    last_change: f64,
    stalled_since: Option<f64>,
    samples: Vec<TraceSample>,
}

#[derive(Debug, Clone)]
struct Queued {
    scheduled_time: f64,
    spec: VehicleSpec,
}

/// Read-only snapshot of one active vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleView {
    pub id: VehicleId,
    pub lane: usize,
    pub position: f64,
    pub speed: f64,
    pub desired_speed: f64,
}

/// Simulation state. Each [`World::step`] runs the lane-change phase, the
/// acceleration phase and a ballistic position update, then retires vehicles
/// that reached their exit and checks that no two vehicles overlap.
#[derive(Debug, Clone)]
pub struct World {
    corridor: Corridor,
    params: SimParams,
    routing: StreamRng,
    /// (ramp index, position, exit share), sorted by position.
    off_ramps: Vec<(usize, f64, f64)>,
    time: f64,
    vehicles: Vec<Active>,
    pending: VecDeque<(Insertion, VehicleSpec)>,
    main_queue: VecDeque<Queued>,
    /// Indexed like `corridor.ramps`; only on-ramp queues are ever filled.
    ramp_queues: Vec<VecDeque<Queued>>,
    traces: Vec<TripTrace>,
    passages: Vec<Passage>,
    entries: Vec<EntryRecord>,
    scheduled: usize,
    inserted: usize,
    aborted: usize,
}

impl World {
    pub fn new(corridor: Corridor, params: SimParams, routing_seed: u64) -> Result<Self, SimError> {
        corridor.validate().map_err(|e| e.within("corridor"))?;
        params.validate().map_err(|e| e.within("sim"))?;
        let mut off_ramps: Vec<(usize, f64, f64)> = corridor
            .ramps
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RampKind::Off)
            .map(|(i, r)| (i, r.position, r.demand_share))
            .collect();
        off_ramps.sort_by(|a, b| a.1.total_cmp(&b.1));
        let ramp_queues = vec![VecDeque::new(); corridor.ramps.len()];
        Ok(Self {
            corridor,
            params,
            routing: StreamRng::seed_from_u64(routing_seed),
            off_ramps,
            time: 0.0,
            vehicles: Vec::new(),
            pending: VecDeque::new(),
            main_queue: VecDeque::new(),
            ramp_queues,
            traces: Vec::new(),
            passages: Vec::new(),
            entries: Vec::new(),
            scheduled: 0,
            inserted: 0,
            aborted: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    pub fn vehicles(&self) -> impl Iterator<Item = VehicleView> + '_ {
        self.vehicles.iter().map(|v| VehicleView {
            id: v.id,
            lane: v.lane,
            position: v.position,
            speed: v.speed,
            desired_speed: v.dynamics.desired_speed,
        })
    }

    pub fn completed(&self) -> &[TripTrace] {
        &self.traces
    }

    /// No vehicle on the road, waiting in a queue or scheduled for later.
    pub fn is_idle(&self) -> bool {
        self.vehicles.is_empty()
            && self.pending.is_empty()
            && self.main_queue.is_empty()
            && self.ramp_queues.iter().all(VecDeque::is_empty)
    }

    /// Schedules a vehicle; it joins its origin's queue once simulated time
    /// reaches `insertion.time`.
    pub fn enqueue(&mut self, insertion: Insertion, spec: VehicleSpec) {
        let at = self
            .pending
            .partition_point(|(other, _)| other.time <= insertion.time);
        self.pending.insert(at, (insertion, spec));
        self.scheduled += 1;
    }

    /// Places a vehicle directly on the road, bypassing demand and gap
    /// acceptance. Only overlap with an existing vehicle is rejected.
    pub fn spawn(
        &mut self,
        spec: &VehicleSpec,
        lane: usize,
        position: f64,
        speed: f64,
        destination: Destination,
    ) -> Result<(), SimError> {
        let invalid = |reason: String| SimError::InvalidPlacement {
            id: spec.id,
            reason,
        };
        if lane >= self.corridor.lane_count {
            return Err(invalid(format!("lane {lane} does not exist")));
        }
        if !(0.0..self.corridor.length).contains(&position) {
            return Err(invalid(format!("position {position} is off the corridor")));
        }
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(invalid(format!("speed {speed} is invalid")));
        }
        let exit_position = match destination {
            Destination::End => self.corridor.length,
            Destination::Ramp(i) => match self.corridor.ramps.get(i) {
                Some(r) if r.kind == RampKind::Off && r.position > position => r.position,
                _ => return Err(invalid(format!("ramp {i} is not a downstream off-ramp"))),
            },
        };
        let len = self.params.vehicle_length;
        let overlaps = self
            .vehicles
            .iter()
            .filter(|v| v.lane == lane)
            .any(|v| (v.position - position).abs() <= len);
        if overlaps {
            return Err(invalid("overlaps another vehicle".to_string()));
        }
        self.place(spec, lane, position, speed, exit_position);
        Ok(())
    }

    fn place(&mut self, spec: &VehicleSpec, lane: usize, position: f64, speed: f64, exit: f64) {
        self.vehicles.push(Active {
            id: spec.id,
            dynamics: spec.dynamics,
            lane,
            position,
            speed,
            exit_position: exit,
            last_change: f64::NEG_INFINITY,
            stalled_since: None,
            samples: vec![TraceSample {
                t: self.time,
                position,
                lane,
                speed,
            }],
        });
        self.inserted += 1;
    }

    /// Advances the world by `dt` seconds.
    pub fn step(&mut self, dt: f64) -> Result<(), SimError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        self.release_due();
        self.insert_queued();
        let mut lanes = self.lane_order();
        self.change_lanes(&mut lanes);
        let accels = self.accelerations(&lanes)?;
        self.integrate(dt, &accels);
        self.time += dt;
        self.retire();
        self.check_gaps()
    }

    pub fn finish(self) -> SimOutput {
        let readings = aggregate_readings(
            &self.corridor.detector_stations,
            self.params.detector_window,
            self.time,
            &self.passages,
        );
        let unserved = self.pending.len()
            + self.main_queue.len()
            + self.ramp_queues.iter().map(VecDeque::len).sum::<usize>();
        SimOutput {
            completed: self.traces.len(),
            active: self.vehicles.len(),
            traces: self.traces,
            readings,
            passages: self.passages,
            entries: self.entries,
            scheduled: self.scheduled,
            inserted: self.inserted,
            aborted: self.aborted,
            unserved,
            end_time: self.time,
        }
    }

    fn release_due(&mut self) {
        while self
            .pending
            .front()
            .is_some_and(|(ins, _)| ins.time <= self.time + 1e-9)
        {
            let (ins, spec) = self.pending.pop_front().expect("front checked");
            let queued = Queued {
                scheduled_time: ins.time,
                spec,
            };
            match ins.origin {
                Origin::Ramp(i) if i < self.ramp_queues.len() => {
                    self.ramp_queues[i].push_back(queued)
                }
                _ => self.main_queue.push_back(queued),
            }
        }
    }

    /// Rearmost vehicle of each lane.
    fn lane_tails(&self) -> Vec<Option<usize>> {
        let mut tails: Vec<Option<usize>> = vec![None; self.corridor.lane_count];
        for (i, v) in self.vehicles.iter().enumerate() {
            let tail = &mut tails[v.lane];
            if tail.is_none_or(|t| v.position < self.vehicles[t].position) {
                *tail = Some(i);
            }
        }
        tails
    }

    fn insert_queued(&mut self) {
        let len = self.params.vehicle_length;
        while let Some(front) = self.main_queue.front() {
            let dyn_ = front.spec.dynamics;
            let tails = self.lane_tails();
            let mut best: Option<(usize, f64, f64)> = None;
            for (lane, tail) in tails.iter().enumerate() {
                let (gap, speed) = match tail {
                    None => (f64::INFINITY, dyn_.desired_speed),
                    Some(t) => {
                        let rear = &self.vehicles[*t];
                        let gap = rear.position - len;
                        let v = dyn_.desired_speed.min(rear.speed);
                        if gap <= dyn_.min_gap {
                            continue;
                        }
                        match idm_acceleration(v, gap, v - rear.speed, &dyn_) {
                            Ok(acc) if acc >= -dyn_.comfortable_decel => (gap, v),
                            _ => continue,
                        }
                    }
                };
                if best.is_none_or(|(_, g, _)| gap > g) {
                    best = Some((lane, gap, speed));
                }
            }
            let Some((lane, _, speed)) = best else { break };
            let queued = self.main_queue.pop_front().expect("front checked");
            self.admit(queued, Origin::Main, lane, 0.0, speed);
        }

        for ramp in 0..self.ramp_queues.len() {
            let position = self.corridor.ramps[ramp].position;
            while let Some(front) = self.ramp_queues[ramp].front() {
                let Some(speed) = self.ramp_entry_speed(&front.spec.dynamics, position) else {
                    break;
                };
                let queued = self.ramp_queues[ramp].pop_front().expect("front checked");
                self.admit(queued, Origin::Ramp(ramp), 0, position, speed);
            }
        }
    }

    /// Entry speed for a merge into the rightmost lane at `position`, or
    /// `None` when the gap is not acceptable.
    fn ramp_entry_speed(&self, dyn_: &DynamicsParams, position: f64) -> Option<f64> {
        if position >= self.corridor.length {
            return None;
        }
        let len = self.params.vehicle_length;
        let mut leader: Option<&Active> = None;
        let mut follower: Option<&Active> = None;
        for v in self.vehicles.iter().filter(|v| v.lane == 0) {
            if v.position >= position {
                if leader.is_none_or(|l| v.position < l.position) {
                    leader = Some(v);
                }
            } else if follower.is_none_or(|f| v.position > f.position) {
                follower = Some(v);
            }
        }
        let speed = match leader {
            None => dyn_.desired_speed,
            Some(l) => {
                let gap = l.position - len - position;
                let v = dyn_.desired_speed.min(l.speed);
                if gap <= dyn_.min_gap {
                    return None;
                }
                let acc = idm_acceleration(v, gap, v - l.speed, dyn_).ok()?;
                if acc < -dyn_.comfortable_decel {
                    return None;
                }
                v
            }
        };
        if let Some(f) = follower {
            let gap = position - len - f.position;
            if gap <= 0.0 {
                return None;
            }
            let acc = idm_acceleration(f.speed, gap, f.speed - speed, &f.dynamics).ok()?;
            if acc < -self.params.safe_decel {
                return None;
            }
        }
        Some(speed)
    }

    fn admit(&mut self, queued: Queued, origin: Origin, lane: usize, position: f64, speed: f64) {
        let destination = self.route(position);
        let exit = match destination {
            Destination::End => self.corridor.length,
            Destination::Ramp(i) => self.corridor.ramps[i].position,
        };
        self.entries.push(EntryRecord {
            vehicle_id: queued.spec.id,
            scheduled_time: queued.scheduled_time,
            time: self.time,
            origin,
            destination,
        });
        self.place(&queued.spec, lane, position, speed, exit);
    }

    /// Each downstream off-ramp takes its share of the traffic passing it.
    fn route(&mut self, entry_position: f64) -> Destination {
        for &(ramp, position, share) in &self.off_ramps {
            if position <= entry_position {
                continue;
            }
            if self.routing.random::<f64>() < share {
                return Destination::Ramp(ramp);
            }
        }
        Destination::End
    }

    /// Vehicle indices per lane, front-most first.
    fn lane_order(&self) -> Vec<Vec<usize>> {
        let mut lanes = vec![Vec::new(); self.corridor.lane_count];
        for (i, v) in self.vehicles.iter().enumerate() {
            lanes[v.lane].push(i);
        }
        for lane in &mut lanes {
            lane.sort_by(|&a, &b| {
                let (va, vb) = (&self.vehicles[a], &self.vehicles[b]);
                vb.position.total_cmp(&va.position).then(va.id.cmp(&vb.id))
            });
        }
        lanes
    }

    fn leader_of(&self, idx: usize, x: f64) -> Leader {
        let other = &self.vehicles[idx];
        Leader {
            gap: other.position - self.params.vehicle_length - x,
            speed: other.speed,
        }
    }

    fn follower_of(&self, idx: usize, x: f64) -> Follower {
        let other = &self.vehicles[idx];
        Follower {
            gap: x - self.params.vehicle_length - other.position,
            speed: other.speed,
            params: other.dynamics,
        }
    }

    fn neighbors_in(&self, lane: &[usize], x: f64) -> LaneNeighbors {
        let split = lane.partition_point(|&j| self.vehicles[j].position >= x);
        LaneNeighbors {
            leader: split.checked_sub(1).map(|k| self.leader_of(lane[k], x)),
            follower: lane.get(split).map(|&j| self.follower_of(j, x)),
        }
    }

    fn change_lanes(&mut self, lanes: &mut [Vec<usize>]) {
        let mut order: Vec<usize> = (0..self.vehicles.len()).collect();
        order.sort_by(|&a, &b| {
            let (va, vb) = (&self.vehicles[a], &self.vehicles[b]);
            vb.position.total_cmp(&va.position).then(va.id.cmp(&vb.id))
        });
        let lane_count = self.corridor.lane_count;
        for i in order {
            let v = &self.vehicles[i];
            if self.time - v.last_change < self.params.lane_change_cooldown {
                continue;
            }
            let (lane, x) = (v.lane, v.position);
            let k = lanes[lane].partition_point(|&j| self.vehicles[j].position > x);
            debug_assert_eq!(lanes[lane][k], i);
            let current = LaneNeighbors {
                leader: k.checked_sub(1).map(|p| self.leader_of(lanes[lane][p], x)),
                follower: lanes[lane].get(k + 1).map(|&j| self.follower_of(j, x)),
            };
            let left = (lane + 1 < lane_count).then(|| self.neighbors_in(&lanes[lane + 1], x));
            let right = (lane > 0).then(|| self.neighbors_in(&lanes[lane - 1], x));
            let subject = Subject {
                speed: v.speed,
                params: v.dynamics,
            };
            let target = match mobil_decision(
                &subject,
                &current,
                left.as_ref(),
                right.as_ref(),
                self.params.safe_decel,
                self.params.vehicle_length,
            ) {
                LaneDecision::Stay => continue,
                LaneDecision::ChangeLeft => lane + 1,
                LaneDecision::ChangeRight => lane - 1,
            };
            lanes[lane].remove(k);
            let at = lanes[target].partition_point(|&j| self.vehicles[j].position > x);
            lanes[target].insert(at, i);
            let v = &mut self.vehicles[i];
            v.lane = target;
            v.last_change = self.time;
        }
    }

    fn accelerations(&self, lanes: &[Vec<usize>]) -> Result<Vec<f64>, SimError> {
        let mut accels = vec![0.0; self.vehicles.len()];
        for (lane_idx, lane) in lanes.iter().enumerate() {
            for (k, &i) in lane.iter().enumerate() {
                let v = &self.vehicles[i];
                let acc = match k.checked_sub(1).map(|p| lane[p]) {
                    None => idm_acceleration(v.speed, f64::INFINITY, 0.0, &v.dynamics)?,
                    Some(l) => {
                        let leader = self.leader_of(l, v.position);
                        idm_acceleration(v.speed, leader.gap, v.speed - leader.speed, &v.dynamics)
                            .map_err(|e| match e {
                            SimError::NonPositiveGap { gap } => SimError::Collision {
                                time: self.time,
                                lane: lane_idx,
                                leader: self.vehicles[l].id,
                                follower: v.id,
                                gap,
                            },
                            other => other,
                        })?
                    }
                };
                accels[i] = acc;
            }
        }
        Ok(accels)
    }

    fn integrate(&mut self, dt: f64, accels: &[f64]) {
        let t0 = self.time;
        let stations = &self.corridor.detector_stations;
        for (v, &acc) in self.vehicles.iter_mut().zip(accels) {
            let (x0, v0) = (v.position, v.speed);
            let mut v1 = v0 + acc * dt;
            let dx = if v1 < 0.0 {
                v1 = 0.0;
                -v0 * v0 / (2.0 * acc)
            } else {
                v0 * dt + 0.5 * acc * dt * dt
            };
            let x1 = x0 + dx.max(0.0);
            if x1 > x0 {
                for (station, &s) in stations.iter().enumerate() {
                    if x0 <= s && s < x1 && s < v.exit_position {
                        let f = (s - x0) / (x1 - x0);
                        self.passages.push(Passage {
                            station,
                            time: t0 + f * dt,
                            vehicle_id: v.id,
                            speed: v0 + f * (v1 - v0),
                        });
                    }
                }
            }
            v.position = x1;
            v.speed = v1;
            v.samples.push(TraceSample {
                t: t0 + dt,
                position: x1,
                lane: v.lane,
                speed: v1,
            });
        }
    }

    fn retire(&mut self) {
        let now = self.time;
        let teleport_after = self.params.teleport_after;
        let mut kept = Vec::with_capacity(self.vehicles.len());
        for mut v in std::mem::take(&mut self.vehicles) {
            if v.position >= v.exit_position {
                if let Some(trace) = TripTrace::from_samples(v.id, v.samples) {
                    self.traces.push(trace);
                }
                continue;
            }
            if v.speed < STALL_SPEED {
                let since = *v.stalled_since.get_or_insert(now);
                if now - since >= teleport_after {
                    self.aborted += 1;
                    continue;
                }
            } else {
                v.stalled_since = None;
            }
            kept.push(v);
        }
        self.vehicles = kept;
    }

    fn check_gaps(&self) -> Result<(), SimError> {
        let len = self.params.vehicle_length;
        for (lane_idx, lane) in self.lane_order().iter().enumerate() {
            for pair in lane.windows(2) {
                let (leader, follower) = (&self.vehicles[pair[0]], &self.vehicles[pair[1]]);
                let gap = leader.position - len - follower.position;
                if !(gap > 0.0) {
                    return Err(SimError::Collision {
                        time: self.time,
                        lane: lane_idx,
                        leader: leader.id,
                        follower: follower.id,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Tumbling-window aggregation of detector passages, station-major.
pub fn aggregate_readings(
    stations: &[f64],
    window: f64,
    end_time: f64,
    passages: &[Passage],
) -> Vec<DetectorReading> {
    if !(end_time > 0.0) || !(window > 0.0) {
        return Vec::new();
    }
    let windows = (end_time / window).ceil() as usize;
    let mut counts = vec![0u64; stations.len() * windows];
    let mut sums = vec![0.0f64; stations.len() * windows];
    for p in passages {
        let w = ((p.time / window).floor() as usize).min(windows - 1);
        let cell = p.station * windows + w;
        counts[cell] += 1;
        sums[cell] += p.speed;
    }
    let mut readings = Vec::with_capacity(counts.len());
    for (s, &station) in stations.iter().enumerate() {
        for w in 0..windows {
            let cell = s * windows + w;
            let count = counts[cell];
            readings.push(DetectorReading {
                station,
                window_start: w as f64 * window,
                window_len: window,
                count,
                mean_speed: (count > 0).then(|| sums[cell] / count as f64),
            });
        }
    }
    readings
}

/// Runs an explicit insertion schedule. The `k`-th insertion uses `fleet[k]`.
/// Stops once everything has left the road or at `horizon + drain`.
pub fn run_schedule(
    config: &ScenarioConfig,
    schedule: &[Insertion],
    fleet: &[VehicleSpec],
    routing_seed: u64,
) -> Result<SimOutput, SimError> {
    if fleet.len() < schedule.len() {
        return Err(SimError::InsufficientFleet {
            fleet: fleet.len(),
            scheduled: schedule.len(),
        });
    }
    let mut world = World::new(config.corridor.clone(), config.sim, routing_seed)?;
    for (insertion, spec) in schedule.iter().zip(fleet) {
        world.enqueue(*insertion, spec.clone());
    }
    let end = config.scenario.horizon + config.scenario.drain;
    let dt = config.sim.dt;
    while world.time() < end - 1e-9 && !world.is_idle() {
        world.step(dt)?;
    }
    Ok(world.finish())
}

/// Schedules demand from the config's seed and runs it with `fleet`.
pub fn run(config: &ScenarioConfig, fleet: &[VehicleSpec]) -> Result<SimOutput, SimError> {
    let streams = SeedStreams::new(config.seed);
    let schedule = schedule_demand(
        &config.corridor,
        config.scenario.horizon,
        config.scenario.emission_interval,
        config.scenario.batch_size,
        &mut streams.rng(Stream::Demand),
    );
    run_schedule(
        config,
        &schedule.insertions,
        fleet,
        streams.seed(Stream::Routing),
    )
}
