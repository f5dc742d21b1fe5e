//! MOBIL lane-change decision: incentive with politeness, plus a safety
//! bound on the deceleration imposed on the new follower.

use super::idm::idm_acceleration;
use super::DynamicsParams;

/// The vehicle considering a change.
#[derive(Debug, Clone, Copy)]
pub struct Subject {
    pub speed: f64,
    pub params: DynamicsParams,
}

/// Gap is bumper-to-bumper, seen from the subject.
#[derive(Debug, Clone, Copy)]
pub struct Leader {
    pub gap: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Follower {
    pub gap: f64,
    pub speed: f64,
    pub params: DynamicsParams,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LaneNeighbors {
    pub leader: Option<Leader>,
    pub follower: Option<Follower>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneDecision {
    Stay,
    ChangeLeft,
    ChangeRight,
}

fn accel_behind(v: f64, params: &DynamicsParams, leader: Option<(f64, f64)>) -> Option<f64> {
    match leader {
        None => idm_acceleration(v, f64::INFINITY, 0.0, params).ok(),
        Some((gap, leader_speed)) => idm_acceleration(v, gap, v - leader_speed, params).ok(),
    }
}

/// Net MOBIL incentive for moving into `target`, or `None` if the move is
/// unsafe or geometrically impossible.
fn incentive(
    subject: &Subject,
    current: &LaneNeighbors,
    target: &LaneNeighbors,
    safe_decel: f64,
    vehicle_length: f64,
) -> Option<f64> {
    let v = subject.speed;
    let p = &subject.params;
    let as_pair = |l: &Option<Leader>| l.map(|l| (l.gap, l.speed));

    if target.leader.is_some_and(|l| l.gap <= 0.0) || target.follower.is_some_and(|f| f.gap <= 0.0)
    {
        return None;
    }

    let own_now = accel_behind(v, p, as_pair(&current.leader))?;
    let own_after = accel_behind(v, p, as_pair(&target.leader))?;
    if own_after < -safe_decel {
        return None;
    }

    let (new_follower_gain, new_follower_after) = match &target.follower {
        None => (0.0, None),
        Some(f) => {
            let through = target
                .leader
                .map(|l| (f.gap + vehicle_length + l.gap, l.speed));
            let before = accel_behind(f.speed, &f.params, through)?;
            let after = accel_behind(f.speed, &f.params, Some((f.gap, v)))?;
            (after - before, Some(after))
        }
    };
    if new_follower_after.is_some_and(|a| a < -safe_decel) {
        return None;
    }

    let old_follower_gain = match &current.follower {
        None => 0.0,
        Some(f) => {
            let before = accel_behind(f.speed, &f.params, Some((f.gap, v)))?;
            let through = current
                .leader
                .map(|l| (f.gap + vehicle_length + l.gap, l.speed));
            let after = accel_behind(f.speed, &f.params, through)?;
            after - before
        }
    };

    Some(own_after - own_now + p.politeness * (new_follower_gain + old_follower_gain))
}

/// Chooses between staying and changing to an adjacent lane. Lanes that do
/// not exist are passed as `None`. When both sides qualify the larger
/// incentive wins, ties going right.
pub fn mobil_decision(
    subject: &Subject,
    current: &LaneNeighbors,
    left: Option<&LaneNeighbors>,
    right: Option<&LaneNeighbors>,
    safe_decel: f64,
    vehicle_length: f64,
) -> LaneDecision {
    let threshold = subject.params.lane_change_threshold;
    let score = |target: Option<&LaneNeighbors>| {
        target
            .and_then(|t| incentive(subject, current, t, safe_decel, vehicle_length))
            .filter(|gain| *gain > threshold)
    };
    match (score(left), score(right)) {
        (None, None) => LaneDecision::Stay,
        (Some(_), None) => LaneDecision::ChangeLeft,
        (None, Some(_)) => LaneDecision::ChangeRight,
        (Some(l), Some(r)) if l > r => LaneDecision::ChangeLeft,
        _ => LaneDecision::ChangeRight,
    }
}
