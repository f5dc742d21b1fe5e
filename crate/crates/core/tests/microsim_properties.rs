//! Property tests for car following, lane changing, demand and whole runs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twinway::microsim::{
    idm_acceleration, mobil_decision, run, schedule_demand, Follower, LaneDecision, LaneNeighbors,
    Leader, Origin, Subject,
};
use twinway::{Corridor, DynamicsParams, ScenarioConfig};

const EMERGENCY: f64 = 8.0;

proptest! {
    #[test]
    fn idm_is_bounded(v in 0.0..40.0f64, gap in 0.01..500.0f64, dv in -20.0..20.0f64) {
        let p = DynamicsParams::default();
        let a = idm_acceleration(v, gap, dv, &p).unwrap();
        prop_assert!(a.is_finite());
        prop_assert!(a <= p.max_accel);
        prop_assert!(a >= -EMERGENCY);
    }

    #[test]
    fn idm_is_monotone_in_gap(v in 0.0..40.0f64, gap in 0.5..300.0f64, extra in 0.0..100.0f64, dv in -10.0..10.0f64) {
        let p = DynamicsParams::default();
        let near = idm_acceleration(v, gap, dv, &p).unwrap();
        let far = idm_acceleration(v, gap + extra, dv, &p).unwrap();
        prop_assert!(far >= near - 1e-12);
    }

    #[test]
    fn idm_brakes_harder_when_closing(v in 0.0..40.0f64, gap in 0.5..300.0f64, dv in 0.0..10.0f64, more in 0.0..10.0f64) {
        let p = DynamicsParams::default();
        let a = idm_acceleration(v, gap, dv, &p).unwrap();
        let b = idm_acceleration(v, gap, dv + more, &p).unwrap();
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn free_road_never_exceeds_desired_speed(v in 0.0..33.33f64) {
        let p = DynamicsParams::default();
        let a = idm_acceleration(v, f64::INFINITY, 0.0, &p).unwrap();
        prop_assert!(v + a * 0.5 <= p.desired_speed + 1e-9);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn mobil_never_accepts_unsafe_follower(
        v in 5.0..35.0f64,
        lead_gap in 5.0..60.0f64,
        fol_gap in 0.1..8.0f64,
        fol_speed in 20.0..40.0f64,
    ) {
        let p = DynamicsParams::default();
        let subject = Subject { speed: v, params: p };
        let current = LaneNeighbors { leader: Some(Leader { gap: lead_gap, speed: 0.0 }), follower: None };
        let target = LaneNeighbors {
            leader: None,
            follower: Some(Follower { gap: fol_gap, speed: fol_speed, params: p }),
        };
        let new_follower_accel = idm_acceleration(fol_speed, fol_gap, fol_speed - v, &p).unwrap();
        let d = mobil_decision(&subject, &current, Some(&target), None, 3.0, 5.0);
        if new_follower_accel < -3.0 {
            prop_assert_eq!(d, LaneDecision::Stay);
        }
    }

    #[test]
    fn demand_schedule_shape(
        horizon in 0.0..2000.0f64,
        idx in 0usize..4,
        batch in 1u32..12,
        seed in any::<u64>(),
    ) {
        let interval = [10.0, 40.0, 80.0, 100.0][idx];
        let corridor = Corridor::default();
        let s = schedule_demand(&corridor, horizon, interval, batch, &mut ChaCha8Rng::seed_from_u64(seed));
        let batches = if horizon > 0.0 { (horizon / interval).ceil() as usize } else { 0 };
        prop_assert_eq!(s.len(), batches * batch as usize);
        prop_assert!(!s.non_standard_interval);
        for w in s.insertions.windows(2) {
            prop_assert!(w[0].time <= w[1].time);
        }
        for ins in &s.insertions {
            prop_assert!(ins.time < horizon);
            prop_assert!((ins.time / interval).fract() == 0.0);
            if let Origin::Ramp(i) = ins.origin {
                prop_assert_eq!(corridor.ramps[i].kind, twinway::microsim::RampKind::On);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_conserve_vehicles_and_repeat(
        seed in any::<u64>(),
        idx in 0usize..4,
        penetration in 0.0..=1.0f64,
        batch in 1u32..10,
    ) {
        let mut config = ScenarioConfig { seed, ..ScenarioConfig::default() };
        config.scenario.horizon = 600.0;
        config.scenario.emission_interval = [10.0, 40.0, 80.0, 100.0][idx];
        config.scenario.batch_size = batch;
        config.scenario.ev_penetration = penetration;
        let gt = twinway::twin::run_physical(&config, seed).unwrap();
        let out = &gt.output;
        prop_assert_eq!(out.scheduled, out.inserted + out.unserved);
        prop_assert_eq!(out.inserted, out.completed + out.active + out.aborted);
        prop_assert_eq!(out.entries.len(), out.inserted);
        let evs = gt.fleet.iter().filter(|s| s.powertrain.kind() == twinway::PowertrainKind::Ev).count();
        prop_assert_eq!(evs, twinway::fleet::ev_count(gt.fleet.len(), penetration));
        for t in &out.traces {
            // A trace ends at the first sample past its exit, so it may
            // overrun the corridor by at most one step of travel.
            let overrun = config.corridor.speed_limit * config.sim.dt;
            prop_assert!(t.trip_length > 0.0 && t.trip_length <= config.corridor.length + overrun);
            prop_assert!(t.mean_speed <= config.corridor.speed_limit + 1e-9);
            for w in t.samples.windows(2) {
                prop_assert!(w[1].position >= w[0].position);
            }
        }
        prop_assert_eq!(twinway::twin::run_physical(&config, seed).unwrap(), gt);
    }

    #[test]
    fn run_uses_config_seed(seed in any::<u64>()) {
        let mut config = ScenarioConfig { seed, ..ScenarioConfig::default() };
        config.scenario.horizon = 200.0;
        let gt = twinway::twin::run_physical(&config, seed).unwrap();
        let out = run(&config, &gt.fleet).unwrap();
        prop_assert_eq!(out, gt.output);
    }
}
