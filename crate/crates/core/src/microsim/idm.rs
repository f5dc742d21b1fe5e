use super::{DynamicsParams, SimError};

/// Strongest deceleration the car-following model may return, m/s².
pub const EMERGENCY_DECEL: f64 = 8.0;

/// Intelligent Driver Model acceleration.
///
/// `gap` is the bumper-to-bumper distance to the leader (`f64::INFINITY` on
/// a free road) and `dv` the closing speed `v - v_leader`. The dynamic part
/// of the desired gap, `v·T + v·dv / (2√(ab))`, is floored at zero so a
/// faster leader never pulls the follower forward. The result lies in
/// `[-EMERGENCY_DECEL, a]`.
pub fn idm_acceleration(
    v: f64,
    gap: f64,
    dv: f64,
    params: &DynamicsParams,
) -> Result<f64, SimError> {
    if !v.is_finite() || !dv.is_finite() || gap.is_nan() {
        return Err(SimError::NonFinite {
            what: "idm_acceleration",
        });
    }
    if gap <= 0.0 {
        return Err(SimError::NonPositiveGap { gap });
    }
    let v = v.max(0.0);
    let a = params.max_accel;
    let free = 1.0 - (v / params.desired_speed).powf(params.accel_exponent);
    let interaction = if gap.is_infinite() {
        0.0
    } else {
        let dynamic = v * params.headway + v * dv / (2.0 * (a * params.comfortable_decel).sqrt());
        let desired_gap = params.min_gap + dynamic.max(0.0);
        (desired_gap / gap).powi(2)
    };
    Ok((a * (free - interaction)).max(-EMERGENCY_DECEL))
}
