use std::f64::consts::TAU;

use rand::Rng;

use super::{BehaviorConfig, BehaviorError, GazePoint};

/// Maps three uniforms in [0, 1) to a point in the hollow cylinder.
///
/// The radius uses the inverse CDF of the area-weighted radial density,
/// `r = sqrt(u * (R_out^2 - R_in^2) + R_in^2)`, so points are uniform over
/// the volume rather than uniform in `r`.
pub fn gaze_point_from_uniforms(
    angle_u: f64,
    radius_u: f64,
    depth_u: f64,
    config: &BehaviorConfig,
) -> GazePoint {
    let inner2 = config.gaze_inner_radius_m.powi(2);
    let outer2 = config.gaze_outer_radius_m.powi(2);
    let theta = TAU * angle_u;
    let r = (radius_u * (outer2 - inner2) + inner2).sqrt();
    let z = config.gaze_width_m * (depth_u - 0.5);
    GazePoint {
        x: r * theta.cos(),
        y: r * theta.sin(),
        z,
    }
}

pub fn sample_gaze_point<R: Rng + ?Sized>(
    rng: &mut R,
    config: &BehaviorConfig,
) -> Result<GazePoint, BehaviorError> {
    config.validate()?;
    let angle_u: f64 = rng.random();
    let radius_u: f64 = rng.random();
    let depth_u: f64 = rng.random();
    Ok(gaze_point_from_uniforms(angle_u, radius_u, depth_u, config))
}

/// Fires once per gaze interval, at `k * interval` ms after session start.
#[derive(Debug, Clone)]
pub struct GazeScheduler {
    interval_ms: u64,
    next_due: u64,
}

impl GazeScheduler {
    pub fn new(interval_ms: u64) -> Self {
        let interval_ms = interval_ms.max(1);
        Self {
            interval_ms,
            next_due: interval_ms,
        }
    }

    /// Number of gaze decisions due by `now`.
    pub fn poll(&mut self, now: u64) -> u64 {
        if now < self.next_due {
            return 0;
        }
        let due = (now - self.next_due) / self.interval_ms + 1;
        self.next_due += due * self.interval_ms;
        due
    }

    pub fn next_due(&self) -> u64 {
        self.next_due
    }
}
