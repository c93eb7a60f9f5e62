//! Nonverbal behavior generation on a deterministic clock.
//!
//! * Gaze: every 1.5 s a new gaze point is drawn uniformly from a hollow
//!   cylinder around the webcam (outer radius 0.3 m, inner 0.05 m, width
//!   0.2 m), in both turn states.
//! * Gestures: one of four movements, chosen uniformly, plays for the length
//!   of each system utterance.
//! * Nodding: during the user turn the agent nods until 2.0 s pass without
//!   speech activity, which also ends the user's turn.
//!
//! Everything is driven by explicit timestamps in milliseconds since session
//! start, so a seed plus an input trace fully determines the output.

mod clock;
mod controller;
mod gaze;
mod gesture;
mod nod;
pub mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expression::ExpressionClass;

pub use clock::{ticks_through, Clock, TickClock, WallClock, DEFAULT_TICK_MS};
pub use controller::{BehaviorController, ControllerOutput};
pub use gaze::{gaze_point_from_uniforms, sample_gaze_point, GazeScheduler};
pub use gesture::select_gesture;
pub use nod::{run_nod_controller, NodController, NodOutput, NodRun, SpeechActivity};

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("invalid behavior config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorConfig {
    pub silence_end_of_turn_s: f64,
    pub gaze_interval_s: f64,
    pub gaze_outer_radius_m: f64,
    pub gaze_inner_radius_m: f64,
    pub gaze_width_m: f64,
    pub gesture_count: u8,
    /// Not given by the source model; 1 s is a placeholder cadence.
    pub nod_period_s: f64,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            silence_end_of_turn_s: 2.0,
            gaze_interval_s: 1.5,
            gaze_outer_radius_m: 0.3,
            gaze_inner_radius_m: 0.05,
            gaze_width_m: 0.2,
            gesture_count: 4,
            nod_period_s: 1.0,
        }
    }
}

impl BehaviorConfig {
    pub fn validate(&self) -> Result<(), BehaviorError> {
        let bad = |msg: &str| Err(BehaviorError::InvalidConfig(msg.to_owned()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.gaze_inner_radius_m)
            && self.gaze_outer_radius_m.is_finite()
            && self.gaze_inner_radius_m < self.gaze_outer_radius_m)
        {
            return bad("need 0 < inner radius < outer radius");
        }
        if !positive(self.gaze_width_m) {
            return bad("gaze width must be positive");
        }
        for (name, v) in [
            ("silence_end_of_turn_s", self.silence_end_of_turn_s),
            ("gaze_interval_s", self.gaze_interval_s),
            ("nod_period_s", self.nod_period_s),
        ] {
            if !positive(v) || secs_to_ms(v) == 0 {
                return Err(BehaviorError::InvalidConfig(format!(
                    "{name} must be at least 1 ms"
                )));
            }
        }
        if self.gesture_count == 0 {
            return bad("gesture_count must be at least 1");
        }
        Ok(())
    }

    pub fn silence_ms(&self) -> u64 {
        secs_to_ms(self.silence_end_of_turn_s)
    }

    pub fn gaze_interval_ms(&self) -> u64 {
        secs_to_ms(self.gaze_interval_s)
    }

    pub fn nod_period_ms(&self) -> u64 {
        secs_to_ms(self.nod_period_s)
    }
}

pub(crate) fn secs_to_ms(s: f64) -> u64 {
    (s * 1000.0).round() as u64
}

/// Gaze target in a camera-centered frame: x right and y up in the camera
/// plane, z along the camera axis, all in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GazePoint {
    /// Distance from the camera axis.
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn within(&self, config: &BehaviorConfig) -> bool {
        let r = self.radius();
        r >= config.gaze_inner_radius_m - 1e-12
            && r <= config.gaze_outer_radius_m + 1e-12
            && self.z.abs() <= config.gaze_width_m / 2.0 + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum BehaviorKind {
    Gaze(GazePoint),
    Nod,
    GestureStart { id: u8 },
    GestureEnd,
    ListeningOn,
    ListeningOff,
    Expression(ExpressionClass),
}

impl BehaviorKind {
    pub fn name(&self) -> &'static str {
        match self {
            BehaviorKind::Gaze(_) => "gaze",
            BehaviorKind::Nod => "nod",
            BehaviorKind::GestureStart { .. } => "gesture_start",
            BehaviorKind::GestureEnd => "gesture_end",
            BehaviorKind::ListeningOn => "listening_on",
            BehaviorKind::ListeningOff => "listening_off",
            BehaviorKind::Expression(_) => "expression",
        }
    }
}

/// A timed command for whatever renders the agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorEvent {
    /// Milliseconds since session start.
    pub at: u64,
    #[serde(flatten)]
    pub kind: BehaviorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holder {
    System,
    User,
}

/// Who holds the floor. `last_user_activity` is only set while the user does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnState {
    pub holder: Holder,
    pub last_user_activity: Option<u64>,
}

impl Default for TurnState {
    fn default() -> Self {
        Self {
            holder: Holder::System,
            last_user_activity: None,
        }
    }
}
