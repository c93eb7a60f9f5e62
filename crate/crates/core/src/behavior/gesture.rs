use rand::Rng;

use super::BehaviorConfig;

/// Picks one of the configured gestures uniformly.
pub fn select_gesture<R: Rng + ?Sized>(rng: &mut R, config: &BehaviorConfig) -> u8 {
    rng.random_range(0..config.gesture_count.max(1))
}
