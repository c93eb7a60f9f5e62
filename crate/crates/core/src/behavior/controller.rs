use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    sample_gaze_point, select_gesture, BehaviorConfig, BehaviorError, BehaviorEvent, BehaviorKind,
    GazeScheduler, Holder, NodController, NodOutput, SpeechActivity, TurnState,
};
use crate::expression::ExpressionClass;

/// What one clock step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerOutput {
    Event(BehaviorEvent),
    /// The user's turn closed after the silence threshold.
    EndOfTurn {
        at: u64,
    },
    /// The system utterance finished playing.
    SystemTurnDone {
        at: u64,
    },
}

/// Per-session behavior state: gaze schedule, nodding, gestures and who
/// holds the floor.
#[derive(Debug, Clone)]
pub struct BehaviorController {
    config: BehaviorConfig,
    rng: ChaCha8Rng,
    gaze: GazeScheduler,
    nod: NodController,
    holder: Holder,
    system_turn_end: Option<u64>,
    now: u64,
}

impl BehaviorController {
    pub fn new(config: BehaviorConfig, seed: u64) -> Result<Self, BehaviorError> {
        config.validate()?;
        Ok(Self {
            gaze: GazeScheduler::new(config.gaze_interval_ms()),
            nod: NodController::new(&config),
            rng: ChaCha8Rng::seed_from_u64(seed),
            holder: Holder::System,
            system_turn_end: None,
            now: 0,
            config,
        })
    }

    pub fn config(&self) -> &BehaviorConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn holder(&self) -> Holder {
        self.holder
    }

    pub fn turn_state(&self) -> TurnState {
        TurnState {
            holder: self.holder,
            last_user_activity: match self.holder {
                Holder::User => self.nod.last_activity(),
                Holder::System => None,
            },
        }
    }

    /// True while a system utterance is still playing.
    pub fn system_speaking(&self) -> bool {
        self.system_turn_end.is_some()
    }

    /// Evaluates everything due at clock time `now`. Within one instant the
    /// order is: system utterance end, nod controller, gaze.
    pub fn advance_to(&mut self, now: u64) -> Vec<ControllerOutput> {
        let now = now.max(self.now);
        self.now = now;
        let mut out = Vec::new();
        let event = |kind| ControllerOutput::Event(BehaviorEvent { at: now, kind });

        if self.system_turn_end.is_some_and(|end| now >= end) {
            self.system_turn_end = None;
            out.push(event(BehaviorKind::GestureEnd));
            out.push(ControllerOutput::SystemTurnDone { at: now });
        }

        if self.holder == Holder::User {
            match self.nod.poll(now) {
                Some(NodOutput::Nod { .. }) => out.push(event(BehaviorKind::Nod)),
                Some(NodOutput::EndOfTurn { .. }) => {
                    self.holder = Holder::System;
                    out.push(event(BehaviorKind::ListeningOff));
                    out.push(ControllerOutput::EndOfTurn { at: now });
                }
                None => {}
            }
        }

        for _ in 0..self.gaze.poll(now) {
            // Config was validated at construction.
            if let Ok(p) = sample_gaze_point(&mut self.rng, &self.config) {
                out.push(event(BehaviorKind::Gaze(p)));
            }
        }
        out
    }

    /// Feeds a user speech signal. Ignored unless the user holds the floor.
    pub fn speech(&mut self, at: u64, activity: SpeechActivity) {
        if self.holder == Holder::User {
            self.nod.on_activity(at.max(self.now), activity);
        }
    }

    /// Starts a system utterance lasting `duration_ms`. Returns the chosen
    /// gesture and the events to emit now.
    pub fn begin_system_turn(
        &mut self,
        at: u64,
        duration_ms: u64,
        expression: ExpressionClass,
    ) -> (u8, Vec<BehaviorEvent>) {
        let at = at.max(self.now);
        self.holder = Holder::System;
        self.nod.reset();
        let id = select_gesture(&mut self.rng, &self.config);
        self.system_turn_end = Some(at + duration_ms);
        let events = vec![
            BehaviorEvent {
                at,
                kind: BehaviorKind::Expression(expression),
            },
            BehaviorEvent {
                at,
                kind: BehaviorKind::GestureStart { id },
            },
        ];
        (id, events)
    }

    /// Hands the floor to the user.
    pub fn begin_user_turn(&mut self, at: u64) -> BehaviorEvent {
        self.holder = Holder::User;
        self.nod.reset();
        BehaviorEvent {
            at: at.max(self.now),
            kind: BehaviorKind::ListeningOn,
        }
    }
}
