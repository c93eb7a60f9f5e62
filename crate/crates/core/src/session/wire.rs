//! JSON wire protocol between the browser client and the session server.
//!
//! Every message is one UTF-8 JSON object (one websocket text frame):
//! `{"type": ..., "session_id": ..., "payload": {...}}`. `session_id` is
//! optional on client messages and always set by the server once a session
//! exists.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::behavior::BehaviorEvent;
use crate::dialogue::{Answers, SessionKind};
use crate::expression::ExpressionClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeechEventKind {
    Start,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Message not valid JSON or not a known message shape.
    BadMessage,
    /// Message out of order, e.g. anything before `hello`.
    Protocol,
    /// `session_id` does not match the connection's session.
    UnknownSession,
    /// Today's session for this user is already finished.
    SessionComplete,
    /// Server-side failure such as a missing template.
    Internal,
}

/// What the server reports when a session closes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub user_id: String,
    pub date: NaiveDate,
    pub kind: SessionKind,
    pub answers: Answers,
    pub user_turns: usize,
    /// False when the client left with `bye` before the flow finished.
    pub completed: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Body {
    // Client to server.
    Hello {
        user_id: String,
        /// Calendar day of the session; the server's today if absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        date: Option<NaiveDate>,
        /// False selects the plain web-agent condition: no behavior events
        /// and no gesture ids.
        #[serde(default = "yes")]
        render_nonverbal: bool,
    },
    UserUtterance {
        text: String,
        /// Client clock, informational only.
        #[serde(default)]
        ts_ms: u64,
    },
    SpeechEvent {
        kind: SpeechEventKind,
    },
    Bye,

    // Server to client.
    SessionStarted {
        kind: SessionKind,
        #[serde(default)]
        resumed: bool,
    },
    SystemUtterance {
        text: String,
        expression: ExpressionClass,
        gesture_id: Option<u8>,
    },
    Behavior(BehaviorEvent),
    Listening {
        on: bool,
    },
    SessionEnded {
        summary: SessionSummary,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl Body {
    pub fn type_name(&self) -> &'static str {
        match self {
            Body::Hello { .. } => "hello",
            Body::UserUtterance { .. } => "user_utterance",
            Body::SpeechEvent { .. } => "speech_event",
            Body::Bye => "bye",
            Body::SessionStarted { .. } => "session_started",
            Body::SystemUtterance { .. } => "system_utterance",
            Body::Behavior(_) => "behavior",
            Body::Listening { .. } => "listening",
            Body::SessionEnded { .. } => "session_ended",
            Body::Error { .. } => "error",
        }
    }

    /// True for the message types a client may send.
    pub fn is_client(&self) -> bool {
        matches!(
            self,
            Body::Hello { .. } | Body::UserUtterance { .. } | Body::SpeechEvent { .. } | Body::Bye
        )
    }
}

impl WireMessage {
    pub fn new(session_id: Option<String>, body: Body) -> Self {
        Self { session_id, body }
    }

    pub fn client(body: Body) -> Self {
        Self::new(None, body)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        // Every field is a string, integer, finite float, bool, or enum.
        serde_json::to_string(self).unwrap_or_default()
    }

    pub fn type_name(&self) -> &'static str {
        self.body.type_name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{BehaviorKind, GazePoint};

    fn round_trip(m: &WireMessage) {
        let json = m.to_json();
        assert_eq!(&WireMessage::from_json(&json).unwrap(), m, "{json}");
    }

    #[test]
    fn hello_defaults() {
        let m = WireMessage::from_json(r#"{"type":"hello","payload":{"user_id":"u1"}}"#).unwrap();
        assert_eq!(
            m.body,
            Body::Hello {
                user_id: "u1".into(),
                date: None,
                render_nonverbal: true
            }
        );
        assert_eq!(m.session_id, None);
    }

    #[test]
    fn shapes() {
        let m = WireMessage::new(Some("u1:2020-05-01".into()), Body::Listening { on: true });
        assert_eq!(
            m.to_json(),
            r#"{"session_id":"u1:2020-05-01","type":"listening","payload":{"on":true}}"#
        );
        let bye = WireMessage::client(Body::Bye);
        assert_eq!(bye.to_json(), r#"{"type":"bye"}"#);
        let b = WireMessage::new(
            Some("s".into()),
            Body::Behavior(BehaviorEvent {
                at: 1500,
                kind: BehaviorKind::Nod,
            }),
        );
        assert_eq!(
            b.to_json(),
            r#"{"session_id":"s","type":"behavior","payload":{"at":1500,"kind":"nod"}}"#
        );
    }

    #[test]
    fn every_type_round_trips() {
        let sid = Some("u:2020-01-02".to_string());
        let bodies = vec![
            Body::Hello {
                user_id: "u".into(),
                date: NaiveDate::from_ymd_opt(2020, 1, 2),
                render_nonverbal: false,
            },
            Body::UserUtterance {
                text: "I feel \"fine\"\t\u{e9}".into(),
                ts_ms: 12,
            },
            Body::SpeechEvent {
                kind: SpeechEventKind::Stop,
            },
            Body::Bye,
            Body::SessionStarted {
                kind: SessionKind::FirstDay,
                resumed: true,
            },
            Body::SystemUtterance {
                text: "Hi".into(),
                expression: ExpressionClass::Happiness,
                gesture_id: None,
            },
            Body::Behavior(BehaviorEvent {
                at: 3,
                kind: BehaviorKind::Gaze(GazePoint {
                    x: 0.123_456_789_012_345_67,
                    y: -0.2,
                    z: 1e-17,
                }),
            }),
            Body::SessionEnded {
                summary: SessionSummary {
                    user_id: "u".into(),
                    date: NaiveDate::from_ymd_opt(2020, 1, 2).unwrap(),
                    kind: SessionKind::Daily,
                    answers: Answers {
                        temperature_c: Some(36.6),
                        ..Answers::default()
                    },
                    user_turns: 8,
                    completed: true,
                },
            },
            Body::Error {
                code: ErrorCode::Protocol,
                message: "hello first".into(),
            },
        ];
        for body in bodies {
            round_trip(&WireMessage::new(sid.clone(), body.clone()));
            round_trip(&WireMessage::client(body));
        }
    }

    #[test]
    fn rejects_unknown_type() {
        assert!(WireMessage::from_json(r#"{"type":"nope"}"#).is_err());
        assert!(WireMessage::from_json(r#"{"type":"listening","payload":{}}"#).is_err());
        assert!(WireMessage::from_json("[]").is_err());
    }
}
