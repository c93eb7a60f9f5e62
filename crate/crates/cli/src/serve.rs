//! Websocket transport for the session hub.
//!
//! One hub behind a mutex serves every connection. A ticker advances its
//! clock every `tick_ms`; inbound frames are handled at the hub's current
//! tick, so a recorded inbound trace replays to the same outbound stream
//! as long as the ticker kept up.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use nora_core::behavior::trace::TraceLine;
use nora_core::behavior::{Clock, WallClock};
use nora_core::session::{Body, ConnId, Hub, Outbound, ServerConfig, Store, WireMessage};
use tokio::sync::mpsc::{unbounded_channel, UnboundedSender};
use tower_http::services::ServeDir;

pub struct ServeOptions {
    pub port: u16,
    pub data_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub record: Option<PathBuf>,
    pub config: ServerConfig,
}

struct Shared {
    hub: Hub,
    senders: HashMap<ConnId, UnboundedSender<String>>,
    recorder: Option<File>,
}

type AppState = Arc<Mutex<Shared>>;

impl Shared {
    fn dispatch(&self, outs: Vec<Outbound>) {
        for o in outs {
            if let Some(tx) = self.senders.get(&o.conn) {
                // A closed receiver means the socket is going away.
                let _ = tx.send(o.msg.to_json());
            }
        }
    }

    fn record(&mut self, line: TraceLine) {
        if let Some(f) = &mut self.recorder {
            if let Err(e) = writeln!(f, "{}", line.format()).and_then(|_| f.flush()) {
                eprintln!("recording disabled: {e}");
                self.recorder = None;
            }
        }
    }
}

fn today() -> chrono::NaiveDate {
    chrono::Local::now().date_naive()
}

pub fn run(opts: ServeOptions) -> Result<()> {
    let (store, corrupt) = Store::open(&opts.data_dir)
        .with_context(|| format!("opening store {}", opts.data_dir.display()))?;
    for c in &corrupt {
        eprintln!("warning: skipped {}:{}: {}", c.file, c.line, c.reason);
    }
    let tick_ms = opts.config.tick_ms.max(1);
    let mut hub = Hub::new(opts.config, store)?;
    hub.set_today(today());
    let recorder = match &opts.record {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .with_context(|| format!("opening {}", p.display()))?,
        ),
        None => None,
    };
    let state: AppState = Arc::new(Mutex::new(Shared {
        hub,
        senders: HashMap::new(),
        recorder,
    }));

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let clock = WallClock::start(tick_ms);
        let ticker_state = state.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(Duration::from_millis(tick_ms));
            loop {
                interval.tick().await;
                let mut s = ticker_state.lock().expect("hub lock poisoned");
                s.hub.set_today(today());
                let outs = s.hub.tick(clock.now_ms());
                s.dispatch(outs);
            }
        });

        let mut app = Router::new().route("/ws", get(upgrade)).with_state(state);
        if let Some(dir) = opts.static_dir {
            app = app.fallback_service(ServeDir::new(dir));
        }
        let addr = SocketAddr::from(([0, 0, 0, 0], opts.port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on ws://{}/ws", listener.local_addr()?);
        axum::serve(listener, app).await?;
        Ok(())
    })
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

async fn connection(mut socket: WebSocket, state: AppState) {
    let (tx, mut rx) = unbounded_channel::<String>();
    let conn = {
        let mut s = state.lock().expect("hub lock poisoned");
        let conn = s.hub.connect();
        s.senders.insert(conn, tx);
        conn
    };
    loop {
        tokio::select! {
            outgoing = rx.recv() => match outgoing {
                Some(text) => {
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                None => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => on_text(&state, conn, text.as_str()),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    let mut s = state.lock().expect("hub lock poisoned");
    let now = s.hub.now();
    s.record(TraceLine::new(
        now,
        format!("disconnect@{conn}"),
        serde_json::Value::Null,
    ));
    s.hub.disconnect(conn);
    s.senders.remove(&conn);
}

fn on_text(state: &AppState, conn: ConnId, text: &str) {
    let mut s = state.lock().expect("hub lock poisoned");
    let now = s.hub.now();
    let outs = match WireMessage::from_json(text) {
        Ok(mut msg) => {
            // Pin the date so a recording replays without the wall clock.
            if let Body::Hello { date, .. } = &mut msg.body {
                date.get_or_insert_with(today);
            }
            if msg.body.is_client() {
                let payload = serde_json::to_value(&msg).unwrap_or_default();
                s.record(TraceLine::new(
                    now,
                    format!("{}@{conn}", msg.type_name()),
                    payload,
                ));
            }
            s.hub.handle(conn, msg, now)
        }
        Err(_) => s.hub.handle_text(conn, text, now),
    };
    s.dispatch(outs);
}
