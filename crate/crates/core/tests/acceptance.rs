//! Acceptance suite. Runs every top-level criterion and prints one
//! PASS/FAIL line for each; exits non-zero if any fails.
//!
//! Set `UPDATE_GOLDEN=1` to regenerate the golden session traces.

mod common;

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nora_core::behavior::trace::{read_trace, write_trace, TraceLine};
use nora_core::behavior::{
    sample_gaze_point, select_gesture, BehaviorConfig, BehaviorController, BehaviorKind,
    ControllerOutput, SpeechActivity,
};
use nora_core::dialogue::{Phase, SessionKind, SessionRecord};
use nora_core::expression::ExpressionClass;
use nora_core::session::{
    self, parse_script, run_script, ClientTiming, Hub, PersistedStore, ServerConfig, Store,
};
use nora_core::stats::{significance_table, PreferenceTally, Winner, DEFAULT_ALPHA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(
        elapsed < limit,
        format!("took {elapsed:?}, limit {limit:?}"),
    )
}

/// Mean radius of a point uniform over the annulus: the ratio of the
/// first and zeroth radial moments of the density `2r / (R^2 - r^2)`.
fn expected_mean_radius(inner: f64, outer: f64) -> f64 {
    (2.0 / 3.0) * (outer.powi(3) - inner.powi(3)) / (outer.powi(2) - inner.powi(2))
}

fn chi_square(counts: &[u64], expected: f64) -> f64 {
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// 0.999 quantiles of the chi-square distribution, from standard tables.
const CHI2_999_DOF7: f64 = 24.322;
const CHI2_999_DOF3: f64 = 16.266;

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    // Q4 was won by Nora 15 times out of 19, so ERICA won 4.
    let tallies = [("Q1", 10), ("Q2", 13), ("Q3", 18), ("Q4", 4)]
        .map(|(q, wins_a)| PreferenceTally::new(q, 19, wins_a).unwrap());
    let rows = significance_table(&tallies, DEFAULT_ALPHA).map_err(|e| e.to_string())?;
    let expected = [(52.6, false), (68.4, true), (94.7, true), (78.9, true)];
    for (row, (rate, sig)) in rows.iter().zip(expected) {
        check(
            (row.win_rate_pct - rate).abs() <= 0.05 && row.significant == sig,
            format!(
                "{}: got {:.1}% significant={}, want {rate}% significant={sig}",
                row.question, row.win_rate_pct, row.significant
            ),
        )?;
    }
    check(
        rows[3].winner == Winner::B && rows[..3].iter().all(|r| r.winner == Winner::A),
        "winners should be A, A, A, B",
    )?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(rows
        .iter()
        .map(|r| {
            format!(
                "{:.1}{}",
                r.win_rate_pct,
                if r.significant { "*" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join(" / "))
}

fn gaze_geometry() -> Outcome {
    let start = Instant::now();
    let config = BehaviorConfig::default();
    let (inner, outer) = (config.gaze_inner_radius_m, config.gaze_outer_radius_m);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a2e);
    let n = 100_000u64;
    // Two radial rings of equal area times four quadrants.
    let mid = ((inner * inner + outer * outer) / 2.0).sqrt();
    let mut bins = [0u64; 8];
    let mut sum_r = 0.0;
    for _ in 0..n {
        let p = sample_gaze_point(&mut rng, &config).map_err(|e| e.to_string())?;
        let r = p.radius();
        check(
            (inner..=outer).contains(&r) && p.z.abs() <= config.gaze_width_m / 2.0,
            format!("point out of bounds: {p:?}"),
        )?;
        sum_r += r;
        let ring = usize::from(r >= mid);
        let quadrant = ((p.y.atan2(p.x).rem_euclid(TAU) / (TAU / 4.0)) as usize).min(3);
        bins[ring * 4 + quadrant] += 1;
    }
    let mean = sum_r / n as f64;
    let want = expected_mean_radius(inner, outer);
    check(
        (mean - want).abs() <= 0.002,
        format!("mean radius {mean:.5}, want {want:.5} ± 0.002"),
    )?;
    let chi2 = chi_square(&bins, n as f64 / 8.0);
    check(
        chi2 < CHI2_999_DOF7,
        format!("chi-square {chi2:.2} >= {CHI2_999_DOF7}"),
    )?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("mean r {mean:.5} m, chi-square {chi2:.2}"))
}

/// Sorted activity timeline for one user turn that starts at `from`.
/// Gaps between bursts stay under the silence threshold, so the whole
/// trace is a single turn.
fn random_user_activity(
    rng: &mut ChaCha8Rng,
    from: u64,
    silence_ms: u64,
) -> Vec<(u64, SpeechActivity)> {
    let mut t = from + rng.random_range(0..3000);
    let mut events = Vec::new();
    for _ in 0..rng.random_range(1..5) {
        events.push((t, SpeechActivity::UserSpeechStart));
        if rng.random_bool(0.3) {
            t += rng.random_range(0..400);
            events.push((t, SpeechActivity::UserTextFinal));
        }
        t += rng.random_range(0..4000);
        events.push((t, SpeechActivity::UserSpeechStop));
        t += rng.random_range(0..silence_ms - 100);
    }
    events
}

fn turn_timing() -> Outcome {
    let tick = 50u64;
    let config = BehaviorConfig::default();
    let silence = config.silence_ms();
    let traces = 1000;
    let (mut nods_system, mut gestures_user, mut turns, mut worst) = (0, 0, 0u64, 0u64);
    for seed in 0..traces {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ctl = BehaviorController::new(config.clone(), seed).map_err(|e| e.to_string())?;
        let mut now = 0u64;
        let mut user_turn = false;
        let mut tally = |outs: Vec<ControllerOutput>, user_turn: bool| {
            let mut eot = None;
            let mut done = None;
            for o in outs {
                match o {
                    ControllerOutput::Event(e) => match e.kind {
                        BehaviorKind::Nod if !user_turn => nods_system += 1,
                        BehaviorKind::GestureStart { .. } if user_turn => gestures_user += 1,
                        _ => {}
                    },
                    ControllerOutput::EndOfTurn { at } => eot = Some(at),
                    ControllerOutput::SystemTurnDone { at } => done = Some(at),
                }
            }
            (eot, done)
        };

        for _ in 0..rng.random_range(1..4) {
            // System turn, with stray speech signals that must be ignored.
            let duration = rng.random_range(300..6000);
            let (_, events) = ctl.begin_system_turn(now, duration, ExpressionClass::Neutral);
            tally(
                events.into_iter().map(ControllerOutput::Event).collect(),
                user_turn,
            );
            let barge_in = now + rng.random_range(0..duration);
            let mut fed = false;
            loop {
                now += tick;
                if !fed && barge_in <= now {
                    ctl.speech(barge_in, SpeechActivity::UserSpeechStart);
                    fed = true;
                }
                let (_, done) = tally(ctl.advance_to(now), user_turn);
                if done.is_some() {
                    break;
                }
            }

            // User turn.
            ctl.begin_user_turn(now);
            user_turn = true;
            let activity = random_user_activity(&mut rng, now, silence);
            let last = activity.last().map(|(at, _)| *at).unwrap();
            let mut pending = activity.into_iter().peekable();
            let eot = loop {
                while let Some((at, a)) = pending.next_if(|(at, _)| *at <= now) {
                    ctl.speech(at, a);
                }
                now += tick;
                // Signals stamped between ticks arrive before the next tick.
                while let Some((at, a)) = pending.next_if(|(at, _)| *at < now) {
                    ctl.speech(at, a);
                }
                let (eot, _) = tally(ctl.advance_to(now), user_turn);
                if let Some(at) = eot {
                    break at;
                }
                if now > last + 10 * silence {
                    return Err(format!("seed {seed}: turn never ended"));
                }
            };
            user_turn = false;
            let expected = last + silence;
            check(
                eot >= expected && eot - expected <= tick,
                format!("seed {seed}: end of turn at {eot}, last activity at {last}"),
            )?;
            worst = worst.max(eot - expected);
            turns += 1;
        }
    }
    check(
        nods_system == 0,
        format!("{nods_system} nods during system turns"),
    )?;
    check(
        gestures_user == 0,
        format!("{gestures_user} gesture starts during user turns"),
    )?;
    Ok(format!(
        "{traces} traces, {turns} user turns, worst end-of-turn lag {worst} ms"
    ))
}

fn gesture_uniformity() -> Outcome {
    let config = BehaviorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e57);
    let n = 10_000u64;
    let mut counts = vec![0u64; config.gesture_count as usize];
    for _ in 0..n {
        let id = select_gesture(&mut rng, &config) as usize;
        check(id < counts.len(), format!("gesture id {id} out of range"))?;
        counts[id] += 1;
    }
    let chi2 = chi_square(&counts, n as f64 / counts.len() as f64);
    check(
        chi2 < CHI2_999_DOF3,
        format!("chi-square {chi2:.2} >= {CHI2_999_DOF3}"),
    )?;
    Ok(format!("counts {counts:?}, chi-square {chi2:.2}"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden")
}

const GOLDEN_SEED: u64 = 7;

fn traces_text(lines: &[TraceLine]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, lines).unwrap();
    String::from_utf8(buf).unwrap()
}

fn replay_golden(inbound: &[TraceLine]) -> Result<(String, Store), String> {
    let config = ServerConfig {
        seed: GOLDEN_SEED,
        ..ServerConfig::default()
    };
    let mut hub = Hub::new(config, Store::default()).map_err(|e| e.to_string())?;
    let out = session::replay_lines(&mut hub, inbound).map_err(|e| e.to_string())?;
    Ok((traces_text(&out), hub.into_store()))
}

fn golden_session() -> Outcome {
    let dir = golden_dir();
    let transcript = fs::read_to_string(dir.join("transcript.txt")).map_err(|e| e.to_string())?;
    let sessions = parse_script(&transcript).map_err(|e| e.to_string())?;
    let config = ServerConfig {
        seed: GOLDEN_SEED,
        ..ServerConfig::default()
    };
    let run = run_script(&sessions, config, ClientTiming::default()).map_err(|e| e.to_string())?;
    let inbound_text = traces_text(&run.inbound);
    let (inbound_path, outbound_path) = (dir.join("inbound.trace"), dir.join("outbound.trace"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&inbound_path, &inbound_text).map_err(|e| e.to_string())?;
        fs::write(&outbound_path, traces_text(&run.outbound)).map_err(|e| e.to_string())?;
    }
    let golden_in = fs::read_to_string(&inbound_path).map_err(|e| e.to_string())?;
    let golden_out = fs::read_to_string(&outbound_path).map_err(|e| e.to_string())?;
    check(
        golden_in == inbound_text,
        "scripted inbound trace differs from golden",
    )?;

    let inbound = read_trace(golden_in.as_bytes()).map_err(|e| e.to_string())?;
    let (first, store) = replay_golden(&inbound)?;
    let (second, _) = replay_golden(&inbound)?;
    check(first == second, "two replays differ")?;
    check(
        first == golden_out,
        "replayed outbound log differs from golden",
    )?;
    check(
        first == traces_text(&run.outbound),
        "replayed outbound log differs from the live scripted run",
    )?;

    // Every phase is visited by the scripted sessions.
    let mut visited = std::collections::BTreeSet::new();
    let mut history: Vec<SessionRecord> = Vec::new();
    for s in &sessions {
        let texts: Vec<&str> = s.utterances.iter().map(String::as_str).collect();
        for state in common::run_dialogue(&texts, &s.user_id, s.date, &history) {
            visited.insert(state.phase);
        }
        history.push(SessionRecord::new(&s.user_id, s.date, SessionKind::Daily));
    }
    let missing: Vec<_> = Phase::ALL.iter().filter(|p| !visited.contains(p)).collect();
    check(
        missing.is_empty(),
        format!("phases never visited: {missing:?}"),
    )?;

    // The server committed both sessions with their answers.
    let committed = &store.data.sessions;
    check(
        committed.len() == sessions.len(),
        "not every session was committed",
    )?;
    let daily = committed
        .iter()
        .find(|s| s.kind == SessionKind::Daily)
        .ok_or("no daily session")?;
    let a = &daily.answers;
    check(
        a.mood.is_some()
            && a.temperature_c.is_some()
            && a.short_of_breath.is_some()
            && a.activity.is_some(),
        format!("daily summary incomplete: {a:?}"),
    )?;

    // Goodbye utterances carry the hygiene advice.
    let mut goodbyes = 0;
    for record in committed {
        let said_goodbye = record.turns.iter().any(|t| {
            let text = t.text.to_lowercase();
            text.contains("wash") && text.contains("mask")
        });
        goodbyes += usize::from(said_goodbye);
    }
    check(
        goodbyes == committed.len(),
        "a session ended without hand-washing and mask advice",
    )?;
    Ok(format!(
        "{} inbound, {} outbound lines, {} phases",
        inbound.len(),
        first.lines().count(),
        visited.len()
    ))
}

fn persistence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5709e);
    let store = common::random_store(&mut rng, 120);
    check(
        store.sessions.len() >= 100,
        "generator produced too few sessions",
    )?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    store.save(dir.path()).map_err(|e| e.to_string())?;
    let (loaded, corrupt) = PersistedStore::load(dir.path()).map_err(|e| e.to_string())?;
    check(
        corrupt.is_empty(),
        format!("clean store reported {corrupt:?}"),
    )?;
    check(loaded == store, "round-trip changed the store")?;

    // Cut one session line short, as a crash mid-write would.
    let path = dir.path().join(session::store::SESSIONS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let victim = lines.len() / 2;
    let cut = lines[victim].len() / 2;
    lines[victim].truncate(cut);
    fs::write(&path, lines.join("\n") + "\n").map_err(|e| e.to_string())?;
    let (damaged, corrupt) = PersistedStore::load(dir.path()).map_err(|e| e.to_string())?;
    check(
        corrupt.len() == 1 && corrupt[0].line == victim + 1,
        format!(
            "expected one report for line {}, got {corrupt:?}",
            victim + 1
        ),
    )?;
    check(
        damaged.sessions.len() == store.sessions.len() - 1,
        "truncated line was not the only one skipped",
    )?;
    Ok(format!(
        "{} sessions round-trip; truncated line {} skipped and reported",
        store.sessions.len(),
        victim + 1
    ))
}

fn main() {
    let table = table_reproduction();
    let table_ok = table.is_ok();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("preference table reproduction", table),
        ("gaze geometry", gaze_geometry()),
        ("turn timing", turn_timing()),
        ("gesture uniformity", gesture_uniformity()),
        ("golden session", golden_session()),
        ("persistence", persistence()),
        (
            "human-study outcomes limited to significance arithmetic",
            if table_ok {
                Ok("covered by the preference table criterion".to_owned())
            } else {
                Err("preference table criterion failed".to_owned())
            },
        ),
    ];
    let mut failed = 0;
    for (name, outcome) in &criteria {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
