use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nora_core::behavior::trace::write_trace;
use nora_core::session::{self, ClientTiming, PersistedStore, ServerConfig};
use nora_core::stats;

use crate::HubArgs;

pub fn load_config(args: &HubArgs) -> Result<ServerConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ServerConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ServerConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tick) = args.tick_ms {
        if tick == 0 {
            bail!("--tick-ms must be at least 1");
        }
        config.tick_ms = tick;
    }
    Ok(config)
}

fn output(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdout().lock()));
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

pub fn replay(input: &Path, out: &Path, config: ServerConfig) -> Result<()> {
    let f = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let mut w = output(out)?;
    session::replay(BufReader::new(f), &mut w, config)?;
    w.flush()?;
    Ok(())
}

pub fn report(user: &str, data_dir: &Path) -> Result<()> {
    let (store, corrupt) = PersistedStore::load(data_dir)?;
    for c in &corrupt {
        eprintln!("warning: skipped {}:{}: {}", c.file, c.line, c.reason);
    }
    let timeline = store.timeline(user);
    let mut out = io::stdout().lock();
    writeln!(out, "mood timeline for {user}")?;
    if let Some(p) = store.users.get(user) {
        writeln!(
            out,
            "since {}, profession: {}",
            p.created_date,
            p.profession.as_deref().unwrap_or("unknown")
        )?;
    }
    if timeline.entries.is_empty() {
        writeln!(out, "no sessions")?;
        return Ok(());
    }
    writeln!(
        out,
        "{:<10}  {:>9}  {:>6}  emotion",
        "date", "sentiment", "stress"
    )?;
    for e in &timeline.entries {
        writeln!(
            out,
            "{:<10}  {:>9.3}  {:>6.3}  {}",
            e.date, e.mean_sentiment, e.mean_stress, e.dominant_emotion
        )?;
    }
    Ok(())
}

pub fn stats(tallies: &Path, alpha: f64, label_a: &str, label_b: &str) -> Result<()> {
    let f = File::open(tallies).with_context(|| format!("opening {}", tallies.display()))?;
    let tallies = stats::parse_tallies_csv(f)?;
    if tallies.is_empty() {
        bail!("no tallies in input");
    }
    let rows = stats::significance_table(&tallies, alpha)?;
    print!("{}", stats::format_report(&rows, label_a, label_b, alpha));
    Ok(())
}

pub fn script(
    transcript: &Path,
    out: &Path,
    outbound: Option<&Path>,
    config: ServerConfig,
) -> Result<()> {
    let text = fs::read_to_string(transcript)
        .with_context(|| format!("reading {}", transcript.display()))?;
    let sessions = session::parse_script(&text)?;
    let run = session::run_script(&sessions, config, ClientTiming::default())?;
    let mut w = output(out)?;
    write_trace(&mut w, &run.inbound)?;
    w.flush()?;
    if let Some(path) = outbound {
        let mut w = output(path)?;
        write_trace(&mut w, &run.outbound)?;
        w.flush()?;
    }
    Ok(())
}
