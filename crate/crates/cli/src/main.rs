//! `nora`: run the check-in server, replay recorded sessions, print mood
//! reports and preference statistics.

mod commands;
mod serve;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "nora",
    version,
    about = "Empathetic daily check-in dialogue server"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by everything that runs a session hub.
#[derive(clap::Args, Clone)]
pub struct HubArgs {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `tick_ms` from the config file.
    #[arg(long)]
    tick_ms: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the websocket endpoint at /ws and, optionally, static files.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        /// Directory of client assets served at /.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Append every inbound message to this trace for later replay.
        #[arg(long)]
        record: Option<PathBuf>,
        #[command(flatten)]
        hub: HubArgs,
    },
    /// Replay an inbound message trace headlessly and write the outbound trace.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output path; `-` for stdout.
        #[arg(long = "out", default_value = "-")]
        output: PathBuf,
        #[command(flatten)]
        hub: HubArgs,
    },
    /// Print a user's mood timeline.
    Report {
        #[arg(long)]
        user: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
    /// Significance table for pairwise preference tallies.
    Stats {
        /// CSV with header `question,n,wins_a`.
        #[arg(long)]
        tallies: PathBuf,
        #[arg(long, default_value_t = nora_core::stats::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value = "ERICA")]
        label_a: String,
        #[arg(long, default_value = "Nora")]
        label_b: String,
    },
    /// Turn a transcript into an inbound trace by simulating a client.
    Script {
        #[arg(long)]
        transcript: PathBuf,
        /// Inbound trace output; `-` for stdout.
        #[arg(long = "out", default_value = "-")]
        output: PathBuf,
        /// Also write the outbound trace produced while scripting.
        #[arg(long)]
        outbound: Option<PathBuf>,
        #[command(flatten)]
        hub: HubArgs,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Serve {
            port,
            data_dir,
            static_dir,
            record,
            hub,
        } => serve::run(serve::ServeOptions {
            port,
            data_dir,
            static_dir,
            record,
            config: commands::load_config(&hub)?,
        }),
        Command::Replay { input, output, hub } => {
            commands::replay(&input, &output, commands::load_config(&hub)?)
        }
        Command::Report { user, data_dir } => commands::report(&user, &data_dir),
        Command::Stats {
            tallies,
            alpha,
            label_a,
            label_b,
        } => commands::stats(&tallies, alpha, &label_a, &label_b),
        Command::Script {
            transcript,
            output,
            outbound,
            hub,
        } => commands::script(
            &transcript,
            &output,
            outbound.as_deref(),
            commands::load_config(&hub)?,
        ),
    }
}
