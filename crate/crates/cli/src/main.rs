//! `mrdm`: plan, multiplex, demultiplex and inspect multiresolution
//! division multiplex frames.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrdm_core::formats::SampleFormat;

#[derive(Parser, Debug)]
#[command(name = "mrdm", version, about = "Multiresolution division multiplex toolkit")]
struct Cli {
    /// Print extra detail (allocation tree JSON, per-frame progress).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a plan and print its composition, frame time, rate and allocation.
    Plan {
        #[arg(long)]
        plan: PathBuf,
        /// Also write the allocation tree as JSON.
        #[arg(long)]
        tree_out: Option<PathBuf>,
    },
    /// List every channel composition for J scales.
    Compositions {
        /// Number of scales J (1..=8).
        scales: u32,
        /// Basic rate R used for the column headers.
        #[arg(long, default_value_t = 64_000)]
        rate: u64,
    },
    /// Multiplex payload files into a signal.
    Mux {
        #[command(flatten)]
        common: Common,
        /// Directory holding `<id>.bits` or `<id>.samples` per channel.
        #[arg(long)]
        payloads: PathBuf,
        /// Output signal file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Demultiplex a signal into payload files.
    Demux {
        #[command(flatten)]
        common: Common,
        /// Input signal file.
        #[arg(long = "in", alias = "input")]
        input: PathBuf,
        /// Output directory for recovered payloads.
        #[arg(long)]
        out: PathBuf,
        /// Recover bit payloads (`.bits`) or raw samples (`.samples`).
        #[arg(long, value_enum, default_value_t = Mode::Bits)]
        mode: Mode,
    },
    /// Write magnitude spectra of the muxed signal and its TDM reference.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive frames to concatenate before the transform.
        #[arg(long, default_value_t = 1)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mux and demux seeded random payloads and check the bits survive.
    Roundtrip {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        frames: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    plan: PathBuf,
    /// haar, db4, or file:<path> holding one CSV line of scaling coefficients.
    #[arg(long, default_value = "haar")]
    wavelet: String,
    /// Encoding of signal and sample files.
    #[arg(long, value_enum, default_value_t = Format::Raw)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Raw,
    Csv,
}

impl From<Format> for SampleFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Raw => SampleFormat::Raw,
            Format::Csv => SampleFormat::Csv,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Bits,
    Samples,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_CONFIG } else { 0 });
        }
    };
    let verbose = cli.verbose;
    let result = match cli.command {
        Command::Plan { plan, tree_out } => commands::plan(&plan, tree_out.as_deref(), verbose),
        Command::Compositions { scales, rate } => commands::compositions(scales, rate),
        Command::Mux { common, payloads, out } => commands::mux(&common.into(), &payloads, &out, verbose),
        Command::Demux { common, input, out, mode } => {
            commands::demux(&common.into(), &input, &out, mode == Mode::Bits, verbose)
        }
        Command::Spectrum { common, seed, frames, out } => commands::spectrum(&common.into(), seed, frames, &out),
        Command::Roundtrip { common, seed, frames } => commands::roundtrip(&common.into(), seed, frames, verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

impl From<Common> for commands::Setup {
    fn from(c: Common) -> Self {
        commands::Setup { plan: c.plan, wavelet: c.wavelet, format: c.format.into() }
    }
}
