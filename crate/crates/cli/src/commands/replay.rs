use std::io::Write;
use std::net::TcpStream;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use hopred_core::stream::{replay, ReplayOptions, Sink, WriteSink};

#[derive(Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Real-time multiplier; 0 replays as fast as possible.
    #[arg(long, default_value_t = 0.0)]
    pub rate: f64,
    /// Send NDJSON to this TCP address instead of stdout.
    #[arg(long)]
    pub connect: Option<String>,
}

/// TCP sink that reconnects once per failed send attempt.
struct TcpSink {
    addr: String,
    stream: Option<TcpStream>,
}

impl Sink for TcpSink {
    fn send(&mut self, line: &str) -> std::io::Result<()> {
        if self.stream.is_none() {
            self.stream = Some(TcpStream::connect(&self.addr)?);
        }
        let stream = self.stream.as_mut().expect("stream connected above");
        let result = stream
            .write_all(line.as_bytes())
            .and_then(|_| stream.write_all(b"\n"))
            .and_then(|_| stream.flush());
        if result.is_err() {
            self.stream = None;
        }
        result
    }
}

pub fn run(args: ReplayArgs) -> Result<()> {
    let trace = super::load_trace(&args.trace)?;
    let options = ReplayOptions { rate: args.rate, ..ReplayOptions::default() };
    let stats = match &args.connect {
        Some(addr) => {
            let mut sink = TcpSink { addr: addr.clone(), stream: None };
            replay(&trace, &options, &mut sink).context("replaying to socket")?
        }
        None => {
            let stdout = std::io::stdout();
            let mut sink = WriteSink(std::io::BufWriter::new(stdout.lock()));
            replay(&trace, &options, &mut sink)?
        }
    };
    eprintln!(
        "replayed {} messages over {} ticks ({} send retries)",
        stats.messages, stats.ticks, stats.retries
    );
    Ok(())
}
