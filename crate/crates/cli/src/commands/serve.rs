use std::io::BufReader;
use std::net::TcpListener;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use hopred_core::manifest::sha256_bytes;
use hopred_core::seqmodel::load_weights;
use hopred_core::stream::{serve, ServeEngine};

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Accept NDJSON indication streams on this TCP address; decisions are
    /// written back on the same connection.
    #[arg(long, conflicts_with = "stdin")]
    pub listen: Option<String>,
    /// Read NDJSON indications from stdin and write decisions to stdout.
    #[arg(long)]
    pub stdin: bool,
}

pub fn run(args: ServeArgs) -> Result<()> {
    let file = load_weights(&args.weights)
        .with_context(|| format!("loading weights {}", args.weights.display()))?;
    // The model version in every decision is the weight-file content hash.
    let bytes = std::fs::read(&args.weights)?;
    let version = sha256_bytes(&bytes)[..16].to_string();
    log::info!(
        "serving model {} (history={}, horizon={}, threshold={})",
        version,
        file.window_spec.history_k,
        file.window_spec.horizon_t,
        args.threshold
    );

    if args.stdin {
        let mut engine = ServeEngine::new(file, args.threshold, version)?;
        let stdin = std::io::stdin();
        let stdout = std::io::stdout();
        let stats = serve(&mut engine, stdin.lock(), stdout.lock())?;
        eprintln!(
            "served {} decisions from {} indications ({} malformed, {} sequence gaps)",
            stats.decisions, stats.received, stats.malformed, stats.seq_gaps
        );
        return Ok(());
    }

    let Some(addr) = &args.listen else {
        bail!("pass --stdin or --listen ADDR");
    };
    let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
    log::info!("listening on {addr}");
    for connection in listener.incoming() {
        let connection = match connection {
            Ok(c) => c,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let peer = connection.peer_addr().map(|a| a.to_string()).unwrap_or_default();
        log::info!("subscription from {peer}");
        // One static subscription at a time; window state is per connection.
        let mut engine = ServeEngine::new(file.clone(), args.threshold, version.clone())?;
        let reader = BufReader::new(connection.try_clone()?);
        match serve(&mut engine, reader, connection) {
            Ok(stats) => log::info!(
                "{peer}: {} decisions from {} indications ({} malformed, {} gaps)",
                stats.decisions,
                stats.received,
                stats.malformed,
                stats.seq_gaps
            ),
            Err(e) => log::warn!("{peer}: stream ended with error: {e}"),
        }
    }
    Ok(())
}
