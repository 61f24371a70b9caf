use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use hopred_core::evalkit::{sweep_history, sweep_horizon, SweepConfig, SweepResult};
use hopred_core::seqmodel::TrainConfig;

use crate::resolve_out;

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// The fixed parameter, e.g. "history=10" or "horizon=9".
    #[arg(long)]
    pub fix: String,
    /// Horizons to sweep ("1..15" or "1,3,9"); requires --fix history=K.
    #[arg(long)]
    pub horizons: Option<String>,
    /// Histories to sweep; requires --fix horizon=T.
    #[arg(long)]
    pub histories: Option<String>,
    /// Model family retrained at every point.
    #[arg(long, default_value = "compact:16")]
    pub model: String,
    #[arg(long, default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.75)]
    pub min_precision: f64,
    #[arg(long, default_value = "sweep")]
    pub out_dir: PathBuf,
}

pub fn run(args: SweepArgs) -> Result<()> {
    let trace = super::load_trace(&args.trace)?;
    let config = SweepConfig {
        model: super::parse_model(&args.model)?,
        train: TrainConfig {
            epochs: args.epochs,
            batch_size: args.batch_size,
            learning_rate: args.learning_rate,
            seed: args.seed,
            early_stop_patience: 0,
            ..TrainConfig::default()
        },
        threshold: args.threshold,
        min_precision: args.min_precision,
        ..SweepConfig::default()
    };

    let (name, value) = args
        .fix
        .split_once('=')
        .with_context(|| format!("--fix expects name=value, got {:?}", args.fix))?;
    let fixed: usize = value.trim().parse().context("fixed parameter value")?;
    let result: SweepResult = match name.trim() {
        "history" => {
            let horizons = args.horizons.as_deref().context("--fix history=K needs --horizons")?;
            sweep_horizon(&trace, fixed, &super::parse_values(horizons)?, &config)?
        }
        "horizon" => {
            let histories = args.histories.as_deref().context("--fix horizon=T needs --histories")?;
            sweep_history(&trace, fixed, &super::parse_values(histories)?, &config)?
        }
        other => bail!("--fix must name history or horizon, got {other:?}"),
    };

    let out_dir = resolve_out(&args.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let reports: Vec<hopred_core::evalkit::EvalReport> =
        result.reports().into_iter().cloned().collect();
    let csv_path = out_dir.join("reports.csv");
    let json_path = out_dir.join("reports.json");
    let selection_path = out_dir.join("selection.json");
    hopred_core::evalkit::write_reports_csv(&reports, &csv_path)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(&result)?)?;
    std::fs::write(&selection_path, serde_json::to_string_pretty(&result.selection)?)?;

    super::write_manifest(
        "sweep",
        Some(args.seed),
        &[args.trace.as_path()],
        &[&csv_path, &json_path, &selection_path],
        serde_json::json!({
            "fix": args.fix,
            "model": args.model,
            "epochs": args.epochs,
            "threshold": args.threshold,
            "min_precision": args.min_precision,
        }),
    )?;

    for point in &result.points {
        match (&point.report, &point.error) {
            (Some(r), _) => println!(
                "value={:<3} P={:?} R={:?} F1={:?}",
                point.swept_value,
                r.precision.map(|v| (v * 1000.0).round() / 1000.0),
                r.recall.map(|v| (v * 1000.0).round() / 1000.0),
                r.f1.map(|v| (v * 1000.0).round() / 1000.0)
            ),
            (None, Some(e)) => println!("value={:<3} failed: {e}", point.swept_value),
            (None, None) => {}
        }
    }
    match &result.selection {
        Some(sel) => println!(
            "selected k={} t={} ({}): recall={:.3} precision={:.3}",
            sel.report.config.history_k,
            sel.report.config.horizon_t,
            sel.reason,
            sel.report.recall.unwrap_or(0.0),
            sel.report.precision.unwrap_or(0.0)
        ),
        None => println!("no point met the minimum precision {}", args.min_precision),
    }
    Ok(())
}
