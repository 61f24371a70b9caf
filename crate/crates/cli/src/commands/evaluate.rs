use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use hopred_core::dataset::{self, Label, WindowSpec};
use hopred_core::evalkit::{metrics, write_reports_csv, write_reports_json};
use hopred_core::seqmodel::{load_weights, predict_windows};

use super::SplitChoice;
use crate::resolve_out;

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = SplitChoice::Test)]
    pub split: SplitChoice,
    #[arg(long, default_value = "0.6,0.2,0.2")]
    pub ratios: String,
    /// Optional window-spec assertion; evaluation always uses the window
    /// spec embedded in the weight file and refuses to run on a mismatch.
    #[arg(long)]
    pub history: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Output prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let file = load_weights(&args.weights)
        .with_context(|| format!("loading weights {}", args.weights.display()))?;
    if args.history.is_some() || args.horizon.is_some() {
        let expected = WindowSpec::new(
            args.history.unwrap_or(file.window_spec.history_k),
            args.horizon.unwrap_or(file.window_spec.horizon_t),
        )?;
        file.ensure_window_spec(&expected)?;
    }

    let trace = super::load_trace(&args.trace)?;
    let windows = dataset::build_windows(&trace, &file.window_spec)?;
    let ratios = super::parse_ratios(&args.ratios)?;
    let dataset = dataset::split(windows, &ratios)?;
    let part = args.split.pick(&dataset);
    if part.is_empty() {
        anyhow::bail!("{} split is empty", args.split.name());
    }

    let predictions = predict_windows(&file.weights, &part)?;
    let labels: Vec<Label> = part.iter().map(|w| w.label).collect();
    let report = metrics(&predictions, &labels, args.threshold, &file.window_spec)?;

    let out = resolve_out(&args.out);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    write_reports_csv(std::slice::from_ref(&report), &csv_path)?;
    write_reports_json(std::slice::from_ref(&report), &json_path)?;

    super::write_manifest(
        "evaluate",
        Some(file.seed),
        &[args.trace.as_path(), args.weights.as_path()],
        &[&csv_path, &json_path],
        serde_json::json!({
            "threshold": args.threshold,
            "split": args.split.name(),
            "window_spec": file.window_spec,
        }),
    )?;

    let pct = |v: Option<f64>| v.map(|x| format!("{:.1}%", 100.0 * x)).unwrap_or_else(|| "n/a".into());
    println!(
        "{} split: {} windows, tp={} fp={} fn={} tn={} precision={} recall={} f1={}",
        args.split.name(),
        report.counts.total(),
        report.counts.tpc,
        report.counts.fpc,
        report.counts.fnc,
        report.counts.tnc,
        pct(report.precision),
        pct(report.recall),
        pct(report.f1),
    );
    Ok(())
}
