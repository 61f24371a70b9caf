use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use hopred_core::costmodel::{
    compare_to_traditional, cost_surface, decisions_from_predictions, evaluate_cost,
    overlay_costs, write_surface_csv, CostParams,
};
use hopred_core::dataset::{self, Label};
use hopred_core::seqmodel::{load_weights, predict_windows};

use super::SplitChoice;
use crate::resolve_out;

#[derive(Args)]
pub struct CostArgs {
    /// Emit a precision x recall cost surface instead of evaluating a model.
    #[arg(long)]
    pub surface: bool,
    /// Cost of paying for an idle resource.
    #[arg(long, default_value_t = 1.0)]
    pub cp: f64,
    /// Cost of lacking a required resource.
    #[arg(long, default_value_t = 1.0)]
    pub cn: f64,
    /// Positive instance count for the surface normalization.
    #[arg(long, default_value_t = 1000.0)]
    pub np: f64,
    /// Negative instance count for the surface normalization.
    #[arg(long, default_value_t = 1000.0)]
    pub nn: f64,
    #[arg(long, default_value_t = 41)]
    pub resolution: usize,
    /// Optional reports CSV whose (precision, recall) points are projected
    /// onto the surface as an overlay.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Model-evaluation mode inputs.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = SplitChoice::Test)]
    pub split: SplitChoice,
    #[arg(long, default_value = "0.6,0.2,0.2")]
    pub ratios: String,
    #[arg(long, default_value = "cost")]
    pub out_dir: PathBuf,
}

pub fn run(args: CostArgs) -> Result<()> {
    let out_dir = resolve_out(&args.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    if args.surface {
        run_surface(&args, &out_dir)
    } else {
        run_compare(&args, &out_dir)
    }
}

fn run_surface(args: &CostArgs, out_dir: &std::path::Path) -> Result<()> {
    let surface = cost_surface(args.cp, args.cn, args.np, args.nn, args.resolution)?;
    let surface_path = out_dir.join("surface.csv");
    let meta_path = out_dir.join("surface_meta.json");
    write_surface_csv(&surface.points, &surface_path)?;
    std::fs::write(&meta_path, serde_json::to_string_pretty(&surface.meta)?)?;

    let mut outputs = vec![surface_path.clone(), meta_path.clone()];
    let mut inputs: Vec<&std::path::Path> = Vec::new();
    if let Some(overlay) = &args.overlay {
        let points = read_pr_points(overlay)?;
        let overlay_points = overlay_costs(&points, args.cp, args.cn, args.np, args.nn)?;
        let overlay_path = out_dir.join("overlay.csv");
        write_surface_csv(&overlay_points, &overlay_path)?;
        outputs.push(overlay_path);
        inputs.push(overlay.as_path());
    }

    let output_refs: Vec<&std::path::Path> = outputs.iter().map(|p| p.as_path()).collect();
    super::write_manifest(
        "cost-surface",
        None,
        &inputs,
        &output_refs,
        serde_json::json!({
            "c_p": args.cp, "c_n": args.cn,
            "positives": args.np, "negatives": args.nn,
            "resolution": args.resolution,
        }),
    )?;
    println!(
        "surface (c_p={}, c_n={}) with {} points at {}",
        args.cp,
        args.cn,
        surface.points.len(),
        surface_path.display()
    );
    Ok(())
}

/// Pulls (precision, recall) pairs out of an evaluation reports CSV.
fn read_pr_points(path: &PathBuf) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading overlay reports {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty reports file")?;
    let columns: Vec<&str> = header.split(',').collect();
    let p_idx = columns.iter().position(|c| *c == "precision").context("no precision column")?;
    let r_idx = columns.iter().position(|c| *c == "recall").context("no recall column")?;
    let mut points = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let (Some(p), Some(r)) = (fields.get(p_idx), fields.get(r_idx)) else { continue };
        if p.is_empty() || r.is_empty() {
            continue;
        }
        points.push((p.parse::<f64>()?, r.parse::<f64>()?));
    }
    Ok(points)
}

fn run_compare(args: &CostArgs, out_dir: &std::path::Path) -> Result<()> {
    let (Some(trace_path), Some(weights_path)) = (&args.trace, &args.weights) else {
        bail!("cost comparison needs --trace and --weights (or pass --surface)");
    };
    let file = load_weights(weights_path)?;
    let trace = super::load_trace(trace_path)?;
    let windows = dataset::build_windows(&trace, &file.window_spec)?;
    let dataset = dataset::split(windows, &super::parse_ratios(&args.ratios)?)?;
    let part = args.split.pick(&dataset);
    if part.is_empty() {
        bail!("{} split is empty", args.split.name());
    }
    let predictions = predict_windows(&file.weights, &part)?;
    let labels: Vec<Label> = part.iter().map(|w| w.label).collect();
    let decisions = decisions_from_predictions(&predictions, &labels, args.threshold)?;
    let params = CostParams::constant(args.cp, args.cn);
    let ledger = evaluate_cost(&decisions, &params)?;
    let reduction = compare_to_traditional(&decisions, &params)?;

    let ledger_path = out_dir.join("ledger.json");
    std::fs::write(
        &ledger_path,
        serde_json::to_string_pretty(&serde_json::json!({
            "c_p": args.cp,
            "c_n": args.cn,
            "threshold": args.threshold,
            "split": args.split.name(),
            "timesteps": decisions.len(),
            "ledger": ledger,
            "reduction_vs_traditional": reduction,
        }))?,
    )?;

    super::write_manifest(
        "cost-compare",
        Some(file.seed),
        &[trace_path.as_path(), weights_path.as_path()],
        &[&ledger_path],
        serde_json::json!({
            "c_p": args.cp, "c_n": args.cn,
            "threshold": args.threshold, "split": args.split.name(),
        }),
    )?;

    match reduction {
        Some(r) => println!(
            "total={:.2} (paying={:.2}, not_paying={:.2}) traditional={:.2} reduction={:.1}%",
            ledger.total,
            ledger.paying,
            ledger.not_paying,
            ledger.traditional,
            100.0 * r
        ),
        None => println!(
            "total={:.2}; always-buy baseline is zero (every step required), reduction undefined",
            ledger.total
        ),
    }
    Ok(())
}
