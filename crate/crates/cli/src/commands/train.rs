use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use hopred_core::dataset::{self, SplitRatios, WindowSpec};
use hopred_core::seqmodel::{save_weights, train, Optimizer, TrainConfig, WeightsFile};

use crate::resolve_out;

#[derive(Args)]
pub struct TrainArgs {
    /// Input trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    /// Training config JSON; flags below override individual fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// History window k in seconds.
    #[arg(long, default_value_t = 10)]
    pub history: usize,
    /// Prediction horizon t in seconds.
    #[arg(long, default_value_t = 9)]
    pub horizon: usize,
    /// Train/validation/test ratios.
    #[arg(long, default_value = "0.6,0.2,0.2")]
    pub ratios: String,
    /// Model family: "default" (32/64/32) or "compact:N".
    #[arg(long, default_value = "default")]
    pub model: String,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// "sgd" or "adaptive-moment".
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Weight file output path.
    #[arg(long, default_value = "weights.json")]
    pub out: PathBuf,
    /// Also persist the windowed dataset CSV next to the sidecar.
    #[arg(long)]
    pub save_dataset: bool,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let trace = super::load_trace(&args.trace)?;
    let window_spec = WindowSpec::new(args.history, args.horizon)?;
    let ratios: SplitRatios = super::parse_ratios(&args.ratios)?;
    let model = super::parse_model(&args.model)?;

    let mut config: TrainConfig = match &args.config {
        Some(path) => serde_json::from_str(
            &std::fs::read_to_string(path)
                .with_context(|| format!("reading train config {}", path.display()))?,
        )?,
        None => TrainConfig::default(),
    };
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(batch_size) = args.batch_size {
        config.batch_size = batch_size;
    }
    if let Some(learning_rate) = args.learning_rate {
        config.learning_rate = learning_rate;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(optimizer) = &args.optimizer {
        config.optimizer = match optimizer.as_str() {
            "sgd" => Optimizer::Sgd,
            "adaptive-moment" => Optimizer::AdaptiveMoment,
            other => anyhow::bail!("unknown optimizer {other:?}"),
        };
    }
    if let Some(patience) = args.patience {
        config.early_stop_patience = patience;
    }

    let windows = dataset::build_windows(&trace, &window_spec)?;
    let split = dataset::split(windows, &ratios)?;
    log::info!(
        "windows: train={} validation={} test={} (class weights ho={:.4} no-ho={:.4})",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        split.class_weights.ho,
        split.class_weights.no_ho
    );

    let (weights, training_log) = train(&split, &model, &config)?;
    let class_weights = config.class_weights.unwrap_or(split.class_weights);
    let file = WeightsFile::new(weights, window_spec, class_weights, config.seed);

    let out = resolve_out(&args.out);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    save_weights(&file, &out)?;

    let stem = out.file_stem().unwrap_or_default().to_string_lossy().to_string();
    let log_path = out.with_file_name(format!("{stem}.training_log.csv"));
    training_log.write_csv(&log_path)?;
    let sidecar_path = out.with_file_name(format!("{stem}.dataset.json"));
    let mut outputs = vec![out.clone(), log_path.clone(), sidecar_path.clone()];
    if args.save_dataset {
        let windows_path = out.with_file_name(format!("{stem}.windows.csv"));
        dataset::save_dataset(&split, &window_spec, &ratios, &windows_path, &sidecar_path)?;
        outputs.push(windows_path);
    } else {
        let sidecar = split.sidecar(&window_spec, &ratios);
        std::fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    }

    let output_refs: Vec<&std::path::Path> = outputs.iter().map(|p| p.as_path()).collect();
    super::write_manifest(
        "train",
        Some(config.seed),
        &[args.trace.as_path()],
        &output_refs,
        serde_json::json!({
            "window_spec": window_spec,
            "model": model,
            "train_config": config,
        }),
    )?;

    let best = &training_log.epochs[training_log
        .epochs
        .iter()
        .position(|e| e.epoch == training_log.best_epoch)
        .unwrap_or(0)];
    println!(
        "trained {} epochs (best epoch {}: val_loss={:.4} val_f1={:.4}); weights at {}",
        training_log.epochs.len(),
        training_log.best_epoch,
        best.val_loss,
        best.val_f1.unwrap_or(0.0),
        out.display()
    );
    Ok(())
}
