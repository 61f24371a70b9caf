//! Canned experiment chains from one fixed seed: horizon and history
//! sweeps, the precision-recall curve with operating-point selection, the
//! confusion matrix of the selected model, and the cost surfaces with the
//! model overlay and always-buy comparison.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use hopred_core::costmodel::{
    compare_to_traditional, cost_surface, decisions_from_predictions, evaluate_cost,
    overlay_costs, write_surface_csv, CostParams,
};
use hopred_core::dataset::{self, Label, SplitDataset, SplitRatios, WindowSpec};
use hopred_core::evalkit::{
    metrics, select_operating_point, sweep_history, sweep_horizon, write_reports_csv,
    EvalReport, SweepConfig, SweepResult,
};
use hopred_core::radiosim::{generate_trace, write_trace, MeasurementSample, Scenario};
use hopred_core::seqmodel::{
    predict_windows, save_weights, train, ModelSpec, TrainConfig, WeightsFile,
};

use crate::resolve_out;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Metrics versus prediction horizon (history fixed at 10 s).
    HorizonSweep,
    /// Metrics versus prediction history (horizon fixed at 9 s).
    HistorySweep,
    /// Precision-recall curve over decision thresholds, validation split.
    PrCurve,
    /// Confusion matrix of the selected operating point, test split.
    Confusion,
    /// Normalized cost surfaces with the model overlay and the always-buy
    /// comparison for the three stock cost configurations.
    CostSurfaces,
    All,
}

#[derive(Args)]
pub struct ReproArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value = "repro")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Use the full 32/64/32 model for the sweeps too (much slower).
    #[arg(long)]
    pub full: bool,
}

struct Chain {
    out_dir: PathBuf,
    seed: u64,
    full: bool,
    trace: Vec<MeasurementSample>,
    trained: Option<Trained>,
}

struct Trained {
    dataset: SplitDataset,
    file: WeightsFile,
    window_spec: WindowSpec,
    pr_reports: Vec<EvalReport>,
    selected_threshold: f64,
}

pub fn run(args: ReproArgs) -> Result<()> {
    let out_dir = resolve_out(&args.out_dir);
    std::fs::create_dir_all(&out_dir)?;

    let mut scenario = Scenario::default_four_cell();
    scenario.env.seed = args.seed;
    let trace = generate_trace(&scenario)?;
    let trace_path = out_dir.join("trace.csv");
    write_trace(&trace, &trace_path)?;
    std::fs::write(out_dir.join("scenario.json"), scenario.to_json()?)?;
    println!("trace: {} samples at {}", trace.len(), trace_path.display());

    let mut chain = Chain { out_dir, seed: args.seed, full: args.full, trace, trained: None };
    match args.experiment {
        Experiment::HorizonSweep => chain.horizon_sweep()?,
        Experiment::HistorySweep => chain.history_sweep()?,
        Experiment::PrCurve => {
            chain.ensure_trained()?;
        }
        Experiment::Confusion => chain.confusion()?,
        Experiment::CostSurfaces => chain.cost_surfaces()?,
        Experiment::All => {
            chain.horizon_sweep()?;
            chain.history_sweep()?;
            chain.confusion()?;
            chain.cost_surfaces()?;
        }
    }
    Ok(())
}

impl Chain {
    fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            model: if self.full { ModelSpec::default() } else { ModelSpec::compact(16) },
            train: TrainConfig {
                epochs: if self.full { 6 } else { 3 },
                seed: self.seed,
                early_stop_patience: 0,
                ..TrainConfig::default()
            },
            ..SweepConfig::default()
        }
    }

    fn write_sweep(&self, result: &SweepResult, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let reports: Vec<EvalReport> = result.reports().into_iter().cloned().collect();
        write_reports_csv(&reports, &dir.join("reports.csv"))?;
        std::fs::write(dir.join("reports.json"), serde_json::to_string_pretty(result)?)?;
        std::fs::write(
            dir.join("selection.json"),
            serde_json::to_string_pretty(&result.selection)?,
        )?;
        println!("sweep data at {}", dir.display());
        Ok(())
    }

    fn horizon_sweep(&self) -> Result<()> {
        let horizons: Vec<usize> = (1..=15).collect();
        let result = sweep_horizon(&self.trace, 10, &horizons, &self.sweep_config())?;
        self.write_sweep(&result, &self.out_dir.join("horizon_sweep"))
    }

    fn history_sweep(&self) -> Result<()> {
        let histories: Vec<usize> = (1..=20).collect();
        let result = sweep_history(&self.trace, 9, &histories, &self.sweep_config())?;
        self.write_sweep(&result, &self.out_dir.join("history_sweep"))
    }

    /// Trains the main model once and derives the threshold PR curve on the
    /// validation split plus the selected operating point.
    fn ensure_trained(&mut self) -> Result<&Trained> {
        if self.trained.is_none() {
            let window_spec = WindowSpec::default();
            let windows = dataset::build_windows(&self.trace, &window_spec)?;
            let dataset = dataset::split(windows, &SplitRatios::default())?;
            let config = TrainConfig { epochs: 6, seed: self.seed, early_stop_patience: 2, ..TrainConfig::default() };
            println!("training the 32/64/32 model on {} windows", dataset.train.len());
            let (weights, log) = train(&dataset, &ModelSpec::default(), &config)?;
            println!("trained {} epochs (best {})", log.epochs.len(), log.best_epoch);
            let file = WeightsFile::new(weights, window_spec, dataset.class_weights, self.seed);
            save_weights(&file, &self.out_dir.join("weights.json"))?;
            log.write_csv(&self.out_dir.join("training_log.csv"))?;

            let predictions = predict_windows(&file.weights, &dataset.validation)?;
            let labels: Vec<Label> = dataset.validation.iter().map(|w| w.label).collect();
            let mut pr_reports = Vec::new();
            for step in 1..=19 {
                let threshold = step as f64 * 0.05;
                pr_reports.push(metrics(&predictions, &labels, threshold, &window_spec)?);
            }
            write_reports_csv(&pr_reports, &self.out_dir.join("pr_curve.csv"))?;
            let selected = select_operating_point(&pr_reports, 0.75)
                .context("no threshold met the minimum precision")?;
            let selected_threshold = selected.config.threshold;
            std::fs::write(
                self.out_dir.join("selection.json"),
                serde_json::to_string_pretty(&selected)?,
            )?;
            println!(
                "selected threshold {:.2}: validation precision={:.3} recall={:.3}",
                selected_threshold,
                selected.precision.unwrap_or(0.0),
                selected.recall.unwrap_or(0.0)
            );
            self.trained = Some(Trained {
                dataset,
                file,
                window_spec,
                pr_reports,
                selected_threshold,
            });
        }
        Ok(self.trained.as_ref().expect("trained above"))
    }

    fn confusion(&mut self) -> Result<()> {
        self.ensure_trained()?;
        let trained = self.trained.as_ref().expect("trained");
        let predictions = predict_windows(&trained.file.weights, &trained.dataset.test)?;
        let labels: Vec<Label> = trained.dataset.test.iter().map(|w| w.label).collect();
        let report = metrics(
            &predictions,
            &labels,
            trained.selected_threshold,
            &trained.window_spec,
        )?;
        std::fs::write(
            self.out_dir.join("confusion.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        write_reports_csv(std::slice::from_ref(&report), &self.out_dir.join("confusion.csv"))?;
        println!(
            "test confusion at threshold {:.2}: tp={} fp={} fn={} tn={} (P={:.3} R={:.3})",
            trained.selected_threshold,
            report.counts.tpc,
            report.counts.fpc,
            report.counts.fnc,
            report.counts.tnc,
            report.precision.unwrap_or(0.0),
            report.recall.unwrap_or(0.0)
        );
        Ok(())
    }

    fn cost_surfaces(&mut self) -> Result<()> {
        self.ensure_trained()?;
        let trained = self.trained.as_ref().expect("trained");
        let predictions = predict_windows(&trained.file.weights, &trained.dataset.test)?;
        let labels: Vec<Label> = trained.dataset.test.iter().map(|w| w.label).collect();
        let positives = labels.iter().filter(|&&l| l == Label::Ho).count() as f64;
        let negatives = labels.len() as f64 - positives;
        let pr_points: Vec<(f64, f64)> = trained
            .pr_reports
            .iter()
            .filter_map(|r| Some((r.precision?, r.recall?)))
            .collect();

        for (c_p, c_n) in [(1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
            let dir = self.out_dir.join(format!("cost_surfaces/cp{c_p}_cn{c_n}"));
            std::fs::create_dir_all(&dir)?;
            let surface = cost_surface(c_p, c_n, positives, negatives, 41)?;
            write_surface_csv(&surface.points, &dir.join("surface.csv"))?;
            std::fs::write(
                dir.join("surface_meta.json"),
                serde_json::to_string_pretty(&surface.meta)?,
            )?;
            let overlay = overlay_costs(&pr_points, c_p, c_n, positives, negatives)?;
            write_surface_csv(&overlay, &dir.join("overlay.csv"))?;

            let decisions =
                decisions_from_predictions(&predictions, &labels, trained.selected_threshold)?;
            let params = CostParams::constant(c_p, c_n);
            let ledger = evaluate_cost(&decisions, &params)?;
            let reduction = compare_to_traditional(&decisions, &params)?;
            std::fs::write(
                dir.join("ledger.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "c_p": c_p, "c_n": c_n,
                    "ledger": ledger,
                    "reduction_vs_traditional": reduction,
                }))?,
            )?;
            match reduction {
                Some(r) => println!(
                    "config (c_p={c_p}, c_n={c_n}): total={:.1} vs always-buy={:.1} (reduction {:.1}%)",
                    ledger.total,
                    ledger.traditional,
                    100.0 * r
                ),
                None => println!("config (c_p={c_p}, c_n={c_n}): always-buy baseline is zero"),
            }
        }
        Ok(())
    }
}
