//! Classification metrics, history/horizon sweeps, and operating-point
//! selection under a minimum-precision floor.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Label, SplitRatios, WindowSpec};
use crate::error::{Error, Result};
use crate::radiosim::MeasurementSample;
use crate::seeding;
use crate::seqmodel::{predict_windows, train, ModelSpec, Prediction, TrainConfig};

/// Confusion counts at a decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tpc: u64,
    pub fpc: u64,
    pub fnc: u64,
    pub tnc: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tpc + self.fpc + self.fnc + self.tnc
    }

    /// `TP / (TP + FP)`; absent when nothing was predicted positive.
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tpc, self.tpc + self.fpc)
    }

    /// `TP / (TP + FN)`; absent when there are no positives.
    pub fn recall(&self) -> Option<f64> {
        ratio(self.tpc, self.tpc + self.fnc)
    }

    /// `2TP / (2TP + FP + FN)`.
    pub fn f1(&self) -> Option<f64> {
        ratio(2 * self.tpc, 2 * self.tpc + self.fpc + self.fnc)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// The evaluated configuration: window geometry and decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub history_k: usize,
    pub horizon_t: usize,
    pub threshold: f64,
}

/// Metrics for one (history, horizon, threshold) configuration. Undefined
/// ratios are `None`, never 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub counts: ConfusionCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Counts decisions (`HO` when `p_ho >= threshold`) against labels.
pub fn confusion(predictions: &[Prediction], labels: &[Label], threshold: f64) -> Result<ConfusionCounts> {
    if predictions.is_empty() {
        return Err(Error::Eval("no predictions to evaluate".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Eval(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Eval(format!("threshold {threshold} outside (0, 1)")));
    }
    let mut counts = ConfusionCounts::default();
    for (pred, &label) in predictions.iter().zip(labels) {
        match (pred.decide(threshold), label) {
            (Label::Ho, Label::Ho) => counts.tpc += 1,
            (Label::Ho, Label::NoHo) => counts.fpc += 1,
            (Label::NoHo, Label::Ho) => counts.fnc += 1,
            (Label::NoHo, Label::NoHo) => counts.tnc += 1,
        }
    }
    Ok(counts)
}

pub fn metrics(
    predictions: &[Prediction],
    labels: &[Label],
    threshold: f64,
    window: &WindowSpec,
) -> Result<EvalReport> {
    let counts = confusion(predictions, labels, threshold)?;
    Ok(EvalReport {
        config: EvalConfig {
            history_k: window.history_k,
            horizon_t: window.horizon_t,
            threshold,
        },
        counts,
        precision: counts.precision(),
        recall: counts.recall(),
        f1: counts.f1(),
    })
}

/// Picks the max-recall report among those with precision at or above the
/// floor; ties break toward higher precision, then smaller horizon, then
/// smaller history, then smaller threshold. Reports with undefined
/// precision or recall are excluded. Returns `None` when nothing qualifies.
pub fn select_operating_point<'a>(reports: &'a [EvalReport], min_precision: f64) -> Option<&'a EvalReport> {
    reports
        .iter()
        .filter_map(|r| match (r.precision, r.recall) {
            (Some(p), Some(rec)) if p >= min_precision => Some((r, p, rec)),
            _ => None,
        })
        .max_by(|(a, pa, ra), (b, pb, rb)| {
            ra.partial_cmp(rb)
                .unwrap()
                .then(pa.partial_cmp(pb).unwrap())
                .then(b.config.horizon_t.cmp(&a.config.horizon_t))
                .then(b.config.history_k.cmp(&a.config.history_k))
                .then(b.config.threshold.partial_cmp(&a.config.threshold).unwrap())
        })
        .map(|(r, _, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweptParam {
    Horizon,
    History,
}

/// One sweep point: either a report or the failure that produced none.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub swept_value: usize,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSelection {
    pub report: EvalReport,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub swept: SweptParam,
    pub points: Vec<SweepPoint>,
    pub selection: Option<SweepSelection>,
}

impl SweepResult {
    pub fn reports(&self) -> Vec<&EvalReport> {
        self.points.iter().filter_map(|p| p.report.as_ref()).collect()
    }
}

/// Shared knobs for a sweep: every point retrains the same model family on
/// identically split data, with its seed derived from (base seed, value) so
/// differences reflect the swept parameter rather than initialization luck.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub ratios: SplitRatios,
    pub threshold: f64,
    pub min_precision: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::default(),
            train: TrainConfig::default(),
            ratios: SplitRatios::default(),
            threshold: 0.5,
            min_precision: 0.75,
        }
    }
}

/// Fixed history, swept horizons.
pub fn sweep_horizon(
    trace: &[MeasurementSample],
    history_k: usize,
    horizons: &[usize],
    config: &SweepConfig,
) -> Result<SweepResult> {
    sweep(trace, SweptParam::Horizon, history_k, horizons, config)
}

/// Fixed horizon, swept histories.
pub fn sweep_history(
    trace: &[MeasurementSample],
    horizon_t: usize,
    histories: &[usize],
    config: &SweepConfig,
) -> Result<SweepResult> {
    sweep(trace, SweptParam::History, horizon_t, histories, config)
}

fn sweep(
    trace: &[MeasurementSample],
    swept: SweptParam,
    fixed: usize,
    values: &[usize],
    config: &SweepConfig,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Eval("sweep needs at least one value".into()));
    }
    let mut sorted: Vec<usize> = values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != values.len() {
        return Err(Error::Eval("swept values must be unique".into()));
    }

    let mut points = Vec::with_capacity(sorted.len());
    for &value in &sorted {
        let window = match swept {
            SweptParam::Horizon => WindowSpec::new(fixed, value),
            SweptParam::History => WindowSpec::new(value, fixed),
        }?;
        match sweep_point(trace, &window, value, config) {
            Ok(report) => points.push(SweepPoint { swept_value: value, report: Some(report), error: None }),
            Err(e) => {
                log::warn!("sweep point {value} failed: {e}");
                points.push(SweepPoint { swept_value: value, report: None, error: Some(e.to_string()) });
            }
        }
    }

    let reports: Vec<EvalReport> = points.iter().filter_map(|p| p.report.clone()).collect();
    let selection = select_operating_point(&reports, config.min_precision).map(|report| SweepSelection {
        report: report.clone(),
        reason: format!(
            "max recall among points with precision >= {}",
            config.min_precision
        ),
    });

    if swept == SweptParam::Horizon {
        let pairs: Vec<(f64, f64)> = reports
            .iter()
            .filter_map(|r| r.precision.map(|p| (r.config.horizon_t as f64, p)))
            .collect();
        let xs: Vec<f64> = pairs.iter().map(|(x, _)| *x).collect();
        let ys: Vec<f64> = pairs.iter().map(|(_, y)| *y).collect();
        if let Some(rho) = spearman_rank_correlation(&xs, &ys) {
            log::info!("precision vs horizon rank correlation: {rho:.3} (expected to rise with the horizon)");
        }
    }

    Ok(SweepResult { swept, points, selection })
}

fn sweep_point(
    trace: &[MeasurementSample],
    window: &WindowSpec,
    value: usize,
    config: &SweepConfig,
) -> Result<EvalReport> {
    let windows = dataset::build_windows(trace, window)?;
    let split = dataset::split(windows, &config.ratios)?;
    let mut train_config = config.train.clone();
    train_config.seed = seeding::derive_seed(config.train.seed, 0x7377_6565, value as u64);
    let (weights, _) = train(&split, &config.model, &train_config)?;
    let predictions = predict_windows(&weights, &split.test)?;
    let labels: Vec<Label> = split.test.iter().map(|w| w.label).collect();
    metrics(&predictions, &labels, config.threshold, window)
}

/// Spearman rank correlation with average ranks for ties. `None` when there
/// are fewer than two points or either side has zero variance.
pub fn spearman_rank_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// One row per report: `k,t,threshold,tp,fp,fn,tn,precision,recall,f1`;
/// undefined ratios stay empty.
pub fn write_reports_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "k,t,threshold,tp,fp,fn,tn,precision,recall,f1")?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.config.history_k,
            r.config.horizon_t,
            r.config.threshold,
            r.counts.tpc,
            r.counts.fpc,
            r.counts.fnc,
            r.counts.tnc,
            fmt(r.precision),
            fmt(r.recall),
            fmt(r.f1)
        )?;
    }
    Ok(())
}

pub fn write_reports_json(reports: &[EvalReport], path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(reports)?)?;
    Ok(())
}
