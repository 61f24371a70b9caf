//! Windowed dataset construction: chronological feature windows, horizon
//! labels, leakage-free splits and class weighting.
//!
//! A window is the last `k` measurement steps of one UE, flattened to a
//! `k x 12` matrix of min-max normalized metrics (serving + 3 neighbors,
//! RSRP/RSRQ/SINR each). Its label is HO when any handover flag is set in
//! the `t` steps strictly after the window's final step.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiosim::MeasurementSample;
use crate::ranges::{MetricRange, RSRP_RANGE, RSRQ_RANGE, SINR_RANGE};

/// Metrics per step: (serving + 3 neighbors) x (RSRP, RSRQ, SINR).
pub const FEATURES_PER_STEP: usize = 12;

/// Feature column order within one step.
pub const FEATURE_ORDER: [&str; FEATURES_PER_STEP] = [
    "s_rsrp", "s_rsrq", "s_sinr", "n1_rsrp", "n1_rsrq", "n1_sinr", "n2_rsrp", "n2_rsrq",
    "n2_sinr", "n3_rsrp", "n3_rsrq", "n3_sinr",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    NoHo,
    Ho,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::NoHo => 0,
            Label::Ho => 1,
        }
    }
}

/// History length `k` and prediction horizon `t`, both in 1 s steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub history_k: usize,
    pub horizon_t: usize,
}

impl WindowSpec {
    pub fn new(history_k: usize, horizon_t: usize) -> Result<Self> {
        if history_k < 1 || horizon_t < 1 {
            return Err(Error::Dataset("history and horizon must both be >= 1".into()));
        }
        Ok(Self { history_k, horizon_t })
    }
}

impl Default for WindowSpec {
    /// 10 s of history predicting 9 s ahead.
    fn default() -> Self {
        Self { history_k: 10, horizon_t: 9 }
    }
}

/// A normalized `k x 12` feature matrix and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    pub ue_id: String,
    /// Timestamp of the window's final (most recent) step.
    pub end_ts: u64,
    pub features: Vec<[f64; FEATURES_PER_STEP]>,
}

/// A feature window with its horizon label.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSample {
    pub window: FeatureWindow,
    pub label: Label,
}

/// `w_l = n / (L * l_n)` over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub ho: f64,
    pub no_ho: f64,
}

impl ClassWeights {
    pub fn uniform() -> Self {
        Self { ho: 1.0, no_ho: 1.0 }
    }

    pub fn for_label(&self, label: Label) -> f64 {
        match label {
            Label::Ho => self.ho,
            Label::NoHo => self.no_ho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        let ratios = Self { train, validation, test };
        ratios.validate()?;
        Ok(ratios)
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|&r| r <= 0.0) {
            return Err(Error::Dataset("split ratios must be positive".into()));
        }
        if ((self.train + self.validation + self.test) - 1.0).abs() > 1e-9 {
            return Err(Error::Dataset("split ratios must sum to 1".into()));
        }
        Ok(())
    }
}

impl Default for SplitRatios {
    /// The 60-20-20 train/validation/test split.
    fn default() -> Self {
        Self { train: 0.6, validation: 0.2, test: 0.2 }
    }
}

/// Chronologically split dataset with train-split class weights.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Vec<WindowedSample>,
    pub validation: Vec<WindowedSample>,
    pub test: Vec<WindowedSample>,
    pub class_weights: ClassWeights,
}

/// Normalizes one measurement sample into its 12 feature columns.
pub fn sample_features(sample: &MeasurementSample) -> [f64; FEATURES_PER_STEP] {
    let mut out = [0.0; FEATURES_PER_STEP];
    let mut idx = 0;
    let mut push = |range: &MetricRange, value: f64| {
        out[idx] = range.normalize(value);
        idx += 1;
    };
    push(&RSRP_RANGE, sample.serving.rsrp);
    push(&RSRQ_RANGE, sample.serving.rsrq);
    push(&SINR_RANGE, sample.serving.sinr);
    for neighbor in &sample.neighbors {
        push(&RSRP_RANGE, neighbor.metrics.rsrp);
        push(&RSRQ_RANGE, neighbor.metrics.rsrq);
        push(&SINR_RANGE, neighbor.metrics.sinr);
    }
    out
}

/// Groups a trace by UE (sorted by id) and checks per-UE timestamps are
/// strictly increasing at 1 s spacing.
fn per_ue_series(trace: &[MeasurementSample]) -> Result<BTreeMap<&str, Vec<&MeasurementSample>>> {
    let mut by_ue: BTreeMap<&str, Vec<&MeasurementSample>> = BTreeMap::new();
    for sample in trace {
        by_ue.entry(sample.ue_id.as_str()).or_default().push(sample);
    }
    for (ue, series) in &by_ue {
        for pair in series.windows(2) {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(Error::Dataset(format!(
                    "ue {ue:?}: timestamps not strictly increasing ({} then {})",
                    pair[0].timestamp, pair[1].timestamp
                )));
            }
            if pair[1].timestamp - pair[0].timestamp != 1 {
                return Err(Error::Dataset(format!(
                    "ue {ue:?}: gap between ts {} and {} (1 s spacing required)",
                    pair[0].timestamp, pair[1].timestamp
                )));
            }
        }
    }
    Ok(by_ue)
}

/// Builds one labeled window per UE position that has `k` history steps and
/// `t` future steps. Output is ordered by ue id, then end timestamp.
pub fn build_windows(trace: &[MeasurementSample], spec: &WindowSpec) -> Result<Vec<WindowedSample>> {
    WindowSpec::new(spec.history_k, spec.horizon_t)?;
    let by_ue = per_ue_series(trace)?;
    let (k, t) = (spec.history_k, spec.horizon_t);
    let mut windows = Vec::new();
    for (ue, series) in &by_ue {
        if series.len() < k + t {
            continue;
        }
        for end in (k - 1)..(series.len() - t) {
            let features = series[end + 1 - k..=end].iter().map(|s| sample_features(s)).collect();
            let label = if series[end + 1..=end + t].iter().any(|s| s.handover) {
                Label::Ho
            } else {
                Label::NoHo
            };
            windows.push(WindowedSample {
                window: FeatureWindow {
                    ue_id: (*ue).to_string(),
                    end_ts: series[end].timestamp,
                    features,
                },
                label,
            });
        }
    }
    Ok(windows)
}

/// Unlabeled windows: every UE position with `k` history steps, including
/// those too close to the end of the trace to carry a label. This is the
/// batch-mode twin of the streaming inference path.
pub fn inference_windows(trace: &[MeasurementSample], history_k: usize) -> Result<Vec<FeatureWindow>> {
    if history_k < 1 {
        return Err(Error::Dataset("history must be >= 1".into()));
    }
    let by_ue = per_ue_series(trace)?;
    let mut windows = Vec::new();
    for (ue, series) in &by_ue {
        if series.len() < history_k {
            continue;
        }
        for end in (history_k - 1)..series.len() {
            windows.push(FeatureWindow {
                ue_id: (*ue).to_string(),
                end_ts: series[end].timestamp,
                features: series[end + 1 - history_k..=end]
                    .iter()
                    .map(|s| sample_features(s))
                    .collect(),
            });
        }
    }
    Ok(windows)
}

/// Class weights `w_l = n / (L * l_n)`; both classes must be present.
pub fn class_weights(windows: &[WindowedSample]) -> Result<ClassWeights> {
    let n = windows.len() as f64;
    let ho = windows.iter().filter(|w| w.label == Label::Ho).count() as f64;
    let no_ho = n - ho;
    if ho == 0.0 || no_ho == 0.0 {
        return Err(Error::Dataset("cannot weight classes: one class has no members".into()));
    }
    Ok(ClassWeights { ho: n / (2.0 * ho), no_ho: n / (2.0 * no_ho) })
}

/// Floor-then-distribute rounding of `m` items over the three ratios:
/// remainders go to the splits with the largest fractional part, earlier
/// split winning ties.
fn split_counts(m: usize, ratios: &SplitRatios) -> [usize; 3] {
    let raw = [ratios.train * m as f64, ratios.validation * m as f64, ratios.test * m as f64];
    let mut counts = [raw[0] as usize, raw[1] as usize, raw[2] as usize];
    let mut rest = m - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for idx in order {
        if rest == 0 {
            break;
        }
        counts[idx] += 1;
        rest -= 1;
    }
    counts
}

/// Splits windows into chronological blocks per UE (train earliest, test
/// latest) and computes class weights on the train split.
pub fn split(windows: Vec<WindowedSample>, ratios: &SplitRatios) -> Result<SplitDataset> {
    ratios.validate()?;
    let mut by_ue: BTreeMap<String, Vec<WindowedSample>> = BTreeMap::new();
    for window in windows {
        by_ue.entry(window.window.ue_id.clone()).or_default().push(window);
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (_, mut series) in by_ue {
        series.sort_by_key(|w| w.window.end_ts);
        let [n_train, n_val, _] = split_counts(series.len(), ratios);
        let rest = series.split_off(n_train);
        train.extend(series);
        let mut rest_iter = rest.into_iter();
        validation.extend(rest_iter.by_ref().take(n_val));
        test.extend(rest_iter);
    }
    for (name, part) in [("train", &train), ("validation", &validation), ("test", &test)] {
        if part.is_empty() {
            return Err(Error::Dataset(format!("too few windows: {name} split is empty")));
        }
    }
    let class_weights = class_weights(&train)?;
    Ok(SplitDataset { train, validation, test, class_weights })
}

/// Sidecar metadata persisted next to a windowed dataset; carries everything
/// needed to reproduce the windows and to run the model on live streams.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub window_spec: WindowSpec,
    pub feature_order: Vec<String>,
    pub normalization: NormalizationRanges,
    pub split_ratios: SplitRatios,
    /// Per UE: last end timestamp of the train and validation blocks.
    pub split_boundaries: BTreeMap<String, SplitBoundary>,
    pub class_weights: ClassWeights,
    pub counts: SplitCounts,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitBoundary {
    pub train_end_ts: Option<u64>,
    pub validation_end_ts: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// The fixed reporting ranges used for min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRanges {
    pub rsrp: MetricRange,
    pub rsrq: MetricRange,
    pub sinr: MetricRange,
}

impl Default for NormalizationRanges {
    fn default() -> Self {
        Self { rsrp: RSRP_RANGE, rsrq: RSRQ_RANGE, sinr: SINR_RANGE }
    }
}

impl SplitDataset {
    pub fn sidecar(&self, spec: &WindowSpec, ratios: &SplitRatios) -> DatasetSidecar {
        let mut split_boundaries: BTreeMap<String, SplitBoundary> = BTreeMap::new();
        let mut ues: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
        for part in [&self.train, &self.validation, &self.test] {
            for w in part {
                ues.insert(w.window.ue_id.as_str());
            }
        }
        for ue in ues {
            let last_ts = |part: &[WindowedSample]| {
                part.iter().filter(|w| w.window.ue_id == ue).map(|w| w.window.end_ts).max()
            };
            split_boundaries.insert(
                ue.to_string(),
                SplitBoundary {
                    train_end_ts: last_ts(&self.train),
                    validation_end_ts: last_ts(&self.validation),
                },
            );
        }
        DatasetSidecar {
            window_spec: *spec,
            feature_order: FEATURE_ORDER.iter().map(|s| s.to_string()).collect(),
            normalization: NormalizationRanges::default(),
            split_ratios: *ratios,
            split_boundaries,
            class_weights: self.class_weights,
            counts: SplitCounts {
                train: self.train.len(),
                validation: self.validation.len(),
                test: self.test.len(),
            },
        }
    }
}

/// Writes windows as CSV (`ue_id,end_ts,split,label,f0..fN`) plus the JSON
/// sidecar.
pub fn save_dataset(
    dataset: &SplitDataset,
    spec: &WindowSpec,
    ratios: &SplitRatios,
    csv_path: &Path,
    sidecar_path: &Path,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(csv_path)?);
    let width = spec.history_k * FEATURES_PER_STEP;
    write!(out, "ue_id,end_ts,split,label")?;
    for i in 0..width {
        write!(out, ",f{i}")?;
    }
    writeln!(out)?;
    for (split_name, part) in
        [("train", &dataset.train), ("validation", &dataset.validation), ("test", &dataset.test)]
    {
        for w in part {
            write!(out, "{},{},{},{}", w.window.ue_id, w.window.end_ts, split_name, w.label.index())?;
            for row in &w.window.features {
                for v in row {
                    write!(out, ",{v}")?;
                }
            }
            writeln!(out)?;
        }
    }
    out.flush()?;
    let sidecar = dataset.sidecar(spec, ratios);
    std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Reads a dataset written by [`save_dataset`].
pub fn load_dataset(csv_path: &Path, sidecar_path: &Path) -> Result<(SplitDataset, DatasetSidecar)> {
    let sidecar: DatasetSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
    let width = sidecar.window_spec.history_k * FEATURES_PER_STEP;
    let reader = BufReader::new(File::open(csv_path)?);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 || line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + width {
            return Err(Error::TraceFormat {
                line: line_no,
                message: format!("expected {} fields, found {}", 4 + width, fields.len()),
            });
        }
        let end_ts: u64 = fields[1].parse().map_err(|_| Error::TraceFormat {
            line: line_no,
            message: format!("invalid end_ts {:?}", fields[1]),
        })?;
        let label = match fields[3] {
            "0" => Label::NoHo,
            "1" => Label::Ho,
            other => {
                return Err(Error::TraceFormat {
                    line: line_no,
                    message: format!("invalid label {other:?}"),
                })
            }
        };
        let mut features = vec![[0.0; FEATURES_PER_STEP]; sidecar.window_spec.history_k];
        for (i, field) in fields[4..].iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::TraceFormat {
                line: line_no,
                message: format!("invalid feature {field:?}"),
            })?;
            features[i / FEATURES_PER_STEP][i % FEATURES_PER_STEP] = value;
        }
        let sample = WindowedSample {
            window: FeatureWindow { ue_id: fields[0].to_string(), end_ts, features },
            label,
        };
        match fields[2] {
            "train" => train.push(sample),
            "validation" => validation.push(sample),
            "test" => test.push(sample),
            other => {
                return Err(Error::TraceFormat {
                    line: line_no,
                    message: format!("invalid split {other:?}"),
                })
            }
        }
    }
    let class_weights = sidecar.class_weights;
    Ok((SplitDataset { train, validation, test, class_weights }, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiosim::{NeighborReading, ReportedMetrics};

    fn sample(ue: &str, ts: u64, handover: bool) -> MeasurementSample {
        MeasurementSample {
            timestamp: ts,
            ue_id: ue.into(),
            serving_cell: "a".into(),
            serving: ReportedMetrics { rsrp: -90.0, rsrq: -10.0, sinr: 5.0 },
            neighbors: [
                NeighborReading {
                    cell: Some("b".into()),
                    metrics: ReportedMetrics { rsrp: -100.0, rsrq: -12.5, sinr: -3.0 },
                },
                NeighborReading::absent(),
                NeighborReading::absent(),
            ],
            handover,
        }
    }

    fn trace(ue: &str, len: u64, ho_at: &[u64]) -> Vec<MeasurementSample> {
        (1..=len).map(|ts| sample(ue, ts, ho_at.contains(&ts))).collect()
    }

    #[test]
    fn window_count_matches_formula() {
        // len 20, k 10, t 9: windows end at ts 10 and 11.
        let spec = WindowSpec::new(10, 9).unwrap();
        let windows = build_windows(&trace("ue-0", 20, &[]), &spec).unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].window.end_ts, 10);
        assert_eq!(windows[1].window.end_ts, 11);
        for (len, k, t) in [(30u64, 5usize, 3usize), (9, 5, 5), (10, 10, 9)] {
            let spec = WindowSpec::new(k, t).unwrap();
            let count = build_windows(&trace("u", len, &[]), &spec).unwrap().len();
            let expected = (len as isize - k as isize - t as isize + 1).max(0) as usize;
            assert_eq!(count, expected, "len={len} k={k} t={t}");
        }
    }

    #[test]
    fn no_handover_means_all_negative() {
        let spec = WindowSpec::new(4, 3).unwrap();
        let windows = build_windows(&trace("ue-0", 30, &[]), &spec).unwrap();
        assert!(windows.iter().all(|w| w.label == Label::NoHo));
    }

    #[test]
    fn label_interval_is_strictly_future() {
        // Handover at ts 15 with t=9 labels exactly the windows whose
        // interval (end, end+9] contains 15: ends 6..=14.
        let spec = WindowSpec::new(5, 9).unwrap();
        let windows = build_windows(&trace("ue-0", 40, &[15]), &spec).unwrap();
        for w in &windows {
            let expected = if (6..=14).contains(&w.window.end_ts) { Label::Ho } else { Label::NoHo };
            assert_eq!(w.label, expected, "end_ts={}", w.window.end_ts);
        }
        assert_eq!(windows.iter().find(|w| w.window.end_ts == 10).unwrap().label, Label::Ho);
        assert_eq!(windows.iter().find(|w| w.window.end_ts == 5).unwrap().label, Label::NoHo);
    }

    #[test]
    fn windows_never_span_ues() {
        let mut t = trace("ue-a", 12, &[]);
        t.extend(trace("ue-b", 12, &[4]));
        let spec = WindowSpec::new(6, 3).unwrap();
        let windows = build_windows(&t, &spec).unwrap();
        assert_eq!(windows.len(), 8);
        assert!(windows.iter().all(|w| w.window.features.len() == 6));
    }

    #[test]
    fn rejects_non_monotone_and_gapped_traces() {
        let mut t = trace("ue-0", 10, &[]);
        t[5].timestamp = 3;
        assert!(build_windows(&t, &WindowSpec::new(2, 2).unwrap()).is_err());
        let mut gapped = trace("ue-0", 10, &[]);
        gapped[5].timestamp = 20;
        assert!(build_windows(&gapped, &WindowSpec::new(2, 2).unwrap()).is_err());
    }

    #[test]
    fn features_are_normalized_in_unit_interval() {
        let s = sample("ue-0", 1, false);
        let f = sample_features(&s);
        assert!(f.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // Serving RSRP -90 in [-140, -44]: (-90+140)/96.
        assert!((f[0] - 50.0 / 96.0).abs() < 1e-12);
        // Absent neighbor slots sit at the range floor.
        assert_eq!(&f[6..12], &[0.0; 6]);
    }

    #[test]
    fn split_100_windows_60_20_20() {
        let spec = WindowSpec::new(3, 2).unwrap();
        let windows = build_windows(&trace("ue-0", 104, &[50]), &spec).unwrap();
        assert_eq!(windows.len(), 100);
        let ds = split(windows, &SplitRatios::default()).unwrap();
        assert_eq!(ds.train.len(), 60);
        assert_eq!(ds.validation.len(), 20);
        assert_eq!(ds.test.len(), 20);
    }

    #[test]
    fn split_5_windows_3_1_1() {
        let spec = WindowSpec::new(3, 2).unwrap();
        let windows = build_windows(&trace("ue-0", 9, &[6]), &spec).unwrap();
        assert_eq!(windows.len(), 5);
        let ds = split(windows, &SplitRatios::default()).unwrap();
        assert_eq!((ds.train.len(), ds.validation.len(), ds.test.len()), (3, 1, 1));
    }

    #[test]
    fn split_blocks_are_chronological_per_ue() {
        let spec = WindowSpec::new(3, 2).unwrap();
        let mut t = trace("ue-a", 50, &[20]);
        t.extend(trace("ue-b", 50, &[30]));
        let windows = build_windows(&t, &spec).unwrap();
        let ds = split(windows, &SplitRatios::default()).unwrap();
        for ue in ["ue-a", "ue-b"] {
            let max_ts = |part: &[WindowedSample]| {
                part.iter().filter(|w| w.window.ue_id == ue).map(|w| w.window.end_ts).max().unwrap()
            };
            let min_ts = |part: &[WindowedSample]| {
                part.iter().filter(|w| w.window.ue_id == ue).map(|w| w.window.end_ts).min().unwrap()
            };
            assert!(max_ts(&ds.train) < min_ts(&ds.validation));
            assert!(max_ts(&ds.validation) < min_ts(&ds.test));
        }
    }

    #[test]
    fn split_rejects_empty_parts() {
        let spec = WindowSpec::new(3, 2).unwrap();
        let windows = build_windows(&trace("ue-0", 6, &[4]), &spec).unwrap();
        assert_eq!(windows.len(), 2);
        let err = split(windows, &SplitRatios::default()).unwrap_err();
        assert!(err.to_string().contains("empty"), "got: {err}");
    }

    #[test]
    fn class_weights_match_hand_arithmetic() {
        // 40,000 windows with 4,350 positives.
        let template = build_windows(&trace("ue-0", 4, &[4]), &WindowSpec::new(2, 1).unwrap())
            .unwrap()
            .pop()
            .unwrap();
        let mut windows = Vec::new();
        for i in 0..40_000 {
            let mut w = template.clone();
            w.label = if i < 4_350 { Label::Ho } else { Label::NoHo };
            windows.push(w);
        }
        let cw = class_weights(&windows).unwrap();
        assert!((cw.ho - 4.5977).abs() < 1e-3, "w_ho = {}", cw.ho);
        assert!((cw.no_ho - 0.5610).abs() < 1e-3, "w_no_ho = {}", cw.no_ho);
        // Weighted total identity: sum over classes of w_l * l_n = n.
        let weighted = cw.ho * 4_350.0 + cw.no_ho * 35_650.0;
        assert!((weighted - 40_000.0).abs() < 1e-9);

        // n=10 with a single positive.
        windows.truncate(10);
        for (i, w) in windows.iter_mut().enumerate() {
            w.label = if i == 0 { Label::Ho } else { Label::NoHo };
        }
        let cw = class_weights(&windows).unwrap();
        assert_eq!(cw.ho, 5.0);
        assert!((cw.no_ho - 10.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn class_weights_balanced_is_unit() {
        let mut windows =
            build_windows(&trace("ue-0", 8, &[6]), &WindowSpec::new(2, 1).unwrap()).unwrap();
        assert_eq!(windows.len(), 6);
        for (i, w) in windows.iter_mut().enumerate() {
            w.label = if i % 2 == 0 { Label::Ho } else { Label::NoHo };
        }
        let cw = class_weights(&windows).unwrap();
        assert_eq!(cw.ho, 1.0);
        assert_eq!(cw.no_ho, 1.0);
    }

    #[test]
    fn class_weights_require_both_classes() {
        let windows =
            build_windows(&trace("ue-0", 20, &[]), &WindowSpec::new(3, 2).unwrap()).unwrap();
        assert!(class_weights(&windows).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let spec = WindowSpec::new(4, 3).unwrap();
        let mut t = trace("ue-a", 40, &[17, 30]);
        t.extend(trace("ue-b", 40, &[9]));
        let windows = build_windows(&t, &spec).unwrap();
        let ratios = SplitRatios::default();
        let ds = split(windows, &ratios).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("windows.csv");
        let side = dir.path().join("windows.json");
        save_dataset(&ds, &spec, &ratios, &csv, &side).unwrap();
        let (back, sidecar) = load_dataset(&csv, &side).unwrap();
        assert_eq!(back.train, ds.train);
        assert_eq!(back.validation, ds.validation);
        assert_eq!(back.test, ds.test);
        assert_eq!(sidecar.window_spec, spec);
        assert_eq!(sidecar.counts.train, ds.train.len());
    }
}
