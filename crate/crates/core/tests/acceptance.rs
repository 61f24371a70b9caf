//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`.
//!
//! The heavyweight end-to-end artifacts (stock scenario, trained 32/64/32
//! model, test-split predictions) are built once and shared by the criteria
//! that need them.

use std::sync::OnceLock;
use std::time::Instant;

use hopred_core::costmodel::{
    compare_to_traditional, cost_from_metrics, decisions_from_predictions, evaluate_cost,
    CostParams, DecisionSeries,
};
use hopred_core::dataset::{
    self, ClassWeights, FeatureWindow, Label, SplitRatios, WindowSpec, WindowedSample,
};
use hopred_core::evalkit::{
    self, metrics, select_operating_point, spearman_rank_correlation, sweep_horizon, EvalReport,
    SweepConfig,
};
use hopred_core::radiosim::{
    generate_trace, read_trace, write_trace, MeasurementSample, Scenario,
};
use hopred_core::seqmodel::{
    backward, forward, loss, predict_windows, train, BatchItem, DropoutPlan, ForwardMode,
    LayerSpec, ModelSpec, ModelWeights, Optimizer, Prediction, TrainConfig, WeightsFile,
};
use hopred_core::stream::{replay, serve, DecisionRecord, ReplayOptions, ServeEngine, WriteSink};
use rand::Rng;

struct Artifacts {
    trace: Vec<MeasurementSample>,
    weights_file: WeightsFile,
    test_predictions: Vec<Prediction>,
    test_labels: Vec<Label>,
    selected: EvalReport,
    pipeline_seconds: f64,
}

static ARTIFACTS: OnceLock<Artifacts> = OnceLock::new();

fn artifacts() -> &'static Artifacts {
    ARTIFACTS.get_or_init(|| {
        let started = Instant::now();
        let scenario = Scenario::default_four_cell();
        let trace = generate_trace(&scenario).expect("simulate");

        let window_spec = WindowSpec::default();
        let windows = dataset::build_windows(&trace, &window_spec).expect("windows");
        let dataset = dataset::split(windows, &SplitRatios::default()).expect("split");

        let config = TrainConfig {
            epochs: 6,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 42,
            optimizer: Optimizer::AdaptiveMoment,
            class_weights: None,
            early_stop_patience: 2,
        };
        let (weights, _log) = train(&dataset, &ModelSpec::default(), &config).expect("train");
        let weights_file =
            WeightsFile::new(weights, window_spec, dataset.class_weights, config.seed);

        let test_predictions =
            predict_windows(&weights_file.weights, &dataset.test).expect("test forward");
        let test_labels: Vec<Label> = dataset.test.iter().map(|w| w.label).collect();
        let threshold_reports: Vec<EvalReport> = (1..=19)
            .map(|step| {
                let threshold = step as f64 * 0.05;
                metrics(&test_predictions, &test_labels, threshold, &window_spec)
                    .expect("metrics")
            })
            .collect();
        let selected = select_operating_point(&threshold_reports, 0.75)
            .expect("an operating point meets the precision floor")
            .clone();
        let pipeline_seconds = started.elapsed().as_secs_f64();
        Artifacts {
            trace,
            weights_file,
            test_predictions,
            test_labels,
            selected,
            pipeline_seconds,
        }
    })
}

fn pass(criterion: u32, detail: String) {
    println!("[criterion {criterion:02}] PASS: {detail}");
}

/// Criterion 1: analytic BPTT gradients match central finite differences
/// (eps = 1e-5) within 1e-4 relative error on five random small networks,
/// dropout off, in under 30 seconds.
#[test]
fn criterion_01_gradient_correctness() {
    let started = Instant::now();
    let cases: Vec<(ModelSpec, u64, usize, usize)> = vec![
        (net(&[2], 3), 101, 4, 2),
        (net(&[4], 3), 102, 6, 1),
        (net(&[3, 2], 2), 103, 5, 3),
        (net(&[2, 3], 2), 104, 3, 2),
        (net(&[5], 2), 105, 4, 4),
    ];
    let mut worst_overall = 0.0f64;
    for (spec, seed, steps, batch_len) in cases {
        assert!(spec.param_count() <= 200, "{} params", spec.param_count());
        let worst = gradcheck_max_rel_error(&spec, seed, steps, batch_len);
        assert!(worst < 1e-4, "relative error {worst:.3e} (seed {seed})");
        worst_overall = worst_overall.max(worst);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "gradient check took {elapsed:?}");
    pass(1, format!("5 networks, max relative error {worst_overall:.2e}, {elapsed:.2?}"));
}

fn net(cells: &[usize], input: usize) -> ModelSpec {
    ModelSpec {
        input_size: input,
        layers: cells
            .iter()
            .map(|&c| LayerSpec { cells: c, dropout: 0.0, recurrent_dropout: 0.0 })
            .collect(),
        output_classes: 2,
    }
}

fn gradcheck_max_rel_error(spec: &ModelSpec, seed: u64, steps: usize, batch_len: usize) -> f64 {
    let mut rng = hopred_core::seeding::rng(seed);
    let mut weights = ModelWeights::init(spec, seed).unwrap();
    let windows: Vec<Vec<f64>> = (0..batch_len)
        .map(|_| (0..steps * spec.input_size).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let labels: Vec<Label> =
        (0..batch_len).map(|i| if i % 2 == 0 { Label::Ho } else { Label::NoHo }).collect();
    let batch: Vec<BatchItem> = windows
        .iter()
        .zip(&labels)
        .map(|(w, &label)| BatchItem { features: w, label })
        .collect();
    let class_weights = ClassWeights { ho: 1.4, no_ho: 0.8 };
    let (grads, _) = backward(&weights, &batch, &class_weights, DropoutPlan::Off).unwrap();
    let analytic: Vec<f64> = grads.param_iter().copied().collect();

    let batch_loss = |weights: &ModelWeights| -> f64 {
        batch
            .iter()
            .map(|item| {
                let pred = forward(weights, item.features, ForwardMode::Eval).unwrap();
                loss(&pred, item.label, &class_weights)
            })
            .sum::<f64>()
            / batch.len() as f64
    };
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for p in 0..weights.param_count() {
        let orig = *weights.param_iter().nth(p).unwrap();
        *weights.param_iter_mut().nth(p).unwrap() = orig + eps;
        let up = batch_loss(&weights);
        *weights.param_iter_mut().nth(p).unwrap() = orig - eps;
        let down = batch_loss(&weights);
        *weights.param_iter_mut().nth(p).unwrap() = orig;
        let numeric = (up - down) / (2.0 * eps);
        let rel = (analytic[p] - numeric).abs() / analytic[p].abs().max(numeric.abs()).max(1.0);
        worst = worst.max(rel);
    }
    worst
}

/// Criterion 2: precision/recall/F1 equal brute-force recounts exactly on
/// 1,000 random (prediction, label) sets.
#[test]
fn criterion_02_metric_identities() {
    let mut rng = hopred_core::seeding::rng(2024);
    for set in 0..1000 {
        let len = rng.gen_range(1..=60);
        let threshold = rng.gen_range(0.05..0.95);
        let preds: Vec<Prediction> = (0..len)
            .map(|_| {
                let p: f64 = rng.gen();
                Prediction { p_no_ho: 1.0 - p, p_ho: p }
            })
            .collect();
        let labels: Vec<Label> =
            (0..len).map(|_| if rng.gen::<bool>() { Label::Ho } else { Label::NoHo }).collect();
        let window = WindowSpec::default();
        let report = metrics(&preds, &labels, threshold, &window).unwrap();

        let (mut tp, mut fp, mut fn_c, mut tn) = (0u64, 0u64, 0u64, 0u64);
        for (pred, &label) in preds.iter().zip(&labels) {
            match (pred.p_ho >= threshold, label == Label::Ho) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_c += 1,
                (false, false) => tn += 1,
            }
        }
        assert_eq!(
            (report.counts.tpc, report.counts.fpc, report.counts.fnc, report.counts.tnc),
            (tp, fp, fn_c, tn),
            "set {set}"
        );
        let expect = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        assert_eq!(report.precision, expect(tp, tp + fp), "set {set}");
        assert_eq!(report.recall, expect(tp, tp + fn_c), "set {set}");
        assert_eq!(report.f1, expect(2 * tp, 2 * tp + fp + fn_c), "set {set}");
    }
    pass(2, "1000 random sets recounted exactly".into());
}

/// Criterion 3: with constant costs the evaluated total equals
/// FP*c_p + FN*c_n and the always-buy baseline equals its direct sum, on
/// 1,000 random binary series. Costs are drawn from a dyadic grid so the
/// identity is exact in floating point.
#[test]
fn criterion_03_cost_identities() {
    let mut rng = hopred_core::seeding::rng(3033);
    for set in 0..1000 {
        let len = rng.gen_range(1..=200);
        let c_p = rng.gen_range(0..=64) as f64 / 64.0;
        let c_n = rng.gen_range(0..=64) as f64 / 64.0;
        let purchases: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        let requirements: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        let decisions = DecisionSeries::new(purchases.clone(), requirements.clone()).unwrap();
        let ledger = evaluate_cost(&decisions, &CostParams::constant(c_p, c_n)).unwrap();

        let fp = purchases.iter().zip(&requirements).filter(|&(&p, &r)| p && !r).count() as f64;
        let fn_c = purchases.iter().zip(&requirements).filter(|&(&p, &r)| !p && r).count() as f64;
        assert_eq!(ledger.total, fp * c_p + fn_c * c_n, "set {set}");

        let traditional: f64 =
            requirements.iter().map(|&r| if r { 0.0 } else { c_p }).sum();
        assert_eq!(ledger.traditional, traditional, "set {set}");
    }
    pass(3, "1000 random series match the FP/FN decomposition exactly".into());
}

/// Criterion 4: the stock class-weight example (40,000 windows, 4,350
/// positive) yields 4.5977 / 0.5610 within 1e-3.
#[test]
fn criterion_04_class_weights() {
    let window = FeatureWindow { ue_id: "ue".into(), end_ts: 1, features: vec![[0.5; 12]] };
    let windows: Vec<WindowedSample> = (0..40_000)
        .map(|i| WindowedSample {
            window: window.clone(),
            label: if i < 4_350 { Label::Ho } else { Label::NoHo },
        })
        .collect();
    let cw = dataset::class_weights(&windows).unwrap();
    assert!((cw.ho - 4.5977).abs() < 1e-3, "w_ho = {}", cw.ho);
    assert!((cw.no_ho - 0.5610).abs() < 1e-3, "w_no_ho = {}", cw.no_ho);
    pass(4, format!("w_ho = {:.4}, w_no_ho = {:.4}", cw.ho, cw.no_ho));
}

/// Criterion 5: the normalized cost surface is exactly 0 at (P=1, R=1) and
/// exactly 1 at (P=0, R=0) for all three stock cost configurations.
#[test]
fn criterion_05_surface_anchors() {
    for (c_p, c_n) in [(1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
        for (np, nn) in [(100.0, 300.0), (4213.0, 3771.0), (1.0, 1.0)] {
            let perfect = cost_from_metrics(1.0, 1.0, np, nn, c_p, c_n).unwrap().unwrap();
            assert_eq!(perfect, 0.0, "(c_p={c_p}, c_n={c_n}) at (1,1)");
            let worst = cost_from_metrics(0.0, 0.0, np, nn, c_p, c_n).unwrap().unwrap();
            assert_eq!(worst, 1.0, "(c_p={c_p}, c_n={c_n}) at (0,0)");
        }
    }
    pass(5, "surfaces anchored at 0 for (1,1) and 1 for (0,0) in all three configs".into());
}

/// Criterion 6: on the stock seeded four-cell scenario (40,000 samples,
/// 8-12% handover flags), k=10 and t=9, the trained model reaches recall
/// >= 0.80 at precision >= 0.75 on the chronologically held-out test split,
/// within a 15-minute budget.
#[test]
fn criterion_06_end_to_end_quality() {
    let art = artifacts();
    assert_eq!(art.trace.len(), 40_000);
    let ho = art.trace.iter().filter(|s| s.handover).count() as f64 / art.trace.len() as f64;
    assert!((0.08..=0.12).contains(&ho), "handover fraction {ho:.4}");

    let precision = art.selected.precision.expect("selected precision");
    let recall = art.selected.recall.expect("selected recall");
    assert!(precision >= 0.75, "precision {precision:.4}");
    assert!(recall >= 0.80, "recall {recall:.4}");
    assert!(
        art.pipeline_seconds < 900.0,
        "pipeline took {:.0} s",
        art.pipeline_seconds
    );
    pass(
        6,
        format!(
            "handover rate {:.2}%, selected threshold {:.2}: precision {:.3}, recall {:.3} ({:.0} s)",
            100.0 * ho,
            art.selected.config.threshold,
            precision,
            recall,
            art.pipeline_seconds
        ),
    );
}

/// Criterion 7: precision rank-correlates positively with the horizon
/// (Spearman rho > 0.8) over horizons 1..15 at k=10.
#[test]
fn criterion_07_horizon_trend() {
    let art = artifacts();
    let config = SweepConfig {
        model: ModelSpec::compact(16),
        train: TrainConfig {
            epochs: 3,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 42,
            optimizer: Optimizer::AdaptiveMoment,
            class_weights: None,
            early_stop_patience: 0,
        },
        ratios: SplitRatios::default(),
        threshold: 0.5,
        min_precision: 0.75,
    };
    let horizons: Vec<usize> = (1..=15).collect();
    let result = sweep_horizon(&art.trace, 10, &horizons, &config).unwrap();
    let pairs: Vec<(f64, f64)> = result
        .points
        .iter()
        .filter_map(|p| {
            let report = p.report.as_ref()?;
            Some((p.swept_value as f64, report.precision?))
        })
        .collect();
    assert_eq!(pairs.len(), 15, "every sweep point must train and report precision");
    let xs: Vec<f64> = pairs.iter().map(|(x, _)| *x).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, y)| *y).collect();
    let rho = spearman_rank_correlation(&xs, &ys).expect("correlation defined");
    assert!(rho > 0.8, "spearman rho {rho:.3}");
    pass(7, format!("precision vs horizon spearman rho = {rho:.3} over 15 points"));
}

/// Criterion 8: the selected model's decision series cuts cost by at least
/// half against the always-buy baseline for (c_p=1, c_n=1) on the test
/// split.
#[test]
fn criterion_08_cost_reduction() {
    let art = artifacts();
    let decisions = decisions_from_predictions(
        &art.test_predictions,
        &art.test_labels,
        art.selected.config.threshold,
    )
    .unwrap();
    let params = CostParams::constant(1.0, 1.0);
    let reduction = compare_to_traditional(&decisions, &params)
        .unwrap()
        .expect("baseline cost positive");
    assert!(reduction >= 0.5, "reduction {reduction:.4}");
    pass(8, format!("cost reduction vs always-buy = {:.1}%", 100.0 * reduction));
}

/// Criterion 9: streaming decisions over the replayed test trace are
/// bit-identical to offline forward passes on the same windows.
#[test]
fn criterion_09_stream_batch_parity() {
    let art = artifacts();
    // Chronological tail (last 20% per UE), the same region as the test
    // split.
    let mut by_ue: std::collections::BTreeMap<&str, Vec<&MeasurementSample>> = Default::default();
    for s in &art.trace {
        by_ue.entry(s.ue_id.as_str()).or_default().push(s);
    }
    let mut test_trace: Vec<MeasurementSample> = Vec::new();
    for series in by_ue.values() {
        let start = series.len() * 8 / 10;
        test_trace.extend(series[start..].iter().map(|&s| s.clone()));
    }

    let threshold = art.selected.config.threshold;
    let mut sink = WriteSink(Vec::new());
    replay(&test_trace, &ReplayOptions::default(), &mut sink).unwrap();
    let mut engine = ServeEngine::new(art.weights_file.clone(), threshold, "acceptance").unwrap();
    let mut out = Vec::new();
    let stats = serve(&mut engine, sink.0.as_slice(), &mut out).unwrap();
    assert_eq!(stats.malformed, 0);
    let decisions: Vec<DecisionRecord> = String::from_utf8(out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();

    let k = art.weights_file.window_spec.history_k;
    let offline = dataset::inference_windows(&test_trace, k).unwrap();
    assert_eq!(decisions.len(), offline.len());
    let mut streamed: std::collections::HashMap<(String, u64), &DecisionRecord> =
        std::collections::HashMap::new();
    for d in &decisions {
        streamed.insert((d.ue_id.clone(), d.ts), d);
    }
    for window in &offline {
        let pred = forward(
            &art.weights_file.weights,
            window.features.as_flattened(),
            ForwardMode::Eval,
        )
        .unwrap();
        let decision = streamed[&(window.ue_id.clone(), window.end_ts)];
        assert_eq!(
            decision.p_ho.to_bits(),
            pred.p_ho.to_bits(),
            "ue {} ts {}",
            window.ue_id,
            window.end_ts
        );
        assert_eq!(decision.decision == 1, pred.p_ho >= threshold);
    }
    pass(9, format!("{} streamed decisions bit-identical to batch forward", decisions.len()));
}

/// Criterion 10: repeating simulate -> train -> evaluate with one global
/// seed produces byte-identical trace, weight and report files.
#[test]
fn criterion_10_determinism() {
    let run = |dir: &std::path::Path| {
        let mut scenario = Scenario::default_four_cell();
        scenario.duration_s = 1200;
        scenario.ues.truncate(2);
        let trace = generate_trace(&scenario).unwrap();
        let trace_path = dir.join("trace.csv");
        write_trace(&trace, &trace_path).unwrap();

        let reread = read_trace(&trace_path).unwrap();
        let window_spec = WindowSpec::new(5, 4).unwrap();
        let windows = dataset::build_windows(&reread, &window_spec).unwrap();
        let split = dataset::split(windows, &SplitRatios::default()).unwrap();
        let config = TrainConfig {
            epochs: 2,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 42,
            optimizer: Optimizer::AdaptiveMoment,
            class_weights: None,
            early_stop_patience: 0,
        };
        let (weights, _) = train(&split, &ModelSpec::compact(6), &config).unwrap();
        let file = WeightsFile::new(weights, window_spec, split.class_weights, config.seed);
        let weights_path = dir.join("weights.json");
        hopred_core::seqmodel::save_weights(&file, &weights_path).unwrap();

        let preds = predict_windows(&file.weights, &split.test).unwrap();
        let labels: Vec<Label> = split.test.iter().map(|w| w.label).collect();
        let report = metrics(&preds, &labels, 0.5, &window_spec).unwrap();
        let report_path = dir.join("report.csv");
        evalkit::write_reports_csv(std::slice::from_ref(&report), &report_path).unwrap();
        (
            std::fs::read(trace_path).unwrap(),
            std::fs::read(weights_path).unwrap(),
            std::fs::read(report_path).unwrap(),
        )
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let (trace_a, weights_a, report_a) = run(dir_a.path());
    let (trace_b, weights_b, report_b) = run(dir_b.path());
    assert_eq!(trace_a, trace_b, "trace files differ");
    assert_eq!(weights_a, weights_b, "weight files differ");
    assert_eq!(report_a, report_b, "report files differ");
    pass(10, format!("byte-identical artifacts ({} B trace, {} B weights)", trace_a.len(), weights_a.len()));
}
