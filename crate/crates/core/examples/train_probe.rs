use std::time::Instant;
use hopred_core::dataset::{self, SplitRatios, WindowSpec, Label};
use hopred_core::evalkit;
use hopred_core::radiosim::{generate_trace, Scenario};
use hopred_core::seqmodel::{predict_windows, train, ModelSpec, TrainConfig};

fn main() {
    let t0 = Instant::now();
    let scenario = Scenario::default_four_cell();
    let trace = generate_trace(&scenario).unwrap();
    println!("simulate: {:.1}s, {} samples", t0.elapsed().as_secs_f64(), trace.len());

    let spec_w = WindowSpec::new(10, 9).unwrap();
    let windows = dataset::build_windows(&trace, &spec_w).unwrap();
    let split = dataset::split(windows, &SplitRatios::default()).unwrap();
    println!("windows: train={} val={} test={} cw=({:.3},{:.3})",
        split.train.len(), split.validation.len(), split.test.len(),
        split.class_weights.ho, split.class_weights.no_ho);

    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let model: String = args.get(2).cloned().unwrap_or_else(|| "full".into());
    let spec = if model == "full" { ModelSpec::default() } else { ModelSpec::compact(model.parse().unwrap()) };

    let config = TrainConfig { epochs, early_stop_patience: 0, ..TrainConfig::default() };
    let t1 = Instant::now();
    let (weights, log) = train(&split, &spec, &config).unwrap();
    println!("train {} epochs: {:.1}s", log.epochs.len(), t1.elapsed().as_secs_f64());
    for e in &log.epochs {
        println!("  epoch {}: train={:.4} val={:.4} P={:?} R={:?} F1={:?}",
            e.epoch, e.train_loss, e.val_loss,
            e.val_precision.map(|v| (v*1000.0).round()/1000.0),
            e.val_recall.map(|v| (v*1000.0).round()/1000.0),
            e.val_f1.map(|v| (v*1000.0).round()/1000.0));
    }

    let preds = predict_windows(&weights, &split.test).unwrap();
    let labels: Vec<Label> = split.test.iter().map(|w| w.label).collect();
    for thr in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8] {
        let r = evalkit::metrics(&preds, &labels, thr, &spec_w).unwrap();
        println!("test thr={thr}: P={:?} R={:?} F1={:?}", r.precision.map(|v| (v*1000.0).round()/1000.0), r.recall.map(|v| (v*1000.0).round()/1000.0), r.f1.map(|v| (v*1000.0).round()/1000.0));
    }
    println!("total: {:.1}s", t0.elapsed().as_secs_f64());
}
