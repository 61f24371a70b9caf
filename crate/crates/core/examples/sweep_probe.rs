use hopred_core::evalkit::{spearman_rank_correlation, sweep_horizon, sweep_history, SweepConfig};
use hopred_core::radiosim::{generate_trace, Scenario};
use hopred_core::seqmodel::{ModelSpec, Optimizer, TrainConfig};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let trace = generate_trace(&Scenario::default_four_cell()).unwrap();
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
        ..SweepConfig::default()
    };
    let horizons: Vec<usize> = (1..=15).collect();
    let result = sweep_horizon(&trace, 10, &horizons, &config).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &result.points {
        match &p.report {
            Some(r) => {
                println!("t={:2} P={:?} R={:?} F1={:?}", p.swept_value,
                    r.precision.map(|v| (v*1000.0).round()/1000.0),
                    r.recall.map(|v| (v*1000.0).round()/1000.0),
                    r.f1.map(|v| (v*1000.0).round()/1000.0));
                if let Some(prec) = r.precision { xs.push(p.swept_value as f64); ys.push(prec); }
            }
            None => println!("t={:2} FAILED: {:?}", p.swept_value, p.error),
        }
    }
    println!("spearman(precision, horizon) = {:?}", spearman_rank_correlation(&xs, &ys));
    println!("horizon sweep took {:.0}s", t0.elapsed().as_secs_f64());

    let t1 = Instant::now();
    let histories = vec![2usize, 3, 5, 10, 15];
    let hist = sweep_history(&trace, 9, &histories, &config).unwrap();
    for p in &hist.points {
        if let Some(r) = &p.report {
            println!("k={:2} P={:?} R={:?} F1={:?}", p.swept_value,
                r.precision.map(|v| (v*1000.0).round()/1000.0),
                r.recall.map(|v| (v*1000.0).round()/1000.0),
                r.f1.map(|v| (v*1000.0).round()/1000.0));
        }
    }
    println!("history sweep took {:.0}s", t1.elapsed().as_secs_f64());
}
