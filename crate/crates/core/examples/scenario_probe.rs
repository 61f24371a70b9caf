use hopred_core::radiosim::{generate_trace, Scenario};

fn main() {
    let scenario = Scenario::default_four_cell();
    let trace = generate_trace(&scenario).unwrap();
    let n = trace.len();
    let ho: usize = trace.iter().filter(|s| s.handover).count();
    println!("samples={n} handovers={ho} fraction={:.4}", ho as f64 / n as f64);
    // window label rate for k=10, t=9
    let (k, t) = (10usize, 9usize);
    let mut pos = 0usize;
    let mut total = 0usize;
    let mut by_ue: std::collections::BTreeMap<&str, Vec<&hopred_core::radiosim::MeasurementSample>> = Default::default();
    for s in &trace { by_ue.entry(s.ue_id.as_str()).or_default().push(s); }
    for (ue, ss) in &by_ue {
        let len = ss.len();
        let hos: usize = ss.iter().filter(|s| s.handover).count();
        println!("  {ue}: len={len} ho={hos} frac={:.4}", hos as f64 / len as f64);
        if len < k + t { continue; }
        for e in (k - 1)..(len - t) {
            total += 1;
            if ss[e + 1..=e + t].iter().any(|s| s.handover) { pos += 1; }
        }
    }
    println!("windows={total} positive={pos} rate={:.4}", pos as f64 / total as f64);
}
