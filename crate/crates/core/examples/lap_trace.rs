use hopred_core::radiosim::{generate_trace, Scenario};

fn main() {
    let mut scenario = Scenario::default_four_cell();
    scenario.duration_s = 230;
    let trace = generate_trace(&scenario).unwrap();
    for s in trace.iter().filter(|s| s.ue_id == "ue-0") {
        if s.timestamp < 60 || s.timestamp > 160 { continue; }
        let n1 = &s.neighbors[0];
        println!("ts={:3} serving={} s_rsrp={:6.1} n1={}({:6.1}) gap={:5.1} {}",
            s.timestamp, s.serving_cell, s.serving.rsrp,
            n1.cell.as_deref().unwrap_or("-"), n1.metrics.rsrp,
            n1.metrics.rsrp - s.serving.rsrp,
            if s.handover { "HO" } else { "" });
    }
}
