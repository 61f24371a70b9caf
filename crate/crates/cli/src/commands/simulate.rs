use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use hopred_core::manifest::sha256_bytes;
use hopred_core::radiosim::{generate_trace, write_trace, Scenario};

use crate::resolve_out;

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario JSON; the built-in four-cell scenario when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario's duration in seconds.
    #[arg(long)]
    pub duration: Option<u64>,
    /// Trace CSV output path.
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let mut scenario = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scenario {}", path.display()))?;
            Scenario::from_json(&text)?
        }
        None => Scenario::default_four_cell(),
    };
    if let Some(seed) = args.seed {
        scenario.env.seed = seed;
    }
    if let Some(duration) = args.duration {
        scenario.duration_s = duration;
    }
    scenario.validate()?;

    let trace = generate_trace(&scenario)?;
    let out = resolve_out(&args.out);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_trace(&trace, &out)?;

    let resolved = scenario.to_json()?;
    let scenario_out = out.with_file_name(format!(
        "{}.scenario.json",
        out.file_stem().unwrap_or_default().to_string_lossy()
    ));
    std::fs::write(&scenario_out, &resolved)?;

    let handovers = trace.iter().filter(|s| s.handover).count();
    let inputs: Vec<&std::path::Path> = args.scenario.iter().map(|p| p.as_path()).collect();
    super::write_manifest(
        "simulate",
        Some(scenario.env.seed),
        &inputs,
        &[&out, &scenario_out],
        serde_json::json!({
            "scenario_sha256": sha256_bytes(resolved.as_bytes()),
            "duration_s": scenario.duration_s,
            "cells": scenario.cells.len(),
            "ues": scenario.ues.len(),
        }),
    )?;

    println!(
        "wrote {} samples ({} handovers, {:.2}%) to {}",
        trace.len(),
        handovers,
        100.0 * handovers as f64 / trace.len().max(1) as f64,
        out.display()
    );
    Ok(())
}
