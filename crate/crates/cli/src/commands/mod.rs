pub mod cost;
pub mod evaluate;
pub mod replay;
pub mod repro;
pub mod serve;
pub mod simulate;
pub mod sweep;
pub mod train;

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use hopred_core::dataset::{SplitDataset, SplitRatios, WindowedSample};
use hopred_core::manifest::Manifest;
use hopred_core::radiosim::{read_trace, MeasurementSample};
use hopred_core::seqmodel::ModelSpec;

/// Which dataset part a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitChoice {
    Train,
    Validation,
    Test,
    All,
}

impl SplitChoice {
    pub fn pick(self, dataset: &SplitDataset) -> Vec<WindowedSample> {
        match self {
            SplitChoice::Train => dataset.train.clone(),
            SplitChoice::Validation => dataset.validation.clone(),
            SplitChoice::Test => dataset.test.clone(),
            SplitChoice::All => {
                let mut all = dataset.train.clone();
                all.extend(dataset.validation.iter().cloned());
                all.extend(dataset.test.iter().cloned());
                all
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SplitChoice::Train => "train",
            SplitChoice::Validation => "validation",
            SplitChoice::Test => "test",
            SplitChoice::All => "all",
        }
    }
}

pub fn load_trace(path: &Path) -> Result<Vec<MeasurementSample>> {
    read_trace(path).with_context(|| format!("reading trace {}", path.display()))
}

/// `"default"` or `"compact:N"`.
pub fn parse_model(spec: &str) -> Result<ModelSpec> {
    if spec == "default" {
        return Ok(ModelSpec::default());
    }
    if let Some(cells) = spec.strip_prefix("compact:") {
        let cells: usize = cells.parse().context("compact model cell count")?;
        return Ok(ModelSpec::compact(cells));
    }
    bail!("unknown model {spec:?} (expected \"default\" or \"compact:N\")")
}

/// `"a..b"` inclusive ranges or comma lists like `"1,2,5"`.
pub fn parse_values(text: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().context("range start")?;
        let hi: usize = hi.trim().parse().context("range end")?;
        if lo > hi {
            bail!("empty range {text:?}");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("value {v:?}")))
        .collect()
}

/// `"0.6,0.2,0.2"`.
pub fn parse_ratios(text: &str) -> Result<SplitRatios> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("ratio {v:?}")))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        bail!("expected three ratios, got {text:?}");
    }
    Ok(SplitRatios::new(parts[0], parts[1], parts[2])?)
}

/// Writes `<first output>.manifest.json` recording input/output hashes.
pub fn write_manifest(
    command: &str,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
    parameters: serde_json::Value,
) -> Result<()> {
    let mut manifest = Manifest::new(command);
    manifest.seed = seed;
    manifest.parameters = parameters;
    for input in inputs {
        manifest.record_input(input)?;
    }
    for output in outputs {
        manifest.record_output(output)?;
    }
    let first = outputs.first().context("manifest needs at least one output")?;
    let path = first.with_file_name(format!(
        "{}.manifest.json",
        first.file_name().unwrap_or_default().to_string_lossy()
    ));
    manifest.write(&path)?;
    Ok(())
}
