//! Trace CSV serialization.
//!
//! One row per sample:
//! `ts,ue_id,serving_cell,s_rsrp,s_rsrq,s_sinr,n1_cell,n1_rsrp,n1_rsrq,n1_sinr,
//! n2_cell,n2_rsrp,n2_rsrq,n2_sinr,n3_cell,n3_rsrp,n3_rsrq,n3_sinr,ho`.
//! Numbers are plain decimals with a dot separator; absent neighbor slots
//! have an empty cell id and sentinel floor metrics. Reading validates every
//! metric against its reporting range and quantization grid.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ranges::{MetricRange, RSRP_RANGE, RSRQ_RANGE, SINR_RANGE};

use super::propagation::ReportedMetrics;
use super::{MeasurementSample, NeighborReading};

pub const TRACE_HEADER: &str = "ts,ue_id,serving_cell,s_rsrp,s_rsrq,s_sinr,\
n1_cell,n1_rsrp,n1_rsrq,n1_sinr,n2_cell,n2_rsrp,n2_rsrq,n2_sinr,n3_cell,n3_rsrp,n3_rsrq,n3_sinr,ho";

const FIELDS: usize = 19;

pub fn write_trace(samples: &[MeasurementSample], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{TRACE_HEADER}")?;
    for s in samples {
        write_sample(&mut out, s)?;
    }
    out.flush()?;
    Ok(())
}

fn write_sample<W: Write>(out: &mut W, s: &MeasurementSample) -> Result<()> {
    write!(
        out,
        "{},{},{},{},{},{}",
        s.timestamp,
        s.ue_id,
        s.serving_cell,
        fmt(s.serving.rsrp),
        fmt(s.serving.rsrq),
        fmt(s.serving.sinr)
    )?;
    for n in &s.neighbors {
        write!(
            out,
            ",{},{},{},{}",
            n.cell.as_deref().unwrap_or(""),
            fmt(n.metrics.rsrp),
            fmt(n.metrics.rsrq),
            fmt(n.metrics.sinr)
        )?;
    }
    writeln!(out, ",{}", if s.handover { 1 } else { 0 })?;
    Ok(())
}

/// Quantized metrics are exactly representable, so the shortest decimal
/// round-trips bit-exactly.
fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn read_trace(path: &Path) -> Result<Vec<MeasurementSample>> {
    let reader = BufReader::new(File::open(path)?);
    parse_trace(reader)
}

pub fn parse_trace<R: BufRead>(reader: R) -> Result<Vec<MeasurementSample>> {
    let mut samples = Vec::new();
    let mut last_ts: HashMap<String, u64> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line_no == 1 && (line == TRACE_HEADER || line.is_empty()) {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let sample = parse_row(&line, line_no)?;
        if let Some(&prev) = last_ts.get(&sample.ue_id) {
            if sample.timestamp <= prev {
                return Err(Error::TraceFormat {
                    line: line_no,
                    message: format!(
                        "timestamps must be strictly increasing per ue (ue {:?}: {} after {})",
                        sample.ue_id, sample.timestamp, prev
                    ),
                });
            }
        }
        last_ts.insert(sample.ue_id.clone(), sample.timestamp);
        samples.push(sample);
    }
    Ok(samples)
}

fn parse_row(line: &str, line_no: usize) -> Result<MeasurementSample> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != FIELDS {
        return Err(Error::TraceFormat {
            line: line_no,
            message: format!("expected {FIELDS} fields, found {}", fields.len()),
        });
    }
    let timestamp: u64 = fields[0].parse().map_err(|_| Error::TraceFormat {
        line: line_no,
        message: format!("invalid ts {:?}", fields[0]),
    })?;
    let ue_id = non_empty(fields[1], "ue_id", line_no)?;
    let serving_cell = non_empty(fields[2], "serving_cell", line_no)?;
    let serving = ReportedMetrics {
        rsrp: metric(fields[3], "s_rsrp", &RSRP_RANGE, line_no)?,
        rsrq: metric(fields[4], "s_rsrq", &RSRQ_RANGE, line_no)?,
        sinr: metric(fields[5], "s_sinr", &SINR_RANGE, line_no)?,
    };
    let mut neighbors = [NeighborReading::absent(), NeighborReading::absent(), NeighborReading::absent()];
    for (slot, reading) in neighbors.iter_mut().enumerate() {
        let base = 6 + slot * 4;
        let tag = |m: &str| format!("n{}_{m}", slot + 1);
        let cell = fields[base];
        *reading = NeighborReading {
            cell: if cell.is_empty() { None } else { Some(cell.to_string()) },
            metrics: ReportedMetrics {
                rsrp: metric(fields[base + 1], &tag("rsrp"), &RSRP_RANGE, line_no)?,
                rsrq: metric(fields[base + 2], &tag("rsrq"), &RSRQ_RANGE, line_no)?,
                sinr: metric(fields[base + 3], &tag("sinr"), &SINR_RANGE, line_no)?,
            },
        };
    }
    let handover = match fields[18] {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::TraceFormat {
                line: line_no,
                message: format!("ho must be 0 or 1, found {other:?}"),
            })
        }
    };
    Ok(MeasurementSample { timestamp, ue_id, serving_cell, serving, neighbors, handover })
}

fn non_empty(field: &str, name: &str, line_no: usize) -> Result<String> {
    if field.is_empty() {
        return Err(Error::TraceFormat { line: line_no, message: format!("{name} is empty") });
    }
    Ok(field.to_string())
}

fn metric(field: &str, name: &str, range: &MetricRange, line_no: usize) -> Result<f64> {
    let value: f64 = field.parse().map_err(|_| Error::TraceFormat {
        line: line_no,
        message: format!("invalid {name} {field:?}"),
    })?;
    if !range.contains_quantized(value) {
        return Err(Error::TraceFormat {
            line: line_no,
            message: format!(
                "{name} out of range: {value} (expected [{}, {}] in {} dB steps)",
                range.lo, range.hi, range.step
            ),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiosim::{generate_trace, CellSite, MobilityKind, RadioEnv, Scenario, UeTrack, Waypoint};
    use std::io::Cursor;

    fn small_trace() -> Vec<MeasurementSample> {
        let scenario = Scenario {
            cells: vec![
                CellSite { cell_id: "a".into(), position: [0.0, 0.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
                CellSite { cell_id: "b".into(), position: [500.0, 0.0], tx_power_dbm: 43.0, bandwidth_rbs: 106 },
            ],
            ues: vec![UeTrack {
                ue_id: "ue-0".into(),
                waypoints: vec![
                    Waypoint { position: [100.0, 0.0], speed_mps: 6.0 },
                    Waypoint { position: [400.0, 0.0], speed_mps: 6.0 },
                ],
                mobility_kind: MobilityKind::Linear,
            }],
            env: RadioEnv::default(),
            duration_s: 200,
        };
        generate_trace(&scenario).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let trace = small_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&trace, &path).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn rejects_out_of_range_rsrp() {
        let row = "1,ue-0,a,-30,-10,5,b,-90,-10,5,,-140,-19.5,-20,,-140,-19.5,-20,0";
        let err = parse_trace(Cursor::new(format!("{TRACE_HEADER}\n{row}"))).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s_rsrp") && msg.contains("line 2"), "got: {msg}");
    }

    #[test]
    fn rejects_malformed_row_with_line_number() {
        let err = parse_trace(Cursor::new(format!("{TRACE_HEADER}\n1,ue-0,a,-90"))).unwrap_err();
        assert!(err.to_string().contains("line 2"), "got: {err}");
    }

    #[test]
    fn rejects_off_grid_metric() {
        let row = "1,ue-0,a,-90.3,-10,5,b,-90,-10,5,,-140,-19.5,-20,,-140,-19.5,-20,0";
        let err = parse_trace(Cursor::new(format!("{TRACE_HEADER}\n{row}"))).unwrap_err();
        assert!(err.to_string().contains("s_rsrp"), "got: {err}");
    }

    #[test]
    fn empty_file_is_empty_trace() {
        assert!(parse_trace(Cursor::new("")).unwrap().is_empty());
    }

    #[test]
    fn rejects_non_monotone_timestamps() {
        let row = "5,ue-0,a,-90,-10,5,b,-95,-11,2,,-140,-19.5,-20,,-140,-19.5,-20,0";
        let dup = format!("{TRACE_HEADER}\n{row}\n{row}");
        let err = parse_trace(Cursor::new(dup)).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "got: {err}");
    }
}
