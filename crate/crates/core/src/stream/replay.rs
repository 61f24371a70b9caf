//! Trace replay: emits indications in timestamp order with optional
//! real-time pacing and bounded-backoff retry toward the sink.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::radiosim::MeasurementSample;

use super::IndicationMessage;

/// Where replayed messages go. Implementations may reconnect internally;
/// `send` failures are retried by the replay loop.
pub trait Sink {
    fn send(&mut self, line: &str) -> std::io::Result<()>;
}

/// Plain writer sink (stdout, files, TCP streams).
pub struct WriteSink<W: Write>(pub W);

impl<W: Write> Sink for WriteSink<W> {
    fn send(&mut self, line: &str) -> std::io::Result<()> {
        self.0.write_all(line.as_bytes())?;
        self.0.write_all(b"\n")?;
        self.0.flush()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    /// Real-time multiplier: 1 paces one trace second per wall second,
    /// 10 runs ten times faster, 0 runs as fast as possible.
    pub rate: f64,
    /// Send retries before giving up.
    pub max_retries: u32,
    /// First retry delay; doubles per attempt.
    pub initial_backoff: Duration,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        Self { rate: 0.0, max_retries: 3, initial_backoff: Duration::from_millis(100) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayStats {
    pub messages: u64,
    pub ticks: u64,
    pub retries: u64,
}

/// Replays a trace as NDJSON indications, all UEs of a tick together,
/// ticks in timestamp order, per-UE sequence numbers from 1.
pub fn replay<S: Sink>(trace: &[MeasurementSample], options: &ReplayOptions, sink: &mut S) -> Result<ReplayStats> {
    if options.rate < 0.0 || !options.rate.is_finite() {
        return Err(Error::Stream(format!("replay rate {} must be >= 0", options.rate)));
    }
    let mut order: Vec<usize> = (0..trace.len()).collect();
    order.sort_by_key(|&i| trace[i].timestamp);

    let mut seq: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
    let mut stats = ReplayStats { messages: 0, ticks: 0, retries: 0 };
    let start = Instant::now();
    let mut current_ts: Option<u64> = None;
    let mut tick_index: u64 = 0;

    for &idx in &order {
        let sample = &trace[idx];
        if current_ts != Some(sample.timestamp) {
            if current_ts.is_some() {
                tick_index += 1;
                if options.rate > 0.0 {
                    let deadline = start + Duration::from_secs_f64(tick_index as f64 / options.rate);
                    if let Some(wait) = deadline.checked_duration_since(Instant::now()) {
                        std::thread::sleep(wait);
                    }
                }
            }
            current_ts = Some(sample.timestamp);
            stats.ticks += 1;
        }
        let counter = seq.entry(sample.ue_id.as_str()).or_insert(0);
        *counter += 1;
        let message = IndicationMessage::from_sample(*counter, sample);
        let line = serde_json::to_string(&message)?;
        send_with_backoff(sink, &line, options, &mut stats)?;
        stats.messages += 1;
    }
    Ok(stats)
}

fn send_with_backoff<S: Sink>(
    sink: &mut S,
    line: &str,
    options: &ReplayOptions,
    stats: &mut ReplayStats,
) -> Result<()> {
    let mut backoff = options.initial_backoff;
    for attempt in 0..=options.max_retries {
        match sink.send(line) {
            Ok(()) => return Ok(()),
            Err(e) if attempt < options.max_retries => {
                log::warn!("sink send failed (attempt {}): {e}", attempt + 1);
                stats.retries += 1;
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            Err(e) => {
                return Err(Error::Stream(format!(
                    "sink unavailable after {} retries: {e}",
                    options.max_retries
                )))
            }
        }
    }
    unreachable!("loop returns");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiosim::{generate_trace, Scenario};

    fn test_trace(duration_s: u64) -> Vec<MeasurementSample> {
        let mut scenario = Scenario::default_four_cell();
        scenario.duration_s = duration_s;
        generate_trace(&scenario).unwrap()
    }

    #[test]
    fn unpaced_replay_preserves_order_and_count() {
        let trace = test_trace(25);
        let mut sink = WriteSink(Vec::new());
        let stats = replay(&trace, &ReplayOptions::default(), &mut sink).unwrap();
        assert_eq!(stats.messages, 100);
        assert_eq!(stats.ticks, 25);
        let lines: Vec<IndicationMessage> = String::from_utf8(sink.0)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 100);
        // Timestamp order, and per-UE sequence numbers strictly increasing.
        for pair in lines.windows(2) {
            assert!(pair[1].ts >= pair[0].ts);
        }
        let mut last: std::collections::HashMap<String, u64> = Default::default();
        for m in &lines {
            let prev = last.insert(m.ue_id.clone(), m.seq);
            assert_eq!(m.seq, prev.unwrap_or(0) + 1);
        }
    }

    #[test]
    fn pacing_matches_rate_multiplier() {
        let trace = test_trace(12);
        let mut sink = WriteSink(Vec::new());
        let options = ReplayOptions { rate: 10.0, ..Default::default() };
        let start = Instant::now();
        replay(&trace, &options, &mut sink).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        // 12 ticks at 10x: 1.1 s of pacing after the first tick.
        assert!((0.9..=1.45).contains(&elapsed), "elapsed {elapsed}");
    }

    struct FlakySink {
        failures_left: u32,
        lines: Vec<String>,
    }

    impl Sink for FlakySink {
        fn send(&mut self, line: &str) -> std::io::Result<()> {
            if self.failures_left > 0 {
                self.failures_left -= 1;
                return Err(std::io::Error::new(std::io::ErrorKind::BrokenPipe, "down"));
            }
            self.lines.push(line.to_string());
            Ok(())
        }
    }

    #[test]
    fn transient_sink_failures_are_retried() {
        let trace = test_trace(2);
        let mut sink = FlakySink { failures_left: 2, lines: Vec::new() };
        let options = ReplayOptions {
            rate: 0.0,
            max_retries: 3,
            initial_backoff: Duration::from_millis(1),
        };
        let stats = replay(&trace, &options, &mut sink).unwrap();
        assert_eq!(stats.retries, 2);
        assert_eq!(sink.lines.len(), 8);
    }

    #[test]
    fn persistent_sink_failure_aborts() {
        let trace = test_trace(2);
        let mut sink = FlakySink { failures_left: u32::MAX, lines: Vec::new() };
        let options = ReplayOptions {
            rate: 0.0,
            max_retries: 2,
            initial_backoff: Duration::from_millis(1),
        };
        let err = replay(&trace, &options, &mut sink).unwrap_err();
        assert!(err.to_string().contains("sink unavailable"), "got: {err}");
    }
}
