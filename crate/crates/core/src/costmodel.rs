//! Resource-acquisition cost model.
//!
//! Per timestep, a binary purchase decision `p_t` is charged `c_p_t` when
//! the resource turns out not to be required (`r_t = 0`), and skipping the
//! purchase is charged `c_n_t` when it was required (`r_t = 1`). Matching
//! decisions cost nothing. The traditional baseline buys at every step, so
//! it pays `c_p_t` exactly when the resource is idle. Cost surfaces map
//! (precision, recall) operating points onto normalized cost in [0, 1].

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::seqmodel::Prediction;

/// A per-timestep cost coefficient: constant or an explicit series. Every
/// value must lie in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSeries {
    Constant(f64),
    Series(Vec<f64>),
}

impl CostSeries {
    fn validate(&self, len: usize, name: &str) -> Result<()> {
        match self {
            CostSeries::Constant(v) => in_unit(*v, name),
            CostSeries::Series(values) => {
                if values.len() != len {
                    return Err(Error::Cost(format!(
                        "{name} series has {} entries for {len} timesteps",
                        values.len()
                    )));
                }
                values.iter().try_for_each(|&v| in_unit(v, name))
            }
        }
    }

    fn at(&self, t: usize) -> f64 {
        match self {
            CostSeries::Constant(v) => *v,
            CostSeries::Series(values) => values[t],
        }
    }
}

fn in_unit(v: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Cost(format!("{name} value {v} outside [0, 1]")));
    }
    Ok(())
}

/// SLA-derived cost coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Cost of paying for a resource that was not required.
    pub c_p: CostSeries,
    /// Cost of not paying for a resource that was required.
    pub c_n: CostSeries,
}

impl CostParams {
    pub fn constant(c_p: f64, c_n: f64) -> Self {
        Self { c_p: CostSeries::Constant(c_p), c_n: CostSeries::Constant(c_n) }
    }
}

/// Aligned purchase decisions and ground-truth requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSeries {
    pub purchases: Vec<bool>,
    pub requirements: Vec<bool>,
}

impl DecisionSeries {
    pub fn new(purchases: Vec<bool>, requirements: Vec<bool>) -> Result<Self> {
        if purchases.len() != requirements.len() {
            return Err(Error::Cost(format!(
                "{} purchase decisions vs {} requirements",
                purchases.len(),
                requirements.len()
            )));
        }
        Ok(Self { purchases, requirements })
    }

    pub fn len(&self) -> usize {
        self.purchases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.purchases.is_empty()
    }
}

/// Binds model outputs to the cost variables: the purchase decision is the
/// thresholded prediction and the requirement is the ground-truth label.
pub fn decisions_from_predictions(
    predictions: &[Prediction],
    labels: &[Label],
    threshold: f64,
) -> Result<DecisionSeries> {
    if predictions.len() != labels.len() {
        return Err(Error::Cost(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    DecisionSeries::new(
        predictions.iter().map(|p| p.decide(threshold) == Label::Ho).collect(),
        labels.iter().map(|&l| l == Label::Ho).collect(),
    )
}

/// Aggregated costs over a decision series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    /// Total cost of paying when not required (false-positive side).
    pub paying: f64,
    /// Total cost of not paying when required (false-negative side).
    pub not_paying: f64,
    pub total: f64,
    /// Always-buy baseline: pays `c_p_t` whenever the resource is idle.
    pub traditional: f64,
    /// `total` divided by the all-wrong corner cost; absent when that
    /// denominator is zero.
    pub normalized_total: Option<f64>,
}

/// Evaluates the cost sums over an aligned decision/requirement series.
pub fn evaluate_cost(decisions: &DecisionSeries, params: &CostParams) -> Result<CostLedger> {
    let len = decisions.len();
    params.c_p.validate(len, "c_p")?;
    params.c_n.validate(len, "c_n")?;
    let mut paying = 0.0;
    let mut not_paying = 0.0;
    let mut traditional = 0.0;
    let mut worst = 0.0;
    for t in 0..len {
        let p = decisions.purchases[t] as u8 as f64;
        let r = decisions.requirements[t] as u8 as f64;
        paying += params.c_p.at(t) * p * (1.0 - r);
        not_paying += params.c_n.at(t) * r * (1.0 - p);
        traditional += params.c_p.at(t) * (1.0 - r);
        worst += params.c_p.at(t) * (1.0 - r) + params.c_n.at(t) * r;
    }
    let total = paying + not_paying;
    Ok(CostLedger {
        paying,
        not_paying,
        total,
        traditional,
        normalized_total: (worst > 0.0).then(|| total / worst),
    })
}

/// Cost reduction fraction against the always-buy baseline:
/// `1 - total / traditional`. Absent when the baseline cost is zero.
pub fn compare_to_traditional(decisions: &DecisionSeries, params: &CostParams) -> Result<Option<f64>> {
    let ledger = evaluate_cost(decisions, params)?;
    if ledger.traditional == 0.0 {
        return Ok(None);
    }
    Ok(Some(1.0 - ledger.total / ledger.traditional))
}

/// Normalized cost of a (precision, recall) operating point for `Np`
/// positive and `Nn` negative instances under constant costs.
///
/// Counts are reconstructed from the metrics: `TP = R*Np`, `FN = (1-R)*Np`
/// and `FP = TP*(1-P)/P`, capped at `Nn`; a precision of exactly 0 pins
/// `FP = Nn`. The normalizer is the all-wrong corner `c_p*Nn + c_n*Np`, so
/// the surface is 1 at (0,0) and 0 at (1,1). Returns `None` when the
/// normalizer is zero.
pub fn cost_from_metrics(
    precision: f64,
    recall: f64,
    positives: f64,
    negatives: f64,
    c_p: f64,
    c_n: f64,
) -> Result<Option<f64>> {
    in_unit(precision, "precision")?;
    in_unit(recall, "recall")?;
    in_unit(c_p, "c_p")?;
    in_unit(c_n, "c_n")?;
    if positives < 0.0 || negatives < 0.0 {
        return Err(Error::Cost("instance counts must be nonnegative".into()));
    }
    let tp = recall * positives;
    let fn_count = (1.0 - recall) * positives;
    let fp = if precision > 0.0 { (tp * (1.0 - precision) / precision).min(negatives) } else { negatives };
    let denominator = c_p * negatives + c_n * positives;
    if denominator == 0.0 {
        return Ok(None);
    }
    Ok(Some((c_p * fp + c_n * fn_count) / denominator))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub precision: f64,
    pub recall: f64,
    pub cost: Option<f64>,
}

/// Metadata emitted next to surface and overlay files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub c_p: f64,
    pub c_n: f64,
    pub positives: f64,
    pub negatives: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSurface {
    pub meta: SurfaceMeta,
    /// Row-major grid: precision varies slowest, recall fastest.
    pub points: Vec<SurfacePoint>,
}

/// Evaluates [`cost_from_metrics`] over a uniform precision x recall grid.
pub fn cost_surface(c_p: f64, c_n: f64, positives: f64, negatives: f64, resolution: usize) -> Result<CostSurface> {
    if resolution < 2 {
        return Err(Error::Cost("surface resolution must be >= 2".into()));
    }
    let axis: Vec<f64> = (0..resolution).map(|i| i as f64 / (resolution - 1) as f64).collect();
    let mut points = Vec::with_capacity(resolution * resolution);
    for &precision in &axis {
        for &recall in &axis {
            points.push(SurfacePoint {
                precision,
                recall,
                cost: cost_from_metrics(precision, recall, positives, negatives, c_p, c_n)?,
            });
        }
    }
    Ok(CostSurface {
        meta: SurfaceMeta { c_p, c_n, positives, negatives, resolution },
        points,
    })
}

/// Costs for a list of model (precision, recall) operating points, the
/// overlay drawn on top of a surface.
pub fn overlay_costs(
    points: &[(f64, f64)],
    c_p: f64,
    c_n: f64,
    positives: f64,
    negatives: f64,
) -> Result<Vec<SurfacePoint>> {
    points
        .iter()
        .map(|&(precision, recall)| {
            Ok(SurfacePoint {
                precision,
                recall,
                cost: cost_from_metrics(precision, recall, positives, negatives, c_p, c_n)?,
            })
        })
        .collect()
}

/// `precision,recall,cost` rows; absent costs stay empty.
pub fn write_surface_csv(points: &[SurfacePoint], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "precision,recall,cost")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            p.precision,
            p.recall,
            p.cost.map(|c| c.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(purchases: &[u8], requirements: &[u8]) -> DecisionSeries {
        DecisionSeries::new(
            purchases.iter().map(|&p| p == 1).collect(),
            requirements.iter().map(|&r| r == 1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_matching_costs_nothing() {
        let r = [1u8, 0, 1, 1, 0, 0, 1];
        let d = series(&r, &r);
        let ledger = evaluate_cost(&d, &CostParams::constant(1.0, 1.0)).unwrap();
        assert_eq!(ledger.total, 0.0);
        assert_eq!(ledger.paying, 0.0);
        assert_eq!(ledger.not_paying, 0.0);
    }

    #[test]
    fn unit_costs_count_fp_and_fn() {
        // 3 false positives, 2 false negatives.
        let p = [1u8, 1, 1, 0, 0, 1, 0, 0];
        let r = [0u8, 0, 0, 1, 1, 1, 0, 0];
        let ledger = evaluate_cost(&series(&p, &r), &CostParams::constant(1.0, 1.0)).unwrap();
        assert_eq!(ledger.paying, 3.0);
        assert_eq!(ledger.not_paying, 2.0);
        assert_eq!(ledger.total, 5.0);
    }

    #[test]
    fn traditional_baseline_pays_for_idle_steps() {
        // T=100, 10 required steps, always buying with c_p=1: C_trad = 90.
        let requirements: Vec<bool> = (0..100).map(|t| t < 10).collect();
        let purchases = vec![true; 100];
        let d = DecisionSeries::new(purchases, requirements).unwrap();
        let ledger = evaluate_cost(&d, &CostParams::constant(1.0, 1.0)).unwrap();
        assert_eq!(ledger.traditional, 90.0);
        // Always buying is exactly the baseline.
        assert_eq!(ledger.total, ledger.traditional);
        assert_eq!(compare_to_traditional(&d, &CostParams::constant(1.0, 1.0)).unwrap(), Some(0.0));
    }

    #[test]
    fn perfect_model_reduction_is_one() {
        let requirements: Vec<bool> = (0..50).map(|t| t % 5 == 0).collect();
        let d = DecisionSeries::new(requirements.clone(), requirements).unwrap();
        let reduction = compare_to_traditional(&d, &CostParams::constant(1.0, 1.0)).unwrap();
        assert_eq!(reduction, Some(1.0));
    }

    #[test]
    fn zero_baseline_is_undefined() {
        // Every step requires the resource: the always-buy baseline is free.
        let d = series(&[0, 0], &[1, 1]);
        assert_eq!(compare_to_traditional(&d, &CostParams::constant(1.0, 1.0)).unwrap(), None);
    }

    #[test]
    fn time_varying_series_are_summed() {
        let params = CostParams {
            c_p: CostSeries::Series(vec![0.5, 0.25, 1.0, 0.0]),
            c_n: CostSeries::Series(vec![1.0, 0.5, 0.0, 0.75]),
        };
        // FP at t=0 and t=2; FN at t=3.
        let d = series(&[1, 0, 1, 0], &[0, 0, 0, 1]);
        let ledger = evaluate_cost(&d, &params).unwrap();
        assert_eq!(ledger.paying, 1.5);
        assert_eq!(ledger.not_paying, 0.75);
        assert_eq!(ledger.traditional, 0.5 + 0.25 + 1.0);
    }

    #[test]
    fn length_and_range_validation() {
        assert!(DecisionSeries::new(vec![true], vec![]).is_err());
        let d = series(&[1, 0], &[0, 1]);
        assert!(evaluate_cost(&d, &CostParams::constant(1.5, 0.0)).is_err());
        let short = CostParams { c_p: CostSeries::Series(vec![0.5]), c_n: CostSeries::Constant(1.0) };
        assert!(evaluate_cost(&d, &short).is_err());
    }

    #[test]
    fn surface_anchor_values() {
        for (c_p, c_n) in [(1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
            let zero = cost_from_metrics(1.0, 1.0, 100.0, 300.0, c_p, c_n).unwrap().unwrap();
            assert_eq!(zero, 0.0, "config ({c_p},{c_n})");
            let one = cost_from_metrics(0.0, 0.0, 100.0, 300.0, c_p, c_n).unwrap().unwrap();
            assert_eq!(one, 1.0, "config ({c_p},{c_n})");
        }
    }

    #[test]
    fn perfect_precision_with_free_misses_is_free() {
        // c_p=1, c_n=0: at P=1 there are no false positives and misses are
        // free, so the cost is 0 for every recall.
        for recall in [0.0, 0.3, 0.7, 1.0] {
            let c = cost_from_metrics(1.0, recall, 50.0, 70.0, 1.0, 0.0).unwrap().unwrap();
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    fn availability_config_ignores_precision() {
        // c_p=0, c_n=1: cost = (1 - recall) regardless of precision.
        for precision in [0.0, 0.4, 1.0] {
            let c = cost_from_metrics(precision, 0.25, 80.0, 20.0, 0.0, 1.0).unwrap().unwrap();
            assert!((c - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_corner_from_hand_arithmetic() {
        // (1,1) config, P=1, R=0, Np=Nn: FN=Np, FP=0, cost = Np/(Np+Nn) = 0.5.
        let c = cost_from_metrics(1.0, 0.0, 64.0, 64.0, 1.0, 1.0).unwrap().unwrap();
        assert_eq!(c, 0.5);
    }

    #[test]
    fn fp_is_capped_by_negatives() {
        // Tiny precision implies more FPs than exist; the cap keeps the
        // normalized cost at or below 1.
        let c = cost_from_metrics(0.01, 1.0, 1000.0, 10.0, 1.0, 0.0).unwrap().unwrap();
        assert!(c <= 1.0);
        assert_eq!(c, 1.0);
    }

    #[test]
    fn zero_denominator_is_absent() {
        assert_eq!(cost_from_metrics(0.5, 0.5, 0.0, 0.0, 1.0, 1.0).unwrap(), None);
        assert_eq!(cost_from_metrics(0.5, 0.5, 10.0, 10.0, 0.0, 0.0).unwrap(), None);
    }

    #[test]
    fn surface_grid_shape_and_extremes() {
        let surface = cost_surface(1.0, 1.0, 100.0, 100.0, 5).unwrap();
        assert_eq!(surface.points.len(), 25);
        let corner = |p: f64, r: f64| {
            surface
                .points
                .iter()
                .find(|pt| pt.precision == p && pt.recall == r)
                .unwrap()
                .cost
                .unwrap()
        };
        assert_eq!(corner(1.0, 1.0), 0.0);
        assert_eq!(corner(0.0, 0.0), 1.0);
        assert!(cost_surface(1.0, 1.0, 10.0, 10.0, 1).is_err());
    }

    #[test]
    fn linearity_in_cost_scale() {
        let p = [1u8, 1, 0, 0, 1, 0];
        let r = [0u8, 1, 1, 0, 0, 1];
        let d = series(&p, &r);
        let a = evaluate_cost(&d, &CostParams::constant(0.8, 0.6)).unwrap();
        let b = evaluate_cost(&d, &CostParams::constant(0.4, 0.3)).unwrap();
        assert!((a.total - 2.0 * b.total).abs() < 1e-12);
        assert!((a.traditional - 2.0 * b.traditional).abs() < 1e-12);
        let ra = compare_to_traditional(&d, &CostParams::constant(0.8, 0.6)).unwrap().unwrap();
        let rb = compare_to_traditional(&d, &CostParams::constant(0.4, 0.3)).unwrap().unwrap();
        assert!((ra - rb).abs() < 1e-12);
    }
}
