//! Weighting schemes and the per-asset `(min, ideal, max)` weight bands fed to
//! the cascade.
//!
//! The ideal weight is always the VVV weight: inverse volatility after the
//! vol-of-vol adjustment. The band around it comes from the spread of every
//! other scheme, clipped by the portfolio-level floor and cap.

pub mod solvers;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::market_data::{CovarianceMatrix, RiskStats};

pub use solvers::{kkt_residual, risk_contribution_spread, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Equal,
    SimpleVariance,
    SimpleParity,
    Vvv,
    RiskParity,
    MinVariance,
    ConstrainedMinVariance,
    NoShort,
    RiskParityMinus2,
    RiskParityPlus2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub scheme: Scheme,
    pub asset_ids: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightVector {
    pub fn get(&self, asset_id: &str) -> Option<f64> {
        self.asset_ids
            .iter()
            .position(|a| a == asset_id)
            .map(|i| self.weights[i])
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    pub theta: f64,
    pub min_asset_weight: f64,
    pub max_asset_weight: f64,
    pub rp_perturbation: f64,
    pub solver: SolverConfig,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            theta: 1.0,
            min_asset_weight: 0.0,
            max_asset_weight: 0.15,
            rp_perturbation: 0.02,
            solver: SolverConfig::default(),
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.min_asset_weight, self.max_asset_weight);
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Config(format!(
                "need 0 <= min_asset_weight <= max_asset_weight <= 1, got {lo} and {hi}"
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!("theta must be >= 0, got {}", self.theta)));
        }
        if !(self.rp_perturbation >= 0.0) {
            return Err(Error::Config("rp_perturbation must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-asset weight band; `min_w <= ideal_w <= max_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBounds {
    pub asset_id: String,
    pub min_w: f64,
    pub ideal_w: f64,
    pub max_w: f64,
}

impl WeightBounds {
    pub fn new(asset_id: impl Into<String>, min_w: f64, ideal_w: f64, max_w: f64) -> Result<Self> {
        let asset_id = asset_id.into();
        if !(0.0 <= min_w && min_w <= ideal_w && ideal_w <= max_w) {
            return Err(Error::Validation {
                asset: asset_id,
                message: format!("weight band ({min_w}, {ideal_w}, {max_w}) is not ordered"),
            });
        }
        Ok(WeightBounds {
            asset_id,
            min_w,
            ideal_w,
            max_w,
        })
    }

    /// Band for a position being exited entirely.
    pub fn full_exit(asset_id: impl Into<String>) -> Self {
        WeightBounds {
            asset_id: asset_id.into(),
            min_w: 0.0,
            ideal_w: 0.0,
            max_w: 0.0,
        }
    }

    /// Degenerate band pinned at one weight.
    pub fn pinned(asset_id: impl Into<String>, w: f64) -> Self {
        WeightBounds {
            asset_id: asset_id.into(),
            min_w: w,
            ideal_w: w,
            max_w: w,
        }
    }
}

pub fn equal_weights(asset_ids: &[String]) -> Result<WeightVector> {
    if asset_ids.is_empty() {
        return Err(Error::EmptyPortfolio);
    }
    let w = 1.0 / asset_ids.len() as f64;
    Ok(WeightVector {
        scheme: Scheme::Equal,
        asset_ids: asset_ids.to_vec(),
        weights: vec![w; asset_ids.len()],
    })
}

/// `w_i = (1/m_i) / sum_j (1/m_j)`.
pub fn inverse_measure_weights(
    scheme: Scheme,
    asset_ids: &[String],
    measures: &[f64],
) -> Result<WeightVector> {
    if asset_ids.is_empty() {
        return Err(Error::EmptyPortfolio);
    }
    assert_eq!(asset_ids.len(), measures.len());
    if let Some(i) = measures.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::DegenerateMeasure {
            asset: asset_ids[i].clone(),
            value: measures[i],
        });
    }
    let inv: Vec<f64> = measures.iter().map(|m| 1.0 / m).collect();
    let total: f64 = inv.iter().sum();
    Ok(WeightVector {
        scheme,
        asset_ids: asset_ids.to_vec(),
        weights: inv.iter().map(|v| v / total).collect(),
    })
}

pub fn risk_parity_weights(cov: &CovarianceMatrix, cfg: &SolverConfig) -> Result<WeightVector> {
    Ok(WeightVector {
        scheme: Scheme::RiskParity,
        asset_ids: cov.asset_ids.clone(),
        weights: solvers::risk_parity(&cov.entries, cfg)?,
    })
}

pub fn min_variance_weights(cov: &CovarianceMatrix, cfg: &SolverConfig) -> Result<WeightVector> {
    Ok(WeightVector {
        scheme: Scheme::MinVariance,
        asset_ids: cov.asset_ids.clone(),
        weights: solvers::min_variance(&cov.entries, cfg)?,
    })
}

/// Minimum variance under per-asset bounds. `upper = None` leaves the upper
/// side open (the no-short portfolio when `lower` is all zeros).
pub fn constrained_min_variance_weights(
    cov: &CovarianceMatrix,
    lower: &[f64],
    upper: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<WeightVector> {
    let k = cov.dim();
    if lower.len() != k || upper.is_some_and(|u| u.len() != k) {
        return Err(Error::Validation {
            asset: cov.asset_ids.join(","),
            message: "bound vectors must match the covariance dimension".into(),
        });
    }
    let open = vec![f64::INFINITY; k];
    let (weights, _) =
        solvers::bounded_min_variance(&cov.entries, lower, upper.unwrap_or(&open), cfg)?;
    Ok(WeightVector {
        scheme: if upper.is_some() {
            Scheme::ConstrainedMinVariance
        } else {
            Scheme::NoShort
        },
        asset_ids: cov.asset_ids.clone(),
        weights,
    })
}

/// Additive shift of a risk-parity vector, floored at zero and not
/// renormalized.
pub fn perturbed_risk_parity(rp: &WeightVector, delta: f64) -> WeightVector {
    WeightVector {
        scheme: if delta < 0.0 {
            Scheme::RiskParityMinus2
        } else {
            Scheme::RiskParityPlus2
        },
        asset_ids: rp.asset_ids.clone(),
        weights: rp.weights.iter().map(|w| (w + delta).max(0.0)).collect(),
    }
}

/// `minw = max[min(all), min(wvvv, MIN)]`, `maxw = min[max(all), max(wvvv, MAX)]`
/// with `idealw = wvvv`. When the VVV weight falls outside the candidate
/// envelope the violated side is widened to the ideal weight.
pub fn aggregate_weight_bounds(
    candidates: &[WeightVector],
    vvv: &WeightVector,
    config: &WeightConfig,
) -> Result<Vec<WeightBounds>> {
    let lookups: Vec<HashMap<&str, f64>> = candidates
        .iter()
        .map(|c| {
            c.asset_ids
                .iter()
                .map(String::as_str)
                .zip(c.weights.iter().copied())
                .collect()
        })
        .collect();
    vvv.asset_ids
        .iter()
        .zip(&vvv.weights)
        .map(|(asset, &ideal)| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (c, map) in candidates.iter().zip(&lookups) {
                let w = *map.get(asset.as_str()).ok_or_else(|| Error::Coverage {
                    what: scheme_name(c.scheme),
                    asset: asset.clone(),
                })?;
                lo = lo.min(w);
                hi = hi.max(w);
            }
            if candidates.is_empty() {
                lo = ideal;
                hi = ideal;
            }
            let min_w = lo.max(ideal.min(config.min_asset_weight));
            let max_w = hi.min(ideal.max(config.max_asset_weight));
            Ok(WeightBounds {
                asset_id: asset.clone(),
                min_w: min_w.min(ideal).max(0.0),
                ideal_w: ideal,
                max_w: max_w.max(ideal),
            })
        })
        .collect()
}

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Equal => "EqualWeight",
        Scheme::SimpleVariance => "SimpleVarianceWeight",
        Scheme::SimpleParity => "SimpleParityWeight",
        Scheme::Vvv => "vvvWeight",
        Scheme::RiskParity => "riskParityWeight",
        Scheme::MinVariance => "MinVarianceWeight",
        Scheme::ConstrainedMinVariance => "minMaxWeight",
        Scheme::NoShort => "noShortWeight",
        Scheme::RiskParityMinus2 => "riskParityWeight-2%",
        Scheme::RiskParityPlus2 => "riskParityWeight+2%",
    }
}

/// Header of the weight report, one row per asset.
pub const WEIGHT_REPORT_HEADER: [&str; 19] = [
    "AssetName",
    "Volatility",
    "vvvFactor",
    "VVV",
    "Variance",
    "EqualWeight",
    "MinVarianceWeight",
    "SimpleParityWeight",
    "vvvWeight",
    "riskParityWeight",
    "riskParityWeight-2%",
    "riskParityWeight+2%",
    "minMaxWeight",
    "noShortWeight",
    "minWeightAlt",
    "minWeight",
    "idealWeight",
    "maxWeight",
    "trueMinWeight",
];

#[derive(Debug, Clone, PartialEq)]
pub struct WeightReportRow {
    pub asset_id: String,
    pub volatility: f64,
    pub vvv_factor: f64,
    pub vvv: f64,
    pub variance: f64,
    pub equal: f64,
    pub min_variance: f64,
    pub simple_parity: f64,
    pub vvv_weight: f64,
    pub risk_parity: f64,
    pub risk_parity_minus: f64,
    pub risk_parity_plus: f64,
    /// `None` when the floor/cap bounds are infeasible for this many assets.
    pub min_max: Option<f64>,
    pub no_short: f64,
    pub min_weight_alt: f64,
    pub min_weight: f64,
    pub ideal_weight: f64,
    pub max_weight: f64,
    pub true_min_weight: f64,
}

impl WeightReportRow {
    pub fn to_record(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.10}");
        vec![
            self.asset_id.clone(),
            f(self.volatility),
            f(self.vvv_factor),
            f(self.vvv),
            f(self.variance),
            f(self.equal),
            f(self.min_variance),
            f(self.simple_parity),
            f(self.vvv_weight),
            f(self.risk_parity),
            f(self.risk_parity_minus),
            f(self.risk_parity_plus),
            self.min_max.map(f).unwrap_or_default(),
            f(self.no_short),
            f(self.min_weight_alt),
            f(self.min_weight),
            f(self.ideal_weight),
            f(self.max_weight),
            f(self.true_min_weight),
        ]
    }
}

/// Every scheme evaluated on one asset universe, plus the resulting bands.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub vectors: Vec<WeightVector>,
    pub bounds: Vec<WeightBounds>,
    pub rows: Vec<WeightReportRow>,
    pub warnings: Vec<String>,
}

impl WeightTable {
    pub fn vector(&self, scheme: Scheme) -> Option<&WeightVector> {
        self.vectors.iter().find(|v| v.scheme == scheme)
    }
}

/// Runs every scheme on `stats` (one entry per asset, in covariance order)
/// and aggregates the weight bands.
pub fn compute_weight_table(
    stats: &[RiskStats],
    cov: &CovarianceMatrix,
    config: &WeightConfig,
) -> Result<WeightTable> {
    config.validate()?;
    let ids: Vec<String> = stats.iter().map(|s| s.asset_id.clone()).collect();
    if ids != cov.asset_ids {
        return Err(Error::Validation {
            asset: ids.join(","),
            message: "risk stats and covariance cover different assets".into(),
        });
    }
    let k = ids.len();
    let mut warnings = Vec::new();
    let sigma: Vec<f64> = stats.iter().map(|s| s.volatility).collect();
    let var: Vec<f64> = stats.iter().map(|s| s.variance).collect();
    let vvv_sigma: Vec<f64> = stats
        .iter()
        .map(|s| s.volatility + config.theta * s.vvv_factor)
        .collect();

    let equal = equal_weights(&ids)?;
    let simple_var = inverse_measure_weights(Scheme::SimpleVariance, &ids, &var)?;
    let simple_parity = inverse_measure_weights(Scheme::SimpleParity, &ids, &sigma)?;
    let vvv = inverse_measure_weights(Scheme::Vvv, &ids, &vvv_sigma)?;
    let rp = risk_parity_weights(cov, &config.solver)?;
    let minvar = min_variance_weights(cov, &config.solver)?;
    let no_short = constrained_min_variance_weights(cov, &vec![0.0; k], None, &config.solver)?;
    let min_max = match constrained_min_variance_weights(
        cov,
        &vec![config.min_asset_weight; k],
        Some(&vec![config.max_asset_weight; k]),
        &config.solver,
    ) {
        Ok(v) => Some(v),
        Err(Error::Infeasible(msg)) => {
            warnings.push(format!("minMaxWeight skipped: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    let rp_minus = perturbed_risk_parity(&rp, -config.rp_perturbation);
    let rp_plus = perturbed_risk_parity(&rp, config.rp_perturbation);

    let mut vectors = vec![
        equal,
        simple_var,
        simple_parity,
        vvv.clone(),
        rp,
        minvar,
        no_short,
        rp_minus,
        rp_plus,
    ];
    if let Some(v) = min_max.clone() {
        vectors.push(v);
    }
    let bounds = aggregate_weight_bounds(&vectors, &vvv, config)?;

    let pick = |scheme: Scheme, i: usize| -> f64 {
        vectors
            .iter()
            .find(|v| v.scheme == scheme)
            .map_or(f64::NAN, |v| v.weights[i])
    };
    let rows = (0..k)
        .map(|i| {
            let envelope_min = vectors.iter().map(|v| v.weights[i]).fold(f64::INFINITY, f64::min);
            WeightReportRow {
                asset_id: ids[i].clone(),
                volatility: sigma[i],
                vvv_factor: stats[i].vvv_factor,
                vvv: vvv_sigma[i],
                variance: var[i],
                equal: pick(Scheme::Equal, i),
                min_variance: pick(Scheme::MinVariance, i),
                simple_parity: pick(Scheme::SimpleParity, i),
                vvv_weight: pick(Scheme::Vvv, i),
                risk_parity: pick(Scheme::RiskParity, i),
                risk_parity_minus: pick(Scheme::RiskParityMinus2, i),
                risk_parity_plus: pick(Scheme::RiskParityPlus2, i),
                min_max: min_max.as_ref().map(|v| v.weights[i]),
                no_short: pick(Scheme::NoShort, i),
                min_weight_alt: bounds[i].min_w,
                min_weight: envelope_min,
                ideal_weight: bounds[i].ideal_w,
                max_weight: bounds[i].max_w,
                true_min_weight: envelope_min.max(0.0),
            }
        })
        .collect();
    Ok(WeightTable {
        vectors,
        bounds,
        rows,
        warnings,
    })
}
