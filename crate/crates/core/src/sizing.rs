//! Per-asset order size bounds.
//!
//! The floor keeps gas under roughly 0.1% of each order; the cap keeps a
//! single order small relative to daily volume and pool depth.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::money::Usd;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SizingInputs {
    #[serde(rename = "asset")]
    pub asset_id: String,
    pub avg_gas_fees: f64,
    pub avg_daily_volume: f64,
    pub liquidity_pool_depth: f64,
}

impl SizingInputs {
    pub fn new(asset_id: impl Into<String>, gas: f64, volume: f64, depth: f64) -> Self {
        SizingInputs {
            asset_id: asset_id.into(),
            avg_gas_fees: gas,
            avg_daily_volume: volume,
            liquidity_pool_depth: depth,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("avg_gas_fees", self.avg_gas_fees),
            ("avg_daily_volume", self.avg_daily_volume),
            ("liquidity_pool_depth", self.liquidity_pool_depth),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation {
                    asset: self.asset_id.clone(),
                    message: format!("{name} must be finite and >= 0, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizingConfig {
    pub min_size_multiplier: f64,
    pub min_size_param: Usd,
    pub max_size_divisor: f64,
    pub max_size_param: Usd,
}

impl Default for SizingConfig {
    fn default() -> Self {
        SizingConfig {
            min_size_multiplier: 1000.0,
            min_size_param: Usd::from_dollars(25_000),
            max_size_divisor: 1000.0,
            max_size_param: Usd::from_dollars(200_000),
        }
    }
}

impl SizingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.min_size_multiplier > 0.0
            && self.min_size_multiplier.is_finite()
            && self.max_size_divisor > 0.0
            && self.max_size_divisor.is_finite()
            && self.min_size_param > Usd::ZERO
            && self.max_size_param > Usd::ZERO;
        if positive {
            Ok(())
        } else {
            Err(Error::Config(format!("sizing parameters must all be > 0: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeSizeBounds {
    pub asset_id: String,
    pub min_size: Usd,
    pub max_size: Usd,
}

impl TradeSizeBounds {
    pub fn new(asset_id: impl Into<String>, min_size: Usd, max_size: Usd) -> Result<Self> {
        let asset_id = asset_id.into();
        if min_size <= Usd::ZERO || min_size > max_size {
            return Err(Error::BoundsConflict {
                asset: asset_id,
                min: min_size,
                max: max_size,
            });
        }
        Ok(TradeSizeBounds {
            asset_id,
            min_size,
            max_size,
        })
    }
}

/// `max(gas * multiplier, floor)`.
pub fn min_block_size(inputs: &SizingInputs, config: &SizingConfig) -> Usd {
    Usd::from_f64(inputs.avg_gas_fees * config.min_size_multiplier).max(config.min_size_param)
}

/// `min(volume / divisor, depth / (2 * divisor), cap)`.
pub fn max_block_size(inputs: &SizingInputs, config: &SizingConfig) -> Result<Usd> {
    for (what, v) in [
        ("zero daily volume", inputs.avg_daily_volume),
        ("zero pool depth", inputs.liquidity_pool_depth),
    ] {
        if !(v > 0.0) {
            return Err(Error::Untradable {
                asset: inputs.asset_id.clone(),
                reason: what.into(),
            });
        }
    }
    let by_volume = Usd::from_f64(inputs.avg_daily_volume / config.max_size_divisor);
    let by_depth = Usd::from_f64(inputs.liquidity_pool_depth / (2.0 * config.max_size_divisor));
    Ok(by_volume.min(by_depth).min(config.max_size_param))
}

pub fn size_bounds(inputs: &SizingInputs, config: &SizingConfig) -> Result<TradeSizeBounds> {
    config.validate()?;
    inputs.validate()?;
    let max = max_block_size(inputs, config)?;
    TradeSizeBounds::new(inputs.asset_id.clone(), min_block_size(inputs, config), max)
}

/// Reads `asset,avg_gas_fees,avg_daily_volume,liquidity_pool_depth`.
pub fn load_sizing_inputs(path: impl AsRef<Path>) -> Result<Vec<SizingInputs>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: SizingInputs = row.map_err(|e| Error::csv(path, e))?;
        row.validate()?;
        out.push(row);
    }
    Ok(out)
}
