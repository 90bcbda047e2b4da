//! Execution cost estimate: flat gas per order plus quadratic slippage
//! against pool depth. A reporting device, not a market model.

use std::collections::BTreeMap;
use std::ops::Add;

use crate::cascade::ScheduleEntry;
use crate::money::Usd;
use crate::sizing::SizingInputs;

use super::config::CostConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostReport {
    pub orders: u64,
    pub gas: Usd,
    pub slippage: Usd,
}

impl CostReport {
    pub fn total(&self) -> Usd {
        self.gas + self.slippage
    }
}

impl Add for CostReport {
    type Output = CostReport;

    fn add(self, o: CostReport) -> CostReport {
        CostReport {
            orders: self.orders + o.orders,
            gas: self.gas + o.gas,
            slippage: self.slippage + o.slippage,
        }
    }
}

impl std::iter::Sum for CostReport {
    fn sum<I: Iterator<Item = CostReport>>(iter: I) -> Self {
        iter.fold(CostReport::default(), Add::add)
    }
}

/// Costs each order separately, rounding to the micro per order so totals
/// add up exactly.
pub fn estimate_costs(
    schedule: &[ScheduleEntry],
    inputs: &BTreeMap<String, SizingInputs>,
    config: &CostConfig,
) -> CostReport {
    schedule
        .iter()
        .map(|e| {
            let inp = inputs.get(&e.asset_id);
            let gas = config
                .gas_per_order
                .or(inp.map(|i| i.avg_gas_fees))
                .unwrap_or(0.0);
            let depth = inp.map_or(0.0, |i| i.liquidity_pool_depth);
            let size = e.amount.to_f64();
            let slippage = if depth > 0.0 {
                size * size / (config.impact_divisor * depth)
            } else {
                0.0
            };
            CostReport {
                orders: 1,
                gas: Usd::from_f64(gas),
                slippage: Usd::from_f64(slippage),
            }
        })
        .sum()
}
