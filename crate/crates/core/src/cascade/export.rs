use super::{RebalancePlan, ScheduleEntry};
use crate::money::Usd;

pub const PLAN_HEADER: [&str; 26] = [
    "AssetName",
    "minMaxActualNotionalDiff",
    "rebalanceDelta",
    "buyIndicator",
    "capRankCrudeDec",
    "capRankCrudeInc",
    "capacityRank",
    "rawCapacityAlreadyFilled",
    "capacityAlreadyFilled",
    "rawCapacityInclusive",
    "capacityInclusive",
    "capacityIndicator",
    "capacityToFill",
    "AbsCapacityToFill",
    "minNumberOrders",
    "minBlockSizeInd",
    "additionalOrders",
    "Buy or Sell",
    "totalOrders",
    "orderSize",
    "orderSchedule",
    "amountDeployed",
    "cummTotalDeployed",
    "altCapacityToFill",
    "altMinNumberOfOrders",
    "rebalanceDeltaAdusted",
];

pub const SCHEDULE_HEADER: [&str; 5] = ["sequence", "asset", "side", "amount", "delay_secs"];

/// Plan rows in capacity-rank order, which is also execution order.
pub fn plan_records(plan: &RebalancePlan) -> Vec<Vec<String>> {
    let mut rows: Vec<_> = plan.rows.iter().collect();
    rows.sort_by_key(|r| r.cap_rank);
    let mut cumulative = Usd::ZERO;
    let mut position = 0;
    rows.into_iter()
        .map(|r| {
            let o = &r.orders;
            cumulative += o.amount_deployed;
            let schedule_pos = if o.total_orders > 0 {
                position += 1;
                position
            } else {
                0
            };
            let below_min = r.cap_to_fill.abs() < r.min_size;
            let alt_orders = !r.excluded && r.alt_cap_to_fill.abs() >= r.min_size;
            let adjusted = if alt_orders { r.rebalance_delta } else { Usd::ZERO };
            vec![
                r.asset_id.clone(),
                r.diff.to_string(),
                r.rebalance_delta.to_string(),
                u8::from(r.buy).to_string(),
                r.rank_desc.to_string(),
                r.rank_asc.to_string(),
                r.cap_rank.to_string(),
                r.raw_cap_filled.to_string(),
                r.cap_filled.to_string(),
                (r.raw_cap_filled + r.diff).to_string(),
                r.cap_inclusive.to_string(),
                u8::from(!r.cap_to_fill.is_zero()).to_string(),
                r.cap_to_fill.to_string(),
                r.cap_to_fill.abs().to_string(),
                o.min_orders.to_string(),
                if below_min { "-1" } else { "1" }.to_string(),
                o.additional_orders.to_string(),
                r.side().as_str().to_string(),
                o.total_orders.to_string(),
                o.order_size.to_string(),
                schedule_pos.to_string(),
                o.amount_deployed.to_string(),
                cumulative.to_string(),
                r.alt_cap_to_fill.to_string(),
                u8::from(alt_orders).to_string(),
                adjusted.to_string(),
            ]
        })
        .collect()
}

pub fn schedule_records(schedule: &[ScheduleEntry]) -> Vec<Vec<String>> {
    schedule
        .iter()
        .map(|e| {
            vec![
                e.sequence.to_string(),
                e.asset_id.clone(),
                e.side.as_str().to_string(),
                e.amount.to_string(),
                e.delay_secs.to_string(),
            ]
        })
        .collect()
}
