//! Naive comparison mechanism: every asset trades straight to its ideal
//! notional, with no shared budget.

use crate::cascade::{
    build_schedule, compute_capacities, rank_capacities, size_orders, sizes_for, EventContext,
    OrderSizing, ScheduleEntry, ScheduleItem, Side,
};
use crate::error::Result;
use crate::money::Usd;
use crate::sizing::TradeSizeBounds;
use crate::weights::WeightBounds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplePlanRow {
    pub asset_id: String,
    pub current: Usd,
    pub min_new: Usd,
    pub ideal_new: Usd,
    pub max_new: Usd,
    pub ideal_actual_diff: Usd,
    pub min_size: Usd,
    pub max_size: Usd,
    pub orders: OrderSizing,
    pub cap_rank: usize,
    pub excluded: bool,
}

impl SimplePlanRow {
    pub fn abs_diff(&self) -> Usd {
        self.ideal_actual_diff.abs()
    }

    pub fn side(&self) -> Side {
        if self.ideal_actual_diff.is_negative() {
            Side::Sell
        } else {
            Side::Buy
        }
    }

    /// -1 when the gap is below the minimum block size.
    pub fn min_block_size_ind(&self) -> i8 {
        if self.abs_diff() < self.min_size {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplePlan {
    pub rows: Vec<SimplePlanRow>,
    pub schedule: Vec<ScheduleEntry>,
}

impl SimplePlan {
    pub fn deployed(&self) -> Usd {
        self.rows.iter().map(|r| r.orders.amount_deployed).sum()
    }

    pub fn order_count(&self) -> u64 {
        self.rows.iter().map(|r| r.orders.total_orders).sum()
    }

    pub fn row(&self, asset_id: &str) -> Option<&SimplePlanRow> {
        self.rows.iter().find(|r| r.asset_id == asset_id)
    }
}

pub fn simple_plan(
    ctx: &EventContext,
    bounds: &[WeightBounds],
    sizes: &[TradeSizeBounds],
    delay_secs: u32,
) -> Result<SimplePlan> {
    let caps = compute_capacities(ctx, bounds)?;
    let aligned = sizes_for(ctx, sizes);
    let diffs: Vec<Usd> = caps
        .iter()
        .zip(&ctx.holdings)
        .zip(&aligned)
        .map(|((c, h), s)| match s {
            Some(_) => c.ideal_new - h.current_amount,
            None => Usd::ZERO,
        })
        .collect();
    let buy: Vec<bool> = diffs.iter().map(|d| !d.is_negative()).collect();
    let sells = buy.iter().filter(|b| !**b).count();
    let ranks = rank_capacities(&diffs, &buy, sells);
    let rows: Vec<SimplePlanRow> = (0..diffs.len())
        .map(|i| {
            let (min_size, max_size, orders) = match &aligned[i] {
                Some(s) => (s.min_size, s.max_size, size_orders(diffs[i], s)),
                None => (Usd::ZERO, Usd::ZERO, OrderSizing::NONE),
            };
            SimplePlanRow {
                asset_id: ctx.holdings[i].asset_id.clone(),
                current: ctx.holdings[i].current_amount,
                min_new: caps[i].min_new,
                ideal_new: caps[i].ideal_new,
                max_new: caps[i].max_new,
                ideal_actual_diff: diffs[i],
                min_size,
                max_size,
                orders,
                cap_rank: ranks.cap_rank[i],
                excluded: aligned[i].is_none(),
            }
        })
        .collect();
    let items: Vec<ScheduleItem> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| ScheduleItem {
            index: i,
            asset_id: &r.asset_id,
            side: r.side(),
            cap_rank: r.cap_rank,
            sizing: r.orders,
        })
        .collect();
    let schedule = build_schedule(&items, delay_secs, None);
    Ok(SimplePlan { rows, schedule })
}

pub const SIMPLE_PLAN_HEADER: [&str; 18] = [
    "AssetName",
    "minNotionalCurrent",
    "idealNotionalCurrent",
    "maxNotionalCurrent",
    "actualNotionalCurrent",
    "idealActualNotionalDiff",
    "absIdealActDiff",
    "minBlockSize",
    "maxBlockSize",
    "minNumberOrders",
    "minBlockSizeInd",
    "additionalOrders",
    "Buy or Sell",
    "totalOrders",
    "orderSize",
    "orderSchedule",
    "amountDeployed",
    "cummTotalDeployed",
];

/// Rows in execution order.
pub fn simple_plan_records(plan: &SimplePlan) -> Vec<Vec<String>> {
    let mut rows: Vec<&SimplePlanRow> = plan.rows.iter().collect();
    rows.sort_by_key(|r| r.cap_rank);
    let mut cumulative = Usd::ZERO;
    let mut position = 0;
    rows.into_iter()
        .map(|r| {
            let o = &r.orders;
            cumulative += o.amount_deployed;
            let pos = if o.total_orders > 0 {
                position += 1;
                position
            } else {
                0
            };
            vec![
                r.asset_id.clone(),
                r.min_new.to_string(),
                r.ideal_new.to_string(),
                r.max_new.to_string(),
                r.current.to_string(),
                r.ideal_actual_diff.to_string(),
                r.abs_diff().to_string(),
                r.min_size.to_string(),
                r.max_size.to_string(),
                o.min_orders.to_string(),
                r.min_block_size_ind().to_string(),
                o.additional_orders.to_string(),
                r.side().as_str().to_string(),
                o.total_orders.to_string(),
                o.order_size.to_string(),
                pos.to_string(),
                o.amount_deployed.to_string(),
                cumulative.to_string(),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{prepare_event, Holding};

    fn usd(x: i64) -> Usd {
        Usd::from_dollars(x)
    }

    fn run(current: i64, other: i64, ideal: f64) -> SimplePlan {
        let ctx = prepare_event(
            0,
            vec![
                Holding::from_notional("A", usd(current), 1.0).unwrap(),
                Holding::from_notional("Z", usd(other), 1.0).unwrap(),
            ],
            Usd::ZERO,
            &[],
        )
        .unwrap();
        let bounds = vec![
            WeightBounds::pinned("A", ideal),
            WeightBounds::pinned("Z", 1.0 - ideal),
        ];
        let sizes: Vec<TradeSizeBounds> = ["A", "Z"]
            .iter()
            .map(|id| TradeSizeBounds::new(*id, usd(1000), usd(10000)).unwrap())
            .collect();
        simple_plan(&ctx, &bounds, &sizes, 5).unwrap()
    }

    #[test]
    fn already_ideal() {
        let p = run(60000, 40000, 0.6);
        let a = p.row("A").unwrap();
        assert_eq!(a.ideal_actual_diff, Usd::ZERO);
        assert_eq!(a.orders.total_orders, 0);
        assert!(p.schedule.is_empty());
    }

    #[test]
    fn two_orders_of_six_thousand() {
        let p = run(60000, 60000, 0.6);
        let a = p.row("A").unwrap();
        assert_eq!(a.ideal_actual_diff, usd(12000));
        assert_eq!((a.orders.total_orders, a.orders.order_size), (2, usd(6000)));
        assert_eq!(p.schedule[0].side, Side::Sell);
        assert_eq!(simple_plan_records(&p)[0][0], "Z");
    }

    #[test]
    fn below_minimum_block() {
        let p = run(59200, 40800, 0.6);
        let a = p.row("A").unwrap();
        assert_eq!(a.ideal_actual_diff, usd(800));
        assert_eq!(a.min_block_size_ind(), -1);
        assert_eq!(a.orders.total_orders, 0);
    }
}
