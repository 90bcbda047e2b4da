//! A sell that comes back short: the buy side is re-planned against the
//! proceeds that actually arrived.

use waterfall_rebalancer::cascade::{adjust_after_sells, plan_event, prepare_event, FillReport, Holding, PlanConfig, Side};
use waterfall_rebalancer::sizing::TradeSizeBounds;
use waterfall_rebalancer::weights::WeightBounds;
use waterfall_rebalancer::Usd;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let holdings = vec![
        Holding::from_notional("A", Usd::from_dollars(60_000), 1.0)?,
        Holding::from_notional("B", Usd::from_dollars(30_000), 1.0)?,
    ];
    let bounds = vec![WeightBounds::new("A", 0.1, 0.3, 0.4)?, WeightBounds::new("B", 0.5, 0.7, 0.92)?];
    let sizes = vec![
        TradeSizeBounds::new("A", Usd::from_dollars(1_000), Usd::from_dollars(10_000))?,
        TradeSizeBounds::new("B", Usd::from_dollars(1_000), Usd::from_dollars(10_000))?,
    ];
    let config = PlanConfig::default();
    let ctx = prepare_event(0, holdings, Usd::from_dollars(10_000), &[])?;
    let plan = plan_event(ctx, &bounds, &sizes, &config)?;

    let mut fills = FillReport::exact(&plan);
    // the first sell never executes, the second fills 2% light
    fills.fills[0].realized = Usd::ZERO;
    fills.fills[1].realized = fills.fills[1].placed.scale(0.98);
    for f in &fills.fills {
        println!("sell #{} {}: placed {} realized {}", f.sequence, f.asset_id, f.placed, f.realized);
    }
    println!("shortfall {}", fills.shortfall());

    let revised = adjust_after_sells(&plan, &fills, &sizes, &config)?;
    let buys = |p: &waterfall_rebalancer::cascade::RebalancePlan| -> Usd {
        p.schedule.iter().filter(|e| e.side == Side::Buy).map(|e| e.amount).sum()
    };
    println!("buys planned {}  after adjustment {}", buys(&plan), buys(&revised));
    for e in revised.schedule.iter().filter(|e| e.side == Side::Buy) {
        println!("  #{:<3} {:<2} {:>14}", e.sequence, e.asset_id, e.amount);
    }
    Ok(())
}
