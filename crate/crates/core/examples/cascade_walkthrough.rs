//! One deposit through the waterfall: capacities, ranks, the fill, and the
//! order schedule. Also writes the plan as CSV to stdout.

use waterfall_rebalancer::cascade::{plan_event, plan_records, prepare_event, Holding, PlanConfig, PLAN_HEADER};
use waterfall_rebalancer::sizing::TradeSizeBounds;
use waterfall_rebalancer::weights::WeightBounds;
use waterfall_rebalancer::Usd;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let holdings = vec![
        Holding::from_notional("BTC", Usd::from_dollars(420_000), 30_000.0)?,
        Holding::from_notional("ETH", Usd::from_dollars(150_000), 2_000.0)?,
        Holding::from_notional("SOL", Usd::from_dollars(90_000), 40.0)?,
        Holding::from_notional("LINK", Usd::from_dollars(40_000), 7.0)?,
    ];
    let bounds = vec![
        WeightBounds::new("BTC", 0.35, 0.45, 0.55)?,
        WeightBounds::new("ETH", 0.20, 0.25, 0.30)?,
        WeightBounds::new("SOL", 0.10, 0.18, 0.22)?,
        WeightBounds::new("LINK", 0.08, 0.12, 0.15)?,
    ];
    let sizes = ["BTC", "ETH", "SOL", "LINK"]
        .iter()
        .map(|a| TradeSizeBounds::new(*a, Usd::from_dollars(5_000), Usd::from_dollars(40_000)))
        .collect::<Result<Vec<_>, _>>()?;

    let ctx = prepare_event(0, holdings, Usd::from_dollars(100_000), &[])?;
    let plan = plan_event(ctx, &bounds, &sizes, &PlanConfig::default())?;

    println!("budget {}  (flow {}, sub-minimum sells {})", plan.budget.amount, plan.context.flow, plan.min_size_delta_total);
    println!("{:<6} {:>14} {:>14} {:>5} {:>14} {:>7}", "asset", "current", "diff", "rank", "fill", "orders");
    let mut rows: Vec<_> = plan.rows.iter().collect();
    rows.sort_by_key(|r| r.cap_rank);
    for r in rows {
        println!(
            "{:<6} {:>14} {:>14} {:>5} {:>14} {:>7}",
            r.asset_id, r.current, r.diff, r.cap_rank, r.cap_to_fill, r.orders.total_orders
        );
    }

    println!("\nschedule");
    for e in &plan.schedule {
        println!("  #{:<3} {:<4} {:<6} {:>14}  +{}s", e.sequence, e.side.as_str(), e.asset_id, e.amount, e.delay_secs);
    }

    println!();
    let mut out = csv::Writer::from_writer(std::io::stdout());
    out.write_record(PLAN_HEADER)?;
    for rec in plan_records(&plan) {
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}
