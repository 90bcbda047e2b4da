//! Minimum and maximum order sizes from gas, volume and pool depth, and how
//! a fill gets split into orders.

use waterfall_rebalancer::cascade::size_orders;
use waterfall_rebalancer::sizing::{size_bounds, SizingConfig, SizingInputs};
use waterfall_rebalancer::Usd;

fn main() {
    let config = SizingConfig::default();
    let pools = [
        SizingInputs::new("deep", 25.0, 3e8, 1e8),
        SizingInputs::new("cheap-gas", 0.4, 9e8, 4e8),
        SizingInputs::new("thin", 0.4, 3e7, 4e7),
        SizingInputs::new("dead", 5.0, 0.0, 1e6),
    ];
    for p in &pools {
        match size_bounds(p, &config) {
            Ok(b) => println!("{:<10} min {:>14}  max {:>14}", p.asset_id, b.min_size, b.max_size),
            Err(e) => println!("{e}"),
        }
    }

    let b = size_bounds(&pools[0], &config).unwrap();
    println!();
    for cap in [10_000, 25_000, 120_000, -260_000] {
        let o = size_orders(Usd::from_dollars(cap), &b);
        println!(
            "fill {:>12}: {} orders of {} (last {})",
            Usd::from_dollars(cap),
            o.total_orders,
            o.order_size,
            o.last_order
        );
    }
}
