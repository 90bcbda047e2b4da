//! Replays the sample flow schedule across two networks on different
//! rebalancing clocks and writes the reports.
//!
//!     cargo run --example multi_network_simulation -- /tmp/sim-out

use std::path::PathBuf;

use chrono::NaiveDate;
use waterfall_rebalancer::harness::{load_config, load_flow_schedule, simulate, write_simulation_reports, Market, Portfolio};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let config = load_config(data.join("config.toml"))?;
    let market = Market::load(&config)?;
    let flows = load_flow_schedule(data.join("flows.csv"))?;
    let from = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
    let to = NaiveDate::from_ymd_opt(2022, 3, 31).unwrap();

    let portfolio = Portfolio::load(&config.holdings, &market, from)?;
    let start_value = portfolio.total();
    let report = simulate(&config, &market, portfolio, from, to, &flows)?;

    println!("events {}  skipped {}", report.events.len(), report.skipped.len());
    for e in report.events.iter().take(6) {
        println!(
            "  {} event {:>3}: {:>2} assets, cascade {:>3} orders vs simple {:>3}",
            e.date,
            e.event_index,
            e.participants.len(),
            e.plan.order_count(),
            e.simple.order_count()
        );
    }
    println!("  ...");
    println!("cascade: {} orders, cost {}", report.cascade_total.orders, report.cascade_total.total());
    println!("simple:  {} orders, cost {}", report.simple_total.orders, report.simple_total.total());
    println!("value {} -> {}", start_value, report.final_portfolio.total());

    if let Some(out) = std::env::args_os().nth(1) {
        write_simulation_reports(PathBuf::from(&out).as_path(), &report)?;
        println!("reports written to {}", PathBuf::from(out).display());
    }
    Ok(())
}
