//! Every weighting scheme side by side, plus the min/ideal/max band each
//! asset ends up with.
//!
//!     cargo run --example weight_schemes -- 2022-03-01

use std::path::PathBuf;

use chrono::NaiveDate;
use waterfall_rebalancer::harness::{load_config, weights_at, Market};
use waterfall_rebalancer::weights::scheme_name;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let date: NaiveDate = match std::env::args().nth(1) {
        Some(d) => d.parse()?,
        None => NaiveDate::from_ymd_opt(2022, 3, 1).unwrap(),
    };
    let config = load_config(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/config.toml"))?;
    let market = Market::load(&config)?;
    let assets: Vec<String> = market.series.keys().cloned().collect();
    let table = weights_at(&config, &market, &assets, date)?;

    print!("{:<24}", "scheme");
    for a in &assets {
        print!("{a:>9}");
    }
    println!("{:>9}", "sum");
    for v in &table.vectors {
        print!("{:<24}", scheme_name(v.scheme));
        for w in &v.weights {
            print!("{w:>9.4}");
        }
        println!("{:>9.4}", v.sum());
    }

    println!("\n{:<8} {:>8} {:>8} {:>8}", "asset", "min", "ideal", "max");
    for b in &table.bounds {
        println!("{:<8} {:>8.4} {:>8.4} {:>8.4}", b.asset_id, b.min_w, b.ideal_w, b.max_w);
    }
    for w in &table.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
