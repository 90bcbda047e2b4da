//! Writes the synthetic dataset under `data/` (or the directory given as the
//! first argument): prices, sizing inputs, holdings, a flow schedule, and a
//! run config.
//!
//!     cargo run --example generate_sample_data -- crates/core/data

use std::fs;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use waterfall_rebalancer::synth::{price_csv, price_path, PathSpec};
use waterfall_rebalancer::Usd;

// asset, network, start price, daily vol, units held, gas, volume, depth
const ASSETS: [(&str, &str, f64, f64, f64, f64, f64, f64); 8] = [
    ("BNB", "bsc", 300.0, 0.040, 4_000.0, 0.4, 9e8, 4e8),
    ("CAKE", "bsc", 12.0, 0.060, 80_000.0, 0.4, 2e8, 1e8),
    ("XVS", "bsc", 20.0, 0.070, 40_000.0, 0.4, 8e7, 6e7),
    ("ALPACA", "bsc", 1.5, 0.080, 300_000.0, 0.4, 3e7, 4e7),
    ("ETH", "eth", 2000.0, 0.040, 600.0, 25.0, 2e9, 8e8),
    ("UNI", "eth", 20.0, 0.060, 50_000.0, 25.0, 3e8, 1e8),
    ("AAVE", "eth", 300.0, 0.055, 3_000.0, 25.0, 2e8, 1.2e8),
    ("LINK", "eth", 25.0, 0.050, 40_000.0, 25.0, 4e8, 1.5e8),
];

const CONFIG: &str = r#"prices = ["prices.csv"]
sizing = "sizing.csv"
holdings = "holdings.csv"
output_dir = "out"
seed = 11
anchor_date = "2022-01-01"

[weights]
theta = 1.0
max_asset_weight = 0.25

[cost]
impact_divisor = 1.0

[simulation]
fill_noise = 0.002

[[networks]]
name = "bsc"
interval_minutes = 1440

[[networks]]
name = "eth"
interval_minutes = 4320
modulus = 3
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    fs::create_dir_all(&dir)?;
    let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2021);

    let mut series = Vec::new();
    for (id, _, px, vol, ..) in ASSETS {
        let spec = PathSpec {
            start_price: px,
            daily_vol: vol,
            mean_reversion: 0.02,
        };
        series.push(price_path(id, start, 540, spec, &mut rng)?);
    }
    fs::write(dir.join("prices.csv"), price_csv(&series))?;

    let mut sizing = String::from("asset,avg_gas_fees,avg_daily_volume,liquidity_pool_depth\n");
    let mut holdings = String::from("asset,network,quantity\n");
    for (id, net, _, _, units, gas, volume, depth) in ASSETS {
        sizing.push_str(&format!("{id},{gas},{volume},{depth}\n"));
        holdings.push_str(&format!("{id},{net},{units}\n"));
    }
    fs::write(dir.join("sizing.csv"), sizing)?;
    fs::write(dir.join("holdings.csv"), holdings)?;

    let flow = Normal::new(25_000.0, 150_000.0)?;
    let mut flows = String::from("date,flow_usd\n");
    let first = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
    for d in 0..120 {
        let amount = Usd::from_f64((flow.sample(&mut rng) * 100.0_f64).round() / 100.0);
        flows.push_str(&format!("{},{}\n", first + Duration::days(d), amount));
    }
    fs::write(dir.join("flows.csv"), flows)?;
    fs::write(dir.join("config.toml"), CONFIG)?;
    println!("sample data written to {}", dir.display());
    Ok(())
}
