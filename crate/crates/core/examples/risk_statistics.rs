//! Log returns, rolling volatility, the vol-of-vol adjustment and the
//! covariance matrix for the sample price file.
//!
//!     cargo run --example risk_statistics

use std::path::PathBuf;

use waterfall_rebalancer::market_data::{
    covariance_matrix, load_price_file, log_returns, risk_stats, StatsConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let series = load_price_file(data.join("prices.csv"))?;
    let config = StatsConfig::default();

    let returns = series.iter().map(log_returns).collect::<Result<Vec<_>, _>>()?;
    println!("{:<8} {:>10} {:>10} {:>10} {:>10}", "asset", "mean", "sigma", "vvvFactor", "VVV");
    for r in &returns {
        let s = risk_stats(r, &config)?;
        println!(
            "{:<8} {:>10.6} {:>10.6} {:>10.6} {:>10.6}{}",
            s.asset_id,
            s.mean_return,
            s.volatility,
            s.vvv_factor,
            s.vvv_volatility,
            if s.vvv_flagged { "  (flagged)" } else { "" }
        );
    }

    let cov = covariance_matrix(&returns, config.window, config.min_history)?;
    println!("\ncorrelation over the last {} common days", config.window);
    for i in 0..cov.dim() {
        let row: Vec<String> = (0..cov.dim())
            .map(|j| {
                let c = cov.entries[(i, j)] / (cov.entries[(i, i)] * cov.entries[(j, j)]).sqrt();
                format!("{c:>6.2}")
            })
            .collect();
        println!("{:<8}{}", cov.asset_ids[i], row.join(""));
    }
    Ok(())
}
