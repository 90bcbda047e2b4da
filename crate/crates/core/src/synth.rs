//! Seeded synthetic price paths for demos and tests.

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::market_data::{PricePoint, PriceSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub start_price: f64,
    /// Daily volatility of log returns.
    pub daily_vol: f64,
    /// Pull of the log price back toward its starting level per day, in
    /// `[0, 1]`; zero gives a random walk.
    pub mean_reversion: f64,
}

impl PathSpec {
    pub fn random_walk(start_price: f64, daily_vol: f64) -> Self {
        PathSpec {
            start_price,
            daily_vol,
            mean_reversion: 0.0,
        }
    }
}

/// Daily bars for `days` days from `start`. Open is the previous close; high
/// and low bracket both.
pub fn price_path(
    asset_id: &str,
    start: NaiveDate,
    days: usize,
    spec: PathSpec,
    rng: &mut impl Rng,
) -> Result<PriceSeries> {
    let noise = Normal::new(0.0, spec.daily_vol.max(0.0)).expect("finite volatility");
    let anchor = spec.start_price.ln();
    let mut log_p = anchor;
    let mut prev = spec.start_price;
    let mut points = Vec::with_capacity(days);
    for d in 0..days {
        let close = if d == 0 {
            spec.start_price
        } else {
            log_p += spec.mean_reversion * (anchor - log_p) + noise.sample(rng);
            log_p.exp()
        };
        let wiggle = 1.0 + 0.25 * spec.daily_vol * rng.gen::<f64>();
        points.push(PricePoint::new(
            start + Duration::days(d as i64),
            prev,
            prev.max(close) * wiggle,
            prev.min(close) / wiggle,
            close,
        )?);
        prev = close;
    }
    PriceSeries::new(asset_id, points)
}

/// Combined price file body (`asset,date,open,high,low,close`).
pub fn price_csv(series: &[PriceSeries]) -> String {
    let mut out = String::from("asset,date,open,high,low,close\n");
    for s in series {
        for p in s.points() {
            out.push_str(&format!(
                "{},{},{:.8},{:.8},{:.8},{:.8}\n",
                s.asset_id(),
                p.date,
                p.open,
                p.high,
                p.low,
                p.close
            ));
        }
    }
    out
}
