//! Daily price ingestion and the return/risk statistics that feed the weight
//! engine: log returns, rolling mean/variance/volatility, volatility of
//! volatility, and the aligned sample covariance matrix.
//!
//! Every estimator uses the sample (`n - 1`) normalization.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default estimation window, in daily observations.
pub const DEFAULT_WINDOW: usize = 90;
/// Fewest returns an asset needs before it takes part in an event.
pub const DEFAULT_MIN_HISTORY: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl PricePoint {
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> Result<Self> {
        let p = PricePoint {
            date,
            open,
            high,
            low,
            close,
        };
        p.check().map_err(|message| Error::Validation {
            asset: String::new(),
            message,
        })?;
        Ok(p)
    }

    /// Bar with all four prices equal to `close`.
    pub fn flat(date: NaiveDate, close: f64) -> Result<Self> {
        Self::new(date, close, close, close, close)
    }

    fn check(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(format!("{}: prices must be finite and > 0", self.date));
        }
        let body_lo = self.open.min(self.close);
        let body_hi = self.open.max(self.close);
        if self.low > body_lo || body_hi > self.high {
            return Err(format!(
                "{}: expected low <= min(open, close) <= max(open, close) <= high",
                self.date
            ));
        }
        Ok(())
    }
}

/// Daily bars for one asset, strictly increasing in date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    asset_id: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    /// Sorts `points` by date and rejects duplicates or invalid bars.
    pub fn new(asset_id: impl Into<String>, mut points: Vec<PricePoint>) -> Result<Self> {
        let asset_id = asset_id.into();
        for p in &points {
            p.check().map_err(|message| Error::Validation {
                asset: asset_id.clone(),
                message,
            })?;
        }
        points.sort_by_key(|p| p.date);
        if let Some(w) = points.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::Validation {
                asset: asset_id,
                message: format!("duplicate date {}", w[0].date),
            });
        }
        Ok(PriceSeries { asset_id, points })
    }

    /// Convenience constructor from `(date, close)` pairs.
    pub fn from_closes(
        asset_id: impl Into<String>,
        closes: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Result<Self> {
        let asset_id = asset_id.into();
        let points = closes
            .into_iter()
            .map(|(d, c)| {
                PricePoint::flat(d, c).map_err(|e| match e {
                    Error::Validation { message, .. } => Error::Validation {
                        asset: asset_id.clone(),
                        message,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(asset_id, points)
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The prefix of the series on or before `date`.
    pub fn up_to(&self, date: NaiveDate) -> PriceSeries {
        let end = self.points.partition_point(|p| p.date <= date);
        PriceSeries {
            asset_id: self.asset_id.clone(),
            points: self.points[..end].to_vec(),
        }
    }

    pub fn close_on(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by_key(&date, |p| p.date)
            .ok()
            .map(|i| self.points[i].close)
    }
}

/// Reads a single-asset price file (`date,open,high,low,close`).
///
/// A combined file with a leading `asset` column is also accepted; rows for
/// other assets are skipped.
pub fn load_price_series(path: impl AsRef<Path>, asset_id: &str) -> Result<PriceSeries> {
    let path = path.as_ref();
    let mut by_asset = read_price_rows(path, Some(asset_id))?;
    let points = by_asset.remove(asset_id).unwrap_or_default();
    PriceSeries::new(asset_id, points)
}

/// Reads a combined price file (`asset,date,open,high,low,close`) into one
/// series per asset, ordered by asset id.
pub fn load_price_file(path: impl AsRef<Path>) -> Result<Vec<PriceSeries>> {
    let path = path.as_ref();
    read_price_rows(path, None)?
        .into_iter()
        .map(|(asset, points)| PriceSeries::new(asset, points))
        .collect()
}

fn read_price_rows(
    path: &Path,
    only: Option<&str>,
) -> Result<BTreeMap<String, Vec<PricePoint>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let combined = match names.as_slice() {
        ["date", "open", "high", "low", "close"] => false,
        ["asset", "date", "open", "high", "low", "close"] => true,
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!(
                    "expected header `date,open,high,low,close` (optionally led by `asset`), got `{}`",
                    names.join(",")
                ),
            })
        }
    };

    let mut out: BTreeMap<String, Vec<PricePoint>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let offset = usize::from(combined);
        let asset = if combined {
            record[0].to_string()
        } else {
            only.unwrap_or_default().to_string()
        };
        if let Some(want) = only {
            if combined && asset != want {
                continue;
            }
        }
        let date = NaiveDate::parse_from_str(&record[offset], "%Y-%m-%d")
            .map_err(|e| parse_err(format!("bad date {:?}: {e}", &record[offset])))?;
        let mut px = [0.0; 4];
        for (k, slot) in px.iter_mut().enumerate() {
            let field = &record[offset + 1 + k];
            *slot = field
                .parse()
                .map_err(|_| parse_err(format!("bad price {field:?}")))?;
        }
        let point = PricePoint {
            date,
            open: px[0],
            high: px[1],
            low: px[2],
            close: px[3],
        };
        point.check().map_err(|message| Error::Validation {
            asset: asset.clone(),
            message: format!("line {line}: {message}"),
        })?;
        out.entry(asset).or_default().push(point);
    }
    Ok(out)
}

/// Continuously compounded close-to-close returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub asset_id: String,
    pub returns: Vec<(NaiveDate, f64)>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.returns.iter().map(|(_, r)| *r)
    }
}

pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            assets: vec![series.asset_id.clone()],
            needed: 2,
            available: series.len(),
        });
    }
    let returns = series
        .points
        .windows(2)
        .map(|w| (w[1].date, (w[1].close / w[0].close).ln()))
        .collect();
    Ok(ReturnSeries {
        asset_id: series.asset_id.clone(),
        returns,
    })
}

/// A trailing window: at most `length` observations, and at least
/// `min_periods` before a value is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub length: usize,
    pub min_periods: usize,
}

impl Window {
    /// Only full windows.
    pub fn full(length: usize) -> Self {
        Window {
            length,
            min_periods: length,
        }
    }

    /// Full windows once available, shorter ones down to `min_periods` before.
    pub fn expanding(length: usize, min_periods: usize) -> Self {
        Window {
            length,
            min_periods,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub date: NaiveDate,
    pub window_length: usize,
    pub mean_return: f64,
    pub variance: f64,
    pub volatility: f64,
}

/// Sample mean and variance of a slice (two-pass).
pub(crate) fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = if xs.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Mean, variance and volatility of the trailing window at every date that
/// has at least `window.min_periods` returns (and at least two).
pub fn rolling_stats(returns: &ReturnSeries, window: Window) -> Vec<WindowStats> {
    let xs: Vec<f64> = returns.values().collect();
    let need = window.min_periods.max(2).min(window.length.max(2));
    (0..xs.len())
        .filter_map(|t| {
            let count = window.length.min(t + 1);
            if count < need {
                return None;
            }
            let (mean, var) = mean_and_variance(&xs[t + 1 - count..=t]);
            Some(WindowStats {
                date: returns.returns[t].0,
                window_length: count,
                mean_return: mean,
                variance: var,
                volatility: var.sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VvvPoint {
    pub date: NaiveDate,
    pub volatility: f64,
    pub vvv_factor: f64,
    pub vvv_volatility: f64,
    /// A zero volatility sat inside the differencing window; its log change
    /// was taken as 0.
    pub degenerate: bool,
}

/// Volatility adjusted by the sample standard deviation of its own log
/// changes: `vol + theta * stddev(ln(vol_t / vol_{t-1}))` over the trailing
/// window of changes.
pub fn vvv_adjusted_volatility(
    vols: &[(NaiveDate, f64)],
    window: Window,
    theta: f64,
) -> Result<Vec<VvvPoint>> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::Config(format!("theta must be finite and >= 0, got {theta}")));
    }
    // changes[j] is the log change into vols[j + 1]
    let changes: Vec<(f64, bool)> = vols
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0].1, w[1].1);
            if prev > 0.0 && cur > 0.0 {
                ((cur / prev).ln(), false)
            } else {
                (0.0, true)
            }
        })
        .collect();
    let need = window.min_periods.max(2);
    let mut out = Vec::new();
    for j in 0..changes.len() {
        let count = window.length.min(j + 1);
        if count < need {
            continue;
        }
        let slice = &changes[j + 1 - count..=j];
        let values: Vec<f64> = slice.iter().map(|c| c.0).collect();
        let (_, var) = mean_and_variance(&values);
        let factor = var.sqrt();
        let (date, vol) = vols[j + 1];
        out.push(VvvPoint {
            date,
            volatility: vol,
            vvv_factor: factor,
            vvv_volatility: vol + theta * factor,
            degenerate: slice.iter().any(|c| c.1),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub window: usize,
    pub min_history: usize,
    pub theta: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            window: DEFAULT_WINDOW,
            min_history: DEFAULT_MIN_HISTORY,
            theta: 1.0,
        }
    }
}

/// Risk statistics of one asset as of its last return date.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskStats {
    pub asset_id: String,
    pub date: NaiveDate,
    pub window_length: usize,
    pub mean_return: f64,
    pub variance: f64,
    pub volatility: f64,
    pub vvv_factor: f64,
    pub vvv_volatility: f64,
    /// Set when the vol-of-vol estimate hit a zero volatility or had fewer
    /// than two volatility changes to work with.
    pub vvv_flagged: bool,
}

pub fn risk_stats(returns: &ReturnSeries, config: &StatsConfig) -> Result<RiskStats> {
    let min = config.min_history.max(2);
    if returns.len() < min {
        return Err(Error::InsufficientData {
            assets: vec![returns.asset_id.clone()],
            needed: min,
            available: returns.len(),
        });
    }
    let window = Window::expanding(config.window, min);
    let stats = rolling_stats(returns, window);
    let last = *stats.last().expect("history checked above");
    let vols: Vec<(NaiveDate, f64)> = stats.iter().map(|s| (s.date, s.volatility)).collect();
    let vvv = vvv_adjusted_volatility(&vols, Window::expanding(config.window, 2), config.theta)?;
    let (vvv_factor, vvv_volatility, vvv_flagged) = match vvv.last() {
        Some(p) if p.date == last.date => (p.vvv_factor, p.vvv_volatility, p.degenerate),
        _ => (0.0, last.volatility, true),
    };
    Ok(RiskStats {
        asset_id: returns.asset_id.clone(),
        date: last.date,
        window_length: last.window_length,
        mean_return: last.mean_return,
        variance: last.variance,
        volatility: last.volatility,
        vvv_factor,
        vvv_volatility,
        vvv_flagged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub asset_ids: Vec<String>,
    pub entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(asset_ids: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        let k = asset_ids.len();
        if entries.nrows() != k || entries.ncols() != k {
            return Err(Error::Validation {
                asset: asset_ids.join(","),
                message: format!(
                    "covariance shape {}x{} does not match {k} assets",
                    entries.nrows(),
                    entries.ncols()
                ),
            });
        }
        Ok(CovarianceMatrix { asset_ids, entries })
    }

    pub fn dim(&self) -> usize {
        self.asset_ids.len()
    }

    /// The same assets with every covariance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CovarianceMatrix {
            asset_ids: self.asset_ids.clone(),
            entries: &self.entries * factor,
        }
    }
}

/// Returns of each series on the trailing window of dates common to all of
/// them. Rows are dates (oldest first), columns follow `series`.
pub fn aligned_window(
    series: &[ReturnSeries],
    window: usize,
    min_history: usize,
) -> Result<(Vec<NaiveDate>, DMatrix<f64>)> {
    if series.is_empty() {
        return Err(Error::EmptyPortfolio);
    }
    let mut common: BTreeSet<NaiveDate> = series[0].returns.iter().map(|r| r.0).collect();
    for s in &series[1..] {
        let dates: BTreeSet<NaiveDate> = s.returns.iter().map(|r| r.0).collect();
        common = common.intersection(&dates).copied().collect();
    }
    let need = min_history.max(2);
    if common.len() < need {
        return Err(Error::InsufficientData {
            assets: series.iter().map(|s| s.asset_id.clone()).collect(),
            needed: need,
            available: common.len(),
        });
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let dates = dates[dates.len() - window.min(dates.len())..].to_vec();
    let mut m = DMatrix::zeros(dates.len(), series.len());
    for (j, s) in series.iter().enumerate() {
        let lookup: BTreeMap<NaiveDate, f64> = s.returns.iter().copied().collect();
        for (i, d) in dates.iter().enumerate() {
            m[(i, j)] = lookup[d];
        }
    }
    Ok((dates, m))
}

/// Sample covariance of the assets' returns over their common trailing window.
pub fn covariance_matrix(
    series: &[ReturnSeries],
    window: usize,
    min_history: usize,
) -> Result<CovarianceMatrix> {
    let (_, m) = aligned_window(series, window, min_history)?;
    let n = m.nrows();
    let k = m.ncols();
    let means: Vec<f64> = (0..k).map(|j| m.column(j).sum() / n as f64).collect();
    let mut cov = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let s: f64 = (0..n)
                .map(|i| (m[(i, a)] - means[a]) * (m[(i, b)] - means[b]))
                .sum();
            let v = s / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    CovarianceMatrix::new(series.iter().map(|s| s.asset_id.clone()).collect(), cov)
}
