//! End-to-end runs: load data, plan events across networks, apply fills,
//! and account for costs.

mod config;
mod cost;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::baseline::{simple_plan, SimplePlan};
use crate::cascade::{
    adjust_after_sells, plan_event, prepare_event, FillReport, Holding, PlanConfig, RebalancePlan,
    Side,
};
use crate::error::{Error, Result};
use crate::market_data::{covariance_matrix, load_price_file, log_returns, risk_stats, PriceSeries};
use crate::money::Usd;
use crate::sizing::{load_sizing_inputs, size_bounds, SizingInputs, TradeSizeBounds};
use crate::weights::{compute_weight_table, WeightBounds, WeightTable};

pub use config::{
    load_config, CostConfig, NetworkConfig, RunConfig, SimulationConfig, DEFAULT_NETWORK,
};
pub use cost::{estimate_costs, CostReport};
pub use report::{
    load_flow_schedule, write_csv, write_event_reports, write_simulation_reports, write_weight_report,
    COST_HEADER,
};

/// Index of the rebalancing slot containing minute `t`: `floor(t / interval)`.
pub fn event_index(minutes: u64, interval_minutes: u64) -> u64 {
    minutes / interval_minutes
}

/// Networks whose modulus divides the event index.
pub fn participating_networks(event: u64, networks: &[NetworkConfig]) -> Vec<&str> {
    networks
        .iter()
        .filter(|n| event.is_multiple_of(n.modulus))
        .map(|n| n.name.as_str())
        .collect()
}

/// Assets (given as `(asset, network)`) that trade at event `event`.
pub fn participating_assets(
    event: u64,
    networks: &[NetworkConfig],
    assets: &[(String, String)],
) -> Vec<String> {
    let live: BTreeSet<&str> = participating_networks(event, networks).into_iter().collect();
    assets
        .iter()
        .filter(|(_, net)| live.contains(net.as_str()))
        .map(|(a, _)| a.clone())
        .collect()
}

/// Price histories and sizing inputs keyed by asset.
#[derive(Debug, Clone, Default)]
pub struct Market {
    pub series: BTreeMap<String, PriceSeries>,
    pub sizing: BTreeMap<String, SizingInputs>,
}

impl Market {
    pub fn new(series: Vec<PriceSeries>, sizing: Vec<SizingInputs>) -> Result<Self> {
        let mut m = Market::default();
        for s in series {
            let id = s.asset_id().to_string();
            if m.series.insert(id.clone(), s).is_some() {
                return Err(Error::Validation {
                    asset: id,
                    message: "price history supplied twice".into(),
                });
            }
        }
        for s in sizing {
            m.sizing.insert(s.asset_id.clone(), s);
        }
        Ok(m)
    }

    pub fn load(config: &RunConfig) -> Result<Self> {
        let mut series = Vec::new();
        for p in &config.prices {
            series.extend(load_price_file(p)?);
        }
        Market::new(series, load_sizing_inputs(&config.sizing)?)
    }

    pub fn price(&self, asset: &str, date: NaiveDate) -> Result<f64> {
        self.series
            .get(asset)
            .and_then(|s| s.close_on(date))
            .ok_or_else(|| Error::Coverage {
                what: "price on event date",
                asset: asset.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    pub asset_id: String,
    pub network: String,
    pub amount: Usd,
    pub price: f64,
}

/// Positions carried between events, marked by price ratio, plus cash not
/// yet deployed (or withdrawals not yet met, when negative).
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub positions: Vec<Position>,
    pub cash: Usd,
}

#[derive(Debug, Deserialize)]
struct HoldingRecord {
    asset: String,
    #[serde(default)]
    network: Option<String>,
    quantity: f64,
}

impl Portfolio {
    /// Reads `asset,network,quantity` and values each line at `date`.
    pub fn load(path: impl AsRef<Path>, market: &Market, date: NaiveDate) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut positions = Vec::new();
        for rec in reader.deserialize() {
            let rec: HoldingRecord = rec.map_err(|e| Error::csv(path, e))?;
            let price = market.price(&rec.asset, date)?;
            let h = Holding::new(rec.asset, rec.quantity, price)?;
            positions.push(Position {
                asset_id: h.asset_id,
                network: rec.network.unwrap_or_else(|| DEFAULT_NETWORK.to_string()),
                amount: h.current_amount,
                price,
            });
        }
        Ok(Portfolio {
            positions,
            cash: Usd::ZERO,
        })
    }

    pub fn invested(&self) -> Usd {
        self.positions.iter().map(|p| p.amount).sum()
    }

    pub fn total(&self) -> Usd {
        self.invested() + self.cash
    }

    pub fn asset_networks(&self) -> Vec<(String, String)> {
        self.positions
            .iter()
            .map(|p| (p.asset_id.clone(), p.network.clone()))
            .collect()
    }

    /// Revalues every position at the close on `date`.
    pub fn mark(&mut self, market: &Market, date: NaiveDate) -> Result<()> {
        let prices: Vec<f64> = self
            .positions
            .iter()
            .map(|p| market.price(&p.asset_id, date))
            .collect::<Result<_>>()?;
        for (p, price) in self.positions.iter_mut().zip(prices) {
            if price != p.price {
                p.amount = p.amount.scale(price / p.price);
                p.price = price;
            }
        }
        Ok(())
    }

    fn position_mut(&mut self, asset: &str) -> Option<&mut Position> {
        self.positions.iter_mut().find(|p| p.asset_id == asset)
    }

    /// Books executed orders: sells reduce the position by the placed size
    /// and bring in the realized proceeds; buys spend cash one for one.
    pub fn apply(&mut self, plan: &RebalancePlan, fills: &FillReport) -> Result<()> {
        let realized: BTreeMap<usize, Usd> =
            fills.fills.iter().map(|f| (f.sequence, f.realized)).collect();
        for e in &plan.schedule {
            let proceeds = match e.side {
                Side::Sell => *realized.get(&e.sequence).unwrap_or(&e.amount),
                Side::Buy => e.amount,
            };
            let pos = self.position_mut(&e.asset_id).ok_or_else(|| {
                Error::Reconciliation(format!("order for {} which is not held", e.asset_id))
            })?;
            pos.amount += e.amount;
            self.cash -= proceeds;
        }
        Ok(())
    }
}

/// Everything produced by one event.
#[derive(Debug, Clone)]
pub struct EventOutcome {
    pub date: NaiveDate,
    pub event_index: u64,
    pub participants: Vec<String>,
    pub weights: Option<WeightTable>,
    pub bounds: Vec<WeightBounds>,
    pub sizes: Vec<TradeSizeBounds>,
    /// Plan as first built, before any sell proceeds are known.
    pub initial_plan: RebalancePlan,
    /// Plan after the post-sell adjustment; equals `initial_plan` on exact fills.
    pub plan: RebalancePlan,
    pub fills: FillReport,
    pub simple: SimplePlan,
    pub cascade_cost: CostReport,
    pub simple_cost: CostReport,
    pub warnings: Vec<String>,
}

/// Weight table over `assets` as of `date` (the last return used is the
/// one ending on `date`).
pub fn weights_at(
    config: &RunConfig,
    market: &Market,
    assets: &[String],
    date: NaiveDate,
) -> Result<WeightTable> {
    let mut returns = Vec::with_capacity(assets.len());
    let mut stats = Vec::with_capacity(assets.len());
    for a in assets {
        let series = market.series.get(a).ok_or_else(|| Error::Coverage {
            what: "price history",
            asset: a.clone(),
        })?;
        let r = log_returns(&series.up_to(date))?;
        stats.push(risk_stats(&r, &config.stats)?);
        returns.push(r);
    }
    let cov = covariance_matrix(&returns, config.stats.window, config.stats.min_history)?;
    compute_weight_table(&stats, &cov, &config.weights)
}

/// Plans one event on the participating slice of `portfolio` (already
/// marked to `date`), with `flow` the full amount to deploy. The portfolio
/// is not modified; see [`Portfolio::apply`].
pub fn run_event(
    config: &RunConfig,
    market: &Market,
    portfolio: &Portfolio,
    date: NaiveDate,
    event: u64,
    flow: Usd,
    rng: &mut ChaCha8Rng,
) -> Result<EventOutcome> {
    let participants = participating_assets(event, &config.networks, &portfolio.asset_networks());
    if participants.is_empty() {
        return Err(Error::EmptyPortfolio);
    }
    let exits: BTreeSet<&str> = config.full_exit.iter().map(String::as_str).collect();
    let weighted: Vec<String> = participants
        .iter()
        .filter(|a| !exits.contains(a.as_str()))
        .cloned()
        .collect();
    let mut warnings = Vec::new();
    let weights = if weighted.is_empty() {
        None
    } else {
        Some(weights_at(config, market, &weighted, date)?)
    };
    let mut bounds: Vec<WeightBounds> = weights.as_ref().map_or(Vec::new(), |t| t.bounds.clone());
    if let Some(t) = &weights {
        warnings.extend(t.warnings.iter().cloned());
    }
    let full_exit: Vec<String> = participants
        .iter()
        .filter(|a| exits.contains(a.as_str()))
        .cloned()
        .collect();
    bounds.extend(full_exit.iter().map(WeightBounds::full_exit));

    let mut sizes = Vec::new();
    for a in &participants {
        match market.sizing.get(a) {
            None => warnings.push(format!("{a}: no sizing inputs, excluded from this event")),
            Some(inp) => match size_bounds(inp, &config.sizing_params) {
                Ok(s) => sizes.push(s),
                Err(e @ (Error::BoundsConflict { .. } | Error::Untradable { .. } | Error::Validation { .. })) => {
                    warnings.push(e.to_string());
                }
                Err(e) => return Err(e),
            },
        }
    }

    let holdings = portfolio
        .positions
        .iter()
        .filter(|p| participants.contains(&p.asset_id))
        .map(|p| Holding::from_notional(p.asset_id.clone(), p.amount, p.price))
        .collect::<Result<Vec<_>>>()?;
    let ctx = prepare_event(event, holdings, flow, &full_exit)?;
    let plan_cfg = PlanConfig {
        delay_secs: config.simulation.order_delay_secs,
        jitter: None,
    };
    let simple = simple_plan(&ctx, &bounds, &sizes, plan_cfg.delay_secs)?;
    let initial_plan = plan_event(ctx, &bounds, &sizes, &plan_cfg)?;
    warnings.extend(initial_plan.warnings.iter().cloned());

    let mut fills = FillReport::exact(&initial_plan);
    let noise = config.simulation.fill_noise;
    if noise > 0.0 {
        for f in &mut fills.fills {
            let u: f64 = rng.gen();
            f.realized = f.placed.scale(1.0 - noise * u);
        }
    }
    let plan = if fills.shortfall().is_zero() {
        initial_plan.clone()
    } else {
        adjust_after_sells(&initial_plan, &fills, &sizes, &plan_cfg)?
    };
    let cascade_cost = estimate_costs(&plan.schedule, &market.sizing, &config.cost);
    let simple_cost = estimate_costs(&simple.schedule, &market.sizing, &config.cost);
    Ok(EventOutcome {
        date,
        event_index: event,
        participants,
        weights,
        bounds,
        sizes,
        initial_plan,
        plan,
        fills,
        simple,
        cascade_cost,
        simple_cost,
        warnings,
    })
}

/// Minutes from `anchor` to `date`, which must not precede it.
fn minutes_since(anchor: NaiveDate, date: NaiveDate) -> Result<u64> {
    let days = (date - anchor).num_days();
    if days < 0 {
        return Err(Error::Config(format!("event date {date} precedes anchor {anchor}")));
    }
    Ok(days as u64 * 1440)
}

/// A single event on the holdings file as of `date`.
pub fn rebalance_once(
    config: &RunConfig,
    market: &Market,
    date: NaiveDate,
    flow: Usd,
) -> Result<(EventOutcome, Portfolio)> {
    let mut portfolio = Portfolio::load(&config.holdings, market, date)?;
    let anchor = config.anchor_date.unwrap_or(date);
    let event = event_index(minutes_since(anchor, date)?, config.base_interval());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    portfolio.cash += flow;
    let outcome = run_event(config, market, &portfolio, date, event, portfolio.cash, &mut rng)?;
    portfolio.apply(&outcome.plan, &outcome.fills)?;
    Ok((outcome, portfolio))
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub events: Vec<EventOutcome>,
    pub skipped: Vec<(NaiveDate, String)>,
    pub cascade_total: CostReport,
    pub simple_total: CostReport,
    pub final_portfolio: Portfolio,
}

/// Replays `flows` (one event per entry, dates in `[from, to]`) starting from
/// `portfolio` as valued on `from`. Events that fail on data problems are
/// skipped with a reason; their flow stays in cash for the next event.
pub fn simulate(
    config: &RunConfig,
    market: &Market,
    mut portfolio: Portfolio,
    from: NaiveDate,
    to: NaiveDate,
    flows: &[(NaiveDate, Usd)],
) -> Result<SimulationReport> {
    if from > to {
        return Err(Error::Config(format!("empty date range {from}..{to}")));
    }
    let anchor = config.anchor_date.unwrap_or(from);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut events = Vec::new();
    let mut skipped = Vec::new();
    for &(date, flow) in flows.iter().filter(|(d, _)| (from..=to).contains(d)) {
        portfolio.cash += flow;
        let event = event_index(minutes_since(anchor, date)?, config.base_interval());
        let attempt = portfolio
            .mark(market, date)
            .and_then(|_| run_event(config, market, &portfolio, date, event, portfolio.cash, &mut rng));
        match attempt {
            Ok(outcome) => {
                portfolio.apply(&outcome.plan, &outcome.fills)?;
                for w in &outcome.warnings {
                    log::info!("{date}: {w}");
                }
                events.push(outcome);
            }
            Err(e @ (Error::Coverage { .. }
            | Error::InsufficientData { .. }
            | Error::Infeasible(_)
            | Error::DegenerateMeasure { .. }
            | Error::EmptyPortfolio)) => {
                log::warn!("{date}: event skipped: {e}");
                skipped.push((date, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SimulationReport {
        cascade_total: events.iter().map(|e| e.cascade_cost).sum(),
        simple_total: events.iter().map(|e| e.simple_cost).sum(),
        events,
        skipped,
        final_portfolio: portfolio,
    })
}
