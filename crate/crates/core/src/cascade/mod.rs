//! The cascading waterfall round robin.
//!
//! One rebalancing event runs as:
//!
//! 1. [`prepare_event`] freezes holdings and the net flow.
//! 2. [`compute_capacities`] turns weight bands into signed capacities.
//! 3. [`compute_deltas`] finds trades forced against the flow direction.
//! 4. [`rank_capacities`] orders sells ahead of buys.
//! 5. [`capacity_to_fill`] walks the waterfall.
//! 6. [`size_orders`] and [`build_schedule`] produce the orders.
//!
//! [`plan_event`] runs all of it. [`adjust_after_sells`] re-plans the buy
//! side once sell proceeds are known.

mod export;
mod fill;
mod orders;

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::money::Usd;
use crate::sizing::TradeSizeBounds;
use crate::weights::WeightBounds;

pub use export::{plan_records, schedule_records, PLAN_HEADER, SCHEDULE_HEADER};
pub use fill::{
    capacity_to_fill, capacity_to_fill_alt, rank_capacities, sequential_fill_oracle,
    AltCapacityFill, CapacityFill, FillBudget, Ranks,
};
pub use orders::{
    build_schedule, size_orders, OrderJitter, OrderSizing, ScheduleEntry, ScheduleItem, Side,
};

pub const DEFAULT_ORDER_DELAY_SECS: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Holding {
    pub asset_id: String,
    pub quantity: f64,
    pub price: f64,
    pub current_amount: Usd,
}

impl Holding {
    /// Position of `quantity` units at `price`; the notional is `q * p`
    /// rounded to the micro.
    pub fn new(asset_id: impl Into<String>, quantity: f64, price: f64) -> Result<Self> {
        let asset_id = asset_id.into();
        check_price(&asset_id, price)?;
        if !(quantity >= 0.0 && quantity.is_finite()) {
            return Err(Error::Validation {
                asset: asset_id,
                message: format!("quantity must be >= 0, got {quantity}"),
            });
        }
        Ok(Holding {
            current_amount: Usd::from_f64(quantity * price),
            asset_id,
            quantity,
            price,
        })
    }

    /// Position known by its notional; the quantity is derived.
    pub fn from_notional(asset_id: impl Into<String>, amount: Usd, price: f64) -> Result<Self> {
        let asset_id = asset_id.into();
        check_price(&asset_id, price)?;
        if amount.is_negative() {
            return Err(Error::Validation {
                asset: asset_id,
                message: format!("notional must be >= 0, got {amount}"),
            });
        }
        Ok(Holding {
            quantity: amount.to_f64() / price,
            asset_id,
            price,
            current_amount: amount,
        })
    }
}

fn check_price(asset: &str, price: f64) -> Result<()> {
    if price > 0.0 && price.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation {
            asset: asset.to_string(),
            message: format!("price must be > 0, got {price}"),
        })
    }
}

/// Frozen inputs of one rebalancing event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventContext {
    pub event_index: u64,
    pub holdings: Vec<Holding>,
    pub current_total: Usd,
    pub flow: Usd,
    pub full_exit: Vec<bool>,
}

impl EventContext {
    pub fn asset_count(&self) -> usize {
        self.holdings.len()
    }

    /// A zero flow counts as a deposit.
    pub fn is_deposit(&self) -> bool {
        !self.flow.is_negative()
    }

    pub fn is_withdraw(&self) -> bool {
        !self.is_deposit()
    }

    pub fn new_total(&self) -> Usd {
        self.current_total + self.flow
    }

    pub fn asset_ids(&self) -> Vec<String> {
        self.holdings.iter().map(|h| h.asset_id.clone()).collect()
    }
}

pub fn prepare_event(
    event_index: u64,
    holdings: Vec<Holding>,
    flow: Usd,
    full_exit: &[String],
) -> Result<EventContext> {
    let mut seen = HashSet::new();
    for h in &holdings {
        if !seen.insert(h.asset_id.as_str()) {
            return Err(Error::Validation {
                asset: h.asset_id.clone(),
                message: "asset listed twice in holdings".into(),
            });
        }
    }
    if let Some(missing) = full_exit.iter().find(|a| !seen.contains(a.as_str())) {
        return Err(Error::Coverage {
            what: "holdings for full exit",
            asset: missing.clone(),
        });
    }
    let current_total: Usd = holdings.iter().map(|h| h.current_amount).sum();
    if flow < -current_total {
        return Err(Error::Infeasible(format!(
            "withdrawal of {} exceeds portfolio value {current_total}",
            -flow
        )));
    }
    let exits: HashSet<&str> = full_exit.iter().map(String::as_str).collect();
    let full_exit = holdings.iter().map(|h| exits.contains(h.asset_id.as_str())).collect();
    Ok(EventContext {
        event_index,
        holdings,
        current_total,
        flow,
        full_exit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity {
    pub min_new: Usd,
    pub ideal_new: Usd,
    pub max_new: Usd,
    /// Signed room to the band edge in the direction of the flow.
    pub diff: Usd,
}

fn bounds_for<'a>(ctx: &EventContext, bounds: &'a [WeightBounds]) -> Result<Vec<&'a WeightBounds>> {
    let by_id: HashMap<&str, &WeightBounds> =
        bounds.iter().map(|b| (b.asset_id.as_str(), b)).collect();
    ctx.holdings
        .iter()
        .map(|h| {
            by_id.get(h.asset_id.as_str()).copied().ok_or_else(|| Error::Coverage {
                what: "weight bounds",
                asset: h.asset_id.clone(),
            })
        })
        .collect()
}

/// New notional targets at the post-flow total, and the signed distance of
/// each holding to the max (deposit) or min (withdrawal) target.
pub fn compute_capacities(ctx: &EventContext, bounds: &[WeightBounds]) -> Result<Vec<Capacity>> {
    let total = ctx.new_total();
    let deposit = ctx.is_deposit();
    Ok(bounds_for(ctx, bounds)?
        .into_iter()
        .zip(&ctx.holdings)
        .zip(&ctx.full_exit)
        .map(|((b, h), &exit)| {
            if exit {
                return Capacity {
                    min_new: Usd::ZERO,
                    ideal_new: Usd::ZERO,
                    max_new: Usd::ZERO,
                    diff: -h.current_amount,
                };
            }
            let lo = total.scale(b.min_w);
            let hi = total.scale(b.max_w);
            let (min_new, max_new) = (lo.min(hi), lo.max(hi));
            let target = if deposit { max_new } else { min_new };
            Capacity {
                min_new,
                ideal_new: total.scale(b.ideal_w),
                max_new,
                diff: target - h.current_amount,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deltas {
    pub rebalance_delta: Vec<Usd>,
    pub min_size_delta: Vec<Usd>,
    pub buy: Vec<bool>,
    pub rebalance_delta_total: Usd,
    pub min_size_delta_total: Usd,
    pub total_buy: usize,
    pub total_sell: usize,
}

/// Trades against the flow direction, the part of them below the minimum
/// block size, and the buy/sell split.
pub fn compute_deltas(ctx: &EventContext, caps: &[Capacity], min_sizes: &[Usd]) -> Deltas {
    assert_eq!(caps.len(), min_sizes.len());
    let deposit = ctx.is_deposit();
    let rebalance_delta: Vec<Usd> = caps
        .iter()
        .map(|c| {
            if deposit {
                c.diff.min(Usd::ZERO)
            } else {
                c.diff.max(Usd::ZERO)
            }
        })
        .collect();
    let min_size_delta: Vec<Usd> = rebalance_delta
        .iter()
        .zip(min_sizes)
        .map(|(&r, &m)| if r.abs() < m { r } else { Usd::ZERO })
        .collect();
    let buy: Vec<bool> = caps.iter().map(|c| !c.diff.is_negative()).collect();
    let total_buy = buy.iter().filter(|b| **b).count();
    Deltas {
        rebalance_delta_total: rebalance_delta.iter().sum(),
        min_size_delta_total: min_size_delta.iter().sum(),
        rebalance_delta,
        min_size_delta,
        total_sell: buy.len() - total_buy,
        buy,
        total_buy,
    }
}

impl Deltas {
    pub fn budget(&self, ctx: &EventContext) -> FillBudget {
        if ctx.is_deposit() {
            FillBudget::deposit(ctx.flow, self.min_size_delta_total)
        } else {
            FillBudget::withdraw(ctx.flow, self.rebalance_delta_total)
        }
    }
}

/// Every intermediate of one asset's path through the cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetPlanRow {
    pub asset_id: String,
    pub current: Usd,
    pub min_new: Usd,
    pub ideal_new: Usd,
    pub max_new: Usd,
    pub diff: Usd,
    pub rebalance_delta: Usd,
    pub min_size_delta: Usd,
    pub buy: bool,
    pub rank_desc: usize,
    pub rank_asc: usize,
    pub cap_rank: usize,
    pub raw_cap_filled: Usd,
    pub cap_filled: Usd,
    pub cap_inclusive: Usd,
    pub cap_to_fill: Usd,
    pub alt_cap_to_fill: Usd,
    pub min_size: Usd,
    pub max_size: Usd,
    pub orders: OrderSizing,
    pub full_exit: bool,
    /// No valid size bounds; the asset holds still this event.
    pub excluded: bool,
}

impl AssetPlanRow {
    pub fn side(&self) -> Side {
        if self.buy {
            Side::Buy
        } else {
            Side::Sell
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RebalancePlan {
    pub context: EventContext,
    pub rows: Vec<AssetPlanRow>,
    pub rebalance_delta_total: Usd,
    pub min_size_delta_total: Usd,
    pub budget: FillBudget,
    pub total_buy: usize,
    pub total_sell: usize,
    pub schedule: Vec<ScheduleEntry>,
    pub warnings: Vec<String>,
}

impl RebalancePlan {
    pub fn deployed(&self) -> Usd {
        self.rows.iter().map(|r| r.orders.amount_deployed).sum()
    }

    pub fn order_count(&self) -> u64 {
        self.rows.iter().map(|r| r.orders.total_orders).sum()
    }

    pub fn row(&self, asset_id: &str) -> Option<&AssetPlanRow> {
        self.rows.iter().find(|r| r.asset_id == asset_id)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlanConfig {
    pub delay_secs: u32,
    pub jitter: Option<OrderJitter>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            delay_secs: DEFAULT_ORDER_DELAY_SECS,
            jitter: None,
        }
    }
}

/// Size bounds aligned to the holdings; `None` marks an asset without a
/// usable pair, which is then held still.
pub(crate) fn sizes_for(ctx: &EventContext, sizes: &[TradeSizeBounds]) -> Vec<Option<TradeSizeBounds>> {
    let by_id: HashMap<&str, &TradeSizeBounds> =
        sizes.iter().map(|s| (s.asset_id.as_str(), s)).collect();
    ctx.holdings
        .iter()
        .map(|h| by_id.get(h.asset_id.as_str()).map(|s| (*s).clone()))
        .collect()
}

/// Runs the full cascade for one event. Assets missing from `sizes` are
/// excluded with a warning and keep their current position.
pub fn plan_event(
    ctx: EventContext,
    bounds: &[WeightBounds],
    sizes: &[TradeSizeBounds],
    config: &PlanConfig,
) -> Result<RebalancePlan> {
    let mut caps = compute_capacities(&ctx, bounds)?;
    let aligned = sizes_for(&ctx, sizes);
    let mut warnings = Vec::new();
    for (i, s) in aligned.iter().enumerate() {
        if s.is_none() {
            caps[i].diff = Usd::ZERO;
            warnings.push(format!(
                "{}: no valid trade size bounds, excluded from this event",
                ctx.holdings[i].asset_id
            ));
        }
    }
    let mins: Vec<Usd> = aligned
        .iter()
        .map(|s| s.as_ref().map_or(Usd::ZERO, |s| s.min_size))
        .collect();
    let deltas = compute_deltas(&ctx, &caps, &mins);
    let diffs: Vec<Usd> = caps.iter().map(|c| c.diff).collect();
    let ranks = rank_capacities(&diffs, &deltas.buy, deltas.total_sell);
    let budget = deltas.budget(&ctx);
    let fill = capacity_to_fill(&diffs, &ranks, budget);
    let alt = capacity_to_fill_alt(&diffs, &ranks, budget);

    let rows = (0..ctx.asset_count())
        .map(|i| {
            let (min_size, max_size, orders) = match &aligned[i] {
                Some(s) => (s.min_size, s.max_size, size_orders(fill.cap_to_fill[i], s)),
                None => (Usd::ZERO, Usd::ZERO, OrderSizing::NONE),
            };
            AssetPlanRow {
                asset_id: ctx.holdings[i].asset_id.clone(),
                current: ctx.holdings[i].current_amount,
                min_new: caps[i].min_new,
                ideal_new: caps[i].ideal_new,
                max_new: caps[i].max_new,
                diff: diffs[i],
                rebalance_delta: deltas.rebalance_delta[i],
                min_size_delta: deltas.min_size_delta[i],
                buy: deltas.buy[i],
                rank_desc: ranks.desc[i],
                rank_asc: ranks.asc[i],
                cap_rank: ranks.cap_rank[i],
                raw_cap_filled: fill.raw_filled[i],
                cap_filled: alt.bound[i],
                cap_inclusive: alt.inclusive[i],
                cap_to_fill: fill.cap_to_fill[i],
                alt_cap_to_fill: alt.cap_to_fill[i],
                min_size,
                max_size,
                orders,
                full_exit: ctx.full_exit[i],
                excluded: aligned[i].is_none(),
            }
        })
        .collect::<Vec<_>>();
    let schedule = schedule_rows(&rows, config, |_| true);
    Ok(RebalancePlan {
        context: ctx,
        rows,
        rebalance_delta_total: deltas.rebalance_delta_total,
        min_size_delta_total: deltas.min_size_delta_total,
        budget,
        total_buy: deltas.total_buy,
        total_sell: deltas.total_sell,
        schedule,
        warnings,
    })
}

fn schedule_rows(
    rows: &[AssetPlanRow],
    config: &PlanConfig,
    keep: impl Fn(&AssetPlanRow) -> bool,
) -> Vec<ScheduleEntry> {
    let items: Vec<ScheduleItem> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .map(|(i, r)| ScheduleItem {
            index: i,
            asset_id: &r.asset_id,
            side: r.side(),
            cap_rank: r.cap_rank,
            sizing: r.orders,
        })
        .collect();
    build_schedule(&items, config.delay_secs, config.jitter)
}

/// Outcome of one placed sell order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SellFill {
    pub sequence: usize,
    pub asset_id: String,
    pub placed: Usd,
    /// Proceeds actually received, signed like `placed`; zero for a failed order.
    pub realized: Usd,
}

impl SellFill {
    pub fn failed(&self) -> bool {
        self.realized.is_zero() && !self.placed.is_zero()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FillReport {
    pub fills: Vec<SellFill>,
}

impl FillReport {
    /// Every sell in the schedule filled at its placed size.
    pub fn exact(plan: &RebalancePlan) -> Self {
        FillReport {
            fills: plan
                .schedule
                .iter()
                .filter(|e| e.side == Side::Sell)
                .map(|e| SellFill {
                    sequence: e.sequence,
                    asset_id: e.asset_id.clone(),
                    placed: e.amount,
                    realized: e.amount,
                })
                .collect(),
        }
    }

    /// `sum(realized - placed)`; positive when sells brought in less.
    pub fn shortfall(&self) -> Usd {
        self.fills.iter().map(|f| f.realized - f.placed).sum()
    }
}

/// Re-plans the buy side after sell proceeds are known.
///
/// The sell shortfall is taken out of the skipped-sell total, which shifts
/// the deposit budget; buy capacities are recomputed against the unchanged
/// waterfall prefix and re-sized. Sell rows and sell schedule entries are
/// kept as placed. In a withdrawal the budget does not depend on that total,
/// so the buy side comes back unchanged.
pub fn adjust_after_sells(
    plan: &RebalancePlan,
    fills: &FillReport,
    sizes: &[TradeSizeBounds],
    config: &PlanConfig,
) -> Result<RebalancePlan> {
    let sells: HashMap<usize, &ScheduleEntry> = plan
        .schedule
        .iter()
        .filter(|e| e.side == Side::Sell)
        .map(|e| (e.sequence, e))
        .collect();
    let mut seen = HashSet::new();
    for f in &fills.fills {
        match sells.get(&f.sequence) {
            Some(e) if e.asset_id == f.asset_id && e.amount == f.placed => {}
            _ => {
                return Err(Error::Reconciliation(format!(
                    "fill #{} for {} at {} does not match a placed sell",
                    f.sequence, f.asset_id, f.placed
                )))
            }
        }
        if !seen.insert(f.sequence) {
            return Err(Error::Reconciliation(format!("sell #{} reported twice", f.sequence)));
        }
    }
    if seen.len() != sells.len() {
        let mut missing: Vec<usize> = sells.keys().filter(|s| !seen.contains(s)).copied().collect();
        missing.sort_unstable();
        return Err(Error::Reconciliation(format!("no outcome for sells {missing:?}")));
    }

    let min_size_delta_total = plan.min_size_delta_total - fills.shortfall();
    let budget = if plan.context.is_deposit() {
        FillBudget::deposit(plan.context.flow, min_size_delta_total)
    } else {
        plan.budget
    };
    let aligned = sizes_for(&plan.context, sizes);
    let mut rows = plan.rows.clone();
    for (row, size) in rows.iter_mut().zip(&aligned) {
        if !row.buy || row.excluded {
            continue;
        }
        let size = size.as_ref().ok_or_else(|| Error::Coverage {
            what: "trade size bounds",
            asset: row.asset_id.clone(),
        })?;
        let b = budget.amount;
        let clamp = |x: Usd, y: Usd| if budget.deposit { x.min(y) } else { x.max(y) };
        row.cap_filled = clamp(b, row.raw_cap_filled);
        row.cap_inclusive = clamp(b, row.diff + row.cap_filled);
        row.cap_to_fill = clamp(row.diff, b - clamp(b, row.raw_cap_filled));
        row.alt_cap_to_fill = clamp(row.diff, row.cap_inclusive - row.cap_filled);
        row.orders = size_orders(row.cap_to_fill, size);
    }
    let mut schedule: Vec<ScheduleEntry> = plan
        .schedule
        .iter()
        .filter(|e| e.side == Side::Sell)
        .cloned()
        .collect();
    let offset = schedule.len();
    for mut e in schedule_rows(&rows, config, |r| r.buy) {
        e.sequence += offset;
        schedule.push(e);
    }
    Ok(RebalancePlan {
        context: plan.context.clone(),
        rows,
        rebalance_delta_total: plan.rebalance_delta_total,
        min_size_delta_total,
        budget,
        total_buy: plan.total_buy,
        total_sell: plan.total_sell,
        schedule,
        warnings: plan.warnings.clone(),
    })
}
