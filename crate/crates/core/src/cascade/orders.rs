//! Splitting a capacity into orders and sequencing them.

use crate::money::Usd;
use crate::sizing::TradeSizeBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderSizing {
    /// 1 when the capacity reaches the minimum block size.
    pub min_orders: u64,
    /// Whole maximum blocks contained in the capacity.
    pub additional_orders: u64,
    pub total_orders: u64,
    /// Nominal size of each order, rounded half-even to the micro.
    pub order_size: Usd,
    /// Size of the final order, which absorbs the rounding residue.
    pub last_order: Usd,
    pub amount_deployed: Usd,
}

impl OrderSizing {
    pub const NONE: OrderSizing = OrderSizing {
        min_orders: 0,
        additional_orders: 0,
        total_orders: 0,
        order_size: Usd::ZERO,
        last_order: Usd::ZERO,
        amount_deployed: Usd::ZERO,
    };

    /// Amount of the `n`-th order (0-based).
    pub fn order(&self, n: u64) -> Usd {
        if n + 1 == self.total_orders {
            self.last_order
        } else {
            self.order_size
        }
    }
}

/// `orderSize = minOrders * cap / (floor(|cap| / maxs) + 1)`.
///
/// `additional_orders` is reported even when the capacity is below the
/// minimum, but no orders are placed in that case.
pub fn size_orders(cap: Usd, sizes: &TradeSizeBounds) -> OrderSizing {
    let additional = cap.whole_multiples_of(sizes.max_size);
    if cap.abs() < sizes.min_size || cap.is_zero() {
        return OrderSizing {
            additional_orders: additional,
            ..OrderSizing::NONE
        };
    }
    let total = additional + 1;
    let order_size = cap.div_round(total as i128);
    let last_order = cap - order_size * (total as i128 - 1);
    OrderSizing {
        min_orders: 1,
        additional_orders: additional,
        total_orders: total,
        order_size,
        last_order,
        amount_deployed: cap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Sell,
    Buy,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "Buy",
            Side::Sell => "Sell",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    /// 1-based position in the execution sequence.
    pub sequence: usize,
    pub asset_id: String,
    pub side: Side,
    pub amount: Usd,
    pub delay_secs: u32,
}

/// Optional per-order size perturbation: `(asset index, order index, size)`
/// to a replacement size. Applied to every order of an asset but the last,
/// which still closes the asset's total.
pub type OrderJitter = fn(usize, u64, Usd) -> Usd;

/// One asset's contribution to the schedule.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleItem<'a> {
    pub index: usize,
    pub asset_id: &'a str,
    pub side: Side,
    pub cap_rank: usize,
    pub sizing: OrderSizing,
}

/// Sells before buys, each side in capacity-rank order.
pub fn build_schedule(
    items: &[ScheduleItem<'_>],
    delay_secs: u32,
    jitter: Option<OrderJitter>,
) -> Vec<ScheduleEntry> {
    let mut order: Vec<&ScheduleItem> = items.iter().filter(|it| it.sizing.total_orders > 0).collect();
    order.sort_by_key(|it| (it.side, it.cap_rank));
    let mut out = Vec::new();
    for it in order {
        let n = it.sizing.total_orders;
        let mut placed = Usd::ZERO;
        for j in 0..n {
            let amount = if j + 1 == n {
                it.sizing.amount_deployed - placed
            } else {
                let base = it.sizing.order(j);
                jitter.map_or(base, |f| f(it.index, j, base))
            };
            placed += amount;
            out.push(ScheduleEntry {
                sequence: out.len() + 1,
                asset_id: it.asset_id.to_string(),
                side: it.side,
                amount,
                delay_secs,
            });
        }
    }
    out
}
