//! Capacity ranking and the waterfall fill.

use crate::money::Usd;

/// Ordinal ranks (1-based) of each asset's signed capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranks {
    /// Rank by signed capacity, largest first.
    pub desc: Vec<usize>,
    /// Rank by signed capacity, smallest (most negative) first.
    pub asc: Vec<usize>,
    /// Fill order: sells by ascending capacity, then buys by descending capacity.
    pub cap_rank: Vec<usize>,
}

impl Ranks {
    /// Asset indices in fill order.
    pub fn fill_order(&self) -> Vec<usize> {
        let mut order = vec![0; self.cap_rank.len()];
        for (i, &r) in self.cap_rank.iter().enumerate() {
            order[r - 1] = i;
        }
        order
    }
}

fn ordinal(diffs: &[Usd], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..diffs.len()).collect();
    // stable sort keeps ascending asset index among ties
    if descending {
        idx.sort_by(|&a, &b| diffs[b].cmp(&diffs[a]));
    } else {
        idx.sort_by(|&a, &b| diffs[a].cmp(&diffs[b]));
    }
    let mut rank = vec![0; diffs.len()];
    for (pos, &i) in idx.iter().enumerate() {
        rank[i] = pos + 1;
    }
    rank
}

/// `cap_rank = asc + buy * (desc - asc + total_sell)`.
pub fn rank_capacities(diffs: &[Usd], buy: &[bool], total_sell: usize) -> Ranks {
    assert_eq!(diffs.len(), buy.len());
    let desc = ordinal(diffs, true);
    let asc = ordinal(diffs, false);
    let cap_rank = (0..diffs.len())
        .map(|i| if buy[i] { desc[i] + total_sell } else { asc[i] })
        .collect();
    Ranks {
        desc,
        asc,
        cap_rank,
    }
}

/// The amount the waterfall distributes, with the direction of the event.
///
/// Deposits fill up to the budget from below (`min`), withdrawals from
/// above (`max`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FillBudget {
    pub deposit: bool,
    pub amount: Usd,
}

impl FillBudget {
    /// Deposit budget: flow plus the skipped sub-minimum sells.
    pub fn deposit(flow: Usd, min_size_delta_total: Usd) -> Self {
        FillBudget {
            deposit: true,
            amount: flow + min_size_delta_total,
        }
    }

    /// Withdrawal budget: flow less the forced buys.
    pub fn withdraw(flow: Usd, rebalance_delta_total: Usd) -> Self {
        FillBudget {
            deposit: false,
            amount: flow - rebalance_delta_total,
        }
    }

    fn clamp(&self, a: Usd, b: Usd) -> Usd {
        if self.deposit {
            a.min(b)
        } else {
            a.max(b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityFill {
    /// Capacity of every asset ranked strictly ahead.
    pub raw_filled: Vec<Usd>,
    pub cap_to_fill: Vec<Usd>,
}

fn raw_filled(diffs: &[Usd], ranks: &Ranks) -> Vec<Usd> {
    let mut raw = vec![Usd::ZERO; diffs.len()];
    let mut acc = Usd::ZERO;
    for i in ranks.fill_order() {
        raw[i] = acc;
        acc += diffs[i];
    }
    raw
}

/// Closed form: `cap = clamp(diff, B - clamp(B, raw))`.
pub fn capacity_to_fill(diffs: &[Usd], ranks: &Ranks, budget: FillBudget) -> CapacityFill {
    let raw = raw_filled(diffs, ranks);
    let b = budget.amount;
    let cap = diffs
        .iter()
        .zip(&raw)
        .map(|(&d, &r)| budget.clamp(d, b - budget.clamp(b, r)))
        .collect();
    CapacityFill {
        raw_filled: raw,
        cap_to_fill: cap,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltCapacityFill {
    /// Budget already consumed by the assets ranked ahead.
    pub bound: Vec<Usd>,
    /// Budget consumed once this asset is included.
    pub inclusive: Vec<Usd>,
    pub cap_to_fill: Vec<Usd>,
}

/// Multi-step form: `bound = clamp(B, raw)`,
/// `inclusive = clamp(B, diff + bound)`, `cap = clamp(diff, inclusive - bound)`.
pub fn capacity_to_fill_alt(diffs: &[Usd], ranks: &Ranks, budget: FillBudget) -> AltCapacityFill {
    let raw = raw_filled(diffs, ranks);
    let b = budget.amount;
    let bound: Vec<Usd> = raw.iter().map(|&r| budget.clamp(b, r)).collect();
    let inclusive: Vec<Usd> = diffs
        .iter()
        .zip(&bound)
        .map(|(&d, &lo)| budget.clamp(b, d + lo))
        .collect();
    let cap = diffs
        .iter()
        .zip(bound.iter().zip(&inclusive))
        .map(|(&d, (&lo, &inc))| budget.clamp(d, inc - lo))
        .collect();
    AltCapacityFill {
        bound,
        inclusive,
        cap_to_fill: cap,
    }
}

/// Greedy reference: walk the fill order, give each asset as much of the
/// remaining budget as its capacity allows, and carry the rest down.
pub fn sequential_fill_oracle(diffs: &[Usd], ranks: &Ranks, budget: FillBudget) -> Vec<Usd> {
    let mut out = vec![Usd::ZERO; diffs.len()];
    let mut remaining = budget.amount;
    for i in ranks.fill_order() {
        let take = if budget.deposit {
            diffs[i].min(remaining.max(Usd::ZERO))
        } else {
            diffs[i].max(remaining.min(Usd::ZERO))
        };
        out[i] = take;
        remaining -= take;
    }
    out
}
