#![allow(dead_code)]

use rand::Rng;
use waterfall_rebalancer::cascade::{prepare_event, EventContext, Holding};
use waterfall_rebalancer::sizing::TradeSizeBounds;
use waterfall_rebalancer::weights::WeightBounds;
use waterfall_rebalancer::Usd;

pub struct Instance {
    pub ctx: EventContext,
    pub bounds: Vec<WeightBounds>,
    pub sizes: Vec<TradeSizeBounds>,
}

pub fn usd(x: i64) -> Usd {
    Usd::from_dollars(x)
}

fn micros(rng: &mut impl Rng, lo_dollars: i64, hi_dollars: i64) -> Usd {
    Usd::from_micros(rng.gen_range(lo_dollars as i128 * 1_000_000..=hi_dollars as i128 * 1_000_000))
}

pub fn random_sizes(rng: &mut impl Rng, id: &str) -> TradeSizeBounds {
    let min = micros(rng, 100, 50_000);
    let max = min + micros(rng, 0, 200_000);
    TradeSizeBounds::new(id, min, max).unwrap()
}

fn random_band(rng: &mut impl Rng, id: &str) -> WeightBounds {
    let mut w = [rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6)];
    w.sort_by(f64::total_cmp);
    match rng.gen_range(0..10) {
        0 => WeightBounds::pinned(id, w[1]),
        1 => WeightBounds::new(id, 0.0, w[1], w[2]).unwrap(),
        _ => WeightBounds::new(id, w[0], w[1], w[2]).unwrap(),
    }
}

/// Random event: 1..=50 assets, signed flow, bands, block sizes, and the
/// occasional full exit.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let k = rng.gen_range(1..=50);
    let ids: Vec<String> = (0..k).map(|i| format!("A{i:02}")).collect();
    let holdings: Vec<Holding> = ids
        .iter()
        .map(|id| {
            let amount = if rng.gen_bool(0.1) { Usd::ZERO } else { micros(rng, 0, 2_000_000) };
            Holding::from_notional(id.clone(), amount, rng.gen_range(0.01..5000.0)).unwrap()
        })
        .collect();
    let total: Usd = holdings.iter().map(|h| h.current_amount).sum();
    let flow = match rng.gen_range(0..8) {
        0 => Usd::ZERO,
        1..=3 => -Usd::from_micros(rng.gen_range(0..=total.micros())),
        _ => micros(rng, 0, 3_000_000),
    };
    let exits: Vec<String> = ids.iter().filter(|_| rng.gen_bool(0.05)).cloned().collect();
    let bounds = ids.iter().map(|id| random_band(rng, id)).collect();
    let sizes = ids.iter().map(|id| random_sizes(rng, id)).collect();
    Instance {
        ctx: prepare_event(0, holdings, flow, &exits).unwrap(),
        bounds,
        sizes,
    }
}

/// Degenerate bands (min = ideal = max) and a flow equal to the total gap to
/// ideal. Ideal notionals are exact integers of micros so both mechanisms
/// see identical targets.
pub fn degenerate_instance(rng: &mut impl Rng) -> (Instance, Vec<Usd>) {
    let k = rng.gen_range(1..=40);
    let ids: Vec<String> = (0..k).map(|i| format!("D{i:02}")).collect();
    let targets: Vec<Usd> = (0..k).map(|_| micros(rng, 1, 1_000_000)).collect();
    let new_total: Usd = targets.iter().sum();
    let holdings: Vec<Holding> = ids
        .iter()
        .map(|id| Holding::from_notional(id.clone(), micros(rng, 0, 1_000_000), 1.0).unwrap())
        .collect();
    let total: Usd = holdings.iter().map(|h| h.current_amount).sum();
    let bounds = ids
        .iter()
        .zip(&targets)
        .map(|(id, t)| WeightBounds::pinned(id.clone(), t.micros() as f64 / new_total.micros() as f64))
        .collect();
    let sizes = ids.iter().map(|id| random_sizes(rng, id)).collect();
    let inst = Instance {
        ctx: prepare_event(0, holdings, new_total - total, &[]).unwrap(),
        bounds,
        sizes,
    };
    (inst, targets)
}
