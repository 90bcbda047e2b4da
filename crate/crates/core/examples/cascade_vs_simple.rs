//! The waterfall against trading every asset straight to its ideal weight,
//! over a batch of random deposits and withdrawals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waterfall_rebalancer::baseline::simple_plan;
use waterfall_rebalancer::cascade::{plan_event, prepare_event, Holding, PlanConfig};
use waterfall_rebalancer::sizing::TradeSizeBounds;
use waterfall_rebalancer::weights::WeightBounds;
use waterfall_rebalancer::Usd;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = 12;
    let ids: Vec<String> = (0..k).map(|i| format!("T{i:02}")).collect();
    let ideal: Vec<f64> = {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|w| w / s).collect()
    };
    let bounds: Vec<WeightBounds> = ids
        .iter()
        .zip(&ideal)
        .map(|(id, w)| WeightBounds::new(id.clone(), w * 0.8, *w, w * 1.25))
        .collect::<Result<_, _>>()?;
    let sizes: Vec<TradeSizeBounds> = ids
        .iter()
        .map(|id| TradeSizeBounds::new(id.clone(), Usd::from_dollars(2_500), Usd::from_dollars(25_000)))
        .collect::<Result<_, _>>()?;

    let config = PlanConfig::default();
    let (mut cascade_orders, mut simple_orders) = (0u64, 0u64);
    let (mut cascade_volume, mut simple_volume) = (Usd::ZERO, Usd::ZERO);
    for _ in 0..50 {
        let holdings: Vec<Holding> = ids
            .iter()
            .zip(&ideal)
            .map(|(id, w)| Holding::from_notional(id.clone(), Usd::from_f64(2e6 * w * rng.gen_range(0.85..1.15)), 1.0))
            .collect::<Result<_, _>>()?;
        let flow = Usd::from_f64(rng.gen_range(-150_000.0..150_000.0));
        let ctx = prepare_event(0, holdings, flow, &[])?;
        let simple = simple_plan(&ctx, &bounds, &sizes, config.delay_secs)?;
        let plan = plan_event(ctx, &bounds, &sizes, &config)?;
        cascade_orders += plan.order_count();
        simple_orders += simple.order_count();
        cascade_volume += plan.schedule.iter().map(|e| e.amount.abs()).sum::<Usd>();
        simple_volume += simple.schedule.iter().map(|e| e.amount.abs()).sum::<Usd>();
    }
    println!("50 events, 12 assets");
    println!("{:<10} {:>8} {:>18}", "", "orders", "traded");
    println!("{:<10} {:>8} {:>18}", "cascade", cascade_orders, cascade_volume);
    println!("{:<10} {:>8} {:>18}", "simple", simple_orders, simple_volume);
    Ok(())
}
