//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{degenerate_instance, random_instance, usd};
use waterfall_rebalancer::baseline::simple_plan;
use waterfall_rebalancer::cascade::{
    adjust_after_sells, capacity_to_fill, capacity_to_fill_alt, compute_capacities, compute_deltas,
    plan_event, prepare_event, rank_capacities, sequential_fill_oracle, FillReport, Holding,
    PlanConfig, Side,
};
use waterfall_rebalancer::harness::{
    load_config, simulate, write_simulation_reports, Market, Portfolio,
};
use waterfall_rebalancer::market_data::{
    aligned_window, covariance_matrix, log_returns, rolling_stats, CovarianceMatrix, ReturnSeries,
    Window,
};
use waterfall_rebalancer::sizing::{size_bounds, SizingConfig, SizingInputs, TradeSizeBounds};
use waterfall_rebalancer::synth::{price_csv, price_path, PathSpec};
use waterfall_rebalancer::weights::{
    constrained_min_variance_weights, equal_weights, inverse_measure_weights,
    min_variance_weights, risk_contribution_spread, risk_parity_weights, Scheme, SolverConfig,
    WeightBounds,
};
use waterfall_rebalancer::Usd;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const FUZZ_CASES: usize = 2000;

/// Fill order computed from scratch: sells by ascending diff, then buys by
/// descending diff, ties by index.
fn reference_order(diffs: &[Usd]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..diffs.len()).collect();
    idx.sort_by(|&a, &b| {
        let (da, db) = (diffs[a], diffs[b]);
        match (da.is_negative(), db.is_negative()) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            (true, true) => da.cmp(&db).then(a.cmp(&b)),
            (false, false) => db.cmp(&da).then(a.cmp(&b)),
        }
    });
    idx
}

struct FuzzStats {
    deposits_checked: usize,
    withdraws_checked: usize,
    rows_with_orders: usize,
}

/// Criteria 1, 2, 3 and 5 share one corpus.
fn fuzz_corpus(
    dual: &mut Vec<String>,
    oracle: &mut Vec<String>,
    conservation: &mut Vec<String>,
    sizing: &mut Vec<String>,
) -> (FuzzStats, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001);
    let mut stats = FuzzStats {
        deposits_checked: 0,
        withdraws_checked: 0,
        rows_with_orders: 0,
    };
    let start = Instant::now();
    for case in 0..FUZZ_CASES {
        let inst = random_instance(&mut rng);
        let ctx = &inst.ctx;
        let caps = compute_capacities(ctx, &inst.bounds).unwrap();
        let mins: Vec<Usd> = inst.sizes.iter().map(|s| s.min_size).collect();
        let deltas = compute_deltas(ctx, &caps, &mins);
        let diffs: Vec<Usd> = caps.iter().map(|c| c.diff).collect();
        let ranks = rank_capacities(&diffs, &deltas.buy, deltas.total_sell);
        let budget = deltas.budget(ctx);
        let main = capacity_to_fill(&diffs, &ranks, budget).cap_to_fill;
        let alt = capacity_to_fill_alt(&diffs, &ranks, budget).cap_to_fill;
        let greedy = sequential_fill_oracle(&diffs, &ranks, budget);

        // order-independent reference loop
        let order = reference_order(&diffs);
        if ranks.fill_order() != order && dual.len() < 5 {
            dual.push(format!("case {case}: rank order differs from reference"));
        }
        let mut reference = vec![Usd::ZERO; diffs.len()];
        let mut left = budget.amount;
        for &i in &order {
            reference[i] = if budget.deposit {
                diffs[i].min(left.max(Usd::ZERO))
            } else {
                diffs[i].max(left.min(Usd::ZERO))
            };
            left -= reference[i];
        }
        if main != alt && dual.len() < 5 {
            dual.push(format!("case {case}: closed form {main:?} vs alternate {alt:?}"));
        }
        if (main != greedy || main != reference) && oracle.len() < 5 {
            oracle.push(format!("case {case}: closed form vs greedy oracle mismatch"));
        }

        let total: Usd = main.iter().sum();
        let sum_diff: Usd = diffs.iter().sum();
        if ctx.is_deposit() {
            if sum_diff >= budget.amount {
                stats.deposits_checked += 1;
                let want = ctx.flow + deltas.min_size_delta_total;
                if total != want && conservation.len() < 5 {
                    conservation.push(format!("case {case}: deposit sum {total} != {want}"));
                }
            }
        } else {
            let sells: Usd = diffs.iter().filter(|d| d.is_negative()).sum();
            if sells <= budget.amount {
                stats.withdraws_checked += 1;
                let sell_caps: Usd = main
                    .iter()
                    .zip(&deltas.buy)
                    .filter(|(_, b)| !**b)
                    .map(|(c, _)| *c)
                    .sum();
                let want = ctx.flow - deltas.rebalance_delta_total;
                if (sell_caps != want || total != ctx.flow) && conservation.len() < 5 {
                    conservation.push(format!(
                        "case {case}: withdraw sells {sell_caps} != {want} or total {total} != {}",
                        ctx.flow
                    ));
                }
            }
        }

        let plan = plan_event(ctx.clone(), &inst.bounds, &inst.sizes, &PlanConfig::default()).unwrap();
        for (row, size) in plan.rows.iter().zip(&inst.sizes) {
            let o = &row.orders;
            let placed: Usd = plan
                .schedule
                .iter()
                .filter(|e| e.asset_id == row.asset_id)
                .map(|e| e.amount)
                .sum();
            if o.total_orders == 0 {
                if (!placed.is_zero() || !o.amount_deployed.is_zero()) && sizing.len() < 5 {
                    sizing.push(format!("case {case} {}: orders without minimum", row.asset_id));
                }
                continue;
            }
            stats.rows_with_orders += 1;
            let floor = size.min_size.min(size.max_size.div_round(2));
            let s = o.order_size.abs();
            let ok = s <= size.max_size
                && s >= floor
                && placed == row.cap_to_fill
                && o.amount_deployed == row.cap_to_fill
                && (o.order_size.is_negative() == (row.side() == Side::Sell));
            if !ok && sizing.len() < 5 {
                sizing.push(format!(
                    "case {case} {}: size {} orders {} cap {} placed {placed} bounds ({}, {})",
                    row.asset_id, o.order_size, o.total_orders, row.cap_to_fill, size.min_size, size.max_size
                ));
            }
        }
    }
    (stats, start.elapsed())
}

fn worked_instances() -> Outcome {
    let blocks = |ids: &[&str]| -> Vec<TradeSizeBounds> {
        ids.iter().map(|id| TradeSizeBounds::new(*id, usd(1000), usd(10000)).unwrap()).collect()
    };
    let h = |id: &str, x: i64| Holding::from_notional(id, usd(x), 1.0).unwrap();
    let b = |id: &str, lo: f64, mid: f64, hi: f64| WeightBounds::new(id, lo, mid, hi).unwrap();
    let cfg = PlanConfig::default();

    let ctx = prepare_event(0, vec![h("A", 60000), h("B", 40000)], usd(20000), &[]).unwrap();
    let plan = plan_event(ctx, &[b("A", 0.4, 0.5, 0.6), b("B", 0.3, 0.5, 0.6)], &blocks(&["A", "B"]), &cfg)
        .map_err(|e| e.to_string())?;
    let (a, bb) = (plan.row("A").unwrap(), plan.row("B").unwrap());
    check(
        (a.cap_to_fill, bb.cap_to_fill) == (Usd::ZERO, usd(20000))
            && bb.orders.total_orders == 3
            && bb.orders.order_size == Usd::from_micros(6_666_666_667),
        || format!("deposit: A {} B {} x{} @ {}", a.cap_to_fill, bb.cap_to_fill, bb.orders.total_orders, bb.orders.order_size),
    )?;

    let ctx = prepare_event(0, vec![h("A", 60000), h("B", 40000)], usd(-20000), &[]).unwrap();
    let plan = plan_event(ctx, &[b("A", 0.3, 0.5, 0.6), b("B", 0.3, 0.5, 0.6)], &blocks(&["A", "B"]), &cfg)
        .map_err(|e| e.to_string())?;
    let (a, bb) = (plan.row("A").unwrap(), plan.row("B").unwrap());
    check(
        (a.diff, bb.diff) == (usd(-36000), usd(-16000))
            && (a.cap_to_fill, bb.cap_to_fill) == (usd(-20000), Usd::ZERO),
        || format!("withdraw: A {} B {}", a.cap_to_fill, bb.cap_to_fill),
    )?;

    let ctx = prepare_event(0, vec![h("A", 60000), h("B", 30000)], usd(10000), &[]).unwrap();
    let plan = plan_event(ctx, &[b("A", 0.1, 0.3, 0.4), b("B", 0.5, 0.7, 0.92)], &blocks(&["A", "B"]), &cfg)
        .map_err(|e| e.to_string())?;
    let (a, bb) = (plan.row("A").unwrap(), plan.row("B").unwrap());
    let sells_first = plan
        .schedule
        .iter()
        .skip_while(|e| e.side == Side::Sell)
        .all(|e| e.side == Side::Buy);
    check(
        (a.diff, bb.diff) == (usd(-20000), usd(62000))
            && (a.cap_to_fill, bb.cap_to_fill) == (usd(-20000), usd(30000))
            && sells_first,
        || format!("forced sell: A {} B {}", a.cap_to_fill, bb.cap_to_fill),
    )?;
    Ok("deposit, withdraw and forced-sell instances exact".into())
}

fn convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0006);
    let cases = 300;
    let mut partial = 0;
    for case in 0..cases {
        let (inst, targets) = degenerate_instance(&mut rng);
        let cfg = PlanConfig::default();
        let simple = simple_plan(&inst.ctx, &inst.bounds, &inst.sizes, cfg.delay_secs).map_err(|e| e.to_string())?;
        let plan = plan_event(inst.ctx.clone(), &inst.bounds, &inst.sizes, &cfg).map_err(|e| e.to_string())?;
        for ((r, s), t) in plan.rows.iter().zip(&simple.rows).zip(&targets) {
            check(r.ideal_new == *t && r.max_new == *t && r.min_new == *t, || {
                format!("case {case}: targets not exact for {}", r.asset_id)
            })?;
            check(r.diff == s.ideal_actual_diff, || format!("case {case}: diff mismatch"))?;
            if r.cap_to_fill == r.diff {
                check(r.orders.amount_deployed == s.orders.amount_deployed, || {
                    format!("case {case} {}: cascade {} simple {}", r.asset_id, r.orders.amount_deployed, s.orders.amount_deployed)
                })?;
            } else {
                partial += 1;
            }
        }
        let gap: Usd = plan.rows.iter().map(|r| r.diff - r.cap_to_fill).sum();
        let expected = if inst.ctx.is_deposit() { -plan.min_size_delta_total } else { Usd::ZERO };
        check(gap == expected, || format!("case {case}: unfilled {gap} vs filtered {expected}"))?;
    }
    Ok(format!("{cases} instances, {partial} rows short only by filtered sub-minimum sells"))
}

fn random_pd(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(k + 3, k, |_, _| rng.gen_range(-0.05..0.05));
    let m = a.transpose() * &a / (k as f64 + 2.0);
    m + DMatrix::from_diagonal(&DVector::from_fn(k, |_, _| rng.gen_range(1e-5..4e-4)))
}

/// Minimum variance by eliminating the last weight and solving the reduced
/// unconstrained system.
fn elimination_min_variance(x: &DMatrix<f64>) -> Vec<f64> {
    let k = x.nrows();
    if k == 1 {
        return vec![1.0];
    }
    let n = k - 1;
    // w_k = 1 - sum(v); minimize over v
    let mut h = DMatrix::zeros(n, n);
    let mut g = DVector::zeros(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = x[(i, j)] - x[(i, n)] - x[(n, j)] + x[(n, n)];
        }
        g[i] = x[(n, n)] - x[(i, n)];
    }
    let v = h.lu().solve(&g).expect("reduced system solvable");
    let mut w: Vec<f64> = v.iter().copied().collect();
    w.push(1.0 - v.sum());
    w
}

fn weight_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let cfg = SolverConfig::default();
    let mut worst = [0.0f64; 3];
    for case in 0..200 {
        let k = rng.gen_range(3..=10);
        let x = random_pd(&mut rng, k);
        let ids: Vec<String> = (0..k).map(|i| format!("W{i}")).collect();
        let cov = CovarianceMatrix::new(ids.clone(), x.clone()).unwrap();

        let rp = risk_parity_weights(&cov, &cfg).map_err(|e| format!("case {case}: {e}"))?;
        let spread = risk_contribution_spread(&x, &rp.weights);
        worst[0] = worst[0].max(spread);
        check(spread <= 1e-8, || format!("case {case}: RP spread {spread:e}"))?;

        let mv = min_variance_weights(&cov, &cfg).map_err(|e| e.to_string())?;
        let xw = &x * DVector::from_column_slice(&mv.weights);
        let mean = xw.mean();
        let foc = xw.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs();
        worst[1] = worst[1].max(foc);
        check(foc <= 1e-8, || format!("case {case}: min-variance FOC {foc:e}"))?;
        let reference = elimination_min_variance(&x);
        let gap = mv.weights.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst[2] = worst[2].max(gap);
        check(gap <= 1e-6, || format!("case {case}: min-variance vs elimination {gap:e}"))?;

        let sigma: Vec<f64> = (0..k).map(|i| x[(i, i)].sqrt()).collect();
        let vvv_factor: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..0.5)).collect();
        let theta = 0.0;
        let adjusted: Vec<f64> = sigma.iter().zip(&vvv_factor).map(|(s, v)| s + theta * v).collect();
        let vvv = inverse_measure_weights(Scheme::Vvv, &ids, &adjusted).unwrap();
        let sp = inverse_measure_weights(Scheme::SimpleParity, &ids, &sigma).unwrap();
        check(
            vvv.weights.iter().zip(&sp.weights).all(|(a, b)| a.to_bits() == b.to_bits()),
            || format!("case {case}: VVV(theta=0) differs from simple parity"),
        )?;

        let variance: Vec<f64> = (0..k).map(|i| x[(i, i)]).collect();
        let mut normalized = vec![
            equal_weights(&ids).unwrap(),
            inverse_measure_weights(Scheme::SimpleVariance, &ids, &variance).unwrap(),
            sp,
            vvv,
            rp,
            mv,
            constrained_min_variance_weights(&cov, &vec![0.0; k], None, &cfg).map_err(|e| e.to_string())?,
        ];
        if k >= 7 {
            normalized.push(
                constrained_min_variance_weights(&cov, &vec![0.0; k], Some(&vec![0.15; k]), &cfg)
                    .map_err(|e| e.to_string())?,
            );
        }
        for v in &normalized {
            let s = v.sum();
            check((s - 1.0).abs() <= 1e-10, || format!("case {case}: {:?} sums to {s}", v.scheme))?;
        }
    }
    Ok(format!(
        "200 covariances; worst RP spread {:.1e}, FOC {:.1e}, vs elimination {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0008);
    let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let mut returns = Vec::new();
    let mut worst = 0.0f64;
    for (i, vol) in [0.02, 0.05, 0.08].into_iter().enumerate() {
        let s = price_path(&format!("S{i}"), start, 366, PathSpec::random_walk(50.0, vol), &mut rng).unwrap();
        let r = log_returns(&s).unwrap();
        for w in rolling_stats(&r, Window::full(90)) {
            let end = r.returns.iter().position(|x| x.0 == w.date).unwrap();
            let xs: Vec<f64> = r.returns[end + 1 - 90..=end].iter().map(|x| x.1).collect();
            let mean = xs.iter().sum::<f64>() / 90.0;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 89.0;
            let rel = (w.volatility - var.sqrt()).abs() / var.sqrt();
            worst = worst.max(rel);
        }
        returns.push(r);
    }
    check(worst <= 1e-12, || format!("rolling sigma relative error {worst:e}"))?;
    let cov = covariance_matrix(&returns, 90, 30).map_err(|e| e.to_string())?;
    let (_, m) = aligned_window(&returns, 90, 30).map_err(|e| e.to_string())?;
    for j in 0..returns.len() {
        let aligned = ReturnSeries {
            asset_id: returns[j].asset_id.clone(),
            returns: m.column(j).iter().enumerate().map(|(i, v)| (start + chrono::Duration::days(i as i64), *v)).collect(),
        };
        let last = rolling_stats(&aligned, Window::full(m.nrows())).pop().unwrap();
        let diag = cov.entries[(j, j)];
        let rel = (diag - last.variance).abs() / last.variance;
        check(rel <= 1e-12, || format!("covariance diagonal {j} off by {rel:e}"))?;
    }
    Ok(format!("worst rolling sigma relative error {worst:.1e}; covariance diagonal matches"))
}

fn sizing_defaults() -> Outcome {
    let b = size_bounds(&SizingInputs::new("X", 25.0, 3e8, 1e8), &SizingConfig::default())
        .map_err(|e| e.to_string())?;
    check((b.min_size, b.max_size) == (usd(25_000), usd(50_000)), || {
        format!("got ({}, {})", b.min_size, b.max_size)
    })?;
    Ok("(25000, 50000)".into())
}

fn post_sell_adjustment() -> Outcome {
    let h = |id: &str, x: i64| Holding::from_notional(id, usd(x), 1.0).unwrap();
    let ctx = prepare_event(0, vec![h("A", 60000), h("B", 30000), h("C", 10000)], usd(10000), &[]).unwrap();
    let bounds = vec![
        WeightBounds::new("A", 0.1, 0.3, 0.4).unwrap(),
        WeightBounds::new("B", 0.3, 0.4, 0.5).unwrap(),
        WeightBounds::new("C", 0.2, 0.3, 0.4).unwrap(),
    ];
    let sizes: Vec<TradeSizeBounds> = ["A", "B", "C"]
        .iter()
        .map(|id| TradeSizeBounds::new(*id, usd(1000), usd(10000)).unwrap())
        .collect();
    let cfg = PlanConfig::default();
    let plan = plan_event(ctx, &bounds, &sizes, &cfg).map_err(|e| e.to_string())?;
    let mut fills = FillReport::exact(&plan);
    check(!fills.fills.is_empty(), || "scenario has no sells".into())?;
    let failed = fills.fills[0].placed;
    fills.fills[0].realized = Usd::ZERO;
    let revised = adjust_after_sells(&plan, &fills, &sizes, &cfg).map_err(|e| e.to_string())?;
    let shortfall = -failed;
    check(revised.budget.amount == plan.budget.amount - shortfall, || {
        format!("budget {} -> {} with shortfall {shortfall}", plan.budget.amount, revised.budget.amount)
    })?;
    let sells: Usd = revised.rows.iter().filter(|r| !r.buy).map(|r| r.cap_to_fill).sum();
    let buys: Usd = revised.rows.iter().filter(|r| r.buy).map(|r| r.cap_to_fill).sum();
    check(sells + buys == revised.budget.amount, || {
        format!("revised plan allocates {} of {}", sells + buys, revised.budget.amount)
    })?;
    let old_buys: Usd = plan.rows.iter().filter(|r| r.buy).map(|r| r.cap_to_fill).sum();
    check(old_buys - buys == shortfall, || format!("buys fell by {} not {shortfall}", old_buys - buys))?;
    let scheduled: Usd = revised.schedule.iter().filter(|e| e.side == Side::Buy).map(|e| e.amount).sum();
    check(scheduled == buys, || "buy schedule does not match revised caps".into())?;
    Ok(format!("failed sell of {failed}: buy budget cut by exactly {shortfall}"))
}

fn write_sim_inputs(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    let assets = [("AAA", "fast", 0.03), ("BBB", "fast", 0.05), ("CCC", "fast", 0.04), ("DDD", "slow", 0.06), ("EEE", "slow", 0.035)];
    let series: Vec<_> = assets
        .iter()
        .map(|(id, _, vol)| {
            let spec = PathSpec { start_price: 100.0, daily_vol: *vol, mean_reversion: 0.05 };
            price_path(id, start, 200, spec, &mut rng).unwrap()
        })
        .collect();
    fs::write(dir.join("prices.csv"), price_csv(&series)).unwrap();
    let mut sizing = String::from("asset,avg_gas_fees,avg_daily_volume,liquidity_pool_depth\n");
    let mut holdings = String::from("asset,network,quantity\n");
    for (id, net, _) in assets {
        sizing.push_str(&format!("{id},5,500000000,200000000\n"));
        holdings.push_str(&format!("{id},{net},{}\n", rng.gen_range(2000..8000)));
    }
    fs::write(dir.join("sizing.csv"), sizing).unwrap();
    fs::write(dir.join("holdings.csv"), holdings).unwrap();
    fs::write(
        dir.join("config.toml"),
        "prices = [\"prices.csv\"]\nsizing = \"sizing.csv\"\nholdings = \"holdings.csv\"\nseed = 5\n\
         [weights]\nmax_asset_weight = 0.35\n[simulation]\nfill_noise = 0.01\n\
         [[networks]]\nname = \"fast\"\ninterval_minutes = 1440\n\
         [[networks]]\nname = \"slow\"\ninterval_minutes = 4320\nmodulus = 3\n",
    )
    .unwrap();
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism_and_scale() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_sim_inputs(tmp.path());
    let cfg = load_config(tmp.path().join("config.toml")).map_err(|e| e.to_string())?;
    let market = Market::load(&cfg).map_err(|e| e.to_string())?;
    let from = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let flows: Vec<(NaiveDate, Usd)> = (0..100)
        .map(|d| (from + chrono::Duration::days(d), Usd::from_dollars(((d * 7919) % 200_001) - 90_000)))
        .collect();
    let to = flows.last().unwrap().0;
    let mut snaps = Vec::new();
    let mut events = 0;
    for run in 0..2 {
        let portfolio = Portfolio::load(&cfg.holdings, &market, from).map_err(|e| e.to_string())?;
        let report = simulate(&cfg, &market, portfolio, from, to, &flows).map_err(|e| e.to_string())?;
        events = report.events.len();
        let out = tmp.path().join(format!("run{run}"));
        write_simulation_reports(&out, &report).map_err(|e| e.to_string())?;
        snaps.push(snapshot(&out));
    }
    check(events == 100, || format!("only {events} of 100 events ran"))?;
    check(snaps[0] == snaps[1], || "reruns differ".into())?;

    let k = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let holdings: Vec<Holding> = (0..k)
        .map(|i| Holding::from_notional(format!("Z{i:05}"), Usd::from_micros(rng.gen_range(0..5_000_000_000_000)), 1.0).unwrap())
        .collect();
    let bounds: Vec<WeightBounds> = (0..k)
        .map(|i| {
            let mid = rng.gen_range(0.5..1.5) / k as f64;
            WeightBounds::new(format!("Z{i:05}"), mid * 0.8, mid, mid * 1.2).unwrap()
        })
        .collect();
    let sizes: Vec<TradeSizeBounds> = (0..k)
        .map(|i| TradeSizeBounds::new(format!("Z{i:05}"), usd(25_000), usd(200_000)).unwrap())
        .collect();
    let t = Instant::now();
    let ctx = prepare_event(0, holdings, usd(5_000_000), &[]).map_err(|e| e.to_string())?;
    let plan = plan_event(ctx, &bounds, &sizes, &PlanConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("10k-asset plan took {elapsed:?}"))?;
    Ok(format!(
        "{} files identical over 100 events; 10k-asset plan ({} orders) in {elapsed:?}",
        snaps[0].len(),
        plan.schedule.len()
    ))
}

fn main() {
    let mut dual = Vec::new();
    let mut oracle = Vec::new();
    let mut conservation = Vec::new();
    let mut sizing = Vec::new();
    let (stats, elapsed) = fuzz_corpus(&mut dual, &mut oracle, &mut conservation, &mut sizing);
    let in_time = elapsed < Duration::from_secs(10);
    let fuzz = |errs: &Vec<String>, ok_msg: String| -> Outcome {
        if errs.is_empty() {
            Ok(ok_msg)
        } else {
            Err(errs.join("; "))
        }
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("1 dual formulation", {
            let r = fuzz(&dual, format!("{FUZZ_CASES} instances in {elapsed:.2?}"));
            if in_time { r } else { Err(format!("corpus took {elapsed:?}")) }
        }),
        ("2 oracle equivalence", fuzz(&oracle, format!("{FUZZ_CASES} instances"))),
        ("3 conservation", {
            if stats.deposits_checked < 100 || stats.withdraws_checked < 100 {
                Err(format!("too few sufficient-capacity cases: {} deposits, {} withdrawals", stats.deposits_checked, stats.withdraws_checked))
            } else {
                fuzz(&conservation, format!("{} deposits, {} withdrawals", stats.deposits_checked, stats.withdraws_checked))
            }
        }),
        ("4 worked instances", worked_instances()),
        ("5 order sizing", fuzz(&sizing, format!("{} rows with orders", stats.rows_with_orders))),
        ("6 convergence to simple mechanism", convergence()),
        ("7 weight engine", weight_engine()),
        ("8 statistics", statistics()),
        ("9 sizing defaults", sizing_defaults()),
        ("10 post-sell adjustment", post_sell_adjustment()),
        ("11 determinism and scale", determinism_and_scale()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
