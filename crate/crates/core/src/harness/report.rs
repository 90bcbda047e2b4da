use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::baseline::{simple_plan_records, SIMPLE_PLAN_HEADER};
use crate::cascade::{plan_records, schedule_records, PLAN_HEADER, SCHEDULE_HEADER};
use crate::error::{Error, Result};
use crate::money::Usd;
use crate::weights::{WeightTable, WEIGHT_REPORT_HEADER};

use super::{CostReport, EventOutcome, SimulationReport};

pub const COST_HEADER: [&str; 7] =
    ["date", "event_index", "mechanism", "orders", "gas", "slippage", "total"];

pub fn write_csv(path: &Path, header: &[&str], records: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn write_weight_report(path: &Path, table: Option<&WeightTable>) -> Result<()> {
    let rows: Vec<Vec<String>> =
        table.map_or(Vec::new(), |t| t.rows.iter().map(|r| r.to_record()).collect());
    write_csv(path, &WEIGHT_REPORT_HEADER, &rows)
}

fn cost_lines(out: &mut String, prefix: &str, c: &CostReport) {
    let _ = writeln!(out, "{prefix}_orders = {}", c.orders);
    let _ = writeln!(out, "{prefix}_gas = {}", c.gas);
    let _ = writeln!(out, "{prefix}_slippage = {}", c.slippage);
    let _ = writeln!(out, "{prefix}_total = {}", c.total());
}

/// Weight table, both plans, both schedules, and a key/value summary.
pub fn write_event_reports(dir: &Path, o: &EventOutcome) -> Result<()> {
    write_weight_report(&dir.join("weights.csv"), o.weights.as_ref())?;
    write_csv(&dir.join("cascade_plan.csv"), &PLAN_HEADER, &plan_records(&o.plan))?;
    write_csv(
        &dir.join("cascade_schedule.csv"),
        &SCHEDULE_HEADER,
        &schedule_records(&o.plan.schedule),
    )?;
    write_csv(&dir.join("simple_plan.csv"), &SIMPLE_PLAN_HEADER, &simple_plan_records(&o.simple))?;
    write_csv(
        &dir.join("simple_schedule.csv"),
        &SCHEDULE_HEADER,
        &schedule_records(&o.simple.schedule),
    )?;
    let p = &o.plan;
    let mut s = String::new();
    let _ = writeln!(s, "date = {}", o.date);
    let _ = writeln!(s, "event_index = {}", o.event_index);
    let _ = writeln!(s, "assets = {}", o.participants.join(" "));
    let _ = writeln!(s, "current_total = {}", p.context.current_total);
    let _ = writeln!(s, "flow = {}", p.context.flow);
    let _ = writeln!(s, "deposit = {}", p.context.is_deposit());
    let _ = writeln!(s, "rebalance_delta_total = {}", p.rebalance_delta_total);
    let _ = writeln!(s, "min_size_delta_total = {}", p.min_size_delta_total);
    let _ = writeln!(s, "fill_budget = {}", p.budget.amount);
    let _ = writeln!(s, "total_buy = {}", p.total_buy);
    let _ = writeln!(s, "total_sell = {}", p.total_sell);
    let _ = writeln!(s, "sell_shortfall = {}", o.fills.shortfall());
    let _ = writeln!(s, "cascade_deployed = {}", p.deployed());
    let _ = writeln!(s, "simple_deployed = {}", o.simple.deployed());
    cost_lines(&mut s, "cascade", &o.cascade_cost);
    cost_lines(&mut s, "simple", &o.simple_cost);
    for w in &o.warnings {
        let _ = writeln!(s, "warning = {w:?}");
    }
    write_text(&dir.join("summary.txt"), &s)
}

/// Per-event directories under `events/`, a per-event cost table, skipped
/// events, and aggregate totals.
pub fn write_simulation_reports(dir: &Path, r: &SimulationReport) -> Result<()> {
    let mut costs = Vec::new();
    for o in &r.events {
        write_event_reports(&dir.join("events").join(o.date.to_string()), o)?;
        for (name, c) in [("cascade", &o.cascade_cost), ("simple", &o.simple_cost)] {
            costs.push(vec![
                o.date.to_string(),
                o.event_index.to_string(),
                name.to_string(),
                c.orders.to_string(),
                c.gas.to_string(),
                c.slippage.to_string(),
                c.total().to_string(),
            ]);
        }
    }
    write_csv(&dir.join("costs.csv"), &COST_HEADER, &costs)?;
    let skipped: Vec<Vec<String>> =
        r.skipped.iter().map(|(d, why)| vec![d.to_string(), why.clone()]).collect();
    write_csv(&dir.join("skipped.csv"), &["date", "reason"], &skipped)?;
    let mut s = String::new();
    let _ = writeln!(s, "events = {}", r.events.len());
    let _ = writeln!(s, "skipped = {}", r.skipped.len());
    cost_lines(&mut s, "cascade", &r.cascade_total);
    cost_lines(&mut s, "simple", &r.simple_total);
    let _ = writeln!(s, "final_invested = {}", r.final_portfolio.invested());
    let _ = writeln!(s, "final_cash = {}", r.final_portfolio.cash);
    write_text(&dir.join("summary.txt"), &s)
}

#[derive(Deserialize)]
struct FlowRecord {
    date: NaiveDate,
    flow_usd: Usd,
}

/// Reads `date,flow_usd`, sorted by date.
pub fn load_flow_schedule(path: impl AsRef<Path>) -> Result<Vec<(NaiveDate, Usd)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        let rec: FlowRecord = rec.map_err(|e| Error::csv(path, e))?;
        out.push((rec.date, rec.flow_usd));
    }
    out.sort_by_key(|r| r.0);
    if out.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "duplicate date in flow schedule".into(),
        });
    }
    Ok(out)
}
