use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use waterfall_rebalancer::harness::{
    load_config, load_flow_schedule, rebalance_once, simulate, weights_at, write_event_reports,
    write_simulation_reports, write_weight_report, Market, Portfolio,
};
use waterfall_rebalancer::{Result, Usd};

#[derive(Parser)]
#[command(version, about = "Cascading waterfall rebalancer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan and apply a single rebalancing event.
    Rebalance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
        /// Net flow in USD; negative for a withdrawal.
        #[arg(long, allow_hyphen_values = true)]
        flow: Usd,
    },
    /// Replay a flow schedule over a date range.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: NaiveDate,
        #[arg(long)]
        to: NaiveDate,
        /// CSV with `date,flow_usd`.
        #[arg(long)]
        flows: PathBuf,
    },
    /// Compute the weight table for every held asset.
    Weights {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rebalance { config, date, flow } => {
            let cfg = load_config(&config)?;
            let market = Market::load(&cfg)?;
            let (outcome, after) = rebalance_once(&cfg, &market, date, flow)?;
            write_event_reports(&cfg.output_dir, &outcome)?;
            for w in &outcome.warnings {
                log::warn!("{w}");
            }
            println!(
                "{} orders, deployed {}, cascade cost {}, simple cost {}, invested {}, cash {}",
                outcome.plan.schedule.len(),
                outcome.plan.deployed(),
                outcome.cascade_cost.total(),
                outcome.simple_cost.total(),
                after.invested(),
                after.cash,
            );
        }
        Command::Simulate {
            config,
            from,
            to,
            flows,
        } => {
            let cfg = load_config(&config)?;
            let market = Market::load(&cfg)?;
            let flows = load_flow_schedule(&flows)?;
            let portfolio = Portfolio::load(&cfg.holdings, &market, from)?;
            let report = simulate(&cfg, &market, portfolio, from, to, &flows)?;
            write_simulation_reports(&cfg.output_dir, &report)?;
            println!(
                "{} events ({} skipped); cascade {} orders / {}; simple {} orders / {}",
                report.events.len(),
                report.skipped.len(),
                report.cascade_total.orders,
                report.cascade_total.total(),
                report.simple_total.orders,
                report.simple_total.total(),
            );
        }
        Command::Weights { config, date } => {
            let cfg = load_config(&config)?;
            let market = Market::load(&cfg)?;
            let portfolio = Portfolio::load(&cfg.holdings, &market, date)?;
            let assets: Vec<String> = portfolio
                .positions
                .iter()
                .map(|p| p.asset_id.clone())
                .filter(|a| !cfg.full_exit.contains(a))
                .collect();
            let table = weights_at(&cfg, &market, &assets, date)?;
            let path = cfg.output_dir.join("weights.csv");
            write_weight_report(&path, Some(&table))?;
            for w in &table.warnings {
                log::warn!("{w}");
            }
            println!("{:<12} {:>10} {:>10} {:>10}", "asset", "min", "ideal", "max");
            for b in &table.bounds {
                println!(
                    "{:<12} {:>10.6} {:>10.6} {:>10.6}",
                    b.asset_id, b.min_w, b.ideal_w, b.max_w
                );
            }
            println!("written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
