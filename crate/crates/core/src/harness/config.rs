use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::market_data::StatsConfig;
use crate::sizing::SizingConfig;
use crate::weights::WeightConfig;

pub const DEFAULT_NETWORK: &str = "default";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub name: String,
    /// Minutes between this network's rebalancing slots.
    pub interval_minutes: u64,
    /// The network joins events whose index is a multiple of this.
    #[serde(default = "one")]
    pub modulus: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    /// Flat gas per order in USD; when unset each asset's average gas fee is used.
    pub gas_per_order: Option<f64>,
    /// Slippage of an order is `size^2 / (impact_divisor * pool_depth)`.
    pub impact_divisor: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            gas_per_order: None,
            impact_divisor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Largest fractional shortfall of a sell fill; 0 fills exactly.
    pub fill_noise: f64,
    pub order_delay_secs: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            fill_noise: 0.0,
            order_delay_secs: crate::cascade::DEFAULT_ORDER_DELAY_SECS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct StatsSection {
    window: usize,
    min_history: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        let d = StatsConfig::default();
        StatsSection {
            window: d.window,
            min_history: d.min_history,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct WeightSection {
    theta: f64,
    min_asset_weight: f64,
    max_asset_weight: f64,
    rp_perturbation: f64,
}

impl Default for WeightSection {
    fn default() -> Self {
        let d = WeightConfig::default();
        WeightSection {
            theta: d.theta,
            min_asset_weight: d.min_asset_weight,
            max_asset_weight: d.max_asset_weight,
            rp_perturbation: d.rp_perturbation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    prices: Vec<PathBuf>,
    sizing: PathBuf,
    holdings: PathBuf,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    full_exit: Vec<String>,
    #[serde(default)]
    anchor_date: Option<NaiveDate>,
    #[serde(default)]
    stats: StatsSection,
    #[serde(default)]
    weights: WeightSection,
    #[serde(default)]
    sizing_params: SizingConfig,
    #[serde(default)]
    cost: CostConfig,
    #[serde(default)]
    simulation: SimulationConfig,
    #[serde(default)]
    networks: Vec<NetworkConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Validated run configuration; relative paths are resolved against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub prices: Vec<PathBuf>,
    pub sizing: PathBuf,
    pub holdings: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub full_exit: Vec<String>,
    /// Origin of the event clock; defaults to the first event's date.
    pub anchor_date: Option<NaiveDate>,
    pub stats: StatsConfig,
    pub weights: WeightConfig,
    pub sizing_params: SizingConfig,
    pub cost: CostConfig,
    pub simulation: SimulationConfig,
    pub networks: Vec<NetworkConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let networks = if raw.networks.is_empty() {
            vec![NetworkConfig {
                name: DEFAULT_NETWORK.into(),
                interval_minutes: 1440,
                modulus: 1,
            }]
        } else {
            raw.networks
        };
        let weights = WeightConfig {
            theta: raw.weights.theta,
            min_asset_weight: raw.weights.min_asset_weight,
            max_asset_weight: raw.weights.max_asset_weight,
            rp_perturbation: raw.weights.rp_perturbation,
            ..WeightConfig::default()
        };
        let cfg = RunConfig {
            prices: raw.prices.into_iter().map(resolve).collect(),
            sizing: resolve(raw.sizing),
            holdings: resolve(raw.holdings),
            output_dir: resolve(raw.output_dir),
            seed: raw.seed,
            full_exit: raw.full_exit,
            anchor_date: raw.anchor_date,
            stats: StatsConfig {
                window: raw.stats.window,
                min_history: raw.stats.min_history,
                theta: raw.weights.theta,
            },
            weights,
            sizing_params: raw.sizing_params,
            cost: raw.cost,
            simulation: raw.simulation,
            networks,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.sizing_params.validate()?;
        if self.prices.is_empty() {
            return Err(Error::Config("at least one price file is required".into()));
        }
        if self.stats.window < 2 || self.stats.min_history > self.stats.window {
            return Err(Error::Config(format!(
                "need window >= 2 and min_history <= window, got {} and {}",
                self.stats.window, self.stats.min_history
            )));
        }
        for n in &self.networks {
            if n.interval_minutes == 0 || n.modulus == 0 {
                return Err(Error::Config(format!(
                    "network {}: interval and modulus must be >= 1",
                    n.name
                )));
            }
        }
        let mut names: Vec<&str> = self.networks.iter().map(|n| n.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("network names must be unique".into()));
        }
        if !(self.cost.impact_divisor > 0.0) {
            return Err(Error::Config("cost.impact_divisor must be > 0".into()));
        }
        if self.cost.gas_per_order.is_some_and(|g| !(g >= 0.0)) {
            return Err(Error::Config("cost.gas_per_order must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.simulation.fill_noise) {
            return Err(Error::Config("simulation.fill_noise must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Interval of the fastest network, which drives the event clock.
    pub fn base_interval(&self) -> u64 {
        self.networks.iter().map(|n| n.interval_minutes).min().unwrap_or(1440)
    }

    pub fn network(&self, name: &str) -> Option<&NetworkConfig> {
        self.networks.iter().find(|n| n.name == name)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
prices = ["prices.csv"]
sizing = "sizing.csv"
holdings = "holdings.csv"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(c.prices, vec![PathBuf::from("/data/prices.csv")]);
        assert_eq!(c.weights, WeightConfig::default());
        assert_eq!(c.stats, StatsConfig::default());
        assert_eq!(c.sizing_params, SizingConfig::default());
        assert_eq!(c.networks.len(), 1);
        assert_eq!(c.networks[0].modulus, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let unknown = format!("{MINIMAL}\nbogus = 1\n");
        assert!(matches!(
            RunConfig::from_toml(&unknown, Path::new(".")),
            Err(Error::Config(_))
        ));
        let negative = format!(
            "{MINIMAL}\n[[networks]]\nname = \"eth\"\ninterval_minutes = -5\n"
        );
        assert!(RunConfig::from_toml(&negative, Path::new(".")).is_err());
        let zero_mod =
            format!("{MINIMAL}\n[[networks]]\nname = \"eth\"\ninterval_minutes = 5\nmodulus = 0\n");
        assert!(RunConfig::from_toml(&zero_mod, Path::new(".")).is_err());
    }

    #[test]
    fn reads_networks_and_overrides() {
        let text = format!(
            "{MINIMAL}
[weights]
theta = 0.5
[sizing_params]
min_size_param = 1000
[[networks]]
name = \"bsc\"
interval_minutes = 240
[[networks]]
name = \"eth\"
interval_minutes = 1440
modulus = 6
"
        );
        let c = RunConfig::from_toml(&text, Path::new(".")).unwrap();
        assert_eq!(c.stats.theta, 0.5);
        assert_eq!(c.sizing_params.min_size_param, crate::Usd::from_dollars(1000));
        assert_eq!(c.network("eth").unwrap().modulus, 6);
        assert_eq!(c.base_interval(), 240);
    }
}
