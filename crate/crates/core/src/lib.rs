pub mod error;
pub mod market_data;
pub mod money;
pub mod sizing;
pub mod synth;
pub mod baseline;
pub mod cascade;
pub mod harness;
pub mod weights;

pub use error::{Error, Result};
pub use money::Usd;
