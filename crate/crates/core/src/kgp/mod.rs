//! Key generation simulators: finite-size decoy-state estimates for
//! TP-TF, BB84 and SNS, their projection onto key groups, and signature
//! rates.

pub mod bb84;
pub mod estimates;
pub mod numerics;
pub mod params;
pub mod rate;
pub mod sns;
pub mod tptf;

pub use bb84::bb84_simulate;
pub use estimates::{group_level_bounds, GroupBounds, KgpEstimates, KgpProtocol, SingleBitKey};
pub use numerics::{gamma_u, Chernoff};
pub use params::{parse_config, Bb84SourceParams, ChannelParams, SimConfig, SnsSourceParams, TptfSourceParams};
pub use rate::{
    figure_preset, fig6_ratio, optimized_otuh_rate, optimized_rate, otuh_key_length, rate_from_estimates,
    simulate, sweep, Curve, RatePoint, RateScheme, SearchSettings,
};
pub use sns::{sns_random_pairing, sns_simulate};
pub use tptf::tptf_simulate;
