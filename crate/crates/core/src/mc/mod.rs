//! Monte Carlo estimation of the two-point ratio statistics.

pub mod estimate;
pub mod logdet;
pub mod logmean;
pub mod point;

pub use estimate::{estimate_ratios, estimate_with_profile, RatioEstimate, RatioPair};
pub use logdet::{log_abs_det2, log_abs_det2_in_place};
pub use logmean::{log_mean_exp, LogMeanAccumulator};
pub use point::{spectral_point, SpectralPoint};
