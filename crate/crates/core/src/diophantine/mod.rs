//! Rational points, attached lines, heights, height bands and removal boxes.

mod attach;
mod bands;
mod params;
mod search;

pub use attach::{attach_line, in_attach_box, scaled_norm_key, AttachedPoint, RatLine, RatPoint};
pub use bands::{band_lower_exponent, band_upper_exponent, BandIndex};
pub use params::{alpha0, largest_power_of_two_below, ConstructionParams, Mode, ParamsRecord, DEFAULT_M};
pub use search::{certify_badness, delta_box, enumerate_band, rational_points_near, BadnessCertificate};

/// Step budget for enumerations when the caller does not choose one.
pub const DEFAULT_Q_BUDGET: u64 = 50_000_000;
