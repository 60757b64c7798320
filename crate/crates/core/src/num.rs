//! Scalar abstraction shared by the numeric kernels (EM word alignment and
//! the random forest). Everything else in the crate works in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A floating point scalar usable by the statistical models.
///
/// `Display` must print the shortest representation that parses back to the
/// same value, which holds for the primitive float types.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Display + Debug + FromStr + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("finite f64 converts to any float")
    }

    /// Lossy conversion from a count.
    fn of_usize(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("count converts to float")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute tolerance used when checking that probability rows sum to one.
    fn normalization_tolerance() -> Self;
}

impl Real for f32 {
    fn normalization_tolerance() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn normalization_tolerance() -> Self {
        1e-9
    }
}

/// Rounds to the 6 fractional digits used for scores in corpus files.
pub fn quantize_score(score: f64) -> f64 {
    (score * 1e6).round() / 1e6
}

/// Rounds to 2 decimals, the precision of report percentages.
pub fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantized_scores_survive_text_round_trip() {
        for raw in [0.0, 1.0, 0.1234565, 0.333333333, 0.999_999_7, 1e-7] {
            let q = quantize_score(raw);
            let text = format!("{q:.6}");
            assert_eq!(text.parse::<f64>().unwrap(), q, "{raw}");
        }
    }

    #[test]
    fn conversions() {
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
        assert_eq!(<f64 as Real>::of_usize(7), 7.0);
        assert_eq!(Real::as_f64(0.25f32), 0.25);
    }
}
