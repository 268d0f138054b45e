//! Frame-level cost functions between two equal-dimension vectors.
//!
//! All three accumulate in `f64` with a single left-to-right summation, and
//! each is exactly symmetric in its arguments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this norm a vector is treated as having no direction.
pub const ZERO_NORM_EPS: f64 = 1e-12;

/// Which local cost the alignment uses. Spelled `mae`, `mse` or `cd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Mae,
    Mse,
    Cd,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::Cd, DistanceKind::Mae, DistanceKind::Mse];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Mae => "mae",
            DistanceKind::Mse => "mse",
            DistanceKind::Cd => "cd",
        }
    }

    /// Checked evaluation on arbitrary input.
    pub fn eval<T: Copy + Into<f64>>(self, a: &[T], b: &[T]) -> Result<f64> {
        match self {
            DistanceKind::Mae => mae(a, b),
            DistanceKind::Mse => mse(a, b),
            DistanceKind::Cd => cosine_distance(a, b),
        }
    }

    /// Evaluation without dimension/finiteness checks, for inputs that come
    /// from validated feature sequences of equal dim.
    #[inline]
    pub(crate) fn eval_unchecked(self, a: &[f32], b: &[f32]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            DistanceKind::Mae => mae_raw(a, b),
            DistanceKind::Mse => mse_raw(a, b),
            DistanceKind::Cd => cd_raw(a, b),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(DistanceKind::Mae),
            "mse" => Ok(DistanceKind::Mse),
            "cd" | "cosine" => Ok(DistanceKind::Cd),
            other => Err(Error::InvalidArgument(format!(
                "unknown distance {other:?} (expected mae, mse or cd)"
            ))),
        }
    }
}

fn check<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a.iter().chain(b).any(|&v| !v.into().is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

#[inline]
fn mae_raw<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> f64 {
    let mut sum = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        sum += (x.into() - y.into()).abs();
    }
    sum / a.len() as f64
}

#[inline]
fn mse_raw<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> f64 {
    let mut sum = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let d = x.into() - y.into();
        sum += d * d;
    }
    sum / a.len() as f64
}

#[inline]
fn cd_raw<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na.sqrt() < ZERO_NORM_EPS || nb.sqrt() < ZERO_NORM_EPS {
        return 1.0;
    }
    // sqrt(s·s) == s exactly, so identical vectors give exactly 0
    (1.0 - dot / (na * nb).sqrt()).clamp(0.0, 2.0)
}

/// Mean absolute error, `(1/N)·Σ|aᵢ − bᵢ|`.
pub fn mae<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64> {
    check(a, b)?;
    Ok(mae_raw(a, b))
}

/// Mean squared error, `(1/N)·Σ(aᵢ − bᵢ)²`.
pub fn mse<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64> {
    check(a, b)?;
    Ok(mse_raw(a, b))
}

/// `1 − a·b / (‖a‖‖b‖)`, clamped to `[0, 2]`.
///
/// If either vector has norm below [`ZERO_NORM_EPS`] the result is `1.0`.
pub fn cosine_distance<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64> {
    check(a, b)?;
    Ok(cd_raw(a, b))
}
