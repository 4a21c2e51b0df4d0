//! Scalar fields over the particle domain: the density `N(x)` and the
//! impedance profile `h(x)`.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::em::Point;

/// Values a [`Profile`] can take (`f64` for `N`, `Complex64` for `h`).
pub trait ProfileValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}

impl<T: Copy + Add<Output = T> + Mul<f64, Output = T>> ProfileValue for T {}

/// Analytic scalar field.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile<T> {
    Constant {
        value: T,
    },
    /// `value + gradient · (x - origin)`.
    Linear {
        value: T,
        gradient: [T; 3],
        #[serde(default)]
        origin: [f64; 3],
    },
    /// `base + amplitude · exp(-Σ (xᵢ - cᵢ)² / (2 wᵢ²))`; a zero width
    /// makes the profile constant along that axis.
    Gaussian {
        base: T,
        amplitude: T,
        center: [f64; 3],
        widths: [f64; 3],
    },
    #[serde(skip)]
    Custom(Arc<dyn Fn(&Point) -> T + Send + Sync>),
}

impl<T: ProfileValue> Profile<T> {
    pub fn constant(value: T) -> Self {
        Profile::Constant { value }
    }

    pub fn custom(f: impl Fn(&Point) -> T + Send + Sync + 'static) -> Self {
        Profile::Custom(Arc::new(f))
    }

    pub fn at(&self, x: &Point) -> T {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { value, gradient, origin } => {
                (0..3).fold(*value, |acc, i| acc + gradient[i] * (x[i] - origin[i]))
            }
            Profile::Gaussian { base, amplitude, center, widths } => {
                let e: f64 = (0..3)
                    .filter(|&i| widths[i] != 0.0)
                    .map(|i| (x[i] - center[i]).powi(2) / (2.0 * widths[i] * widths[i]))
                    .sum();
                *base + *amplitude * (-e).exp()
            }
            Profile::Custom(f) => f(x),
        }
    }

    /// True for the constant variant.
    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant { .. })
    }
}

impl<T: fmt::Debug> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            Profile::Linear { value, gradient, origin } => f
                .debug_struct("Linear")
                .field("value", value)
                .field("gradient", gradient)
                .field("origin", origin)
                .finish(),
            Profile::Gaussian { base, amplitude, center, widths } => f
                .debug_struct("Gaussian")
                .field("base", base)
                .field("amplitude", amplitude)
                .field("center", center)
                .field("widths", widths)
                .finish(),
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn evaluates_variants() {
        let x = Point::new(1.0, 2.0, 3.0);
        assert_eq!(Profile::constant(2.5).at(&x), 2.5);
        let lin = Profile::Linear { value: 1.0, gradient: [1.0, 0.0, -1.0], origin: [0.0; 3] };
        assert_eq!(lin.at(&x), 1.0 + 1.0 - 3.0);
        let g = Profile::Gaussian {
            base: Complex64::new(0.0, 1.0),
            amplitude: Complex64::new(2.0, 0.0),
            center: [1.0, 0.0, 0.0],
            widths: [0.0, 0.0, 1.0],
        };
        let v = g.at(&x);
        assert!((v - Complex64::new(2.0 * (-4.5f64).exp(), 1.0)).norm() < 1e-15);
        let c = Profile::custom(|p: &Point| p.norm());
        assert_eq!(c.at(&Point::new(3.0, 4.0, 0.0)), 5.0);
    }
}
