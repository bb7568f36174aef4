//! Composite Simpson quadrature on uniformly sampled data.

use std::ops::{Add, Mul, Sub};

pub trait Sample: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Sample for T where T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// `∫` over the whole sample range. Odd interval counts close with the
/// three-point end-interval rule; a single interval falls back to the
/// trapezoid rule.
pub fn simpson<T: Sample>(values: &[T], dt: f64) -> T {
    cumulative_simpson(values, dt)
        .last()
        .copied()
        .unwrap_or_default()
}

/// Running integral `I_k = ∫_{t_0}^{t_k}` at every sample.
///
/// Even `k` use composite Simpson; odd `k` add one end interval from the
/// three-point rule `h/12 (−f₋₁ + 8f₀ + 5f₁)`, so every entry carries
/// `O(h⁴)` error for smooth integrands.
pub fn cumulative_simpson<T: Sample>(values: &[T], dt: f64) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::default(); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = (values[0] + values[1]) * (0.5 * dt);
        return out;
    }
    let third = dt / 3.0;
    let twelfth = dt / 12.0;
    // Even nodes.
    let mut k = 2;
    while k < n {
        let panel = (values[k - 2] + values[k - 1] * 4.0 + values[k]) * third;
        out[k] = out[k - 2] + panel;
        k += 2;
    }
    // Odd nodes.
    let mut k = 1;
    while k < n {
        out[k] = if k + 1 < n {
            // First interval of the panel starting at k−1.
            out[k - 1] + (values[k - 1] * 5.0 + values[k] * 8.0 - values[k + 1]) * twelfth
        } else {
            out[k - 1] + (values[k] * 5.0 + values[k - 1] * 8.0 - values[k - 2]) * twelfth
        };
        k += 2;
    }
    out
}
