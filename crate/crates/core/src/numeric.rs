//! Small numeric helpers shared across modules.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Median of a slice (mean of the two central values for even lengths).
/// Returns `None` for an empty slice or one containing NaN.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(samples: &[f64], step: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            step * (inner + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

/// Trapezoid rule on arbitrary (sorted) abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Linear interpolation of `y(x)` at `at`; `x` must be sorted ascending.
/// Values outside the range are clamped to the end samples.
pub fn interp_linear(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|&v| v <= at).saturating_sub(1).min(n - 2);
    let t = (at - x[i]) / (x[i + 1] - x[i]);
    y[i] + t * (y[i + 1] - y[i])
}

/// Offset (in units of the sample spacing, within [-0.5, 0.5]) of the vertex
/// of the parabola through three equally spaced samples.
pub fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom == 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// Full width at half maximum of a single-peaked, nonnegative sampled curve.
///
/// Half-maximum crossings are located by linear interpolation on either side
/// of the global maximum. Returns `None` if either crossing is missing.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    let half = 0.5 * ymax;
    let left = (0..imax).rev().find(|&i| y[i] < half).map(|i| {
        let t = (half - y[i]) / (y[i + 1] - y[i]);
        x[i] + t * (x[i + 1] - x[i])
    })?;
    let right = (imax + 1..y.len()).find(|&i| y[i] < half).map(|i| {
        let t = (y[i - 1] - half) / (y[i - 1] - y[i]);
        x[i - 1] + t * (x[i] - x[i - 1])
    })?;
    Some(right - left)
}

/// Analytic signal of a real sequence: one-sided spectrum (negative
/// frequencies zeroed, positive doubled), inverse transformed.
pub fn analytic_signal(signal: &[f64]) -> Vec<Complex64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = signal.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *v *= gain;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}
