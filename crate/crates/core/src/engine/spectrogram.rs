//! Sum-frequency spectrogram of an oppositely chirped pulse pair, computed in
//! the time domain.
//!
//! Both pulses enter a beam splitter; the sample arm reflects off the stack,
//! the reference arm is a delayed mirror. The two arms are recombined in a
//! nonlinear crystal and only the cross-arm SFG processes (chirped from one
//! arm with antichirped from the other) are kept:
//!
//! ```text
//! p1(t) = −S_c(t)·R_a(t)/2     p2(t) = S_a(t)·R_c(t)/2
//! ```
//!
//! The reference arm carries a `−` on the antichirped pulse (beam-splitter
//! phase), which makes the signal a dip at balanced delay.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{Interferogram, ScanKind};
use crate::error::{Error, Result};
use crate::grid::XGrid;
use crate::materials::SPEED_OF_LIGHT;
use crate::numeric::trapezoid;
use crate::sample::LayerStack;
use crate::spectra::ChirpedPulsePair;

/// Narrowband filter applied to the SFG light in the reference setup.
pub const DEFAULT_FILTER_FWHM_NM: f64 = 0.46;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrogramSettings {
    /// Samples in the time window.
    pub time_samples: usize,
    /// Window length in units of the longer stretched duration.
    pub window_factor: f64,
}

impl Default for SpectrogramSettings {
    fn default() -> Self {
        Self {
            time_samples: 1 << 16,
            window_factor: 8.0,
        }
    }
}

/// SFG intensity on an (x, λ_SFG) grid, stored row-major by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub x_um: Vec<f64>,
    pub lambda_nm: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Non-interfering part `|P1|² + |P2|²` on the same grid.
    pub background: Option<Vec<f64>>,
    /// Operating (fundamental) angular frequency, rad/s.
    pub omega0: f64,
}

impl Spectrogram {
    pub fn rows(&self) -> usize {
        self.x_um.len()
    }

    pub fn cols(&self) -> usize {
        self.lambda_nm.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.intensity[i * self.cols()..(i + 1) * self.cols()]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.intensity[i * self.cols() + j]
    }
}

fn envelope(t: f64, duration: f64) -> f64 {
    (-2.0 * LN_2 * t * t / (duration * duration)).exp()
}

fn chirped(t: f64, duration: f64, beta: f64) -> Complex64 {
    Complex64::from_polar(envelope(t, duration), 0.5 * beta * t * t)
}

fn antichirped(t: f64, duration: f64, beta: f64) -> Complex64 {
    Complex64::from_polar(envelope(t, duration), -0.5 * beta * t * t)
}

/// Linear-interpolation stencil from the FFT bins onto one output wavelength.
#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
    jacobian: f64,
}

/// Time-domain SFG spectrogram over the delay grid `x` and SFG wavelengths
/// `lambda_nm` (strictly increasing).
pub fn sfg_spectrogram(
    pair: &ChirpedPulsePair,
    stack: &LayerStack,
    x: &XGrid,
    lambda_nm: &[f64],
    settings: &SpectrogramSettings,
) -> Result<Spectrogram> {
    let omega0 = pair.operating_frequency()?;
    let omega_c = pair.center_omega();
    let beta = pair.beta;
    let tau_rel = pair.tau_rel_s;
    let (tc, ta) = pair.stretched_durations();
    let n = settings.time_samples;
    if n < 16 || !(settings.window_factor >= 2.0) {
        return Err(Error::contract("spectrogram window needs >= 16 samples and factor >= 2"));
    }
    let window = settings.window_factor * tc.max(ta);
    let dt = window / n as f64;
    let edge_freq = beta * (0.5 * window + tau_rel.abs());
    if edge_freq * dt > PI || dt > pair.tl_duration_s / 4.0 {
        return Err(Error::contract(format!(
            "time grid undersamples the chirped fields (dt = {dt:.3e} s, {n} samples over \
             {window:.3e} s); increase time_samples"
        )));
    }
    if tau_rel.abs() > window / 4.0 {
        return Err(Error::contract("relative pulse delay exceeds the time window"));
    }
    if lambda_nm.is_empty() || lambda_nm.windows(2).any(|w| !(w[1] > w[0])) || !(lambda_nm[0] > 0.0) {
        return Err(Error::contract("SFG wavelength grid must be positive and strictly increasing"));
    }

    let tau_shift = match stack.bulk() {
        Some(b) => b.group_delay(omega0)?,
        None => 0.0,
    };
    let delays: Vec<f64> = (0..x.len())
        .map(|i| 2.0 * x.value(i) * 1e-6 / SPEED_OF_LIGHT - tau_shift)
        .collect();
    if let Some(d) = delays.iter().find(|d| d.abs() > window / 4.0) {
        return Err(Error::contract(format!(
            "reference delay {d:.3e} s lies outside the usable time window ±{:.3e} s",
            window / 4.0
        )));
    }

    let d_omega = 2.0 * PI / (n as f64 * dt);
    let half = n / 2;
    let times: Vec<f64> = (0..n).map(|k| (k as f64 - half as f64) * dt).collect();
    let bin_omega = |k: usize| -> f64 {
        let kk = if k < half { k as f64 } else { k as f64 - n as f64 };
        kk * d_omega
    };

    let taps = lambda_nm
        .iter()
        .map(|&l| {
            let lam = l * 1e-9;
            let eps = 2.0 * PI * SPEED_OF_LIGHT / lam - 2.0 * omega_c;
            let pos = eps / d_omega;
            if pos.abs() >= (half - 1) as f64 {
                return Err(Error::contract(format!(
                    "SFG wavelength {l} nm lies outside the simulated band"
                )));
            }
            let k0 = pos.floor();
            let lo = (k0 as i64).rem_euclid(n as i64) as usize;
            Ok(Tap {
                lo,
                hi: (lo + 1) % n,
                frac: pos - k0,
                jacobian: 2.0 * PI * SPEED_OF_LIGHT / (lam * lam),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // Beyond four FWHM the Gaussian spectra are below 1e-19 of their peak.
    let band = 4.0 * pair.fwhm_chirped().max(pair.fwhm_antichirped());
    // Sample arm: reflect each pulse off the stack once.
    let sample_arm = |field: &dyn Fn(f64) -> Complex64| -> Result<Vec<Complex64>> {
        let mut buf: Vec<Complex64> = times.iter().map(|&t| field(t)).collect();
        fwd.process(&mut buf);
        let peak = buf.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        for (k, v) in buf.iter_mut().enumerate() {
            if bin_omega(k).abs() > band || v.norm_sqr() < 1e-24 * peak {
                *v = Complex64::new(0.0, 0.0);
                continue;
            }
            let w = omega_c + bin_omega(k);
            let h = stack.response(w)?.conj();
            *v *= h * Complex64::from_polar(1.0 / n as f64, w * tau_shift);
        }
        inv.process(&mut buf);
        Ok(buf)
    };
    let s_c = sample_arm(&|t| chirped(t, tc, beta))?;
    let s_a = sample_arm(&|t| antichirped(t - tau_rel, ta, beta))?;

    let cols = lambda_nm.len();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = delays
        .par_iter()
        .map_init(
            || (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]),
            |(p1, p2), &delay| {
                for k in 0..n {
                    let t = times[k] - delay;
                    let r_c = chirped(t, tc, beta);
                    let r_a = antichirped(t - tau_rel, ta, beta);
                    p1[k] = -0.5 * s_c[k] * r_a;
                    p2[k] = 0.5 * s_a[k] * r_c;
                }
                fwd.process(p1);
                fwd.process(p2);
                let mut total = Vec::with_capacity(cols);
                let mut bg = Vec::with_capacity(cols);
                let scale = dt * dt;
                for tap in &taps {
                    let at = |k: usize| {
                        let a = p1[k];
                        let b = p2[k];
                        ((a + b).norm_sqr(), a.norm_sqr() + b.norm_sqr())
                    };
                    let (t0, b0) = at(tap.lo);
                    let (t1, b1) = at(tap.hi);
                    let w = tap.jacobian * scale;
                    total.push(w * (t0 + tap.frac * (t1 - t0)));
                    bg.push(w * (b0 + tap.frac * (b1 - b0)));
                }
                (total, bg)
            },
        )
        .collect();

    let mut intensity = Vec::with_capacity(rows.len() * cols);
    let mut background = Vec::with_capacity(rows.len() * cols);
    for (t, b) in rows {
        intensity.extend(t);
        background.extend(b);
    }
    Ok(Spectrogram {
        x_um: x.values(),
        lambda_nm: lambda_nm.to_vec(),
        intensity,
        background: Some(background),
        omega0,
    })
}

/// Integrates the spectrogram through a Gaussian bandpass of `fwhm_nm`
/// centred on the SFG of `center_omega` (a fundamental frequency, rad/s),
/// giving a CPI-like scan.
///
/// With a background map the scan is normalized pointwise,
/// `S = 1 − (B − T)/max(B, floor)`, where the floor is 1e-3 of the largest
/// unfiltered background integral; a filter that passes no SFG light thus
/// yields a flat scan. Without one the filtered power is divided by its
/// median.
pub fn integrate_filtered(spec: &Spectrogram, center_omega: f64, fwhm_nm: f64) -> Result<Interferogram> {
    if !(fwhm_nm > 0.0) {
        return Err(Error::contract("filter FWHM must be positive"));
    }
    let center_nm = 2.0 * PI * SPEED_OF_LIGHT / (2.0 * center_omega) * 1e9;
    let (lo, hi) = (spec.lambda_nm[0], spec.lambda_nm[spec.cols() - 1]);
    if center_nm - fwhm_nm < lo || center_nm + fwhm_nm > hi {
        return Err(Error::contract(format!(
            "filter {center_nm:.4} ± {fwhm_nm} nm is not covered by the spectrogram band \
             [{lo:.4}, {hi:.4}] nm"
        )));
    }
    let weight: Vec<f64> = spec
        .lambda_nm
        .iter()
        .map(|l| {
            let u = (l - center_nm) / fwhm_nm;
            (-4.0 * LN_2 * u * u).exp()
        })
        .collect();
    let cols = spec.cols();
    let filtered = |data: &[f64], i: usize| -> f64 {
        let row = &data[i * cols..(i + 1) * cols];
        let y: Vec<f64> = row.iter().zip(&weight).map(|(v, w)| v * w).collect();
        trapezoid(&spec.lambda_nm, &y)
    };
    let totals: Vec<f64> = (0..spec.rows()).map(|i| filtered(&spec.intensity, i)).collect();
    let signal = match &spec.background {
        Some(bg) => {
            let floor = 1e-3
                * (0..spec.rows())
                    .map(|i| trapezoid(&spec.lambda_nm, &bg[i * cols..(i + 1) * cols]))
                    .fold(0.0, f64::max);
            (0..spec.rows())
                .map(|i| {
                    let b = filtered(bg, i);
                    (1.0 - (b - totals[i]) / b.max(floor)).max(0.0)
                })
                .collect()
        }
        None => {
            let m = crate::numeric::median(&totals).unwrap_or(0.0);
            if !(m > 0.0) {
                return Err(Error::contract("filtered spectrogram carries no power"));
            }
            totals.iter().map(|t| t / m).collect()
        }
    };
    Ok(Interferogram {
        kind: ScanKind::Cpi,
        x_um: spec.x_um.clone(),
        signal,
        omega0: center_omega,
        scenario_id: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::DispersiveMaterial;

    fn small_settings() -> SpectrogramSettings {
        SpectrogramSettings {
            time_samples: 1 << 15,
            window_factor: 6.0,
        }
    }

    fn pair() -> ChirpedPulsePair {
        // Shorter stretch keeps the test grid small.
        ChirpedPulsePair::from_stretched(790e-9, 11e-9, 10e-9, 5e-12, 100e-15, 0.0).unwrap()
    }

    fn lambda_axis(center: f64, half: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| center - half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn mirror_gives_single_dip_at_zero_delay() {
        let p = pair();
        let stack = LayerStack::mirror(0.5).unwrap();
        let x = XGrid::new(-60.0, 60.0, 4.0).unwrap();
        let lam = lambda_axis(395.0, 1.5, 301);
        let sp = sfg_spectrogram(&p, &stack, &x, &lam, &small_settings()).unwrap();
        let scan = integrate_filtered(&sp, p.operating_frequency().unwrap(), 0.46).unwrap();
        let imin = scan
            .signal
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(scan.x_um[imin], 0.0);
        assert!(scan.signal[imin] < 0.05, "{}", scan.signal[imin]);
        assert!((scan.signal[0] - 1.0).abs() < 0.05);
    }

    #[test]
    fn off_band_filter_gives_flat_scan() {
        let p = pair();
        let stack = LayerStack::mirror(0.5).unwrap();
        let x = XGrid::new(-20.0, 20.0, 4.0).unwrap();
        let lam = lambda_axis(395.0, 3.0, 301);
        let sp = sfg_spectrogram(&p, &stack, &x, &lam, &small_settings()).unwrap();
        let off = crate::materials::omega_from_wavelength(2.0 * 397.0e-9);
        let scan = integrate_filtered(&sp, off, 0.2).unwrap();
        assert!(scan.signal.iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn undersampled_grid_is_rejected() {
        let p = pair();
        let stack = LayerStack::mirror(0.5).unwrap();
        let x = XGrid::new(0.0, 1.0, 1.0).unwrap();
        let s = SpectrogramSettings {
            time_samples: 1024,
            window_factor: 8.0,
        };
        assert!(matches!(
            sfg_spectrogram(&p, &stack, &x, &[395.0], &s),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn filter_outside_band_is_rejected() {
        let sp = Spectrogram {
            x_um: vec![0.0],
            lambda_nm: vec![394.9, 395.0, 395.1],
            intensity: vec![1.0; 3],
            background: None,
            omega0: 0.0,
        };
        let w = crate::materials::omega_from_wavelength(790e-9);
        assert!(integrate_filtered(&sp, w, 0.46).is_err());
    }

    #[test]
    fn slab_lines_cross_at_expected_wavelength() {
        let p = pair();
        let glass = DispersiveMaterial::constant("g", 1.5).unwrap();
        let stack = LayerStack::slab(0.3, 0.3, 100e-6, glass).unwrap();
        let x = XGrid::new(150.0, 150.0, 1.0).unwrap();
        let lam = lambda_axis(395.0, 0.3, 601);
        let sp = sfg_spectrogram(&p, &stack, &x, &lam, &small_settings()).unwrap();
        // At the second surface the p1/p2 lines of that surface meet at λ0/2.
        let row = sp.background.as_ref().unwrap();
        let imax = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((sp.lambda_nm[imax] - 395.0).abs() < 0.01, "{}", sp.lambda_nm[imax]);
    }
}
