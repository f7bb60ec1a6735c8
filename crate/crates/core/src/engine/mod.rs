//! Interferogram synthesis: CPI, white-light and Q-OCT scans from an
//! effective spectrum and a sampled transfer function, plus time-domain
//! sum-frequency spectrograms and their narrowband integration.
//!
//! Delay convention: the scan coordinate `x` (µm) is the path delay, i.e.
//! the reference-mirror displacement, so the time delay between the arms is
//! `Δτ = 2x/c`. A surface at optical depth `n_g·d` then appears at
//! `x = n_g·d` in every scan type.

mod interferogram;
mod spectrogram;

use serde::{Deserialize, Serialize};

pub use interferogram::{cpi_interferogram, qoct_interferogram, wli_interferogram};
pub use spectrogram::{integrate_filtered, sfg_spectrogram, Spectrogram, SpectrogramSettings, DEFAULT_FILTER_FWHM_NM};

use crate::materials::wavelength_from_omega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanKind {
    #[serde(rename = "CPI")]
    Cpi,
    #[serde(rename = "WLI")]
    Wli,
    #[serde(rename = "QOCT")]
    Qoct,
}

impl ScanKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanKind::Cpi => "CPI",
            ScanKind::Wli => "WLI",
            ScanKind::Qoct => "QOCT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CPI" => Some(ScanKind::Cpi),
            "WLI" => Some(ScanKind::Wli),
            "QOCT" | "Q-OCT" => Some(ScanKind::Qoct),
            _ => None,
        }
    }
}

impl std::fmt::Display for ScanKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scan: normalized detector signal (baseline 1) against path delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub kind: ScanKind,
    pub x_um: Vec<f64>,
    pub signal: Vec<f64>,
    /// Operating angular frequency, rad/s.
    pub omega0: f64,
    pub scenario_id: Option<String>,
}

impl Interferogram {
    pub fn len(&self) -> usize {
        self.x_um.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_um.is_empty()
    }

    /// Operating wavelength in nm.
    pub fn lambda0_nm(&self) -> f64 {
        wavelength_from_omega(self.omega0) * 1e9
    }

    /// Sample spacing if the delay axis is uniform (1e-6 relative).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.x_um.len() < 2 {
            return None;
        }
        let n = self.x_um.len();
        let step = (self.x_um[n - 1] - self.x_um[0]) / (n - 1) as f64;
        let ok = self
            .x_um
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-6 * step.abs());
        (ok && step > 0.0).then_some(step)
    }

    /// Shifts the delay axis by `offset_um`.
    pub fn shifted(mut self, offset_um: f64) -> Self {
        self.x_um.iter_mut().for_each(|x| *x += offset_um);
        self
    }
}
