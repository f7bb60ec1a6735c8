//! Source spectra, the chirped-pulse pair, operating-frequency tuning and the
//! effective spectrum Λ(Ω) that weights the interference integrals.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OmegaGrid;
use crate::materials::{omega_from_wavelength, SPEED_OF_LIGHT};

/// FWHM in angular frequency of a band `dlambda` wide at `lambda_c`:
/// Δω = 2πc·Δλ/λc².
pub fn fwhm_omega(lambda_c_m: f64, dlambda_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * dlambda_m / (lambda_c_m * lambda_c_m)
}

/// Point count and half-width (as a multiple of the widest FWHM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub halfwidth_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 8193,
            halfwidth_factor: 5.0,
        }
    }
}

impl GridSpec {
    /// Builds the grid for a spectrum of the given FWHM (rad/s).
    pub fn grid_for(&self, fwhm: f64) -> Result<OmegaGrid> {
        if self.halfwidth_factor < 2.0 {
            return Err(Error::contract(format!(
                "spectral grid half-width {}×FWHM is below 2×FWHM (aliasing risk)",
                self.halfwidth_factor
            )));
        }
        OmegaGrid::with_half_width(self.points, self.halfwidth_factor * fwhm)
    }
}

/// Intensity spectrum I(Ω) on a symmetric offset grid about `omega0`,
/// peak-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpectrum {
    pub omega0: f64,
    pub grid: OmegaGrid,
    pub intensity: Vec<f64>,
}

impl SourceSpectrum {
    pub fn new(omega0: f64, grid: OmegaGrid, intensity: Vec<f64>) -> Result<Self> {
        if intensity.len() != grid.len() {
            return Err(Error::contract("spectrum length does not match its grid"));
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::contract("spectrum samples must be finite and >= 0"));
        }
        let peak = intensity.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::contract("spectrum is identically zero"));
        }
        let intensity = intensity.into_iter().map(|v| v / peak).collect();
        Ok(Self {
            omega0,
            grid,
            intensity,
        })
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.grid.values()
    }
}

fn gaussian_samples(grid: &OmegaGrid, detuning: f64, fwhm: f64) -> Vec<f64> {
    let a = 4.0 * LN_2 / (fwhm * fwhm);
    (0..grid.len())
        .map(|j| {
            let w = grid.value(j) + detuning;
            (-a * w * w).exp()
        })
        .collect()
}

/// Gaussian spectrum centred on the laser line: I(Ω) = exp(−4 ln2 Ω²/Δω²).
pub fn gaussian_spectrum(lambda_c_m: f64, dlambda_m: f64, spec: &GridSpec) -> Result<SourceSpectrum> {
    if !(dlambda_m > 0.0 && lambda_c_m > 0.0) {
        return Err(Error::contract("Gaussian spectrum needs positive centre and bandwidth"));
    }
    let fwhm = fwhm_omega(lambda_c_m, dlambda_m);
    let grid = spec.grid_for(fwhm)?;
    let omega0 = omega_from_wavelength(lambda_c_m);
    SourceSpectrum::new(omega0, grid, gaussian_samples(&grid, 0.0, fwhm))
}

/// The same laser spectrum sampled about a different reference ω0 (an
/// operating frequency detuned from the laser centre).
pub fn gaussian_spectrum_about(
    lambda_c_m: f64,
    dlambda_m: f64,
    omega0: f64,
    grid: &OmegaGrid,
) -> Result<SourceSpectrum> {
    if !(dlambda_m > 0.0 && lambda_c_m > 0.0) {
        return Err(Error::contract("Gaussian spectrum needs positive centre and bandwidth"));
    }
    let fwhm = fwhm_omega(lambda_c_m, dlambda_m);
    let detuning = omega0 - omega_from_wavelength(lambda_c_m);
    SourceSpectrum::new(omega0, *grid, gaussian_samples(grid, detuning, fwhm))
}

/// Oppositely chirped pulse pair. The chirped pulse sweeps up at rate `+beta`,
/// the antichirped one down at `-beta`; the antichirped pulse is delayed by
/// `tau_rel` at the input beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpedPulsePair {
    pub lambda_c_m: f64,
    pub dlambda_chirped_m: f64,
    pub dlambda_antichirped_m: f64,
    /// Chirp-rate magnitude, rad/s².
    pub beta: f64,
    pub tau_rel_s: f64,
    pub tl_duration_s: f64,
}

impl ChirpedPulsePair {
    /// Chirp rate from the chirped pulse's bandwidth and stretched duration
    /// (β = Δω / T).
    pub fn from_stretched(
        lambda_c_m: f64,
        dlambda_chirped_m: f64,
        dlambda_antichirped_m: f64,
        stretched_s: f64,
        tl_duration_s: f64,
        tau_rel_s: f64,
    ) -> Result<Self> {
        if !(stretched_s > 0.0) {
            return Err(Error::contract("stretched duration must be positive"));
        }
        let beta = fwhm_omega(lambda_c_m, dlambda_chirped_m) / stretched_s;
        Self::new(
            lambda_c_m,
            dlambda_chirped_m,
            dlambda_antichirped_m,
            beta,
            tau_rel_s,
            tl_duration_s,
        )
    }

    pub fn new(
        lambda_c_m: f64,
        dlambda_chirped_m: f64,
        dlambda_antichirped_m: f64,
        beta: f64,
        tau_rel_s: f64,
        tl_duration_s: f64,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::contract(format!("chirp rate must be positive, got {beta}")));
        }
        if !(dlambda_chirped_m > 0.0 && dlambda_antichirped_m > 0.0 && lambda_c_m > 0.0) {
            return Err(Error::contract("pulse bandwidths and centre wavelength must be positive"));
        }
        if !(tl_duration_s > 0.0 && tau_rel_s.is_finite()) {
            return Err(Error::contract("transform-limited duration must be positive"));
        }
        Ok(Self {
            lambda_c_m,
            dlambda_chirped_m,
            dlambda_antichirped_m,
            beta,
            tau_rel_s,
            tl_duration_s,
        })
    }

    /// Laser parameters of the reference experiment: 790 nm, 11 nm / 10 nm,
    /// chirped pulse stretched from 100 fs to 54 ps.
    pub fn reference() -> Self {
        Self::from_stretched(790e-9, 11e-9, 10e-9, 54e-12, 100e-15, 0.0).expect("valid defaults")
    }

    pub fn center_omega(&self) -> f64 {
        omega_from_wavelength(self.lambda_c_m)
    }

    pub fn fwhm_chirped(&self) -> f64 {
        fwhm_omega(self.lambda_c_m, self.dlambda_chirped_m)
    }

    pub fn fwhm_antichirped(&self) -> f64 {
        fwhm_omega(self.lambda_c_m, self.dlambda_antichirped_m)
    }

    /// Stretched (intensity FWHM) durations T = Δω/β of the two pulses.
    pub fn stretched_durations(&self) -> (f64, f64) {
        (self.fwhm_chirped() / self.beta, self.fwhm_antichirped() / self.beta)
    }

    fn max_detuning(&self) -> f64 {
        0.25 * (self.fwhm_chirped() + self.fwhm_antichirped())
    }

    /// ω0 = 2πc/λc + β·τ_rel/2.
    pub fn operating_frequency(&self) -> Result<f64> {
        let shift = self.beta * self.tau_rel_s;
        if shift.abs() >= 2.0 * self.max_detuning() {
            return Err(Error::contract(format!(
                "relative delay {:.3e} s detunes the pair by {shift:.3e} rad/s, beyond the \
                 half summed bandwidth {:.3e} rad/s; the pulses no longer overlap",
                self.tau_rel_s,
                2.0 * self.max_detuning()
            )));
        }
        Ok(self.center_omega() + 0.5 * shift)
    }

    /// Relative delay that sets the operating frequency to `omega0`.
    pub fn tau_rel_for(&self, omega0: f64) -> Result<f64> {
        let tau = 2.0 * (omega0 - self.center_omega()) / self.beta;
        self.with_tau_rel(tau).operating_frequency()?;
        Ok(tau)
    }

    pub fn with_tau_rel(&self, tau_rel_s: f64) -> Self {
        Self { tau_rel_s, ..*self }
    }

    /// Chirped and antichirped spectra about the current operating frequency.
    pub fn spectra(&self, spec: &GridSpec) -> Result<(SourceSpectrum, SourceSpectrum)> {
        let omega0 = self.operating_frequency()?;
        let widest = self.fwhm_chirped().max(self.fwhm_antichirped());
        let grid = spec.grid_for(widest)?;
        Ok((
            gaussian_spectrum_about(self.lambda_c_m, self.dlambda_chirped_m, omega0, &grid)?,
            gaussian_spectrum_about(self.lambda_c_m, self.dlambda_antichirped_m, omega0, &grid)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    CpiProduct,
    QoctGiven,
    CwSwept,
}

/// Kernel Λ(Ω) of the interference integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSpectrum {
    pub mode: SpectrumMode,
    pub omega0: f64,
    pub grid: OmegaGrid,
    pub values: Vec<f64>,
}

impl EffectiveSpectrum {
    /// Λ(Ω) = I_c(Ω)·I_a(−Ω), symmetrized to its even part so that the
    /// result is exactly even on the grid.
    pub fn cpi_product(chirped: &SourceSpectrum, antichirped: &SourceSpectrum) -> Result<Self> {
        if chirped.grid != antichirped.grid || chirped.omega0 != antichirped.omega0 {
            return Err(Error::contract(
                "chirped and antichirped spectra must share ω0 and the offset grid",
            ));
        }
        let g = chirped.grid;
        let raw: Vec<f64> = (0..g.len())
            .map(|j| chirped.intensity[j] * antichirped.intensity[g.mirror(j)])
            .collect();
        let values = (0..g.len())
            .map(|j| 0.5 * (raw[j] + raw[g.mirror(j)]))
            .collect();
        Ok(Self {
            mode: SpectrumMode::CpiProduct,
            omega0: chirped.omega0,
            grid: g,
            values,
        })
    }

    /// Entangled-photon spectrum supplied directly (Q-OCT).
    pub fn qoct_given(omega0: f64, grid: OmegaGrid, values: Vec<f64>) -> Result<Self> {
        Self::given(SpectrumMode::QoctGiven, omega0, grid, values)
    }

    /// Anticorrelated CW sweep with distribution G(Ω)δ(Ω+Ω'): Λ = G.
    pub fn cw_swept(omega0: f64, grid: OmegaGrid, g: Vec<f64>) -> Result<Self> {
        Self::given(SpectrumMode::CwSwept, omega0, grid, g)
    }

    fn given(mode: SpectrumMode, omega0: f64, grid: OmegaGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::contract("effective spectrum length does not match its grid"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::contract("effective spectrum samples must be finite and >= 0"));
        }
        Ok(Self {
            mode,
            omega0,
            grid,
            values,
        })
    }

    /// Marginal spectrum a WLI measurement would see for the CW-swept or
    /// Q-OCT source (G itself).
    pub fn marginal(&self) -> Result<SourceSpectrum> {
        SourceSpectrum::new(self.omega0, self.grid, self.values.clone())
    }
}
