use num_complex::Complex64;
use rayon::prelude::*;

use super::{Interferogram, ScanKind};
use crate::error::{Error, Result};
use crate::grid::{OmegaGrid, XGrid};
use crate::materials::{wavelength_from_omega, SPEED_OF_LIGHT};
use crate::sample::TransferFunction;
use crate::spectra::{EffectiveSpectrum, SourceSpectrum, SpectrumMode};

/// Phasors are advanced by recurrence and re-seeded from an exact `sin_cos`
/// every this many nodes.
const RESEED: usize = 64;

/// Σ_j c_j · exp(−i Ω_j θ) over a symmetric grid.
fn fourier_sum(coeffs: &[Complex64], grid: &OmegaGrid, theta: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -grid.step() * theta);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phasor = Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter().enumerate() {
        if j % RESEED == 0 {
            phasor = Complex64::from_polar(1.0, -grid.value(j) * theta);
        } else {
            phasor *= step;
        }
        acc += c * phasor;
    }
    acc
}

fn check_same_grid(omega0: f64, grid: &OmegaGrid, h: &TransferFunction) -> Result<()> {
    if *grid != h.grid || omega0 != h.omega0 {
        return Err(Error::contract(
            "spectrum and transfer function must share ω0 and the offset grid",
        ));
    }
    Ok(())
}

/// Shared kernel of CPI and Q-OCT:
///
/// ```text
/// S(Δτ) ∝ ∫Λ|H(Ω)|² dΩ − Re ∫ Λ H(Ω) H*(−Ω) e^{−2iΩΔτ} dΩ,   Δτ = 2x/c
/// ```
///
/// normalized by the delay-independent term.
fn hom_kernel(lambda: &EffectiveSpectrum, h: &TransferFunction, x: &XGrid) -> Result<Vec<f64>> {
    check_same_grid(lambda.omega0, &lambda.grid, h)?;
    let g = lambda.grid;
    let norm: f64 = (0..g.len())
        .map(|j| g.weight(j) * lambda.values[j] * h.values[j].norm_sqr())
        .sum();
    if !(norm > 0.0) {
        return Err(Error::contract("∫Λ|H|² vanishes; nothing to normalize against"));
    }
    let coeffs: Vec<Complex64> = (0..g.len())
        .map(|j| g.weight(j) * lambda.values[j] * h.values[j] * h.values[g.mirror(j)].conj())
        .collect();
    let signal = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let theta = 4.0 * x.value(i) * 1e-6 / SPEED_OF_LIGHT;
            let cross = fourier_sum(&coeffs, &g, theta).re;
            ((norm - cross) / norm).max(0.0)
        })
        .collect();
    Ok(signal)
}

/// Chirped-pulse interferogram from the effective spectrum Λ.
pub fn cpi_interferogram(
    lambda: &EffectiveSpectrum,
    h: &TransferFunction,
    x: &XGrid,
) -> Result<Interferogram> {
    Ok(Interferogram {
        kind: ScanKind::Cpi,
        x_um: x.values(),
        signal: hom_kernel(lambda, h, x)?,
        omega0: lambda.omega0,
        scenario_id: None,
    })
}

/// Q-OCT interferogram; same kernel as CPI with a supplied entangled-photon
/// spectrum.
pub fn qoct_interferogram(
    lambda: &EffectiveSpectrum,
    h: &TransferFunction,
    x: &XGrid,
) -> Result<Interferogram> {
    if lambda.mode != SpectrumMode::QoctGiven {
        return Err(Error::contract(format!(
            "Q-OCT scan needs a qoct_given spectrum, got {:?}",
            lambda.mode
        )));
    }
    Ok(Interferogram {
        kind: ScanKind::Qoct,
        x_um: x.values(),
        signal: hom_kernel(lambda, h, x)?,
        omega0: lambda.omega0,
        scenario_id: None,
    })
}

/// White-light interferogram with a unit-amplitude reference:
///
/// ```text
/// S(x) ∝ ∫ I(Ω) |e^{i(ω0+Ω)·2x/c} + H(Ω)|² dΩ
/// ```
///
/// normalized by ∫I(1+|H|²). The delay step must resolve the carrier
/// (≤ λ0/8).
pub fn wli_interferogram(
    source: &SourceSpectrum,
    h: &TransferFunction,
    x: &XGrid,
) -> Result<Interferogram> {
    check_same_grid(source.omega0, &source.grid, h)?;
    let lambda0_um = wavelength_from_omega(source.omega0) * 1e6;
    if x.step_um() > lambda0_um / 8.0 {
        return Err(Error::contract(format!(
            "WLI delay step {} µm does not resolve the carrier (needs <= λ0/8 = {:.4} µm)",
            x.step_um(),
            lambda0_um / 8.0
        )));
    }
    let g = source.grid;
    let norm: f64 = (0..g.len())
        .map(|j| g.weight(j) * source.intensity[j] * (1.0 + h.values[j].norm_sqr()))
        .sum();
    let coeffs: Vec<Complex64> = (0..g.len())
        .map(|j| g.weight(j) * source.intensity[j] * h.values[j])
        .collect();
    let signal = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * x.value(i) * 1e-6 / SPEED_OF_LIGHT;
            let carrier = Complex64::from_polar(1.0, -source.omega0 * theta);
            let cross = (carrier * fourier_sum(&coeffs, &g, theta)).re;
            ((norm + 2.0 * cross) / norm).max(0.0)
        })
        .collect();
    Ok(Interferogram {
        kind: ScanKind::Wli,
        x_um: x.values(),
        signal,
        omega0: source.omega0,
        scenario_id: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{omega_from_wavelength, DispersiveMaterial};
    use crate::numeric::fwhm;
    use crate::sample::{transfer_function, LayerStack};
    use crate::spectra::{gaussian_spectrum, GridSpec};
    use std::f64::consts::LN_2;

    fn source() -> SourceSpectrum {
        gaussian_spectrum(790e-9, 11e-9, &GridSpec { points: 4097, halfwidth_factor: 5.0 }).unwrap()
    }

    #[test]
    fn fourier_sum_matches_direct_evaluation() {
        let g = OmegaGrid::new(1001, 3e10).unwrap();
        let c: Vec<Complex64> = (0..g.len())
            .map(|j| Complex64::new((j as f64 * 0.01).sin(), (j as f64 * 0.003).cos()))
            .collect();
        let theta = 1.234e-12;
        let direct: Complex64 = (0..g.len())
            .map(|j| c[j] * Complex64::from_polar(1.0, -g.value(j) * theta))
            .sum();
        let fast = fourier_sum(&c, &g, theta);
        assert!((fast - direct).norm() < 1e-11 * direct.norm().max(1.0));
    }

    #[test]
    fn single_surface_full_dip() {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let h = transfer_function(&LayerStack::mirror(0.2).unwrap(), &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-50.0, 50.0, 0.5).unwrap();
        let scan = cpi_interferogram(&l, &h, &x).unwrap();
        assert!(scan.signal[100] < 1e-12);
        assert!((scan.signal[0] - 1.0).abs() < 1e-9);
        assert!(scan.signal.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn gaussian_dip_matches_closed_form() {
        // Λ = exp(−Ω²/2σ²) gives S = 1 − exp(−2σ²Δτ²), Δτ = 2x/c.
        let s = source();
        let sigma = 2.0e13;
        let g = OmegaGrid::with_half_width(4097, 8.0 * sigma).unwrap();
        let vals_g: Vec<f64> = g
            .values()
            .iter()
            .map(|w| (-w * w / (2.0 * sigma * sigma)).exp())
            .collect();
        let l = EffectiveSpectrum::qoct_given(s.omega0, g, vals_g).unwrap();
        let h = transfer_function(&LayerStack::mirror(0.3).unwrap(), &g, s.omega0).unwrap();
        let x = XGrid::new(-20.0, 20.0, 0.05).unwrap();
        let scan = cpi_interferogram(&l, &h, &x).unwrap();
        for (xi, si) in scan.x_um.iter().zip(&scan.signal) {
            let dt = 2.0 * xi * 1e-6 / SPEED_OF_LIGHT;
            let expect = 1.0 - (-2.0 * sigma * sigma * dt * dt).exp();
            assert!((si - expect).abs() < 1e-9);
        }
        let depth: Vec<f64> = scan.signal.iter().map(|v| 1.0 - v).collect();
        let w = fwhm(&scan.x_um, &depth).unwrap();
        let expect_dt = 2.0 * (LN_2 / 2.0).sqrt() / sigma;
        let expect_x = expect_dt * SPEED_OF_LIGHT / 2.0 * 1e6;
        assert!((w / expect_x - 1.0).abs() < 5e-3);
    }

    #[test]
    fn wli_carrier_period_is_half_wavelength() {
        let s = source();
        let h = transfer_function(&LayerStack::mirror(0.2).unwrap(), &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-3.0, 3.0, 0.01).unwrap();
        let scan = wli_interferogram(&s, &h, &x).unwrap();
        let crossings: Vec<f64> = (1..scan.len())
            .filter(|&i| (scan.signal[i - 1] - 1.0) * (scan.signal[i] - 1.0) < 0.0)
            .map(|i| {
                let (a, b) = (scan.signal[i - 1] - 1.0, scan.signal[i] - 1.0);
                scan.x_um[i - 1] + 0.01 * a / (a - b)
            })
            .collect();
        let n = crossings.len();
        let period = 2.0 * (crossings[n - 1] - crossings[0]) / (n - 1) as f64;
        assert!((period / 0.395 - 1.0).abs() < 2e-3, "{period}");
        let peak = scan
            .signal
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(scan.x_um[peak].abs() < 0.1);
    }

    #[test]
    fn wli_rejects_coarse_step() {
        let s = source();
        let h = transfer_function(&LayerStack::mirror(0.2).unwrap(), &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-3.0, 3.0, 0.5).unwrap();
        assert!(matches!(wli_interferogram(&s, &h, &x), Err(Error::Contract(_))));
    }

    #[test]
    fn qoct_requires_given_mode_and_matches_cpi() {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let h = transfer_function(&LayerStack::mirror(0.2).unwrap(), &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-30.0, 30.0, 1.0).unwrap();
        assert!(qoct_interferogram(&l, &h, &x).is_err());
        let q = EffectiveSpectrum::qoct_given(l.omega0, l.grid, l.values.clone()).unwrap();
        let a = cpi_interferogram(&l, &h, &x).unwrap();
        let b = qoct_interferogram(&q, &h, &x).unwrap();
        assert_eq!(a.signal, b.signal);
        assert_eq!(b.kind, ScanKind::Qoct);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let other = OmegaGrid::new(101, 1e11).unwrap();
        let h = transfer_function(&LayerStack::mirror(0.2).unwrap(), &other, s.omega0).unwrap();
        let x = XGrid::new(0.0, 1.0, 0.5).unwrap();
        assert!(cpi_interferogram(&l, &h, &x).is_err());
    }

    #[test]
    fn coverslip_dips_sit_at_optical_depth() {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let glass = DispersiveMaterial::constant("g", 1.5).unwrap();
        let stack = LayerStack::slab(0.2, 0.2, 100e-6, glass).unwrap();
        let w0 = omega_from_wavelength(790e-9);
        let h = transfer_function(&stack, &s.grid, w0).unwrap();
        let x = XGrid::new(140.0, 160.0, 0.1).unwrap();
        let scan = cpi_interferogram(&l, &h, &x).unwrap();
        let imin = scan
            .signal
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((scan.x_um[imin] - 150.0).abs() <= 0.1);
    }
}
