use serde::{Deserialize, Serialize};

use crate::engine::{Interferogram, ScanKind};
use crate::error::{Error, Result};
use crate::materials::{DispersiveMaterial, SPEED_OF_LIGHT};
use crate::numeric::{analytic_signal, interp_linear, median, parabolic_offset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Dip,
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Real,
    Artifact,
    Unknown,
}

/// A dip or peak in a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub center_um: f64,
    pub fwhm_um: f64,
    /// Signal (or envelope, for WLI) at the centre.
    pub extremum: f64,
    pub polarity: Polarity,
    /// Signed visibility `(I_C − I_S)/I_S`; negative for dips.
    pub visibility: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    /// Minimum |excursion| from the baseline.
    pub prominence: f64,
    /// Allowed deviation of the median baseline from 1.
    pub baseline_tolerance: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            prominence: 0.02,
            baseline_tolerance: 0.1,
        }
    }
}

/// Shoulder half-width in units of a feature's FWHM.
const SHOULDER_FWHM: f64 = 3.0;
const MIN_SHOULDER_SAMPLES: usize = 5;

fn check_scan(scan: &Interferogram) -> Result<()> {
    if scan.x_um.len() != scan.signal.len() {
        return Err(Error::contract("scan x and signal lengths differ"));
    }
    if scan.len() < 5 {
        return Err(Error::contract("scan needs at least 5 samples"));
    }
    if scan.signal.iter().chain(&scan.x_um).any(|v| !v.is_finite()) {
        return Err(Error::contract("scan contains non-finite samples"));
    }
    if scan.x_um.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::contract("scan delay axis must be strictly increasing"));
    }
    Ok(())
}

/// Curve the features are located on: the signal itself, or for WLI the
/// fringe envelope `b + |analytic(s − b)|`.
fn working_curve(scan: &Interferogram, baseline: f64) -> Vec<f64> {
    match scan.kind {
        ScanKind::Wli => {
            let ac: Vec<f64> = scan.signal.iter().map(|s| s - baseline).collect();
            analytic_signal(&ac)
                .iter()
                .map(|z| baseline + z.norm())
                .collect()
        }
        _ => scan.signal.clone(),
    }
}

/// Linear-interpolated position where `y − level` changes sign walking from
/// `from` in direction `dir`.
fn half_crossing(x: &[f64], y: &[f64], from: usize, dir: isize, level: f64, sign: f64) -> Option<f64> {
    let mut i = from as isize;
    loop {
        let j = i + dir;
        if j < 0 || j >= y.len() as isize {
            return None;
        }
        let (iu, ju) = (i as usize, j as usize);
        let a = sign * (y[iu] - level);
        let b = sign * (y[ju] - level);
        if b <= 0.0 {
            let t = a / (a - b);
            return Some(x[iu] + t * (x[ju] - x[iu]));
        }
        i = j;
    }
}

/// Finds dips and peaks whose excursion from the median baseline exceeds
/// the prominence. Features touching the scan edge are skipped. The result is
/// sorted by centre; every feature is `Unknown` and carries its visibility.
pub fn detect_features(scan: &Interferogram, opts: &DetectOptions) -> Result<Vec<Feature>> {
    check_scan(scan)?;
    let baseline = median(&scan.signal).expect("finite, non-empty");
    if (baseline - 1.0).abs() > opts.baseline_tolerance {
        return Err(Error::contract(format!(
            "scan baseline {baseline:.4} is not normalized to 1 (tolerance {})",
            opts.baseline_tolerance
        )));
    }
    let x = &scan.x_um;
    let y = working_curve(scan, baseline);
    let n = y.len();

    let mut found: Vec<(Feature, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        let dev = y[i] - baseline;
        if dev.abs() < opts.prominence {
            i += 1;
            continue;
        }
        let sign = dev.signum();
        let start = i;
        while i < n && sign * (y[i] - baseline) >= opts.prominence {
            i += 1;
        }
        let end = i;
        let m = (start..end)
            .max_by(|&a, &b| (sign * y[a]).partial_cmp(&(sign * y[b])).unwrap())
            .unwrap();
        let level = baseline + 0.5 * (y[m] - baseline);
        let (Some(left), Some(right)) = (
            half_crossing(x, &y, m, -1, level, sign),
            half_crossing(x, &y, m, 1, level, sign),
        ) else {
            continue;
        };
        if m == 0 || m == n - 1 {
            continue;
        }
        let delta = parabolic_offset(y[m - 1], y[m], y[m + 1]);
        let step = if delta >= 0.0 { x[m + 1] - x[m] } else { x[m] - x[m - 1] };
        let center = x[m] + delta * step;
        let extremum = y[m] - 0.25 * (y[m - 1] - y[m + 1]) * delta;
        found.push((
            Feature {
                center_um: center,
                fwhm_um: right - left,
                extremum,
                polarity: if sign < 0.0 { Polarity::Dip } else { Polarity::Peak },
                visibility: 0.0,
                classification: Classification::Unknown,
            },
            (y[m] - baseline).abs(),
        ));
    }

    // Noise can split one feature into several runs; keep the strongest.
    found.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut features: Vec<Feature> = Vec::new();
    for (f, _) in found {
        let dup = features.iter().any(|g| {
            g.polarity == f.polarity && (g.center_um - f.center_um).abs() < 0.5 * g.fwhm_um.max(f.fwhm_um)
        });
        if !dup {
            features.push(f);
        }
    }
    features.sort_by(|a, b| a.center_um.partial_cmp(&b.center_um).unwrap());

    let snapshot = features.clone();
    for f in &mut features {
        f.visibility = match shoulder_level(scan, &snapshot) {
            Ok(s) => (f.extremum - s) / s,
            Err(_) => (f.extremum - baseline) / baseline,
        };
    }
    Ok(features)
}

/// Median of the samples lying outside ±3 FWHM of every feature.
pub fn shoulder_level(scan: &Interferogram, features: &[Feature]) -> Result<f64> {
    let outside: Vec<f64> = scan
        .x_um
        .iter()
        .zip(&scan.signal)
        .filter(|(x, _)| {
            features
                .iter()
                .all(|f| (*x - f.center_um).abs() > SHOULDER_FWHM * f.fwhm_um)
        })
        .map(|(_, s)| *s)
        .collect();
    if outside.len() < MIN_SHOULDER_SAMPLES {
        return Err(Error::contract(format!(
            "only {} shoulder samples outside ±{SHOULDER_FWHM} FWHM of the features",
            outside.len()
        )));
    }
    let level = median(&outside).expect("finite");
    if !(level > 0.0) {
        return Err(Error::contract("shoulder level is not positive"));
    }
    Ok(level)
}

/// Signed visibility `(I_C − I_S)/I_S` of `feature`, with `I_C` the scan value
/// at its centre and `I_S` the shoulder median excluding `others` (which
/// should include the feature itself).
pub fn visibility(scan: &Interferogram, feature: &Feature, others: &[Feature]) -> Result<f64> {
    check_scan(scan)?;
    let ic = interp_linear(&scan.x_um, &scan.signal, feature.center_um);
    let mut excluded = others.to_vec();
    if !excluded.iter().any(|f| f.center_um == feature.center_um) {
        excluded.push(feature.clone());
    }
    let is = shoulder_level(scan, &excluded)?;
    Ok((ic - is) / is)
}

/// Separation (µm) of the outermost dips not marked as artifacts.
pub fn dip_separation(features: &[Feature]) -> Result<f64> {
    let dips: Vec<f64> = features
        .iter()
        .filter(|f| f.polarity == Polarity::Dip && f.classification != Classification::Artifact)
        .map(|f| f.center_um)
        .collect();
    if dips.len() < 2 {
        return Err(Error::contract("need at least two dips to measure a separation"));
    }
    let first = dips.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = dips.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(last - first)
}

/// Geometric thickness (µm) from a dip separation: `d = Δx / n_g(λ0)`.
pub fn thickness_from_dips(delta_x_um: f64, material: &DispersiveMaterial, lambda0_m: f64) -> Result<f64> {
    if !(delta_x_um > 0.0) {
        return Err(Error::contract("dip separation must be positive"));
    }
    Ok(delta_x_um / material.group_index(lambda0_m)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipPrediction {
    /// Detuning that flips the artifact sign, nm.
    pub flip_nm: f64,
    /// Full oscillation period of the artifact visibility against λ0, nm.
    pub period_nm: f64,
}

/// Artifact sign oscillation for a gap of thickness `d_m` and inverse group
/// velocity `alpha` (s/m): the artifact goes as `cos 2k(ω0)d`, so the sign
/// flips after `Δλ = π²c/(ω0²·α·d)`.
pub fn predict_artifact_flip(omega0: f64, alpha: f64, d_m: f64) -> Result<FlipPrediction> {
    if !(omega0 > 0.0 && alpha > 0.0 && d_m > 0.0) {
        return Err(Error::contract("ω0, α and d must all be positive"));
    }
    let flip = std::f64::consts::PI.powi(2) * SPEED_OF_LIGHT / (omega0 * omega0 * alpha * d_m);
    Ok(FlipPrediction {
        flip_nm: flip * 1e9,
        period_nm: 2.0 * flip * 1e9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(kind: ScanKind, f: impl Fn(f64) -> f64) -> Interferogram {
        let x: Vec<f64> = (0..=400).map(|i| i as f64).collect();
        Interferogram {
            kind,
            signal: x.iter().map(|&v| f(v)).collect(),
            x_um: x,
            omega0: 2.38e15,
            scenario_id: None,
        }
    }

    fn gauss(x: f64, c: f64, w: f64) -> f64 {
        (-4.0 * std::f64::consts::LN_2 * (x - c).powi(2) / (w * w)).exp()
    }

    #[test]
    fn finds_dips_and_peak_with_widths() {
        let s = scan(ScanKind::Cpi, |x| {
            1.0 - 0.8 * gauss(x, 50.3, 12.0) + 0.1 * gauss(x, 200.0, 10.0) - 0.5 * gauss(x, 320.0, 14.0)
        });
        let f = detect_features(&s, &DetectOptions::default()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f[0].polarity, Polarity::Dip);
        assert_eq!(f[1].polarity, Polarity::Peak);
        assert!((f[0].center_um - 50.3).abs() < 0.05);
        assert!((f[0].fwhm_um - 12.0).abs() < 0.1);
        assert!((f[2].fwhm_um - 14.0).abs() < 0.1);
        assert!((f[0].visibility + 0.8).abs() < 0.01);
        assert!((f[1].visibility - 0.1).abs() < 0.01);
        assert!(f.iter().all(|g| g.classification == Classification::Unknown));
    }

    #[test]
    fn flat_scan_has_no_features() {
        let s = scan(ScanKind::Cpi, |_| 1.0);
        assert!(detect_features(&s, &DetectOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn edge_features_are_skipped() {
        let s = scan(ScanKind::Cpi, |x| 1.0 - 0.8 * gauss(x, 0.0, 20.0));
        assert!(detect_features(&s, &DetectOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn unnormalized_baseline_is_rejected() {
        let s = scan(ScanKind::Cpi, |_| 1.5);
        assert!(detect_features(&s, &DetectOptions::default()).is_err());
    }

    #[test]
    fn wli_features_use_the_envelope() {
        let s = scan(ScanKind::Wli, |x| {
            1.0 + 0.6 * gauss(x, 200.0, 30.0) * (2.0 * std::f64::consts::PI * x / 3.0).cos()
        });
        let f = detect_features(&s, &DetectOptions::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0].center_um - 200.0).abs() < 0.5);
        assert!((f[0].fwhm_um - 30.0).abs() < 0.5);
    }

    #[test]
    fn visibility_uses_shoulders() {
        let s = scan(ScanKind::Cpi, |x| 1.0 - 0.4 * gauss(x, 200.0, 10.0));
        let f = detect_features(&s, &DetectOptions::default()).unwrap();
        let v = visibility(&s, &f[0], &f).unwrap();
        assert!((v + 0.4).abs() < 1e-3);
        let wide = Feature {
            fwhm_um: 1000.0,
            ..f[0].clone()
        };
        assert!(visibility(&s, &wide, &[]).is_err());
    }

    #[test]
    fn thickness_from_outer_dips() {
        let mk = |c: f64| Feature {
            center_um: c,
            fwhm_um: 10.0,
            extremum: 0.0,
            polarity: Polarity::Dip,
            visibility: -1.0,
            classification: Classification::Unknown,
        };
        let dx = dip_separation(&[mk(0.0), mk(143.0), mk(286.1)]).unwrap();
        assert!((dx - 286.1).abs() < 1e-12);
        assert!(dip_separation(&[mk(0.0)]).is_err());
        let glass = DispersiveMaterial::constant("g", 1.53482).unwrap();
        let d = thickness_from_dips(dx, &glass, 790.8e-9).unwrap();
        assert!((d - 186.41).abs() < 0.01);
        let vac = DispersiveMaterial::vacuum();
        assert_eq!(thickness_from_dips(dx, &vac, 790.8e-9).unwrap(), dx);
        assert!(thickness_from_dips(dx, &DispersiveMaterial::bk7(), 5e-6).is_err());
    }

    #[test]
    fn flip_period_for_constant_glass() {
        let w0 = crate::materials::omega_from_wavelength(791.5e-9);
        let alpha = 1.53482 / SPEED_OF_LIGHT;
        let p = predict_artifact_flip(w0, alpha, 186.4e-6).unwrap();
        // λ0²/(2 n d)
        let expect = 791.5 * 791.5 / (2.0 * 1.53482 * 186.4e3);
        assert!((p.period_nm / expect - 1.0).abs() < 1e-12);
        assert!((p.period_nm - 1.095).abs() < 0.005);
        assert!((p.flip_nm - 0.5 * p.period_nm).abs() < 1e-12);
        let q = predict_artifact_flip(w0, alpha, 2.0 * 186.4e-6).unwrap();
        assert!((q.period_nm / p.period_nm - 0.5).abs() < 1e-12);
        assert!(predict_artifact_flip(w0, alpha, 0.0).is_err());
    }
}
