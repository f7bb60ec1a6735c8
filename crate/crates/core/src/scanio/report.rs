//! JSON reports.

use serde::{Deserialize, Serialize};

use crate::analysis::{Classification, Feature, LineAnalysis, Polarity, SweepResult};
use crate::engine::{Interferogram, ScanKind};
use crate::materials::wavelength_from_omega;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecord {
    pub center_um: f64,
    pub fwhm_um: f64,
    /// Signed: negative for dips.
    pub visibility: f64,
    pub visibility_abs: f64,
    pub polarity: Polarity,
    pub classification: Classification,
}

impl From<&Feature> for FeatureRecord {
    fn from(f: &Feature) -> Self {
        Self {
            center_um: f.center_um,
            fwhm_um: f.fwhm_um,
            visibility: f.visibility,
            visibility_abs: f.visibility.abs(),
            polarity: f.polarity,
            classification: f.classification,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureReport {
    pub kind: ScanKind,
    /// Operating wavelength in nm (0 when unknown).
    pub omega0_nm: f64,
    pub features: Vec<FeatureRecord>,
}

impl FeatureReport {
    pub fn new(scan: &Interferogram, features: &[Feature]) -> Self {
        Self {
            kind: scan.kind,
            omega0_nm: if scan.omega0 > 0.0 {
                wavelength_from_omega(scan.omega0) * 1e9
            } else {
                0.0
            },
            features: features.iter().map(FeatureRecord::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub lambda0_nm: f64,
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub scenario: String,
    pub scenario_hash: String,
    /// Position of the tracked artifact.
    pub artifact_center_um: f64,
    pub points: Vec<SweepPoint>,
    pub fitted_period_nm: f64,
    pub fitted_phase_rad: f64,
    pub fitted_amplitude: f64,
    pub lambda_ref_nm: f64,
    pub period_ci_nm: f64,
    pub predicted_period_nm: f64,
    pub predicted_flip_nm: f64,
}

impl SweepReport {
    pub fn new(
        scenario: &str,
        hash: &str,
        artifact_center_um: f64,
        fit: &SweepResult,
        predicted: crate::analysis::FlipPrediction,
    ) -> Self {
        Self {
            scenario: scenario.to_string(),
            scenario_hash: hash.to_string(),
            artifact_center_um,
            points: fit
                .points
                .iter()
                .map(|&(l, v)| SweepPoint {
                    lambda0_nm: l,
                    visibility: v,
                })
                .collect(),
            fitted_period_nm: fit.period_nm,
            fitted_phase_rad: fit.phase,
            fitted_amplitude: fit.amplitude,
            lambda_ref_nm: fit.lambda_ref_nm,
            period_ci_nm: fit.period_ci_nm,
            predicted_period_nm: predicted.period_nm,
            predicted_flip_nm: predicted.flip_nm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub intercept_nm: f64,
    pub slope_nm_per_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingRecord {
    pub x_um: f64,
    pub lambda_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesReport {
    pub lines: Vec<LineRecord>,
    pub crossings: Vec<CrossingRecord>,
    pub same_lambda: Vec<[usize; 2]>,
    pub same_x: Vec<[usize; 2]>,
}

impl LinesReport {
    /// Delays are reported relative to `x_offset_um`.
    pub fn new(a: &LineAnalysis, x_offset_um: f64) -> Self {
        Self {
            lines: a
                .lines
                .iter()
                .map(|l| LineRecord {
                    intercept_nm: l.at(x_offset_um),
                    slope_nm_per_um: l.slope_nm_per_um,
                })
                .collect(),
            crossings: a
                .crossings
                .iter()
                .map(|c| CrossingRecord {
                    x_um: c.x_um - x_offset_um,
                    lambda_nm: c.lambda_nm,
                })
                .collect(),
            same_lambda: a.same_lambda.iter().map(|&(i, j)| [i, j]).collect(),
            same_x: a.same_x.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_report_schema() {
        let scan = Interferogram {
            kind: ScanKind::Cpi,
            x_um: vec![0.0, 1.0],
            signal: vec![1.0, 1.0],
            omega0: crate::materials::omega_from_wavelength(790.8e-9),
            scenario_id: None,
        };
        let f = Feature {
            center_um: 1.5,
            fwhm_um: 18.6,
            extremum: 0.5,
            polarity: Polarity::Dip,
            visibility: -0.5,
            classification: Classification::Real,
        };
        let json = to_json(&FeatureReport::new(&scan, &[f]));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["kind"], "CPI");
        assert!((v["omega0_nm"].as_f64().unwrap() - 790.8).abs() < 1e-9);
        let feat = &v["features"][0];
        for key in ["center_um", "fwhm_um", "visibility", "visibility_abs", "polarity", "classification"] {
            assert!(feat.get(key).is_some(), "{key}");
        }
        assert_eq!(feat["polarity"], "dip");
        assert_eq!(feat["classification"], "real");
        assert_eq!(feat["visibility_abs"], 0.5);
        let back: FeatureReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.features.len(), 1);
    }
}
