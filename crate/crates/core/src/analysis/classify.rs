//! Real-versus-artifact classification from scans at several operating
//! wavelengths: real interfaces stay dips, artifacts change sign.

use crate::engine::Interferogram;
use crate::error::Result;
use crate::numeric::{interp_linear, median};

use super::features::{detect_features, shoulder_level, Classification, DetectOptions, Feature, Polarity};

/// Visibility beyond which a sign counts.
pub const SIGN_THRESHOLD: f64 = 0.01;
/// Scans needed before anything is labelled.
pub const MIN_SCANS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationStatus {
    Ok,
    /// Fewer than three scans; everything left as unknown.
    InsufficientScans,
}

/// A feature tracked across scans.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCluster {
    pub center_um: f64,
    pub fwhm_um: f64,
    /// (λ0 in nm, signed visibility at the cluster centre), one per scan.
    pub visibilities: Vec<(f64, f64)>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub clusters: Vec<FeatureCluster>,
    pub status: ClassificationStatus,
}

impl ClassificationResult {
    pub fn artifacts(&self) -> impl Iterator<Item = &FeatureCluster> {
        self.clusters
            .iter()
            .filter(|c| c.classification == Classification::Artifact)
    }

    pub fn real(&self) -> impl Iterator<Item = &FeatureCluster> {
        self.clusters
            .iter()
            .filter(|c| c.classification == Classification::Real)
    }

    /// One classified feature per cluster; visibility and polarity are taken
    /// from the first scan.
    pub fn features(&self) -> Vec<Feature> {
        self.clusters
            .iter()
            .map(|c| {
                let v = c.visibilities.first().map_or(0.0, |p| p.1);
                Feature {
                    center_um: c.center_um,
                    fwhm_um: c.fwhm_um,
                    extremum: 1.0 + v,
                    polarity: if v < 0.0 { Polarity::Dip } else { Polarity::Peak },
                    visibility: v,
                    classification: c.classification,
                }
            })
            .collect()
    }
}

struct Acc {
    centers: Vec<f64>,
    widths: Vec<f64>,
}

impl Acc {
    fn center(&self) -> f64 {
        self.centers.iter().sum::<f64>() / self.centers.len() as f64
    }
    fn fwhm(&self) -> f64 {
        self.widths.iter().sum::<f64>() / self.widths.len() as f64
    }
}

fn label(vis: &[(f64, f64)]) -> Classification {
    let vis: Vec<f64> = vis.iter().map(|p| p.1).collect();
    let pos = vis.iter().any(|&v| v > SIGN_THRESHOLD);
    let neg = vis.iter().any(|&v| v < -SIGN_THRESHOLD);
    if pos && neg {
        Classification::Artifact
    } else if neg && vis.iter().all(|&v| v < -SIGN_THRESHOLD) {
        Classification::Real
    } else {
        Classification::Unknown
    }
}

/// Groups the features of all scans by position (nearest centre within one
/// FWHM), measures each group's signed visibility in every scan and labels
/// it: both signs present → artifact, consistently negative → real.
/// `scans` pairs each scan with its operating wavelength in nm.
pub fn classify_features(scans: &[(f64, Interferogram)], opts: &DetectOptions) -> Result<ClassificationResult> {
    let mut accs: Vec<Acc> = Vec::new();
    for (_, scan) in scans {
        for f in detect_features(scan, opts)? {
            let nearest = accs
                .iter_mut()
                .map(|a| {
                    let d = (a.center() - f.center_um).abs();
                    let reach = a.fwhm().max(f.fwhm_um);
                    (d, reach, a)
                })
                .filter(|(d, reach, _)| d <= reach)
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            match nearest {
                Some((_, _, a)) => {
                    a.centers.push(f.center_um);
                    a.widths.push(f.fwhm_um);
                }
                None => accs.push(Acc {
                    centers: vec![f.center_um],
                    widths: vec![f.fwhm_um],
                }),
            }
        }
    }
    accs.sort_by(|a, b| a.center().partial_cmp(&b.center()).unwrap());

    let probes: Vec<Feature> = accs
        .iter()
        .map(|a| Feature {
            center_um: a.center(),
            fwhm_um: a.fwhm(),
            extremum: 0.0,
            polarity: Polarity::Dip,
            visibility: 0.0,
            classification: Classification::Unknown,
        })
        .collect();

    let mut clusters: Vec<FeatureCluster> = probes
        .iter()
        .map(|p| FeatureCluster {
            center_um: p.center_um,
            fwhm_um: p.fwhm_um,
            visibilities: Vec::with_capacity(scans.len()),
            classification: Classification::Unknown,
        })
        .collect();
    for (lambda0, scan) in scans {
        let shoulder = shoulder_level(scan, &probes)
            .or_else(|_| median(&scan.signal).ok_or_else(|| crate::Error::contract("empty scan")))?;
        for c in clusters.iter_mut() {
            let ic = interp_linear(&scan.x_um, &scan.signal, c.center_um);
            c.visibilities.push((*lambda0, (ic - shoulder) / shoulder));
        }
    }

    let status = if scans.len() < MIN_SCANS {
        ClassificationStatus::InsufficientScans
    } else {
        for c in clusters.iter_mut() {
            c.classification = label(&c.visibilities);
        }
        ClassificationStatus::Ok
    };
    Ok(ClassificationResult { clusters, status })
}
