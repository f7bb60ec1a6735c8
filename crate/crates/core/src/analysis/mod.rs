//! Feature extraction from scans and spectrograms: dip/peak detection,
//! signed visibility, thickness, artifact classification across operating
//! wavelengths, visibility-oscillation fitting and spectrogram lines.

mod classify;
mod features;
mod fit;
mod lines;

pub use classify::{
    classify_features, ClassificationResult, ClassificationStatus, FeatureCluster, MIN_SCANS, SIGN_THRESHOLD,
};
pub use features::{
    detect_features, dip_separation, predict_artifact_flip, shoulder_level, thickness_from_dips, visibility,
    Classification, DetectOptions, Feature, FlipPrediction, Polarity,
};
pub use fit::{fit_visibility_oscillation, SweepResult};
pub use lines::{spectrogram_lines, Crossing, LineAnalysis, SpectrogramLine};
