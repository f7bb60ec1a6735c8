//! Scenario configuration (strict JSON) and its translation into physics
//! objects.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::XGrid;
use crate::materials::{omega_from_wavelength, DispersiveMaterial, MaterialDef, MaterialRegistry};
use crate::sample::{BulkElement, Gap, Interface, LayerStack};
use crate::spectra::{ChirpedPulsePair, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cpi,
    Wli,
    Qoct,
    CwSwept,
    Spectrogram,
    Sweep,
}

/// How the CPI product kernel is built from the two pulse bandwidths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBandwidth {
    /// Both factors use the mean of the two bandwidths.
    #[default]
    Mean,
    /// Each factor uses its own pulse's bandwidth.
    PerPulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthConfig {
    pub chirped: f64,
    pub antichirped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub lambda_c_nm: f64,
    pub bandwidth_nm: BandwidthConfig,
    pub stretched_ps: f64,
    #[serde(default = "default_tl_fs")]
    pub tl_fs: f64,
    /// Relative input delay; ignored when `lambda0_nm` is set.
    #[serde(default)]
    pub tau_rel_fs: f64,
    /// Operating wavelength; the relative delay is derived from it.
    #[serde(default)]
    pub lambda0_nm: Option<f64>,
    #[serde(default)]
    pub kernel: KernelBandwidth,
    #[serde(default)]
    pub grid: GridSpec,
}

fn default_tl_fs() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    pub r_real: f64,
    #[serde(default)]
    pub r_imag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    pub d_um: f64,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkConfig {
    pub material: String,
    pub length_mm: f64,
    #[serde(default = "default_passes")]
    pub passes: u32,
}

fn default_passes() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub interfaces: Vec<InterfaceConfig>,
    #[serde(default)]
    pub gaps: Vec<GapConfig>,
    #[serde(default)]
    pub bulk: Option<BulkConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XGridConfig {
    pub start_um: f64,
    pub stop_um: f64,
    pub step_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WliConfig {
    /// Source bandwidth; defaults to the chirped pulse's.
    #[serde(default)]
    pub bandwidth_nm: Option<f64>,
    /// Delay step; must resolve the carrier.
    #[serde(default = "default_wli_step")]
    pub step_um: f64,
}

fn default_wli_step() -> f64 {
    0.05
}

impl Default for WliConfig {
    fn default() -> Self {
        Self {
            bandwidth_nm: None,
            step_um: default_wli_step(),
        }
    }
}

/// Gaussian two-photon (Q-OCT) or CW-swept spectrum `Λ(Ω)` with the given
/// FWHM in wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GivenSpectrumConfig {
    pub bandwidth_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda0_list_nm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrogramConfig {
    /// SFG wavelength axis, centred on the SFG of the operating wavelength.
    pub lambda_half_span_nm: f64,
    pub lambda_step_nm: f64,
    #[serde(default = "default_time_samples")]
    pub time_samples: usize,
    #[serde(default = "default_window_factor")]
    pub window_factor: f64,
}

fn default_time_samples() -> usize {
    1 << 16
}

fn default_window_factor() -> f64 {
    8.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// SFG centre wavelength; defaults to half the operating wavelength.
    #[serde(default)]
    pub center_nm: Option<f64>,
    #[serde(default = "default_filter_fwhm")]
    pub fwhm_nm: f64,
}

fn default_filter_fwhm() -> f64 {
    crate::engine::DEFAULT_FILTER_FWHM_NM
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            center_nm: None,
            fwhm_nm: default_filter_fwhm(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File-name stem; defaults to the scenario id.
    #[serde(default)]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub materials: Vec<MaterialDef>,
    pub source: SourceConfig,
    pub sample: SampleConfig,
    pub modes: Vec<Mode>,
    pub x_grid: XGridConfig,
    #[serde(default)]
    pub wli: Option<WliConfig>,
    #[serde(default)]
    pub qoct: Option<GivenSpectrumConfig>,
    #[serde(default)]
    pub cw_swept: Option<GivenSpectrumConfig>,
    /// Extra operating wavelengths used to classify `simulate` features.
    #[serde(default)]
    pub classify: Option<SweepConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub spectrogram: Option<SpectrogramConfig>,
    #[serde(default)]
    pub filter: Option<FilterConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be a positive number, got {v}")))
    }
}

fn wavelengths(path: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::config(path, "must list at least one wavelength"));
    }
    for (i, &l) in list.iter().enumerate() {
        positive(&format!("{path}[{i}]"), l)?;
    }
    Ok(())
}

impl ScenarioConfig {
    /// Parses strict JSON; unknown keys and type errors name their path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".into() } else { path }, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::config("id", "must not be empty"));
        }
        let s = &self.source;
        positive("source.lambda_c_nm", s.lambda_c_nm)?;
        positive("source.bandwidth_nm.chirped", s.bandwidth_nm.chirped)?;
        positive("source.bandwidth_nm.antichirped", s.bandwidth_nm.antichirped)?;
        positive("source.stretched_ps", s.stretched_ps)?;
        positive("source.tl_fs", s.tl_fs)?;
        if !s.tau_rel_fs.is_finite() {
            return Err(Error::config("source.tau_rel_fs", "must be finite"));
        }
        if let Some(l) = s.lambda0_nm {
            positive("source.lambda0_nm", l)?;
        }
        if s.grid.points < 3 {
            return Err(Error::config("source.grid.points", "need at least 3 points"));
        }
        positive("source.grid.halfwidth_factor", s.grid.halfwidth_factor)?;

        let n_if = self.sample.interfaces.len();
        if n_if == 0 {
            return Err(Error::config("sample.interfaces", "need at least one interface"));
        }
        if self.sample.gaps.len() + 1 != n_if {
            return Err(Error::config(
                "sample.gaps",
                format!("{n_if} interfaces need {} gaps, got {}", n_if - 1, self.sample.gaps.len()),
            ));
        }
        for (i, r) in self.sample.interfaces.iter().enumerate() {
            if !(r.r_real.is_finite() && r.r_imag.is_finite() && r.r_real.hypot(r.r_imag) <= 1.0) {
                return Err(Error::config(format!("sample.interfaces[{i}]"), "|r| must be <= 1"));
            }
        }
        for (i, g) in self.sample.gaps.iter().enumerate() {
            if !(g.d_um.is_finite() && g.d_um >= 0.0) {
                return Err(Error::config(format!("sample.gaps[{i}].d_um"), "must be finite and >= 0"));
            }
        }
        if let Some(b) = &self.sample.bulk {
            if !(b.length_mm.is_finite() && b.length_mm >= 0.0) {
                return Err(Error::config("sample.bulk.length_mm", "must be finite and >= 0"));
            }
            if b.passes == 0 {
                return Err(Error::config("sample.bulk.passes", "must be >= 1"));
            }
        }

        if self.modes.is_empty() {
            return Err(Error::config("modes", "must name at least one mode"));
        }
        let unique: BTreeSet<_> = self.modes.iter().collect();
        if unique.len() != self.modes.len() {
            return Err(Error::config("modes", "modes must not repeat"));
        }
        let g = &self.x_grid;
        positive("x_grid.step_um", g.step_um)?;
        if !(g.start_um.is_finite() && g.stop_um.is_finite() && g.stop_um >= g.start_um) {
            return Err(Error::config("x_grid", "need finite start_um <= stop_um"));
        }
        if let Some(w) = &self.wli {
            positive("wli.step_um", w.step_um)?;
            if let Some(b) = w.bandwidth_nm {
                positive("wli.bandwidth_nm", b)?;
            }
        }
        if self.modes.contains(&Mode::Qoct) && self.qoct.is_none() {
            return Err(Error::config("qoct", "required by mode `qoct`"));
        }
        if let Some(q) = &self.qoct {
            positive("qoct.bandwidth_nm", q.bandwidth_nm)?;
        }
        if self.modes.contains(&Mode::CwSwept) && self.cw_swept.is_none() {
            return Err(Error::config("cw_swept", "required by mode `cw_swept`"));
        }
        if let Some(q) = &self.cw_swept {
            positive("cw_swept.bandwidth_nm", q.bandwidth_nm)?;
        }
        if self.modes.contains(&Mode::Sweep) && self.sweep.is_none() {
            return Err(Error::config("sweep", "required by mode `sweep`"));
        }
        if let Some(sw) = &self.sweep {
            wavelengths("sweep.lambda0_list_nm", &sw.lambda0_list_nm)?;
        }
        if let Some(c) = &self.classify {
            wavelengths("classify.lambda0_list_nm", &c.lambda0_list_nm)?;
        }
        if self.modes.contains(&Mode::Spectrogram) && self.spectrogram.is_none() {
            return Err(Error::config("spectrogram", "required by mode `spectrogram`"));
        }
        if let Some(sp) = &self.spectrogram {
            positive("spectrogram.lambda_half_span_nm", sp.lambda_half_span_nm)?;
            positive("spectrogram.lambda_step_nm", sp.lambda_step_nm)?;
            positive("spectrogram.window_factor", sp.window_factor)?;
            if sp.time_samples < 16 {
                return Err(Error::config("spectrogram.time_samples", "need at least 16 samples"));
            }
        }
        if let Some(f) = &self.filter {
            positive("filter.fwhm_nm", f.fwhm_nm)?;
            if let Some(c) = f.center_nm {
                positive("filter.center_nm", c)?;
            }
        }
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(Error::config("output.stem", "must be a plain file-name stem"));
            }
        }
        let registry = self.registry()?;
        for (i, g) in self.sample.gaps.iter().enumerate() {
            if registry.get(&g.material).is_err() {
                return Err(Error::config(
                    format!("sample.gaps[{i}].material"),
                    format!("unknown material `{}`", g.material),
                ));
            }
        }
        if let Some(b) = &self.sample.bulk {
            if registry.get(&b.material).is_err() {
                return Err(Error::config("sample.bulk.material", format!("unknown material `{}`", b.material)));
            }
        }
        Ok(())
    }

    /// Built-in materials plus the ones defined in the config.
    pub fn registry(&self) -> Result<MaterialRegistry> {
        let mut reg = MaterialRegistry::builtin();
        for (i, def) in self.materials.iter().enumerate() {
            let path = format!("materials[{i}]");
            if reg.get(&def.name).is_ok() {
                return Err(Error::config(path, format!("material `{}` is already defined", def.name)));
            }
            let m = DispersiveMaterial::try_from(def.clone()).map_err(|e| Error::config(&path, e.to_string()))?;
            reg.insert(m);
        }
        Ok(reg)
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(&self.id)
    }

    /// Same scenario at another operating wavelength.
    pub fn with_lambda0(&self, lambda0_nm: f64) -> Self {
        let mut c = self.clone();
        c.source.lambda0_nm = Some(lambda0_nm);
        c
    }

    pub fn pair(&self) -> Result<ChirpedPulsePair> {
        let s = &self.source;
        let pair = ChirpedPulsePair::from_stretched(
            s.lambda_c_nm * 1e-9,
            s.bandwidth_nm.chirped * 1e-9,
            s.bandwidth_nm.antichirped * 1e-9,
            s.stretched_ps * 1e-12,
            s.tl_fs * 1e-15,
            s.tau_rel_fs * 1e-15,
        )?;
        match s.lambda0_nm {
            Some(l) => {
                let tau = pair.tau_rel_for(omega_from_wavelength(l * 1e-9))?;
                Ok(pair.with_tau_rel(tau))
            }
            None => Ok(pair),
        }
    }

    /// Operating angular frequency.
    pub fn omega0(&self) -> Result<f64> {
        self.pair()?.operating_frequency()
    }

    pub fn stack(&self) -> Result<LayerStack> {
        let reg = self.registry()?;
        let interfaces = self
            .sample
            .interfaces
            .iter()
            .map(|r| Interface::new(num_complex::Complex64::new(r.r_real, r.r_imag)))
            .collect::<Result<Vec<_>>>()?;
        let gaps = self
            .sample
            .gaps
            .iter()
            .map(|g| {
                Ok(Gap {
                    thickness_m: g.d_um * 1e-6,
                    material: reg.get(&g.material)?.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let stack = LayerStack::new(interfaces, gaps)?;
        Ok(match &self.sample.bulk {
            Some(b) => stack.with_bulk(BulkElement::new(
                reg.get(&b.material)?.clone(),
                b.length_mm * 1e-3,
                b.passes,
            )?),
            None => stack,
        })
    }

    pub fn x_grid(&self) -> Result<XGrid> {
        XGrid::new(self.x_grid.start_um, self.x_grid.stop_um, self.x_grid.step_um)
            .map_err(|e| Error::config("x_grid", e.to_string()))
    }

    /// SHA-256 over the physics-relevant fields (everything except `id`,
    /// `description` and `output`), as canonical JSON with sorted keys.
    pub fn scenario_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("id");
            obj.remove("description");
            obj.remove("output");
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
