//! Scenario runner: builds scans from a config, analyses them and writes
//! the output files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    classify_features, detect_features, dip_separation, fit_visibility_oscillation, predict_artifact_flip,
    spectrogram_lines, thickness_from_dips, Classification, ClassificationResult, DetectOptions, Feature,
    FlipPrediction, LineAnalysis, SweepResult,
};
use crate::engine::{
    cpi_interferogram, integrate_filtered, qoct_interferogram, sfg_spectrogram, wli_interferogram, Interferogram,
    ScanKind, Spectrogram, SpectrogramSettings,
};
use crate::error::{Error, Result};
use crate::grid::XGrid;
use crate::materials::{omega_from_wavelength, wavelength_from_omega, SPEED_OF_LIGHT};
use crate::sample::{transfer_function, LayerStack};
use crate::spectra::{fwhm_omega, gaussian_spectrum_about, EffectiveSpectrum};

use super::config::{KernelBandwidth, Mode, ScenarioConfig};
use super::report::{to_json, FeatureReport, LinesReport, SweepReport};
use super::scanfile::{write_atomic, write_scan, ScanHeader};
use super::svg;

/// Delay (µm) at which the bulk element puts the sample surface; scans are
/// computed around it and reported relative to it.
pub fn bulk_offset_um(stack: &LayerStack, omega0: f64) -> Result<f64> {
    match stack.bulk() {
        Some(b) => Ok(0.5 * SPEED_OF_LIGHT * b.group_delay(omega0)? * 1e6),
        None => Ok(0.0),
    }
}

fn relative(mut scan: Interferogram, x: &XGrid, cfg: &ScenarioConfig) -> Interferogram {
    scan.x_um = x.values();
    scan.scenario_id = Some(cfg.id.clone());
    scan
}

fn given_spectrum(cfg: &ScenarioConfig, bandwidth_nm: f64) -> Result<(f64, crate::grid::OmegaGrid, Vec<f64>)> {
    let omega0 = cfg.omega0()?;
    let lambda0 = wavelength_from_omega(omega0);
    let grid = cfg.source.grid.grid_for(fwhm_omega(lambda0, bandwidth_nm * 1e-9))?;
    let s = gaussian_spectrum_about(lambda0, bandwidth_nm * 1e-9, omega0, &grid)?;
    Ok((omega0, grid, s.intensity))
}

/// One scan of the given mode. Delays are relative to the bulk offset.
pub fn scan_for_mode(cfg: &ScenarioConfig, mode: Mode) -> Result<Interferogram> {
    let stack = cfg.stack()?;
    let omega0 = cfg.omega0()?;
    let offset = bulk_offset_um(&stack, omega0)?;
    let x = cfg.x_grid()?;
    let s = &cfg.source;
    let lambda_c = s.lambda_c_nm * 1e-9;
    let scan = match mode {
        Mode::Cpi => {
            let (bc, ba) = match s.kernel {
                KernelBandwidth::Mean => {
                    let m = 0.5 * (s.bandwidth_nm.chirped + s.bandwidth_nm.antichirped);
                    (m, m)
                }
                KernelBandwidth::PerPulse => (s.bandwidth_nm.chirped, s.bandwidth_nm.antichirped),
            };
            let grid = s.grid.grid_for(fwhm_omega(lambda_c, bc.max(ba) * 1e-9))?;
            let ic = gaussian_spectrum_about(lambda_c, bc * 1e-9, omega0, &grid)?;
            let ia = gaussian_spectrum_about(lambda_c, ba * 1e-9, omega0, &grid)?;
            let lambda = EffectiveSpectrum::cpi_product(&ic, &ia)?;
            let h = transfer_function(&stack, &grid, omega0)?;
            cpi_interferogram(&lambda, &h, &x.shifted(offset))?
        }
        Mode::Wli => {
            let w = cfg.wli.clone().unwrap_or_default();
            let bw = w.bandwidth_nm.unwrap_or(s.bandwidth_nm.chirped) * 1e-9;
            let grid = s.grid.grid_for(fwhm_omega(lambda_c, bw))?;
            let source = gaussian_spectrum_about(lambda_c, bw, omega0, &grid)?;
            let h = transfer_function(&stack, &grid, omega0)?;
            let xw = XGrid::new(cfg.x_grid.start_um, cfg.x_grid.stop_um, w.step_um)
                .map_err(|e| Error::config("wli.step_um", e.to_string()))?;
            let scan = wli_interferogram(&source, &h, &xw.shifted(offset))?;
            return Ok(relative(scan, &xw, cfg));
        }
        Mode::Qoct => {
            let q = cfg.qoct.as_ref().ok_or_else(|| Error::config("qoct", "required by mode `qoct`"))?;
            let (omega0, grid, values) = given_spectrum(cfg, q.bandwidth_nm)?;
            let lambda = EffectiveSpectrum::qoct_given(omega0, grid, values)?;
            let h = transfer_function(&stack, &grid, omega0)?;
            qoct_interferogram(&lambda, &h, &x.shifted(offset))?
        }
        Mode::CwSwept => {
            let q = cfg
                .cw_swept
                .as_ref()
                .ok_or_else(|| Error::config("cw_swept", "required by mode `cw_swept`"))?;
            let (omega0, grid, values) = given_spectrum(cfg, q.bandwidth_nm)?;
            let lambda = EffectiveSpectrum::cw_swept(omega0, grid, values)?;
            let h = transfer_function(&stack, &grid, omega0)?;
            cpi_interferogram(&lambda, &h, &x.shifted(offset))?
        }
        Mode::Spectrogram | Mode::Sweep => {
            return Err(Error::contract(format!("{mode:?} is not a single-scan mode")));
        }
    };
    Ok(relative(scan, &x, cfg))
}

/// CPI scans at every wavelength of `lambdas`, in order.
pub fn cpi_scans_at(cfg: &ScenarioConfig, lambdas: &[f64]) -> Result<Vec<(f64, Interferogram)>> {
    lambdas
        .par_iter()
        .map(|&l| Ok((l, scan_for_mode(&cfg.with_lambda0(l), Mode::Cpi)?)))
        .collect()
}

/// Features of `scan`, labelled using CPI scans at the config's
/// `classify` wavelengths (plus the scan itself) when that section exists.
pub fn classified_features(
    cfg: &ScenarioConfig,
    scan: &Interferogram,
    opts: &DetectOptions,
) -> Result<(Vec<Feature>, Option<ClassificationResult>)> {
    let mut features = detect_features(scan, opts)?;
    let Some(list) = cfg.classify.as_ref().filter(|_| scan.kind == ScanKind::Cpi) else {
        return Ok((features, None));
    };
    let mut scans = vec![(scan.lambda0_nm(), scan.clone())];
    scans.extend(cpi_scans_at(cfg, &list.lambda0_list_nm)?);
    let result = classify_features(&scans, opts)?;
    for f in features.iter_mut() {
        let nearest = result
            .clusters
            .iter()
            .map(|c| ((c.center_um - f.center_um).abs(), c))
            .filter(|(d, c)| *d <= c.fwhm_um.max(f.fwhm_um))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, c)) = nearest {
            f.classification = c.classification;
        }
    }
    Ok((features, Some(result)))
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub classification: ClassificationResult,
    pub artifact_center_um: f64,
    pub fit: SweepResult,
    pub prediction: FlipPrediction,
}

/// CPI scans over the sweep wavelengths, the artifact visibility at each,
/// and its fitted oscillation against the prediction from the first gap.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepOutcome> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "required by the sweep command"))?;
    let scans = cpi_scans_at(cfg, &sweep.lambda0_list_nm)?;
    let result = classify_features(&scans, &DetectOptions::default())?;
    let amplitude = |c: &crate::analysis::FeatureCluster| {
        c.visibilities.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    };
    let artifact = result
        .artifacts()
        .max_by(|a, b| amplitude(a).total_cmp(&amplitude(b)))
        .ok_or_else(|| Error::contract("no feature changes sign across the sweep"))?
        .clone();
    let fit = fit_visibility_oscillation(&artifact.visibilities)?;

    let stack = cfg.stack()?;
    let gap = stack
        .gaps()
        .first()
        .ok_or_else(|| Error::config("sample.gaps", "the sweep prediction needs at least one gap"))?;
    let omega_ref = omega_from_wavelength(fit.lambda_ref_nm * 1e-9);
    let alpha = gap.material.phase_expansion(omega_ref)?.alpha;
    let prediction = predict_artifact_flip(omega_ref, alpha, gap.thickness_m)?;
    Ok(SweepOutcome {
        classification: result,
        artifact_center_um: artifact.center_um,
        fit,
        prediction,
    })
}

#[derive(Debug, Clone)]
pub struct SpectrogramOutcome {
    /// Delays relative to the bulk offset.
    pub spectrogram: Spectrogram,
    pub filtered: Interferogram,
    pub lines: LineAnalysis,
    pub x_offset_um: f64,
}

/// SFG wavelength axis centred on half the operating wavelength.
pub fn sfg_axis(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    let sp = cfg
        .spectrogram
        .as_ref()
        .ok_or_else(|| Error::config("spectrogram", "required by the spectrogram command"))?;
    let center = 0.5 * wavelength_from_omega(cfg.omega0()?) * 1e9;
    let n = (2.0 * sp.lambda_half_span_nm / sp.lambda_step_nm).round() as usize + 1;
    Ok((0..n)
        .map(|i| center - sp.lambda_half_span_nm + i as f64 * sp.lambda_step_nm)
        .collect())
}

pub fn run_spectrogram(cfg: &ScenarioConfig) -> Result<SpectrogramOutcome> {
    let sp = cfg
        .spectrogram
        .as_ref()
        .ok_or_else(|| Error::config("spectrogram", "required by the spectrogram command"))?;
    let pair = cfg.pair()?;
    let stack = cfg.stack()?;
    let omega0 = pair.operating_frequency()?;
    let offset = bulk_offset_um(&stack, omega0)?;
    let x = cfg.x_grid()?;
    let settings = SpectrogramSettings {
        time_samples: sp.time_samples,
        window_factor: sp.window_factor,
    };
    let mut spec = sfg_spectrogram(&pair, &stack, &x.shifted(offset), &sfg_axis(cfg)?, &settings)?;
    spec.x_um = x.values();
    let filter = cfg.filter.clone().unwrap_or_default();
    let center_omega = match filter.center_nm {
        Some(c) => omega_from_wavelength(2.0 * c * 1e-9),
        None => omega0,
    };
    let mut filtered = integrate_filtered(&spec, center_omega, filter.fwhm_nm)?;
    filtered.scenario_id = Some(cfg.id.clone());
    let lines = spectrogram_lines(&spec)?;
    Ok(SpectrogramOutcome {
        spectrogram: spec,
        filtered,
        lines,
        x_offset_um: offset,
    })
}

pub const SPECTROGRAM_VERSION_LINE: &str = "# cpi-lab spectrogram v1";

pub fn format_spectrogram(spec: &Spectrogram, cfg: &ScenarioConfig, x_offset_um: f64) -> String {
    let mut out = String::with_capacity(96 * spec.intensity.len() + 256);
    out.push_str(SPECTROGRAM_VERSION_LINE);
    out.push('\n');
    out.push_str(&format!("# omega0_rad_s: {:.16e}\n", spec.omega0));
    out.push_str(&format!("# scenario: {}\n", cfg.id));
    out.push_str(&format!("# scenario_hash: {}\n", cfg.scenario_hash()));
    out.push_str(&format!("# x_offset_um: {x_offset_um:.16e}\n"));
    out.push_str("x_um,lambda_nm,intensity,background\n");
    for i in 0..spec.rows() {
        for j in 0..spec.cols() {
            let k = i * spec.cols() + j;
            let bg = spec.background.as_ref().map_or(f64::NAN, |b| b[k]);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                spec.x_um[i], spec.lambda_nm[j], spec.intensity[k], bg
            ));
        }
    }
    out
}

/// Where and how results are written.
#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub plot: bool,
}

/// Files written and a human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

impl RunSummary {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_atomic(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn write_scan(&mut self, path: PathBuf, scan: &Interferogram, header: &ScanHeader) -> Result<()> {
        write_scan(&path, scan, header)?;
        self.files.push(path);
        Ok(())
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Cpi => "cpi",
        Mode::Wli => "wli",
        Mode::Qoct => "qoct",
        Mode::CwSwept => "cw_swept",
        Mode::Spectrogram => "spectrogram",
        Mode::Sweep => "sweep",
    }
}

fn describe_features(label: &str, scan: &Interferogram, features: &[Feature], out: &mut Vec<String>) {
    out.push(format!(
        "{label}: {} scan at {:.3} nm, {} feature(s)",
        scan.kind,
        scan.lambda0_nm(),
        features.len()
    ));
    for f in features {
        out.push(format!(
            "  {:<4} x = {:>10.3} um  fwhm = {:>8.3} um  V = {:>+7.4}  {}",
            match f.polarity {
                crate::analysis::Polarity::Dip => "dip",
                crate::analysis::Polarity::Peak => "peak",
            },
            f.center_um,
            f.fwhm_um,
            f.visibility,
            match f.classification {
                Classification::Real => "real",
                Classification::Artifact => "artifact",
                Classification::Unknown => "unknown",
            }
        ));
    }
}

fn describe_thickness(cfg: &ScenarioConfig, scan: &Interferogram, features: &[Feature], out: &mut Vec<String>) {
    let Ok(sep) = dip_separation(features) else { return };
    let Some(gap) = cfg.sample.gaps.first() else { return };
    let Ok(reg) = cfg.registry() else { return };
    let Ok(material) = reg.get(&gap.material) else { return };
    if let Ok(d) = thickness_from_dips(sep, material, scan.lambda0_nm() * 1e-9) {
        out.push(format!(
            "  dip separation {sep:.3} um -> thickness {d:.3} um ({})",
            gap.material
        ));
    }
}

fn scan_outputs(
    cfg: &ScenarioConfig,
    opts: &OutputOptions,
    name: &str,
    scan: &Interferogram,
    features: &[Feature],
    x_offset_um: f64,
    summary: &mut RunSummary,
) -> Result<()> {
    let stem = format!("{}_{name}", cfg.stem());
    let header = ScanHeader {
        scenario_hash: Some(cfg.scenario_hash()),
        x_offset_um,
    };
    summary.write_scan(opts.out_dir.join(format!("{stem}.csv")), scan, &header)?;
    let report = to_json(&FeatureReport::new(scan, features));
    summary.write(opts.out_dir.join(format!("{stem}_report.json")), report.as_bytes())?;
    if opts.plot {
        let title = format!("{} {}", cfg.id, scan.kind);
        summary.write(
            opts.out_dir.join(format!("{stem}.svg")),
            svg::scan_svg(&[scan], &title).as_bytes(),
        )?;
    }
    Ok(())
}

/// Runs every mode listed in the config.
pub fn simulate(cfg: &ScenarioConfig, opts: &OutputOptions) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let offset = bulk_offset_um(&cfg.stack()?, cfg.omega0()?)?;
    if offset != 0.0 {
        summary
            .lines
            .push(format!("{}: bulk offset {offset:.3} um subtracted from delays", cfg.id));
    }
    for &mode in &cfg.modes {
        match mode {
            Mode::Sweep => {
                let s = sweep(cfg, opts)?;
                summary.files.extend(s.files);
                summary.lines.extend(s.lines);
            }
            Mode::Spectrogram => {
                let s = spectrogram(cfg, opts)?;
                summary.files.extend(s.files);
                summary.lines.extend(s.lines);
            }
            _ => {
                let scan = scan_for_mode(cfg, mode)?;
                let (features, _) = classified_features(cfg, &scan, &DetectOptions::default())?;
                let name = mode_name(mode);
                describe_features(&format!("{} {name}", cfg.id), &scan, &features, &mut summary.lines);
                describe_thickness(cfg, &scan, &features, &mut summary.lines);
                scan_outputs(cfg, opts, name, &scan, &features, offset, &mut summary)?;
            }
        }
    }
    Ok(summary)
}

pub fn sweep(cfg: &ScenarioConfig, opts: &OutputOptions) -> Result<RunSummary> {
    let outcome = run_sweep(cfg)?;
    let mut summary = RunSummary::default();
    let report = SweepReport::new(
        &cfg.id,
        &cfg.scenario_hash(),
        outcome.artifact_center_um,
        &outcome.fit,
        outcome.prediction,
    );
    let stem = format!("{}_sweep", cfg.stem());
    summary.write(opts.out_dir.join(format!("{stem}.json")), to_json(&report).as_bytes())?;
    if opts.plot {
        summary.write(
            opts.out_dir.join(format!("{stem}.svg")),
            svg::sweep_svg(&outcome.fit, &cfg.id).as_bytes(),
        )?;
    }
    summary.lines.push(format!(
        "{} sweep: artifact at {:.3} um over {} wavelengths",
        cfg.id,
        outcome.artifact_center_um,
        outcome.fit.points.len()
    ));
    summary.lines.push(format!(
        "  fitted period {:.4} nm (95% +/- {:.4}), predicted {:.4} nm, flip {:.4} nm",
        outcome.fit.period_nm, outcome.fit.period_ci_nm, outcome.prediction.period_nm, outcome.prediction.flip_nm
    ));
    Ok(summary)
}

pub fn spectrogram(cfg: &ScenarioConfig, opts: &OutputOptions) -> Result<RunSummary> {
    let outcome = run_spectrogram(cfg)?;
    let mut summary = RunSummary::default();
    let stem = cfg.stem();
    summary.write(
        opts.out_dir.join(format!("{stem}_spectrogram.csv")),
        format_spectrogram(&outcome.spectrogram, cfg, outcome.x_offset_um).as_bytes(),
    )?;
    let features = detect_features(&outcome.filtered, &DetectOptions::default())?;
    scan_outputs(
        cfg,
        opts,
        "filtered",
        &outcome.filtered,
        &features,
        outcome.x_offset_um,
        &mut summary,
    )?;
    let lines = LinesReport::new(&outcome.lines, 0.0);
    summary.write(opts.out_dir.join(format!("{stem}_lines.json")), to_json(&lines).as_bytes())?;
    if opts.plot {
        summary.write(
            opts.out_dir.join(format!("{stem}_spectrogram.svg")),
            svg::spectrogram_svg(&outcome.spectrogram, &cfg.id)?.as_bytes(),
        )?;
    }
    describe_features(&format!("{} filtered", cfg.id), &outcome.filtered, &features, &mut summary.lines);
    summary.lines.push(format!(
        "  {} line(s), {} crossing(s), {} same-wavelength pair(s), {} same-delay pair(s)",
        lines.lines.len(),
        lines.crossings.len(),
        lines.same_lambda.len(),
        lines.same_x.len()
    ));
    for c in &lines.crossings {
        summary
            .lines
            .push(format!("  crossing x = {:>10.3} um  lambda = {:.4} nm", c.x_um, c.lambda_nm));
    }
    Ok(summary)
}

/// Reads a scan (native format, or any two-column CSV) and reports its
/// features. `kind` overrides the file's kind; `lambda0_nm` supplies the
/// operating wavelength for files that lack one.
pub fn analyze(
    path: &Path,
    kind: Option<ScanKind>,
    lambda0_nm: Option<f64>,
    opts: &OutputOptions,
) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut scan = if text.starts_with("# cpi-lab scan") {
        super::scanfile::parse_scan(&text)?.0
    } else {
        super::scanfile::parse_external(&text, kind.unwrap_or(ScanKind::Cpi), 0.0)?
    };
    if let Some(k) = kind {
        scan.kind = k;
    }
    if let Some(l) = lambda0_nm {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::config("--lambda0-nm", "must be a positive number"));
        }
        scan.omega0 = omega_from_wavelength(l * 1e-9);
    }
    let features = detect_features(&scan, &DetectOptions::default())?;
    let mut summary = RunSummary::default();
    let stem = path.file_stem().map_or("scan".into(), |s| s.to_string_lossy().into_owned());
    let report = to_json(&FeatureReport::new(&scan, &features));
    summary.write(opts.out_dir.join(format!("{stem}_analysis.json")), report.as_bytes())?;
    if opts.plot {
        summary.write(
            opts.out_dir.join(format!("{stem}_analysis.svg")),
            svg::scan_svg(&[&scan], &stem).as_bytes(),
        )?;
    }
    describe_features(&stem, &scan, &features, &mut summary.lines);
    Ok(summary)
}
