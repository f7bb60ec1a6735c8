//! Straight SFG lines in a spectrogram and their crossings.
//!
//! Each surface produces two lines of opposite slope in the (x, λ) plane.
//! Lines are found by peak-picking every row, estimating the common |slope|
//! from row-to-row links, and histogramming the intercepts `λ ∓ s·x`.

use crate::engine::Spectrogram;
use crate::error::{Error, Result};
use crate::numeric::{median, parabolic_offset};

/// Row peaks below this fraction of the map maximum are ignored.
const PEAK_FRACTION: f64 = 0.05;
/// A line must collect points in at least this fraction of the rows.
const MIN_ROW_FRACTION: f64 = 0.2;

/// `λ = intercept + slope·x` (nm, µm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrogramLine {
    pub intercept_nm: f64,
    pub slope_nm_per_um: f64,
    pub points: usize,
}

impl SpectrogramLine {
    pub fn at(&self, x_um: f64) -> f64 {
        self.intercept_nm + self.slope_nm_per_um * x_um
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub x_um: f64,
    pub lambda_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineAnalysis {
    pub lines: Vec<SpectrogramLine>,
    pub crossings: Vec<Crossing>,
    /// Index pairs of crossings sharing a wavelength.
    pub same_lambda: Vec<(usize, usize)>,
    /// Index pairs of crossings sharing a delay.
    pub same_x: Vec<(usize, usize)>,
}

fn row_peaks(lambda: &[f64], row: &[f64], floor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 1..row.len().saturating_sub(1) {
        if row[j] >= floor && row[j] > row[j - 1] && row[j] >= row[j + 1] {
            let d = parabolic_offset(row[j - 1], row[j], row[j + 1]);
            let step = if d >= 0.0 { lambda[j + 1] - lambda[j] } else { lambda[j] - lambda[j - 1] };
            out.push(lambda[j] + d * step);
        }
    }
    out
}

fn fit_line(points: &[(f64, f64)]) -> Option<SpectrogramLine> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(SpectrogramLine {
        intercept_nm: my - slope * mx,
        slope_nm_per_um: slope,
        points: points.len(),
    })
}

/// Finds lines of slope `sign·s` from the intercept histogram.
fn family(points: &[(f64, f64)], s: f64, sign: f64, bin: f64, min_points: usize) -> Vec<SpectrogramLine> {
    let key = |p: &(f64, f64)| p.1 - sign * s * p.0;
    let keys: Vec<f64> = points.iter().map(key).collect();
    let lo = keys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = keys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let nbins = (((hi - lo) / bin).floor() as usize) + 1;
    let mut hist = vec![0usize; nbins];
    for k in &keys {
        hist[((k - lo) / bin) as usize] += 1;
    }
    // Histogram counts summed with their neighbours.
    let window = |i: usize| -> usize {
        hist[i] + if i > 0 { hist[i - 1] } else { 0 } + if i + 1 < nbins { hist[i + 1] } else { 0 }
    };
    // Strongest bins first; suppress neighbours within four bins.
    let mut order: Vec<usize> = (0..nbins).filter(|&i| window(i) >= min_points).collect();
    order.sort_by(|&a, &b| window(b).cmp(&window(a)).then(a.cmp(&b)));
    let mut taken: Vec<usize> = Vec::new();
    for i in order {
        if taken.iter().all(|&t| t.abs_diff(i) > 4) {
            taken.push(i);
        }
    }
    taken.sort_unstable();
    let mut lines = Vec::new();
    for i in taken {
        let centre = lo + (i as f64 + 0.5) * bin;
        let members: Vec<(f64, f64)> = points
            .iter()
            .zip(&keys)
            .filter(|(_, k)| (*k - centre).abs() <= 1.5 * bin)
            .map(|(p, _)| *p)
            .collect();
        if let Some(line) = fit_line(&members) {
            lines.push(line);
        }
    }
    lines
}

/// Extracts lines and crossings from a spectrogram. The non-interfering
/// background map is used when present (interference suppresses the lines
/// near real crossings); otherwise the total intensity.
pub fn spectrogram_lines(spec: &Spectrogram) -> Result<LineAnalysis> {
    let rows = spec.rows();
    let cols = spec.cols();
    if rows < 3 || cols < 3 {
        return Err(Error::contract("spectrogram too small for line extraction"));
    }
    let data = spec.background.as_deref().unwrap_or(&spec.intensity);
    let max = data.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::contract("spectrogram is empty"));
    }
    let floor = PEAK_FRACTION * max;
    let peaks: Vec<Vec<f64>> = (0..rows)
        .map(|i| row_peaks(&spec.lambda_nm, &data[i * cols..(i + 1) * cols], floor))
        .collect();

    // Unambiguous row-to-row links give the slope magnitude.
    let mut slopes = Vec::new();
    for i in 0..rows - 1 {
        let dx = spec.x_um[i + 1] - spec.x_um[i];
        let (a, b) = (&peaks[i], &peaks[i + 1]);
        if a.len() != b.len() || a.len() < 2 {
            continue;
        }
        let mut gaps: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.extend(b.windows(2).map(|w| w[1] - w[0]));
        let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        for (p, q) in a.iter().zip(b) {
            if (q - p).abs() < 0.25 * min_gap {
                slopes.push(((q - p) / dx).abs());
            }
        }
    }
    let s = median(&slopes).ok_or_else(|| Error::contract("no line segments could be linked"))?;
    if !(s > 0.0) {
        return Err(Error::contract("spectrogram lines have no measurable slope"));
    }

    let points: Vec<(f64, f64)> = peaks
        .iter()
        .enumerate()
        .flat_map(|(i, ps)| ps.iter().map(move |&l| (spec.x_um[i], l)))
        .collect();
    let dl = (spec.lambda_nm[cols - 1] - spec.lambda_nm[0]) / (cols - 1) as f64;
    let bin = 2.0 * dl;
    let min_points = ((MIN_ROW_FRACTION * rows as f64).ceil() as usize).max(3);
    let plus = family(&points, s, 1.0, bin, min_points);
    let minus = family(&points, s, -1.0, bin, min_points);

    let (x_lo, x_hi) = (spec.x_um[0], spec.x_um[rows - 1]);
    let mut crossings = Vec::new();
    for p in &plus {
        for m in &minus {
            let ds = p.slope_nm_per_um - m.slope_nm_per_um;
            if ds.abs() < 1e-300 {
                continue;
            }
            let x = (m.intercept_nm - p.intercept_nm) / ds;
            if x >= x_lo && x <= x_hi {
                crossings.push(Crossing {
                    x_um: x,
                    lambda_nm: p.at(x),
                });
            }
        }
    }
    crossings.sort_by(|a, b| a.x_um.partial_cmp(&b.x_um).unwrap());

    let tol_l = 2.0 * dl;
    let tol_x = 4.0 * (spec.x_um[1] - spec.x_um[0]).abs();
    let mut same_lambda = Vec::new();
    let mut same_x = Vec::new();
    for i in 0..crossings.len() {
        for j in i + 1..crossings.len() {
            let (a, b) = (crossings[i], crossings[j]);
            if (a.lambda_nm - b.lambda_nm).abs() <= tol_l {
                same_lambda.push((i, j));
            }
            if (a.x_um - b.x_um).abs() <= tol_x {
                same_x.push((i, j));
            }
        }
    }
    let mut lines = plus;
    lines.extend(minus);
    Ok(LineAnalysis {
        lines,
        crossings,
        same_lambda,
        same_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(lines: &[(f64, f64)]) -> Spectrogram {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 2.0 - 50.0).collect();
        let lambda: Vec<f64> = (0..=400).map(|j| 394.8 + j as f64 * 0.001).collect();
        let mut intensity = Vec::new();
        for &xi in &x {
            for &l in &lambda {
                let v: f64 = lines
                    .iter()
                    .map(|(c, s)| {
                        let d = (l - (c + s * xi)) / 0.004;
                        (-d * d).exp()
                    })
                    .sum();
                intensity.push(v);
            }
        }
        Spectrogram {
            x_um: x,
            lambda_nm: lambda,
            intensity,
            background: None,
            omega0: 2.38e15,
        }
    }

    #[test]
    fn four_lines_four_crossings() {
        let s = 3.4e-4;
        // + lines through (0, 395) and (286, 395), − lines likewise.
        let spec = synthetic(&[
            (395.0, s),
            (395.0 - s * 286.0, s),
            (395.0, -s),
            (395.0 + s * 286.0, -s),
        ]);
        let r = spectrogram_lines(&spec).unwrap();
        assert_eq!(r.lines.len(), 4);
        assert_eq!(r.crossings.len(), 4);
        assert_eq!(r.same_lambda.len(), 1);
        assert_eq!(r.same_x.len(), 1);
        let (i, j) = r.same_x[0];
        assert!((r.crossings[i].x_um - 143.0).abs() < 0.5);
        assert!((r.crossings[j].x_um - 143.0).abs() < 0.5);
        let (i, j) = r.same_lambda[0];
        assert!((r.crossings[i].lambda_nm - 395.0).abs() < 0.001);
        assert!((r.crossings[j].x_um - 286.0).abs() < 0.5);
    }

    #[test]
    fn empty_map_is_rejected() {
        let mut spec = synthetic(&[]);
        spec.intensity.iter_mut().for_each(|v| *v = 0.0);
        assert!(spectrogram_lines(&spec).is_err());
    }
}
