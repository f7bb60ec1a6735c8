//! Minimal SVG plots.

use std::fmt::Write;
use std::io::Cursor;

use base64::Engine;

use crate::analysis::SweepResult;
use crate::engine::{Interferogram, Spectrogram};
use crate::error::{Error, Result};

const W: f64 = 720.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#2e8b57", "#7d3c98"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let pad = 0.05 * (y1 - y0).max(1e-12);
        Self {
            x0,
            x1: if x1 > x0 { x1 } else { x0 + 1.0 },
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for k in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let yv = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, f.px(xv), b + 16.0, tick(xv));
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 4.0, f.py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, f: &Frame, x: &[f64], y: &[f64], color: &str) {
    let mut pts = String::new();
    for (a, b) in x.iter().zip(y) {
        let _ = write!(pts, "{:.2},{:.2} ", f.px(*a), f.py(*b));
    }
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
        pts.trim_end()
    );
}

/// Signal against delay for one or more scans.
pub fn scan_svg(scans: &[&Interferogram], title: &str) -> String {
    let f = Frame::new(
        scans.iter().flat_map(|s| s.x_um.iter().copied()),
        scans.iter().flat_map(|s| s.signal.iter().copied()),
    );
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "delay x (um)", "normalized signal");
    for (i, s) in scans.iter().enumerate() {
        polyline(&mut out, &f, &s.x_um, &s.signal, COLORS[i % COLORS.len()]);
    }
    out.push_str("</svg>\n");
    out
}

/// Sweep points and the fitted oscillation.
pub fn sweep_svg(fit: &SweepResult, title: &str) -> String {
    let f = Frame::new(
        fit.points.iter().map(|p| p.0),
        fit.points.iter().map(|p| p.1).chain([fit.amplitude, -fit.amplitude]),
    );
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "operating wavelength (nm)", "artifact visibility");
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|i| f.x0 + (f.x1 - f.x0) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| fit.eval(x)).collect();
    polyline(&mut out, &f, &xs, &ys, COLORS[1]);
    for &(x, y) in &fit.points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
            f.px(x),
            f.py(y),
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Spectrogram as an embedded grayscale PNG (delay down, wavelength across).
pub fn spectrogram_svg(spec: &Spectrogram, title: &str) -> Result<String> {
    let (rows, cols) = (spec.rows(), spec.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::contract("empty spectrogram"));
    }
    let peak = spec.intensity.iter().cloned().fold(0.0, f64::max);
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    let pixels: Vec<u8> = spec
        .intensity
        .iter()
        .map(|v| 255 - (v * scale).clamp(0.0, 255.0) as u8)
        .collect();
    let img = image::GrayImage::from_raw(cols as u32, rows as u32, pixels)
        .ok_or_else(|| Error::contract("spectrogram size does not match its data"))?;
    let mut png = Vec::new();
    img.write_to(&mut Cursor::new(&mut png), image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("encoding PNG: {e}")))?;
    let data = base64::engine::general_purpose::STANDARD.encode(&png);

    let f = Frame {
        x0: spec.lambda_nm[0],
        x1: spec.lambda_nm[cols - 1],
        y0: spec.x_um[rows - 1],
        y1: spec.x_um[0],
    };
    let mut out = String::new();
    open(&mut out, title);
    let _ = writeln!(
        out,
        r#"<image x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" preserveAspectRatio="none" href="data:image/png;base64,{data}"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    axes(&mut out, &f, "SFG wavelength (nm)", "delay x (um)");
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ScanKind;

    #[test]
    fn scan_plot_is_well_formed() {
        let s = Interferogram {
            kind: ScanKind::Cpi,
            x_um: vec![0.0, 1.0, 2.0],
            signal: vec![1.0, 0.5, 1.0],
            omega0: 2.4e15,
            scenario_id: None,
        };
        let svg = scan_svg(&[&s], "a <b>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt;b&gt;"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn spectrogram_plot_embeds_png() {
        let spec = Spectrogram {
            x_um: vec![0.0, 1.0],
            lambda_nm: vec![394.0, 395.0, 396.0],
            intensity: vec![0.0, 1.0, 0.0, 0.5, 0.2, 0.0],
            background: None,
            omega0: 2.4e15,
        };
        let svg = spectrogram_svg(&spec, "t").unwrap();
        let start = svg.find("base64,").unwrap() + 7;
        let end = start + svg[start..].find('"').unwrap();
        let png = base64::engine::general_purpose::STANDARD.decode(&svg[start..end]).unwrap();
        assert_eq!(&png[1..4], b"PNG");
    }
}
