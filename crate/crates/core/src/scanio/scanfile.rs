//! Scan CSV files.
//!
//! ```text
//! # cpi-lab scan v1
//! # kind: CPI
//! # omega0_rad_s: 2.3820594757574125e15
//! # lambda0_nm: 790.8
//! # scenario: fig2a
//! # scenario_hash: 3f2a...
//! # x_offset_um: 0
//! x_um,signal
//! -6.0000000000000000e1,9.9999999999999978e-1
//! ```
//!
//! Values are written with 17 significant digits, so reading a file back
//! reproduces every sample bit for bit.

use std::io::Write;
use std::path::Path;

use crate::engine::{Interferogram, ScanKind};
use crate::error::{Error, Result};
use crate::materials::{omega_from_wavelength, wavelength_from_omega};

pub const SCAN_VERSION_LINE: &str = "# cpi-lab scan v1";

/// Header metadata of a scan file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanHeader {
    pub scenario_hash: Option<String>,
    /// Offset subtracted from the delay axis before writing (bulk group
    /// delay), µm.
    pub x_offset_um: f64,
}

/// Writes `path` atomically (temporary file in the same directory, then
/// rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder
        .tempfile_in(dir)
        .map_err(|e| Error::io(format!("creating temporary file in {}", dir.display()), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(format!("renaming into {}", path.display()), e.error))?;
    Ok(())
}

/// Renders a scan in the versioned CSV format.
pub fn format_scan(scan: &Interferogram, header: &ScanHeader) -> String {
    let mut out = String::with_capacity(64 * (scan.len() + 8));
    out.push_str(SCAN_VERSION_LINE);
    out.push('\n');
    out.push_str(&format!("# kind: {}\n", scan.kind));
    out.push_str(&format!("# omega0_rad_s: {:.16e}\n", scan.omega0));
    if scan.omega0 > 0.0 {
        out.push_str(&format!("# lambda0_nm: {:.6}\n", wavelength_from_omega(scan.omega0) * 1e9));
    }
    if let Some(id) = &scan.scenario_id {
        out.push_str(&format!("# scenario: {id}\n"));
    }
    if let Some(h) = &header.scenario_hash {
        out.push_str(&format!("# scenario_hash: {h}\n"));
    }
    out.push_str(&format!("# x_offset_um: {:.16e}\n", header.x_offset_um));
    out.push_str("x_um,signal\n");
    for (x, s) in scan.x_um.iter().zip(&scan.signal) {
        out.push_str(&format!("{x:.16e},{s:.16e}\n"));
    }
    out
}

pub fn write_scan(path: &Path, scan: &Interferogram, header: &ScanHeader) -> Result<()> {
    write_atomic(path, format_scan(scan, header).as_bytes())
}

fn check_axis(x: &[f64], signal: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Format("scan has no data rows".into()));
    }
    if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Format(format!(
            "x_um is not strictly increasing at data row {}",
            i + 2
        )));
    }
    if signal.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::Format("scan contains non-finite values".into()));
    }
    Ok(())
}

fn parse_rows(body: &str, first_line: usize, expect_header: Option<&str>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable column header: {e}")))?
        .clone();
    if headers.len() != 2 {
        return Err(Error::Format(format!(
            "expected two columns, header has {}",
            headers.len()
        )));
    }
    if let Some(want) = expect_header {
        let got = format!("{},{}", &headers[0], &headers[1]);
        if got != want {
            return Err(Error::Format(format!("expected column header `{want}`, found `{got}`")));
        }
    }
    let mut x = Vec::new();
    let mut s = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize + first_line - 1).unwrap_or(0);
            Error::Format(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line() as usize + first_line - 1).unwrap_or(0);
        if rec.len() != 2 {
            return Err(Error::Format(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {line}: `{v}` is not a number")))
        };
        x.push(parse(&rec[0])?);
        s.push(parse(&rec[1])?);
    }
    check_axis(&x, &s)?;
    Ok((x, s))
}

/// Parses a scan written by [`format_scan`]. The version line is mandatory.
pub fn parse_scan(text: &str) -> Result<(Interferogram, ScanHeader)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim_end() == SCAN_VERSION_LINE => {}
        Some(l) if l.starts_with("# cpi-lab scan") => {
            return Err(Error::Format(format!("unsupported scan format version `{}`", l.trim())));
        }
        _ => {
            return Err(Error::Format(format!(
                "missing version header `{SCAN_VERSION_LINE}` on line 1"
            )))
        }
    }
    let mut kind = None;
    let mut omega0 = None;
    let mut scenario_id = None;
    let mut header = ScanHeader {
        scenario_hash: None,
        x_offset_um: 0.0,
    };
    let mut meta_lines = 1;
    for (i, line) in text.lines().enumerate().skip(1) {
        let Some(rest) = line.strip_prefix('#') else { break };
        meta_lines = i + 1;
        let Some((key, value)) = rest.split_once(':') else { continue };
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: `{key}` is not a number", i + 1)))
        };
        match key {
            "kind" => {
                kind = Some(ScanKind::parse(value).ok_or_else(|| {
                    Error::Format(format!("line {}: unknown scan kind `{value}`", i + 1))
                })?)
            }
            "omega0_rad_s" => omega0 = Some(num(value)?),
            "lambda0_nm" if omega0.is_none() => omega0 = Some(omega_from_wavelength(num(value)? * 1e-9)),
            "scenario" => scenario_id = Some(value.to_string()),
            "scenario_hash" => header.scenario_hash = Some(value.to_string()),
            "x_offset_um" => header.x_offset_um = num(value)?,
            _ => {}
        }
    }
    let kind = kind.ok_or_else(|| Error::Format("scan header lacks `# kind:`".into()))?;
    let body: String = text.lines().skip(meta_lines).collect::<Vec<_>>().join("\n");
    let (x, s) = parse_rows(&body, meta_lines + 1, Some("x_um,signal"))?;
    Ok((
        Interferogram {
            kind,
            x_um: x,
            signal: s,
            omega0: omega0.unwrap_or(0.0),
            scenario_id,
        },
        header,
    ))
}

pub fn read_scan(path: &Path) -> Result<(Interferogram, ScanHeader)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_scan(&text)
}

/// Ingests a two-column CSV produced elsewhere (any column names, `#`
/// comments allowed). The first column is the delay in µm.
pub fn parse_external(text: &str, kind: ScanKind, omega0: f64) -> Result<Interferogram> {
    let (x, s) = parse_rows(text, 1, None)?;
    Ok(Interferogram {
        kind,
        x_um: x,
        signal: s,
        omega0,
        scenario_id: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan() -> Interferogram {
        Interferogram {
            kind: ScanKind::Cpi,
            x_um: vec![-1.0, 0.1, 0.2, 1.0 / 3.0],
            signal: vec![1.0, 0.123_456_789_012_345_68, std::f64::consts::PI, 1e-300],
            omega0: 2.3820594757574125e15,
            scenario_id: Some("t".into()),
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let h = ScanHeader {
            scenario_hash: Some("abc".into()),
            x_offset_um: 67460.5,
        };
        let text = format_scan(&scan(), &h);
        let (back, h2) = parse_scan(&text).unwrap();
        assert_eq!(back, scan());
        assert_eq!(h2, h);
    }

    #[test]
    fn missing_version_is_rejected() {
        let text = format_scan(&scan(), &ScanHeader { scenario_hash: None, x_offset_um: 0.0 });
        let stripped: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_scan(&stripped), Err(Error::Format(m)) if m.contains("version")));
        let v2 = text.replace("scan v1", "scan v2");
        assert!(matches!(parse_scan(&v2), Err(Error::Format(m)) if m.contains("version")));
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "# cpi-lab scan v1\n# kind: CPI\nx_um,signal\n0,1\n1,abc\n";
        match parse_scan(text) {
            Err(Error::Format(m)) => assert!(m.contains("line 5"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_monotonic_axis_is_rejected() {
        let text = "# cpi-lab scan v1\n# kind: CPI\nx_um,signal\n0,1\n0,1\n";
        assert!(parse_scan(text).is_err());
    }

    #[test]
    fn external_two_column_csv() {
        let text = "# exported by a lab script\ndelay_um, counts\n0.0, 1.0\n0.5, 0.7\n1.0, 1.0\n";
        let s = parse_external(text, ScanKind::Cpi, 0.0).unwrap();
        assert_eq!(s.x_um, vec![0.0, 0.5, 1.0]);
        assert_eq!(s.signal, vec![1.0, 0.7, 1.0]);
        assert!(parse_external("a,b,c\n1,2,3\n", ScanKind::Cpi, 0.0).is_err());
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("s.csv");
        write_scan(&p, &scan(), &ScanHeader { scenario_hash: None, x_offset_um: 0.0 }).unwrap();
        let (back, _) = read_scan(&p).unwrap();
        assert_eq!(back.signal, scan().signal);
    }
}
