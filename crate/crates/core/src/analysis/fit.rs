//! Sinusoidal fit of artifact visibility against operating wavelength.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Artifact visibility against operating wavelength and its fitted
/// oscillation `V(λ) = A·cos(2π(λ − λ_ref)/P + φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// (λ0 in nm, signed visibility)
    pub points: Vec<(f64, f64)>,
    pub amplitude: f64,
    pub period_nm: f64,
    pub phase: f64,
    pub lambda_ref_nm: f64,
    /// 95% half-width on the period from the covariance estimate.
    pub period_ci_nm: f64,
    pub rms_residual: f64,
}

impl SweepResult {
    pub fn eval(&self, lambda_nm: f64) -> f64 {
        self.amplitude * (2.0 * PI * (lambda_nm - self.lambda_ref_nm) / self.period_nm + self.phase).cos()
    }
}

fn model(p: &[f64; 3], u: f64) -> f64 {
    p[0] * (2.0 * PI * u / p[1] + p[2]).cos()
}

fn jacobian_row(p: &[f64; 3], u: f64) -> [f64; 3] {
    let arg = 2.0 * PI * u / p[1] + p[2];
    let (s, c) = arg.sin_cos();
    [c, p[0] * s * 2.0 * PI * u / (p[1] * p[1]), -p[0] * s]
}

fn rss(p: &[f64; 3], u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(&ui, &vi)| (vi - model(p, ui)).powi(2)).sum()
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn inverse3(a: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0; 3]; 3];
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let col = solve3(a, e)?;
        for i in 0..3 {
            inv[i][k] = col[i];
        }
    }
    Some(inv)
}

fn normal_equations(p: &[f64; 3], u: &[f64], v: &[f64]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for (&ui, &vi) in u.iter().zip(v) {
        let j = jacobian_row(p, ui);
        let r = vi - model(p, ui);
        for a in 0..3 {
            jtr[a] += j[a] * r;
            for b in 0..3 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

/// Best linear fit `a·cos(2πu/P) + b·sin(2πu/P)` for a fixed period.
fn linear_for_period(u: &[f64], v: &[f64], period: f64) -> (f64, f64, f64) {
    let (mut cc, mut ss, mut cs, mut vc, mut vs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ui, &vi) in u.iter().zip(v) {
        let (s, c) = (2.0 * PI * ui / period).sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        vc += vi * c;
        vs += vi * s;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-300 {
        return (0.0, 0.0, f64::INFINITY);
    }
    let a = (vc * ss - vs * cs) / det;
    let b = (vs * cc - vc * cs) / det;
    let p = [a.hypot(b), period, (-b).atan2(a)];
    (p[0], p[2], rss(&p, u, v))
}

/// Fits `A·cos(2π(λ − λ_ref)/P + φ)` to visibility samples, with `λ_ref`
/// the mean wavelength. The period is seeded by a least-squares periodogram
/// and refined with Levenberg–Marquardt.
pub fn fit_visibility_oscillation(points: &[(f64, f64)]) -> Result<SweepResult> {
    let n = points.len();
    let lambda_nm: Vec<f64> = points.iter().map(|p| p.0).collect();
    let visibility: Vec<f64> = points.iter().map(|p| p.1).collect();
    let visibility = visibility.as_slice();
    if n < 4 {
        return Err(Error::contract("need at least 4 sweep points to fit an oscillation"));
    }
    if lambda_nm.iter().chain(visibility).any(|v| !v.is_finite()) {
        return Err(Error::contract("sweep contains non-finite values"));
    }
    let lo = lambda_nm.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambda_nm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::contract("sweep wavelengths span a zero range"));
    }
    let lambda_ref = lambda_nm.iter().sum::<f64>() / n as f64;
    let u: Vec<f64> = lambda_nm.iter().map(|l| l - lambda_ref).collect();

    // Periods from 2× the mean spacing to 4× the span.
    let p_min = 2.0 * span / (n - 1) as f64;
    let p_max = 4.0 * span;
    let steps = 2000;
    let mut best = (f64::INFINITY, [0.0; 3]);
    for k in 0..=steps {
        let period = p_min * (p_max / p_min).powf(k as f64 / steps as f64);
        let (amp, phase, r) = linear_for_period(&u, visibility, period);
        if r < best.0 {
            best = (r, [amp, period, phase]);
        }
    }
    let mut p = best.1;
    let mut cost = best.0;
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let (jtj, jtr) = normal_equations(&p, &u, visibility);
        let mut a = jtj;
        for d in 0..3 {
            a[d][d] += lambda * jtj[d][d].max(1e-30);
        }
        let Some(delta) = solve3(a, jtr) else { break };
        let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
        let trial_cost = if trial[1] > 0.0 { rss(&trial, &u, visibility) } else { f64::INFINITY };
        if trial_cost < cost {
            let improvement = cost - trial_cost;
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if improvement <= 1e-15 * cost.max(1e-300) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] += PI;
    }
    p[2] = (p[2] + PI).rem_euclid(2.0 * PI) - PI;
    if span < 0.5 * p[1] {
        return Err(Error::contract(format!(
            "sweep span {span:.4} nm covers less than half the fitted period {:.4} nm",
            p[1]
        )));
    }

    let (jtj, _) = normal_equations(&p, &u, visibility);
    let period_ci_nm = if n > 3 {
        let sigma2 = cost / (n - 3) as f64;
        match inverse3(jtj) {
            Some(cov) if cov[1][1] >= 0.0 => 1.96 * (sigma2 * cov[1][1]).sqrt(),
            _ => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };
    Ok(SweepResult {
        points: points.to_vec(),
        amplitude: p[0],
        period_nm: p[1],
        phase: p[2],
        lambda_ref_nm: lambda_ref,
        period_ci_nm,
        rms_residual: (cost / n as f64).sqrt(),
    })
}
