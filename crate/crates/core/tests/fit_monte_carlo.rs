use cpi_lab::analysis::fit_visibility_oscillation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn noisy_sweep_recovers_period() {
    let period = 1.13;
    let amplitude = 0.4;
    let noise = Normal::new(0.0, 0.05 * amplitude).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let lambda: Vec<f64> = (0..29).map(|i| 790.6 + 0.1 * i as f64).collect();
    let mut worst: f64 = 0.0;
    let mut covered = 0;
    let trials = 200;
    for t in 0..trials {
        let phase = 0.1 * t as f64;
        let pts: Vec<(f64, f64)> = lambda
            .iter()
            .map(|&l| {
                let v = amplitude * (2.0 * std::f64::consts::PI * (l - 792.0) / period + phase).cos();
                (l, v + noise.sample(&mut rng))
            })
            .collect();
        let fit = fit_visibility_oscillation(&pts).unwrap();
        let err = (fit.period_nm - period).abs();
        worst = worst.max(err);
        if err <= fit.period_ci_nm {
            covered += 1;
        }
    }
    assert!(worst < 0.02, "worst period error {worst}");
    // The 95% interval should cover the truth in most trials.
    assert!(covered as f64 >= 0.85 * trials as f64, "coverage {covered}/{trials}");
}
