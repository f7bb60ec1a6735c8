use cpi_lab::analysis::{detect_features, thickness_from_dips, visibility, DetectOptions, Polarity};
use cpi_lab::engine::{cpi_interferogram, wli_interferogram, Interferogram, ScanKind};
use cpi_lab::materials::{omega_from_wavelength, DispersiveMaterial, SPEED_OF_LIGHT};
use cpi_lab::numeric::median;
use cpi_lab::sample::{transfer_function, LayerStack};
use cpi_lab::scanio::{format_scan, parse_scan, preset, ScanHeader};
use cpi_lab::spectra::{gaussian_spectrum, EffectiveSpectrum, GridSpec, SourceSpectrum};
use cpi_lab::XGrid;
use proptest::prelude::*;

fn small_grid() -> GridSpec {
    GridSpec {
        points: 2049,
        halfwidth_factor: 5.0,
    }
}

fn source() -> SourceSpectrum {
    gaussian_spectrum(790e-9, 11e-9, &small_grid()).unwrap()
}

fn glass() -> DispersiveMaterial {
    DispersiveMaterial::constant("glass", 1.5).unwrap()
}

fn fwhm_of(scan: &Interferogram) -> Vec<(f64, f64)> {
    detect_features(scan, &DetectOptions::default())
        .unwrap()
        .iter()
        .map(|f| (f.center_um, f.fwhm_um))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn even_phase_leaves_cpi_unchanged(c2 in -2e-25f64..2e-25, c4 in -1e-51f64..1e-51, d in 20.0f64..120.0) {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let stack = LayerStack::slab(0.2, 0.3, d * 1e-6, glass()).unwrap();
        let h = transfer_function(&stack, &s.grid, s.omega0).unwrap();
        let phase: Vec<f64> = s.offsets().iter().map(|w| c2 * w * w + c4 * w.powi(4)).collect();
        let hp = h.with_phase(&phase).unwrap();
        let x = XGrid::new(-40.0, 220.0, 1.0).unwrap();
        let a = cpi_interferogram(&l, &h, &x).unwrap();
        let b = cpi_interferogram(&l, &hp, &x).unwrap();
        for (u, v) in a.signal.iter().zip(&b.signal) {
            prop_assert!((u - v).abs() <= 1e-10 * u.abs().max(1.0));
        }
    }

    #[test]
    fn group_delay_shifts_without_broadening(tau_fs in 50.0f64..400.0) {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let h = transfer_function(&LayerStack::mirror(0.3).unwrap(), &s.grid, s.omega0).unwrap();
        let tau = tau_fs * 1e-15;
        let phase: Vec<f64> = s.offsets().iter().map(|w| tau * w).collect();
        let hp = h.with_phase(&phase).unwrap();
        let x = XGrid::new(-100.0, 160.0, 0.25).unwrap();
        let a = fwhm_of(&cpi_interferogram(&l, &h, &x).unwrap());
        let b = fwhm_of(&cpi_interferogram(&l, &hp, &x).unwrap());
        prop_assert_eq!(a.len(), 1);
        prop_assert_eq!(b.len(), 1);
        let shift = 0.5 * SPEED_OF_LIGHT * tau * 1e6;
        prop_assert!((b[0].0 - a[0].0 - shift).abs() < 0.25);
        prop_assert!((b[0].1 / a[0].1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quadratic_phase_broadens_wli(c2 in prop_oneof![-6e-27f64..-3e-28, 3e-28f64..6e-27]) {
        let s = source();
        let h = transfer_function(&LayerStack::mirror(0.3).unwrap(), &s.grid, s.omega0).unwrap();
        let phase: Vec<f64> = s.offsets().iter().map(|w| c2 * w * w).collect();
        let hp = h.with_phase(&phase).unwrap();
        let x = XGrid::new(-120.0, 120.0, 0.05).unwrap();
        let a = fwhm_of(&wli_interferogram(&s, &h, &x).unwrap());
        let b = fwhm_of(&wli_interferogram(&s, &hp, &x).unwrap());
        prop_assert_eq!(a.len(), 1);
        prop_assert_eq!(b.len(), 1);
        prop_assert!(b[0].1 > a[0].1 * (1.0 + 1e-3));
    }

    #[test]
    fn baseline_is_unity(r1 in 0.05f64..0.5, r2 in -0.5f64..0.5, d in 30.0f64..150.0) {
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let stack = LayerStack::slab(r1, r2, d * 1e-6, glass()).unwrap();
        let h = transfer_function(&stack, &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-200.0, 500.0, 1.0).unwrap();
        let scan = cpi_interferogram(&l, &h, &x).unwrap();
        prop_assert!((median(&scan.signal).unwrap() - 1.0).abs() < 0.01);
        prop_assert!(scan.signal.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn thickness_round_trip_through_engine(d in 60.0f64..200.0, sellmeier in any::<bool>()) {
        let material = if sellmeier { DispersiveMaterial::bk7() } else { glass() };
        let s = source();
        let l = EffectiveSpectrum::cpi_product(&s, &s).unwrap();
        let stack = LayerStack::slab(0.2, 0.2, d * 1e-6, material.clone()).unwrap();
        let h = transfer_function(&stack, &s.grid, s.omega0).unwrap();
        let x = XGrid::new(-60.0, 380.0, 0.5).unwrap();
        let scan = cpi_interferogram(&l, &h, &x).unwrap();
        let dips: Vec<f64> = detect_features(&scan, &DetectOptions::default())
            .unwrap()
            .iter()
            .filter(|f| f.polarity == Polarity::Dip && f.visibility < -0.4)
            .map(|f| f.center_um)
            .collect();
        prop_assert!(dips.len() >= 2);
        let sep = dips.last().unwrap() - dips[0];
        let got = thickness_from_dips(sep, &material, 790e-9).unwrap();
        prop_assert!((got / d - 1.0).abs() < 2e-3, "{} vs {}", got, d);
    }

    #[test]
    fn scan_csv_round_trip_is_bitwise(
        values in prop::collection::vec(-1e300f64..1e300, 1..60),
        start in -1e4f64..1e4,
        step in 1e-6f64..10.0,
        omega0 in 1e14f64..1e16,
    ) {
        let scan = Interferogram {
            kind: ScanKind::Wli,
            x_um: (0..values.len()).map(|i| start + step * i as f64).collect(),
            signal: values,
            omega0,
            scenario_id: Some("p".into()),
        };
        let header = ScanHeader { scenario_hash: None, x_offset_um: start };
        let (back, h) = parse_scan(&format_scan(&scan, &header)).unwrap();
        prop_assert_eq!(back.kind, scan.kind);
        prop_assert_eq!(back.omega0.to_bits(), scan.omega0.to_bits());
        for (a, b) in back.x_um.iter().zip(&scan.x_um).chain(back.signal.iter().zip(&scan.signal)) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(h, header);
    }

    #[test]
    fn synthetic_features_are_recovered(c1 in -50.0f64..0.0, w in 10.0f64..30.0, depth in 0.2f64..0.9, sep in 6.0f64..9.0) {
        let c2 = c1 + sep * w;
        let x: Vec<f64> = (0..3000).map(|i| -200.0 + 0.25 * i as f64).collect();
        let g = |v: f64, c: f64| (-4.0 * std::f64::consts::LN_2 * (v - c).powi(2) / (w * w)).exp();
        let scan = Interferogram {
            kind: ScanKind::Cpi,
            signal: x.iter().map(|&v| 1.0 - depth * g(v, c1) + 0.3 * g(v, c2)).collect(),
            x_um: x,
            omega0: omega_from_wavelength(790e-9),
            scenario_id: None,
        };
        let f = detect_features(&scan, &DetectOptions::default()).unwrap();
        prop_assert_eq!(f.len(), 2);
        prop_assert!((f[0].center_um - c1).abs() <= 0.25);
        prop_assert!((f[1].center_um - c2).abs() <= 0.25);
        prop_assert!((f[0].fwhm_um / w - 1.0).abs() < 0.02);
        prop_assert!((f[1].fwhm_um / w - 1.0).abs() < 0.02);
    }

    #[test]
    fn visibility_ignores_uniform_rescaling(k in 0.95f64..1.05) {
        let x: Vec<f64> = (0..2000).map(|i| -250.0 + 0.25 * i as f64).collect();
        let g = |v: f64, c: f64| (-4.0 * std::f64::consts::LN_2 * (v - c).powi(2) / 400.0).exp();
        let signal: Vec<f64> = x.iter().map(|&v| 1.0 - 0.6 * g(v, 0.0) + 0.2 * g(v, 120.0)).collect();
        let base = Interferogram {
            kind: ScanKind::Cpi,
            x_um: x,
            signal,
            omega0: omega_from_wavelength(790e-9),
            scenario_id: None,
        };
        let mut scaled = base.clone();
        scaled.signal.iter_mut().for_each(|v| *v *= k);
        let fa = detect_features(&base, &DetectOptions::default()).unwrap();
        let fb = detect_features(&scaled, &DetectOptions::default()).unwrap();
        prop_assert_eq!(fa.len(), 2);
        for (a, b) in fa.iter().zip(&fb) {
            let va = visibility(&base, a, &fa).unwrap();
            let vb = visibility(&scaled, b, &fb).unwrap();
            prop_assert!((va - vb).abs() < 1e-9);
        }
    }

    #[test]
    fn hash_tracks_physics_only(d in 50.0f64..300.0, label in "[a-z]{1,12}") {
        let base = preset("fig2a").unwrap();
        let mut relabelled = base.clone();
        relabelled.description = label.clone();
        relabelled.id = label;
        prop_assert_eq!(base.scenario_hash(), relabelled.scenario_hash());
        let mut changed = base.clone();
        changed.sample.gaps[0].d_um = d;
        prop_assert_eq!(changed.scenario_hash() == base.scenario_hash(), d == base.sample.gaps[0].d_um);
    }
}
