//! Randomized invariants of the numerics, localization and signal layers.

use adjsound_core::forward::{MonopoleSource, SourceSet};
use adjsound_core::localize::{detect_peaks, Region, SensitivityMap};
use adjsound_core::numerics::{compact_d1, compact_filter_apply, CompactFilter, CompactScheme};
use adjsound_core::optimize::descent_step;
use adjsound_core::signal::{generate_signal, Gate, SignalKind, SignalSpec};
use adjsound_core::{build_grid, ScalarField};
use proptest::prelude::*;

fn field(n: [usize; 2], values: &[f64]) -> ScalarField {
    let g = build_grid(&[1.0, 0.7], &n).unwrap();
    ScalarField::from_values(&g, values[..g.len()].to_vec()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_is_linear(
        nx in 8usize..24, ny in 8usize..16, axis in 0usize..2,
        a in -3.0f64..3.0, b in -3.0f64..3.0,
        f in prop::collection::vec(-1.0f64..1.0, 24 * 16),
        g in prop::collection::vec(-1.0f64..1.0, 24 * 16),
    ) {
        let (ff, gg) = (field([nx, ny], &f), field([nx, ny], &g));
        let grid = *ff.grid();
        let combined: Vec<f64> = ff.values().iter().zip(gg.values()).map(|(x, y)| a * x + b * y).collect();
        let s = CompactScheme::for_grid(&grid).unwrap();
        let dc = compact_d1(&ScalarField::from_values(&grid, combined).unwrap(), axis, &s).unwrap();
        let (df, dg) = (compact_d1(&ff, axis, &s).unwrap(), compact_d1(&gg, axis, &s).unwrap());
        let expected: Vec<f64> = df.values().iter().zip(dg.values()).map(|(x, y)| a * x + b * y).collect();
        let scale = 1.0 + expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(dc.values(), &expected) < 1e-11 * scale);
    }

    #[test]
    fn filter_keeps_constants(
        nx in 8usize..40, ny in 8usize..24, axis in 0usize..2,
        c in -1e5f64..1e5, alpha in 0.3f64..0.5,
    ) {
        let grid = build_grid(&[1.0, 0.7], &[nx, ny]).unwrap();
        let filter = CompactFilter::for_grid(&grid, alpha).unwrap();
        let out = compact_filter_apply(&ScalarField::constant(&grid, c), axis, &filter).unwrap();
        prop_assert!(out.values().iter().all(|v| (v - c).abs() <= 1e-12 * (1.0 + c.abs())));
    }

    #[test]
    fn peaks_respect_count_order_and_exclusion(
        count in 1usize..6, radius_cells in 1.0f64..8.0,
        values in prop::collection::vec(0.0f64..1.0, 20 * 20),
    ) {
        let grid = build_grid(&[1.0, 1.0], &[20, 20]).unwrap();
        let mut map = SensitivityMap::new(&grid, 0..1).unwrap();
        map.accumulate(0, &values);
        let radius = radius_cells * grid.spacing(0);
        let set = detect_peaks(&map, count, radius, &Region::All).unwrap();
        prop_assert!(!set.peaks.is_empty() && set.peaks.len() <= count);
        for (i, p) in set.peaks.iter().enumerate() {
            prop_assert_eq!(p.value, values[p.node]);
            if i > 0 {
                prop_assert!(p.value <= set.peaks[i - 1].value);
            }
            for q in &set.peaks[..i] {
                let d = ((p.position[0] - q.position[0]).powi(2) + (p.position[1] - q.position[1]).powi(2)).sqrt();
                prop_assert!(d >= radius);
            }
        }
    }

    #[test]
    fn signals_are_reproducible_and_bounded(
        seed in any::<u64>(), amplitude in 0.1f64..1e3, levels in 64usize..600,
        start in 0usize..100, length in 1usize..400, taper in 0.0f64..0.5,
    ) {
        let dt = 1.0 / 48_000.0;
        let kinds = [
            SignalKind::BandNoise { low_hz: 500.0, high_hz: 4000.0, seed },
            SignalKind::LogSweep { start_hz: 1000.0, end_hz: 3000.0 },
            SignalKind::Harmonic { freq_hz: 2000.0 },
        ];
        for kind in kinds {
            let spec = SignalSpec::new(kind, amplitude);
            let a = generate_signal(&spec, levels, dt).unwrap();
            prop_assert_eq!(&a, &generate_signal(&spec, levels, dt).unwrap());
            prop_assert_eq!(a.len(), levels);
            prop_assert!(a.iter().all(|v| v.is_finite() && v.abs() <= amplitude * (1.0 + 1e-12)));
            let gated = generate_signal(&spec.clone().gated(Gate { start, length, taper }), levels, dt).unwrap();
            prop_assert!(gated.iter().enumerate().all(|(i, v)| (i >= start && i < start + length) || *v == 0.0));
            prop_assert!(gated.iter().all(|v| v.abs() <= amplitude * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn zero_step_keeps_sources(
        signals in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 40), 1..4),
        grads in prop::collection::vec(-1e3f64..1e3, 40),
    ) {
        let grid = build_grid(&[1.0, 1.0], &[16, 16]).unwrap();
        let sources = SourceSet::new(
            signals.iter().enumerate()
                .map(|(k, s)| MonopoleSource::new(&grid, &[0.2 + 0.15 * k as f64, 0.5], 0.1, s.clone()).unwrap())
                .collect(),
        );
        let gradients = vec![grads; signals.len()];
        let stepped = descent_step(&sources, &gradients, 0.0).unwrap();
        prop_assert_eq!(stepped.signals(), signals);
    }
}
