//! Adjoint signal gradients against central differences of the objective.

use adjsound_core::adjoint::{evaluate_objective, gradient_wrt_source_signal, run_adjoint, ObjectiveSpec};
use adjsound_core::forward::{run_forward, MicrophoneArray, MonopoleSource, SolverConfig, SourceSet, SpongeLayer};
use adjsound_core::{build_grid, GasModel};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(levels: usize, dt: f64, t0: f64, width: f64, amp: f64) -> Vec<f64> {
    (0..levels)
        .map(|n| {
            let t = (n as f64 * dt - t0) / width;
            amp * (-t * t).exp()
        })
        .collect()
}

/// Relative L2 error of the adjoint gradient over ten random samples, for a
/// 0.47 m square with `n` nodes per side and `steps` steps at CFL 0.5.
fn gradient_error(n: usize, steps: usize) -> f64 {
    let side = 0.47;
    let g = build_grid(&[side, side], &[n, n]).unwrap();
    let gas = GasModel::air();
    let h = g.spacing(0);
    let dt = 0.5 * h / gas.sound_speed();
    let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, steps as f64 * dt).unwrap();
    cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 6 * n / 48));
    let levels = cfg.steps + 1;
    let t_end = cfg.duration();
    let at = [0.3 * side, 0.4 * side];
    let mic = MicrophoneArray::new(vec![[0.65 * side, 0.55 * side, 0.0]]);
    let hw = 2.0 * h;

    let reference = bump(levels, dt, 0.3 * t_end, 0.25 * t_end, 1e3);
    let reference = SourceSet::new(vec![MonopoleSource::new(&g, &at, hw, reference).unwrap()]);
    let target = run_forward(&cfg, &reference, &mic).unwrap().recording.samples;
    let objective = ObjectiveSpec::new(&g, &mic, target).unwrap();

    let current = bump(levels, dt, 0.35 * t_end, 0.3 * t_end, 6e2);
    let source = MonopoleSource::new(&g, &at, hw, current.clone()).unwrap();
    let objective_for = |signal: Vec<f64>| {
        let run = run_forward(&cfg, &SourceSet::new(vec![source.with_signal(signal)]), &mic).unwrap();
        evaluate_objective(&run.recording, &objective, &g, dt).unwrap()
    };
    let mut run = run_forward(&cfg, &SourceSet::new(vec![source.clone()]), &mic).unwrap();
    let adjoint = run_adjoint(&mut run, &objective).unwrap();
    let grad = gradient_wrt_source_signal(&adjoint, &source);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..10 {
        // Samples in the first 80% of the run, where the mismatch still
        // reaches the microphone.
        let frac = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let k = 1 + (frac * 0.8 * steps as f64) as usize;
        let eps = 10.0;
        let (mut up, mut down) = (current.clone(), current.clone());
        up[k] += eps;
        down[k] -= eps;
        let fd = (objective_for(up) - objective_for(down)) / (2.0 * eps);
        let adj = grad[k] * dt;
        num += (fd - adj).powi(2);
        den += fd * fd;
    }
    (num / den).sqrt()
}

#[test]
fn gradient_matches_central_differences_and_improves() {
    let coarse = gradient_error(24, 150);
    let desk = gradient_error(48, 300);
    eprintln!("gradient error: 24² {coarse:e}, 48² {desk:e}");
    assert!(desk < 0.02, "{desk:e}");
    assert!(desk < coarse, "{desk:e} vs {coarse:e}");
}
