//! Backward adjoint waves for a single-microphone twin.

use adjsound_core::adjoint::{run_adjoint, ObjectiveSpec};
use adjsound_core::forward::{run_forward, MicrophoneArray, MonopoleSource, SolverConfig, SourceSet, SpongeLayer};
use adjsound_core::{build_grid, GasModel};
use std::time::Instant;

const EMIT: usize = 20;

fn setup() -> (SolverConfig, SourceSet, MicrophoneArray) {
    let g = build_grid(&[0.63, 0.63], &[64, 64]).unwrap();
    let gas = GasModel::air();
    let dt = 0.5 * g.spacing(0) / gas.sound_speed();
    let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, 150.0 * dt).unwrap();
    cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 8));
    let impulse = (0..=cfg.steps)
        .map(|n| {
            let t = (n as f64 - EMIT as f64) / 4.0;
            1e4 * (-t * t).exp()
        })
        .collect();
    let src = MonopoleSource::new(&g, &[0.2, 0.2], 2.0 * g.spacing(0), impulse).unwrap();
    let mic = MicrophoneArray::new(vec![[0.42, 0.35, 0.0]]);
    (cfg, SourceSet::new(vec![src]), mic)
}

#[test]
fn impulse_mismatch_returns_to_the_source_at_emission_time() {
    let (cfg, reference, mic) = setup();
    let g = cfg.grid;
    let target = run_forward(&cfg, &reference, &mic).unwrap().recording.samples;
    let objective = ObjectiveSpec::new(&g, &mic, target).unwrap();
    let mut run = run_forward(&cfg, &SourceSet::default(), &mic).unwrap();
    let adjoint = run_adjoint(&mut run, &objective).unwrap();

    let h = g.spacing(0);
    let src = g.nearest_node(&[0.2, 0.2]).unwrap();
    let m = objective.mic_nodes()[0];
    let dist = |a: usize, b: usize| {
        let (pa, pb) = (g.position(a), g.position(b));
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    };
    let range = dist(src, m);
    let peak = |node: usize| (EMIT - 8..=EMIT + 8).map(|n| adjoint.p_star(n)[node].abs()).fold(0.0, f64::max);
    let at_source = peak(src);
    assert!(at_source > 0.0);
    // One microphone only resolves range: the backward wave is a ring about
    // the microphone that passes the source node when the source emitted.
    for node in 0..g.len() {
        if (dist(node, m) - range).abs() >= 5.0 * h {
            assert!(peak(node) < at_source, "node {node}: {} vs {at_source}", peak(node));
        }
    }
}

#[test]
fn backward_sweep_costs_about_a_forward_sweep() {
    let (cfg, reference, mic) = setup();
    let target = run_forward(&cfg, &reference, &mic).unwrap().recording.samples;
    let objective = ObjectiveSpec::new(&cfg.grid, &mic, target).unwrap();
    let mut best = (f64::MAX, f64::MAX);
    for _ in 0..2 {
        let t0 = Instant::now();
        let mut run = run_forward(&cfg, &SourceSet::default(), &mic).unwrap();
        let forward = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        run_adjoint(&mut run, &objective).unwrap();
        let backward = t1.elapsed().as_secs_f64();
        best = (best.0.min(forward), best.1.min(backward));
    }
    assert!(best.1 < 2.0 * best.0, "forward {:.3}s, adjoint {:.3}s", best.0, best.1);
}
