//! Built-in verification suite: discretization orders, free-field
//! propagation, boundary transparency, adjoint duality and the adjoint
//! gradient against finite differences.

use crate::error::AppResult;
use adjsound_core::adjoint::{
    evaluate_objective, gradient_wrt_source_signal, run_adjoint, run_adjoint_forced, run_tangent, AdjointForcing, ObjectiveSpec,
};
use adjsound_core::forward::{run_forward, ForwardSolver, MicrophoneArray, MonopoleSource, SolverConfig, SourceSet, SpongeLayer};
use adjsound_core::numerics::{compact_d1, rk4_advance, CompactScheme};
use adjsound_core::{build_grid, GasModel, Grid, ScalarField, StateField};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::time::Instant;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Measured quantity with its threshold, human readable.
    pub detail: String,
    pub passed: bool,
    pub seconds: f64,
    /// SHA-256 over the bit patterns of every number the check computed.
    pub digest: String,
}

/// Accumulates numbers into a digest.
#[derive(Default)]
pub struct Fingerprint(Sha256);

impl Fingerprint {
    pub fn add(&mut self, v: f64) {
        self.0.update(v.to_bits().to_le_bytes());
    }

    pub fn add_bytes(&mut self, bytes: &[u8]) {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn extend<'a>(&mut self, values: impl IntoIterator<Item = &'a f64>) {
        for v in values {
            self.add(*v);
        }
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn timed(name: &'static str, body: impl FnOnce(&mut Fingerprint) -> AppResult<(bool, String)>) -> AppResult<Check> {
    let start = Instant::now();
    let mut fp = Fingerprint::default();
    let (passed, detail) = body(&mut fp)?;
    Ok(Check {
        name,
        detail,
        passed,
        seconds: start.elapsed().as_secs_f64(),
        digest: fp.finish(),
    })
}

/// Observed order of the compact first derivative on `sin(2πx)` over the
/// central half of the line, from 32 to 64 to 128 nodes. Passes at >= 5.5.
pub fn scheme_order() -> AppResult<Check> {
    timed("scheme order", |fp| {
        let counts = [32usize, 64, 128];
        let mut errors = Vec::new();
        for &n in &counts {
            let g = build_grid(&[1.0, 1.0], &[n, 8])?;
            let s = CompactScheme::for_grid(&g)?;
            let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
            let d = compact_d1(&f, 0, &s)?;
            let mut e: f64 = 0.0;
            for idx in 0..g.len() {
                let x = g.position(idx)[0];
                if (0.25..=0.75).contains(&x) {
                    e = e.max((d.values()[idx] - 2.0 * PI * (2.0 * PI * x).cos()).abs());
                }
            }
            fp.extend(d.values());
            errors.push(e);
        }
        let orders: Vec<f64> = (0..2)
            .map(|k| (errors[k] / errors[k + 1]).ln() / ((counts[k + 1] - 1) as f64 / (counts[k] - 1) as f64).ln())
            .collect();
        let worst = orders[0].min(orders[1]);
        Ok((worst >= 5.5, format!("observed order {:.3}, {:.3} (>= 5.5)", orders[0], orders[1])))
    })
}

/// Observed order of RK4 on `y'' = -y` over ten time units, 100 against
/// 200 steps. Passes at >= 3.9.
pub fn rk4_order() -> AppResult<Check> {
    timed("integrator order", |fp| {
        let error = |steps: usize, fp: &mut Fingerprint| -> AppResult<f64> {
            let horizon = 10.0;
            let dt = horizon / steps as f64;
            let mut y = vec![1.0, 0.0];
            for n in 0..steps {
                y = rk4_advance(&y, n as f64 * dt, dt, |s, _| Ok(vec![s[1], -s[0]]))?;
            }
            fp.extend(&y);
            Ok((y[0] - horizon.cos()).hypot(y[1] + horizon.sin()))
        };
        let (e1, e2) = (error(100, fp)?, error(200, fp)?);
        let order = (e1 / e2).log2();
        Ok((order >= 3.9, format!("observed order {order:.3} (>= 3.9)")))
    })
}

/// Quiescent state plus a Gaussian pressure bump with matching density.
fn pressure_bump(g: &Grid, gas: &GasModel, center: [f64; 2], radius: f64, amp: f64) -> StateField {
    let mut q = StateField::quiescent(g, gas);
    let c2 = gas.sound_speed().powi(2);
    for i in 0..g.len() {
        let x = g.position(i);
        let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
        let dp = amp * (-r2 / (radius * radius)).exp();
        q.p_mut()[i] += dp;
        q.rho_mut()[i] += dp / c2;
    }
    q
}

/// Parabola-refined time of the largest sample.
fn peak_time(trace: &[f64], dt: f64) -> f64 {
    let k = (1..trace.len() - 1)
        .max_by(|&a, &b| trace[a].total_cmp(&trace[b]))
        .expect("trace has interior samples");
    let (a, b, c) = (trace[k - 1], trace[k], trace[k + 1]);
    (k as f64 + 0.5 * (a - c) / (a - 2.0 * b + c)) * dt
}

/// Arrival-time speed of a 2D pressure pulse between two microphones on a
/// 128² grid. Passes within 1% of the sound speed.
pub fn propagation_speed() -> AppResult<Check> {
    timed("propagation speed", |fp| {
        let g = build_grid(&[1.27, 1.27], &[128, 128])?;
        let gas = GasModel::air();
        let c = gas.sound_speed();
        let dt = 0.5 * g.spacing(0) / c;
        let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, 0.45 / c)?;
        cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 12));
        let mics = MicrophoneArray::new(vec![[0.835, 0.635, 0.0], [1.035, 0.635, 0.0]]);
        let nodes = mics.snap(&g)?;
        let solver = ForwardSolver::new(&cfg, &SourceSet::default())?;
        let (_, rec) = solver.run(Some(pressure_bump(&g, &gas, [0.635, 0.635], 0.03, 10.0)), &nodes, |_, _| {})?;
        rec.samples.iter().for_each(|s| fp.extend(s));
        let (t1, t2) = (peak_time(&rec.samples[0], dt), peak_time(&rec.samples[1], dt));
        let speed = (g.position(nodes[1])[0] - g.position(nodes[0])[0]) / (t2 - t1);
        let rel = (speed - c).abs() / c;
        Ok((rel < 0.01, format!("{speed:.2} m/s, deviation {:.3}% (< 1%)", 100.0 * rel)))
    })
}

/// Acoustic energy `Σ (p'²/(2ρc²) + ρ|u|²/2) ΔV`.
fn acoustic_energy(q: &StateField, g: &Grid, gas: &GasModel) -> f64 {
    let rc2 = gas.rho_ref * gas.sound_speed().powi(2);
    let mut e = 0.0;
    for i in 0..g.len() {
        let dp = q.p()[i] - gas.p_ref;
        let u2: f64 = (0..g.dim()).map(|a| q.u(a)[i].powi(2)).sum();
        e += dp * dp / (2.0 * rc2) + 0.5 * gas.rho_ref * u2;
    }
    e * g.cell_volume()
}

/// Energy left on a 128² grid after a central pulse had 2.5 m of travel,
/// relative to the peak energy. Passes below 0.5%.
pub fn boundary_residual() -> AppResult<Check> {
    timed("boundary residual", |fp| {
        let g = build_grid(&[1.27, 1.27], &[128, 128])?;
        let gas = GasModel::air();
        let c = gas.sound_speed();
        let dt = 0.5 * g.spacing(0) / c;
        let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, 2.5 / c)?;
        cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 16));
        let initial = pressure_bump(&g, &gas, [0.635, 0.635], 0.03, 10.0);
        let mut peak = acoustic_energy(&initial, &g, &gas);
        let mut last = 0.0;
        let steps = cfg.steps;
        let solver = ForwardSolver::new(&cfg, &SourceSet::default())?;
        let mut energies = Vec::new();
        solver.run(Some(initial), &[], |n, s| {
            if n % 20 == 0 || n == steps {
                let e = acoustic_energy(s, &g, &gas);
                energies.push(e);
                peak = peak.max(e);
                last = e;
            }
        })?;
        fp.extend(&energies);
        let ratio = last / peak;
        Ok((ratio < 5e-3, format!("residual energy {:.3e} of peak (< 5e-3)", ratio)))
    })
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth random pulse on `[t0, t1]` seconds.
fn random_pulse(rng: &mut ChaCha8Rng, levels: usize, dt: f64, t0: f64, t1: f64) -> Vec<f64> {
    let f = (1.0 + 2.0 * uniform(rng)) / (t1 - t0);
    let phase = 2.0 * PI * uniform(rng);
    let amp = 0.5 + uniform(rng);
    (0..levels)
        .map(|n| {
            let t = n as f64 * dt;
            if t <= t0 || t >= t1 {
                0.0
            } else {
                let s = (PI * (t - t0) / (t1 - t0)).sin();
                amp * s.powi(4) * (2.0 * PI * f * (t - t0) + phase).sin()
            }
        })
        .collect()
}

/// `|<g, dq> - <q*, ds>| / |<g, dq>|` on an `n`² grid over 0.31 m for the
/// duration of 50 steps on the 32² grid.
pub fn duality_residual(n: usize, seed: u64, fp: &mut Fingerprint) -> AppResult<f64> {
    let side = 0.31;
    let g = build_grid(&[side, side], &[n, n])?;
    let gas = GasModel::air();
    let dt = 0.5 * g.spacing(0) / gas.sound_speed();
    let duration = 50.0 * 0.5 * 0.01 / gas.sound_speed();
    let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, duration)?;
    cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 4 * n / 32));
    let levels = cfg.steps + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hw = 0.02;
    let t_end = cfg.duration();
    let at = |rng: &mut ChaCha8Rng, x: f64, y: f64| [x + 0.02 * uniform(rng), y + 0.02 * uniform(rng)];
    let src_at = at(&mut rng, 0.10, 0.15);
    let ds = SourceSet::new(vec![MonopoleSource::new(&g, &src_at, hw, random_pulse(&mut rng, levels, cfg.dt, 0.0, 0.45 * t_end))?]);
    let obs_at = at(&mut rng, 0.20, 0.15);
    let forcing = AdjointForcing::new(vec![MonopoleSource::new(
        &g,
        &obs_at,
        hw,
        random_pulse(&mut rng, levels, cfg.dt, 0.35 * t_end, 0.95 * t_end),
    )?]);

    let mut run = run_forward(&cfg, &SourceSet::default(), &MicrophoneArray::new(vec![]))?;
    let mut lhs = 0.0;
    run_tangent(&run.solver, None, &ds, |k, dq| {
        let gk = forcing.field(&g, k)?;
        lhs += gk.values().iter().zip(dq.p()).map(|(a, b)| a * b).sum::<f64>();
        Ok(())
    })?;
    let adj = run_adjoint_forced(&mut run, &forcing)?;
    let mut rhs = 0.0;
    let mut s = vec![0.0; g.len()];
    for k in 0..levels {
        s.iter_mut().for_each(|v| *v = 0.0);
        ds.scatter(&g, k as f64, 1.0, &mut s)?;
        rhs += s.iter().zip(adj.p_star(k)).map(|(a, b)| a * b).sum::<f64>();
        fp.extend(adj.p_star(k));
    }
    fp.add(lhs);
    fp.add(rhs);
    Ok((lhs - rhs).abs() / lhs.abs())
}

/// Duality residual below 1% on 32² for three random draws, each smaller
/// after one refinement.
pub fn duality() -> AppResult<Check> {
    timed("duality", |fp| {
        let mut ok = true;
        let mut parts = Vec::new();
        for seed in [1u64, 2, 3] {
            let coarse = duality_residual(32, seed, fp)?;
            let fine = duality_residual(64, seed, fp)?;
            ok &= coarse < 1e-2 && fine < coarse;
            parts.push(format!("{coarse:.2e} -> {fine:.2e}"));
        }
        Ok((ok, format!("residual 32² -> 64²: {} (< 1e-2, decreasing)", parts.join(", "))))
    })
}

fn gaussian_bump(levels: usize, dt: f64, t0: f64, width: f64, amp: f64) -> Vec<f64> {
    (0..levels)
        .map(|n| {
            let t = (n as f64 * dt - t0) / width;
            amp * (-t * t).exp()
        })
        .collect()
}

/// Relative L2 error of the adjoint signal gradient against central
/// differences of `J` at ten random samples, on an `n`² grid over 0.47 m
/// and `steps` steps at CFL 0.5.
pub fn gradient_error(n: usize, steps: usize, fp: &mut Fingerprint) -> AppResult<f64> {
    let side = 0.47;
    let g = build_grid(&[side, side], &[n, n])?;
    let gas = GasModel::air();
    let h = g.spacing(0);
    let dt = 0.5 * h / gas.sound_speed();
    let mut cfg = SolverConfig::new(&g, &gas, 1.0 / dt, steps as f64 * dt)?;
    cfg.sponge = Some(SpongeLayer::with_width(&g, &gas, 6 * n / 48));
    let levels = cfg.steps + 1;
    let t_end = cfg.duration();
    let at = [0.3 * side, 0.4 * side];
    let mic = MicrophoneArray::new(vec![[0.65 * side, 0.55 * side, 0.0]]);
    let hw = 2.0 * h;

    let reference = gaussian_bump(levels, dt, 0.3 * t_end, 0.25 * t_end, 1e3);
    let reference = SourceSet::new(vec![MonopoleSource::new(&g, &at, hw, reference)?]);
    let target = run_forward(&cfg, &reference, &mic)?.recording.samples;
    let objective = ObjectiveSpec::new(&g, &mic, target)?;

    let current = gaussian_bump(levels, dt, 0.35 * t_end, 0.3 * t_end, 6e2);
    let source = MonopoleSource::new(&g, &at, hw, current.clone())?;
    let objective_for = |signal: Vec<f64>| -> AppResult<f64> {
        let run = run_forward(&cfg, &SourceSet::new(vec![source.with_signal(signal)]), &mic)?;
        Ok(evaluate_objective(&run.recording, &objective, &g, dt)?)
    };
    let mut run = run_forward(&cfg, &SourceSet::new(vec![source.clone()]), &mic)?;
    let adjoint = run_adjoint(&mut run, &objective)?;
    let grad = gradient_wrt_source_signal(&adjoint, &source);
    fp.extend(&grad);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..10 {
        // Samples in the first 80% of the run still reach the microphone.
        let k = 1 + (uniform(&mut rng) * 0.8 * steps as f64) as usize;
        let eps = 10.0;
        let (mut up, mut down) = (current.clone(), current.clone());
        up[k] += eps;
        down[k] -= eps;
        let fd = (objective_for(up)? - objective_for(down)?) / (2.0 * eps);
        let adj = grad[k] * dt;
        fp.add(fd);
        num += (fd - adj).powi(2);
        den += fd * fd;
    }
    Ok((num / den).sqrt())
}

/// Gradient error below 2% on 48² / 300 steps and smaller than on
/// 24² / 150 steps.
pub fn gradient_oracle() -> AppResult<Check> {
    timed("gradient oracle", |fp| {
        let coarse = gradient_error(24, 150, fp)?;
        let desk = gradient_error(48, 300, fp)?;
        Ok((
            desk < 0.02 && desk < coarse,
            format!("relative error 48² {:.3}% (< 2%), 24² {:.3}%", 100.0 * desk, 100.0 * coarse),
        ))
    })
}

/// Every check, in order.
pub fn suite() -> AppResult<Vec<Check>> {
    Ok(vec![
        scheme_order()?,
        rk4_order()?,
        propagation_speed()?,
        boundary_residual()?,
        duality()?,
        gradient_oracle()?,
    ])
}
