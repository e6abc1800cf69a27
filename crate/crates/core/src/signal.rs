//! Source signal generators: logarithmic sweeps, band-limited noise and
//! ramped harmonics.

use crate::error::{Error, Result};
use crate::math;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a generated signal.
#[derive(Clone, Debug, PartialEq)]
pub enum SignalKind {
    /// Sine whose instantaneous frequency rises exponentially from
    /// `start_hz` to `end_hz` over the window.
    LogSweep { start_hz: f64, end_hz: f64 },
    /// Seeded white noise band-passed to `[low_hz, high_hz]` with a
    /// zero-phase Butterworth filter, scaled to unit peak.
    BandNoise { low_hz: f64, high_hz: f64, seed: u64 },
    /// Sine with a raised-cosine onset over the first 5% of the window.
    Harmonic { freq_hz: f64 },
    /// Explicit samples, truncated or zero-padded to the window.
    Samples(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub amplitude: f64,
    /// Restricts the signal to part of the window; `None` spans all of it.
    pub gate: Option<Gate>,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, amplitude: f64) -> Self {
        SignalSpec { kind, amplitude, gate: None }
    }

    pub fn gated(mut self, gate: Gate) -> Self {
        self.gate = Some(gate);
        self
    }
}

/// The signal is generated over `length` levels, faded in and out with
/// raised-cosine edges of `taper` times its length each, and placed from
/// level `start` on. Levels outside the gate are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub start: usize,
    pub length: usize,
    pub taper: f64,
}

impl Gate {
    fn weight(&self, i: usize) -> f64 {
        let edge = self.taper * self.length as f64;
        let from_end = (self.length - 1 - i) as f64;
        let d = (i as f64).min(from_end);
        if edge <= 0.0 || d >= edge {
            1.0
        } else {
            0.5 * (1.0 - math::cos(math::PI * d / edge))
        }
    }
}

/// Butterworth order of each band edge.
pub const NOISE_FILTER_ORDER: usize = 4;

/// Fraction of the window used by the harmonic onset ramp.
pub const ONSET_FRACTION: f64 = 0.05;

/// Samples at levels `0..levels` spaced `dt`.
pub fn generate_signal(spec: &SignalSpec, levels: usize, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::config("signal time step must be positive"));
    }
    if let Some(gate) = spec.gate {
        if gate.length == 0 || !(0.0..=0.5).contains(&gate.taper) {
            return Err(Error::config("gate needs length >= 1 and taper in [0, 0.5]"));
        }
        let inner = SignalSpec {
            gate: None,
            ..spec.clone()
        };
        let body = generate_signal(&inner, gate.length, dt)?;
        let mut out = alloc::vec![0.0; levels];
        for (i, v) in body.iter().enumerate() {
            if let Some(o) = out.get_mut(gate.start + i) {
                *o = v * gate.weight(i);
            }
        }
        return Ok(out);
    }
    let nyquist = 0.5 / dt;
    let band = |low: f64, high: f64| {
        if low > 0.0 && low < high && high < nyquist {
            Ok(())
        } else {
            Err(Error::Band { low, high, nyquist })
        }
    };
    let mut s = match &spec.kind {
        SignalKind::LogSweep { start_hz, end_hz } => {
            band(start_hz.min(*end_hz), start_hz.max(*end_hz))?;
            log_sweep(*start_hz, *end_hz, levels, dt)
        }
        SignalKind::BandNoise { low_hz, high_hz, seed } => {
            band(*low_hz, *high_hz)?;
            band_noise(*low_hz, *high_hz, *seed, levels, dt)
        }
        SignalKind::Harmonic { freq_hz } => {
            band(*freq_hz, *freq_hz * (1.0 + f64::EPSILON))?;
            harmonic(*freq_hz, levels, dt)
        }
        SignalKind::Samples(v) => {
            let mut out = v.clone();
            out.resize(levels, 0.0);
            out
        }
    };
    for v in &mut s {
        *v *= spec.amplitude;
    }
    Ok(s)
}

fn log_sweep(f1: f64, f2: f64, levels: usize, dt: f64) -> Vec<f64> {
    let span = (levels.max(2) - 1) as f64 * dt;
    let rate = math::ln(f2 / f1);
    (0..levels)
        .map(|n| {
            let t = n as f64 * dt;
            let phase = if rate == 0.0 {
                2.0 * math::PI * f1 * t
            } else {
                2.0 * math::PI * f1 * span / rate * (math::exp(rate * t / span) - 1.0)
            };
            math::sin(phase)
        })
        .collect()
}

fn harmonic(f: f64, levels: usize, dt: f64) -> Vec<f64> {
    let ramp = ONSET_FRACTION * (levels.max(2) - 1) as f64 * dt;
    (0..levels)
        .map(|n| {
            let t = n as f64 * dt;
            let w = if t < ramp { 0.5 * (1.0 - math::cos(math::PI * t / ramp)) } else { 1.0 };
            w * math::sin(2.0 * math::PI * f * t)
        })
        .collect()
}

fn band_noise(low: f64, high: f64, seed: u64, levels: usize, dt: f64) -> Vec<f64> {
    // Surplus samples on both ends absorb the filter start-up transients.
    let pad = (8.0 / (low * dt)) as usize;
    let total = levels + 2 * pad;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..total).map(|_| gaussian(&mut rng)).collect();
    let sections = butterworth_band(low, high, dt);
    filtfilt(&sections, &mut x);
    let mut out = x[pad..pad + levels].to_vec();
    let peak = out.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    if peak > 0.0 {
        for v in &mut out {
            *v /= peak;
        }
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let (a, b) = (uniform(rng), uniform(rng));
    math::sqrt(-2.0 * math::ln(a)) * math::cos(2.0 * math::PI * b)
}

/// Direct-form biquad `[b0, b1, b2, a1, a2]` with `a0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad([f64; 5]);

impl Biquad {
    fn design(f0: f64, q: f64, dt: f64, highpass: bool) -> Self {
        let w = 2.0 * math::PI * f0 * dt;
        let (s, c) = (math::sin(w), math::cos(w));
        let alpha = s / (2.0 * q);
        let a0 = 1.0 + alpha;
        let (b0, b1) = if highpass { (0.5 * (1.0 + c), -(1.0 + c)) } else { (0.5 * (1.0 - c), 1.0 - c) };
        Biquad([b0 / a0, b1 / a0, b0 / a0, -2.0 * c / a0, (1.0 - alpha) / a0])
    }

    fn apply(&self, x: &mut [f64]) {
        let [b0, b1, b2, a1, a2] = self.0;
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = b0 * *v + z1;
            z1 = b1 * *v - a1 * y + z2;
            z2 = b2 * *v - a2 * y;
            *v = y;
        }
    }

    /// Magnitude response at `f` Hz.
    pub fn gain(&self, f: f64, dt: f64) -> f64 {
        let [b0, b1, b2, a1, a2] = self.0;
        let w = 2.0 * math::PI * f * dt;
        let (c1, s1, c2, s2) = (math::cos(w), math::sin(w), math::cos(2.0 * w), math::sin(2.0 * w));
        let nr = b0 + b1 * c1 + b2 * c2;
        let ni = -(b1 * s1 + b2 * s2);
        let dr = 1.0 + a1 * c1 + a2 * c2;
        let di = -(a1 * s1 + a2 * s2);
        math::sqrt((nr * nr + ni * ni) / (dr * dr + di * di))
    }
}

/// High-pass at `low` cascaded with low-pass at `high`, each a Butterworth
/// of [`NOISE_FILTER_ORDER`] as second-order sections.
pub fn butterworth_band(low: f64, high: f64, dt: f64) -> Vec<Biquad> {
    let n = NOISE_FILTER_ORDER;
    let mut out = Vec::with_capacity(n);
    for k in 0..n / 2 {
        let theta = math::PI * (2 * k + 1) as f64 / (2 * n) as f64;
        let q = 1.0 / (2.0 * math::cos(theta));
        out.push(Biquad::design(low, q, dt, true));
        out.push(Biquad::design(high, q, dt, false));
    }
    out
}

/// Zero-phase filtering: the cascade forward, then backward.
pub fn filtfilt(sections: &[Biquad], x: &mut [f64]) {
    for s in sections {
        s.apply(x);
    }
    x.reverse();
    for s in sections {
        s.apply(x);
    }
    x.reverse();
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn zero_crossings(s: &[f64]) -> Vec<f64> {
        s.windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] <= 0.0 && w[1] > 0.0)
            .map(|(i, w)| i as f64 + w[0] / (w[0] - w[1]))
            .collect()
    }

    #[test]
    fn harmonic_period_in_samples() {
        let rate = 53_330.0;
        let s = generate_signal(&SignalSpec::new(SignalKind::Harmonic { freq_hz: 2000.0 }, 1.0), 4000, 1.0 / rate).unwrap();
        let z = zero_crossings(&s[400..]);
        let period = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
        assert!((period - 26.665).abs() < 1e-4, "{period}");
        assert_eq!(s[0], 0.0);
        // Onset ramp spans 200 samples.
        assert!(s[..20].iter().all(|v| v.abs() < 0.03));
        assert!(s[250..].iter().any(|v| *v > 0.999));
    }

    #[test]
    fn sweep_midpoint_frequency_is_geometric_mean() {
        let dt = 1.0 / 48_000.0;
        let levels = 4801;
        let s = generate_signal(&SignalSpec::new(SignalKind::LogSweep { start_hz: 1000.0, end_hz: 3000.0 }, 1.0), levels, dt).unwrap();
        // Instantaneous frequency from neighbouring upward zero crossings.
        let z = zero_crossings(&s);
        let mid = (levels - 1) as f64 / 2.0;
        let i = z.iter().position(|&t| t > mid).unwrap();
        let f = 1.0 / ((z[i] - z[i - 1]) * dt);
        assert!((f - 3000f64.sqrt() * 1000f64.sqrt()).abs() < 5.0, "{f}");
        assert!((f - 1732.05).abs() < 5.0);
    }

    #[test]
    fn band_noise_is_deterministic_and_band_limited() {
        let dt = 1.0 / 16_000.0;
        let spec = SignalSpec::new(
            SignalKind::BandNoise {
                low_hz: 750.0,
                high_hz: 2500.0,
                seed: 3,
            },
            2.0,
        );
        let a = generate_signal(&spec, 2000, dt).unwrap();
        assert_eq!(a, generate_signal(&spec, 2000, dt).unwrap());
        assert_eq!(a.iter().fold(0.0f64, |m, v| m.max(v.abs())), 2.0);
        let other = SignalSpec::new(
            SignalKind::BandNoise {
                low_hz: 750.0,
                high_hz: 2500.0,
                seed: 4,
            },
            2.0,
        );
        assert_ne!(a, generate_signal(&other, 2000, dt).unwrap());
        // One pass is -3 dB at each edge; the backward pass squares it.
        let sections = butterworth_band(750.0, 2500.0, dt);
        let g = |f: f64| sections.iter().map(|s| s.gain(f, dt)).product::<f64>();
        assert!((g(1370.0) - 1.0).abs() < 0.02);
        assert!((g(750.0) - core::f64::consts::FRAC_1_SQRT_2).abs() < 0.03);
        assert!((g(2500.0) - core::f64::consts::FRAC_1_SQRT_2).abs() < 0.03);
        assert!(g(200.0) < 1e-2 && g(6000.0) < 1e-2);
    }

    #[test]
    fn band_outside_nyquist_rejected() {
        let spec = SignalSpec::new(
            SignalKind::BandNoise {
                low_hz: 750.0,
                high_hz: 9000.0,
                seed: 1,
            },
            1.0,
        );
        assert!(matches!(generate_signal(&spec, 10, 1.0 / 16_000.0), Err(Error::Band { .. })));
        let sweep = SignalSpec::new(SignalKind::LogSweep { start_hz: 0.0, end_hz: 100.0 }, 1.0);
        assert!(generate_signal(&sweep, 10, 1e-3).is_err());
    }

    #[test]
    fn gate_places_and_fades() {
        let dt = 1.0 / 48_000.0;
        let sweep = SignalSpec::new(SignalKind::LogSweep { start_hz: 1000.0, end_hz: 3000.0 }, 2.0);
        let gate = Gate {
            start: 7,
            length: 100,
            taper: 0.1,
        };
        let plain = generate_signal(&sweep, 100, dt).unwrap();
        let gated = generate_signal(&sweep.clone().gated(gate), 150, dt).unwrap();
        assert!(gated[..7].iter().chain(&gated[107..]).all(|v| *v == 0.0));
        assert_eq!(&gated[17..97], &plain[10..90]);
        // Edges span ten levels.
        let w = 0.5 * (1.0 - math::cos(math::PI / 10.0));
        assert!((gated[8] - w * plain[1]).abs() < 1e-12);
        assert!((gated[105] - w * plain[98]).abs() < 1e-12);
        let bad = sweep.gated(Gate { taper: 0.7, ..gate });
        assert!(generate_signal(&bad, 150, dt).is_err());
    }

    #[test]
    fn explicit_samples_are_padded() {
        let s = generate_signal(&SignalSpec::new(SignalKind::Samples(vec![1.0, 2.0]), 3.0), 4, 1e-3).unwrap();
        assert_eq!(s, vec![3.0, 6.0, 0.0, 0.0]);
    }
}
