//! Band-limited comparison of two recorded signals.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Per-bin deviation of a signal from its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct BinDeviation {
    pub freq_hz: f64,
    /// `20 log10(|X| / |X_ref|)`.
    pub amplitude_db: f64,
    /// Phase difference in cycles, wrapped to `[-0.5, 0.5)`.
    pub phase_cycles: f64,
}

/// Discrete Fourier transform of a real sequence.
pub fn spectrum(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Deviations of `signal` from `reference` at every bin inside
/// `[low_hz, high_hz]`. Both are sampled at `rate_hz` over the same window.
pub fn band_deviation(reference: &[f64], signal: &[f64], rate_hz: f64, low_hz: f64, high_hz: f64) -> Vec<BinDeviation> {
    assert_eq!(reference.len(), signal.len(), "signals differ in length");
    let n = reference.len();
    let (a, b) = (spectrum(reference), spectrum(signal));
    let df = rate_hz / n as f64;
    (0..=n / 2)
        .map(|k| (k, k as f64 * df))
        .filter(|(_, f)| *f >= low_hz && *f <= high_hz)
        .map(|(k, freq_hz)| {
            let ratio = b[k] / a[k];
            let cycles = ratio.arg() / (2.0 * std::f64::consts::PI);
            BinDeviation {
                freq_hz,
                amplitude_db: 20.0 * ratio.norm().log10(),
                phase_cycles: cycles - (cycles + 0.5).floor(),
            }
        })
        .collect()
}

/// Largest `|amplitude_db|` and `|phase_cycles|` over the bins.
pub fn worst(bins: &[BinDeviation]) -> (f64, f64) {
    bins.iter()
        .fold((0.0f64, 0.0f64), |(a, p), b| (a.max(b.amplitude_db.abs()), p.max(b.phase_cycles.abs())))
}
