//! Monopole pressure sources with fixed spatial support.

use crate::blob::SparseBlob;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use alloc::format;
use alloc::vec::Vec;

/// Linear interpolation of per-level samples at a fractional level; zero
/// past the last sample.
#[inline]
pub fn sample_at(samples: &[f64], level: f64) -> f64 {
    if samples.is_empty() || level < 0.0 {
        return 0.0;
    }
    let i = math::floor(level) as usize;
    let f = level - i as f64;
    match (samples.get(i), samples.get(i + 1)) {
        (Some(&a), Some(&b)) => a + f * (b - a),
        (Some(&a), None) if f == 0.0 => a,
        _ => 0.0,
    }
}

/// Gaussian-supported source whose time signal is the free parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct MonopoleSource {
    blob: SparseBlob,
    signal: Vec<f64>,
}

impl MonopoleSource {
    pub fn new(grid: &Grid, center: &[f64], half_width: f64, signal: Vec<f64>) -> Result<Self> {
        Ok(MonopoleSource {
            blob: SparseBlob::new(grid, center, half_width)?,
            signal,
        })
    }

    /// Source on an existing support.
    pub fn from_blob(blob: SparseBlob, signal: Vec<f64>) -> Self {
        MonopoleSource { blob, signal }
    }

    pub fn center(&self) -> [f64; 3] {
        self.blob.center
    }

    pub fn half_width(&self) -> f64 {
        self.blob.half_width
    }

    pub fn blob(&self) -> &SparseBlob {
        &self.blob
    }

    /// One value per time level.
    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn signal_mut(&mut self) -> &mut Vec<f64> {
        &mut self.signal
    }

    pub fn with_signal(&self, signal: Vec<f64>) -> Self {
        MonopoleSource {
            blob: self.blob.clone(),
            signal,
        }
    }
}

/// Source following a prescribed path, one position per time level.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingSource {
    path: Vec<[f64; 3]>,
    half_width: f64,
    signal: Vec<f64>,
}

impl MovingSource {
    pub fn new(grid: &Grid, path: Vec<[f64; 3]>, half_width: f64, signal: Vec<f64>) -> Result<Self> {
        if path.len() != signal.len() {
            return Err(Error::shape(format!(
                "{} path positions for {} signal samples",
                path.len(),
                signal.len()
            )));
        }
        if let Some(p) = path.iter().find(|p| !grid.contains(&p[..])) {
            return Err(Error::OutsideDomain { position: *p });
        }
        if !(half_width > 0.0) {
            return Err(Error::config("source half-width must be > 0"));
        }
        Ok(MovingSource {
            path,
            half_width,
            signal,
        })
    }

    pub fn path(&self) -> &[[f64; 3]] {
        &self.path
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Position at a fractional level.
    pub fn position_at(&self, level: f64) -> [f64; 3] {
        let last = self.path.len() - 1;
        let l = level.clamp(0.0, last as f64);
        let i = (math::floor(l) as usize).min(last);
        let f = l - i as f64;
        let a = self.path[i];
        let b = self.path[(i + 1).min(last)];
        [
            a[0] + f * (b[0] - a[0]),
            a[1] + f * (b[1] - a[1]),
            a[2] + f * (b[2] - a[2]),
        ]
    }
}

/// All sources acting on one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSet {
    pub fixed: Vec<MonopoleSource>,
    pub moving: Vec<MovingSource>,
}

impl SourceSet {
    pub fn new(fixed: Vec<MonopoleSource>) -> Self {
        SourceSet {
            fixed,
            moving: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty() && self.moving.is_empty()
    }

    /// Signals of the fixed sources.
    pub fn signals(&self) -> Vec<Vec<f64>> {
        self.fixed.iter().map(|s| s.signal.clone()).collect()
    }

    /// Same supports with replaced signals.
    pub fn with_signals(&self, signals: &[Vec<f64>]) -> Result<Self> {
        if signals.len() != self.fixed.len() {
            return Err(Error::shape(format!(
                "{} signals for {} sources",
                signals.len(),
                self.fixed.len()
            )));
        }
        Ok(SourceSet {
            fixed: self
                .fixed
                .iter()
                .zip(signals)
                .map(|(s, v)| s.with_signal(v.clone()))
                .collect(),
            moving: self.moving.clone(),
        })
    }

    /// `out += scale · Σ_k blob_k · signal_k(level)`
    pub fn scatter(&self, grid: &Grid, level: f64, scale: f64, out: &mut [f64]) -> Result<()> {
        for s in &self.fixed {
            let v = sample_at(&s.signal, level);
            if v != 0.0 {
                s.blob.scatter_add(out, scale * v);
            }
        }
        for m in &self.moving {
            let v = sample_at(&m.signal, level);
            if v != 0.0 {
                let c = m.position_at(level);
                SparseBlob::new(grid, &c[..grid.dim()], m.half_width)?.scatter_add(out, scale * v);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn interpolation() {
        let s = [0.0, 2.0, 4.0];
        assert_eq!(sample_at(&s, 0.5), 1.0);
        assert_eq!(sample_at(&s, 2.0), 4.0);
        assert_eq!(sample_at(&s, 2.5), 0.0);
        assert_eq!(sample_at(&s, -1.0), 0.0);
    }

    #[test]
    fn moving_position_interpolates() {
        let g = crate::grid::build_grid(&[1.0, 1.0], &[16, 16]).unwrap();
        let m = MovingSource::new(
            &g,
            vec![[0.2, 0.5, 0.0], [0.4, 0.5, 0.0]],
            0.1,
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!((m.position_at(0.5)[0] - 0.3).abs() < 1e-15);
        assert!(MovingSource::new(&g, vec![[1.5, 0.5, 0.0]], 0.1, vec![0.0]).is_err());
    }
}
