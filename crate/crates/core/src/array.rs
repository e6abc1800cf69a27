//! Microphone array geometries.

use crate::error::{Error, Result};
use crate::forward::MicrophoneArray;
use crate::grid::Grid;
use crate::math;
use alloc::vec::Vec;

/// Equiangular spiral in the `x1`–`x2` plane through `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpiralSpec {
    pub count: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub turns: f64,
    pub center: [f64; 3],
    /// Multiplies every radius.
    pub scale: f64,
}

impl SpiralSpec {
    /// 64 microphones over radii `[0.03, 0.5]` m and three turns.
    pub fn standard(center: [f64; 3]) -> Self {
        SpiralSpec {
            count: 64,
            r_min: 0.03,
            r_max: 0.5,
            turns: 3.0,
            center,
            scale: 1.0,
        }
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Positions before any domain check. Radii grow geometrically with
    /// the angle, which advances in equal steps.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        if self.count == 1 {
            return alloc::vec![self.center];
        }
        let sweep = 2.0 * math::PI * self.turns;
        let growth = math::ln(self.r_max / self.r_min);
        (0..self.count)
            .map(|i| {
                let f = i as f64 / (self.count - 1) as f64;
                let r = self.scale * self.r_min * math::exp(growth * f);
                let a = sweep * f;
                [self.center[0] + r * math::cos(a), self.center[1] + r * math::sin(a), self.center[2]]
            })
            .collect()
    }
}

/// How microphone positions are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum ArraySpec {
    Spiral(SpiralSpec),
    /// `count` equally spaced points from `start` to `end`.
    Line { start: [f64; 3], end: [f64; 3], count: usize },
    Explicit(Vec<[f64; 3]>),
}

/// Builds the array and checks every position against `grid`.
pub fn build_array(spec: &ArraySpec, grid: &Grid) -> Result<MicrophoneArray> {
    let positions = match spec {
        ArraySpec::Spiral(s) => {
            if s.count == 0 || !(s.r_min > 0.0 && s.r_max >= s.r_min && s.scale > 0.0) {
                return Err(Error::config("spiral needs count >= 1 and 0 < r_min <= r_max, scale > 0"));
            }
            s.positions()
        }
        ArraySpec::Line { start, end, count } => {
            let n = *count;
            (0..n)
                .map(|i| {
                    let f = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                    [0, 1, 2].map(|k| start[k] + f * (end[k] - start[k]))
                })
                .collect()
        }
        ArraySpec::Explicit(p) => p.clone(),
    };
    let array = MicrophoneArray::new(positions);
    array.snap(grid)?;
    Ok(array)
}

/// Spiral array; out-of-domain microphones are reported by index.
pub fn build_spiral_array(spec: &SpiralSpec, grid: &Grid) -> Result<MicrophoneArray> {
    build_array(&ArraySpec::Spiral(spec.clone()), grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn radius(p: &[f64; 3], c: &[f64; 3]) -> f64 {
        math::sqrt((p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]))
    }

    #[test]
    fn scaling_multiplies_radii() {
        let c = [0.8, 0.8, 0.0];
        let a = SpiralSpec::standard(c).positions();
        let b = SpiralSpec::standard(c).scaled(0.8).positions();
        assert_eq!(a.len(), 64);
        for (p, q) in a.iter().zip(&b) {
            let (ra, rb) = (radius(p, &c), radius(q, &c));
            assert!((rb - 0.8 * ra).abs() < 1e-12 * ra);
        }
        assert!((radius(&a[0], &c) - 0.03).abs() < 1e-12);
        assert!((radius(&a[63], &c) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_microphone_sits_at_center() {
        let mut s = SpiralSpec::standard([0.4, 0.5, 0.0]);
        s.count = 1;
        assert_eq!(s.positions(), alloc::vec![[0.4, 0.5, 0.0]]);
    }

    #[test]
    fn no_duplicate_positions() {
        let p = SpiralSpec::standard([0.0; 3]).positions();
        let mut min = f64::MAX;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                min = min.min(radius(&p[i], &p[j]));
            }
        }
        assert!(min > 1e-3, "{min}");
    }

    #[test]
    fn out_of_domain_indices_reported() {
        let g = build_grid(&[0.8, 0.8], &[41, 41]).unwrap();
        let err = build_spiral_array(&SpiralSpec::standard([0.4, 0.4, 0.0]), &g).unwrap_err();
        match err {
            Error::MicrophonesOutside(idx) => {
                assert!(!idx.is_empty());
                assert!(idx.iter().all(|&i| i > 40));
            }
            e => panic!("{e}"),
        }
        assert!(build_spiral_array(&SpiralSpec::standard([0.4, 0.4, 0.0]).scaled(0.7), &g).is_ok());
        let line = ArraySpec::Line {
            start: [0.1, 0.2, 0.0],
            end: [0.7, 0.2, 0.0],
            count: 4,
        };
        let a = build_array(&line, &g).unwrap();
        assert!((a.positions()[1][0] - 0.3).abs() < 1e-12);
    }
}
