//! Microphone positions and pressure recordings.

use crate::error::{Error, Result};
use crate::field::StateField;
use crate::grid::{pad3, Grid};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Probe positions with labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MicrophoneArray {
    positions: Vec<[f64; 3]>,
    names: Vec<String>,
}

impl MicrophoneArray {
    /// Labels default to `mic_000`, `mic_001`, ...
    pub fn new(positions: Vec<[f64; 3]>) -> Self {
        let names = (0..positions.len()).map(|i| format!("mic_{i:03}")).collect();
        MicrophoneArray { positions, names }
    }

    pub fn with_names(positions: Vec<[f64; 3]>, names: Vec<String>) -> Result<Self> {
        if names.len() != positions.len() {
            return Err(Error::shape(format!(
                "{} names for {} microphones",
                names.len(),
                positions.len()
            )));
        }
        Ok(MicrophoneArray { positions, names })
    }

    pub fn from_points(points: &[&[f64]]) -> Self {
        Self::new(points.iter().map(|p| pad3(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Nearest node per microphone; lists every out-of-domain index.
    pub fn snap(&self, grid: &Grid) -> Result<Vec<usize>> {
        let outside: Vec<usize> = self
            .positions
            .iter()
            .enumerate()
            .filter(|(_, p)| !grid.contains(&p[..]))
            .map(|(i, _)| i)
            .collect();
        if !outside.is_empty() {
            return Err(Error::MicrophonesOutside(outside));
        }
        self.positions.iter().map(|p| grid.nearest_node(&p[..])).collect()
    }

    /// Positions moved onto their nearest nodes.
    pub fn snapped(&self, grid: &Grid) -> Result<Self> {
        let nodes = self.snap(grid)?;
        Ok(MicrophoneArray {
            positions: nodes.iter().map(|&i| grid.position(i)).collect(),
            names: self.names.clone(),
        })
    }
}

/// Pressure fluctuation per microphone per time level.
#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    pub sample_rate: f64,
    /// `samples[mic][level]`, Pa.
    pub samples: Vec<Vec<f64>>,
}

impl Recording {
    pub fn new(sample_rate: f64, mics: usize) -> Self {
        Recording {
            sample_rate,
            samples: (0..mics).map(|_| Vec::new()).collect(),
        }
    }

    pub fn mics(&self) -> usize {
        self.samples.len()
    }

    /// Samples per microphone.
    pub fn levels(&self) -> usize {
        self.samples.first().map_or(0, |s| s.len())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn push(&mut self, values: &[f64]) {
        for (s, v) in self.samples.iter_mut().zip(values) {
            s.push(*v);
        }
    }
}

/// `p(node) − p_ref` at each microphone node.
pub fn sample_microphones(state: &StateField, nodes: &[usize], p_ref: f64) -> Vec<f64> {
    let p = state.p();
    nodes.iter().map(|&i| p[i] - p_ref).collect()
}
