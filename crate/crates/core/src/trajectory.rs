//! Forward-trajectory storage with optional checkpointing.

use crate::error::{Error, Result};
use crate::field::StateField;
use crate::grid::Grid;
use crate::math;
use alloc::vec::Vec;

/// How many forward levels are kept in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoragePolicy {
    /// Every level.
    Full,
    /// Every `stride`-th level; the rest is recomputed on demand.
    Checkpointed { stride: usize },
}

impl StoragePolicy {
    /// Checkpoint stride near `sqrt(steps)`, which balances stored
    /// checkpoints against the recomputed segment.
    pub fn sqrt_checkpointing(steps: usize) -> Self {
        let stride = math::sqrt(steps as f64) as usize;
        StoragePolicy::Checkpointed {
            stride: stride.max(1),
        }
    }

    fn stride(&self) -> usize {
        match *self {
            StoragePolicy::Full => 1,
            StoragePolicy::Checkpointed { stride } => stride.max(1),
        }
    }
}

/// Recomputes one forward step. Must be deterministic.
pub trait Replay {
    /// State at level `step + 1` from the state at level `step`.
    fn replay(&self, state: &StateField, step: usize) -> Result<StateField>;
}

/// Ordered forward states `t_0 .. t_N` with uniform step `dt`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    dt: f64,
    steps: usize,
    policy: StoragePolicy,
    /// Level `k * stride` at position `k`.
    stored: Vec<StateField>,
    pushed: usize,
    segment_start: usize,
    segment: Vec<StateField>,
}

impl Trajectory {
    pub fn new(grid: &Grid, dt: f64, steps: usize, policy: StoragePolicy) -> Self {
        Trajectory {
            grid: *grid,
            dt,
            steps,
            policy,
            stored: Vec::new(),
            pushed: 0,
            segment_start: usize::MAX,
            segment: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of levels, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn policy(&self) -> StoragePolicy {
        self.policy
    }

    /// Whether all levels have been pushed.
    pub fn is_complete(&self) -> bool {
        self.pushed == self.len()
    }

    /// Appends the next level; only checkpoint levels are retained.
    pub fn push(&mut self, state: &StateField) -> Result<()> {
        if self.pushed >= self.len() {
            return Err(Error::TimeLevel {
                requested: self.pushed,
                available: self.len(),
            });
        }
        if self.pushed % self.policy.stride() == 0 {
            self.stored.push(state.clone());
        }
        self.pushed += 1;
        Ok(())
    }

    /// Level `n` if it is held in memory.
    pub fn get(&self, n: usize) -> Option<&StateField> {
        let s = self.policy.stride();
        if n >= self.pushed {
            return None;
        }
        if n % s == 0 {
            return self.stored.get(n / s);
        }
        if n >= self.segment_start && n - self.segment_start < self.segment.len() {
            return Some(&self.segment[n - self.segment_start]);
        }
        None
    }

    /// Level `n`, recomputing its checkpoint segment when needed.
    ///
    /// Recomputation starts from the stored checkpoint and applies `replay`
    /// step by step, so the result equals what full storage would hold.
    pub fn state(&mut self, n: usize, replay: &dyn Replay) -> Result<&StateField> {
        if n >= self.pushed {
            return Err(Error::TimeLevel {
                requested: n,
                available: self.pushed,
            });
        }
        let s = self.policy.stride();
        if n % s != 0 && !(n >= self.segment_start && n - self.segment_start < self.segment.len()) {
            let start = n - n % s;
            let end = (start + s - 1).min(self.pushed - 1);
            self.segment.clear();
            self.segment_start = start + 1;
            let mut cur = self.stored[start / s].clone();
            for step in start..end {
                cur = replay.replay(&cur, step)?;
                self.segment.push(cur.clone());
            }
        }
        Ok(self.get(n).expect("level resident after replay"))
    }

    /// Number of states currently held in memory.
    pub fn resident_levels(&self) -> usize {
        self.stored.len() + self.segment.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Packed;
    use crate::grid::build_grid;

    struct Doubling;
    impl Replay for Doubling {
        fn replay(&self, s: &StateField, step: usize) -> Result<StateField> {
            let mut o = s.clone();
            o.data_mut()
                .iter_mut()
                .for_each(|v| *v = *v * 1.000_1 + step as f64 * 1e-3);
            Ok(o)
        }
    }

    fn run(policy: StoragePolicy, steps: usize) -> Trajectory {
        let g = build_grid(&[1.0, 1.0], &[8, 8]).unwrap();
        let mut t = Trajectory::new(&g, 0.1, steps, policy);
        let mut s = StateField::zeros(&g);
        s.data_mut().iter_mut().enumerate().for_each(|(i, v)| *v = i as f64 * 0.37);
        t.push(&s).unwrap();
        for n in 0..steps {
            s = Doubling.replay(&s, n).unwrap();
            t.push(&s).unwrap();
        }
        t
    }

    #[test]
    fn checkpointed_equals_full_bitwise() {
        let steps = 23;
        let full = run(StoragePolicy::Full, steps);
        let mut cp = run(StoragePolicy::Checkpointed { stride: 5 }, steps);
        assert!(cp.resident_levels() < 6);
        for n in (0..=steps).rev() {
            let a = full.get(n).unwrap().clone();
            let b = cp.state(n, &Doubling).unwrap();
            assert_eq!(a.data(), b.data(), "level {n}");
        }
        assert!(cp.resident_levels() <= 5 + 4);
    }

    #[test]
    fn out_of_range_level() {
        let mut t = run(StoragePolicy::Full, 3);
        assert!(t.state(4, &Doubling).is_err());
        let s = t.get(0).unwrap().clone();
        assert!(t.push(&s).is_err());
    }

    #[test]
    fn sqrt_policy() {
        assert_eq!(
            StoragePolicy::sqrt_checkpointing(750),
            StoragePolicy::Checkpointed { stride: 27 }
        );
    }
}
