//! Source localization from adjoint pressure: time-summed sensitivity maps,
//! peak picking and per-step tracking.

use crate::adjoint::AdjointTrajectory;
use crate::error::{Error, Result};
use crate::forward::{MonopoleSource, SourceSet};
use crate::grid::Grid;
use crate::math;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

/// Default peak exclusion radius in cells.
pub const EXCLUSION_CELLS: f64 = 6.0;

/// Part of the grid searched for sources.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    All,
    /// Axis-aligned box, bounds inclusive.
    Box { min: [f64; 3], max: [f64; 3] },
    /// Grid plane (line in 2D) nearest to `offset` along `axis`.
    Plane { axis: usize, offset: f64 },
}

impl Region {
    pub fn contains(&self, grid: &Grid, node: usize) -> bool {
        match *self {
            Region::All => true,
            Region::Box { min, max } => {
                let x = grid.position(node);
                (0..grid.dim()).all(|k| x[k] >= min[k] && x[k] <= max[k])
            }
            Region::Plane { axis, offset } => {
                if axis >= grid.dim() {
                    return false;
                }
                let h = grid.spacing(axis);
                let i = math::round((offset - grid.origin(axis)) / h);
                grid.coords(node)[axis] as f64 == i
            }
        }
    }

    /// Nodes of `grid` inside the region, ascending.
    pub fn nodes(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.len()).filter(|&i| self.contains(grid, i)).collect()
    }
}

/// `p̄(x) = Σ_n |p*(x, t_n)|` over a window of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityMap {
    grid: Grid,
    values: Vec<f64>,
    window: Range<usize>,
}

impl SensitivityMap {
    /// Empty accumulation over `window`, to be fed level by level.
    pub fn new(grid: &Grid, window: Range<usize>) -> Result<Self> {
        if window.start >= window.end {
            return Err(Error::EmptyWindow);
        }
        Ok(SensitivityMap {
            grid: *grid,
            values: alloc::vec![0.0; grid.len()],
            window,
        })
    }

    /// Adds `|p*|` of level `n` if it lies in the window.
    pub fn accumulate(&mut self, n: usize, p_star: &[f64]) {
        if self.window.contains(&n) {
            for (v, p) in self.values.iter_mut().zip(p_star) {
                *v += math::abs(*p);
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }
}

/// Sums `|p*|` over `window` (clamped to the stored levels).
pub fn accumulate_abs_sensitivity(adjoint: &AdjointTrajectory, window: Range<usize>) -> Result<SensitivityMap> {
    let window = window.start..window.end.min(adjoint.len());
    let mut map = SensitivityMap::new(adjoint.grid(), window.clone())?;
    for n in window {
        map.accumulate(n, adjoint.p_star(n));
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub position: [f64; 3],
    pub value: f64,
    pub node: usize,
}

/// Peaks in descending order of value, pairwise at least `radius` apart.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub radius: f64,
}

impl PeakSet {
    /// Candidate sources at the peaks with zero signals of `levels`
    /// samples, ready for signal optimization.
    pub fn to_sources(&self, grid: &Grid, half_width: f64, levels: usize) -> Result<SourceSet> {
        let fixed = self
            .peaks
            .iter()
            .map(|p| MonopoleSource::new(grid, &p.position[..grid.dim()], half_width, alloc::vec![0.0; levels]))
            .collect::<Result<Vec<_>>>()?;
        Ok(SourceSet::new(fixed))
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    math::sqrt((0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum())
}

/// Descending value, ascending node on ties.
fn by_value(values: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

/// Whether no neighbour of `node` inside `region` exceeds it.
fn is_local_max(grid: &Grid, values: &[f64], region: &Region, node: usize) -> bool {
    let c = grid.coords(node);
    let dim = grid.dim();
    let mut offsets = [0i64; 3];
    let combos = 3usize.pow(dim as u32);
    for combo in 0..combos {
        let mut rem = combo;
        for o in offsets.iter_mut().take(dim) {
            *o = (rem % 3) as i64 - 1;
            rem /= 3;
        }
        if offsets[..dim].iter().all(|o| *o == 0) {
            continue;
        }
        let mut n = [0usize; 3];
        let mut inside = true;
        for k in 0..dim {
            let v = c[k] as i64 + offsets[k];
            if v < 0 || v >= grid.n(k) as i64 {
                inside = false;
                break;
            }
            n[k] = v as usize;
        }
        if !inside {
            continue;
        }
        let other = grid.index(n[0], n[1], n[2]);
        if region.contains(grid, other) && values[other] > values[node] {
            return false;
        }
    }
    true
}

/// Greedy selection of up to `count` local maxima of `map` within
/// `region`, skipping any closer than `radius` meters to one already taken.
pub fn detect_peaks(map: &SensitivityMap, count: usize, radius: f64, region: &Region) -> Result<PeakSet> {
    if count == 0 || !(radius > 0.0) {
        return Err(Error::config("peak detection needs count >= 1 and radius > 0"));
    }
    let grid = &map.grid;
    let values = &map.values;
    let nodes = region.nodes(grid);
    if nodes.iter().all(|&i| values[i] == 0.0) {
        return Err(Error::NoSignal);
    }
    let mut candidates: Vec<usize> = nodes
        .into_iter()
        .filter(|&i| values[i] > 0.0 && is_local_max(grid, values, region, i))
        .collect();
    candidates.sort_by(by_value(values));
    let mut peaks: Vec<Peak> = Vec::new();
    for node in candidates {
        if peaks.len() == count {
            break;
        }
        let position = grid.position(node);
        if peaks.iter().all(|p| distance(&p.position, &position) >= radius) {
            peaks.push(Peak {
                position,
                value: values[node],
                node,
            });
        }
    }
    Ok(PeakSet { peaks, radius })
}

/// Per-level position estimates of a moving source.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub dt: f64,
    pub positions: Vec<[f64; 3]>,
    pub peaks: Vec<f64>,
    /// Peak over median of the windowed region values; zero where the
    /// field vanishes, infinite where over half the region is silent.
    pub confidence: Vec<f64>,
}

impl Track {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Position of `nodes[best]` shifted by the vertex of a parabola through
/// the windowed sums of its two neighbours along each axis, where both lie
/// in the region. The shift is bounded by half a cell.
fn refine(grid: &Grid, region: &Region, nodes: &[usize], sums: &[f64], best: usize) -> [f64; 3] {
    let node = nodes[best];
    let mut x = grid.position(node);
    let c = grid.coords(node);
    let value = |idx: usize| nodes.binary_search(&idx).ok().map(|j| sums[j]);
    for axis in 0..grid.dim() {
        if c[axis] == 0 || c[axis] + 1 >= grid.n(axis) {
            continue;
        }
        let s = grid.stride(axis);
        if !(region.contains(grid, node - s) && region.contains(grid, node + s)) {
            continue;
        }
        if let (Some(lo), Some(hi)) = (value(node - s), value(node + s)) {
            let curv = lo - 2.0 * sums[best] + hi;
            if curv < 0.0 {
                let shift = (0.5 * (lo - hi) / curv).clamp(-0.5, 0.5);
                x[axis] += shift * grid.spacing(axis);
            }
        }
    }
    x
}

/// Smoothing window of one period of `freq_hz`, in levels.
pub fn period_in_steps(freq_hz: f64, dt: f64) -> usize {
    (math::round(1.0 / (freq_hz * dt)) as usize).max(1)
}

/// Argmax over `region` of the centred `window`-level sum of `|p*|` at every
/// level, refined to sub-cell precision. A level whose windowed field
/// vanishes keeps the previous position.
pub fn track_moving(adjoint: &AdjointTrajectory, region: &Region, window: usize) -> Result<Track> {
    if window == 0 {
        return Err(Error::EmptyWindow);
    }
    let grid = adjoint.grid();
    let nodes = region.nodes(grid);
    if nodes.is_empty() {
        return Err(Error::config("tracking region contains no grid nodes"));
    }
    let levels = adjoint.len();
    let before = (window - 1) / 2;
    let after = window - 1 - before;
    let mut positions = Vec::with_capacity(levels);
    let mut peaks = Vec::with_capacity(levels);
    let mut confidence = Vec::with_capacity(levels);
    let mut last = grid.position(nodes[0]);
    let mut sums = alloc::vec![0.0; nodes.len()];
    for n in 0..levels {
        let lo = n.saturating_sub(before);
        let hi = (n + after).min(levels - 1);
        sums.iter_mut().for_each(|s| *s = 0.0);
        for k in lo..=hi {
            let p = adjoint.p_star(k);
            for (s, &i) in sums.iter_mut().zip(&nodes) {
                *s += math::abs(p[i]);
            }
        }
        let mut best = 0;
        for j in 1..sums.len() {
            if sums[j] > sums[best] {
                best = j;
            }
        }
        let peak = sums[best];
        if peak > 0.0 {
            last = refine(grid, region, &nodes, &sums, best);
            let mut sorted = sums.clone();
            let med = median(&mut sorted);
            confidence.push(if med > 0.0 { peak / med } else { f64::INFINITY });
        } else {
            confidence.push(0.0);
        }
        positions.push(last);
        peaks.push(peak);
    }
    Ok(Track {
        dt: adjoint.dt(),
        positions,
        peaks,
        confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use alloc::vec;

    fn map_with(g: &Grid, spikes: &[(usize, f64)]) -> SensitivityMap {
        let mut m = SensitivityMap::new(g, 0..1).unwrap();
        let mut p = vec![0.0; g.len()];
        for &(i, v) in spikes {
            p[i] = v;
        }
        m.accumulate(0, &p);
        m
    }

    #[test]
    fn zero_adjoint_gives_zero_map_and_no_signal() {
        let g = build_grid(&[1.0, 1.0], &[11, 11]).unwrap();
        let adj = AdjointTrajectory::new(&g, 1e-4, vec![vec![0.0; g.len()]; 4]).unwrap();
        let m = accumulate_abs_sensitivity(&adj, 0..4).unwrap();
        assert!(m.values().iter().all(|v| *v == 0.0));
        assert_eq!(detect_peaks(&m, 1, 0.1, &Region::All).unwrap_err(), Error::NoSignal);
        assert_eq!(accumulate_abs_sensitivity(&adj, 2..2).unwrap_err(), Error::EmptyWindow);
    }

    #[test]
    fn sign_flip_and_scaling() {
        let g = build_grid(&[1.0, 1.0], &[9, 9]).unwrap();
        let levels: Vec<Vec<f64>> = (0..3).map(|n| (0..g.len()).map(|i| math::sin(0.3 * i as f64 + n as f64)).collect()).collect();
        let flipped: Vec<Vec<f64>> = levels.iter().map(|l| l.iter().map(|v| -v).collect()).collect();
        let scaled: Vec<Vec<f64>> = levels.iter().map(|l| l.iter().map(|v| 4.0 * v).collect()).collect();
        let a = accumulate_abs_sensitivity(&AdjointTrajectory::new(&g, 1.0, levels).unwrap(), 0..3).unwrap();
        let b = accumulate_abs_sensitivity(&AdjointTrajectory::new(&g, 1.0, flipped).unwrap(), 0..3).unwrap();
        let c = accumulate_abs_sensitivity(&AdjointTrajectory::new(&g, 1.0, scaled).unwrap(), 0..3).unwrap();
        assert_eq!(a.values(), b.values());
        for (x, y) in a.values().iter().zip(c.values()) {
            assert_eq!(4.0 * x, *y);
        }
        let pa = detect_peaks(&a, 3, 0.2, &Region::All).unwrap();
        let pc = detect_peaks(&c, 3, 0.2, &Region::All).unwrap();
        assert_eq!(pa.peaks.iter().map(|p| p.node).collect::<Vec<_>>(), pc.peaks.iter().map(|p| p.node).collect::<Vec<_>>());
    }

    #[test]
    fn delta_and_tied_peaks() {
        let g = build_grid(&[1.0, 1.0], &[21, 21]).unwrap();
        let one = map_with(&g, &[(g.index(5, 7, 0), 2.0)]);
        let p = detect_peaks(&one, 3, 0.1, &Region::All).unwrap();
        assert_eq!(p.peaks.len(), 1);
        assert_eq!(p.peaks[0].node, g.index(5, 7, 0));

        let (a, b) = (g.index(15, 3, 0), g.index(4, 16, 0));
        let two = map_with(&g, &[(a, 1.0), (b, 1.0)]);
        let p = detect_peaks(&two, 2, 0.2, &Region::All).unwrap();
        assert_eq!(p.peaks.iter().map(|p| p.node).collect::<Vec<_>>(), vec![a.min(b), a.max(b)]);
    }

    #[test]
    fn exclusion_radius_is_respected() {
        let g = build_grid(&[1.0, 1.0], &[41, 41]).unwrap();
        let values: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                2.0 + math::sin(17.0 * x[0]) * math::cos(13.0 * x[1])
            })
            .collect();
        let mut m = SensitivityMap::new(&g, 0..1).unwrap();
        m.accumulate(0, &values);
        let p = detect_peaks(&m, 10, 0.3, &Region::All).unwrap();
        assert!(p.peaks.len() >= 2);
        for i in 0..p.peaks.len() {
            for j in i + 1..p.peaks.len() {
                assert!(distance(&p.peaks[i].position, &p.peaks[j].position) >= 0.3);
            }
            if i > 0 {
                assert!(p.peaks[i].value <= p.peaks[i - 1].value);
            }
        }
    }

    #[test]
    fn plane_restriction() {
        let g = build_grid(&[1.0, 1.0], &[11, 11]).unwrap();
        let m = map_with(&g, &[(g.index(5, 5, 0), 9.0), (g.index(2, 7, 0), 1.0)]);
        let plane = Region::Plane { axis: 1, offset: 0.71 };
        let p = detect_peaks(&m, 1, 0.1, &plane).unwrap();
        assert_eq!(p.peaks[0].node, g.index(2, 7, 0));
        assert_eq!(plane.nodes(&g).len(), 11);
        let sources = p.to_sources(&g, 0.2, 5).unwrap();
        assert_eq!(sources.fixed.len(), 1);
        assert!(sources.fixed[0].signal().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tracker_follows_a_moving_spike() {
        let g = build_grid(&[1.0, 1.0], &[21, 21]).unwrap();
        let levels: Vec<Vec<f64>> = (0..30)
            .map(|n| {
                let mut p = vec![0.0; g.len()];
                if n < 25 {
                    // Oscillating sign, position advancing one cell per 3 levels.
                    p[g.index(2 + n / 3, 10, 0)] = if n % 2 == 0 { 1.0 } else { -1.0 };
                    p[g.index(15, 3, 0)] = 0.1;
                }
                p
            })
            .collect();
        let adj = AdjointTrajectory::new(&g, 1e-3, levels).unwrap();
        let t = track_moving(&adj, &Region::All, 1).unwrap();
        assert_eq!(t.len(), 30);
        for n in 0..25 {
            assert!((t.positions[n][0] - g.position(g.index(2 + n / 3, 10, 0))[0]).abs() < 1e-12);
            assert!(t.confidence[n] > 1.0);
        }
        // Field vanishes: confidence zero, last position carried forward.
        assert_eq!(t.confidence[27], 0.0);
        assert_eq!(t.positions[27], t.positions[24]);
        assert_eq!(period_in_steps(2000.0, 1.0 / 53_330.0), 27);
    }
}
