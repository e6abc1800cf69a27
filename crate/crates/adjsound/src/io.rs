//! File formats: CSV tables, raw little-endian `f64` snapshots with a TOML
//! sidecar, and 8-bit grayscale pixmaps (binary PGM).
//!
//! CSV numbers use Rust's shortest round-trip formatting, so reading a
//! written file restores every value bit for bit.

use crate::error::{AppError, AppResult};
use adjsound_core::forward::Recording;
use adjsound_core::localize::{PeakSet, Track};
use adjsound_core::optimize::IterationRecord;
use adjsound_core::Grid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

fn create_parent(path: &Path) -> AppResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e)),
        _ => Ok(()),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::format(path, format!("{other:?}")),
    }
}

/// Writes `header` and `rows` as CSV.
pub fn write_table<I>(path: &Path, header: &[String], rows: I) -> AppResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Header and numeric rows of a CSV file.
pub fn read_table(path: &Path) -> AppResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| AppError::format(path, format!("row {}: {e}", line + 1)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// `time_s,mic_000,mic_001,...`, one row per level.
pub fn write_recording(path: &Path, rec: &Recording) -> AppResult<()> {
    let mut header = vec!["time_s".to_string()];
    header.extend((0..rec.mics()).map(|m| format!("mic_{m:03}")));
    let dt = rec.dt();
    write_table(
        path,
        &header,
        (0..rec.levels()).map(|n| {
            let mut row = vec![num(n as f64 * dt)];
            row.extend(rec.samples.iter().map(|s| num(s[n])));
            row
        }),
    )
}

pub fn read_recording(path: &Path) -> AppResult<Recording> {
    let (header, rows) = read_table(path)?;
    if header.first().map(String::as_str) != Some("time_s") || header.len() < 2 {
        return Err(AppError::format(path, "expected columns time_s,mic_000,..."));
    }
    if rows.len() < 2 {
        return Err(AppError::format(path, "need at least two rows"));
    }
    let dt = rows[1][0] - rows[0][0];
    if !(dt > 0.0) {
        return Err(AppError::format(path, "time column must increase"));
    }
    let mics = header.len() - 1;
    let mut rec = Recording::new(1.0 / dt, mics);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(AppError::format(path, format!("row {}: {} fields, expected {}", i + 1, row.len(), header.len())));
        }
        rec.push(&row[1..]);
    }
    Ok(rec)
}

/// `time_s,s_value`.
pub fn write_signal_csv(path: &Path, dt: f64, values: &[f64]) -> AppResult<()> {
    write_table(
        path,
        &["time_s".into(), "s_value".into()],
        values.iter().enumerate().map(|(n, v)| vec![num(n as f64 * dt), num(*v)]),
    )
}

/// Time step and samples of a signal CSV.
pub fn read_signal_csv(path: &Path) -> AppResult<(f64, Vec<f64>)> {
    let (header, rows) = read_table(path)?;
    if header != ["time_s", "s_value"] {
        return Err(AppError::format(path, "expected columns time_s,s_value"));
    }
    let dt = if rows.len() > 1 { rows[1][0] - rows[0][0] } else { 0.0 };
    Ok((dt, rows.iter().map(|r| r[1]).collect()))
}

/// `iter,J,alpha,grad_norm,wall_s`.
pub fn write_iterations(path: &Path, records: &[IterationRecord]) -> AppResult<()> {
    write_table(
        path,
        &["iter", "J", "alpha", "grad_norm", "wall_s"].map(String::from),
        records
            .iter()
            .map(|r| vec![r.iteration.to_string(), num(r.objective), num(r.alpha), num(r.grad_norm), format!("{:.3}", r.wall_s)]),
    )
}

pub fn read_iterations(path: &Path) -> AppResult<Vec<IterationRecord>> {
    let (header, rows) = read_table(path)?;
    if header != ["iter", "J", "alpha", "grad_norm", "wall_s"] {
        return Err(AppError::format(path, "expected columns iter,J,alpha,grad_norm,wall_s"));
    }
    Ok(rows
        .iter()
        .map(|r| IterationRecord {
            iteration: r[0] as usize,
            objective: r[1],
            alpha: r[2],
            grad_norm: r[3],
            wall_s: r[4],
        })
        .collect())
}

/// `time_s,x1_m,x2_m,x3_m,confidence`.
pub fn write_track(path: &Path, track: &Track) -> AppResult<()> {
    write_table(
        path,
        &["time_s", "x1_m", "x2_m", "x3_m", "confidence"].map(String::from),
        track.positions.iter().zip(&track.confidence).enumerate().map(|(n, (x, c))| {
            vec![num(n as f64 * track.dt), num(x[0]), num(x[1]), num(x[2]), num(*c)]
        }),
    )
}

/// `rank,x1_m,x2_m,x3_m,value,node`, strongest first.
pub fn write_peaks(path: &Path, peaks: &PeakSet) -> AppResult<()> {
    write_table(
        path,
        &["rank", "x1_m", "x2_m", "x3_m", "value", "node"].map(String::from),
        peaks.peaks.iter().enumerate().map(|(i, p)| {
            vec![
                i.to_string(),
                num(p.position[0]),
                num(p.position[1]),
                num(p.position[2]),
                num(p.value),
                p.node.to_string(),
            ]
        }),
    )
}

/// Sidecar of a raw snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub field: String,
    pub nodes: Vec<usize>,
    pub spacing_m: Vec<f64>,
    pub origin_m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_s: Option<f64>,
    /// Stored values are the field minus this reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    /// Always `f64-le`; `x1` varies fastest.
    pub encoding: String,
    /// SHA-256 of the raw bytes, hex.
    pub sha256: String,
}

impl SnapshotMeta {
    pub fn for_grid(grid: &Grid, field: &str) -> Self {
        SnapshotMeta {
            field: field.to_string(),
            nodes: grid.counts().to_vec(),
            spacing_m: grid.spacings().to_vec(),
            origin_m: grid.origins().to_vec(),
            step: None,
            time_s: None,
            reference: None,
            encoding: "f64-le".into(),
            sha256: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `<stem>.toml` next to a raw file.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("toml")
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_le_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Writes `values` to `raw` and the completed sidecar next to it.
pub fn write_snapshot(raw: &Path, values: &[f64], mut meta: SnapshotMeta) -> AppResult<()> {
    if values.len() != meta.len() {
        return Err(AppError::format(raw, format!("{} values for {} nodes", values.len(), meta.len())));
    }
    create_parent(raw)?;
    let bytes = to_le_bytes(values);
    meta.sha256 = digest(&bytes);
    fs::write(raw, &bytes).map_err(|e| AppError::io(raw, e))?;
    let side = sidecar_path(raw);
    let text = toml::to_string(&meta).expect("sidecars serialize");
    fs::write(&side, text).map_err(|e| AppError::io(&side, e))
}

/// Reads a raw snapshot and checks it against its sidecar.
pub fn read_snapshot(raw: &Path) -> AppResult<(Vec<f64>, SnapshotMeta)> {
    let side = sidecar_path(raw);
    let text = fs::read_to_string(&side).map_err(|e| AppError::io(&side, e))?;
    let meta: SnapshotMeta = toml::from_str(&text).map_err(|e| AppError::format(&side, e.message().to_string()))?;
    if meta.encoding != "f64-le" {
        return Err(AppError::format(&side, format!("unsupported encoding `{}`", meta.encoding)));
    }
    let bytes = fs::read(raw).map_err(|e| AppError::io(raw, e))?;
    if bytes.len() != 8 * meta.len() {
        return Err(AppError::format(raw, format!("{} bytes for {} nodes", bytes.len(), meta.len())));
    }
    if !meta.sha256.is_empty() && digest(&bytes) != meta.sha256 {
        return Err(AppError::format(raw, "checksum differs from sidecar"));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Ok((values, meta))
}

/// Binary PGM of an `nx` by `ny` plane, `x1` to the right and `x2` up.
/// Values are scaled by the largest magnitude: non-negative data maps to
/// `0..=255`, signed data to `0..=254` around mid-gray 127.
pub fn write_pgm(path: &Path, values: &[f64], nx: usize, ny: usize) -> AppResult<()> {
    if values.len() != nx * ny {
        return Err(AppError::format(path, format!("{} values for a {nx}x{ny} image", values.len())));
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signed = values.iter().any(|v| *v < 0.0);
    let level = |v: f64| -> u8 {
        if peak == 0.0 {
            return if signed { 127 } else { 0 };
        }
        let x = v / peak;
        if signed {
            (127.0 + 127.0 * x).round() as u8
        } else {
            (255.0 * x).round() as u8
        }
    };
    let mut bytes = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in (0..ny).rev() {
        bytes.extend(values[j * nx..(j + 1) * nx].iter().map(|v| level(*v)));
    }
    create_parent(path)?;
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

/// The `x1`–`x2` plane of a snapshot nearest to the middle of `x3`.
pub fn middle_plane(values: &[f64], meta: &SnapshotMeta) -> (Vec<f64>, usize, usize) {
    let nx = meta.nodes[0];
    let ny = meta.nodes.get(1).copied().unwrap_or(1);
    let k = meta.nodes.get(2).map_or(0, |n| n / 2);
    let plane = nx * ny;
    (values[k * plane..(k + 1) * plane].to_vec(), nx, ny)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adjsound_core::build_grid;

    #[test]
    fn recording_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut rec = Recording::new(48_000.0, 2);
        rec.push(&[0.1, -1.0 / 3.0]);
        rec.push(&[1e-300, 2.5e7]);
        rec.push(&[f64::MIN_POSITIVE, 0.0]);
        write_recording(&path, &rec).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("time_s,mic_000,mic_001\n"));
        let back = read_recording(&path).unwrap();
        assert_eq!(back.samples, rec.samples);
        assert!((back.sample_rate - 48_000.0).abs() < 1e-6);
    }

    #[test]
    fn snapshot_round_trip_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_grid(&[1.0, 0.5], &[9, 8]).unwrap();
        let values: Vec<f64> = (0..72).map(|i| i as f64 * 0.25 - 1.0).collect();
        let raw = dir.path().join("p.f64");
        write_snapshot(&raw, &values, SnapshotMeta::for_grid(&g, "p")).unwrap();
        let (back, meta) = read_snapshot(&raw).unwrap();
        assert_eq!(back, values);
        assert_eq!(meta.nodes, vec![9, 8]);
        let mut bytes = fs::read(&raw).unwrap();
        bytes[3] ^= 1;
        fs::write(&raw, bytes).unwrap();
        assert!(matches!(read_snapshot(&raw), Err(AppError::Format { .. })));
    }

    #[test]
    fn pgm_header_and_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        write_pgm(&path, &[0.0, 1.0, 2.0, 4.0], 2, 2).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        // Top row is the larger x2.
        assert_eq!(&bytes[header.len()..], &[128, 255, 0, 64]);
        write_pgm(&path, &[-2.0, 2.0], 2, 1).unwrap();
        assert_eq!(&fs::read(&path).unwrap()[header.len()..], &[0, 254]);
    }

    #[test]
    fn signal_header_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_signal_csv(&path, 0.5, &[1.0, 2.0]).unwrap();
        assert_eq!(read_signal_csv(&path).unwrap(), (0.5, vec![1.0, 2.0]));
        fs::write(&path, "t,v\n0,1\n").unwrap();
        assert!(read_signal_csv(&path).is_err());
    }
}
