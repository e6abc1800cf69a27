use adjsound::config::{preset, ScenarioConfig};
use adjsound::io::{read_iterations, read_recording, read_snapshot, read_table};
use adjsound::scenario::{self, Layout};
use adjsound::AppError;

/// Two noise sources under an eight-microphone line on a 48² grid.
const SMALL: &str = r#"
name = "small_twin"
mode = "optimize"
seed = 3

[grid]
extent_m = [0.47, 0.47]
nodes = [48, 48]

[time]
rate_hz = 68600.0
steps = 200

[numerics]
sponge_cells = 6

[array]
kind = "line"
start_m = [0.1, 0.36]
end_m = [0.37, 0.36]
count = 8

[optimize]
max_loops = 3

[localize]
peaks = 2

[output]
snapshot_every_steps = 100

[[sources]]
position_m = [0.15, 0.12]
signal = { kind = "band_noise", low_hz = 1000.0, high_hz = 4000.0, amplitude_pa_s = 100.0 }

[[sources]]
position_m = [0.32, 0.12]
signal = { kind = "band_noise", low_hz = 1000.0, high_hz = 4000.0, amplitude_pa_s = 100.0 }
"#;

fn small() -> ScenarioConfig {
    ScenarioConfig::parse(SMALL).unwrap()
}

#[test]
fn inversion_never_reads_reference_signals() {
    let dir = tempfile::tempdir().unwrap();
    let layout = Layout::new(dir.path());
    let cfg = small();
    scenario::synthesize(&cfg, &layout).unwrap();
    assert!(layout.reference_signal(0).exists() && layout.reference_signal(1).exists());

    let before = scenario::optimize(&cfg, &layout).unwrap().run;
    let peaks_before = scenario::localize(&cfg, &layout).unwrap().peaks;

    std::fs::remove_dir_all(layout.reference_dir()).unwrap();
    let after = scenario::optimize(&cfg, &layout).unwrap().run;
    let peaks_after = scenario::localize(&cfg, &layout).unwrap().peaks;
    assert!(!layout.reference_dir().exists());

    assert_eq!(before.objectives(), after.objectives());
    assert_eq!(before.sources.signals(), after.sources.signals());
    assert_eq!(peaks_before, peaks_after);
    let j = after.objectives();
    assert!(j.windows(2).all(|w| w[1] < w[0]), "{j:?}");
    assert_eq!(read_iterations(&layout.iterations()).unwrap().len(), j.len());
    assert!(layout.signal(1).exists());
    assert_eq!(read_table(&layout.peaks()).unwrap().1.len(), 2);
    assert!(layout.sensitivity().with_extension("pgm").exists());
}

#[test]
fn inversion_without_targets_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = scenario::localize(&small(), &Layout::new(dir.path())).unwrap_err();
    assert!(matches!(err, AppError::Config(ref m) if m.contains("synthesize")), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn four_source_synthesis_is_reproducible() {
    let cfg = preset("loc4_desk").unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (la, lb) = (Layout::new(a.path()), Layout::new(b.path()));
    scenario::synthesize(&cfg, &la).unwrap();
    scenario::synthesize(&cfg, &lb).unwrap();
    let bytes = std::fs::read(la.targets()).unwrap();
    assert_eq!(bytes, std::fs::read(lb.targets()).unwrap());

    let (header, rows) = read_table(&la.targets()).unwrap();
    assert_eq!(header[0], "time_s");
    assert_eq!(header.len() - 1, 64);
    assert_eq!(header[64], "mic_063");
    assert_eq!(rows.len(), 751);
    let rec = read_recording(&la.targets()).unwrap();
    assert!((rec.sample_rate - cfg.time.rate_hz).abs() < 1e-6 * cfg.time.rate_hz);
}

#[test]
fn forward_writes_component_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let layout = Layout::new(dir.path());
    let cfg = small();
    let rec = scenario::forward(&cfg, &layout).unwrap();
    assert_eq!((rec.mics(), rec.levels()), (8, 201));
    assert_eq!(read_recording(&layout.recording()).unwrap().samples, rec.samples);
    for step in [0, 100, 200] {
        for field in ["rho", "u1", "u2", "p"] {
            let (values, meta) = read_snapshot(&layout.snapshot(field, step)).unwrap();
            assert_eq!(values.len(), 48 * 48);
            assert_eq!(meta.field, field);
            assert_eq!(meta.step, Some(step));
            assert_eq!(meta.reference.is_some(), field == "rho" || field == "p");
        }
    }
    let (p, _) = read_snapshot(&layout.snapshot("p", 200)).unwrap();
    assert!(p.iter().any(|v| v.abs() > 1e-3));
    let images = scenario::render_all(layout.root()).unwrap();
    assert_eq!(images.len(), 12);
    assert!(images.iter().all(|p| p.exists()));
}
