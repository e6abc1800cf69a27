use adjsound::config::{eased_path, preset, preset_text, ScenarioConfig, PRESETS};
use adjsound::io::write_signal_csv;
use adjsound::AppError;
use std::path::Path;

#[test]
fn presets_round_trip_through_toml() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        assert_eq!(cfg.name, name);
        let text = cfg.to_toml();
        let again = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(again, cfg, "{name}");
        assert_eq!(again.to_toml(), text, "{name}");
    }
}

#[test]
fn presets_build_their_geometry() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        let grid = cfg.grid().unwrap();
        assert_eq!(grid.counts(), cfg.grid.nodes.as_slice());
        let solver = cfg.solver_config().unwrap();
        assert_eq!(solver.steps, cfg.time.steps);
        assert!(solver.cfl() < 1.0, "{name}: {}", solver.cfl());
        assert_eq!(cfg.microphones().unwrap().len(), 64, "{name}");
        cfg.probes().unwrap();
        cfg.region().unwrap();
        let sites = cfg.source_sites().unwrap();
        let moving = cfg.sources.iter().filter(|s| s.motion.is_some()).count();
        assert_eq!(sites.fixed.len() + moving, cfg.sources.len());
        assert!(sites.signals().iter().flatten().all(|v| *v == 0.0));
    }
}

#[test]
fn desk_presets_match_their_documented_size() {
    let dims = |n: &str| preset(n).unwrap().grid.nodes;
    assert_eq!(dims("reinf_desk"), [128, 128]);
    assert_eq!(dims("loc4_desk"), [160, 160]);
    assert_eq!(dims("track_desk"), [160, 160]);
    assert_eq!(dims("reinf_full"), [197, 197, 99]);
    assert_eq!(dims("loc4_full"), [240, 240, 176]);
}

#[test]
fn preset_names_load_without_a_file() {
    let a = ScenarioConfig::load(Path::new("loc4_desk")).unwrap();
    let b = ScenarioConfig::load(Path::new("loc4_desk.cfg")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, preset("loc4_desk").unwrap());
    assert!(matches!(ScenarioConfig::load(Path::new("no_such_scenario.cfg")), Err(AppError::Io { .. })));
}

fn desk_with(find: &str, replace: &str) -> String {
    let text = preset_text("track_desk").unwrap();
    assert!(text.contains(find), "{find}");
    text.replacen(find, replace, 1)
}

fn config_message(text: &str) -> String {
    match ScenarioConfig::parse(text) {
        Err(AppError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn schema_violations_name_the_key() {
    let m = config_message(&desk_with("steps = 450", "steps = \"many\""));
    assert!(m.starts_with("time.steps"), "{m}");
    let m = config_message(&desk_with("steps = 450", "steps = 450\nstride = 2"));
    assert!(m.contains("time") && m.contains("stride"), "{m}");
    let m = config_message(&desk_with("kind = \"harmonic\"", "kind = \"chirp\""));
    assert!(m.starts_with("sources[0].signal"), "{m}");
    let m = config_message(&desk_with("position_m = [0.436, 0.6]", "position_m = [0.436]"));
    assert!(m.contains("sources[0].position_m"), "{m}");
}

#[test]
fn settings_errors_surface_as_config_errors() {
    let cfg = ScenarioConfig::parse(&desk_with("rate_hz = 53330.0", "rate_hz = 20000.0")).unwrap();
    assert!(matches!(cfg.solver_config(), Err(AppError::Config(_))));
    let cfg = ScenarioConfig::parse(&desk_with("end_m = [0.956, 0.2]", "end_m = [1.956, 0.2]")).unwrap();
    assert!(matches!(cfg.microphones(), Err(AppError::Config(_))));
    assert_eq!(AppError::Config(String::new()).exit_code(), 2);
}

#[test]
fn seed_drives_default_noise_seeds() {
    let cfg = preset("loc4_desk").unwrap();
    let a = cfg.reference_signal(0).unwrap();
    assert_eq!(a, cfg.reference_signal(0).unwrap());
    assert_ne!(a, cfg.reference_signal(1).unwrap());
    let mut shifted = cfg.clone();
    shifted.seed += 1;
    assert_eq!(shifted.reference_signal(0).unwrap(), cfg.reference_signal(1).unwrap());
}

#[test]
fn gated_sweeps_start_at_their_delay() {
    let cfg = preset("reinf_desk").unwrap();
    for (i, s) in cfg.sources.iter().enumerate() {
        let gate = s.gate.unwrap();
        let sig = cfg.reference_signal(i).unwrap();
        assert_eq!(sig.len(), cfg.levels());
        assert!(sig[..gate.start_step].iter().all(|v| *v == 0.0));
        assert!(sig[gate.start_step + gate.steps..].iter().all(|v| *v == 0.0));
        assert!(sig.iter().any(|v| *v != 0.0));
    }
}

#[test]
fn signals_load_from_files_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("track_desk").unwrap();
    let samples: Vec<f64> = (0..100).map(|n| (n as f64 * 0.1).sin()).collect();
    write_signal_csv(&dir.path().join("drive.csv"), cfg.dt(), &samples).unwrap();
    let text = desk_with(
        "signal = { kind = \"harmonic\", freq_hz = 2000.0, amplitude_pa_s = 100.0 }",
        "signal = { kind = \"samples_from_file\", file = \"drive.csv\", amplitude_pa_s = 2.0 }",
    );
    let path = dir.path().join("scenario.cfg");
    std::fs::write(&path, text).unwrap();
    let cfg = ScenarioConfig::load(&path).unwrap();
    let sig = cfg.reference_signal(0).unwrap();
    assert_eq!(sig.len(), cfg.levels());
    for n in 0..100 {
        assert_eq!(sig[n], 2.0 * samples[n]);
    }
    assert!(sig[100..].iter().all(|v| *v == 0.0));
}

#[test]
fn eased_path_starts_and_ends_at_rest() {
    let path = eased_path(&[0.0, 1.0, 0.0], &[0.4, 1.0, 0.0], 101);
    assert_eq!(path[0], [0.0, 1.0, 0.0]);
    assert!((path[100][0] - 0.4).abs() < 1e-15);
    assert!((path[50][0] - 0.2).abs() < 1e-15);
    let steps: Vec<f64> = path.windows(2).map(|w| w[1][0] - w[0][0]).collect();
    assert!(steps.iter().all(|d| *d > 0.0));
    assert!(steps[0] < 0.02 * steps[50] && steps[99] < 0.02 * steps[50]);
}

#[test]
fn readme_scenario_example_is_valid() {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
    let text = &readme[start..start + readme[start..].find("```").unwrap()];
    let cfg = ScenarioConfig::parse(text).unwrap();
    assert!(cfg.solver_config().unwrap().cfl() < 1.0);
    assert_eq!(cfg.microphones().unwrap().len(), 64);
    cfg.probes().unwrap();
    cfg.region().unwrap();
    cfg.source_sites().unwrap();
}
