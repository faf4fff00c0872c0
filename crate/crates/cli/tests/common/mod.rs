use std::path::PathBuf;

use qilab::covert::tmsv_return_states;
use qilab_cli::state::StateFile;
use qilab_cli::{Scale, SweepConfig};

/// Writes the two distinguish inputs and returns their paths.
pub fn state_files(tag: &str) -> (PathBuf, PathBuf) {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("qilab-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (h0, h1) = tmsv_return_states(0.05, 0.2, 0.2);
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    std::fs::write(&a, serde_json::to_string_pretty(&StateFile::from_state(&h0)).unwrap()).unwrap();
    std::fs::write(&b, serde_json::to_string_pretty(&StateFile::from_state(&h1)).unwrap()).unwrap();
    (a, b)
}

/// A small sweep for every subcommand; some include rows that fail.
pub fn sample_configs(tag: &str) -> Vec<SweepConfig> {
    let (a, b) = state_files(tag);
    let mut dist = SweepConfig::new("distinguish");
    dist.state_a = Some(a);
    dist.state_b = Some(b);
    vec![
        SweepConfig::new("perfect-covert").param("eta", 0.01).grid("n_b", 0.01, 10.0, 6, Scale::Log),
        SweepConfig::new("covert-energy").param("eta", 0.01).param("n_b", 0.2).param("eps", 1e-3).grid(
            "m",
            100.0,
            1e4,
            3,
            Scale::Log,
        ),
        SweepConfig::new("covert-bound").param("eta", 0.01).param("eps", 1e-3).param("m", 1000.0).grid(
            "n_b",
            0.002,
            0.2,
            3,
            Scale::Log,
        ),
        SweepConfig::new("gain-qfi").param("n", 6.0).param("m", 9.0).grid("g", 1.0, 3.0, 5, Scale::Linear),
        SweepConfig::new("gain-mse").param("n", 6.0).param("m", 9.0).param("eta_d", 0.8).grid("g", 1.5, 3.0, 4, Scale::Linear),
        SweepConfig::new("gain-threshold").param("n", 6.0).param("m", 9.0).grid("eta_d", 0.1, 1.0, 5, Scale::Linear),
        SweepConfig::new("ecb")
            .param("n", 6.0)
            .param("m", 9.0)
            .grid("g", 1.05, 5.0, 3, Scale::Linear)
            .grid("g_prime", 1.05, 5.0, 3, Scale::Linear),
        SweepConfig::new("spes").param("eta", 0.01).param("n_b", 0.2).grid("n_s", 0.05, 0.95, 4, Scale::Linear),
        dist,
    ]
}
