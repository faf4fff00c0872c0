mod common;

use std::process::Command;

use common::{sample_configs, state_files};
use qilab_cli::{emit, run, Dataset, Format, Scale, SweepConfig, Threads};

#[test]
fn schemas_match_golden_headers() {
    for cfg in sample_configs("schema") {
        let ds = run(&cfg).unwrap();
        let text = String::from_utf8(emit(&ds, Format::Csv).unwrap()).unwrap();
        let header = text.lines().next().unwrap();
        let golden = std::fs::read_to_string(format!("{}/tests/golden/{}.csv", env!("CARGO_MANIFEST_DIR"), cfg.subcommand)).unwrap();
        assert_eq!(header, golden.trim_end(), "{}", cfg.subcommand);
    }
}

#[test]
fn thread_count_does_not_change_bytes() {
    for cfg in sample_configs("threads") {
        for format in [Format::Csv, Format::Json] {
            let one = emit(&run(&cfg.clone().threads(Threads::Fixed(1))).unwrap(), format).unwrap();
            let eight = emit(&run(&cfg.clone().threads(Threads::Fixed(8))).unwrap(), format).unwrap();
            assert_eq!(one, eight, "{} {format:?}", cfg.subcommand);
        }
    }
}

#[test]
fn every_sample_round_trips() {
    for cfg in sample_configs("roundtrip") {
        let ds = run(&cfg).unwrap();
        for format in [Format::Csv, Format::Json] {
            let back = Dataset::parse(&emit(&ds, format).unwrap(), format).unwrap();
            assert!(ds.same_values(&back), "{} {format:?}", cfg.subcommand);
        }
    }
}

#[test]
fn perfect_covert_ratio_peaks_at_low_background() {
    let cfg = SweepConfig::new("perfect-covert").param("eta", 0.01).grid("n_b", 0.01, 10.0, 5, Scale::Log);
    let ds = run(&cfg).unwrap();
    assert_eq!(ds.rows.len(), 5);
    let ratio = ds.column("ratio_qc").unwrap();
    let n_b = ds.column("n_b").unwrap();
    let k = (0..5).max_by(|&i, &j| ratio[i].total_cmp(&ratio[j])).unwrap();
    assert!((0.05..=0.5).contains(&n_b[k]), "peak at {}", n_b[k]);
    assert!((ratio[k] - 1.45).abs() < 0.05);
}

#[test]
fn single_point_grid_gives_one_row() {
    let cfg = SweepConfig::new("gain-threshold").param("n", 1.0).param("m", 1.0).grid("eta_d", 0.7, 0.7, 1, Scale::Linear);
    let ds = run(&cfg).unwrap();
    assert_eq!(ds.rows.len(), 1);
    let text = String::from_utf8(emit(&ds, Format::Csv).unwrap()).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn failing_rows_are_recorded() {
    let ds = run(&sample_configs("errors")[3]).unwrap();
    assert_eq!(ds.rows.len(), 5);
    assert!(ds.rows[0].error.as_deref().unwrap().contains("G = 1"));
    assert!(ds.rows[1..].iter().all(|r| r.error.is_none()));
}

#[test]
fn binary_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_qilab");
    let out = Command::new(exe)
        .args(["gain-qfi", "--param", "n=6", "--param", "m=9", "--grid", "g=2:2:1", "--format", "json", "--threads", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let ds = Dataset::from_json(&out.stdout).unwrap();
    assert_eq!(ds.column("k_nds").unwrap(), vec![7.5]);
    assert_eq!(ds.column("k_coh").unwrap(), vec![5.5]);

    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let cfg_path = dir.join(format!("qilab-config-{}.json", std::process::id()));
    let out_path = dir.join(format!("qilab-out-{}.csv", std::process::id()));
    std::fs::write(
        &cfg_path,
        r#"{"subcommand":"ecb","params":{"n":6,"m":9,"g":2},"grids":{"g_prime":{"start":1.5,"stop":2.5,"count":3}},"threads":"auto"}"#,
    )
    .unwrap();
    let status = Command::new(exe)
        .args(["ecb", "--config", cfg_path.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--seed", "7"])
        .status()
        .unwrap();
    assert!(status.success());
    let ds = Dataset::from_csv(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(ds.rows.len(), 3);
    assert_eq!(ds.column("b_quantum").unwrap()[1], 0.0);

    let (a, b) = state_files("bin");
    let out = Command::new(exe)
        .args(["distinguish", "--state-a", a.to_str().unwrap(), "--state-b", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let ds = Dataset::from_csv(&out.stdout).unwrap();
    let f = ds.column("fidelity").unwrap()[0];
    let (lo, hi) = (ds.column("pe_lower").unwrap()[0], ds.column("pe_upper").unwrap()[0]);
    assert!(f > 0.9 && f < 1.0 && lo < hi);

    let out = Command::new(exe).args(["gain-qfi", "--param", "n=6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(exe).args(["ecb", "--config", cfg_path.to_str().unwrap(), "--grid", "g=1:2:0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
