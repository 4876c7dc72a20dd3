use std::process::Command;

use pixelwpt::codebook::Codebook;
use pixelwpt::harness::{self, Coding, Experiment, ExperimentConfig, SweepAxis, CSV_HEADER};
use pixelwpt::Error;

fn small(coding: Coding, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        q: 6,
        k: 8,
        target_rank: 3,
        trials,
        coding,
        ..ExperimentConfig::default()
    }
}

#[test]
fn fixed_baseline_power_is_finite_and_positive() {
    let report = harness::run_experiment(&small(Coding::Fixed, 100)).unwrap();
    assert_eq!(report.results.len(), 100);
    assert!(report.results.iter().all(|r| r.power_watts.is_finite() && r.power_watts > 0.0));
    assert_eq!(report.summary.trials_failed, 0);
}

#[test]
fn trial_power_dbm_is_consistent() {
    let report = harness::run_experiment(&small(Coding::Binary, 5)).unwrap();
    for r in &report.results {
        assert!((r.power_dbm - 10.0 * (r.power_watts * 1000.0).log10()).abs() < 1e-12);
        assert_eq!(r.trial_index, report.results.iter().position(|x| x == r).unwrap());
    }
}

#[test]
fn invalid_config_names_its_field() {
    let cfg = ExperimentConfig {
        transmit_power_dbm: f64::INFINITY,
        ..small(Coding::Fixed, 1)
    };
    match harness::run_experiment(&cfg) {
        Err(Error::ConfigInvalid { field, .. }) => assert_eq!(field, "transmit_power_dbm"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn receive_antenna_sweep_is_paired_and_grows() {
    let cfg = small(Coding::Binary, 8);
    let rows = harness::sweep(&cfg, SweepAxis::ReceiveAntennas, &[1, 2, 3]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1].summary.mean_watts >= w[0].summary.mean_watts));
}

#[test]
fn codebook_size_sweep_on_nested_codebooks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cb.json");
    let base = small(Coding::Binary, 10);
    let rep = Experiment::new(base.clone()).unwrap().train_codebook(10, 8).unwrap();
    rep.codebook.save(&path).unwrap();
    let cfg = ExperimentConfig {
        coding: Coding::Codebook,
        codebook_path: Some(path),
        ..base
    };
    let rows = harness::sweep(&cfg, SweepAxis::CodebookSize, &[2, 4, 8]).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![2, 4, 8]);
    assert!(rows.windows(2).all(|w| w[1].summary.mean_watts >= w[0].summary.mean_watts));
}

#[test]
fn compare_shares_the_binary_solution() {
    let cfg = small(Coding::Binary, 4);
    let cmp = harness::compare(&cfg, &[Coding::Fixed, Coding::Binary, Coding::Continuous]).unwrap();
    let alone = harness::run_experiment(&cfg).unwrap();
    let col: Vec<_> = cmp.column(Coding::Binary).unwrap().into_iter().cloned().collect();
    assert_eq!(col, alone.results);
    let csv = cmp.to_csv();
    assert!(csv.contains("# gain_db[binary/fixed]="));
    assert!(csv.contains("# [continuous] mean_watts="));
}

fn write_config(dir: &std::path::Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, format!("q = 6\nk = 8\ntarget_rank = 3\ntrials = 3\n{extra}")).unwrap();
    path
}

fn cli(args: &[&str], seed: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pixelwpt"));
    cmd.args(args).env_remove("PIXELWPT_SEED");
    if let Some(s) = seed {
        cmd.env("PIXELWPT_SEED", s);
    }
    cmd.output().unwrap()
}

#[test]
fn cli_run_writes_csv_and_honours_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "coding = \"fixed\"\n");
    let out = dir.path().join("out.csv");
    let run = cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().last().unwrap().starts_with("# mean_watts="));

    let again = cli(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    let seeded = cli(&["run", "--config", cfg.to_str().unwrap()], Some("12345"));
    assert!(seeded.status.success());
    assert_ne!(String::from_utf8(seeded.stdout).unwrap(), text);
}

#[test]
fn cli_antenna_codebook_and_sweep_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ant = dir.path().join("ant.json");
    let gen = cli(
        &["gen-antenna", "--seed", "3", "--q", "6", "--k", "8", "--rank", "3", "--out", ant.to_str().unwrap()],
        None,
    );
    assert!(gen.status.success());
    let cfg = write_config(dir.path(), "antenna_path = \"ant.json\"\n");
    let cb = dir.path().join("cb.json");
    let train = cli(
        &[
            "train-codebook",
            "--config",
            cfg.to_str().unwrap(),
            "--pool-channels",
            "3",
            "--size",
            "4",
            "--out",
            cb.to_str().unwrap(),
        ],
        None,
    );
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    assert_eq!(Codebook::load(&cb).unwrap().d(), 4);

    let sweep = cli(
        &["sweep", "--config", cfg.to_str().unwrap(), "--axis", "receive_antennas", "--values", "1,2"],
        None,
    );
    assert!(sweep.status.success());
    let text = String::from_utf8(sweep.stdout).unwrap();
    assert!(text.starts_with("receive_antennas,scheme,coding,mean_watts"));
    assert_eq!(text.lines().count(), 3);

    let bad = cli(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()], None);
    assert!(!bad.status.success());
}
