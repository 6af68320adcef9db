use std::path::Path;
use std::process::{Command, Output};

fn spi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spi"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = spi(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn map_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "4", "build-map", "--n-pdls", "40", "--out", "m.txt"]);
    assert!(ok(d, &["validate-map", "--map", "m.txt"]).starts_with("ok n_pdls=40"));
    let shown = ok(d, &["inspect-map", "--map", "m.txt", "--head", "2"]);
    assert_eq!(shown.lines().count(), 3);

    let text = std::fs::read_to_string(d.join("m.txt")).unwrap();
    let broken = text.replacen("0.", "7.", 3);
    std::fs::write(d.join("bad.txt"), broken).unwrap();
    let out = spi(d, &["validate-map", "--map", "bad.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind="));
}

#[test]
fn fitness_is_seeded_and_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = ok(d, &["--seed", "9", "fitness", "--random", "--sims", "3000", "--dump", "run"]);
    let b = ok(d, &["--seed", "9", "fitness", "--random", "--sims", "3000"]);
    let strip = |s: &str| s.split(" elapsed_s=").next().unwrap().to_string();
    assert_eq!(strip(&a), strip(&b));
    let manifest = std::fs::read_to_string(d.join("run/manifest.txt")).unwrap();
    assert!(manifest.contains("verb=fitness\nseed=9\n"));
    let samples = std::fs::read_to_string(d.join("run/bmd_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 3001);
    ok(d, &["plot", "--kind", "bmd", "--input", "run/bmd_samples.csv", "--out", "fig"]);
    assert!(d.join("fig/bmd_scatter.svg").exists());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.cfg"), "seed=9\nsims=3000\n").unwrap();
    let a = ok(d, &["--config", "c.cfg", "fitness", "--random"]);
    let b = ok(d, &["--seed", "9", "fitness", "--random", "--sims", "3000"]);
    assert_eq!(a.split(" elapsed_s=").next(), b.split(" elapsed_s=").next());
    std::fs::write(d.join("bad.cfg"), "nonsense=1\n").unwrap();
    let out = spi(d, &["--config", "bad.cfg", "fitness", "--random"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=parse"));
}

#[test]
fn train_compare_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for mode in ["spi", "random"] {
        ok(d, &["train", "--mode", mode, "--episodes", "6", "--runs", "2", "--out", "logs"]);
    }
    assert!(d.join("logs/manifest.txt").exists());
    let summary = ok(
        d,
        &[
            "compare",
            "--spi",
            "logs/train_spi_seed0.csv",
            "logs/train_spi_seed1.csv",
            "--random",
            "logs/train_random_seed0.csv",
            "logs/train_random_seed1.csv",
            "--window",
            "3",
            "--out",
            "summary.csv",
        ],
    );
    assert_eq!(summary.lines().count(), 2);
    ok(d, &["plot", "--kind", "compare", "--input", "summary.csv", "--out", "fig", "--window", "3"]);
    ok(d, &["plot", "--kind", "training", "--input", "logs/train_spi_seed0.csv", "--out", "fig", "--window", "3"]);
    assert!(d.join("fig/compare_success.svg").exists());

    // sides swapped
    let out = spi(
        d,
        &["compare", "--spi", "logs/train_random_seed0.csv", "--random", "logs/train_spi_seed0.csv"],
    );
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=invalid_input"));
}

#[test]
fn sweeps_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(d, &["sweep-pdl", "--counts", "4,40", "--sims", "1000", "--out", "pdl.csv"]);
    assert_eq!(out.lines().count(), 2);
    let out = ok(
        d,
        &[
            "sweep-capmargin",
            "--caps",
            "0.1,0.9",
            "--margins",
            "0,0.3",
            "--n-pdls",
            "40",
            "--sims-per-cell",
            "500",
            "--out",
            "cm.csv",
        ],
    );
    assert!(out.contains("cap=0.9 margin=0.3 skipped"));
    ok(d, &["plot", "--kind", "cap-margin", "--input", "cm.csv", "--out", "fig"]);
    ok(d, &["plot", "--kind", "pdl-sweep", "--input", "pdl.csv", "--out", "fig"]);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = spi(d, &["fitness", "--sims", "10"]);
    assert!(!out.status.success());
    let out = spi(d, &["build-map", "--cap", "0.9", "--margin", "0.5", "--out", "m.txt"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=infeasible_parameters"));
    std::fs::write(d.join("empty.csv"), "x,y\n").unwrap();
    let out = spi(d, &["plot", "--kind", "bmd", "--input", "empty.csv", "--out", "fig"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=empty_input"));
    assert!(!d.join("fig").join("bmd_scatter.svg").exists());
}
