use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use stochtri::harness::sha256_hex;

fn stochtri(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochtri")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const POSE: &str = "iterations = 8\nbatch_size = 4\npool_size = 10\nhidden = [16]\n";
const CAMERA: &str = "iterations = 4\nbatch_size = 2\npool_size = 6\nhidden = [8]\nframes_per_sample = 10\nfeature_width = 170\nprobe_count = 20\n";

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("synth.toml"), "cameras = 4\nframes = 20\npixel_sigma = 2.0\noutlier_rate = 0.1\noutlier_magnitude = 40.0\n").unwrap();
    std::fs::write(d.join("pose.toml"), POSE).unwrap();
    std::fs::write(d.join("cam.toml"), CAMERA).unwrap();
    ok(stochtri(&["synth", "--config", "synth.toml", "--out", "data"], d));
    dir
}

/// Runs a command twice into the same directory and checks that `files`
/// come out byte-identical; returns their hashes.
fn run_twice(d: &Path, args: &[&str], out: &str, files: &[&str]) -> BTreeMap<String, String> {
    let hashes = || -> BTreeMap<String, String> {
        files
            .iter()
            .map(|f| (f.to_string(), sha256_hex(&std::fs::read(d.join(out).join(f)).unwrap())))
            .collect()
    };
    ok(stochtri(args, d));
    let first = hashes();
    ok(stochtri(args, d));
    assert_eq!(first, hashes());
    first
}

#[test]
fn full_pipeline_runs_and_is_reproducible() {
    let dir = setup();
    let d = dir.path();
    assert!(d.join("data/dataset.json").exists());
    let train = ["train-pose", "--config", "pose.toml", "--dataset", "data/dataset.json", "--out", "a"];
    let first = run_twice(d, &train, "a", &["report.json", "pose.net", "loss.dat", "training.csv"]);
    assert!(first.contains_key("pose.net"));

    let eval = ["eval", "--config", "pose.toml", "--dataset", "data/dataset.json", "--weights", "a/pose.net", "--out", "e"];
    run_twice(d, &eval, "e", &["report.json", "mpjpe.csv", "pose_prior.csv"]);
    let mpjpe = std::fs::read_to_string(d.join("e/mpjpe.csv")).unwrap();
    assert_eq!(mpjpe.lines().count(), 10, "{mpjpe}");
    assert!(mpjpe.contains("ransac"));

    ok(stochtri(&["compare-ransac", "--config", "pose.toml", "--dataset", "data/dataset.json", "--weights", "a/pose.net", "--out", "r"], d));
    assert!(d.join("r/per_frame.dat").exists());

    ok(stochtri(&["train-cam", "--config", "cam.toml", "--dataset", "data/dataset.json", "--out", "c"], d));
    ok(stochtri(
        &["compare-8pt", "--config", "cam.toml", "--dataset", "data/dataset.json", "--weights", "c/camera.net", "--frames", "10,20", "--repeats", "2", "--out", "s"],
        d,
    ));
    let sweep = std::fs::read_to_string(d.join("s/frame_sweep.dat")).unwrap();
    assert_eq!(sweep.lines().filter(|l| !l.starts_with('#')).count(), 2, "{sweep}");
    ok(stochtri(
        &["ablate-extrinsics", "--config", "pose.toml", "--cam-config", "cam.toml", "--dataset", "data/dataset.json", "--weights", "a/pose.net", "--cam-weights", "c/camera.net", "--out", "x"],
        d,
    ));
    let table = std::fs::read_to_string(d.join("x/extrinsics_ablation.csv")).unwrap();
    for row in ["known", "est_r", "est_t", "est_rt"] {
        assert!(table.contains(row), "{table}");
    }
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "iterations = 8\nbogus = 1\n").unwrap();
    let code = |args: &[&str]| stochtri(args, d).status.code().unwrap();
    assert_eq!(code(&["train-pose", "--config", "bad.toml", "--dataset", "data/dataset.json"]), 2);
    assert_eq!(code(&["train-pose", "--config", "missing.toml"]), 2);
    assert_eq!(code(&["train-pose", "--config", "pose.toml", "--dataset", "nothing.json"]), 3);
    assert_eq!(code(&["eval", "--dataset", "data/dataset.json", "--weights", "nothing.net"]), 3);
    assert_eq!(code(&["no-such-command"]), 2);

    std::fs::write(d.join("broken.json"), "{\"format\": 1}").unwrap();
    let out = stochtri(&["train-pose", "--config", "pose.toml", "--dataset", "broken.json"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));

    ok(stochtri(&["train-cam", "--config", "cam.toml", "--dataset", "data/dataset.json", "--out", "c"], d));
    assert_eq!(
        code(&["compare-ransac", "--config", "pose.toml", "--dataset", "data/dataset.json", "--weights", "c/camera.net"]),
        2
    );
}
