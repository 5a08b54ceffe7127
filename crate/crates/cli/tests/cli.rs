use std::path::Path;
use std::process::{Command, Output};

use gesture_gmm::io::{write_video, LANDMARK_FILE_EXTENSION};
use gesture_gmm::synth::{default_profiles, generate_dataset};
use gesture_gmm::GestureVideo;

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gesture-gmm"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = run(cwd, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn lmk_count(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == LANDMARK_FILE_EXTENSION)
        })
        .count()
}

/// Trains on 20 videos per gesture (seed 3) and synthesizes 2 held-out per gesture.
fn trained(dir: &Path) -> String {
    ok(dir, &["synth", "--output", "train", "--seed", "3"]);
    ok(
        dir,
        &[
            "synth",
            "--output",
            "test",
            "--seed",
            "1003",
            "--videos-per-profile",
            "2",
        ],
    );
    ok(
        dir,
        &["train", "--input", "train", "--model", "model.txt", "--seed", "3"],
    )
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn synth_defaults_write_eighty_files_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--output", "out"]);
    assert_eq!(lmk_count(&d.path().join("out")), 80);
    let manifest = std::fs::read_to_string(d.path().join("out/manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 81);
    assert_eq!(manifest.lines().filter(|l| l.ends_with(",push")).count(), 20);
}

#[test]
fn synth_minimal_corpus() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["synth", "--output", "out", "--videos-per-profile", "1", "--frames", "2"],
    );
    assert_eq!(lmk_count(&d.path().join("out")), 4);
}

#[test]
fn synth_same_seed_same_bytes() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["synth", "--output", "a", "--seed", "5", "--videos-per-profile", "2"],
    );
    ok(
        d.path(),
        &["synth", "--output", "b", "--seed", "5", "--videos-per-profile", "2"],
    );
    for e in std::fs::read_dir(d.path().join("a")).unwrap() {
        let name = e.unwrap().file_name();
        let a = std::fs::read(d.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(d.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
}

#[test]
fn synth_into_a_file_fails() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("taken"), "x").unwrap();
    let out = run(d.path(), &["synth", "--output", "taken", "--videos-per-profile", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_one_before_touching_files() {
    let d = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["train", "--input", "missing", "--model", "m.txt", "--tol", "0"],
        &["train", "--input", "missing", "--model", "m.txt", "--k", "0"],
        &[
            "train",
            "--input",
            "missing",
            "--model",
            "m.txt",
            "--cov-mode",
            "spherical",
        ],
        &["synth", "--output", "s", "--frames", "1"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = run(d.path(), args);
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!d.path().join("s").exists());
    assert_eq!(code(&run(d.path(), &["--help"])), 0);
}

#[test]
fn train_prints_summary_and_writes_model() {
    let d = tempfile::tempdir().unwrap();
    let out = trained(d.path());
    assert_eq!(field(&out, "rows"), "1680");
    assert_eq!(field(&out, "k"), "4");
    assert_eq!(field(&out, "converged"), "true");
    let s: f64 = field(&out, "silhouette").parse().unwrap();
    assert!((0.45..=0.80).contains(&s));
    assert!(field(&out, "iterations").parse::<usize>().unwrap() > 0);
    let model = std::fs::read_to_string(d.path().join("model.txt")).unwrap();
    assert!(model.starts_with("gesture-gmm-model v1\n"));
}

#[test]
fn train_from_feature_csv_matches_train_from_videos() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["synth", "--output", "v", "--seed", "8", "--videos-per-profile", "5"],
    );
    ok(
        d.path(),
        &["train", "--input", "v", "--model", "a.txt", "--output", "f.csv"],
    );
    ok(d.path(), &["train", "--input", "f.csv", "--model", "b.txt"]);
    let a = std::fs::read(d.path().join("a.txt")).unwrap();
    let b = std::fs::read(d.path().join("b.txt")).unwrap();
    assert_eq!(a, b);
    let csv = std::fs::read_to_string(d.path().join("f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20 * 21);
}

#[test]
fn mismatched_k_warns_and_proceeds() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--output", "v", "--videos-per-profile", "5"]);
    let out = run(d.path(), &["train", "--input", "v", "--model", "m.txt", "--k", "3"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(field(&String::from_utf8(out.stdout).unwrap(), "k"), "3");
}

#[test]
fn train_data_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    std::fs::create_dir(d.path().join("empty")).unwrap();
    assert_eq!(
        code(&run(d.path(), &["train", "--input", "empty", "--model", "m.txt"])),
        2
    );
    assert_eq!(
        code(&run(d.path(), &["train", "--input", "nowhere", "--model", "m.txt"])),
        2
    );

    let v = &generate_dataset::<f64>(&default_profiles(), 1, 20, 1).unwrap()[0];
    std::fs::create_dir(d.path().join("unlabeled")).unwrap();
    let bare = GestureVideo::new(v.frames().to_vec(), "bare", None).unwrap();
    write_video(&bare, &d.path().join("unlabeled/bare.lmk")).unwrap();
    assert_eq!(
        code(&run(d.path(), &["train", "--input", "unlabeled", "--model", "m.txt"])),
        2
    );

    std::fs::create_dir(d.path().join("one")).unwrap();
    write_video(v, &d.path().join("one/v.lmk")).unwrap();
    let out = run(d.path(), &["train", "--input", "one", "--model", "m.txt", "--k", "30"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!d.path().join("m.txt").exists());
}

#[test]
fn classify_held_out_videos() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let out = run(d.path(), &["classify", "--model", "model.txt", "--input", "test"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "source_id,winner,margin,count_pick,count_push,count_stack,count_wave"
    );
    let records: Vec<&str> = lines.clone().take_while(|l| !l.contains('=')).collect();
    assert_eq!(records.len(), 8);
    for r in &records {
        let cells: Vec<&str> = r.split(',').collect();
        let counts: Vec<usize> = cells[3..].iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(counts.iter().sum::<usize>(), 21);
        assert!(cells[0].starts_with(cells[1]), "{r}");
    }
    assert!(records.iter().any(|r| r.split(',').nth(2) == Some("21")));
    assert!(field(&stdout, "accuracy").starts_with("1.0000 (8/8)"));
    let s: f64 = field(&stdout, "silhouette").parse().unwrap();
    assert!((0.3..=0.9).contains(&s));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("s/frame over 1200 frames"));
    assert_eq!(stderr.lines().filter(|l| l.starts_with("dispatch ")).count(), 8);
}

#[test]
fn classify_on_training_set_reproduces_confidences() {
    let d = tempfile::tempdir().unwrap();
    let train = trained(d.path());
    let out = ok(d.path(), &["classify", "--model", "model.txt", "--input", "train"]);
    for c in 0..4 {
        let line = field(&train, &format!("cluster.{c}.label"));
        let conf = line.split("confidence=").nth(1).unwrap().split(' ').next().unwrap();
        assert_eq!(field(&out, &format!("cluster.{c}.agreement")), conf);
    }
}

#[test]
fn classify_rejects_unknown_labels_and_bad_models() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let v = &generate_dataset::<f64>(&default_profiles(), 1, 20, 1).unwrap()[0];
    let odd = GestureVideo::new(v.frames().to_vec(), "odd", Some("juggle".into())).unwrap();
    write_video(&odd, &d.path().join("odd.lmk")).unwrap();
    assert_eq!(
        code(&run(
            d.path(),
            &["classify", "--model", "model.txt", "--input", "odd.lmk"]
        )),
        2
    );

    let model = std::fs::read_to_string(d.path().join("model.txt")).unwrap();
    std::fs::write(d.path().join("v2.txt"), model.replacen("v1", "v2", 1)).unwrap();
    let out = run(d.path(), &["classify", "--model", "v2.txt", "--input", "test"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn score_reports_silhouette_and_rejects_one_cluster() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let out = ok(d.path(), &["score", "--model", "model.txt", "--input", "train"]);
    let s: f64 = field(&out, "silhouette.overall").parse().unwrap();
    assert!((0.45..=0.80).contains(&s));
    assert_eq!(field(&out, "silhouette.points"), "1680");
    assert_eq!(out.lines().filter(|l| l.starts_with("silhouette.cluster.")).count(), 4);

    // one unanimous video: all 21 rows land in a single cluster
    let one = run(
        d.path(),
        &["score", "--model", "model.txt", "--input", "train/wave_0000.lmk"],
    );
    assert_eq!(code(&one), 2);
    assert!(String::from_utf8_lossy(&one.stderr).contains("2 clusters"));

    let k1 = run(
        d.path(),
        &["train", "--input", "train", "--model", "one.txt", "--k", "1"],
    );
    assert_eq!(code(&k1), 2);
}

#[test]
fn plot_export_has_one_line_per_row() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--output", "v", "--seed", "2"]);
    ok(
        d.path(),
        &["train", "--input", "v", "--model", "m.txt", "--plot", "plot"],
    );
    for (name, groups) in [("before.txt", 4), ("after.txt", 4)] {
        let text = std::fs::read_to_string(d.path().join("plot").join(name)).unwrap();
        assert_eq!(text.lines().count(), 1681);
        let distinct: std::collections::BTreeSet<&str> =
            text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
        assert_eq!(distinct.len(), groups);
    }
}
