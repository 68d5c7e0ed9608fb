use std::path::Path;
use std::process::{Command, Output};

use centripetal::io::Tensor;

fn ctext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctext")).args(args).output().expect("spawn ctext")
}

fn ok(args: &[&str]) -> String {
    let out = ctext(args);
    assert!(
        out.status.success(),
        "ctext {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_lists_default_hyperparameters() {
    let help = ok(&["--help"]);
    for flag in [
        "--shrink-ratio <SHRINK_RATIO>",
        "--threshold <THRESHOLD>",
        "--lambda <LAMBDA>",
        "--ohem-ratio <OHEM_RATIO>",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    for default in ["[default: 0.7]", "[default: 0.2]", "[default: 0.05]", "[default: 3]"] {
        assert!(help.contains(default), "{default} missing from help");
    }
}

#[test]
fn empty_annotations_encode_to_blank_maps() {
    let dir = tempfile::tempdir().unwrap();
    let anns = dir.path().join("empty.jsonl");
    std::fs::write(&anns, "").unwrap();
    let out = dir.path().join("labels");
    ok(&["encode", "--annotations", p(&anns), "--height", "64", "--width", "64", "--out", p(&out)]);

    let kernel = Tensor::read(out.join("kernel.ctmp")).unwrap();
    assert_eq!(kernel.dims(), &[64, 64]);
    assert!(kernel.to_f32_vec().iter().all(|&v| v == 0.0));
    let mask = Tensor::read(out.join("training_mask.ctmp")).unwrap();
    assert!(mask.to_f32_vec().iter().all(|&v| v == 1.0));
    let shift = Tensor::read(out.join("shift.ctmp")).unwrap();
    assert_eq!(shift.dims(), &[64, 64, 2]);
    assert!(shift.to_f32_vec().iter().all(|&v| v == 0.0));
}

#[test]
fn synth_encode_decode_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    let labels = dir.path().join("labels");
    let dets = dir.path().join("dets.jsonl");
    let overlay = dir.path().join("overlay.png");
    ok(&["--seed", "7", "synth", "--height", "320", "--width", "400", "--count", "6", "--out", p(&gt)]);
    ok(&["encode", "--annotations", p(&gt), "--height", "320", "--width", "400", "--out", p(&labels)]);
    ok(&[
        "decode",
        "--prob",
        p(&labels.join("kernel.ctmp")),
        "--shift",
        p(&labels.join("shift.ctmp")),
        "--out",
        p(&dets),
        "--overlay",
        p(&overlay),
        "--gt",
        p(&gt),
    ]);
    assert!(std::fs::metadata(&overlay).unwrap().len() > 0);

    let report: serde_json::Value = serde_json::from_str(&ok(&["eval", "--det", p(&dets), "--gt", p(&gt)])).unwrap();
    assert_eq!(report["fmeasure"], 1.0);
    assert_eq!(report["precision"], 1.0);
    assert_eq!(report["recall"], 1.0);
    let n = std::fs::read_to_string(&gt).unwrap().lines().count();
    assert_eq!(report["num_gts"], n);
}

#[test]
fn perfect_prediction_loss_is_zero_and_gradients_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    let labels = dir.path().join("labels");
    let grads = dir.path().join("grads");
    ok(&["--seed", "3", "synth", "--height", "128", "--width", "160", "--count", "3", "--out", p(&gt)]);
    ok(&["encode", "--annotations", p(&gt), "--height", "128", "--width", "160", "--out", p(&labels)]);
    let stdout = ok(&[
        "loss",
        "--prob",
        p(&labels.join("kernel.ctmp")),
        "--shift",
        p(&labels.join("shift.ctmp")),
        "--labels",
        p(&labels),
        "--grad-out",
        p(&grads),
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(report["total"].as_f64().unwrap() <= 1e-6);
    assert_eq!(report["regression_pixels"], 0);
    assert_eq!(report["lambda"], 0.05);
    for file in ["grad_prob.ctmp", "grad_shift.ctmp", "regression_mask.ctmp"] {
        assert!(grads.join(file).exists(), "{file} not written");
    }
}

#[test]
fn runs_are_deterministic() {
    let a = ok(&["--seed", "11", "synth", "--height", "200", "--width", "200"]);
    let b = ok(&["--seed", "11", "synth", "--height", "200", "--width", "200"]);
    let c = ok(&["--seed", "12", "synth", "--height", "200", "--width", "200"]);
    assert_eq!(a, b);
    assert_ne!(a, c);

    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    let labels = dir.path().join("labels");
    std::fs::write(&gt, &a).unwrap();
    ok(&["encode", "--annotations", p(&gt), "--height", "200", "--width", "200", "--out", p(&labels)]);
    let curve = |seed: &str| {
        ok(&[
            "--seed",
            seed,
            "perturb",
            "--labels",
            p(&labels),
            "--mode",
            "gaussian_noise",
            "--magnitudes",
            "0,1,4",
        ])
    };
    let first = curve("5");
    assert_eq!(first, curve("5"));
    assert_eq!(first.lines().count(), 4, "header plus three magnitudes:\n{first}");

    let decode = |parallel: bool| {
        let prob = labels.join("kernel.ctmp");
        let shift = labels.join("shift.ctmp");
        let mut args = vec!["decode", "--prob", p(&prob), "--shift", p(&shift)];
        if parallel {
            args.push("--parallel");
        }
        ok(&args)
    };
    assert_eq!(decode(false), decode(true));
}

#[test]
fn bench_prints_csv() {
    let out = ok(&["bench", "--height", "96", "--width", "96", "--instances", "3", "--repetitions", "2", "--parallel", "2"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(lines[0].starts_with("height,width,instances,repetitions,threads"));
    assert!(lines[1].starts_with("96,96,"));
    assert!(lines[2].split(',').nth(4) == Some("2"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(ctext(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ctext(&["decode", "--prob", "x.ctmp"]).status.code(), Some(1));
    assert_eq!(ctext(&["--connectivity", "6", "synth", "--height", "8", "--width", "8"]).status.code(), Some(1));
    assert_eq!(ctext(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.ctmp");
    let out = ctext(&["decode", "--prob", p(&missing), "--shift", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.ctmp"));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"polygon\": [[0, 0], [1, 1]]}\n").unwrap();
    let out = ctext(&["encode", "--annotations", p(&bad), "--height", "8", "--width", "8", "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));

    let junk = dir.path().join("junk.ctmp");
    std::fs::write(&junk, b"not a tensor").unwrap();
    let out = ctext(&["decode", "--prob", p(&junk), "--shift", p(&junk)]);
    assert_eq!(out.status.code(), Some(2));
}
