use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scribblekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scribblekit")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn synth(dir: &Path, train: usize, test: usize) {
    let out = dir.to_str().unwrap();
    stdout(&scribblekit(&["synth-gen", "--out", out, "--train", &train.to_string(), "--test", &test.to_string()]));
}

#[test]
fn gradcheck_is_repeatable() {
    let args = ["gradcheck", "--seed", "7", "--instances", "5"];
    let first = stdout(&scribblekit(&args));
    assert_eq!(first, stdout(&scribblekit(&args)));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 6);
    for (line, loss) in lines.iter().zip(["pce", "lsc", "ssc", "gsa", "composite"]) {
        assert!(line.starts_with(loss) && line.ends_with("PASS"), "{line}");
    }
    assert_eq!(lines[5], "gradcheck seed 7 PASS");
}

#[test]
fn failed_gradient_check_exits_one() {
    let out = scribblekit(&["gradcheck", "--instances", "2", "--rel-tol", "0", "--abs-tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "mu = 0.1\nunknown_key = 3\n").unwrap();
    let missing = dir.path().join("absent");
    let missing = missing.to_str().unwrap();
    for args in [
        vec!["gradcheck", "--no-such-flag"],
        vec!["metrics", "--pred-dir", missing, "--gt-dir", missing],
        vec!["--config", bad.to_str().unwrap(), "gradcheck", "--instances", "1"],
        vec!["--config", missing, "train-demo", "--out", missing],
        vec!["--set", "mu=abc", "train-demo", "--out", missing],
        vec!["ncut-compare"],
    ] {
        assert_eq!(scribblekit(&args).status.code(), Some(2), "{args:?}");
    }
    let stderr = String::from_utf8(scribblekit(&["--config", bad.to_str().unwrap(), "loss-eval", "--image", "x", "--mask", "x", "--features", "x", "--pred", "x"]).stderr).unwrap();
    assert!(stderr.contains("config line 2"), "{stderr}");
}

#[test]
fn corrupt_feature_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.gvrf");
    fs::write(&path, b"XXXX0000000000000000").unwrap();
    let out = scribblekit(&["ncut-compare", "--features", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad magic"));
}

#[test]
fn metrics_on_identical_directories() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 0, 4);
    let gt = dir.path().join("test/gt");
    let gt = gt.to_str().unwrap();
    let text = stdout(&scribblekit(&["metrics", "--pred-dir", gt, "--gt-dir", gt]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "image_id,f_beta,mae,e_measure,iou_adaptive");
    assert_eq!(lines.len(), 6);
    let aggregate: Vec<&str> = lines[5].split(',').collect();
    assert_eq!(aggregate[0], "aggregate");
    assert!(aggregate[1].parse::<f64>().unwrap() > 0.99);
    assert_eq!(aggregate[2], "0");

    let out_file = dir.path().join("m.csv");
    stdout(&scribblekit(&["metrics", "--pred-dir", gt, "--gt-dir", gt, "--out", out_file.to_str().unwrap()]));
    assert_eq!(fs::read_to_string(out_file).unwrap(), text);
}

#[test]
fn metrics_requires_matching_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2, 1);
    let preds = dir.path().join("train/gt");
    let gts = dir.path().join("test/gt");
    let out = scribblekit(&["metrics", "--pred-dir", preds.to_str().unwrap(), "--gt-dir", gts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_gen_layout() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3, 2);
    let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 6);
    assert!(manifest.starts_with("split,id,scene_seed,objects\ntrain,000,"));
    for sub in ["image/001.png", "mask/001.png", "gt/001.png", "features/001.gvrf"] {
        assert!(dir.path().join("test").join(sub).is_file(), "{sub}");
    }
    let features = scribblekit::io::read_features(dir.path().join("test/features/000.gvrf")).unwrap();
    assert_eq!((features.grid_h(), features.grid_w(), features.dim()), (8, 8, 16));
}

#[test]
fn loss_eval_prints_every_term() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 0, 1);
    let p = |s: &str| dir.path().join("test").join(s).to_str().unwrap().to_string();
    let (image, mask, features, gt) = (p("image/000.png"), p("mask/000.png"), p("features/000.gvrf"), p("gt/000.png"));
    let base = ["loss-eval", "--image", &image, "--mask", &mask, "--features", &features, "--pred", &gt];
    let text = stdout(&scribblekit(&[&base[..], &["--aux", &gt, "--aux", &gt]].concat()));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("head 0 weight 1 pce ") && lines[0].contains(" ssc - "), "{}", lines[0]);
    assert!(lines[1].starts_with("head 1 weight 0.8 "), "{}", lines[1]);
    assert!(lines[3].starts_with("total "));

    let with_small = stdout(&scribblekit(&[&base[..], &["--pred-small", &gt]].concat()));
    assert!(!with_small.lines().next().unwrap().contains(" ssc - "));
    let pce_only = stdout(&scribblekit(&[&["--mu", "0", "--beta", "0"], &base[..]].concat()));
    let line = pce_only.lines().next().unwrap();
    assert!(line.contains(" lsc - gsa - "), "{line}");
}

#[test]
fn ncut_compare_on_planted_fields() {
    let text = stdout(&scribblekit(&["ncut-compare", "--planted", "3", "--seed", "5"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("field 0 seed 5 "));
    assert_eq!(lines[3], "min gsa_vs_spectral 1.000000 min spectral_vs_planted 1.000000");
}

#[test]
fn train_demo_on_the_pinned_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let text = stdout(&scribblekit(&["train-demo", "--mu", "0.15", "--out", out]));
    assert_eq!(text.lines().count(), 41);
    let log = fs::read_to_string(dir.path().join("log.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch,lr,loss,pce,ssc,lsc,gsa,aux,train_iou,test_iou");
    assert_eq!(lines.len(), 41);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 10 && !l.contains(",,")));
    let config = fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(config.contains("mu = 0.15\n") && config.contains("lr_max = 0.1\n"));
    assert_eq!(fs::read_dir(dir.path().join("predictions")).unwrap().count(), 20);
    let head = scribblekit::io::read_head(dir.path().join("head.bin")).unwrap();
    assert_eq!(head.input_width(), 19);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 22);
}
