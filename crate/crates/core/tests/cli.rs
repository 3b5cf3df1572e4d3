use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use motmask::mask::{bbox_mask, dilate, read_pgm, BinaryMask, StructuringElement};
use serde_json::Value;

fn motmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motmask"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load(p: &Path) -> BinaryMask {
    read_pgm(&fs::read(p).unwrap()).unwrap()
}

/// Small model so thousands of steps finish quickly in debug builds.
fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.json");
    fs::write(
        &path,
        r#"{"d_model": 8, "n_heads": 2, "n_experts": 3, "lora_rank": 1, "gate_hidden": 4,
            "categories": 2, "per_category": 2, "batch_size": 1}"#,
    )
    .unwrap();
    path
}

fn stages(jsonl: &str) -> Vec<String> {
    jsonl
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["stage"]
                .as_str()
                .unwrap()
                .to_owned()
        })
        .collect()
}

#[test]
fn golden_files_satisfy_stage_contracts() {
    // a = 8 and alpha = 6 are the command defaults.
    let fine = load(&fixture("fixture_mask.pgm"));
    let golden_fine = load(&fixture("golden_seed42_fine.pgm"));
    let rough = load(&fixture("golden_seed42_rough.pgm"));
    let boxed = load(&fixture("golden_seed42_bbox.pgm"));
    assert_eq!(golden_fine, fine);
    let reach = dilate(&fine, StructuringElement::disc(14.0).unwrap());
    assert!(rough.is_subset_of(&reach));
    assert_ne!(rough, fine);
    assert!(boxed.is_solid_rectangle());
    assert_eq!(boxed, bbox_mask(&rough));
    assert!(fine.is_subset_of(&boxed));
}

#[test]
fn fine_stage_is_canonical_reencoding() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.pgm");
    // Comment, maxval 1 and nonzero foreground values are all accepted.
    let mut bytes = b"P5\n# note\n3 2\n1\n".to_vec();
    bytes.extend([0, 1, 0, 1, 1, 0]);
    fs::write(&input, &bytes).unwrap();
    let out = dir.path().join("out.pgm");
    let r = motmask(&[
        "augment-mask",
        "--in",
        s(&input),
        "--out",
        s(&out),
        "--stage",
        "fine",
    ]);
    assert!(r.status.success());
    let mut want = b"P5\n3 2\n255\n".to_vec();
    want.extend([0, 255, 0, 255, 255, 0]);
    assert_eq!(fs::read(&out).unwrap(), want);
}

#[test]
fn augment_mask_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let r = motmask(&[
            "augment-mask",
            "--in",
            s(&fixture("fixture_mask.pgm")),
            "--out",
            s(&out),
            "--stage",
            "rough",
            "--seed",
            seed,
            "--a",
            "3",
            "--alpha",
            "4",
        ]);
        assert!(r.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(run("5", "a.pgm"), run("5", "b.pgm"));
    assert_ne!(run("5", "a.pgm"), run("6", "c.pgm"));
}

#[test]
fn augment_mask_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.pgm");

    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P2\n2 2\n255\n0 0 0 0").unwrap();
    let r = motmask(&[
        "augment-mask",
        "--in",
        s(&bad),
        "--out",
        s(&out),
        "--stage",
        "rough",
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!r.stderr.is_empty());

    let empty = dir.path().join("empty.pgm");
    fs::write(&empty, [b"P5\n2 2\n255\n".as_slice(), &[0; 4]].concat()).unwrap();
    for stage in ["rough", "bbox"] {
        let r = motmask(&[
            "augment-mask",
            "--in",
            s(&empty),
            "--out",
            s(&out),
            "--stage",
            stage,
        ]);
        assert_eq!(r.status.code(), Some(3), "{stage}");
    }
    let r = motmask(&[
        "augment-mask",
        "--in",
        s(&empty),
        "--out",
        s(&out),
        "--stage",
        "fine",
    ]);
    assert_eq!(r.status.code(), Some(0));

    let r = motmask(&[
        "augment-mask",
        "--in",
        s(&empty),
        "--out",
        s(&out),
        "--stage",
        "coarse",
    ]);
    assert_eq!(r.status.code(), Some(2));
    let r = motmask(&[
        "augment-mask",
        "--in",
        s(&empty),
        "--out",
        s(&out),
        "--stage",
        "rough",
        "--scale",
        "0",
    ]);
    assert_eq!(r.status.code(), Some(2));
    let r = motmask(&["augment-mask", "--stage", "rough"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn route_demo_output() {
    let a = motmask(&["route-demo", "--seed", "11"]);
    let b = motmask(&["route-demo", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let w: Vec<f64> = serde_json::from_value(v["weights"].clone()).unwrap();
    let active: Vec<usize> = serde_json::from_value(v["active_set"].clone()).unwrap();
    let backbone = v["backbone_index"].as_u64().unwrap() as usize;
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(active.contains(&backbone));
    assert!(active.len() >= 2);
}

#[test]
fn route_demo_accepts_rank_32_with_8_experts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"d_model": 64, "n_heads": 4, "n_experts": 8, "lora_rank": 32}"#,
    )
    .unwrap();
    let r = motmask(&["--config", s(&cfg), "route-demo"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["weights"].as_array().unwrap().len(), 8);
}

#[test]
fn route_demo_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"n_experts\": 1}").unwrap();
    assert_eq!(
        motmask(&["--config", s(&cfg), "route-demo"]).status.code(),
        Some(2)
    );
    fs::write(&cfg, "not json").unwrap();
    assert_eq!(
        motmask(&["--config", s(&cfg), "route-demo"]).status.code(),
        Some(2)
    );
}

#[test]
fn train_toy_four_steps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("curve.jsonl");
    let r = motmask(&[
        "--config",
        s(&cfg),
        "train-toy",
        "--steps",
        "4",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(stages(&text), ["Fine", "Fine", "Rough", "BBox"]);
    let report: Value = serde_json::from_slice(&r.stdout).unwrap();
    let hist = report["per_category_expert_histogram"].as_array().unwrap();
    assert_eq!(hist.len(), 2);
    for row in hist {
        let n: u64 = row
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .sum();
        assert_eq!(n, 2);
    }
    let h = report["mean_routing_entropy"].as_f64().unwrap();
    assert!((0.0..=3f64.ln() + 1e-12).contains(&h));
}

#[test]
fn train_toy_full_schedule_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("curve.jsonl");
    let r = motmask(&[
        "--config",
        s(&cfg),
        "train-toy",
        "--steps",
        "6000",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let st = stages(&fs::read_to_string(&out).unwrap());
    assert_eq!(st.len(), 6000);
    assert_eq!((st[2999].as_str(), st[3000].as_str()), ("Fine", "Rough"));
    assert_eq!((st[4499].as_str(), st[4500].as_str()), ("Rough", "BBox"));
}

#[test]
fn train_toy_is_reproducible_and_writes_weights() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(format!("{name}.jsonl"));
        let weights = dir.path().join(format!("{name}.motw"));
        let r = motmask(&[
            "--config",
            s(&cfg),
            "--seed",
            "3",
            "train-toy",
            "--steps",
            "12",
            "--out",
            s(&out),
            "--weights",
            s(&weights),
        ]);
        assert!(r.status.success());
        (fs::read(out).unwrap(), fs::read(weights).unwrap(), r.stdout)
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(&a.1[..4], b"MOTW");
}

#[test]
fn train_toy_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("curve.jsonl");
    let r = motmask(&[
        "--config",
        s(&cfg),
        "train-toy",
        "--steps",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    let r = motmask(&[
        "--config",
        s(&cfg),
        "train-toy",
        "--steps",
        "50",
        "--learning-rate",
        "1e300",
        "--out",
        s(&out),
    ]);
    assert_eq!(
        r.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
}

#[test]
fn schedule_command() {
    let run = |args: &[&str]| {
        let r = motmask(args);
        (r.status.code(), String::from_utf8(r.stdout).unwrap())
    };
    assert_eq!(
        run(&["schedule", "--step", "0"]),
        (Some(0), "Fine\n".into())
    );
    assert_eq!(
        run(&["schedule", "--step", "4500"]),
        (Some(0), "BBox\n".into())
    );
    assert_eq!(
        run(&["schedule", "--fine", "0", "--rough", "1", "--bbox", "0", "--step", "0"]),
        (Some(0), "Rough\n".into())
    );
    assert_eq!(run(&["schedule", "--step", "6000"]).0, Some(3));
    assert_eq!(run(&["schedule", "--step", "-1"]).0, Some(2));
    assert_eq!(run(&["frobnicate"]).0, Some(2));
    assert_eq!(run(&["--help"]).0, Some(0));
}
