mod common;

use std::path::Path;
use std::process::{Command, Output};

use audlet::experiments::speech_like;
use audlet::io::{read_wav, write_wav, Signal, WavEncoding};
use tempfile::tempdir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_audlet")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn speech(dir: &Path, name: &str, len: usize, seed: u64) -> std::path::PathBuf {
    let p = dir.join(name);
    let sig = Signal { samples: speech_like(16000.0, len, 120.0, seed), fs: 16000.0 };
    write_wav(&p, &sig, WavEncoding::Float32).unwrap();
    p
}

#[test]
fn invalid_arguments_exit_with_code_2() {
    let dir = tempdir().unwrap();
    let bank = dir.path().join("b.json");
    assert_eq!(run(&["design", "--fmax", "9000", "-o", s(&bank)]).status.code(), Some(2));
    assert_eq!(run(&["design", "--redfac", "-1", "-o", s(&bank)]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert!(!bank.exists());
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_files_exit_with_code_3() {
    let dir = tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "not json").unwrap();
    let out = dir.path().join("r.csv");
    assert_eq!(run(&["respond", "--bank", s(&junk), "-o", s(&out)]).status.code(), Some(3));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["respond", "--bank", s(&missing), "-o", s(&out)]).status.code(), Some(3));
}

#[test]
fn analysis_and_synthesis_round_trip() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let len = 16000;
    let wav = speech(d, "x.wav", len, 3);
    let bank = d.join("b.json");
    let report = ok(&["design", "--len", "16000", "--v", "1", "--redfac", "1", "-o", s(&bank)]);
    assert!(report.contains("painless"));
    let coef = d.join("x.audc");
    ok(&["analyze", "--bank", s(&bank), "-i", s(&wav), "-o", s(&coef)]);
    let x = read_wav(&wav).unwrap().samples;
    let mut outs = Vec::new();
    for method in ["painless", "cg"] {
        let y = d.join(format!("{method}.wav"));
        ok(&["synthesize", "--bank", s(&bank), "-i", s(&coef), "-o", s(&y), "--method", method]);
        outs.push(read_wav(&y).unwrap().samples);
    }
    // Output is stored as float32, so agreement is limited by that precision.
    for y in &outs {
        assert!(common::rel(&x, y) < 1e-6);
    }
    assert!(common::rel(&outs[0], &outs[1]) < 1e-6);
    // At this length the factors have a large lcm, so the uniform expansion is too big.
    let y = d.join("uniform.wav");
    let out = run(&["synthesize", "--bank", s(&bank), "-i", s(&coef), "-o", s(&y), "--method", "uniform"]);
    assert_eq!(out.status.code(), Some(4));

    let other = d.join("o.json");
    ok(&["design", "--len", "16000", "--v", "1", "--redfac", "2", "-o", s(&other)]);
    let y = d.join("bad.wav");
    assert_eq!(run(&["synthesize", "--bank", s(&other), "-i", s(&coef), "-o", s(&y)]).status.code(), Some(3));
}

#[test]
fn cg_iteration_limit_exits_with_code_4() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let wav = speech(d, "x.wav", 16000, 4);
    let bank = d.join("b.json");
    ok(&["design", "--len", "16000", "--v", "1", "--redfac", "0.38", "-o", s(&bank)]);
    let coef = d.join("x.audc");
    ok(&["analyze", "--bank", s(&bank), "-i", s(&wav), "-o", s(&coef)]);
    let y = d.join("y.wav");
    let out = run(&["synthesize", "--bank", s(&bank), "-i", s(&coef), "-o", s(&y), "--maxit", "2", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(4));
    let painless = run(&["synthesize", "--bank", s(&bank), "-i", s(&coef), "-o", s(&y), "--method", "painless"]);
    assert_eq!(painless.status.code(), Some(2));
}

#[test]
fn csv_exports_are_deterministic() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let wav = speech(d, "x.wav", 8000, 5);
    let bank = d.join("b.json");
    ok(&["design", "--len", "8000", "--v", "1", "-o", s(&bank)]);
    for (cmd, extra) in [("respond", vec![]), ("spectrogram", vec!["-i", s(&wav)])] {
        let (a, b) = (d.join(format!("{cmd}a.csv")), d.join(format!("{cmd}b.csv")));
        for p in [&a, &b] {
            let mut args = vec![cmd, "--bank", s(&bank), "-o", s(p)];
            args.extend(extra.iter().copied());
            ok(&args);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn compare_gammatone_reports_expected_errors() {
    let text = ok(&["compare-gammatone", "--redfac", "1"]);
    let row: Vec<f64> = text
        .lines()
        .find(|l| l.trim_start().starts_with("1.00"))
        .expect("row for redfac 1")
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    let (audlet, roex, gammatone) = (row[2], row[3], row[4]);
    assert!(audlet <= 1e-10, "{text}");
    assert!((gammatone - 0.10).abs() <= 0.05, "{text}");
    assert!((roex - 0.12).abs() <= 0.06, "{text}");
}

#[test]
fn separation_and_denoising_run_end_to_end() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let t = speech(d, "t.wav", 16000, 6);
    let i = {
        let p = d.join("i.wav");
        let sig = Signal { samples: speech_like(16000.0, 16000, 210.0, 7), fs: 16000.0 };
        write_wav(&p, &sig, WavEncoding::Float32).unwrap();
        p
    };
    let bank = d.join("b.json");
    ok(&["design", "--len", "16000", "--v", "1", "--redfac", "1", "-o", s(&bank)]);
    let mask = d.join("m.audm");
    let est = d.join("e.wav");
    let first = ok(&[
        "mask-separate", "--bank", s(&bank), "--target", s(&t), "--interferer", s(&i), "--save-mask", s(&mask), "-o",
        s(&est),
    ]);
    assert!(first.contains("SDR") && mask.exists() && est.exists());
    let again =
        ok(&["mask-separate", "--bank", s(&bank), "--target", s(&t), "--interferer", s(&i), "--mask", s(&mask)]);
    assert_eq!(first, again);

    let out = d.join("dn.wav");
    let report = ok(&["denoise", "-i", s(&t), "--sigma", "0.02", "--v", "1", "--bwdiv", "1", "--redfac", "1", "-o", s(&out)]);
    assert!(report.contains("SNR") && out.exists());
}
