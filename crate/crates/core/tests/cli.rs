//! End-to-end runs of the `qloc` binary on small images.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qloc::image::{load_image, save_image, ImageGrid};
use qloc::noisebench::{add_poisson_noise, make_phantom, NoiseSpec, PhantomKind};

const SIDE: usize = 24;

fn qloc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qloc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn qloc")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = qloc(args, dir);
    assert!(
        out.status.success(),
        "qloc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn key_values(stdout: &str) -> HashMap<String, String> {
    stdout
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap_or_else(|| panic!("not key=value: {l}"));
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn num(kv: &HashMap<String, String>, key: &str) -> f64 {
    kv[key].parse().unwrap_or_else(|_| panic!("{key}={}", kv[key]))
}

/// Clean phantom and its SNR-2 realization as 8-bit PGMs.
fn fixtures(dir: &Path) -> (PathBuf, PathBuf) {
    let clean: ImageGrid<f64> = make_phantom(PhantomKind::Blocks, SIDE, 7).unwrap();
    let noisy = add_poisson_noise(&clean, &NoiseSpec::new(2.0, 1)).unwrap().image;
    let (c, n) = (dir.join("clean.pgm"), dir.join("noisy.pgm"));
    save_image(&clean, &c).unwrap();
    save_image(&noisy, &n).unwrap();
    (c, n)
}

#[test]
fn denoise_writes_image_report_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let stdout = ok(
        &[
            "denoise",
            "noisy.pgm",
            "out.pgm",
            "--reference",
            "clean.pgm",
            "--spectrum-csv",
            "spec.csv",
        ],
        dir.path(),
    );
    let kv = key_values(&stdout);
    assert_eq!(kv["method"], "selected_modes");
    assert_eq!(
        num(&kv, "kept_count") + num(&kv, "discarded_count"),
        (SIDE * SIDE) as f64
    );
    assert!(kv.contains_key("psnr_db") && kv.contains_key("ssim") && kv.contains_key("pr_threshold"));
    let out: ImageGrid<f64> = load_image(dir.path().join("out.pgm")).unwrap();
    assert_eq!(out.side(), SIDE);

    let report = std::fs::read_to_string(dir.path().join("out.report.txt")).unwrap();
    assert_eq!(key_values(&report)["kept_count"], kv["kept_count"]);

    let csv = std::fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mode_index,eigenvalue,participation_ratio,kept"));
    let kept: f64 = lines
        .clone()
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert_eq!(lines.count(), SIDE * SIDE);
    assert_eq!(kept, num(&kv, "kept_count"));
}

#[test]
fn all_modes_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let kv = key_values(&ok(&["denoise", "noisy.pgm", "out.pgm", "--all-modes"], dir.path()));
    assert_eq!(kv["method"], "all_modes");
    assert_eq!(kv["discarded_count"], "0");
    let input: ImageGrid<f64> = load_image(dir.path().join("noisy.pgm")).unwrap();
    let output: ImageGrid<f64> = load_image(dir.path().join("out.pgm")).unwrap();
    assert_eq!(input, output);
}

#[test]
fn larger_alpha_localizes_fewer_modes() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let run = |alpha: &str, out: &str| key_values(&ok(&["denoise", "noisy.pgm", out, "--alpha", alpha], dir.path()));
    let small = run("0.25", "a.pgm");
    let large = run("4", "b.pgm");
    assert!(num(&large, "effective_hbar") > num(&small, "effective_hbar"));
    assert!(num(&large, "kept_count") < num(&small, "kept_count"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    std::fs::write(dir.path().join("q.conf"), "alpha=2\nbins=32\n").unwrap();
    let kv = key_values(&ok(
        &["denoise", "noisy.pgm", "a.pgm", "--config", "q.conf"],
        dir.path(),
    ));
    assert_eq!(kv["alpha"], "2");
    let kv = key_values(&ok(
        &["denoise", "noisy.pgm", "b.pgm", "--config", "q.conf", "--alpha", "0.5"],
        dir.path(),
    ));
    assert_eq!(kv["alpha"], "0.5");

    std::fs::write(dir.path().join("bad.conf"), "colour=blue\n").unwrap();
    let out = qloc(&["denoise", "noisy.pgm", "c.pgm", "--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("c.pgm").exists());
}

#[test]
fn failures_exit_nonzero_without_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    // The image is saved before the report fails, and is then removed again.
    let out = qloc(
        &["denoise", "noisy.pgm", "out.pgm", "--report", "missing/dir/report.txt"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out.pgm").exists());

    let out = qloc(&["denoise", "noisy.pgm", "out.pgm", "--max-dim", "100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));

    let out = qloc(&["denoise", "absent.pgm", "out.pgm"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_emits_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let first = ok(&["analyze", "noisy.pgm", "--out-dir", "a"], dir.path());
    let kv = key_values(&first);
    let read = |name: &str| std::fs::read_to_string(dir.path().join("a").join(name)).unwrap();
    let spectrum = read("noisy_spectrum.csv");
    assert_eq!(spectrum.lines().count(), SIDE * SIDE + 1);
    let histogram = read("noisy_histogram.csv");
    assert_eq!(histogram.lines().next(), Some("bin_center,count,fit_value"));
    assert_eq!(histogram.lines().count(), 64 + 1);
    for svg in ["noisy_spectrum.svg", "noisy_histogram.svg"] {
        let text = read(svg);
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
        assert!(!text.contains("href"));
    }
    // The high-eigenvalue modes sit inside the bright blocks and localize.
    assert!(num(&kv, "mean_pr_top5") < num(&kv, "mean_pr_middle50"));

    let second = ok(&["analyze", "noisy.pgm", "--out-dir", "b"], dir.path());
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| !l.contains(".csv") && !l.contains(".svg"))
            .map(String::from)
            .collect()
    };
    assert_eq!(strip(&first), strip(&second));
    let other = std::fs::read_to_string(dir.path().join("b/noisy_spectrum.csv")).unwrap();
    assert_eq!(spectrum, other);
}

#[test]
fn noise_is_reproducible_and_reports_snr() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let a = key_values(&ok(
        &["noise", "clean.pgm", "n1.pgm", "--snr-db", "15", "--seed", "42"],
        dir.path(),
    ));
    ok(
        &["noise", "clean.pgm", "n2.pgm", "--snr-db", "15", "--seed", "42"],
        dir.path(),
    );
    assert!((num(&a, "achieved_snr_db") - 15.0).abs() <= 0.3);
    let (b1, b2) = (
        std::fs::read(dir.path().join("n1.pgm")).unwrap(),
        std::fs::read(dir.path().join("n2.pgm")).unwrap(),
    );
    assert_eq!(b1, b2);

    let zero = ImageGrid::filled(SIDE, 0.0).unwrap();
    save_image(&zero, dir.path().join("zero.pgm")).unwrap();
    let out = qloc(&["noise", "zero.pgm", "z.pgm", "--snr-db", "15"], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(!dir.path().join("z.pgm").exists());
}

#[test]
fn metrics_prints_psnr_and_ssim() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let kv = key_values(&ok(&["metrics", "clean.pgm", "clean.pgm"], dir.path()));
    assert_eq!(kv["psnr_db"], "inf");
    assert_eq!(num(&kv, "ssim"), 1.0);
    let kv = key_values(&ok(&["metrics", "clean.pgm", "noisy.pgm"], dir.path()));
    assert!(num(&kv, "psnr_db").is_finite() && num(&kv, "ssim") < 1.0);
}

#[test]
fn bench_rows_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        &[
            "bench",
            "--side",
            "16",
            "--snrs",
            "2,5,15",
            "--seeds",
            "1,2,3",
            "-o",
            "bench.csv",
        ],
        dir.path(),
    );
    assert!(stdout.contains("rows=18"));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("snr_db,seed,method,ssim,psnr_db,compression_ratio,t_eigen_s,t_fit_s,t_reconstruct_s")
    );
    assert_eq!(lines.count(), 18);

    let out = qloc(&["bench", "--snrs", ""], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_spectrum_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    ok(&["sweep-hbar", "noisy.pgm", "--out-dir", "s"], dir.path());
    let summary = std::fs::read_to_string(dir.path().join("s/noisy_sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(summary.lines().next(), Some("alpha,median_pr,localized_fraction"));
    assert_eq!(rows.len(), 5);
    for alpha in ["0.25", "0.5", "1", "2", "4"] {
        assert!(dir.path().join(format!("s/noisy_alpha{alpha}_spectrum.csv")).exists());
    }
    assert!(rows[4][1] >= rows[0][1], "median PR at alpha 4 below alpha 0.25");

    // A single alpha of 1 agrees with analyze.
    let sweep = ok(
        &["sweep-hbar", "noisy.pgm", "--alphas", "1", "--out-dir", "t"],
        dir.path(),
    );
    let analyze = key_values(&ok(&["analyze", "noisy.pgm", "--out-dir", "u"], dir.path()));
    let line = sweep.lines().next().unwrap();
    assert!(line.contains(&format!("median_pr={}", analyze["median_pr"])));
    assert!(line.contains(&format!("localized_fraction={}", analyze["localized_fraction"])));
}
