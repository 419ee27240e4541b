use std::io::Write;
use std::path::{Path, PathBuf};

use super::{
    AnalyzeArgs, BenchArgs, CliConfig, Command, DenoiseArgs, MetricsArgs, NoiseArgs, OutputGuard, PhantomArgs,
    SweepArgs,
};
use crate::denoise::{adaptive_basis, localize, run_pipeline, AdaptiveBasis, DenoiseConfig, Localization, Method};
use crate::error::{Error, Result};
use crate::image::{load_image, save_image_with_depth, BitDepth, ImageGrid};
use crate::localization::participation_ratios;
use crate::noisebench::{
    add_poisson_noise, bench_run, make_phantom, psnr, snr_db, ssim, write_bench_csv, BenchConfig, NoiseSpec,
};
use crate::plot::{histogram_svg, spectrum_scatter_svg};

pub(super) fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Denoise(args) => cmd_denoise(&args, stdout),
        Command::Analyze(args) => cmd_analyze(&args, stdout),
        Command::Noise(args) => cmd_noise(&args, stdout),
        Command::Metrics(args) => cmd_metrics(&args, stdout),
        Command::Bench(args) => cmd_bench(&args, stdout),
        Command::SweepHbar(args) => cmd_sweep_hbar(&args, stdout),
        Command::Phantom(args) => cmd_phantom(&args, stdout),
    }
}

fn emit(stdout: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(stdout, "{key}={value}").map_err(|e| Error::io("<stdout>", e))
}

fn save(guard: &mut OutputGuard, img: &ImageGrid<f64>, path: &Path, depth: BitDepth) -> Result<()> {
    guard.track(path);
    save_image_with_depth(img, path, depth)
}

fn prefix_for(input: &Path, prefix: &Option<String>) -> String {
    prefix.clone().unwrap_or_else(|| {
        input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into())
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_denoise(args: &DenoiseArgs, stdout: &mut dyn Write) -> Result<()> {
    let method = if args.all_modes {
        Method::AllModes
    } else {
        Method::SelectedModes
    };
    let config = args.pipeline.resolve(None)?.denoise_config(method)?;
    let img: ImageGrid<f64> = load_image(&args.input)?;
    let reference: Option<ImageGrid<f64>> = args.reference.as_ref().map(load_image).transpose()?;

    let mut run = run_pipeline(&img, &config)?;
    if let Some(clean) = &reference {
        run.report.attach_reference(clean, &run.output)?;
    }

    let mut guard = OutputGuard::new();
    save(&mut guard, &run.output, &args.output, args.depth)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.output.with_extension("report.txt"));
    guard.write_with(&report_path, |out| run.report.write_key_values(out))?;
    if let Some(path) = &args.spectrum_csv {
        match &run.localization {
            Some(loc) => guard.write_with(path, |out| loc.spectrum.write_csv(out, Some(&loc.selection)))?,
            None => {
                let spectrum = participation_ratios(&run.adaptive.basis)?;
                guard.write_with(path, |out| spectrum.write_csv(out, None))?
            }
        }
    }

    for (k, v) in run.report.key_values(true) {
        emit(stdout, k, v)?;
    }
    emit(stdout, "output", args.output.display())?;
    emit(stdout, "report", report_path.display())?;
    if let Some(path) = &args.spectrum_csv {
        emit(stdout, "spectrum_csv", path.display())?;
    }
    guard.commit();
    Ok(())
}

fn analysis(img: &ImageGrid<f64>, config: &DenoiseConfig) -> Result<(AdaptiveBasis<f64>, Localization<f64>)> {
    let adaptive = adaptive_basis(img, config)?;
    let localization = localize(&adaptive.basis, config)?;
    Ok((adaptive, localization))
}

/// Mean PR of the bottom 5%, middle 50% and top 5% of eigenvalue ranks.
fn band_means(loc: &Localization<f64>) -> [(&'static str, f64); 3] {
    let s = &loc.spectrum;
    [
        ("mean_pr_bottom5", s.mean_pr_in_rank_range(0.0, 0.05)),
        ("mean_pr_middle50", s.mean_pr_in_rank_range(0.25, 0.75)),
        ("mean_pr_top5", s.mean_pr_in_rank_range(0.95, 1.0)),
    ]
}

fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = args.pipeline.resolve(None)?.denoise_config(Method::SelectedModes)?;
    let img: ImageGrid<f64> = load_image(&args.input)?;
    let (adaptive, loc) = analysis(&img, &config)?;

    create_dir(&args.out_dir)?;
    let prefix = prefix_for(&args.input, &args.prefix);
    let path = |suffix: &str| args.out_dir.join(format!("{prefix}_{suffix}"));
    let (spectrum_csv, histogram_csv) = (path("spectrum.csv"), path("histogram.csv"));
    let (spectrum_svg, histogram_svg_path) = (path("spectrum.svg"), path("histogram.svg"));
    let threshold = Some(loc.pr_threshold);

    let mut guard = OutputGuard::new();
    guard.write_with(&spectrum_csv, |out| loc.spectrum.write_csv(out, Some(&loc.selection)))?;
    guard.write_with(&histogram_csv, |out| loc.histogram.write_csv(out, Some(&loc.fit)))?;
    guard.write_string(
        &spectrum_svg,
        &spectrum_scatter_svg(&loc.spectrum, Some(&loc.selection), threshold),
    )?;
    guard.write_string(
        &histogram_svg_path,
        &histogram_svg(&loc.histogram, Some(&loc.fit), threshold),
    )?;

    let p = &adaptive.params;
    emit(stdout, "side", img.side())?;
    emit(stdout, "alpha", config.alpha)?;
    emit(stdout, "hbar", p.hbar())?;
    emit(stdout, "effective_hbar", p.effective_hbar())?;
    emit(stdout, "coupling", p.coupling())?;
    emit(stdout, "lambda0", loc.fit.lambda0)?;
    emit(stdout, "gamma", loc.fit.gamma)?;
    emit(stdout, "pr_threshold", loc.pr_threshold)?;
    emit(stdout, "kept_count", loc.selection.kept_count())?;
    emit(stdout, "discarded_count", loc.selection.discarded_count())?;
    emit(stdout, "compression_ratio", loc.selection.compression_ratio())?;
    emit(stdout, "selection_fallback", loc.selection_fallback)?;
    emit(stdout, "median_pr", loc.spectrum.median_pr())?;
    emit(stdout, "localized_fraction", loc.localized_fraction())?;
    for (k, v) in band_means(&loc) {
        emit(stdout, k, v)?;
    }
    emit(stdout, "spectrum_csv", spectrum_csv.display())?;
    emit(stdout, "histogram_csv", histogram_csv.display())?;
    emit(stdout, "spectrum_svg", spectrum_svg.display())?;
    emit(stdout, "histogram_svg", histogram_svg_path.display())?;
    guard.commit();
    Ok(())
}

fn cmd_noise(args: &NoiseArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => CliConfig::from_file(path)?,
        None => CliConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let img: ImageGrid<f64> = load_image(&args.input)?;
    let noisy = add_poisson_noise(&img, &NoiseSpec::new(args.snr_db, config.seed))?;

    let mut guard = OutputGuard::new();
    save(&mut guard, &noisy.image, &args.output, args.depth)?;
    let saved: ImageGrid<f64> = load_image(&args.output)?;

    emit(stdout, "target_snr_db", args.snr_db)?;
    emit(stdout, "seed", config.seed)?;
    emit(stdout, "achieved_snr_db", noisy.achieved_snr_db)?;
    emit(stdout, "saved_snr_db", snr_db(&img, &saved)?)?;
    emit(stdout, "scale", noisy.scale)?;
    emit(stdout, "output", args.output.display())?;
    guard.commit();
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs, stdout: &mut dyn Write) -> Result<()> {
    let reference: ImageGrid<f64> = load_image(&args.reference)?;
    let test: ImageGrid<f64> = load_image(&args.test)?;
    emit(stdout, "psnr_db", psnr(&reference, &test)?)?;
    emit(stdout, "ssim", ssim(&reference, &test)?)?;
    match snr_db(&reference, &test) {
        Ok(v) => emit(stdout, "snr_db", v),
        Err(Error::ZeroSignal) => Ok(()),
        Err(e) => Err(e),
    }
}

fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    let denoise = args.pipeline.resolve(None)?.denoise_config(Method::SelectedModes)?;
    let config = BenchConfig {
        phantom: args.phantom,
        side: args.side,
        phantom_seed: args.phantom_seed,
        snrs_db: args.snrs.clone(),
        seeds: args.seeds.clone(),
        denoise,
    };
    let cells = bench_run(&config)?;
    match &args.output {
        None => write_bench_csv(&mut *stdout, &cells).map_err(|e| Error::io("<stdout>", e)),
        Some(path) => {
            let mut guard = OutputGuard::new();
            guard.write_with(path, |out| write_bench_csv(out, &cells))?;
            for c in &cells {
                writeln!(
                    stdout,
                    "snr_db={} seed={} achieved_snr_db={} noisy_psnr_db={} all_modes_psnr_db={} \
selected_modes_psnr_db={} all_modes_ssim={} selected_modes_ssim={} compression_ratio={}",
                    c.snr_db,
                    c.seed,
                    c.achieved_snr_db,
                    c.noisy_psnr_db,
                    c.all_modes.psnr_db,
                    c.selected_modes.psnr_db,
                    c.all_modes.ssim,
                    c.selected_modes.ssim,
                    c.selected_modes.compression_ratio
                )
                .map_err(|e| Error::io("<stdout>", e))?;
            }
            emit(stdout, "rows", 2 * cells.len())?;
            emit(stdout, "output", path.display())?;
            guard.commit();
            Ok(())
        }
    }
}

fn cmd_sweep_hbar(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let base = args.pipeline.resolve(None)?;
    let img: ImageGrid<f64> = load_image(&args.input)?;
    create_dir(&args.out_dir)?;
    let prefix = prefix_for(&args.input, &args.prefix);

    let mut guard = OutputGuard::new();
    let mut summary: Vec<(f64, f64, f64, PathBuf)> = Vec::with_capacity(args.alphas.len());
    for &alpha in &args.alphas {
        let config = CliConfig { alpha, ..base }.denoise_config(Method::SelectedModes)?;
        let (_, loc) = analysis(&img, &config)?;
        let path = args.out_dir.join(format!("{prefix}_alpha{alpha}_spectrum.csv"));
        guard.write_with(&path, |out| loc.spectrum.write_csv(out, Some(&loc.selection)))?;
        summary.push((alpha, loc.spectrum.median_pr(), loc.localized_fraction(), path));
    }
    let summary_path = args.out_dir.join(format!("{prefix}_sweep.csv"));
    guard.write_with(&summary_path, |out| {
        writeln!(out, "alpha,median_pr,localized_fraction")?;
        for (alpha, median, fraction, _) in &summary {
            writeln!(out, "{alpha},{median},{fraction}")?;
        }
        Ok(())
    })?;

    for (alpha, median, fraction, path) in &summary {
        writeln!(
            stdout,
            "alpha={alpha} median_pr={median} localized_fraction={fraction} spectrum_csv={}",
            path.display()
        )
        .map_err(|e| Error::io("<stdout>", e))?;
    }
    emit(stdout, "summary_csv", summary_path.display())?;
    guard.commit();
    Ok(())
}

fn cmd_phantom(args: &PhantomArgs, stdout: &mut dyn Write) -> Result<()> {
    let img: ImageGrid<f64> = make_phantom(args.kind, args.side, args.seed)?;
    let mut guard = OutputGuard::new();
    save(&mut guard, &img, &args.output, args.depth)?;
    emit(stdout, "kind", args.kind)?;
    emit(stdout, "side", args.side)?;
    emit(stdout, "seed", args.seed)?;
    emit(stdout, "output", args.output.display())?;
    guard.commit();
    Ok(())
}
