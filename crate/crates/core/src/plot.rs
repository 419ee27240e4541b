//! Static SVG charts of a mode spectrum and its PR histogram.
//!
//! The output is a single self-contained `<svg>` document with no scripts,
//! fonts or external references.

use std::fmt::Write;

use crate::localization::{LorentzianFit, ModeSelection, ModeSpectrum, PrHistogram};
use crate::scalar::Scalar;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

const KEPT_COLOR: &str = "#d62728";
const DISCARDED_COLOR: &str = "#9e9e9e";
const BAR_COLOR: &str = "#6baed6";
const FIT_COLOR: &str = "#08306b";

/// Linear map of a data range onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Pads a degenerate range so the frame never divides by zero.
fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn header(svg: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let cy = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0;
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
        escape(y_label)
    );
}

fn axes(svg: &mut String, frame: &Frame) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let px = frame.px(xv);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            tick_label(xv)
        );
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let py = frame.py(yv);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn legend(svg: &mut String, entries: &[(&str, &str)]) {
    for (k, (color, label)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 8.0 + 16.0 * k as f64;
        let x = WIDTH - MARGIN_RIGHT - 150.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            y - 9.0,
            x + 16.0,
            y,
            escape(label)
        );
    }
}

/// Eigenvalue against participation ratio, kept modes highlighted and the
/// PR threshold drawn as a dashed line.
pub fn spectrum_scatter_svg<T: Scalar>(
    spectrum: &ModeSpectrum<T>,
    selection: Option<&ModeSelection<T>>,
    pr_threshold: Option<f64>,
) -> String {
    let records = spectrum.records();
    let xs = min_max(records.iter().map(|r| r.eigenvalue.to_f64_lossy()));
    let (_, y_hi) = min_max(records.iter().map(|r| r.pr.to_f64_lossy()));
    let frame = Frame::new(xs, (0.0, y_hi.max(pr_threshold.unwrap_or(0.0)) * 1.05));

    let mut svg = String::new();
    header(
        &mut svg,
        "Participation ratio spectrum",
        "eigenvalue",
        "participation ratio",
    );
    axes(&mut svg, &frame);
    let kept = |i: usize| selection.is_none_or(|s| s.keep_mask()[i]);
    // Discarded modes first so the kept ones sit on top.
    for pass_kept in [false, true] {
        let color = if pass_kept { KEPT_COLOR } else { DISCARDED_COLOR };
        let _ = writeln!(svg, r#"<g fill="{color}">"#);
        for (i, r) in records.iter().enumerate() {
            if kept(i) == pass_kept {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#,
                    frame.px(r.eigenvalue.to_f64_lossy()),
                    frame.py(r.pr.to_f64_lossy())
                );
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    if let Some(t) = pr_threshold.filter(|t| t.is_finite()) {
        let py = frame.py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="{FIT_COLOR}" stroke-dasharray="6 4"/>"#,
            WIDTH - MARGIN_RIGHT
        );
    }
    legend(
        &mut svg,
        &[(KEPT_COLOR, "kept (localized)"), (DISCARDED_COLOR, "discarded")],
    );
    svg.push_str("</svg>\n");
    svg
}

/// Histogram bars with the fitted Lorentzian overlaid.
pub fn histogram_svg<T: Scalar>(
    hist: &PrHistogram<T>,
    fit: Option<&LorentzianFit<T>>,
    pr_threshold: Option<f64>,
) -> String {
    let edges: Vec<f64> = hist.edges().iter().map(|e| e.to_f64_lossy()).collect();
    let counts = hist.counts();
    const CURVE_SAMPLES: usize = 400;
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let curve: Vec<(f64, f64)> = fit
        .map(|f| {
            (0..=CURVE_SAMPLES)
                .map(|k| {
                    let x = lo + (hi - lo) * k as f64 / CURVE_SAMPLES as f64;
                    (x, f.eval(T::of(x)).to_f64_lossy())
                })
                .collect()
        })
        .unwrap_or_default();
    let y_hi = counts
        .iter()
        .map(|&c| c as f64)
        .chain(curve.iter().map(|p| p.1))
        .fold(0.0, f64::max);
    let frame = Frame::new((lo, hi), (0.0, y_hi * 1.05));

    let mut svg = String::new();
    header(
        &mut svg,
        "Participation ratio histogram",
        "participation ratio",
        "modes per bin",
    );
    axes(&mut svg, &frame);
    let _ = writeln!(svg, r#"<g fill="{BAR_COLOR}" stroke="white" stroke-width="0.5">"#);
    for (k, &c) in counts.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[k]), frame.px(edges[k + 1]));
        let (top, base) = (frame.py(c as f64), frame.py(0.0));
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}"/>"#,
            x1 - x0,
            base - top
        );
    }
    let _ = writeln!(svg, "</g>");
    if !curve.is_empty() {
        let points: Vec<String> = curve
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y.min(frame.y.1))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{FIT_COLOR}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
    }
    if let Some(t) = pr_threshold.filter(|t| t.is_finite() && (lo..=hi).contains(t)) {
        let px = frame.px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{MARGIN_TOP}" x2="{px:.2}" y2="{}" stroke="{KEPT_COLOR}" stroke-dasharray="6 4"/>"#,
            HEIGHT - MARGIN_BOTTOM
        );
    }
    let mut entries = vec![(BAR_COLOR, "histogram")];
    if fit.is_some() {
        entries.push((FIT_COLOR, "Lorentzian fit"));
    }
    if pr_threshold.is_some() {
        entries.push((KEPT_COLOR, "PR threshold"));
    }
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{fit_lorentzian_points, ModeRecord};

    fn spectrum() -> ModeSpectrum<f64> {
        ModeSpectrum::from_records(
            (0..40)
                .map(|i| ModeRecord {
                    mode_index: i,
                    eigenvalue: i as f64 * 0.1,
                    pr: 0.2 + 0.5 * ((i as f64) * 0.7).sin().abs(),
                })
                .collect(),
        )
    }

    fn balanced(svg: &str) -> bool {
        svg.starts_with("<svg")
            && svg.trim_end().ends_with("</svg>")
            && svg.matches("<g").count() == svg.matches("</g>").count()
    }

    #[test]
    fn scatter_has_one_marker_per_mode() {
        let s = spectrum();
        let mask: Vec<bool> = s.records().iter().map(|r| r.pr < 0.4).collect();
        let kept = mask.iter().filter(|&&k| k).count();
        let sel = ModeSelection::from_mask(mask);
        let svg = spectrum_scatter_svg(&s, Some(&sel), Some(0.4));
        assert!(balanced(&svg));
        assert_eq!(svg.matches("<circle").count(), 40);
        let kept_group = svg.split(&format!(r#"<g fill="{KEPT_COLOR}">"#)).nth(1).unwrap();
        assert_eq!(
            kept_group.split("</g>").next().unwrap().matches("<circle").count(),
            kept
        );
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn histogram_bars_and_fit() {
        let values: Vec<f64> = spectrum().prs();
        let hist = PrHistogram::from_values(&values, 8).unwrap();
        let centers = hist.centers();
        let ys: Vec<f64> = centers
            .iter()
            .map(|&x| 3.0 / (1.0 + ((x - 0.45) / 0.1f64).powi(2)))
            .collect();
        let fit = fit_lorentzian_points(&centers, &ys).unwrap();
        let svg = histogram_svg(&hist, Some(&fit), Some(0.35));
        assert!(balanced(&svg));
        assert_eq!(svg.matches("<rect").count(), 1 + 8 + 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let bare = histogram_svg(&hist, None, None);
        assert_eq!(bare.matches("<polyline").count(), 0);
    }

    #[test]
    fn degenerate_ranges_stay_finite() {
        let flat = ModeSpectrum::from_records(
            (0..4)
                .map(|i| ModeRecord {
                    mode_index: i,
                    eigenvalue: 1.0,
                    pr: 0.5,
                })
                .collect(),
        );
        let svg = spectrum_scatter_svg(&flat, None, None);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
