//! Standalone SVG line charts of failure probability against copy count.
//!
//! The output is a pure function of the parsed curves, so identical input
//! yields byte-identical SVG.

use crate::cli::curves::SchemeCurve;
use crate::sim::Scheme;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("no curves to plot")]
    NoData,
    #[error("log scale requested but no positive p_error values exist")]
    NoPositiveValues,
}

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 210.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

fn scheme_color(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Adaptive => "#1f77b4",
        Scheme::Qdg => "#ff7f0e",
        Scheme::Voting => "#2ca02c",
        Scheme::AdaptiveMajority => "#d62728",
        Scheme::Bayes => "#9467bd",
        Scheme::QdgPostselect => "#8c564b",
        Scheme::HelstromPure => "#17becf",
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Render curves to SVG. With `log_scale`, `p_error` is drawn on a log10 axis
/// and non-positive values are skipped.
pub fn render_svg(curves: &[SchemeCurve], log_scale: bool) -> Result<String, PlotError> {
    if curves.is_empty() || curves.iter().all(|c| c.rows.is_empty()) {
        return Err(PlotError::NoData);
    }
    let mut n_min = u32::MAX;
    let mut n_max = 0u32;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for c in curves {
        for r in &c.rows {
            n_min = n_min.min(r.n);
            n_max = n_max.max(r.n);
            if log_scale {
                if r.p_error > 0.0 {
                    y_min = y_min.min(r.p_error);
                    y_max = y_max.max(r.p_error);
                }
            } else {
                y_min = y_min.min(r.p_error.max(0.0));
                y_max = y_max.max(r.p_error);
            }
        }
    }
    if log_scale && !y_min.is_finite() {
        return Err(PlotError::NoPositiveValues);
    }
    let (y_lo, y_hi, y_ticks) = if log_scale {
        let lo = y_min.log10().floor();
        let hi = y_max.log10().ceil().max(lo + 1.0);
        let ticks: Vec<f64> = (lo as i64..=hi as i64).map(|e| e as f64).collect();
        (lo, hi, ticks)
    } else {
        let hi = if y_max <= 0.0 { 1.0 } else { nice_ceil(y_max) };
        let ticks = (0..=5).map(|i| hi * f64::from(i) / 5.0).collect();
        (0.0, hi, ticks)
    };
    let x_lo = f64::from(n_min);
    let x_hi = f64::from(n_max.max(n_min + 1));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |n: f64| MARGIN_LEFT + (n - x_lo) / (x_hi - x_lo) * plot_w;
    let y_px = |v: f64| {
        let t = if log_scale { v.log10() } else { v };
        MARGIN_TOP + (y_hi - t) / (y_hi - y_lo) * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = chart_title(curves);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        px(MARGIN_LEFT + plot_w / 2.0)
    );

    // axes
    let x0 = px(MARGIN_LEFT);
    let x1 = px(MARGIN_LEFT + plot_w);
    let y0 = px(MARGIN_TOP + plot_h);
    let y1 = px(MARGIN_TOP);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );

    // x ticks
    for tick in x_tick_values(n_min, n_max) {
        let xp = px(x_px(f64::from(tick)));
        let _ = writeln!(
            svg,
            r#"<line x1="{xp}" y1="{y0}" x2="{xp}" y2="{}" stroke="black"/>"#,
            px(MARGIN_TOP + plot_h + 6.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{xp}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{tick}</text>"#,
            px(MARGIN_TOP + plot_h + 22.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">N (copies)</text>"#,
        px(MARGIN_LEFT + plot_w / 2.0),
        px(HEIGHT - 18.0)
    );

    // y ticks
    for t in &y_ticks {
        let v = if log_scale { 10f64.powf(*t) } else { *t };
        let yp = px(y_px(v));
        let label = if log_scale {
            format!("1e{}", *t as i64)
        } else {
            format!("{t:.3}")
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{yp}" x2="{x0}" y2="{yp}" stroke="black"/>"#,
            px(MARGIN_LEFT - 6.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{yp}" font-family="sans-serif" font-size="12" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            px(MARGIN_LEFT - 10.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="22" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 22 {})">p_error</text>"#,
        px(MARGIN_TOP + plot_h / 2.0),
        px(MARGIN_TOP + plot_h / 2.0)
    );

    // curves
    for c in curves {
        let mut points = String::new();
        for r in &c.rows {
            if log_scale && r.p_error <= 0.0 {
                continue;
            }
            let _ = write!(
                points,
                "{},{} ",
                px(x_px(f64::from(r.n))),
                px(y_px(r.p_error.max(if log_scale { f64::MIN_POSITIVE } else { 0.0 })))
            );
        }
        if points.is_empty() {
            continue;
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            scheme_color(c.scheme),
            points.trim_end()
        );
    }

    // legend
    let legend_x = MARGIN_LEFT + plot_w + 20.0;
    for (i, c) in curves.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 22.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>"#,
            px(legend_x),
            px(y),
            px(legend_x + 26.0),
            px(y),
            scheme_color(c.scheme)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" dominant-baseline="middle">{}</text>"#,
            px(legend_x + 32.0),
            px(y),
            c.scheme.token()
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn chart_title(curves: &[SchemeCurve]) -> String {
    let first = &curves[0];
    let uniform = curves.iter().all(|c| {
        c.theta.to_bits() == first.theta.to_bits()
            && c.fidelity.to_bits() == first.fidelity.to_bits()
    });
    if uniform {
        format!(
            "failure probability (theta={}, F={})",
            first.theta, first.fidelity
        )
    } else {
        "failure probability".to_string()
    }
}

fn nice_ceil(v: f64) -> f64 {
    let mag = 10f64.powf(v.log10().floor());
    for mult in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if mult * mag >= v {
            return mult * mag;
        }
    }
    10.0 * mag
}

fn x_tick_values(n_min: u32, n_max: u32) -> Vec<u32> {
    let span = (n_max - n_min).max(1);
    let raw = span as f64 / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(mag * 10.0)
        .max(1.0) as u32;
    let mut ticks = vec![];
    let mut t = n_min.div_ceil(step) * step;
    while t <= n_max {
        ticks.push(t);
        t += step;
    }
    if ticks.is_empty() {
        ticks.push(n_min);
    }
    ticks
}
