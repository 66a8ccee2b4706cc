//! Minimal SVG line plots with a logarithmic error axis.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
/// Errors below this are drawn at the floor.
pub const ERROR_FLOOR: f64 = 1e-16;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if (1e-2..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Plot error (log scale) against an axis value. One polyline per series.
pub fn error_plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x_min, mut x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_max <= x_min {
        (x_min, x_max) = (x_min - 0.5, x_max + 0.5);
    }
    let log_err = |e: f64| e.max(ERROR_FLOOR).log10();
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| log_err(p.1)));
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (mut y_min, mut y_max) = if lo.is_finite() { (lo.floor(), hi.ceil()) } else { (-16.0, 0.0) };
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    y_min = y_min.min(y_max - 1.0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );

    let decades = (y_max - y_min) as i64;
    let step = if decades > 8 { 2 } else { 1 };
    let mut d = y_min as i64;
    while d <= y_max as i64 {
        let y = py(d as f64);
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, y + 4.0);
        d += step;
    }
    for k in 0..=4 {
        let x = x_min + (x_max - x_min) * k as f64 / 4.0;
        let sx = px(x);
        let _ = writeln!(svg, r##"<line x1="{sx:.2}" y1="{:.2}" x2="{sx:.2}" y2="{:.2}" stroke="#333"/>"##, TOP + plot_h, TOP + plot_h + 5.0);
        let _ = writeln!(svg, r#"<text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + plot_h + 20.0, tick_label(x));
    }
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" x="25" y="{:.2}" text-anchor="middle" transform="rotate(-90 25 {:.2})">transfer error 1 - F</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, e)| format!("{:.2},{:.2}", px(x), py(log_err(e)))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.label),
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 25.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 32.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}
