//! Minimal SVG line and bar charts.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Side-by-side line-plot panels sharing axis labels. With `log_x` the x
/// values are placed on a base-10 log scale.
pub fn line_plot(title: &str, panels: &[Panel], x_label: &str, y_label: &str, log_x: bool) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let width = PANEL_W * panels.len() as f64;
    let legend_rows = panels.iter().map(|p| p.series.len()).max().unwrap_or(0);
    let height = PANEL_H + 20.0 + 16.0 * legend_rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="16" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title));

    for (pi, panel) in panels.iter().enumerate() {
        let ox = PANEL_W * pi as f64;
        let (x0, x1) = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| tx(p.0))));
        let (y0, y1) = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let (y0, y1) = (y0.min(0.0).max(y0 - 0.05 * (y1 - y0)), y1 + 0.05 * (y1 - y0));
        let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
        let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
        let px = |x: f64| ox + MARGIN_L + (tx(x) - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

        let _ = writeln!(
            out,
            r#"<text x="{}" y="32" text-anchor="middle" font-size="12">{}</text>"#,
            ox + MARGIN_L + plot_w / 2.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#,
            ox + MARGIN_L
        );
        for i in 0..=4 {
            let v = y0 + (y1 - y0) * i as f64 / 4.0;
            let y = py(v);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
                ox + MARGIN_L,
                ox + MARGIN_L + plot_w,
                ox + MARGIN_L - 4.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        let mut xs: Vec<f64> = panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let step = xs.len().div_ceil(8).max(1);
        for x in xs.iter().step_by(step) {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
                px(*x),
                MARGIN_T + plot_h + 14.0,
                fmt_tick(*x)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            ox + MARGIN_L + plot_w / 2.0,
            MARGIN_T + plot_h + 32.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            ox + 14.0,
            MARGIN_T + plot_h / 2.0,
            ox + 14.0,
            MARGIN_T + plot_h / 2.0,
            escape(y_label)
        );
        for (si, s) in panel.series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
            if pts.len() > 1 {
                let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
            }
            for &(x, y) in &s.points {
                let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#, px(x), py(y));
            }
            let ly = PANEL_H + 8.0 + 16.0 * si as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{ly}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                ox + MARGIN_L,
                ox + MARGIN_L + 14.0,
                ly + 9.0,
                escape(&s.name)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars, one group per label; each group holds one bar per entry
/// of `groups`.
pub fn bar_chart(title: &str, labels: &[String], groups: &[(String, Vec<f64>)], y_label: &str) -> String {
    let n_groups = groups.len().max(1);
    let slot = 14.0 * n_groups as f64 + 10.0;
    let plot_w = slot * labels.len() as f64;
    let plot_h = 260.0;
    let bottom = 110.0;
    let width = MARGIN_L + plot_w + MARGIN_R;
    let height = MARGIN_T + plot_h + bottom + 16.0 * groups.len() as f64;
    let y1 = groups.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0f64, f64::max);
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let py = |y: f64| MARGIN_T + plot_h - y / y1 * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title));
    for i in 0..=4 {
        let v = y1 * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            MARGIN_L + plot_w,
            MARGIN_L - 4.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );
    for (li, label) in labels.iter().enumerate() {
        let gx = MARGIN_L + slot * li as f64 + 5.0;
        for (gi, (_, values)) in groups.iter().enumerate() {
            let v = values[li].max(0.0);
            let y = py(v);
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{y:.1}" width="12" height="{:.1}" fill="{}"/>"#,
                gx + 14.0 * gi as f64,
                MARGIN_T + plot_h - y,
                PALETTE[gi % PALETTE.len()]
            );
        }
        let cx = gx + slot / 2.0 - 5.0;
        let cy = MARGIN_T + plot_h + 8.0;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{cy:.1}" text-anchor="end" transform="rotate(-60 {cx:.1} {cy:.1})">{}</text>"#,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    );
    if groups.len() > 1 {
        for (gi, (name, _)) in groups.iter().enumerate() {
            let ly = MARGIN_T + plot_h + bottom + 16.0 * gi as f64 - 8.0;
            let _ = writeln!(
                out,
                r#"<rect x="{MARGIN_L}" y="{ly}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
                PALETTE[gi % PALETTE.len()],
                MARGIN_L + 14.0,
                ly + 9.0,
                escape(name)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
