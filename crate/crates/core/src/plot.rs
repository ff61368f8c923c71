//! Minimal SVG line charts for sweep output.
//!
//! Presentation only: fixed canvas, fixed palette, no timestamps or other
//! run-dependent content, so emitted files are identical across runs.

/// One polyline: a label and its `(x, y)` points.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn data_bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(px, py) in &s.points {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
    }
    if !x.0.is_finite() || x.0 == x.1 {
        x = (x.0.min(0.0) - 1.0, x.1.max(0.0) + 1.0);
    }
    if !y.0.is_finite() || y.0 == y.1 {
        y = (y.0.min(0.0) - 1.0, y.1.max(0.0) + 1.0);
    }
    // pad the y range so lines stay off the frame
    let pad = (y.1 - y.0) * 0.05;
    (x, (y.0 - pad, y.1 + pad))
}

fn fmt(v: f64) -> String {
    format!("{:.2}", v)
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Render a line chart: one polyline per series, axes with five ticks each,
/// legend on the right.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let ((x_min, x_max), (y_min, y_max)) = data_bounds(series);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |v: f64| MARGIN_LEFT + (v - x_min) / (x_max - x_min) * plot_w;
    let to_y = |v: f64| MARGIN_TOP + plot_h - (v - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg version="1.1" width="{WIDTH}" height="{HEIGHT}" xmlns="http://www.w3.org/2000/svg">"#
    ));
    svg.push('\n');
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{}" y="28" text-anchor="middle" font-family="sans-serif" font-size="18" font-weight="bold">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    ));
    svg.push('\n');

    // frame
    svg.push_str(&format!(
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444" stroke-width="1"/>"##,
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP),
        fmt(plot_w),
        fmt(plot_h)
    ));
    svg.push('\n');

    // ticks and grid lines
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * (i as f64) / 4.0;
        let px = to_x(fx);
        svg.push_str(&format!(
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ddd" stroke-width="1"/>"##,
            fmt(px),
            fmt(MARGIN_TOP),
            fmt(MARGIN_TOP + plot_h)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            fmt(px),
            fmt(MARGIN_TOP + plot_h + 18.0),
            fmt_tick(fx)
        ));
        svg.push('\n');

        let fy = y_min + (y_max - y_min) * (i as f64) / 4.0;
        let py = to_y(fy);
        svg.push_str(&format!(
            r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#ddd" stroke-width="1"/>"##,
            fmt(MARGIN_LEFT),
            fmt(MARGIN_LEFT + plot_w),
            fmt(py)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
            fmt(MARGIN_LEFT - 8.0),
            fmt(py + 4.0),
            fmt_tick(fy)
        ));
        svg.push('\n');
    }

    // axis labels
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 18 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));
    svg.push('\n');

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if !s.points.is_empty() {
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", fmt(to_x(x)), fmt(to_y(y))))
                .collect();
            svg.push_str(&format!(
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                coords.join(" "),
                color
            ));
            svg.push('\n');
        }
        // legend entry
        let ly = MARGIN_TOP + 10.0 + 22.0 * idx as f64;
        svg.push_str(&format!(
            r#"<rect x="{}" y="{}" width="14" height="14" fill="{}"/>"#,
            fmt(WIDTH - MARGIN_RIGHT + 16.0),
            fmt(ly),
            color
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
            fmt(WIDTH - MARGIN_RIGHT + 36.0),
            fmt(ly + 11.0),
            escape(&s.label)
        ));
        svg.push('\n');
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
