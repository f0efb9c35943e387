//! Minimal static SVG plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

/// Linear map of `[lo, hi]` onto `[a, b]`.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn axes(s: &mut String, x_label: &str, y_label: &str, y_lo: f64, y_hi: f64) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let y = scale(v, y_lo, y_hi, y0, y1);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        0.5 * (x0 + x1),
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        0.5 * (y0 + y1),
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 14.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// One bar per label; `intervals` adds an error bar `(lo, hi)` per bar.
pub fn bar_chart(
    title: &str,
    y_label: &str,
    labels: &[String],
    values: &[f64],
    intervals: Option<&[(f64, f64)]>,
) -> String {
    let mut s = open(title);
    let hi = values
        .iter()
        .copied()
        .chain(intervals.into_iter().flatten().map(|i| i.1))
        .fold(0.0, f64::max)
        .max(1e-12);
    let y_hi = if hi <= 1.0 { 1.0 } else { hi * 1.1 };
    axes(&mut s, "", y_label, 0.0, y_hi);
    let n = labels.len().max(1) as f64;
    let slot = (W - RIGHT - LEFT) / n;
    for (i, (label, v)) in labels.iter().zip(values).enumerate() {
        let x = LEFT + slot * (i as f64 + 0.15);
        let w = slot * 0.7;
        let y = scale(*v, 0.0, y_hi, H - BOTTOM, TOP);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{w:.1}" height="{:.1}" fill="{}"/>"#,
            H - BOTTOM - y,
            PALETTE[i % PALETTE.len()]
        );
        if let Some((lo, hi)) = intervals.and_then(|iv| iv.get(i)) {
            let cx = x + 0.5 * w;
            let (ylo, yhi) = (
                scale(*lo, 0.0, y_hi, H - BOTTOM, TOP),
                scale(*hi, 0.0, y_hi, H - BOTTOM, TOP),
            );
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.1}" y1="{ylo:.1}" x2="{cx:.1}" y2="{yhi:.1}" stroke="black"/>"#
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            x + 0.5 * w,
            H - BOTTOM + 14.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Polylines sharing one x axis.
pub fn time_series(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = open(title);
    let pts = series.iter().flat_map(|(_, v)| v.iter());
    let (mut x_lo, mut x_hi, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (x, y) in pts {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_hi = y_hi.max(*y);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    let y_hi = if y_hi <= 1.0 { 1.0 } else { y_hi * 1.1 };
    axes(&mut s, x_label, y_label, 0.0, y_hi);
    for (i, (_, v)) in series.iter().enumerate() {
        let coords: Vec<String> = v
            .iter()
            .map(|(x, y)| {
                format!(
                    "{:.1},{:.1}",
                    scale(*x, x_lo, x_hi, LEFT, W - RIGHT),
                    scale(*y, 0.0, y_hi, H - BOTTOM, TOP)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            coords.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="{}">{}</text><text x="{}" y="{}" text-anchor="end">{}</text>"#,
        H - BOTTOM + 14.0,
        fmt_tick(x_lo),
        W - RIGHT,
        H - BOTTOM + 14.0,
        fmt_tick(x_hi)
    );
    legend(&mut s, &series.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// A named set of points drawn with one color and radius.
pub struct Layer<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
    pub radius: f64,
}

/// Scatter plot with equal axis scales; `boxes` are drawn as outlines.
pub fn scatter(title: &str, layers: &[Layer], boxes: &[[f64; 4]]) -> String {
    let mut s = open(title);
    let all = layers
        .iter()
        .flat_map(|l| l.points.iter().copied())
        .chain(boxes.iter().flat_map(|b| [(b[0], b[2]), (b[1], b[3])]));
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    if !xl.is_finite() {
        (xl, xh, yl, yh) = (0.0, 1.0, 0.0, 1.0);
    }
    let (pw, ph) = (W - RIGHT - LEFT, H - BOTTOM - TOP);
    let span = ((xh - xl) / pw).max((yh - yl) / ph).max(1e-12) * 1.05;
    let (cx, cy) = (0.5 * (xl + xh), 0.5 * (yl + yh));
    let px = |x: f64| LEFT + 0.5 * pw + (x - cx) / span;
    let py = |y: f64| TOP + 0.5 * ph - (y - cy) / span;
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for b in boxes {
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
            px(b[0]),
            py(b[3]),
            (b[1] - b[0]) / span,
            (b[3] - b[2]) / span
        );
    }
    for (i, l) in layers.iter().enumerate() {
        for (x, y) in l.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="{}" fill="{}" fill-opacity="0.8"/>"#,
                px(*x),
                py(*y),
                l.radius,
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    legend(&mut s, &layers.iter().map(|l| l.name).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}
