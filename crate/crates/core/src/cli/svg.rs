//! Minimal line chart: one polyline per series with a ±2 stderr band.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    /// `(n, mean, stderr)` sorted by `n`.
    pub points: Vec<(f64, f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub fn render(title: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (0.0f64, f64::NEG_INFINITY);
    for &(n, m, se) in all() {
        x_lo = x_lo.min(n);
        x_hi = x_hi.max(n);
        y_lo = y_lo.min(m - 2.0 * se);
        y_hi = y_hi.max(m + 2.0 * se);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_hi) = (0.0, 1.0, 1.0);
    }
    let log_x = x_lo > 0.0 && x_hi / x_lo > 10.0;
    let tx = |n: f64| if log_x { n.log10() } else { n };
    let (ax, bx) = (tx(x_lo), tx(x_hi));
    let span_x = if bx > ax { bx - ax } else { 1.0 };
    let span_y = if y_hi > y_lo { y_hi - y_lo } else { 1.0 };
    let px = |n: f64| MARGIN + (tx(n) - ax) / span_x * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y_lo) / span_y * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    let x_label = if log_x { "n (log scale)" } else { "n" };
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        x0 - 4.0,
        y0,
        y_lo
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        x0 - 4.0,
        y1 + 4.0,
        y_hi
    );
    let _ = writeln!(
        out,
        r#"<text x="{x0}" y="{}" text-anchor="middle">{x_lo}</text>"#,
        y0 + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{x1}" y="{}" text-anchor="middle">{x_hi}</text>"#,
        y0 + 16.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut band: Vec<String> = s
            .points
            .iter()
            .map(|&(n, m, se)| format!("{:.2},{:.2}", px(n), py(m + 2.0 * se)))
            .collect();
        band.extend(
            s.points
                .iter()
                .rev()
                .map(|&(n, m, se)| format!("{:.2},{:.2}", px(n), py(m - 2.0 * se))),
        );
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = s
            .points
            .iter()
            .map(|&(n, m, _)| format!("{:.2},{:.2}", px(n), py(m)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for &(n, m, _) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(n),
                py(m)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            x1 - 120.0,
            y1 + 16.0 * i as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_each_series() {
        let svg = render(
            "tv",
            &[
                Series {
                    label: "p=2 q=2".into(),
                    points: vec![(200.0, 0.01, 0.001), (3200.0, 0.001, 0.0001)],
                },
                Series {
                    label: "p<3".into(),
                    points: vec![(400.0, 0.1, 0.01)],
                },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("p&lt;3"));
        assert!(svg.contains("log scale"));
        assert!(render("empty", &[]).ends_with("</svg>\n"));
    }
}
