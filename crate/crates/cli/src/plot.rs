//! SVG rendering of scan results: robust frequency against `d` on a log
//! axis, one series per `n`, with a reference line at 1/2.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use robustlab_core::harness::ScanRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub fn render(rows: &[ScanRow]) -> String {
    let mut series: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        if let Some(f) = r.robust_frequency() {
            series.entry(r.n).or_default().push((r.d, f));
        }
    }
    for points in series.values_mut() {
        points.sort_by_key(|p| p.0);
    }
    let ds = series.values().flatten().map(|p| p.0 as f64);
    let (mut lo, mut hi) = ds.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if !lo.is_finite() {
        (lo, hi) = (1.0, 10.0);
    }
    if hi <= lo {
        (lo, hi) = (lo / 2.0, hi * 2.0);
    }
    let (llo, lhi) = (lo.log10(), hi.log10());
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |d: f64| LEFT + (d.log10() - llo) / (lhi - llo) * plot_w;
    let y = |f: f64| TOP + (1.0 - f) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{f:.2}</text>"#,
            LEFT - 6.0,
            y(f) + 4.0
        );
    }
    let mut decade = llo.floor() as i32;
    while decade as f64 <= lhi.ceil() {
        let d = 10f64.powi(decade);
        if d >= lo && d <= hi {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
                x(d),
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 18.0,
                d
            );
        }
        decade += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">d (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">robust frequency</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="gray" stroke-dasharray="4 4"/>"#,
        y(0.5),
        LEFT + plot_w
    );

    for (i, (n, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = points.iter().map(|&(d, f)| format!("{:.2},{:.2}", x(d as f64), y(f))).collect();
        if coords.len() > 1 {
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, coords.join(" "));
        }
        for &(d, f) in points {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x(d as f64), y(f));
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}"/><text x="{:.2}" y="{:.2}">n={n}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
