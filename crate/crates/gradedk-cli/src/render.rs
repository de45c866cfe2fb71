//! Report rendering: CSV tables and a small log-log SVG plotter. Both are
//! pure functions of the report data.

use crate::runners::Curve;
use std::fmt::Write as _;

/// Long-format CSV of named (x, y) series.
pub fn curves_csv(curves: &[Curve]) -> String {
    let mut out = String::from("series,t,value\n");
    for c in curves {
        for (x, y) in c.x.iter().zip(&c.y) {
            let _ = writeln!(out, "{},{},{}", c.name, x, y);
        }
    }
    out
}

/// Two-column CSV of the scalar fields of a flat JSON object.
pub fn scalars_csv(value: &serde_json::Value) -> String {
    let mut out = String::from("key,value\n");
    if let Some(map) = value.as_object() {
        for (k, v) in map {
            match v {
                serde_json::Value::Number(n) => {
                    let _ = writeln!(out, "{k},{n}");
                }
                serde_json::Value::Bool(b) => {
                    let _ = writeln!(out, "{k},{b}");
                }
                serde_json::Value::String(s) => {
                    let _ = writeln!(out, "{k},{s}");
                }
                _ => {}
            }
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log plot of the curves; zero or negative samples are dropped.
pub fn loglog_svg(curves: &[Curve], title: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in curves {
        for (&x, &y) in c.x.iter().zip(&c.y) {
            if x > 0.0 && y > 0.0 {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
    }
    let span = |v: &[f64]| -> (f64, f64) {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 0.5, lo + 0.5)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |lx: f64| ml + (lx - x0) / (x1 - x0) * (w - ml - mr);
    let py = |ly: f64| h - mb - (ly - y0) / (y1 - y0) * (h - mt - mb);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
        w / 2.0
    );

    // Frame and decade gridlines.
    let _ = writeln!(
        svg,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    let mut dec = x0.ceil() as i64;
    while (dec as f64) <= x1 {
        let x = px(dec as f64);
        let bottom = h - mb;
        let label_y = h - mb + 16.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{mt}" x2="{x:.1}" y2="{bottom:.1}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{label_y:.1}" text-anchor="middle">1e{dec}</text>"#
        );
        dec += 1;
    }
    let mut dec = y0.ceil() as i64;
    while (dec as f64) <= y1 {
        let y = py(dec as f64);
        let right = w - mr;
        let label_x = ml - 6.0;
        let label_y = y + 4.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{ml}" y1="{y:.1}" x2="{right:.1}" y2="{y:.1}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{label_x:.1}" y="{label_y:.1}" text-anchor="end">1e{dec}</text>"#
        );
        dec += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c
            .x
            .iter()
            .zip(&c.y)
            .filter(|(&x, &y)| x > 0.0 && y > 0.0)
            .map(|(&x, &y)| format!("{:.1},{:.1}", px(x.log10()), py(y.log10())))
            .collect();
        if pts.len() >= 2 {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            ml + 10.0,
            mt + 16.0 + 14.0 * i as f64,
            c.name
        );
    }
    svg.push_str("</svg>\n");
    svg
}
