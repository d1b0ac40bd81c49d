//! Line chart of a sweep, written as plain SVG text.

use std::fmt::Write;

use genbound::bounds::BoundReport;

use crate::sweep::{entry_for, COLUMNS};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 11] = [
    "#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(column: &str) -> &'static str {
    let i = COLUMNS.iter().position(|(c, _)| *c == column).unwrap_or(0);
    PALETTE[i % PALETTE.len()]
}

/// Render one polyline per column that has data. Missing cells break the line.
pub fn render(rows: &[BoundReport], columns: &[String]) -> String {
    let series: Vec<(&str, Vec<(f64, Option<f64>)>)> = columns
        .iter()
        .filter_map(|c| {
            let entry = entry_for(c)?;
            let pts: Vec<_> = rows.iter().filter_map(|r| Some((r.t?, r.get(entry)))).collect();
            pts.iter().any(|(_, v)| v.is_some()).then_some((c.as_str(), pts))
        })
        .collect();
    let ymax = series
        .iter()
        .flat_map(|(_, p)| p.iter().filter_map(|(_, v)| *v))
        .fold(0.0f64, f64::max);
    let ymax = if ymax > 0.0 { nice_ceiling(ymax) } else { 1.0 };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |t: f64| LEFT + t * pw;
    let sy = |v: f64| TOP + ph - (v / ymax).clamp(0.0, 1.0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 900 600" width="900" height="600" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="900" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let x = sx(t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.1}</text>"#, TOP + ph + 20.0);
    }
    for k in 0..=5 {
        let v = ymax * k as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/>"##, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, trim(v));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0);

    for (name, pts) in &series {
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, s: &mut String| {
            if run.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    color(name),
                    run.join(" ")
                );
            }
            run.clear();
        };
        for (t, v) in pts {
            match v {
                Some(v) => run.push(format!("{:.2},{:.2}", sx(*t), sy(*v))),
                None => flush(&mut run, &mut s),
            }
        }
        flush(&mut run, &mut s);
    }

    let lx = WIDTH - RIGHT + 15.0;
    for (i, (name, _)) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/>"#,
            lx + 25.0,
            color(name)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 32.0, y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn nice_ceiling(x: f64) -> f64 {
    let mag = 10f64.powf(x.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * mag >= x {
            return step * mag;
        }
    }
    10.0 * mag
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
