//! Static line charts of AP against `tau`.

use std::fmt::Write;

use super::records::CurveRow;

const W: f64 = 480.0;
const H: f64 = 300.0;
const PAD: f64 = 48.0;

/// One polyline over the curve rows, evenly spaced in grid order with `inf`
/// last, plus ±1 standard deviation whiskers.
pub fn render_curve_svg(title: &str, rows: &[CurveRow]) -> String {
    let lo = rows
        .iter()
        .map(|r| r.mean_ap - r.std_ap)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let hi = rows
        .iter()
        .map(|r| r.mean_ap + r.std_ap)
        .fold(f64::NEG_INFINITY, f64::max)
        .min(1.0);
    let (lo, hi) = if hi - lo < 1e-3 {
        ((lo - 0.05).max(0.0), (hi + 0.05).min(1.0))
    } else {
        (lo, hi)
    };
    let x = |i: usize| {
        PAD + (W - 2.0 * PAD)
            * if rows.len() > 1 {
                i as f64 / (rows.len() - 1) as f64
            } else {
                0.5
            }
    };
    let y = |ap: f64| H - PAD - (H - 2.0 * PAD) * (ap - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{PAD},{} {PAD},{} {},{}" fill="none" stroke="black"/>"#,
        PAD,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for (ap, label) in [(lo, lo), (hi, hi)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="10">{:.3}</text>"#,
            PAD - 4.0,
            y(ap) + 3.0,
            label
        );
    }
    let points: Vec<String> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{:.1},{:.1}", x(i), y(r.mean_ap)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points.join(" ")
    );
    for (i, r) in rows.iter().enumerate() {
        let (a, b) = (
            y((r.mean_ap - r.std_ap).max(lo)),
            y((r.mean_ap + r.std_ap).min(hi)),
        );
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{a:.1}" x2="{0:.1}" y2="{b:.1}" stroke="steelblue"/>"#,
            x(i)
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#,
            x(i),
            y(r.mean_ap)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            x(i),
            H - PAD + 14.0,
            r.tau
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">tau</text>"#,
        W / 2.0,
        H - 10.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
