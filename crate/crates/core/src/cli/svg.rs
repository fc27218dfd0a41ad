//! Self-contained SVG plot of `log10(f − f*)` against the iteration count.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `points` are `(k, f − f*)`; nonpositive gaps are dropped.
pub fn convergence_plot(points: &[(f64, f64)], title: &str) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, gap)| k.is_finite() && gap.is_finite() && *gap > 0.0)
        .map(|&(k, gap)| (k, gap.log10()))
        .collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"#
    );

    if pts.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">no positive optimality gaps recorded</text>"#,
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    }

    let kmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut kmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if kmax <= kmin {
        kmax = kmin + 1.0;
    }
    let mut lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let mut hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    if hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    let sx = |k: f64| x0 + (k - kmin) / (kmax - kmin) * (x1 - x0);
    let sy = |v: f64| y0 - (v - lo) / (hi - lo) * (y0 - y1);

    let decades = (hi - lo) as i64;
    let step = (decades / 8).max(1);
    let mut e = lo as i64;
    while e <= hi as i64 {
        let y = sy(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
        e += step;
    }
    for t in 0..=4 {
        let k = kmin + (kmax - kmin) * t as f64 / 4.0;
        let x = sx(k);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            k.round()
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration k</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">f - f*</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let coords: Vec<String> = pts
        .iter()
        .map(|&(k, v)| format!("{:.2},{:.2}", sx(k), sy(v)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>"##,
        coords.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_self_contained() {
        let pts: Vec<(f64, f64)> = (0..50).map(|k| (k as f64 * 10.0, 0.8f64.powi(k))).collect();
        let svg = convergence_plot(&pts, "sgd <ls>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("sgd &lt;ls&gt;"));
        assert!(!svg.contains("href"));
        let n_coords = svg
            .lines()
            .find(|l| l.starts_with("<polyline"))
            .unwrap()
            .matches(',')
            .count();
        assert_eq!(n_coords, 50);
    }

    #[test]
    fn degenerate_inputs() {
        let svg = convergence_plot(&[(0.0, 0.0), (1.0, -1.0)], "t");
        assert!(svg.contains("no positive"));
        let svg = convergence_plot(&[(3.0, 1e-3)], "t");
        assert!(svg.contains("<polyline"));
    }
}
