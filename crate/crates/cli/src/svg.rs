//! Minimal SVG plots built from rect, polyline and text primitives.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn header(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + (W - LEFT - RIGHT) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(ylabel)
    );
    s
}

fn axes(s: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, TOP + ph + 16.0, x0 + f * (x1 - x0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3e}</text>"#, LEFT - 4.0, py + 4.0, y0 + f * (y1 - y0));
    }
}

/// Line plot of several `(label, points)` series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let xr = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let yr = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let mut s = header(title, xlabel, ylabel);
    axes(&mut s, xr, yr);
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut coords = String::new();
        for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let px = LEFT + (x - xr.0) / (xr.1 - xr.0) * pw;
            let py = TOP + ph - (y - yr.0) / (yr.1 - yr.0) * ph;
            let _ = write!(coords, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.trim_end());
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            LEFT + 8.0,
            TOP + 16.0 + 14.0 * k as f64,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of `values[i][j]` over `xs[i]` by `ys[j]`, colored on a log10 scale.
pub fn heat_map(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> String {
    let logs: Vec<f64> = values.iter().flatten().map(|&v| v.abs().max(1e-300).log10()).collect();
    let (lo, hi) = range(logs.iter().copied());
    let mut s = header(title, xlabel, ylabel);
    let pad = |v: &[f64]| {
        if v.len() > 1 { (v[1] - v[0]) / 2.0 } else { 0.5 }
    };
    let (dx, dy) = (pad(xs), pad(ys));
    let xr = (xs.first().copied().unwrap_or(0.0) - dx, xs.last().copied().unwrap_or(1.0) + dx);
    let yr = (ys.first().copied().unwrap_or(0.0) - dy, ys.last().copied().unwrap_or(1.0) + dy);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let f = if v == 0.0 { 0.0 } else { (v.abs().log10() - lo) / (hi - lo) };
            let f = f.clamp(0.0, 1.0);
            let (r, g, b) = ((255.0 * f) as u8, (80.0 + 100.0 * (1.0 - f)) as u8, (255.0 * (1.0 - f)) as u8);
            let px = LEFT + (xs[i] - dx - xr.0) / (xr.1 - xr.0) * pw;
            let py = TOP + ph - (ys[j] + dy - yr.0) / (yr.1 - yr.0) * ph;
            let _ = writeln!(
                s,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                2.0 * dx / (xr.1 - xr.0) * pw,
                2.0 * dy / (yr.1 - yr.0) * ph
            );
        }
    }
    axes(&mut s, xr, yr);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">log10 range [{lo:.2}, {hi:.2}]</text>"#,
        W - RIGHT,
        TOP - 6.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot("t <1>", "x", "y", &[("a", vec![(0.0, 1.0), (1.0, 2.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("<polyline") && s.contains("t &lt;1&gt;"));
    }

    #[test]
    fn heat_map_has_one_cell_per_value() {
        let v = vec![vec![1e-6, 0.0], vec![1e-3, 2e-5]];
        let s = heat_map("r", "x", "t", &[1.0, 2.0], &[1.0, 2.0], &v);
        assert_eq!(s.matches("<rect").count(), 2 + 4);
    }
}
