//! Plain SVG histograms.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Counts per bin over `[min, max]`; the top edge belongs to the last bin.
/// Identical values land in the middle bin of a unit-wide range.
pub fn bin_counts(values: &[f64], bins: usize) -> (f64, f64, Vec<usize>) {
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    (lo, hi, counts)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render(values: &[f64], bins: usize, label: &str) -> String {
    let (lo, hi, counts) = bin_counts(values, bins);
    let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let bar_w = plot_w / bins as f64;
    let base = TOP + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = plot_h * c as f64 / peak;
        let _ = writeln!(
            s,
            r##"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4477aa" stroke="white" stroke-width="0.5"><title>{c}</title></rect>"##,
            LEFT + k as f64 * bar_w,
            base - h,
            bar_w,
            h
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="tick" x="{LEFT}" y="{}" text-anchor="start">{}</text>"#,
        base + 16.0,
        fmt_tick(lo)
    );
    let _ = writeln!(
        s,
        r#"<text class="tick" x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT + plot_w,
        base + 16.0,
        fmt_tick(hi)
    );
    let _ = writeln!(
        s,
        r#"<text class="tick" x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        TOP + 4.0,
        peak as usize
    );
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(label)
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">count</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text class="annotation" x="{}" y="{}" text-anchor="end">n = {}</text>"#,
        LEFT + plot_w,
        TOP - 10.0,
        values.len()
    );
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_cover_every_value() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (lo, hi, c) = bin_counts(&v, 10);
        assert_eq!((lo, hi), (0.0, 99.0));
        assert_eq!(c.iter().sum::<usize>(), 100);
        assert_eq!(c[9], 10);
    }

    #[test]
    fn constant_input_fills_one_bin() {
        let (_, _, c) = bin_counts(&[3.0; 7], 40);
        assert_eq!(c.iter().filter(|&&k| k > 0).count(), 1);
        assert_eq!(c.iter().sum::<usize>(), 7);
    }

    #[test]
    fn svg_structure() {
        let svg = render(&[1.0, 2.0, 2.5, 4.0], 4, "delay <ps>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="bar""#).count(), 4);
        assert!(svg.contains("n = 4"));
        assert!(svg.contains("delay &lt;ps&gt;"));
    }
}
