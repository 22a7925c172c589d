//! Minimal self-contained SVG line plots: polylines, axes, tick labels and
//! a legend, nothing else. Output depends only on the input data, apart
//! from the embedded generator version string.

use std::fmt::Write as _;

pub const GENERATOR: &str = concat!("bilinosc ", env!("CARGO_PKG_VERSION"));

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a line (used for model overlays).
    pub markers: bool,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    let start = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= hi + step * 1e-9 {
        // avoid "-0"
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &self.curves {
            for &(x, y) in &c.points {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
        if !x_lo.is_finite() {
            x_lo = 0.0;
            x_hi = 1.0;
            y_lo = 0.0;
            y_hi = 1.0;
        }
        let pad = 0.05 * (y_hi - y_lo).max(1e-12);
        y_lo -= pad;
        y_hi += pad;

        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        )
        .unwrap();
        writeln!(s, "<!-- generated by {GENERATOR} -->").unwrap();
        writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();

        // axes box
        writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        )
        .unwrap();

        for t in nice_ticks(x_lo, x_hi, 8) {
            let x = px(t);
            writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, HEIGHT - MARGIN_B, HEIGHT - MARGIN_B + 5.0).unwrap();
            writeln!(s, r#"<text x="{x:.2}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, HEIGHT - MARGIN_B + 18.0, fmt_tick(t)).unwrap();
        }
        for t in nice_ticks(y_lo, y_hi, 6) {
            let y = py(t);
            writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/>"#, MARGIN_L - 5.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#, MARGIN_L - 8.0, y + 4.0, fmt_tick(t)).unwrap();
        }
        // zero line when visible
        if y_lo < 0.0 && y_hi > 0.0 {
            let y = py(0.0);
            writeln!(s, r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#cccccc" stroke-dasharray="4 4"/>"##, WIDTH - MARGIN_R).unwrap();
        }

        writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#, WIDTH / 2.0, xml_escape(&self.title)).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, xml_escape(&self.x_label)).unwrap();
        writeln!(s, r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0, xml_escape(&self.y_label)).unwrap();

        for (i, c) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            if c.markers {
                for &(x, y) in &c.points {
                    let (cx, cy) = (px(x), py(y));
                    writeln!(s, r#"<path d="M {cx1:.2} {cy1:.2} L {cx2:.2} {cy2:.2} M {cx1:.2} {cy2:.2} L {cx2:.2} {cy1:.2}" stroke="black" stroke-width="1"/>"#,
                        cx1 = cx - 3.0, cy1 = cy - 3.0, cx2 = cx + 3.0, cy2 = cy + 3.0).unwrap();
                }
            } else {
                let mut d = String::new();
                for (j, &(x, y)) in c.points.iter().enumerate() {
                    write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(x), py(y)).unwrap();
                }
                writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#).unwrap();
            }
            // legend entry
            let lx = MARGIN_L + 12.0;
            let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
            if c.markers {
                writeln!(s, r#"<text x="{}" y="{}" font-size="12">x {}</text>"#, lx + 22.0, ly + 4.0, xml_escape(&c.label)).unwrap();
            } else {
                writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0).unwrap();
                writeln!(s, r#"<text x="{}" y="{}" font-size="12">{}</text>"#, lx + 22.0, ly + 4.0, xml_escape(&c.label)).unwrap();
            }
        }
        writeln!(s, "</svg>").unwrap();
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_self_contained_svg() {
        let plot = LinePlot {
            title: "test".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            curves: vec![Curve {
                label: "c".into(),
                points: (0..50).map(|i| (i as f64 / 10.0, (i as f64 / 10.0).sin())).collect(),
                markers: false,
            }],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href")); // no external assets
        // deterministic
        assert_eq!(svg, plot.render());
    }

    #[test]
    fn handles_empty_input() {
        let plot = LinePlot {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            curves: vec![],
        };
        assert!(plot.render().contains("</svg>"));
    }
}
