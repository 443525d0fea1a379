//! Static line plots as SVG text.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn log(label: &str) -> Self {
        Self { label: label.into(), log: true }
    }

    pub fn linear(label: &str) -> Self {
        Self { label: label.into(), log: false }
    }

    fn map(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions in mapped coordinates: integer decades on log axes, five even steps otherwise.
fn ticks(axis: &Axis, lo: f64, hi: f64) -> Vec<(f64, String)> {
    if axis.log {
        let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
        let step = ((b - a) / 8).max(1) as usize;
        (a..=b).step_by(step).map(|e| (e as f64, format!("1e{e}"))).collect()
    } else {
        (0..=5).map(|i| lo + (hi - lo) * i as f64 / 5.0).map(|v| (v, format!("{v:.3}"))).collect()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub fn line_plot(title: &str, x: Axis, y: Axis, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|(a, b)| (!x.log || *a > 0.0) && (!y.log || *b > 0.0));
    let (x0, x1) = range(pts().map(|p| x.map(p.0)));
    let (mut y0, mut y1) = range(pts().map(|p| y.map(p.1)));
    if !y.log {
        y0 = y0.min(0.0);
        y1 = y1.max(0.0);
    }
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (v, label) in ticks(&x, x0, x1).into_iter().filter(|(v, _)| *v >= x0 && *v <= x1) {
        let px = sx(v);
        let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 16.0);
    }
    for (v, label) in ticks(&y, y0, y1).into_iter().filter(|(v, _)| *v >= y0 && *v <= y1) {
        let py = sy(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0, escape(&x.label));
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#, TOP + ph / 2.0, TOP + ph / 2.0, escape(&y.label));
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mapped: Vec<(f64, f64)> = ser
            .points
            .iter()
            .filter(|(a, b)| (!x.log || *a > 0.0) && (!y.log || *b > 0.0))
            .map(|&(a, b)| (sx(x.map(a)), sy(y.map(b))))
            .collect();
        let path: Vec<String> = mapped.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "));
        if !ser.dashed {
            for (a, b) in &mapped {
                let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{color}"/>"#);
            }
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{}</text>"#, LEFT + 10.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}
