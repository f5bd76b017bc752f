//! Minimal deterministic SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            mark: Mark::Line,
        }
    }

    pub fn dots(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            mark: Mark::Dots,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = span(xs);
        let (y0, y1) = span(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let (l, r) = (LEFT, WIDTH - RIGHT);
    let (t, b) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{l:.1},{t:.1} L{l:.1},{b:.1} L{r:.1},{b:.1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let yv = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let y = f.py(yv);
        let _ = writeln!(
            out,
            r##"<line x1="{l:.1}" y1="{y:.1}" x2="{r:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"##,
            l - 4.0,
            y + 4.0
        );
        if x_ticks {
            let xv = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
            let x = f.px(xv);
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                b + 16.0,
                tick(xv)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Lines and scatter series sharing one pair of axes, with a legend.
pub fn chart(c: &Chart) -> String {
    let pts = || c.series.iter().flat_map(|s| s.points.iter());
    let frame = Frame::new(pts().map(|p| p.0), pts().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, &c.title);
    axes(&mut out, &frame, &c.x_label, &c.y_label, true);
    for (i, s) in c.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let finite = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite());
        match s.mark {
            Mark::Line => {
                let d: Vec<String> = finite
                    .enumerate()
                    .map(|(k, p)| {
                        let cmd = if k == 0 { 'M' } else { 'L' };
                        format!("{cmd}{:.1},{:.1}", frame.px(p.0), frame.py(p.1))
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    d.join(" ")
                );
            }
            Mark::Dots => {
                for p in finite {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}" fill-opacity="0.7"/>"#,
                        frame.px(p.0),
                        frame.py(p.1)
                    );
                }
            }
        }
        let ly = TOP + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            ly - 9.0,
            lx + 14.0,
            ly,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Quartiles by linear interpolation: min, q1, median, q3, max.
pub fn five_numbers(values: &[f64]) -> [f64; 5] {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return [f64::NAN; 5];
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    [v[0], q(0.25), q(0.5), q(0.75), v[v.len() - 1]]
}

/// One box (quartiles, whiskers at the extremes) per named group.
pub fn box_chart(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let stats: Vec<[f64; 5]> = groups.iter().map(|g| five_numbers(&g.1)).collect();
    let all = stats.iter().flatten().copied();
    let frame = Frame::new(
        [0.0, groups.len() as f64].into_iter(),
        all.clone().chain(all.clone()),
    );
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, "", y_label, false);
    for (i, ((name, _), s)) in groups.iter().zip(&stats).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let cx = frame.px(i as f64 + 0.5);
        let w = 0.3 * (frame.px(1.0) - frame.px(0.0));
        if s[0].is_finite() {
            let [lo, q1, med, q3, hi] = s.map(|v| frame.py(v));
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.1}" y1="{lo:.1}" x2="{cx:.1}" y2="{hi:.1}" stroke="black"/>"#
            );
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{q3:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.5" stroke="black"/>"#,
                cx - w / 2.0,
                w,
                (q1 - q3).max(0.5)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{med:.1}" x2="{:.1}" y2="{med:.1}" stroke="black" stroke-width="2"/>"#,
                cx - w / 2.0,
                cx + w / 2.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        assert_eq!(
            five_numbers(&[3.0, 1.0, 2.0, 4.0, 5.0]),
            [1.0, 2.0, 3.0, 4.0, 5.0]
        );
        assert_eq!(five_numbers(&[1.0, 2.0])[2], 1.5);
        assert!(five_numbers(&[]).iter().all(|v| v.is_nan()));
    }

    #[test]
    fn deterministic_and_escaped() {
        let c = Chart {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series::line("s", vec![(1.0, 0.5), (2.0, 0.7)]),
                Series::dots("d", vec![(1.5, f64::NAN), (1.5, 0.6)]),
            ],
        };
        let a = chart(&c);
        assert_eq!(a, chart(&c));
        assert!(a.contains("a &lt; b"));
        assert_eq!(a.matches("<circle").count(), 1);
        let b = box_chart(
            "t",
            "err",
            &[("one".into(), vec![0.1, 0.2]), ("none".into(), vec![])],
        );
        assert_eq!(b.matches("<rect x").count(), 1);
    }
}
