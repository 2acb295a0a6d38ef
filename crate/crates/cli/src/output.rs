//! CSV, JSON and SVG emitters.

use std::fmt::Write as _;

use serde::Serialize;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Pretty JSON with keys sorted at every level.
pub fn json<T: Serialize>(value: &T) -> String {
    // serde_json::Value maps are BTreeMaps, so a round trip sorts the keys
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub enum Mark {
    Dots,
    Line,
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
}

/// Static scatter/line plot with a fixed 800 × 500 viewport.
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 60.0;

impl Plot {
    pub fn render(&self) -> String {
        let all = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            W / 2.0,
            H - 15.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let xv = x0 + t * (x1 - x0);
            let yv = y0 + t * (y1 - y0);
            writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                sx(xv),
                H - MARGIN + 15.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
                MARGIN - 5.0,
                sy(yv) + 4.0,
                tick(yv)
            )
            .unwrap();
        }
        for (k, series) in self.series.iter().enumerate() {
            match series.mark {
                Mark::Dots => {
                    for &(x, y) in &series.points {
                        writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
                            sx(x),
                            sy(y),
                            series.color
                        )
                        .unwrap();
                    }
                }
                Mark::Line => {
                    let pts: Vec<String> = series
                        .points
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                        pts.join(" "),
                        series.color
                    )
                    .unwrap();
                }
            }
            writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" fill="{}">{}</text>"#,
                W - MARGIN - 150.0,
                MARGIN + 18.0 + 16.0 * k as f64,
                series.color,
                escape(&series.label)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn sorted_json() {
        #[derive(Serialize)]
        struct S {
            z: u8,
            a: u8,
        }
        let s = json(&S { z: 1, a: 2 });
        assert!(s.find("\"a\"").unwrap() < s.find("\"z\"").unwrap());
    }

    #[test]
    fn svg_is_wellformed() {
        let p = Plot {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                color: "red",
                mark: Mark::Line,
                points: vec![(0.0, 0.0), (1.0, 2.0)],
            }],
        };
        let s = p.render();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("t &lt;1&gt;"));
    }
}
