//! Minimal SVG 1.1 plots of the unit square: polylines for curves, dots for orbits.

use std::fmt::Write;

const SIZE: f64 = 512.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Plot {
    title: String,
    body: String,
    layers: usize,
}

fn px(x: f64) -> f64 {
    x * SIZE
}

fn py(y: f64) -> f64 {
    (1.0 - y) * SIZE
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Plot { title: title.into(), body: String::new(), layers: 0 }
    }

    fn color(&mut self) -> &'static str {
        let c = PALETTE[self.layers % PALETTE.len()];
        self.layers += 1;
        c
    }

    /// Points of a graph on the torus, `y` already reduced mod 1; the line breaks where it wraps.
    pub fn curve(&mut self, points: &[(f64, f64)]) {
        let color = self.color();
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, body: &mut String| {
            if seg.len() > 1 {
                let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
                let _ = writeln!(
                    body,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            seg.clear();
        };
        for &(x, y) in points {
            if let Some(&(_, last)) = segment.last() {
                if (y - last).abs() > 0.5 {
                    flush(&mut segment, &mut self.body);
                }
            }
            segment.push((x, y));
        }
        flush(&mut segment, &mut self.body);
    }

    pub fn scatter(&mut self, points: &[(f64, f64)]) {
        let color = self.color();
        for &(x, y) in points {
            let _ = writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8" fill="{color}"/>"#, px(x), py(y));
        }
    }

    pub fn finish(self) -> String {
        let title = self.title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
                "\n<title>{t}</title>\n",
                r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="black"/>"#,
                "\n{b}</svg>\n"
            ),
            s = SIZE,
            t = title,
            b = self.body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapping_curve_splits() {
        let mut p = Plot::new("t");
        p.curve(&[(0.0, 0.9), (0.1, 0.95), (0.2, 0.05), (0.3, 0.1)]);
        let doc = p.finish();
        assert_eq!(doc.matches("<polyline").count(), 2);
        assert!(doc.contains(r#"version="1.1""#));
    }
}
