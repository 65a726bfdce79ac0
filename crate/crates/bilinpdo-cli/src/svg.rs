//! Minimal SVG scatter plot: axes, points, a fitted line and its slope.

use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)` in plot coordinates.
    pub fit: Option<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let (x0, x1) = range(self.points.iter().map(|p| p.0));
        let mut ys: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        if let Some((s, c)) = self.fit {
            ys.push(s * x0 + c);
            ys.push(s * x1 + c);
        }
        let (y0, y1) = range(ys.into_iter());
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, esc(&self.title));
        let (bx, by) = (MARGIN, H - MARGIN);
        let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" stroke="black"/>"#, W - MARGIN);
        let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN}" stroke="black"/>"#);
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="11">{fx:.2}</text>"#, px(fx), by + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{fy:.2}</text>"#, bx - 6.0, py(fy) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, H - 16.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        if let Some((k, c)) = self.fit {
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="crimson" stroke-dasharray="6 4"/>"#,
                px(x0),
                py(k * x0 + c),
                px(x1),
                py(k * x1 + c)
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="13" fill="crimson">slope = {k:.4}</text>"#, W - MARGIN, MARGIN);
        }
        for &(x, y) in &self.points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="steelblue"/>"#, px(x), py(y));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_fit_and_escapes() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "log2 eps".into(),
            y_label: "log2 ratio".into(),
            points: vec![(-6.0, 1.0), (-7.0, 1.5), (-8.0, 2.0)],
            fit: Some((-0.5, -2.0)),
        };
        let s = p.render();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains("slope = -0.5000"));
        assert!(s.contains("a &lt; b"));
    }

    #[test]
    fn single_point_does_not_divide_by_zero() {
        let p = Plot { title: String::new(), x_label: String::new(), y_label: String::new(), points: vec![(1.0, 1.0)], fit: None };
        assert!(!p.render().contains("NaN"));
    }
}
