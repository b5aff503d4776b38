//! Scatter of endpoints over a histogram heat grid of target samples.

use std::fmt::Write as _;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;
const BINS: usize = 48;

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Frame {
    fn fit<'a>(sets: impl Iterator<Item = &'a Vec<f64>>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in sets {
            for k in 0..2 {
                let v = p.get(k).copied().unwrap_or(0.0);
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        for k in 0..2 {
            if !(lo[k].is_finite() && hi[k].is_finite()) {
                lo[k] = -1.0;
                hi[k] = 1.0;
            }
            let pad = 0.05 * (hi[k] - lo[k]).max(1e-9);
            lo[k] -= pad;
            hi[k] += pad;
        }
        Self { lo, hi }
    }

    fn to_px(&self, p: &[f64]) -> (f64, f64) {
        let span = SIZE - 2.0 * MARGIN;
        let y = p.get(1).copied().unwrap_or(0.0);
        let u = (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]);
        let v = (y - self.lo[1]) / (self.hi[1] - self.lo[1]);
        (MARGIN + u * span, SIZE - MARGIN - v * span)
    }
}

/// First two coordinates of `points` (red) over a grey-scale density of `background`.
pub fn scatter(title: &str, points: &[Vec<f64>], background: &[Vec<f64>]) -> String {
    let frame = Frame::fit(points.iter().chain(background));
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<title>{}</title>"#, escape(title)).unwrap();

    if !background.is_empty() {
        let mut counts = vec![0usize; BINS * BINS];
        for p in background {
            let (x, y) = frame.to_px(p);
            let span = SIZE - 2.0 * MARGIN;
            let i = (((x - MARGIN) / span) * BINS as f64).floor();
            let j = (((y - MARGIN) / span) * BINS as f64).floor();
            if (0.0..BINS as f64).contains(&i) && (0.0..BINS as f64).contains(&j) {
                counts[j as usize * BINS + i as usize] += 1;
            }
        }
        let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let cell = (SIZE - 2.0 * MARGIN) / BINS as f64;
        for (idx, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let shade = 235.0 - 175.0 * (c as f64 / peak).sqrt();
            let (i, j) = (idx % BINS, idx / BINS);
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({s},{s},{s})"/>"#,
                MARGIN + i as f64 * cell,
                MARGIN + j as f64 * cell,
                s = shade.round() as u8
            )
            .unwrap();
        }
    }

    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" fill="none" stroke="black" stroke-width="1"/>"#,
        w = SIZE - 2.0 * MARGIN
    )
    .unwrap();
    for p in points {
        let (x, y) = frame.to_px(p);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.6" fill="rgb(200,30,30)" fill-opacity="0.7"/>"#).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN - 8.0,
        escape(title)
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_every_point_and_some_cells() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![-1.0, 0.5]];
        let bg: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 50.0 - 1.0, 0.0]).collect();
        let svg = scatter("a < b", &pts, &bg);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("fill=\"rgb("));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn one_dimensional_points_sit_on_the_axis() {
        let svg = scatter("line", &[vec![2.0], vec![3.0]], &[]);
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
