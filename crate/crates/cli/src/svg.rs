use std::f64::consts::PI;
use std::fmt::Write;

use serrin::branch::BranchPoint;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const PANEL: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const SAMPLES: usize = 200;

struct Axes {
    x0: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Axes {
    fn new(x0: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            let span = if hi > lo { hi - lo } else { hi.abs().max(1.0) * 1e-3 };
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        Axes {
            x0,
            x_range,
            y_range: pad(y_range),
        }
    }

    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        self.x0 + MARGIN + (v - lo) / span * (PANEL - MARGIN - 10.0)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - MARGIN - 30.0)
    }

    fn frame(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let left = self.x0 + MARGIN;
        let right = self.x0 + PANEL - 10.0;
        let (top, bottom) = (30.0, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
            0.5 * (left + right)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{x_label}</text>"#,
            0.5 * (left + right),
            HEIGHT - 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{y_label}</text>"#,
            self.x0 + 15.0,
            0.5 * (top + bottom),
            self.x0 + 15.0,
            0.5 * (top + bottom)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{xv:.3}</text>"#,
                self.x(xv),
                bottom + 14.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{yv:.4}</text>"#,
                left - 4.0,
                self.y(yv) + 3.0
            );
        }
    }
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str) {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Indices of up to `count` points with `s ≥ 0`, evenly spread.
fn selected(points: &[BranchPoint], count: usize) -> Vec<usize> {
    let nonneg: Vec<usize> = (0..points.len()).filter(|&i| points[i].s >= 0.0).collect();
    if nonneg.len() <= count {
        return nonneg;
    }
    let mut out: Vec<usize> = (0..count)
        .map(|j| nonneg[j * (nonneg.len() - 1) / (count - 1)])
        .collect();
    out.dedup();
    out
}

/// Boundary profiles `ρ = φ_s(t)` over one period and the curve `s ↦ λ_s`.
pub fn branch_svg(points: &[BranchPoint]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let chosen = selected(points, COLORS.len());
    let curves: Vec<Vec<(f64, f64)>> = chosen
        .iter()
        .map(|&i| {
            let phi = points[i].profile();
            (0..=SAMPLES)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / SAMPLES as f64;
                    (t, phi.eval(&[t]))
                })
                .collect()
        })
        .collect();
    let (lo, hi) = curves
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    let left = Axes::new(0.0, (0.0, 2.0 * PI), (lo, hi));
    left.frame(&mut out, "boundary profile", "t", "rho = phi_s(t)");
    for (c, (curve, &i)) in curves.iter().zip(&chosen).enumerate() {
        let color = COLORS[c % COLORS.len()];
        let mapped: Vec<(f64, f64)> = curve.iter().map(|&(t, y)| (left.x(t), left.y(y))).collect();
        polyline(&mut out, &mapped, color);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">s = {:.3}</text>"#,
            MARGIN + 8.0,
            44.0 + 12.0 * c as f64,
            points[i].s
        );
    }

    if !points.is_empty() {
        let s_lo = points.iter().map(|p| p.s).fold(f64::INFINITY, f64::min);
        let s_hi = points.iter().map(|p| p.s).fold(f64::NEG_INFINITY, f64::max);
        let l_lo = points.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
        let l_hi = points.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max);
        let right = Axes::new(WIDTH - PANEL - 40.0, (s_lo, s_hi), (l_lo, l_hi));
        right.frame(&mut out, "branch", "s", "lambda_s");
        let mapped: Vec<(f64, f64)> = points.iter().map(|p| (right.x(p.s), right.y(p.lambda))).collect();
        polyline(&mut out, &mapped, "black");
        for (x, y) in mapped {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="black"/>"#);
        }
    }
    out.push_str("</svg>\n");
    out
}
