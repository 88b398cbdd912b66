//! Accuracy curves: mean and spread over seeds, as a gnuplot data table or a
//! standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::experiment::LearningCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub labeled: usize,
    pub mean: f64,
    /// Population standard deviation over seeds.
    pub std_dev: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub name: String,
    pub points: Vec<CurvePoint>,
}

/// Mean and population standard deviation of accuracy per labeled count.
pub fn summarize(name: &str, curve: &LearningCurve) -> CurveSummary {
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &curve.rows {
        by_size.entry(r.labeled).or_default().push(r.accuracy);
    }
    let points = by_size
        .into_iter()
        .map(|(labeled, acc)| {
            let k = acc.len() as f64;
            let mean = acc.iter().sum::<f64>() / k;
            let var = acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k;
            CurvePoint {
                labeled,
                mean,
                std_dev: var.sqrt(),
                seeds: acc.len(),
            }
        })
        .collect();
    CurveSummary {
        name: name.to_owned(),
        points,
    }
}

/// One block per curve, separated by two blank lines so gnuplot can address
/// each with `index`.
pub fn gnuplot_table(curves: &[CurveSummary]) -> String {
    let mut out = String::new();
    for (k, c) in curves.iter().enumerate() {
        if k > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {}", c.name);
        out.push_str("# labeled mean_accuracy std_dev seeds\n");
        for p in &c.points {
            let _ = writeln!(out, "{} {} {} {}", p.labeled, p.mean, p.std_dev, p.seeds);
        }
    }
    out
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A self-contained SVG line chart with one-standard-deviation error bars.
pub fn svg_chart(curves: &[CurveSummary], title: &str) -> Result<String> {
    let all: Vec<&CurvePoint> = curves.iter().flat_map(|c| &c.points).collect();
    if all.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let x_min = all.iter().map(|p| p.labeled).min().unwrap_or(0) as f64;
    let mut x_max = all.iter().map(|p| p.labeled).max().unwrap_or(1) as f64;
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let mut y_min = all
        .iter()
        .map(|p| p.mean - p.std_dev)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let mut y_max = all
        .iter()
        .map(|p| p.mean + p.std_dev)
        .fold(f64::NEG_INFINITY, f64::max)
        .min(1.0);
    if y_max - y_min < 1e-6 {
        y_min = (y_min - 0.05).max(0.0);
        y_max = (y_max + 0.05).min(1.0);
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    // Axes and ticks.
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {MARGIN_TOP} V{y0} H{}" fill="none" stroke="black"/>"#,
        x0 + plot_w
    );
    for t in 0..=5 {
        let f = t as f64 / 5.0;
        let yv = y_min + f * (y_max - y_min);
        let xv = x_min + f * (x_max - x_min);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{yv:.3}</text><line x1="{}" y1="{}" x2="{x0}" y2="{}" stroke="black"/>"#,
            x0 - 8.0,
            sy(yv) + 4.0,
            x0 - 4.0,
            sy(yv),
            sy(yv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{:.0}</text><line x1="{}" y1="{y0}" x2="{}" y2="{}" stroke="black"/>"#,
            sx(xv),
            y0 + 18.0,
            xv,
            sx(xv),
            sx(xv),
            y0 + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">labeled points</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">accuracy</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = c
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!(
                    "{}{:.2} {:.2}",
                    if i == 0 { 'M' } else { 'L' },
                    sx(p.labeled as f64),
                    sy(p.mean)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for p in &c.points {
            let x = sx(p.labeled as f64);
            let lo = sy((p.mean - p.std_dev).max(y_min));
            let hi = sy((p.mean + p.std_dev).min(y_max));
            let _ = writeln!(
                s,
                r#"<path d="M{x:.2} {lo:.2} V{hi:.2} M{:.2} {lo:.2} H{:.2} M{:.2} {hi:.2} H{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x - 4.0,
                x + 4.0,
                x - 4.0,
                x + 4.0,
                sy(p.mean)
            );
        }
        let ly = MARGIN_TOP + 10.0 + 20.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&c.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
