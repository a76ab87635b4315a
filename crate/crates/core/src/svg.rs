//! Minimal SVG line charts for the alpha-selection curves.

use std::fmt::Write;

/// One curve of a chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// A chart with fixed `[0, 1]` x range and a y range fitted to the data.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn y_range(series: &[Series]) -> (f64, f64) {
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|y| y.is_finite());
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(y), hi.max(y))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let lo = (lo * 10.0).floor() / 10.0;
    let hi = (hi * 10.0).ceil() / 10.0;
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.1, hi + 0.1)
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let (y0, y1) = y_range(&self.series);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + x * plot_w;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        // Axes and ticks.
        let _ = writeln!(
            out,
            r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
            TOP + plot_h,
            LEFT + plot_w
        );
        for t in 0..=10 {
            let x = t as f64 / 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"#,
                sx(x),
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 18.0,
                crate::numeric::fmt_sig7(x)
            );
        }
        let ticks = 5;
        for t in 0..=ticks {
            let y = y0 + (y1 - y0) * t as f64 / ticks as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"#,
                LEFT - 5.0,
                sy(y),
                LEFT,
                LEFT - 8.0,
                sy(y) + 4.0,
                crate::numeric::fmt_sig7((y * 1e6).round() / 1e6)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        // Curves.
        for s in &self.series {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if s.dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"{dash}/>"#,
                pts.join(" ")
            );
        }
        // Legend.
        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 12.0 + 18.0 * i as f64;
            let x = LEFT + plot_w - 150.0;
            let dash = if s.dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-width="1.5"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 30.0,
                x + 38.0,
                y + 4.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// The two charts for a table: raw and normalised explained inertia.
pub fn qtable_charts(t: &crate::quality::QTable) -> (String, String) {
    let series = |a: Vec<f64>, b: Vec<f64>, la: &str, lb: &str| {
        vec![
            Series {
                label: la.into(),
                points: t.alphas.iter().copied().zip(a).collect(),
                dashed: false,
            },
            Series {
                label: lb.into(),
                points: t.alphas.iter().copied().zip(b).collect(),
                dashed: true,
            },
        ]
    };
    let nan = |v: &Vec<Option<f64>>| v.iter().map(|x| x.unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let raw = LineChart {
        title: format!("Explained pseudo-inertia, K = {}", t.k),
        x_label: "alpha".into(),
        y_label: "proportion of explained pseudo-inertia".into(),
        series: series(t.q0.clone(), t.q1.clone(), "Q0 (D0)", "Q1 (D1)"),
    };
    let norm = LineChart {
        title: format!("Normalized explained pseudo-inertia, K = {}", t.k),
        x_label: "alpha".into(),
        y_label: "normalized proportion of explained pseudo-inertia".into(),
        series: series(nan(&t.q0norm), nan(&t.q1norm), "Q0norm (D0)", "Q1norm (D1)"),
    };
    (raw.render(), norm.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_solid_and_dashed_polylines() {
        let chart = LineChart {
            title: "t <1>".into(),
            x_label: "alpha".into(),
            y_label: "Q".into(),
            series: vec![
                Series {
                    label: "a".into(),
                    points: vec![(0.0, 0.8), (1.0, 0.5)],
                    dashed: false,
                },
                Series {
                    label: "b".into(),
                    points: vec![(0.0, 0.4), (0.5, f64::NAN), (1.0, 0.9)],
                    dashed: true,
                },
            ],
        };
        let svg = chart.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"<polyline points="" "#).count(), 0);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert!(!svg.contains("NaN"));
    }
}
