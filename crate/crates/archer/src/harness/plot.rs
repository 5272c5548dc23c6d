//! Minimal deterministic SVG line charts for success-rate curves.

use std::fmt::Write as _;

use crate::error::Result;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub struct Curve {
    pub label: String,
    pub color: String,
    pub width: f64,
    /// (cycle, value) points; values are expected in [0, 1].
    pub points: Vec<(f64, f64)>,
}

/// Renders success-rate-vs-cycle curves. The y axis is fixed to [0, 1].
pub fn render_success_chart(title: &str, curves: &[Curve]) -> String {
    let x_max = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .fold(1.0_f64, f64::max);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"##,
        WIDTH / 2.0,
        escape(title)
    );

    // Axes and gridlines.
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#dddddd" stroke-width="1"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{y:.1}</text>"##,
            MARGIN_LEFT - 6.0,
            py + 4.0
        );
    }
    let x_ticks = 6usize;
    for i in 0..=x_ticks {
        let x = x_max * i as f64 / x_ticks as f64;
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.0}</text>"##,
            HEIGHT - MARGIN_BOTTOM + 18.0,
            x
        );
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN_LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="1"/>"##,
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN_LEFT:.1}" y1="{MARGIN_TOP:.1}" x2="{MARGIN_LEFT:.1}" y2="{:.1}" stroke="black" stroke-width="1"/>"##,
        HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">cycle</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="16" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">success rate</text>"##,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for curve in curves {
        if curve.points.is_empty() {
            continue;
        }
        let mut path = String::new();
        for (i, (x, y)) in curve.points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            svg,
            r##"<path d="{}" fill="none" stroke="{}" stroke-width="{}"/>"##,
            path.trim_end(),
            curve.color,
            curve.width
        );
    }

    // Legend, top-left inside the plot area.
    let mut ly = MARGIN_TOP + 14.0;
    for curve in curves {
        if curve.label.is_empty() {
            continue;
        }
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="{}"/>"##,
            MARGIN_LEFT + 10.0,
            ly - 4.0,
            MARGIN_LEFT + 34.0,
            ly - 4.0,
            curve.color,
            curve.width
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"##,
            MARGIN_LEFT + 40.0,
            ly,
            escape(&curve.label)
        );
        ly += 16.0;
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn write_success_chart(path: &std::path::Path, title: &str, curves: &[Curve]) -> Result<()> {
    std::fs::write(path, render_success_chart(title, curves))?;
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_each_curve_and_is_deterministic() {
        let curves = vec![
            Curve {
                label: "mean".into(),
                color: "#1f77b4".into(),
                width: 2.0,
                points: vec![(1.0, 0.0), (2.0, 0.5), (3.0, 1.0)],
            },
            Curve {
                label: "seed 1".into(),
                color: "#cccccc".into(),
                width: 1.0,
                points: vec![(1.0, 0.1), (2.0, 0.4), (3.0, 0.9)],
            },
        ];
        let a = render_success_chart("demo", &curves);
        let b = render_success_chart("demo", &curves);
        assert_eq!(a, b);
        assert_eq!(a.matches("<path").count(), 2);
        assert!(a.contains("seed 1"));
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
    }
}
