//! Minimal hand-rolled SVG line charts.
//!
//! Deliberately dependency-free and self-contained: no scripts, no external
//! fonts, nothing but shapes and text, so the files render identically
//! everywhere and diff cleanly between runs. Variants are told apart by dash
//! pattern rather than color (the printed figures these mirror are grayscale).

use std::fmt::Write as _;

pub struct Series {
    pub label: String,
    /// `stroke-dasharray` value, `None` for a solid line.
    pub dash: Option<&'static str>,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const TITLE_H: f64 = 30.0;
const PANEL_H: f64 = 276.0;
const ML: f64 = 66.0;
const MR: f64 = 16.0;
const PT: f64 = 26.0;
const PB: f64 = 48.0;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Round tick positions covering `[lo, hi]` with a 1/2/5 step, ~5 ticks.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag
        * if norm < 1.5 {
            1.0
        } else if norm < 3.5 {
            2.0
        } else if norm < 7.5 {
            5.0
        } else {
            10.0
        };
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

/// Tick positions for an axis already transformed to log10 space: whole
/// decades, thinned to at most seven. Falls back to linear placement when the
/// range sits inside a single decade.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let d0 = lo.ceil() as i64;
    let d1 = hi.floor() as i64;
    if d1 < d0 {
        return linear_ticks(lo, hi);
    }
    let step = (((d1 - d0) / 7) + 1).max(1) as usize;
    (d0..=d1).step_by(step).map(|d| d as f64).collect()
}

/// Render stacked panels sharing an x axis into an SVG document.
pub fn chart(title: &str, x_label: &str, panels: &[Panel], log_y: bool) -> String {
    let height = TITLE_H + PANEL_H * panels.len() as f64 + 4.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(title)
    );

    for (i, panel) in panels.iter().enumerate() {
        let top = TITLE_H + PANEL_H * i as f64;
        render_panel(&mut s, panel, top, x_label, log_y);
    }

    s.push_str("</svg>\n");
    s
}

fn render_panel(s: &mut String, panel: &Panel, block_top: f64, x_label: &str, log_y: bool) {
    let plot_top = block_top + PT;
    let plot_h = PANEL_H - PT - PB;
    let plot_bottom = plot_top + plot_h;
    let plot_left = ML;
    let plot_right = WIDTH - MR;
    let plot_w = plot_right - plot_left;

    let ty = |v: f64| if log_y { v.max(1e-300).log10() } else { v };

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for series in &panel.series {
        for &(x, y) in &series.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(ty(y));
            y_max = y_max.max(ty(y));
        }
    }
    if !(x_max > x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let y_pad = if y_max > y_min {
        0.05 * (y_max - y_min)
    } else {
        0.5 * y_max.abs().max(1.0)
    };
    y_min -= y_pad;
    y_max += y_pad;

    let sx = |x: f64| plot_left + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| plot_bottom - (y - y_min) / (y_max - y_min) * plot_h;

    let _ = writeln!(
        s,
        r#"<text x="{plot_left:.2}" y="{:.2}" font-size="12" font-weight="bold">{}</text>"#,
        block_top + 14.0,
        xml_escape(&panel.title)
    );

    // y grid + labels
    let y_ticks = if log_y {
        log_ticks(y_min, y_max)
    } else {
        linear_ticks(y_min, y_max)
    };
    for &t in &y_ticks {
        let py = sy(t);
        let label = if log_y {
            fmt_tick(10f64.powf(t))
        } else {
            fmt_tick(t)
        };
        let _ = writeln!(
            s,
            r##"<line x1="{plot_left:.2}" y1="{py:.2}" x2="{plot_right:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            plot_left - 6.0,
            py + 3.5,
            label
        );
    }

    // x ticks + labels
    for &t in &linear_ticks(x_min, x_max) {
        let px = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{plot_bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333" stroke-width="1"/>"##,
            plot_bottom + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            plot_bottom + 16.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
        plot_left + plot_w / 2.0,
        plot_bottom + 34.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 14 {:.2})">{}</text>"#,
        plot_top + plot_h / 2.0,
        plot_top + plot_h / 2.0,
        xml_escape(&panel.y_label)
    );

    let _ = writeln!(
        s,
        r##"<rect x="{plot_left:.2}" y="{plot_top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##
    );

    for series in &panel.series {
        let dash = match series.dash {
            Some(d) => format!(r#" stroke-dasharray="{d}""#),
            None => String::new(),
        };
        let mut pts = String::new();
        for &(x, y) in &series.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(ty(y)));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="1.3"{dash} points="{}"/>"#,
            pts.trim_end()
        );
    }

    // legend, top right of the plot box
    for (j, series) in panel.series.iter().enumerate() {
        let ly = plot_top + 13.0 + 16.0 * j as f64;
        let x0 = plot_right - 150.0;
        let dash = match series.dash {
            Some(d) => format!(r#" stroke-dasharray="{d}""#),
            None => String::new(),
        };
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="black" stroke-width="1.3"{dash}/>"#,
            x0 + 26.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            x0 + 32.0,
            ly + 3.5,
            xml_escape(&series.label)
        );
    }
}
