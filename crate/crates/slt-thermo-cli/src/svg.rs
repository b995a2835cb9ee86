//! Minimal standalone SVG line plots: no rendering dependency, byte
//! deterministic for identical input.

use anyhow::{bail, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct SeriesBundle<'a> {
    pub x: &'a [f64],
    pub series: Vec<(String, Vec<f64>)>,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 0.01 && a < 10_000.0 {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Emit a standalone SVG with axes, five ticks per axis, one polyline per
/// series and a legend. Errors on empty or mismatched series.
pub fn emit_svg_lineplot(bundle: &SeriesBundle) -> Result<String> {
    if bundle.series.is_empty() || bundle.x.is_empty() {
        bail!("empty plot: need at least one series with data");
    }
    for (name, values) in &bundle.series {
        if values.len() != bundle.x.len() {
            bail!("series `{name}` length {} does not match x length {}", values.len(), bundle.x.len());
        }
    }
    if bundle.log_x && bundle.x.iter().any(|&v| v <= 0.0) {
        bail!("log-scale x axis requires positive values");
    }

    let tx = |v: f64| if bundle.log_x { v.ln() } else { v };
    let xs: Vec<f64> = bundle.x.iter().map(|&v| tx(v)).collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, values) in &bundle.series {
        for &v in values {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let x_span = (x_max - x_min).max(1e-12);
    let y_span = (y_max - y_min).max(1e-12);
    let y_lo = y_min - 0.05 * y_span;
    let y_hi = y_max + 0.05 * y_span;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |v: f64| MARGIN_L + (tx(v) - x_min) / x_span * plot_w;
    let py = |v: f64| MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // axes
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T + plot_h),
        fmt(MARGIN_L + plot_w),
        fmt(MARGIN_T + plot_h)
    ));
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(MARGIN_L),
        fmt(MARGIN_T + plot_h)
    ));

    // ticks
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = x_min + f * x_span;
        let x_data = if bundle.log_x { xv.exp() } else { xv };
        let x_pix = MARGIN_L + f * plot_w;
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            fmt(x_pix),
            fmt(MARGIN_T + plot_h),
            fmt(MARGIN_T + plot_h + 5.0)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt(x_pix),
            fmt(MARGIN_T + plot_h + 20.0),
            tick_label(x_data)
        ));
        let yv = y_lo + f * (y_hi - y_lo);
        let y_pix = MARGIN_T + plot_h - f * plot_h;
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\"/>\n",
            fmt(MARGIN_L - 5.0),
            fmt(MARGIN_L),
            fmt(y_pix)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_L - 9.0),
            fmt(y_pix + 4.0),
            tick_label(yv)
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        fmt(MARGIN_L + plot_w / 2.0),
        fmt(HEIGHT - 12.0),
        bundle.x_label
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt(MARGIN_T + plot_h / 2.0),
        fmt(MARGIN_T + plot_h / 2.0),
        bundle.y_label
    ));

    // series
    for (k, (name, values)) in bundle.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = bundle
            .x
            .iter()
            .zip(values)
            .map(|(&x, &y)| format!("{},{}", fmt(px(x)), fmt(py(y))))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_T + 16.0 * k as f64 + 8.0;
        svg.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            fmt(MARGIN_L + plot_w + 10.0),
            fmt(MARGIN_L + plot_w + 30.0),
            fmt(ly)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt(MARGIN_L + plot_w + 35.0),
            fmt(ly + 4.0),
            name
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
