//! Figure emission: a dependency-free SVG with one panel per scenario,
//! mean markers, 2.5th/97.5th-percentile whiskers, and a reference line at
//! the true treatment effect.
//!
//! For visual separation the completer-PERR series is shifted right and the
//! previous-estimator series left by 0.003 in data units along the dropout
//! axis. Output is deterministic for identical input.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::harness::SummaryRow;
use crate::results_csv::format_sig6;

pub const CANVAS_WIDTH: f64 = 1200.0;
pub const CANVAS_HEIGHT: f64 = 900.0;
/// Horizontal series offset in data units along the dropout axis.
pub const SERIES_SHIFT: f64 = 0.003;

const HEADER_HEIGHT: f64 = 60.0;
const PANEL_MARGIN_LEFT: f64 = 72.0;
const PANEL_MARGIN_RIGHT: f64 = 18.0;
const PANEL_MARGIN_TOP: f64 = 34.0;
const PANEL_MARGIN_BOTTOM: f64 = 52.0;
const WHISKER_CAP_HALF_WIDTH: f64 = 5.0;

fn series_shift(estimator: Estimator) -> f64 {
    match estimator {
        Estimator::PerrPrev => -SERIES_SHIFT,
        Estimator::PerrComp => SERIES_SHIFT,
        Estimator::Rr => 0.0,
    }
}

fn series_color(estimator: Estimator) -> &'static str {
    match estimator {
        Estimator::PerrPrev => "#1f77b4",
        Estimator::PerrComp => "#d62728",
        Estimator::Rr => "#2ca02c",
    }
}

#[derive(Debug, Clone, Copy)]
struct LinearScale {
    domain: (f64, f64),
    range: (f64, f64),
}

impl LinearScale {
    fn px(&self, v: f64) -> f64 {
        let t = (v - self.domain.0) / (self.domain.1 - self.domain.0);
        self.range.0 + t * (self.range.1 - self.range.0)
    }
}

/// Pixel geometry shared by the emitter and its tests.
struct Layout {
    scenarios: Vec<crate::dgp::Scenario>,
    columns: usize,
    panel_width: f64,
    panel_height: f64,
    x_domain: (f64, f64),
    y_domain: (f64, f64),
}

impl Layout {
    fn new(rows: &[SummaryRow], reference: f64) -> Result<Layout> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("no summary rows to plot".into()));
        }
        let mut scenarios: Vec<_> = rows.iter().map(|r| r.scenario).collect();
        scenarios.sort();
        scenarios.dedup();

        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (reference, reference);
        for r in rows {
            x_lo = x_lo.min(r.dropout_target);
            x_hi = x_hi.max(r.dropout_target);
            for v in [r.mean, r.p2_5, r.p97_5].into_iter().flatten() {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
        let x_pad = SERIES_SHIFT + 0.05 * (x_hi - x_lo).max(0.02);
        let y_pad = 0.06 * (y_hi - y_lo).max(0.5);

        let columns = scenarios.len().min(2);
        let grid_rows = scenarios.len().div_ceil(columns);
        Ok(Layout {
            scenarios,
            columns,
            panel_width: (CANVAS_WIDTH - 20.0) / columns as f64,
            panel_height: (CANVAS_HEIGHT - HEADER_HEIGHT - 10.0) / grid_rows as f64,
            x_domain: (x_lo - x_pad, x_hi + x_pad),
            y_domain: (y_lo - y_pad, y_hi + y_pad),
        })
    }

    /// Plot-area scales for the i-th panel (row-major in the grid).
    fn scales(&self, panel: usize) -> (LinearScale, LinearScale) {
        let col = (panel % self.columns) as f64;
        let row = (panel / self.columns) as f64;
        let origin_x = 10.0 + col * self.panel_width;
        let origin_y = HEADER_HEIGHT + row * self.panel_height;
        let x = LinearScale {
            domain: self.x_domain,
            range: (origin_x + PANEL_MARGIN_LEFT, origin_x + self.panel_width - PANEL_MARGIN_RIGHT),
        };
        let y = LinearScale {
            domain: self.y_domain,
            // SVG y grows downward
            range: (origin_y + self.panel_height - PANEL_MARGIN_BOTTOM, origin_y + PANEL_MARGIN_TOP),
        };
        (x, y)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick positions on a 1-2-5 ladder covering the domain.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target.max(1) as f64;
    let magnitude = 10f64.powf(raw.abs().log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(magnitude * 10.0);
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + 1e-12 {
        // snap near-zero ticks to exactly zero
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

/// Renders the figure as an SVG string.
pub fn emit_figure_svg(rows: &[SummaryRow], reference: f64) -> Result<String> {
    let layout = Layout::new(rows, reference)?;
    let mut svg = String::with_capacity(64 * 1024);
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_WIDTH}" height="{CANVAS_HEIGHT}" viewBox="0 0 {CANVAS_WIDTH} {CANVAS_HEIGHT}">"#
    ));
    svg.push('\n');
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="20" text-anchor="middle">Treatment-effect estimates vs mortality/dropout rate</text>"#,
        px(CANVAS_WIDTH / 2.0)
    ));
    svg.push('\n');

    // legend
    let mut legend_x = CANVAS_WIDTH / 2.0 - 220.0;
    for estimator in Estimator::ALL {
        let color = series_color(estimator);
        svg.push_str(&format!(
            r#"<circle cx="{}" cy="44" r="5" fill="{color}"/><text x="{}" y="48" font-family="sans-serif" font-size="14">{}</text>"#,
            px(legend_x),
            px(legend_x + 10.0),
            estimator.name()
        ));
        svg.push('\n');
        legend_x += 150.0;
    }

    for (panel, &scenario) in layout.scenarios.iter().enumerate() {
        let (xs, ys) = layout.scales(panel);
        svg.push_str(&format!(r#"<g id="panel-scenario-{}">"#, scenario.id()));
        svg.push('\n');

        let (left, right) = (xs.range.0, xs.range.1);
        let (bottom, top) = (ys.range.0, ys.range.1);

        // frame
        svg.push_str(&format!(
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
            px(left),
            px(top),
            px(right - left),
            px(bottom - top)
        ));
        svg.push('\n');
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">Scenario {}</text>"#,
            px((left + right) / 2.0),
            px(top - 10.0),
            scenario.id()
        ));
        svg.push('\n');

        // ticks and labels
        for t in nice_ticks(layout.x_domain.0.max(0.0), layout.x_domain.1, 6) {
            let tx = xs.px(t);
            svg.push_str(&format!(
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333" stroke-width="1"/>"##,
                px(tx),
                px(bottom),
                px(bottom + 5.0)
            ));
            svg.push_str(&format!(
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
                px(tx),
                px(bottom + 20.0),
                format_sig6(t)
            ));
            svg.push('\n');
        }
        for t in nice_ticks(layout.y_domain.0, layout.y_domain.1, 6) {
            let ty = ys.px(t);
            svg.push_str(&format!(
                r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#ddd" stroke-width="1"/>"##,
                px(left),
                px(right),
                px(ty)
            ));
            svg.push_str(&format!(
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
                px(left - 8.0),
                px(ty + 4.0),
                format_sig6(t)
            ));
            svg.push('\n');
        }
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">Mortality/dropout rate</text>"#,
            px((left + right) / 2.0),
            px(bottom + 38.0)
        ));
        svg.push('\n');

        // reference line at the true treatment effect
        svg.push_str(&format!(
            r##"<line class="reference" x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="#888" stroke-width="1" stroke-dasharray="6,4"/>"##,
            px(left),
            px(right),
            px(ys.px(reference))
        ));
        svg.push('\n');

        // series: whiskers then markers
        for r in rows.iter().filter(|r| r.scenario == scenario) {
            let color = series_color(r.estimator);
            let x = xs.px(r.dropout_target + series_shift(r.estimator));
            if let (Some(lo), Some(hi)) = (r.p2_5, r.p97_5) {
                let (y_lo, y_hi) = (ys.px(lo), ys.px(hi));
                svg.push_str(&format!(
                    r#"<line class="whisker" x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="{color}" stroke-width="1.2"/>"#,
                    px(x),
                    px(y_lo),
                    px(y_hi)
                ));
                for y in [y_lo, y_hi] {
                    svg.push_str(&format!(
                        r#"<line x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="{color}" stroke-width="1.2"/>"#,
                        px(x - WHISKER_CAP_HALF_WIDTH),
                        px(x + WHISKER_CAP_HALF_WIDTH),
                        px(y)
                    ));
                }
                svg.push('\n');
            }
            if let Some(mean) = r.mean {
                svg.push_str(&format!(
                    r#"<circle class="marker marker-{}" cx="{}" cy="{}" r="3.5" fill="{color}"/>"#,
                    r.estimator.name(),
                    px(x),
                    px(ys.px(mean))
                ));
                svg.push('\n');
            }
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the figure to an SVG file.
pub fn emit_figure(rows: &[SummaryRow], reference: f64, path: impl AsRef<Path>) -> Result<()> {
    let svg = emit_figure_svg(rows, reference)?;
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(svg.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
