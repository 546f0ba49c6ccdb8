//! Hand-rolled SVG line charts for experiment reports.
//!
//! No plotting dependency: the charts are simple enough (axes, ticks,
//! polylines, legend) that emitting the SVG directly keeps the output
//! deterministic and easy to diff.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{ImprovementRow, ReportRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: &[&str] = &["#1f6fb2", "#d1495b", "#3a9a5c", "#8a5fbf", "#c88a2e", "#4a4a4a"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_bounds(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

impl Chart {
    fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(y);
            }
        }
        let (x_lo, x_hi) = nice_bounds(
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let mut y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        y_min = y_min.min(0.0);
        let (y_lo, y_hi) = nice_bounds(y_min, y_max);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        let mut out = String::new();
        out.push_str(&format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
             width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"16\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            escape_xml(&self.title)
        ));

        // Axes box and tick labels.
        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
             fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
        ));
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x_lo + t * (x_hi - x_lo);
            let yv = y_lo + t * (y_hi - y_lo);
            let px = sx(xv);
            let py = sy(yv);
            out.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#ccc\" \
                 stroke-width=\"0.5\"/>\n",
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            ));
            out.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#ccc\" \
                 stroke-width=\"0.5\"/>\n",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            ));
            out.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"11\">{xv:.1}</text>\n",
                MARGIN_TOP + plot_h + 18.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
                 font-size=\"11\">{yv:.4}</text>\n",
                MARGIN_LEFT - 6.0,
                py + 4.0
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape_xml(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape_xml(&self.y_label)
        ));

        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                pts.join(" ")
            ));
            for &(x, y) in &series.points {
                out.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    sx(x),
                    sy(y)
                ));
            }
            let ly = MARGIN_TOP + 16.0 + idx as f64 * 20.0;
            let lx = MARGIN_LEFT + plot_w + 12.0;
            out.push_str(&format!(
                "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n",
                lx + 22.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" \
                 font-size=\"12\">{}</text>\n",
                lx + 28.0,
                ly + 4.0,
                escape_xml(&series.label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// (n -> values) aggregation for one (tier_set, solver) slice.
fn group_by_n<'a, I>(rows: I, value: impl Fn(&ReportRow) -> f64) -> Vec<(f64, f64)>
where
    I: Iterator<Item = &'a ReportRow>,
{
    let mut grouped: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in rows {
        grouped.entry(row.n).or_default().push(value(row));
    }
    grouped
        .into_iter()
        .map(|(n, vs)| (n as f64, mean(&vs)))
        .collect()
}

/// Render the report charts into `out_dir` and return the written paths:
/// one normalized-profit chart per tier set, one coverage-and-profit chart,
/// and (when improvement data exists) one improvement chart.
pub fn render_plots(
    rows: &[ReportRow],
    improvements: &[ImprovementRow],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Domain("cannot plot an empty report".into()));
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let mut tier_sets: Vec<u8> = rows.iter().map(|r| r.tier_set).collect();
    tier_sets.sort_unstable();
    tier_sets.dedup();
    let mut solvers: Vec<String> = rows.iter().map(|r| r.solver.clone()).collect();
    solvers.sort();
    solvers.dedup();

    for &t in &tier_sets {
        let mut chart = Chart {
            title: format!("Normalized profit vs user count (tier set {t})"),
            x_label: "users".into(),
            y_label: "normalized profit".into(),
            series: Vec::new(),
        };
        for solver in &solvers {
            let points = group_by_n(
                rows.iter().filter(|r| r.tier_set == t && &r.solver == solver),
                |r| r.normalized_profit,
            );
            if !points.is_empty() {
                chart.series.push(Series {
                    label: solver.clone(),
                    points,
                });
            }
        }
        let path = out_dir.join(format!("profit_tier{t}.svg"));
        std::fs::write(&path, chart.render()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    // Coverage and normalized profit together, per tier set, for the first
    // solver present (deterministic by the sorted solver list).
    let lead = &solvers[0];
    let mut chart = Chart {
        title: format!("Coverage and normalized profit ({lead})"),
        x_label: "users".into(),
        y_label: "ratio".into(),
        series: Vec::new(),
    };
    for &t in &tier_sets {
        let slice = || rows.iter().filter(move |r| r.tier_set == t && &r.solver == lead);
        let coverage = group_by_n(slice(), |r| r.coverage);
        let profit = group_by_n(slice(), |r| r.normalized_profit);
        if !coverage.is_empty() {
            chart.series.push(Series {
                label: format!("coverage, set {t}"),
                points: coverage,
            });
            chart.series.push(Series {
                label: format!("profit, set {t}"),
                points: profit,
            });
        }
    }
    let path = out_dir.join("coverage_profit.svg");
    std::fs::write(&path, chart.render()).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let defined: Vec<&ImprovementRow> =
        improvements.iter().filter(|r| r.improvement.is_some()).collect();
    if !defined.is_empty() {
        let mut chart = Chart {
            title: "Multi-tier profit gain over single-tier pricing".into(),
            x_label: "users".into(),
            y_label: "relative improvement".into(),
            series: Vec::new(),
        };
        let mut sets: Vec<u8> = defined.iter().map(|r| r.tier_set).collect();
        sets.sort_unstable();
        sets.dedup();
        for t in sets {
            let mut grouped: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for row in defined.iter().filter(|r| r.tier_set == t) {
                grouped.entry(row.n).or_default().push(row.improvement.unwrap());
            }
            chart.series.push(Series {
                label: format!("tier set {t}"),
                points: grouped.into_iter().map(|(n, vs)| (n as f64, mean(&vs))).collect(),
            });
        }
        let path = out_dir.join("improvement.svg");
        std::fs::write(&path, chart.render()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    Ok(written)
}
