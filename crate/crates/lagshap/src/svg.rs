//! Static SVG figures.
//!
//! Every plotted number is also written as a `data-*` attribute on its mark,
//! formatted by [`encode`], so figures can be checked against the bundle
//! without reading pixels.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::report::ReportBundle;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#2ca02c", "#d62728", "#ff7f0e"];

/// Ten significant digits in scientific notation.
pub fn encode(x: f64) -> String {
    format!("{x:.9e}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn new((d0, d1): (f64, f64), r0: f64, r1: f64) -> Self {
        let (d0, d1) = if d1 > d0 { (d0, d1) } else { (d0 - 0.5, d0 + 0.5) };
        Self { d0, d1, r0, r1 }
    }

    fn at(&self, x: f64) -> f64 {
        self.r0 + (x - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }
}

fn extent(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values.into_iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Roughly `n` round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / n.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

struct Doc {
    buf: String,
}

impl Doc {
    fn new(kind: &str, title: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-figure="{}" font-family="sans-serif" font-size="11">"#,
            esc(kind)
        );
        let _ = writeln!(buf, r#"<title>{}</title>"#, esc(title));
        let _ = writeln!(buf, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
        let _ = writeln!(buf, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(title));
        Self { buf }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.buf,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{extra}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.buf, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, esc(s));
    }

    fn x_axis(&mut self, sx: &Scale, y: f64, ticks: &[(f64, String)], label: &str) {
        self.line(sx.r0, y, sx.r1, y, "#333333", "");
        for (t, s) in ticks {
            let x = sx.at(*t);
            self.line(x, y, x, y + 4.0, "#333333", "");
            self.text(x, y + 16.0, "middle", s);
        }
        self.text((sx.r0 + sx.r1) / 2.0, y + 32.0, "middle", label);
    }

    fn y_axis(&mut self, sy: &Scale, x: f64, label: &str) {
        self.line(x, sy.r0, x, sy.r1, "#333333", "");
        for t in ticks(sy.d0, sy.d1, 6) {
            let y = sy.at(t);
            self.line(x - 4.0, y, x, y, "#333333", "");
            self.text(x - 6.0, y + 4.0, "end", &tick_label(t));
        }
        let mid = (sy.r0 + sy.r1) / 2.0;
        let _ = writeln!(
            self.buf,
            r#"<text x="14" y="{mid:.2}" text-anchor="middle" transform="rotate(-90 14 {mid:.2})">{}</text>"#,
            esc(label)
        );
    }

    fn legend(&mut self, x: f64, entries: &[(&str, &str)]) {
        for (i, (name, colour)) in entries.iter().enumerate() {
            let y = 40.0 + 16.0 * i as f64;
            let _ = writeln!(self.buf, r#"<rect x="{x}" y="{}" width="12" height="8" fill="{colour}"/>"#, y - 8.0);
            self.text(x + 18.0, y, "start", name);
        }
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// One labelled row of a horizontal bar chart; `values[k]` belongs to series `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarRow {
    pub label: String,
    pub values: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

/// Horizontal bars, one group per row, one bar per series. Bars carry
/// `data-feature`, `data-series` and `data-value`; whiskers carry `data-std`.
pub fn bar_chart(kind: &str, title: &str, axis_label: &str, series: &[&str], rows: &[BarRow]) -> String {
    let mut doc = Doc::new(kind, title);
    let (left, right, top, bottom) = (150.0, WIDTH - 30.0, 40.0, HEIGHT - 50.0);
    let reach = rows.iter().flat_map(|r| {
        let errs = r.errors.clone().unwrap_or_else(|| vec![0.0; r.values.len()]);
        r.values.iter().zip(errs).flat_map(|(v, e)| [v - e.abs(), v + e.abs()]).collect::<Vec<_>>()
    });
    let (lo, hi) = extent(reach.chain([0.0]));
    let pad = (hi - lo) * 0.05;
    let sx = Scale::new((if lo < 0.0 { lo - pad } else { 0.0 }, if hi > 0.0 { hi + pad } else { 0.0 }), left, right);
    let band = (bottom - top) / rows.len().max(1) as f64;
    let bar_h = (band * 0.8) / series.len().max(1) as f64;
    let x_ticks: Vec<(f64, String)> = ticks(sx.d0, sx.d1, 6).into_iter().map(|t| (t, tick_label(t))).collect();
    doc.x_axis(&sx, bottom, &x_ticks, axis_label);
    let zero = sx.at(0.0);
    for (i, row) in rows.iter().enumerate() {
        let y0 = top + band * i as f64 + band * 0.1;
        doc.text(left - 6.0, y0 + band * 0.4 + 4.0, "end", &row.label);
        for (k, v) in row.values.iter().enumerate() {
            let y = y0 + bar_h * k as f64;
            let x = sx.at(*v);
            let _ = writeln!(
                doc.buf,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{bar_h:.2}" fill="{}" data-feature="{}" data-series="{}" data-value="{}"/>"#,
                x.min(zero),
                (x - zero).abs(),
                PALETTE[k % PALETTE.len()],
                esc(&row.label),
                esc(series.get(k).copied().unwrap_or("")),
                encode(*v)
            );
            if let Some(e) = row.errors.as_ref().and_then(|e| e.get(k)) {
                let yc = y + bar_h / 2.0;
                let extra = format!(r#" data-feature="{}" data-std="{}""#, esc(&row.label), encode(*e));
                doc.line(sx.at(v - e), yc, sx.at(v + e), yc, "#000000", &extra);
            }
        }
    }
    doc.line(zero, top, zero, bottom, "#333333", "");
    if series.len() > 1 {
        let entries: Vec<(&str, &str)> = series.iter().enumerate().map(|(k, s)| (*s, PALETTE[k % PALETTE.len()])).collect();
        doc.legend(WIDTH - 170.0, &entries);
    }
    doc.finish()
}

/// Observed series with both models' hold-out forecasts.
pub fn forecast_chart(b: &ReportBundle) -> String {
    let mut doc = Doc::new("forecast", "Observed series and hold-out forecasts");
    let (left, right, top, bottom) = (70.0, WIDTH - 30.0, 40.0, HEIGHT - 50.0);
    let n = b.data.observed.len();
    let idx = |t: lagshap_core::YearMonth| b.data.start.months_until(t) as f64;
    let sx = Scale::new((0.0, (n.max(2) - 1) as f64), left, right);
    let values = b.data.observed.iter().copied().chain(b.forecasts.iter().flat_map(|r| [r.gbt, r.arima, r.arima_multi_step]));
    let (lo, hi) = extent(values);
    let pad = (hi - lo) * 0.05;
    let sy = Scale::new((lo - pad, hi + pad), bottom, top);
    let x_ticks: Vec<(f64, String)> = (0..n)
        .map(|i| b.data.start.add_months(i as i64))
        .filter(|t| t.month() == 1)
        .map(|t| (idx(t), t.year().to_string()))
        .collect();
    doc.x_axis(&sx, bottom, &x_ticks, "month");
    doc.y_axis(&sy, left, "level");
    if let Some(first) = b.forecasts.first() {
        let x = sx.at(idx(first.time) - 0.5);
        let extra = format!(r#" stroke-dasharray="4 3" data-test-start="{}""#, first.time);
        doc.line(x, top, x, bottom, "#999999", &extra);
    }

    let observed: Vec<(lagshap_core::YearMonth, f64)> =
        b.data.observed.iter().enumerate().map(|(i, v)| (b.data.start.add_months(i as i64), *v)).collect();
    let gbt: Vec<_> = b.forecasts.iter().map(|r| (r.time, r.gbt)).collect();
    let arima: Vec<_> = b.forecasts.iter().map(|r| (r.time, r.arima)).collect();
    let multi: Vec<_> = b.forecasts.iter().map(|r| (r.time, r.arima_multi_step)).collect();
    let lines = [
        ("observed", PALETTE[0], &observed),
        ("gbt", PALETTE[1], &gbt),
        ("arima", PALETTE[2], &arima),
        ("arima_multi_step", PALETTE[3], &multi),
    ];
    for (name, colour, pts) in lines {
        let dash = if name == "arima_multi_step" { r#" stroke-dasharray="5 3""# } else { "" };
        let path: Vec<String> = pts.iter().map(|(t, v)| format!("{:.2},{:.2}", sx.at(idx(*t)), sy.at(*v))).collect();
        let _ = writeln!(
            doc.buf,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash} data-series="{name}"/>"#,
            path.join(" ")
        );
        for (t, v) in pts.iter() {
            let _ = writeln!(
                doc.buf,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{colour}" data-series="{name}" data-time="{t}" data-value="{}"/>"#,
                sx.at(idx(*t)),
                sy.at(*v),
                encode(*v)
            );
        }
    }
    doc.legend(left + 20.0, &[
        ("observed", PALETTE[0]),
        ("gbt (one step)", PALETTE[1]),
        (if b.setup.arima_evaluation == crate::config::ForecastMode::OneStep { "arima (one step)" } else { "arima (multi step)" }, PALETTE[2]),
        ("arima (multi step)", PALETTE[3]),
    ]);
    doc.finish()
}

/// Attribution against feature value, coloured by a second feature.
pub fn dependence_chart(b: &ReportBundle) -> String {
    let d = &b.dependence;
    let title = format!("SHAP dependence of {} (colour: {})", d.feature, d.color_feature);
    let mut doc = Doc::new("dependence", &title);
    let (left, right, top, bottom) = (70.0, WIDTH - 60.0, 40.0, HEIGHT - 50.0);
    let sx = Scale::new(extent(d.points.iter().map(|p| p.value)), left, right);
    let sy = Scale::new(extent(d.points.iter().map(|p| p.phi)), bottom, top);
    let (c0, c1) = extent(d.points.iter().map(|p| p.color));
    let x_ticks: Vec<(f64, String)> = ticks(sx.d0, sx.d1, 6).into_iter().map(|t| (t, tick_label(t))).collect();
    doc.x_axis(&sx, bottom, &x_ticks, &d.feature);
    doc.y_axis(&sy, left, &format!("phi({})", d.feature));
    for p in &d.points {
        let u = if c1 > c0 { (p.color - c0) / (c1 - c0) } else { 0.5 };
        let (r, g, bl) = ((40.0 + 200.0 * u) as u8, 60u8, (240.0 - 200.0 * u) as u8);
        let _ = writeln!(
            doc.buf,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#{r:02x}{g:02x}{bl:02x}" data-time="{}" data-value="{}" data-phi="{}" data-color="{}"/>"##,
            sx.at(p.value),
            sy.at(p.phi),
            p.time,
            encode(p.value),
            encode(p.phi),
            encode(p.color)
        );
    }
    doc.text(WIDTH - 40.0, top + 10.0, "middle", &format!("{} high", d.color_feature));
    doc.text(WIDTH - 40.0, bottom, "middle", &format!("{} low", d.color_feature));
    doc.finish()
}

pub fn shap_chart(b: &ReportBundle) -> String {
    let rows: Vec<BarRow> = b
        .shap
        .global_tree
        .iter()
        .map(|r| BarRow { label: r.feature.clone(), values: vec![r.mean_abs_phi], errors: None })
        .collect();
    bar_chart("shap", "Mean |SHAP| over the hold-out rows", "mean |phi|", &["tree_shap"], &rows)
}

pub fn lime_chart(b: &ReportBundle) -> String {
    let l = &b.lime;
    let series: Vec<String> = b.lime.sweep.iter().map(|s| format!("factor {}", s.factor)).collect();
    let series: Vec<&str> = series.iter().map(String::as_str).collect();
    let features = l.instance.first().map(|e| e.features.clone()).unwrap_or_default();
    let rows: Vec<BarRow> = features
        .iter()
        .enumerate()
        .map(|(j, f)| BarRow { label: f.clone(), values: l.instance.iter().map(|e| e.scaled_coefficients[j]).collect(), errors: None })
        .collect();
    let title = format!("LIME coefficients for {} (per standard deviation)", l.instance_time);
    bar_chart("lime", &title, "coefficient x feature sd", &series, &rows)
}

pub fn importance_chart(b: &ReportBundle) -> String {
    let rows: Vec<BarRow> = b
        .permutation_importance
        .iter()
        .map(|e| BarRow { label: e.feature.clone(), values: vec![e.mean_increase], errors: Some(vec![e.std_increase]) })
        .collect();
    bar_chart("importance", "Permutation importance (increase in MSE)", "mean increase", &["importance"], &rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    /// Bundle section the figure is drawn from.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omitted {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub figures: Vec<ManifestEntry>,
    pub omitted: Vec<Omitted>,
}

/// Rendered figures keyed by file name, plus the manifest describing them.
pub fn render_figures(b: &ReportBundle) -> (Vec<(String, String)>, Manifest) {
    type Render = fn(&ReportBundle) -> String;
    let plan: [(&str, &str, bool, Render); 5] = [
        ("forecast", "forecasts", b.data.observed.is_empty() && b.forecasts.is_empty(), forecast_chart),
        ("shap", "shap.global_tree", b.shap.tree.is_empty() || b.shap.global_tree.is_empty(), shap_chart),
        ("dependence", "dependence", b.dependence.points.is_empty(), dependence_chart),
        ("lime", "lime.instance", b.lime.instance.is_empty(), lime_chart),
        ("importance", "permutation_importance", b.permutation_importance.is_empty(), importance_chart),
    ];
    let mut files = Vec::new();
    let mut manifest = Manifest::default();
    for (name, source, empty, render) in plan {
        if empty {
            manifest.omitted.push(Omitted { name: name.into(), reason: format!("{source} is empty") });
            continue;
        }
        let file = format!("{name}.svg");
        files.push((file.clone(), render(b)));
        manifest.figures.push(ManifestEntry { name: name.into(), file, source: source.into() });
    }
    (files, manifest)
}

/// Writes every figure and `manifest.json` into `dir`, creating it if needed.
pub fn emit_figures(b: &ReportBundle, dir: &Path) -> AppResult<Manifest> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let (files, manifest) = render_figures(b);
    for (name, svg) in files {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| AppError::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| AppError::io(&path, e))?;
    Ok(manifest)
}
