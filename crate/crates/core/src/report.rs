//! Report tables and their static SVG views. Figures only print strings
//! that also appear in the CSV they are drawn from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{CorrelationRow, RegressionResult};

pub const OR_CHART_TOP_N: usize = 30;
const SIG: f64 = 0.05;

/// Shading band for a p-value: "≤0.0001", "≤0.001" or "≤0.05"; `None`
/// above 0.05.
pub fn p_band(p: f64) -> Option<&'static str> {
    if p <= 0.0001 {
        Some("≤0.0001")
    } else if p <= 0.001 {
        Some("≤0.001")
    } else if p <= SIG {
        Some("≤0.05")
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub label: String,
    pub frequency: usize,
}

/// `event text (a1, a2, a3)` with at most three example attributes.
pub fn event_label(text: &str, attributes: &[String]) -> String {
    let shown: Vec<&str> = attributes.iter().take(3).map(String::as_str).collect();
    if shown.is_empty() {
        text.to_string()
    } else {
        format!("{text} ({})", shown.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrChartRow {
    pub feature: String,
    pub label: String,
    pub odds_ratio: f64,
    pub p: f64,
    pub p_band: String,
    pub direction: String,
    pub frequency: usize,
}

/// Significant rows (adjusted p ≤ 0.05), the `top_n` most frequent of them,
/// ordered by odds ratio descending.
pub fn or_chart_rows(results: &[RegressionResult], info: &BTreeMap<String, FeatureInfo>, top_n: usize) -> Vec<OrChartRow> {
    let mut sig: Vec<OrChartRow> = results
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| {
            let band = p_band(r.p_adjusted)?;
            let fi = info.get(&r.feature).cloned().unwrap_or_else(|| FeatureInfo { label: r.feature.clone(), frequency: 0 });
            let direction = if r.odds_ratio > 1.0 {
                "positive"
            } else if r.odds_ratio < 1.0 {
                "negative"
            } else {
                "none"
            };
            Some(OrChartRow {
                feature: r.feature.clone(),
                label: fi.label,
                odds_ratio: r.odds_ratio,
                p: r.p_adjusted,
                p_band: band.to_string(),
                direction: direction.to_string(),
                frequency: fi.frequency,
            })
        })
        .collect();
    sig.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.feature.cmp(&b.feature)));
    sig.truncate(top_n);
    sig.sort_by(|a, b| b.odds_ratio.total_cmp(&a.odds_ratio).then(a.feature.cmp(&b.feature)));
    sig
}

fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const OR_HEADER: [&str; 7] = ["feature", "label", "odds_ratio", "p", "p_band", "direction", "frequency"];

/// Writes `<stem>.csv` and `<stem>.svg` under `dir`; returns the rows.
pub fn emit_or_chart(
    results: &[RegressionResult],
    info: &BTreeMap<String, FeatureInfo>,
    top_n: usize,
    dir: &Path,
    stem: &str,
) -> Result<Vec<OrChartRow>> {
    let rows = or_chart_rows(results, info, top_n);
    if rows.is_empty() {
        log::warn!("{stem}: no significant results; writing header only");
    }
    let csv_rows: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.feature.clone(),
                r.label.clone(),
                r.odds_ratio.to_string(),
                r.p.to_string(),
                r.p_band.clone(),
                r.direction.clone(),
                r.frequency.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join(format!("{stem}.csv")), OR_HEADER, csv_rows.iter().cloned())?;
    write_text(&dir.join(format!("{stem}.svg")), &or_chart_svg(&csv_rows))?;
    Ok(rows)
}

fn band_fill(band: &str) -> &'static str {
    match band {
        "≤0.0001" => "#08306b",
        "≤0.001" => "#2171b5",
        _ => "#9ecae1",
    }
}

/// Horizontal bars on a log scale centred at OR = 1, drawn from CSV strings.
fn or_chart_svg(rows: &[[String; 7]]) -> String {
    let row_h = 22.0;
    let (label_w, plot_w) = (420.0, 360.0);
    let height = 40.0 + row_h * rows.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        label_w + plot_w + 80.0
    );
    if rows.is_empty() {
        let _ = writeln!(s, r#"<text x="10" y="24">no significant results</text>"#);
        s.push_str("</svg>\n");
        return s;
    }
    let max_log = rows
        .iter()
        .filter_map(|r| r[2].parse::<f64>().ok())
        .map(|or| or.ln().abs())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let mid = label_w + plot_w / 2.0;
    let _ = writeln!(s, r##"<line x1="{mid}" y1="20" x2="{mid}" y2="{height}" stroke="#444"/>"##);
    let _ = writeln!(s, r#"<text x="{mid}" y="14" text-anchor="middle">OR = 1</text>"#);
    for (k, r) in rows.iter().enumerate() {
        let y = 30.0 + row_h * k as f64;
        let or: f64 = r[2].parse().unwrap_or(1.0);
        let len = or.ln() / max_log * (plot_w / 2.0 - 10.0);
        let (x, w) = if len >= 0.0 { (mid, len) } else { (mid + len, -len) };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, label_w - 6.0, y + 12.0, esc(&r[1]));
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y}" width="{w:.2}" height="{}" fill="{}"><title>{}</title></rect>"#,
            row_h - 6.0,
            band_fill(&r[4]),
            esc(&r[4])
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, label_w + plot_w + 4.0, y + 12.0, esc(&r[2]));
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlameRow {
    pub cevent_id: String,
    pub label: String,
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

/// Rows with p < 0.05: positive correlations first, each sign group by
/// decreasing |rho|.
pub fn blame_table_rows(correlations: &[CorrelationRow], labels: &BTreeMap<String, String>) -> Vec<BlameRow> {
    let mut rows: Vec<BlameRow> = correlations
        .iter()
        .filter(|c| c.p < SIG)
        .map(|c| BlameRow {
            cevent_id: c.cevent_id.clone(),
            label: labels.get(&c.cevent_id).cloned().unwrap_or_else(|| c.cevent_id.clone()),
            rho: c.rho,
            p: c.p,
            n: c.n,
        })
        .collect();
    rows.sort_by(|a, b| {
        (b.rho > 0.0)
            .cmp(&(a.rho > 0.0))
            .then(b.rho.abs().total_cmp(&a.rho.abs()))
            .then(a.cevent_id.cmp(&b.cevent_id))
    });
    rows
}

const BLAME_HEADER: [&str; 5] = ["cevent_id", "label", "rho", "p", "n"];

pub fn emit_blame_table(
    correlations: &[CorrelationRow],
    labels: &BTreeMap<String, String>,
    dir: &Path,
    stem: &str,
) -> Result<Vec<BlameRow>> {
    let rows = blame_table_rows(correlations, labels);
    let csv_rows: Vec<[String; 5]> = rows
        .iter()
        .map(|r| [r.cevent_id.clone(), r.label.clone(), r.rho.to_string(), r.p.to_string(), r.n.to_string()])
        .collect();
    write_csv(&dir.join(format!("{stem}.csv")), BLAME_HEADER, csv_rows.iter().cloned())?;
    write_text(&dir.join(format!("{stem}.svg")), &blame_svg(&csv_rows))?;
    Ok(rows)
}

fn blame_svg(rows: &[[String; 5]]) -> String {
    let row_h = 22.0;
    let (label_w, plot_w) = (420.0, 300.0);
    let height = 40.0 + row_h * rows.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        label_w + plot_w + 80.0
    );
    if rows.is_empty() {
        let _ = writeln!(s, r#"<text x="10" y="24">no significant correlations</text>"#);
        s.push_str("</svg>\n");
        return s;
    }
    let mid = label_w + plot_w / 2.0;
    let _ = writeln!(s, r##"<line x1="{mid}" y1="20" x2="{mid}" y2="{height}" stroke="#444"/>"##);
    for (k, r) in rows.iter().enumerate() {
        let y = 30.0 + row_h * k as f64;
        let rho: f64 = r[2].parse().unwrap_or(0.0);
        let len = rho * (plot_w / 2.0 - 10.0);
        let (x, w) = if len >= 0.0 { (mid, len) } else { (mid + len, -len) };
        let fill = if rho >= 0.0 { "#cb181d" } else { "#2171b5" };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, label_w - 6.0, y + 12.0, esc(&r[1]));
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y}" width="{w:.2}" height="{}" fill="{fill}"/>"#, row_h - 6.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, label_w + plot_w + 4.0, y + 12.0, esc(&r[2]));
    }
    s.push_str("</svg>\n");
    s
}

/// Numbers printed in an SVG (text nodes that parse as floats).
pub fn svg_numbers(svg: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('>') {
        rest = &rest[start + 1..];
        let end = rest.find('<').unwrap_or(rest.len());
        let text = rest[..end].trim();
        if !text.is_empty() && text.parse::<f64>().is_ok() {
            out.push(text.to_string());
        }
        rest = &rest[end..];
    }
    out
}
