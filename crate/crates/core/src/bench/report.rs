use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::cellsim::GarmentClass;
use crate::classify::{outcome_name, OUTCOMES};

use super::audit::{consistency_audit, AccuracyRow};
use super::{published, BenchError, ConfusionMatrix, TimingStats};

/// Everything reported about one evaluated model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelReport {
    pub model: String,
    pub matrix: ConfusionMatrix,
    pub timing: Option<TimingStats>,
    pub hardware: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    /// report.md plus SVG heatmaps.
    Md,
    /// table1.csv, table2.csv and one confusion grid per model.
    Csv,
    /// audit.json with full-precision metrics and consistency checks.
    Json,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Md, ReportFormat::Csv, ReportFormat::Json];
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" => Ok(ReportFormat::Md),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format '{other}' (md, csv, json)")),
        }
    }
}

/// File-system safe form of a model name.
pub fn sanitize_model_name(model: &str) -> String {
    let s: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    if s.is_empty() {
        "model".to_string()
    } else {
        s
    }
}

fn file_stems(models: &[ModelReport]) -> Vec<String> {
    let mut used = HashSet::new();
    models
        .iter()
        .map(|m| {
            let base = sanitize_model_name(&m.model);
            let mut stem = base.clone();
            let mut k = 2;
            while !used.insert(stem.clone()) {
                stem = format!("{base}-{k}");
                k += 1;
            }
            stem
        })
        .collect()
}

fn pct(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |v| format!("{:.2}%", v * 100.0))
}

fn full(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// Writes the selected report files into `out_dir` and returns their paths.
pub fn emit_report(
    models: &[ModelReport],
    formats: &[ReportFormat],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(out_dir)?;
    let stems = file_stems(models);
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), BenchError> {
        let p = out_dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    if formats.contains(&ReportFormat::Md) {
        put("report.md".into(), markdown(models, &stems))?;
        for (m, stem) in models.iter().zip(&stems) {
            put(format!("confusion_{stem}.svg"), heatmap_svg(&m.model, &m.matrix))?;
        }
    }
    if formats.contains(&ReportFormat::Csv) {
        put("table1.csv".into(), table1_csv(models)?)?;
        put("table2.csv".into(), table2_csv(models)?)?;
        for (m, stem) in models.iter().zip(&stems) {
            put(format!("confusion_{stem}.csv"), m.matrix.to_csv()?)?;
        }
    }
    if formats.contains(&ReportFormat::Json) {
        put("audit.json".into(), serde_json::to_string_pretty(&audit_json(models))?)?;
    }
    Ok(written)
}

fn markdown(models: &[ModelReport], stems: &[String]) -> String {
    let mut s = String::from("# Classification benchmark\n\n## Accuracy\n\n");
    s.push_str("| Model | Overall | Shirt | Sock | Trousers | Underwear | Other | Empty |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    if let Some(first) = models.first() {
        let counts = first.matrix.class_counts();
        let _ = writeln!(
            s,
            "| Image Count | {} | {} |",
            first.matrix.total(),
            counts.map(|c| c.to_string()).join(" | ")
        );
    }
    for m in models {
        let per = m.matrix.per_class_accuracy().map(pct);
        let _ = writeln!(s, "| {} | {} | {} |", m.model, pct(m.matrix.overall_accuracy()), per.join(" | "));
    }

    let timed: Vec<&ModelReport> = models.iter().filter(|m| m.timing.is_some()).collect();
    if !timed.is_empty() {
        s.push_str("\n## Computation time (s)\n\n|  |");
        for m in &timed {
            let _ = write!(s, " {} |", m.model);
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(timed.len()));
        s.push('\n');
        let rows: [(&str, fn(&ModelReport) -> String); 5] = [
            ("Hardware", |m| m.hardware.clone().unwrap_or_else(|| "-".into())),
            ("Mean", |m| format!("{:.3}", m.timing.unwrap().mean_s)),
            ("P10", |m| format!("{:.3}", m.timing.unwrap().p10_s)),
            ("P90", |m| format!("{:.3}", m.timing.unwrap().p90_s)),
            ("n", |m| m.timing.unwrap().n.to_string()),
        ];
        for (label, f) in rows {
            let _ = write!(s, "| {label} |");
            for m in &timed {
                let _ = write!(s, " {} |", f(m));
            }
            s.push('\n');
        }
    }

    if !models.is_empty() {
        s.push_str("\n## Confusion matrices\n\n");
        for (m, stem) in models.iter().zip(stems) {
            let _ = writeln!(s, "![{}](confusion_{stem}.svg)\n", m.model);
        }
    }
    s
}

fn table1_csv(models: &[ModelReport]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model", "images", "overall"];
    header.extend(GarmentClass::ALL.iter().map(|c| c.as_str()));
    w.write_record(&header)?;
    for m in models {
        let mut row = vec![m.model.clone(), m.matrix.total().to_string(), full(m.matrix.overall_accuracy())];
        row.extend(m.matrix.per_class_accuracy().map(full));
        w.write_record(&row)?;
    }
    finish(w)
}

fn table2_csv(models: &[ModelReport]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "hardware", "n", "mean_s", "p10_s", "p90_s"])?;
    for m in models {
        if let Some(t) = m.timing {
            w.write_record([
                m.model.clone(),
                m.hardware.clone().unwrap_or_default(),
                t.n.to_string(),
                t.mean_s.to_string(),
                t.p10_s.to_string(),
                t.p90_s.to_string(),
            ])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, BenchError> {
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn audit_json(models: &[ModelReport]) -> Value {
    let model_entries: Vec<Value> = models
        .iter()
        .map(|m| {
            let per: serde_json::Map<String, Value> = GarmentClass::ALL
                .iter()
                .zip(m.matrix.per_class_accuracy())
                .map(|(c, a)| (c.as_str().to_string(), json!(a)))
                .collect();
            json!({
                "model": m.model,
                "hardware": m.hardware,
                "images": m.matrix.total(),
                "class_counts": m.matrix.class_counts(),
                "correct": m.matrix.trace(),
                "overall": m.matrix.overall_accuracy(),
                "per_class": per,
                "timing": m.timing,
                "confusion": m.matrix.counts,
            })
        })
        .collect();
    let rows: Vec<AccuracyRow> = models.iter().map(|m| AccuracyRow::from_matrix(&m.model, &m.matrix)).collect();
    let model_flags: Vec<_> = models
        .iter()
        .zip(&rows)
        .flat_map(|(m, r)| consistency_audit(std::slice::from_ref(r), &m.matrix.class_counts(), m.matrix.total()))
        .collect();
    let published_rows: Vec<AccuracyRow> = published::ACCURACY.iter().map(AccuracyRow::from_published).collect();
    json!({
        "class_order": GarmentClass::ALL.map(|c| c.as_str()),
        "outcome_order": (0..OUTCOMES).map(outcome_name).collect::<Vec<_>>(),
        "models": model_entries,
        "model_consistency_flags": model_flags,
        "published": {
            "class_counts": published::CLASS_COUNTS,
            "class_counts_sum": published::CLASS_COUNTS.iter().sum::<u64>(),
            "image_count": published::IMAGE_COUNT,
            "consistency_flags": consistency_audit(&published_rows, &published::CLASS_COUNTS, published::IMAGE_COUNT),
        },
    })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone heatmap: true classes as rows, predicted outcomes (including
/// invalid) as columns, shaded by row fraction and labeled with counts.
pub(crate) fn heatmap_svg(model: &str, m: &ConfusionMatrix) -> String {
    const CW: usize = 72;
    const CH: usize = 40;
    const LEFT: usize = 96;
    const TOP: usize = 64;
    let width = LEFT + CW * OUTCOMES + 16;
    let height = TOP + CH * 6 + 40;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(model));
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2,
        xml_escape(model)
    );
    for j in 0..OUTCOMES {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + j * CW + CW / 2,
            TOP - 10,
            outcome_name(j)
        );
    }
    for c in GarmentClass::ALL {
        let i = c.index();
        let row_sum = m.row_sum(c);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 8,
            TOP + i * CH + CH / 2 + 5,
            c.as_str()
        );
        for j in 0..OUTCOMES {
            let v = m.counts[i][j];
            let f = if row_sum > 0 { v as f64 / row_sum as f64 } else { 0.0 };
            let shade = |hi: f64| (255.0 - f * (255.0 - hi)).round() as u8;
            let (r, g, b) = (shade(8.0), shade(81.0), shade(156.0));
            let ink = if f > 0.5 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r##"<rect class="cell" x="{}" y="{}" width="{CW}" height="{CH}" fill="rgb({r},{g},{b})" stroke="#999"/>"##,
                LEFT + j * CW,
                TOP + i * CH
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v}</text>"#,
                LEFT + j * CW + CW / 2,
                TOP + i * CH + CH / 2 + 5
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">predicted</text>"#,
        LEFT + CW * OUTCOMES / 2,
        TOP + CH * 6 + 28
    );
    s.push_str("</svg>\n");
    s
}
