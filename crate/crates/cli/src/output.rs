//! File emission. Every file is written to a temporary sibling and renamed
//! into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use ramgate::sim::{AuditRecord, ModelKind, Rate, StepRecord, SweepResult};

use crate::CliError;

pub const SWEEP_COLUMNS: [&str; 9] = ["coverage", "model", "ier", "shr", "ocr", "executions", "halts", "n", "seed"];
pub const UNDEFINED: &str = "undefined";

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn fixed6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn rate_cell(r: Rate) -> String {
    r.value().map_or_else(|| UNDEFINED.to_owned(), fixed6)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn sweep_csv(result: &SweepResult) -> Vec<u8> {
    let rows = result.points.iter().flat_map(|p| {
        p.metrics.iter().map(move |(m, met)| {
            vec![
                fixed6(p.coverage),
                m.as_str().to_owned(),
                rate_cell(met.ier),
                rate_cell(met.shr),
                rate_cell(met.ocr),
                met.counts.executions.to_string(),
                met.counts.halts.to_string(),
                result.n.to_string(),
                result.seed.to_string(),
            ]
        })
    });
    csv_bytes(&SWEEP_COLUMNS, rows)
}

pub fn steps_csv(records: &[StepRecord]) -> Vec<u8> {
    let mut header = vec!["step", "episode", "event", "target", "a_r"];
    header.extend(ModelKind::ALL.map(ModelKind::as_str));
    let rows = records.iter().map(|r| {
        let mut row = vec![
            r.step.to_string(),
            r.episode.to_string(),
            r.event.kind.as_str().to_owned(),
            r.event.target.as_ref().map_or_else(String::new, |t| t.to_string()),
            r.a_r.to_string(),
        ];
        row.extend(
            ModelKind::ALL.map(|m| r.decision(m).map_or_else(|| "disabled".to_owned(), |d| d.label())),
        );
        row
    });
    csv_bytes(&header, rows)
}

pub fn audit_jsonl(audit: &[AuditRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for rec in audit {
        serde_json::to_writer(&mut out, rec).expect("audit records serialize");
        out.push(b'\n');
    }
    out
}

/// Chart geometry shared by the renderer and anything that reads the chart
/// back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartFrame {
    pub width: f64,
    pub height: f64,
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
}

pub const FRAME: ChartFrame = ChartFrame {
    width: 640.0,
    height: 400.0,
    left: 60.0,
    right: 140.0,
    top: 30.0,
    bottom: 50.0,
};

impl ChartFrame {
    /// Coverage and IER both map from `[0, 1]`.
    pub fn to_pixel(&self, coverage: f64, ier: f64) -> (f64, f64) {
        let w = self.width - self.left - self.right;
        let h = self.height - self.top - self.bottom;
        (self.left + coverage * w, self.top + (1.0 - ier) * h)
    }

    pub fn from_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let w = self.width - self.left - self.right;
        let h = self.height - self.top - self.bottom;
        ((x - self.left) / w, 1.0 - (y - self.top) / h)
    }
}

fn colour(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Attestation => "#d62728",
        ModelKind::Oracle => "#ff7f0e",
        ModelKind::Ram => "#1f77b4",
    }
}

/// IER against coverage, one polyline per model. Points with no executions
/// have no IER and are left out of the line.
pub fn sweep_svg(result: &SweepResult) -> String {
    let f = FRAME;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        f.width, f.height, f.width, f.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = f.to_pixel(0.0, 0.0);
    let (x1, y1) = f.to_pixel(1.0, 1.0);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" stroke="black" fill="none"/>"#
    );
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let (x, _) = f.to_pixel(v, 0.0);
        let (_, y) = f.to_pixel(0.0, v);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{v:.1}</text>"#,
            y0 + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v:.1}</text>"#,
            x0 - 6.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">coverage</text>"#,
        (x0 + x1) / 2.0,
        f.height - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.2})">IER</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let models: Vec<ModelKind> = result
        .points
        .first()
        .map(|p| p.metrics.keys().copied().collect())
        .unwrap_or_default();
    for (k, m) in models.iter().enumerate() {
        let pts: Vec<String> = result
            .points
            .iter()
            .filter_map(|p| {
                let ier = p.metrics.get(m)?.ier.value()?;
                let (x, y) = f.to_pixel(p.coverage, ier);
                Some(format!("{x:.4},{y:.4}"))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-model="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            m.as_str(),
            pts.join(" "),
            colour(*m)
        );
        let ly = f.top + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"#,
            x1 + 15.0,
            x1 + 35.0,
            colour(*m)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            x1 + 40.0,
            ly + 4.0,
            m.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}
