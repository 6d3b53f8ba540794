//! Report documents: the machine-readable output of every command, plus the
//! text and CSV renderings. Serialization order is fixed by declaration, so
//! identical runs produce byte-identical output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use revcheck_core::{CheckRow, Qty, SuiteReport};

/// A quantity as its exact rational string (rational mode only) plus a
/// decimal approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QtyJson {
    pub exact: Option<String>,
    pub approx: f64,
}

impl From<Qty> for QtyJson {
    fn from(q: Qty) -> Self {
        QtyJson { exact: q.exact, approx: q.approx }
    }
}

impl QtyJson {
    /// Exact form when present, decimal otherwise; used by text and CSV.
    pub fn display(&self) -> String {
        match &self.exact {
            Some(e) => e.clone(),
            None => format!("{}", self.approx),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedQty {
    pub name: String,
    #[serde(flatten)]
    pub value: QtyJson,
}

/// One pass/fail row; `lhs`/`rhs` are absent for plain yes/no facts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowJson {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<QtyJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<QtyJson>,
}

impl From<&CheckRow> for RowJson {
    fn from(row: &CheckRow) -> Self {
        RowJson {
            name: row.name.clone(),
            holds: row.holds,
            lhs: row.lhs.clone().map(QtyJson::from),
            rhs: row.rhs.clone().map(QtyJson::from),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdJson {
    pub item: usize,
    pub t: QtyJson,
    pub cut: QtyJson,
    pub item_revenue: QtyJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEntryJson {
    pub items: Vec<usize>,
    pub prob: QtyJson,
    pub class_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompJson {
    pub thresholds: Vec<ThresholdJson>,
    pub tail_prob: Vec<QtyJson>,
    pub entries: Vec<TailEntryJson>,
    pub class_respecting: bool,
    pub expected_tail_classes: QtyJson,
    pub checks: Vec<RowJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionJson {
    pub kind_in: String,
    pub kind_out: String,
    /// Path the reduced instance file was written to.
    pub written: String,
    pub checks: Vec<RowJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceReportJson {
    pub label: String,
    /// Content hash of the instance, for corpus bookkeeping.
    pub fingerprint: String,
    pub mode: String,
    pub rows: Vec<RowJson>,
    pub all_hold: bool,
}

impl From<&SuiteReport> for InstanceReportJson {
    fn from(r: &SuiteReport) -> Self {
        InstanceReportJson {
            label: r.label.clone(),
            fingerprint: r.fingerprint.clone(),
            mode: r.mode.to_string(),
            rows: r.rows.iter().map(RowJson::from).collect(),
            all_hold: r.all_hold(),
        }
    }
}

/// The one output record every command produces (`gen` emits the instance
/// file itself instead). Sections are optional; the renderers print only
/// what is present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<NamedQty>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<InstanceReportJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_hold: Option<bool>,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        ReportDocument {
            schema: 1,
            command: command.to_string(),
            name: None,
            kind: None,
            mode: None,
            quantities: Vec::new(),
            decomposition: None,
            reduction: None,
            instances: Vec::new(),
            all_hold: None,
        }
    }

    /// The verdict the exit code reflects: false only when a check failed.
    pub fn verdict(&self) -> bool {
        self.all_hold.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn render(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(doc),
        Format::Text => render_text(doc),
    }
}

/// One check per row: `suite,check,lhs,rhs,holds`. Quantities appear as
/// rows with an empty `rhs` and `holds` true.
fn render_csv(doc: &ReportDocument) -> String {
    let mut out = String::from("suite,check,lhs,rhs,holds\n");
    let suite = doc.name.clone().unwrap_or_else(|| doc.command.clone());
    let escape = |s: &str| {
        if s.contains(',') || s.contains('"') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut push_row = |suite: &str, row: &RowJson| {
        let side = |q: &Option<QtyJson>| q.as_ref().map(|q| q.display()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            escape(suite),
            escape(&row.name),
            side(&row.lhs),
            side(&row.rhs),
            row.holds
        );
    };
    for q in &doc.quantities {
        push_row(
            &suite,
            &RowJson { name: q.name.clone(), holds: true, lhs: Some(q.value.clone()), rhs: None },
        );
    }
    if let Some(d) = &doc.decomposition {
        for row in &d.checks {
            push_row(&suite, row);
        }
    }
    if let Some(r) = &doc.reduction {
        for row in &r.checks {
            push_row(&suite, row);
        }
    }
    for inst in &doc.instances {
        for row in &inst.rows {
            push_row(&inst.label, row);
        }
    }
    out
}

fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let mut header = doc.command.clone();
    if let Some(name) = &doc.name {
        let _ = write!(header, " {name}");
    }
    let mut tags: Vec<String> = Vec::new();
    if let Some(kind) = &doc.kind {
        tags.push(kind.clone());
    }
    if let Some(mode) = &doc.mode {
        tags.push(mode.clone());
    }
    if tags.is_empty() {
        let _ = writeln!(out, "{header}");
    } else {
        let _ = writeln!(out, "{header} ({})", tags.join(", "));
    }

    let fmt_qty = |q: &QtyJson| match &q.exact {
        Some(e) => format!("{e} ({})", q.approx),
        None => format!("{}", q.approx),
    };
    for q in &doc.quantities {
        let _ = writeln!(out, "  {} = {}", q.name, fmt_qty(&q.value));
    }

    let write_rows = |out: &mut String, rows: &[RowJson], indent: &str| {
        for row in rows {
            let mark = if row.holds { "ok  " } else { "FAIL" };
            match (&row.lhs, &row.rhs) {
                (Some(l), Some(r)) => {
                    let _ = writeln!(
                        out,
                        "{indent}{mark}  {}: {} vs {}",
                        row.name,
                        fmt_qty(l),
                        fmt_qty(r)
                    );
                }
                (Some(l), None) => {
                    let _ = writeln!(out, "{indent}{mark}  {}: {}", row.name, fmt_qty(l));
                }
                _ => {
                    let _ = writeln!(out, "{indent}{mark}  {}", row.name);
                }
            }
        }
    };

    if let Some(d) = &doc.decomposition {
        let _ = writeln!(out, "  thresholds (item: t, cut, item revenue):");
        for th in &d.thresholds {
            let _ = writeln!(
                out,
                "    {}: {}, {}, {}",
                th.item,
                fmt_qty(&th.t),
                fmt_qty(&th.cut),
                fmt_qty(&th.item_revenue)
            );
        }
        let _ = writeln!(out, "  tail events (items: probability, classes):");
        for e in &d.entries {
            let _ = writeln!(
                out,
                "    {:?}: {}, {}",
                e.items,
                fmt_qty(&e.prob),
                e.class_count
            );
        }
        let _ = writeln!(
            out,
            "  class respecting: {}; expected tail classes: {}",
            d.class_respecting,
            fmt_qty(&d.expected_tail_classes)
        );
        write_rows(&mut out, &d.checks, "  ");
    }

    if let Some(r) = &doc.reduction {
        let _ = writeln!(out, "  {} -> {} written to {}", r.kind_in, r.kind_out, r.written);
        write_rows(&mut out, &r.checks, "  ");
    }

    for inst in &doc.instances {
        let _ = writeln!(out, "  {} [{}]", inst.label, inst.mode);
        write_rows(&mut out, &inst.rows, "    ");
    }

    if let Some(all) = doc.all_hold {
        let total: usize = doc
            .instances
            .iter()
            .map(|i| i.rows.len())
            .chain(doc.decomposition.iter().map(|d| d.checks.len()))
            .chain(doc.reduction.iter().map(|r| r.checks.len()))
            .sum();
        let passed: usize = doc
            .instances
            .iter()
            .flat_map(|i| i.rows.iter())
            .chain(doc.decomposition.iter().flat_map(|d| d.checks.iter()))
            .chain(doc.reduction.iter().flat_map(|r| r.checks.iter()))
            .filter(|r| r.holds)
            .count();
        let _ = writeln!(
            out,
            "verdict: {}{passed}/{total} checks hold",
            if all { "" } else { "FAILED, " }
        );
    }
    out
}
