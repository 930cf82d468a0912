use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::Value;

use super::{DecayReport, HarnessError, McReport};

/// Largest |z| accepted in a default run. Dozens of classes are tested at
/// once, so the bound sits above the usual 3.
pub const Z_BOUND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// A report with a JSON form and a flat table form.
pub trait Emit: Serialize {
    fn header_comment(&self) -> Option<String> {
        None
    }
    fn table(&self) -> (Vec<String>, Vec<Vec<String>>);
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Emit for [McReport] {
    fn header_comment(&self) -> Option<String> {
        Some(format!(
            "z-scores use the exact null standard error; with one test per row, |z| <= {Z_BOUND} \
             leaves slack for multiple testing"
        ))
    }

    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let keys: BTreeSet<&String> = self.iter().flat_map(|r| r.parameters.keys()).collect();
        let mut header = vec!["experiment".to_string()];
        header.extend(keys.iter().map(|k| k.to_string()));
        header
            .extend(["trials", "estimate", "stderr", "exact", "z_score", "seed"].map(String::from));
        let rows = self
            .iter()
            .map(|r| {
                let mut row = vec![r.experiment.clone()];
                row.extend(
                    keys.iter()
                        .map(|k| r.parameters.get(*k).map(cell).unwrap_or_default()),
                );
                row.extend([
                    r.trials.to_string(),
                    num(r.estimate),
                    num(r.stderr),
                    opt(r.exact),
                    opt(r.z_score),
                    r.seed.0.to_string(),
                ]);
                row
            })
            .collect();
        (header, rows)
    }
}

impl Emit for Vec<McReport> {
    fn header_comment(&self) -> Option<String> {
        self.as_slice().header_comment()
    }

    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        self.as_slice().table()
    }
}

impl Emit for McReport {
    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        std::slice::from_ref(self).table()
    }
}

impl Emit for DecayReport {
    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = [
            "pattern",
            "lambda",
            "trials",
            "budget",
            "bad_rate",
            "bad_stderr",
            "seed",
        ]
        .map(String::from)
        .to_vec();
        let rows = self
            .budgets
            .iter()
            .zip(&self.bad_rates)
            .zip(&self.bad_stderr)
            .map(|((s, r), e)| {
                vec![
                    self.pattern.to_parens(),
                    num(self.lambda),
                    self.trials.to_string(),
                    s.to_string(),
                    num(*r),
                    num(*e),
                    self.seed.0.to_string(),
                ]
            })
            .collect();
        (header, rows)
    }

    fn header_comment(&self) -> Option<String> {
        Some(match self.fitted_log_slope {
            Some(b) => format!("fitted_log_slope = {}", num(b)),
            None => "fitted_log_slope unavailable: fewer than two positive rates".into(),
        })
    }
}

/// JSON writer printing every float with 17 significant digits.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f64) -> std::io::Result<()> {
        write!(w, "{x:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(x))
    }
}

/// Compact JSON with 17 significant digits per float and a trailing
/// newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, HarnessError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigs);
    value
        .serialize(&mut ser)
        .map_err(|e| HarnessError::Emit(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Serializes a report. Field order is fixed by the types; CSV output puts
/// any header comment on `#` lines before the column names.
pub fn report_emit<R: Emit + ?Sized>(
    report: &R,
    format: ReportFormat,
) -> Result<Vec<u8>, HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::Emit(e.to_string());
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => {
            let mut out = Vec::new();
            if let Some(c) = report.header_comment() {
                for line in c.lines() {
                    out.extend_from_slice(format!("# {line}\n").as_bytes());
                }
            }
            let (header, rows) = report.table();
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header).map_err(|e| err(&e))?;
            for row in rows {
                w.write_record(&row).map_err(|e| err(&e))?;
            }
            w.into_inner().map_err(|e| err(&e))
        }
    }
}
