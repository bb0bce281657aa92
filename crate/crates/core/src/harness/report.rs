//! Report emission.

use std::path::Path;

use super::config::ReportFormat;
use super::stats::ReportBundle;
use super::HarnessError;

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 10] = [
    "pair_index",
    "a_deg",
    "b_deg",
    "n",
    "f_VV",
    "f_VH",
    "f_HV",
    "f_HH",
    "E",
    "E_stderr",
];

/// One row per pair, then a `CHSH` row carrying the total trial count, the
/// CHSH estimate in the `E` column and its standard error. The summary row is
/// omitted for schedules that are not a CHSH quadruple.
pub fn render_csv(bundle: &ReportBundle) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(HarnessError::Csv)?;
    for p in &bundle.pairs {
        let mut row = vec![
            p.pair_index.to_string(),
            p.a.degrees().to_string(),
            p.b.degrees().to_string(),
            p.n.to_string(),
        ];
        row.extend(p.frequencies.iter().map(f64::to_string));
        row.push(p.e.to_string());
        row.push(p.e_stderr.to_string());
        w.write_record(&row).map_err(HarnessError::Csv)?;
    }
    if let Some(c) = &bundle.chsh {
        let n: u64 = bundle.pairs.iter().map(|p| p.n).sum();
        let (value, stderr) = (c.value.to_string(), c.stderr.to_string());
        let n = n.to_string();
        w.write_record(["CHSH", "", "", &n, "", "", "", "", &value, &stderr])
            .map_err(HarnessError::Csv)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn render_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("report bundles serialize");
    s.push('\n');
    s
}

pub fn emit_report(
    bundle: &ReportBundle,
    format: ReportFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let text = match format {
        ReportFormat::Csv => render_csv(bundle)?,
        ReportFormat::Json => render_json(bundle),
    };
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
