//! Comparison tables: merge the `table_rows` arrays of reports that share
//! a kind into one CSV/TSV sorted by (case_id, grid_m).

use crate::pipelines::TableRow;
use anyhow::{bail, Context, Result};
use std::io::Write;
use std::path::Path;

pub const HEADER: [&str; 7] = [
    "case_id",
    "grid_m",
    "eps",
    "residual_sup",
    "sup_norm",
    "l2_gap",
    "sup_gap",
];

pub fn write_rows<W: Write>(w: &mut W, rows: &[TableRow], sep: char) -> std::io::Result<()> {
    let header: Vec<&str> = HEADER.to_vec();
    writeln!(w, "{}", header.join(&sep.to_string()))?;
    for r in rows {
        let l2 = r.l2_gap.map(|v| format!("{v:.17e}")).unwrap_or_default();
        let sup = r.sup_gap.map(|v| format!("{v:.17e}")).unwrap_or_default();
        writeln!(
            w,
            "{}{sep}{}{sep}{:.17e}{sep}{:.17e}{sep}{:.17e}{sep}{}{sep}{}",
            r.case_id, r.grid_m, r.eps, r.residual_sup, r.sup_norm, l2, sup
        )?;
    }
    Ok(())
}

/// Load report.json files, demand a common kind, and merge their rows.
pub fn merge(report_paths: &[std::path::PathBuf]) -> Result<(String, Vec<TableRow>)> {
    if report_paths.is_empty() {
        bail!("no reports given");
    }
    let mut kind: Option<String> = None;
    let mut rows: Vec<TableRow> = Vec::new();
    for path in report_paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading report {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing report {}", path.display()))?;
        let this_kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .with_context(|| format!("{}: missing kind", path.display()))?
            .to_string();
        match &kind {
            None => kind = Some(this_kind),
            Some(k) if *k == this_kind => {}
            Some(k) => bail!(
                "mixed kinds: {} carries `{this_kind}`, earlier reports carry `{k}`",
                path.display()
            ),
        }
        let parsed: Vec<TableRow> = serde_json::from_value(
            value
                .get("table_rows")
                .cloned()
                .unwrap_or(serde_json::Value::Array(vec![])),
        )
        .with_context(|| format!("{}: table_rows", path.display()))?;
        rows.extend(parsed);
    }
    rows.sort_by(|a, b| {
        a.case_id
            .cmp(&b.case_id)
            .then(a.grid_m.cmp(&b.grid_m))
            .then(a.eps.partial_cmp(&b.eps).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok((kind.unwrap(), rows))
}

pub fn emit(report_paths: &[std::path::PathBuf], format: &str, out: Option<&Path>) -> Result<()> {
    let sep = match format {
        "csv" => ',',
        "tsv" => '\t',
        other => bail!("unknown table format `{other}` (use csv or tsv)"),
    };
    let (_, rows) = merge(report_paths)?;
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows, sep)?;
    match out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
