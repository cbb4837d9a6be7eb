//! Output conventions: RFC-4180 CSV sweep data and JSON reports, each
//! stamped with the tool version. Data files never contain timestamps, so
//! reruns with the same config and seed are byte-identical.

use std::path::Path;

use serde::Serialize;

use crate::config::ConfigError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Write `rows` (already including a trailing `version` column) as CSV.
pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| ConfigError(format!("csv encode failed: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ConfigError(format!("csv flush failed: {e}")))?;
    std::fs::write(path, bytes)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Wrap a report in a `{tool_version, report}` envelope and pretty-print it.
pub fn write_json_report<S: Serialize>(path: &Path, report: &S) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        tool_version: &'static str,
        report: &'a T,
    }
    let envelope = Envelope {
        tool_version: TOOL_VERSION,
        report,
    };
    let text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| ConfigError(format!("json encode failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
