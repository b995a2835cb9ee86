//! File emission: atomic writes, RFC-4180-style CSV with a stable column
//! set, and the JSON summary object.

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

/// Write-temp-then-rename so interrupted runs never leave truncated files.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating output dir {}", parent.display()))?;
    }
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} -> {}", tmp.display(), path.display()))?;
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn cell_to_string(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => csv_escape(s),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => csv_escape(&other.to_string()),
    }
}

// Leading columns in their documented order; everything else follows
// alphabetically.
const LEADING: [&str; 16] = [
    "experiment", "scan", "model", "axis", "beta", "h", "n", "alpha", "nu_mode", "nu_loglik",
    "p_waic", "gibbs_train_loss", "gibbs_gen_loss", "eos_gap", "eos_ratio", "replicate",
];

/// Column order for a set of row objects: documented leading columns first,
/// then the remaining keys sorted.
pub fn column_order(rows: &[Map<String, Value>]) -> Vec<String> {
    let mut keys: BTreeSet<String> = BTreeSet::new();
    for row in rows {
        for k in row.keys() {
            keys.insert(k.clone());
        }
    }
    let mut order = Vec::with_capacity(keys.len());
    for lead in LEADING {
        if keys.remove(lead) {
            order.push(lead.to_string());
        }
    }
    order.extend(keys);
    order
}

/// Render rows as CSV: header row, `.` decimal separator, LF endings, UTF-8.
pub fn rows_to_csv(rows: &[Map<String, Value>]) -> String {
    let order = column_order(rows);
    let mut out = String::new();
    out.push_str(&order.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = order
            .iter()
            .map(|c| row.get(c).map(cell_to_string).unwrap_or_default())
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    OkWithFlags,
    Failed,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::OkWithFlags => 2,
            ExitStatus::Failed => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExitStatus::Ok => "ok",
            ExitStatus::OkWithFlags => "ok_with_flags",
            ExitStatus::Failed => "failed",
        }
    }
}

#[derive(Debug)]
pub struct OutputBundle {
    pub csv_paths: Vec<PathBuf>,
    pub json_summary_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
    pub exit_status: ExitStatus,
}

/// The JSON summary has the stable key set {config_digest, experiment, rows,
/// flags, timings, versions}; it is written even on failure, with the error
/// recorded in `flags`.
pub fn summary_json(
    config_digest: &str,
    experiment: &str,
    rows: &[Map<String, Value>],
    flags: &[String],
    timings: &Map<String, Value>,
) -> String {
    let value = json!({
        "config_digest": config_digest,
        "experiment": experiment,
        "rows": rows,
        "flags": flags,
        "timings": timings,
        "versions": {
            "slt-thermo": env!("CARGO_PKG_VERSION"),
            "slt-thermo-cli": env!("CARGO_PKG_VERSION"),
        },
    });
    let mut s = serde_json::to_string_pretty(&value).expect("summary serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_special_fields() {
        let mut row = Map::new();
        row.insert("model".to_string(), Value::String("a,b".to_string()));
        row.insert("nu_loglik".to_string(), json!(0.5));
        let csv = rows_to_csv(&[row]);
        assert_eq!(csv, "model,nu_loglik\n\"a,b\",0.5\n");
    }

    #[test]
    fn column_order_puts_leading_first() {
        let mut row = Map::new();
        row.insert("zzz".to_string(), json!(1));
        row.insert("beta".to_string(), json!(1.0));
        row.insert("model".to_string(), json!("m"));
        let order = column_order(&[row]);
        assert_eq!(order, vec!["model", "beta", "zzz"]);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join("slt_thermo_output_test");
        let path = dir.join("x.csv");
        atomic_write(&path, b"one\n").unwrap();
        atomic_write(&path, b"two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two\n");
        assert!(!path.with_extension("csv.tmp").exists());
        let _ = std::fs::remove_dir_all(dir);
    }
}
