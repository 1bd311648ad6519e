use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Echo;
use crate::error::{CliError, Result};

/// Fixed-width scientific notation used for every float in data files.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// A CSV table with a `#` comment block echoing the configuration.
pub fn csv_table(echo: &Echo, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in echo {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io {
        path: PathBuf::from("<csv buffer>"),
        source: std::io::Error::other(e),
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: PathBuf::from("<csv buffer>"),
        source: e.into_error(),
    })?;
    out.push_str(&String::from_utf8(bytes).expect("csv of utf-8 fields"));
    Ok(out)
}

/// `{"command": .., "config": {..}, key: value}` as pretty JSON.
pub fn json_document(command: &str, echo: &Echo, key: &str, value: Value) -> String {
    let config: Map<String, Value> = echo.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let mut doc = Map::new();
    doc.insert("command".into(), Value::String(command.into()));
    doc.insert("config".into(), Value::Object(config));
    doc.insert(key.into(), value);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialize");
    s.push('\n');
    s
}

/// Aligned `key  value` lines.
pub fn key_value_text(pairs: &[(String, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

/// Writes `text` to a file, or to stdout for None.
pub fn emit(destination: Option<&Path>, text: &str) -> Result<()> {
    match destination {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                    path: dir.to_path_buf(),
                    source,
                })?;
            }
            std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(fmt_float(1.71e-6), "1.710000000000e-6");
        assert_eq!(fmt_float(0.0), "0.000000000000e0");
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_comment_block_then_header() {
        let echo = vec![("model".to_string(), "none".to_string())];
        let s = csv_table(&echo, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(s, "# model: none\na,b\n1,2\n");
    }

    #[test]
    fn text_is_aligned() {
        let s = key_value_text(&[("a".into(), "1".into()), ("long".into(), "2".into())]);
        assert_eq!(s, "a     1\nlong  2\n");
    }
}
