use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Resolved run configuration, echoed into every output file.
pub fn config_value<T: Serialize>(command: &T) -> Value {
    let mut map = Map::new();
    map.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    if let Value::Object(fields) = serde_json::to_value(command).expect("config serializes") {
        map.extend(fields);
    }
    Value::Object(map)
}

/// Adds a resolved value (parameter vector, output format, ...) to the echoed
/// configuration.
pub fn resolved(config: &Value, key: &str, value: impl Serialize) -> Value {
    let mut config = config.clone();
    if let Value::Object(map) = &mut config {
        map.insert(key.into(), serde_json::to_value(value).expect("resolved value serializes"));
    }
    config
}

/// `{"config": ..., <key>: <body>}`, pretty-printed with a trailing newline.
pub fn json_document<T: Serialize>(config: &Value, key: &str, body: &T) -> Result<Vec<u8>> {
    let mut doc = Map::new();
    doc.insert("config".into(), config.clone());
    doc.insert(key.into(), serde_json::to_value(body)?);
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with a leading `# config: {...}` comment line.
pub fn csv_document(config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}

/// Shortest round-trip representation (exponent form for very small or
/// large magnitudes); empty for non-finite values.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        String::new()
    }
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = parent_dir(path);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

pub fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
