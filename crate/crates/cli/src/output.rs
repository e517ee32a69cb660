//! Record files. Every NDJSON file starts with a header record carrying the
//! format version and the resolved configuration; CSV mirrors carry the same
//! two facts as leading `#` comment lines.

use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Config;
use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Output directory for one command run.
pub struct OutDir {
    root: PathBuf,
    command: &'static str,
    config: Value,
}

impl OutDir {
    pub fn create(root: &Path, command: &'static str, config: &Config) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), command, config: serde_json::to_value(config)? })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn header(&self) -> Value {
        json!({
            "type": "header",
            "format_version": FORMAT_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
        })
    }

    pub fn ndjson(&self, name: &str) -> Result<Ndjson, CliError> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer(&mut w, &self.header())?;
        w.write_all(b"\n")?;
        Ok(Ndjson { w })
    }

    /// Writes a CSV table with a comment preamble.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut f = BufWriter::new(File::create(self.path(name))?);
        writeln!(f, "# format_version: {FORMAT_VERSION}")?;
        writeln!(f, "# command: {}", self.command)?;
        writeln!(f, "# config: {}", serde_json::to_string(&self.config)?)?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes an SVG document; `svg` must contain the `<!--METADATA-->` slot.
    pub fn svg(&self, name: &str, svg: &str) -> Result<(), CliError> {
        let meta = json!({ "format_version": FORMAT_VERSION, "command": self.command, "config": self.config });
        let body = svg.replace("<!--METADATA-->", &format!("<metadata>{}</metadata>", escape(&meta.to_string())));
        std::fs::write(self.path(name), body)?;
        Ok(())
    }
}

pub struct Ndjson {
    w: BufWriter<File>,
}

impl Ndjson {
    /// Appends `record` with `"type": kind` merged in front.
    pub fn record<T: Serialize>(&mut self, kind: &str, record: &T) -> Result<(), CliError> {
        let mut obj = serde_json::Map::new();
        obj.insert("type".into(), Value::String(kind.into()));
        match serde_json::to_value(record)? {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("value".into(), other);
            }
        }
        serde_json::to_writer(&mut self.w, &Value::Object(obj))?;
        self.w.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush()?;
        Ok(())
    }
}

/// XML text escaping.
pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Shortest round-trip form, scientific outside `[1e-4, 1e6)`.
pub fn num(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e6).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}
