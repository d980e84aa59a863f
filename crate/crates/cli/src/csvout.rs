//! CSV emission with a `#`-prefixed metadata block: build version, master
//! seed and a hash of the canonical config, so outputs are attributable
//! and byte-reproducible.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub metadata: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> CsvTable {
        CsvTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# vsamem v{}\n", env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &std::path::Path) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.render().as_bytes())
    }
}

/// Stable hash of the canonical config JSON (stable within one build).
pub fn config_hash(canonical_json: &str) -> String {
    let mut h = DefaultHasher::new();
    canonical_json.hash(&mut h);
    format!("{:016x}", h.finish())
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_rows_in_order() {
        let mut t = CsvTable::new(&["k", "value"]);
        t.meta("seed", 42);
        t.row(vec!["1".into(), "0.5".into()]);
        t.row(vec!["2".into(), "0.25".into()]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# vsamem v"));
        assert_eq!(lines[1], "# seed=42");
        assert_eq!(lines[2], "k,value");
        assert_eq!(lines[3], "1,0.5");
    }

    #[test]
    fn hash_is_deterministic() {
        assert_eq!(config_hash("abc"), config_hash("abc"));
        assert_ne!(config_hash("abc"), config_hash("abd"));
    }
}
