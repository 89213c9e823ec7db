use std::fmt::Write as _;

/// Structured text reports: one `name = value` entry per line.
pub trait Report {
    fn entries(&self) -> Vec<(String, String)>;

    fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub(crate) fn entry(name: impl Into<String>, value: impl ToString) -> (String, String) {
    (name.into(), value.to_string())
}

pub(crate) fn opt_entry<T: ToString>(name: impl Into<String>, value: Option<T>) -> (String, String) {
    (name.into(), value.map_or_else(|| "none".to_string(), |v| v.to_string()))
}
