//! Config loading and `--set` override handling on the raw TOML value tree,
//! so overrides compose with validation exactly as if they were edited into
//! the file.

use crate::AppError;
use std::path::Path;

/// Reads and parses a scenario file into a TOML value tree.
pub fn load_value(path: &Path) -> Result<toml::Value, AppError> {
    let text = std::fs::read_to_string(path).map_err(|source| AppError::File {
        context: format!("reading {}", path.display()),
        source,
    })?;
    toml::from_str(&text).map_err(AppError::Parse)
}

/// Applies one `KEY=VALUE` override. The value is parsed as a TOML value
/// (numbers, booleans, arrays, quoted strings) and falls back to a plain
/// string, so `--set gains.kp=20` and `--set scenario.mode=sync` both work.
pub fn apply_set(root: &mut toml::Value, raw: &str) -> Result<(), AppError> {
    let (path, text) = raw
        .split_once('=')
        .ok_or_else(|| AppError::Usage(format!("--set expects KEY=VALUE, got {raw:?}")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(AppError::Usage(format!("--set {raw:?}: empty key")));
    }
    let text = text.trim();
    let value: toml::Value = text
        .parse()
        .unwrap_or_else(|_| toml::Value::String(text.to_string()));
    apply_value(root, path, value)
}

/// Sets `root[path] = value` for a dotted key path, creating intermediate
/// tables as needed. Key lookup is case-insensitive when that resolves to a
/// unique existing key (`gains.Kp` hits `gains.kp`).
pub fn apply_value(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), AppError> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(AppError::Usage(format!(
            "--set key {path:?} has an empty path segment"
        )));
    }
    let mut cursor = root;
    for seg in &segments[..segments.len() - 1] {
        let table = cursor.as_table_mut().ok_or_else(|| {
            AppError::Usage(format!(
                "--set key {path:?}: {seg:?} is not reachable through a non-table value"
            ))
        })?;
        let key = resolve_key(table, seg);
        cursor = table
            .entry(key)
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let last = segments.last().unwrap();
    let table = cursor.as_table_mut().ok_or_else(|| {
        AppError::Usage(format!(
            "--set key {path:?}: {last:?} is not reachable through a non-table value"
        ))
    })?;
    let key = resolve_key(table, last);
    table.insert(key, value);
    Ok(())
}

/// Renders the effective configuration back to TOML text for the report.
pub fn render(value: &toml::Value) -> String {
    toml::to_string_pretty(value).expect("a TOML value tree serializes")
}

fn resolve_key(table: &toml::value::Table, segment: &str) -> String {
    if table.contains_key(segment) {
        return segment.to_string();
    }
    let mut matches = table.keys().filter(|k| k.eq_ignore_ascii_case(segment));
    match (matches.next(), matches.next()) {
        (Some(unique), None) => unique.clone(),
        _ => segment.to_string(),
    }
}
