//! Report rendering: byte-stable pretty JSON, or aligned two-column tables
//! with rationals annotated by their decimal value.

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        Format::Table => render_table(report),
    }
}

fn render_table(report: &Value) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    let mut sub_tables: Vec<(String, &Vec<Value>)> = Vec::new();
    match report {
        Value::Object(map) => {
            for (key, value) in map {
                match value {
                    Value::Array(items)
                        if !items.is_empty() && items.iter().all(Value::is_object) =>
                    {
                        sub_tables.push((key.clone(), items));
                    }
                    Value::Object(_) => flatten(key, value, &mut rows),
                    _ => rows.push((key.clone(), scalar_text(value))),
                }
            }
        }
        other => rows.push(("value".into(), scalar_text(other))),
    }

    let mut out = String::new();
    if !rows.is_empty() {
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (key, value) in &rows {
            out.push_str(&format!("{key:<width$}  {value}\n"));
        }
    }
    for (name, items) in sub_tables {
        out.push_str(&render_row_table(&name, items));
    }
    out
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, inner) in map {
                flatten(&format!("{prefix}.{key}"), inner, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar_text(value))),
    }
}

fn render_row_table(name: &str, items: &[Value]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for item in items {
        if let Value::Object(map) = item {
            for key in map.keys() {
                if !columns.iter().any(|c| c == key) {
                    columns.push(key.clone());
                }
            }
        }
    }
    let mut grid: Vec<Vec<String>> = vec![columns.clone()];
    for item in items {
        let row = columns
            .iter()
            .map(|c| scalar_text(item.get(c).unwrap_or(&Value::Null)))
            .collect();
        grid.push(row);
    }
    let widths: Vec<usize> = (0..columns.len())
        .map(|c| grid.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("{name}:\n");
    for row in &grid {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(&format!("  {}\n", line.join("  ").trim_end()));
    }
    out
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::Null => "n/a".into(),
        Value::String(s) => match parse_fraction(s) {
            Some(approx) => format!("{s} (\u{2248}{approx:.3})"),
            None => s.clone(),
        },
        Value::Array(items) if items.is_empty() => "n/a".into(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn parse_fraction(s: &str) -> Option<f64> {
    let (numer, denom) = s.split_once('/')?;
    let n: f64 = numer.parse().ok()?;
    let d: f64 = denom.parse().ok()?;
    if !numer.chars().all(|c| c.is_ascii_digit() || c == '-')
        || !denom.chars().all(|c| c.is_ascii_digit())
        || d == 0.0
    {
        return None;
    }
    Some(n / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rationals_get_decimal_annotations() {
        let report = json!({"overhead": "3/2", "eta": "2/3"});
        let table = render(&report, Format::Table);
        assert!(table.contains("3/2 (\u{2248}1.500)"), "{table}");
        assert!(table.contains("2/3 (\u{2248}0.667)"), "{table}");
    }

    #[test]
    fn nulls_and_empty_lists_render_as_na() {
        let report = json!({"overhead": null, "eaves_ranks": []});
        let table = render(&report, Format::Table);
        assert!(table.contains("overhead     n/a"), "{table}");
        assert!(table.contains("eaves_ranks  n/a"), "{table}");
    }

    #[test]
    fn plain_strings_stay_untouched() {
        let report = json!({"direction": "code-to-channel", "path": "a/b.json"});
        let table = render(&report, Format::Table);
        assert!(table.contains("code-to-channel\n"), "{table}");
        // path segments are not digit fractions, no annotation
        assert!(table.contains("a/b.json\n"), "{table}");
    }

    #[test]
    fn json_output_is_stable_and_newline_terminated() {
        let report = json!({"b": 1, "a": 2});
        let one = render(&report, Format::Json);
        let two = render(&report, Format::Json);
        assert_eq!(one, two);
        assert!(one.ends_with('\n'));
    }

    #[test]
    fn arrays_of_objects_render_as_row_tables() {
        let report = json!({
            "noise": 1.0,
            "rows": [
                {"power": 1e6, "rate": 10.0},
                {"power": 1e9, "rate": 20.0}
            ]
        });
        let table = render(&report, Format::Table);
        assert!(table.contains("rows:"), "{table}");
        assert!(table.contains("power"), "{table}");
    }
}
