use std::fmt;
use std::path::Path;

use fzip_core::field::{Field, FqElem};
use fzip_core::matrix::Mat;
use serde_json::Value;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Parse { path: String, offset: usize, message: String },
    Core(fzip_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Parse { path, offset, message } => write!(f, "{path}: parse error at byte offset {offset}: {message}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<fzip_core::Error> for CliError {
    fn from(e: fzip_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Byte offset of a 1-based `(line, column)` position.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn parse_json(text: &str, path: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

/// Prime-field elements as integers, others as polynomials in `t`.
pub fn fmt_elem(field: &Field, a: FqElem) -> String {
    let c = field.coeffs(a);
    if field.k() == 1 {
        return c[0].to_string();
    }
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| {
            let mono = match i {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{i}"),
            };
            match (v, i) {
                (_, 0) => v.to_string(),
                (1, _) => mono,
                _ => format!("{v}{mono}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

pub fn fmt_mat(field: &Field, m: &Mat) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|a| (0..m.dim()).map(|b| fmt_elem(field, m.get(a, b))).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", rows.join("; "))
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_count_bytes() {
        let text = "{\n  \"a\": 1,\n  x\n}";
        let err = parse_json(text, "f").unwrap_err();
        match err {
            CliError::Parse { offset, .. } => assert_eq!(&text[offset..offset + 1], "x"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn element_rendering() {
        let f4 = Field::new(2, 2).unwrap();
        let rendered: Vec<String> = f4.elements().map(|a| fmt_elem(&f4, a)).collect();
        assert_eq!(rendered, ["0", "1", "t", "t+1"]);
        let f3 = Field::prime(3).unwrap();
        assert_eq!(fmt_elem(&f3, f3.from_int(-1)), "2");
    }
}
