//! Reading observations from CSV and resolving group specifications.

use std::io::Read;
use std::path::Path;

use groupfx_core::linmod::Dataset;

use crate::error::{CliError, CliResult};

/// A predictor named by 1-based position (response excluded) or by header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Position(usize),
    Name(String),
}

/// Parses `"3,4,5"` or `"x3,x4,x5"`. An empty string is an empty group.
pub fn parse_group(spec: &str) -> Vec<ColumnRef> {
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(k) => ColumnRef::Position(k),
            Err(_) => ColumnRef::Name(t.to_string()),
        })
        .collect()
}

/// Zero-based predictor index for a reference.
pub fn resolve_column(data: &Dataset, col: &ColumnRef) -> CliResult<usize> {
    let names = data.names();
    match col {
        ColumnRef::Position(k) if (1..=names.len()).contains(k) => Ok(k - 1),
        ColumnRef::Position(k) => Err(CliError::data(format!(
            "predictor position {k} is outside 1..={}",
            names.len()
        ))),
        ColumnRef::Name(n) => names
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| CliError::data(format!("no predictor column named {n:?}"))),
    }
}

pub fn resolve_group(data: &Dataset, spec: &[ColumnRef]) -> CliResult<Vec<usize>> {
    let group = spec
        .iter()
        .map(|c| resolve_column(data, c))
        .collect::<CliResult<Vec<_>>>()?;
    for (i, g) in group.iter().enumerate() {
        if group[..i].contains(g) {
            return Err(CliError::data(format!(
                "predictor {} appears twice in a group",
                data.names()[*g]
            )));
        }
    }
    Ok(group)
}

/// Reads a headed CSV. The response column is `response`; every other
/// column is a predictor. Empty, `NA` or non-numeric cells are rejected.
pub fn read_dataset<R: Read>(reader: R, response: &str, has_intercept: bool) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::data(format!("cannot read CSV header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    let ycol = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::data(format!("response column {response:?} not found in header")))?;
    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len() - 1];
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CliError::data(format!("line {line}: {e}")))?;
        for (j, field) in record.iter().enumerate() {
            let value = parse_cell(field).ok_or_else(|| {
                CliError::data(format!(
                    "line {line}, column {:?}: {} value {field:?}",
                    headers[j],
                    if is_missing(field) { "missing" } else { "non-numeric" }
                ))
            })?;
            match j.cmp(&ycol) {
                std::cmp::Ordering::Equal => y.push(value),
                std::cmp::Ordering::Less => cols[j].push(value),
                std::cmp::Ordering::Greater => cols[j - 1].push(value),
            }
        }
    }
    if y.is_empty() {
        return Err(CliError::data("CSV has no data rows"));
    }
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != ycol)
        .map(|(_, h)| h.clone())
        .collect();
    Dataset::new(y, cols, names.clone(), has_intercept).map_err(|e| match e {
        groupfx_core::Error::ZeroVariance { column } => {
            CliError::data(format!("predictor {:?} is constant", names[column]))
        }
        e => e.into(),
    })
}

pub fn load_dataset(path: &Path, response: &str) -> CliResult<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file, response, true)
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "NaN" | "nan" | "null")
}

fn parse_cell(field: &str) -> Option<f64> {
    if is_missing(field) {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "x1,y,x2\n1,2,0.5\n2,3.5,-1\n3,1,2\n4,0,7\n";

    #[test]
    fn response_is_removed_from_predictors() {
        let d = read_dataset(SAMPLE.as_bytes(), "y", true).unwrap();
        assert_eq!(d.names(), &["x1".to_string(), "x2".to_string()]);
        assert_eq!(d.y(), &[2.0, 3.5, 1.0, 0.0]);
        assert_eq!(d.column(1), &[0.5, -1.0, 2.0, 7.0]);
    }

    #[test]
    fn missing_values_are_rejected() {
        let err = read_dataset("y,x\n1,2\n2,NA\n3,1\n".as_bytes(), "y", true).unwrap_err();
        assert!(err.message.contains("line 3") && err.message.contains("missing"), "{}", err.message);
        let err = read_dataset("y,x\n1,\n2,1\n".as_bytes(), "y", true).unwrap_err();
        assert!(err.message.contains("missing"));
        let err = read_dataset("y,x\n1,abc\n2,1\n".as_bytes(), "y", true).unwrap_err();
        assert!(err.message.contains("non-numeric"));
    }

    #[test]
    fn unknown_response() {
        assert!(read_dataset(SAMPLE.as_bytes(), "z", true).is_err());
    }

    #[test]
    fn ragged_rows() {
        assert!(read_dataset("y,x\n1,2\n3\n".as_bytes(), "y", true).is_err());
    }

    #[test]
    fn groups_by_position_and_name() {
        let d = read_dataset(SAMPLE.as_bytes(), "y", true).unwrap();
        assert_eq!(resolve_group(&d, &parse_group("2, 1")).unwrap(), vec![1, 0]);
        assert_eq!(resolve_group(&d, &parse_group("x2")).unwrap(), vec![1]);
        assert!(resolve_group(&d, &parse_group("3")).is_err());
        assert!(resolve_group(&d, &parse_group("0")).is_err());
        assert!(resolve_group(&d, &parse_group("1,x1")).is_err());
        assert!(parse_group("").is_empty());
    }

    #[test]
    fn constant_column_named() {
        let err = read_dataset("y,c,x\n1,5,1\n2,5,3\n4,5,2\n".as_bytes(), "y", true).unwrap_err();
        assert!(err.message.contains("\"c\""));
    }
}
