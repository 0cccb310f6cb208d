//! CSV input and output. Reals are written with 17 significant digits so
//! every value survives a parse/format round trip unchanged.

use std::path::Path;

use efmrf_core::DataMatrix;

use crate::error::CliError;

/// A data matrix with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub data: DataMatrix,
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a header row of variable names followed by numeric rows. Errors
/// name the offending line and column.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_table(file, &path.display().to_string())
}

pub fn parse_table(reader: impl std::io::Read, source: &str) -> Result<Table, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{source}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.len() < 2 {
        return Err(CliError::Input(format!("{source}: need at least 2 columns, found {}", names.len())));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => CliError::Input(format!("{source}: line {}: {e}", p.line())),
            None => CliError::Input(format!("{source}: {e}")),
        })?;
        let line = record.position().map_or(rows + 2, |p| p.line() as usize);
        for (field, name) in record.iter().zip(&names) {
            let x: f64 = field.parse().map_err(|_| {
                CliError::Input(format!("{source}: line {line}, column '{name}': '{field}' is not a number"))
            })?;
            if !x.is_finite() {
                return Err(CliError::Input(format!("{source}: line {line}, column '{name}': value is not finite")));
            }
            values.push(x);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(CliError::Input(format!("{source}: need at least 2 data rows, found {rows}")));
    }
    let data = DataMatrix::new(rows, names.len(), values).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    for (c, name) in names.iter().enumerate() {
        let col = data.column(c);
        if col.iter().all(|&x| x == col[0]) {
            return Err(CliError::Input(format!("{source}: column '{name}' is constant")));
        }
    }
    Ok(Table { names, data })
}

/// Writes a header row and rows of preformatted cells.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let d = &table.data;
    write_csv(path, &table.names, (0..d.rows()).map(|r| d.row(r).iter().map(|&x| format_real(x)).collect()))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Default variable names `X1..Xd`.
pub fn default_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("X{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456789.12345679, f64::MIN_POSITIVE, 0.0] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(format_real(s.parse().unwrap()), s);
        }
    }

    #[test]
    fn malformed_cell_names_line_and_column() {
        let e = parse_table("a,b\n1,2\n3,x\n".as_bytes(), "in.csv").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("'b'"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn constant_column_is_named() {
        let e = parse_table("a,b\n1,2\n3,2\n4,2\n".as_bytes(), "in.csv").unwrap_err();
        assert!(e.to_string().contains("'b' is constant"));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let e = parse_table("a,b\n1,2\n3\n".as_bytes(), "in.csv").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn single_column_is_rejected() {
        assert!(parse_table("a\n1\n2\n".as_bytes(), "in.csv").is_err());
    }
}
