use std::path::Path;

use super::{DataError, Result, Series};

/// Column selector by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    /// All-digit strings are indices, anything else a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Name(n) => write!(f, "{n:?}"),
            ColumnRef::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    /// Drop unparseable rows instead of failing.
    pub skip_invalid: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
            skip_invalid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvColumn {
    pub series: Series,
    /// 1-based line numbers of rows dropped under `skip_invalid`.
    pub skipped_lines: Vec<u64>,
}

/// Reads one numeric column. Lines starting with `#` are comments.
pub fn read_csv_column(path: &Path, column: &ColumnRef, opts: &CsvOptions) -> Result<CsvColumn> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(file);

    let (index, label) = match column {
        ColumnRef::Index(i) => (*i, format!("column{i}")),
        ColumnRef::Name(name) => {
            if !opts.has_header {
                return Err(DataError::MissingColumn(format!("{name:?} (file read without a header)")));
            }
            let headers = reader.headers().map_err(|e| DataError::Csv(e.to_string()))?;
            let i = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| DataError::MissingColumn(format!("{name:?}")))?;
            (i, name.clone())
        }
    };

    let mut values = Vec::new();
    let mut skipped_lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let Some(cell) = record.get(index) else {
            if opts.skip_invalid {
                skipped_lines.push(line);
                continue;
            }
            return Err(DataError::MissingColumn(format!("{column} on line {line}")));
        };
        match cell.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if opts.skip_invalid => skipped_lines.push(line),
            _ => {
                return Err(DataError::Parse {
                    line,
                    value: cell.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(DataError::Empty(path.display().to_string()));
    }
    Ok(CsvColumn {
        series: Series::new(label, values)?,
        skipped_lines,
    })
}
