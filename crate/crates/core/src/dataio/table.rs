use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Class column selector: a header name or a zero-based column index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassColumn {
    Name(String),
    Index(usize),
}

impl ClassColumn {
    fn resolve(&self, header: &[String]) -> Result<usize> {
        match self {
            ClassColumn::Name(name) => header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::ClassColumnAbsent(name.clone())),
            ClassColumn::Index(i) if *i < header.len() => Ok(*i),
            ClassColumn::Index(i) => Err(Error::ClassColumnAbsent(i.to_string())),
        }
    }
}

impl FromStr for ClassColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ClassColumn::Index(i),
            Err(_) => ClassColumn::Name(s.to_owned()),
        })
    }
}

impl fmt::Display for ClassColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassColumn::Name(n) => f.write_str(n),
            ClassColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Parsed CSV: `d` numeric attributes (cells possibly missing) plus one class label per row.
///
/// The original header and cell text are kept so a table can be written back verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub attribute_names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub class_labels: Vec<String>,
    pub source_id: String,
    /// Full header including the class column.
    pub header: Vec<String>,
    /// Position of the class column within `header`.
    pub class_position: usize,
    /// Attribute cell text as read, aligned with `rows`.
    pub cell_text: Vec<Vec<String>>,
}

impl RawTable {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Option::is_none)
    }

    pub fn missing_row_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.iter().any(Option::is_none))
            .count()
    }

    /// Header row in original column order, suitable for re-emitting the table.
    pub fn header_record(&self) -> Vec<String> {
        self.header.clone()
    }

    /// Row `i` in original column order with the attribute cells replaced by `cells`.
    pub fn record_with(&self, i: usize, cells: &[String]) -> Vec<String> {
        let mut rec = Vec::with_capacity(cells.len() + 1);
        rec.extend_from_slice(&cells[..self.class_position]);
        rec.push(self.class_labels[i].clone());
        rec.extend_from_slice(&cells[self.class_position..]);
        rec
    }
}

/// Reads a comma-separated file with a header row.
///
/// Cells equal to `missing_marker` (after trimming) become missing; every other attribute cell
/// must parse as a number. Class labels are kept verbatim and may not be missing.
pub fn load_csv(
    path: impl AsRef<Path>,
    class_column: &ClassColumn,
    missing_marker: &str,
) -> Result<RawTable> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(text.as_bytes(), class_column, missing_marker, source_id)
}

pub fn parse_csv(
    input: impl Read,
    class_column: &ClassColumn,
    missing_marker: &str,
    source_id: String,
) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::NoDataRows);
    }
    let class_position = class_column.resolve(&header)?;
    let attribute_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != class_position)
        .map(|(_, h)| h.clone())
        .collect();
    let mut seen = HashSet::new();
    for name in &attribute_names {
        if !seen.insert(name.as_str()) {
            return Err(Error::invalid(format!("duplicate attribute name {name:?}")));
        }
    }

    let mut rows = Vec::new();
    let mut class_labels = Vec::new();
    let mut cell_text = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(attribute_names.len());
        let mut texts = Vec::with_capacity(attribute_names.len());
        for (j, cell) in record.iter().enumerate() {
            if j == class_position {
                if cell.is_empty() || cell == missing_marker {
                    return Err(Error::MissingLabel(line));
                }
                class_labels.push(cell.to_owned());
                continue;
            }
            let value = if cell == missing_marker {
                None
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        return Err(Error::NonNumeric {
                            line,
                            column: header[j].clone(),
                            value: cell.to_owned(),
                        })
                    }
                }
            };
            row.push(value);
            texts.push(cell.to_owned());
        }
        rows.push(row);
        cell_text.push(texts);
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows);
    }
    Ok(RawTable {
        attribute_names,
        rows,
        class_labels,
        source_id,
        header,
        class_position,
        cell_text,
    })
}

/// Rows with no missing cell, in original order.
pub fn complete_cases(raw: &RawTable) -> Result<RawTable> {
    let keep: Vec<usize> = (0..raw.n())
        .filter(|&i| raw.rows[i].iter().all(Option::is_some))
        .collect();
    if keep.is_empty() {
        return Err(Error::NoCompleteCases);
    }
    Ok(RawTable {
        rows: keep.iter().map(|&i| raw.rows[i].clone()).collect(),
        class_labels: keep.iter().map(|&i| raw.class_labels[i].clone()).collect(),
        cell_text: keep.iter().map(|&i| raw.cell_text[i].clone()).collect(),
        ..raw.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawTable> {
        parse_csv(
            text.as_bytes(),
            &ClassColumn::Name("class".into()),
            "?",
            "t".into(),
        )
    }

    #[test]
    fn parses_missing_and_labels() {
        let t = parse("a,b,class\n1,2,x\n?,4.5,y\n").unwrap();
        assert_eq!(t.attribute_names, ["a", "b"]);
        assert_eq!(
            t.rows,
            vec![vec![Some(1.0), Some(2.0)], vec![None, Some(4.5)]]
        );
        assert_eq!(t.class_labels, ["x", "y"]);
        assert_eq!(t.missing_row_count(), 1);
    }

    #[test]
    fn class_column_by_index_in_middle() {
        let t = parse_csv(
            "a,c,b\n1,k,2\n".as_bytes(),
            &ClassColumn::Index(1),
            "?",
            "t".into(),
        )
        .unwrap();
        assert_eq!(t.attribute_names, ["a", "b"]);
        assert_eq!(t.class_labels, ["k"]);
        assert_eq!(t.record_with(0, &t.cell_text[0]), ["1", "k", "2"]);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(parse(""), Err(Error::NoDataRows)));
        assert!(matches!(parse("a,class\n"), Err(Error::NoDataRows)));
        assert!(matches!(
            parse("a,b\n1,2\n"),
            Err(Error::ClassColumnAbsent(_))
        ));
        assert!(matches!(
            parse("a,class\n1,x\n1,2,3\n"),
            Err(Error::RaggedRow { .. })
        ));
        assert!(matches!(
            parse("a,class\nNA,x\n"),
            Err(Error::NonNumeric { .. })
        ));
        assert!(matches!(
            parse("a,class\n1,?\n"),
            Err(Error::MissingLabel(_))
        ));
        assert!(parse("a,a,class\n1,2,x\n").is_err());
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &ClassColumn::Index(0), "?"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn complete_cases_filters_in_order() {
        let t = parse("a,b,class\n1,2,x\n3,?,y\n5,6,z\n").unwrap();
        let c = complete_cases(&t).unwrap();
        assert_eq!(
            c.rows,
            vec![vec![Some(1.0), Some(2.0)], vec![Some(5.0), Some(6.0)]]
        );
        assert_eq!(c.class_labels, ["x", "z"]);

        let full = parse("a,class\n1,x\n2,y\n").unwrap();
        assert_eq!(complete_cases(&full).unwrap(), full);

        let none = parse("a,class\n?,x\n").unwrap();
        assert!(matches!(complete_cases(&none), Err(Error::NoCompleteCases)));
    }
}
