use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{check_schema, parse_date, parse_number, Attribute, AttributeType, Table, TableError, Value};

/// Infers one attribute per header column from raw string cells.
///
/// A column whose non-empty cells all parse as numbers is quantitative; all
/// ISO or US dates, temporal; anything else (including an all-empty column)
/// is nominal. Inference never produces ordinal.
pub fn infer_schema(header: &[String], sample_rows: &[Vec<String>]) -> Result<Vec<Attribute>, TableError> {
    if header.is_empty() {
        return Err(TableError::EmptyHeader);
    }
    let mut seen = HashSet::new();
    for name in header {
        if !seen.insert(name.as_str()) {
            return Err(TableError::DuplicateAttribute(name.clone()));
        }
    }
    Ok(header
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let cells = sample_rows
                .iter()
                .filter_map(|row| row.get(col))
                .map(String::as_str)
                .filter(|s| !s.is_empty());
            Attribute::new(name.clone(), infer_column(cells))
        })
        .collect())
}

fn infer_column<'a>(cells: impl Iterator<Item = &'a str>) -> AttributeType {
    let mut any = false;
    let mut numeric = true;
    let mut temporal = true;
    for cell in cells {
        any = true;
        numeric &= parse_number(cell).is_some();
        temporal &= parse_date(cell).is_some();
        if !numeric && !temporal {
            return AttributeType::Nominal;
        }
    }
    match (any, numeric, temporal) {
        (false, _, _) => AttributeType::Nominal,
        (true, true, _) => AttributeType::Quantitative,
        (true, false, true) => AttributeType::Temporal,
        _ => AttributeType::Nominal,
    }
}

/// Loads a CSV file; the table is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, schema: Option<&[Attribute]>) -> Result<Table, TableError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(name, file, schema)
}

/// Reads RFC-4180 CSV with a header line. Empty cells become null.
pub fn read_csv<R: Read>(
    name: impl Into<String>,
    reader: R,
    schema: Option<&[Attribute]>,
) -> Result<Table, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut raw_rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(TableError::RaggedRow {
                row: i,
                found: record.len(),
                expected: header.len(),
            });
        }
        raw_rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }

    let (schema, columns) = match schema {
        Some(schema) => {
            check_schema(schema)?;
            let header_set: HashSet<&str> = header.iter().map(String::as_str).collect();
            let schema_set: HashSet<&str> = schema.iter().map(|a| a.name.as_str()).collect();
            let mut missing: Vec<String> = schema_set.difference(&header_set).map(|s| s.to_string()).collect();
            let mut unexpected: Vec<String> = header_set.difference(&schema_set).map(|s| s.to_string()).collect();
            if !missing.is_empty() || !unexpected.is_empty() || header.len() != schema.len() {
                missing.sort();
                unexpected.sort();
                if missing.is_empty() && unexpected.is_empty() {
                    // same names, but the header repeats one
                    let mut seen = HashSet::new();
                    let dup = header
                        .iter()
                        .find(|h| !seen.insert(h.as_str()))
                        .cloned()
                        .unwrap_or_default();
                    return Err(TableError::DuplicateAttribute(dup));
                }
                return Err(TableError::SchemaMismatch { missing, unexpected });
            }
            let columns = schema
                .iter()
                .map(|a| header.iter().position(|h| *h == a.name).expect("checked above"))
                .collect::<Vec<_>>();
            (schema.to_vec(), columns)
        }
        None => {
            let schema = infer_schema(&header, &raw_rows)?;
            let columns = (0..header.len()).collect();
            (schema, columns)
        }
    };

    let rows = raw_rows
        .iter()
        .map(|raw| {
            schema
                .iter()
                .zip(&columns)
                .map(|(attr, &col)| Value::parse_cell(&raw[col], attr.attribute_type))
                .collect()
        })
        .collect();
    Table::new(name, schema, rows)
}

/// Writes the table as CSV in schema order. Nulls are written as empty cells.
pub fn write_csv<W: Write>(table: &Table, writer: W) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(table.schema().iter().map(|a| a.name.as_str()))?;
    for row in table.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush().map_err(|source| TableError::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_csv_string(table: &Table) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
