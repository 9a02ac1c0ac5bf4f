use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::schema::{FeatureKind, FeatureSchema};
use super::table::{Cell, LabeledTable};

/// Reads a data CSV whose header must list the schema's features and then
/// the label column, in order.
pub fn read_csv(path: impl AsRef<Path>, schema: Arc<FeatureSchema>) -> Result<LabeledTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, schema).map_err(|e| match e {
        Error::IoFailure { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_csv_from<R: std::io::Read>(reader: R, schema: Arc<FeatureSchema>) -> Result<LabeledTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let expected = schema
        .features()
        .iter()
        .map(|f| f.name.as_str())
        .chain(std::iter::once(schema.label_name()));
    for (pos, name) in expected.enumerate() {
        if header.get(pos) != Some(name) {
            return Err(Error::MissingColumn(name.to_string()));
        }
    }
    let width = schema.len();
    if header.len() != width + 1 {
        return Err(Error::InvalidSchema(format!(
            "header has {} columns, schema expects {}",
            header.len(),
            width + 1
        )));
    }

    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i + 1;
        if record.len() != width + 1 {
            return Err(Error::RaggedRow {
                row,
                expected: width + 1,
                found: record.len(),
            });
        }
        for (spec, field) in schema.features().iter().zip(record.iter()) {
            let cell = match spec.kind {
                FeatureKind::Numeric => match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Cell::Num(v),
                    _ => {
                        return Err(Error::NonNumericCell {
                            row,
                            feature: spec.name.clone(),
                            value: field.to_string(),
                        })
                    }
                },
                FeatureKind::Categorical => match spec.category_index(field) {
                    Some(k) => Cell::Cat(k),
                    None => {
                        return Err(Error::UnknownCategory {
                            row,
                            feature: spec.name.clone(),
                            value: field.to_string(),
                        })
                    }
                },
            };
            cells.push(cell);
        }
        let label = match &record[width] {
            "0" => 0,
            "1" => 1,
            _ => return Err(Error::BadLabel { row }),
        };
        labels.push(label);
    }
    LabeledTable::from_flat(schema, cells, labels)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::Parse(format!("malformed csv: {other:?}")),
    }
}

/// Writes the table as CSV. Numbers use the shortest decimal form that
/// parses back to the same bits.
pub fn write_csv(table: &LabeledTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv_to(table, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(table: &LabeledTable, out: &mut W) -> std::io::Result<()> {
    let schema = table.schema();
    for f in schema.features() {
        write!(out, "{},", f.name)?;
    }
    writeln!(out, "{}", schema.label_name())?;
    for (row, label) in table.rows().zip(table.labels()) {
        for (spec, cell) in schema.features().iter().zip(row) {
            match *cell {
                Cell::Num(v) => write!(out, "{v},")?,
                Cell::Cat(k) => write!(out, "{},", spec.categories[k as usize])?,
            }
        }
        writeln!(out, "{label}")?;
    }
    Ok(())
}
