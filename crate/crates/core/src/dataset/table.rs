use std::sync::Arc;

use crate::error::{Error, Result};

use super::schema::{FeatureKind, FeatureSchema};

/// One raw cell: a numeric value or the index of a declared category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(u32),
}

/// Row-major raw records with binary labels (1 = fraud/overdue).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTable {
    schema: Arc<FeatureSchema>,
    cells: Vec<Cell>,
    labels: Vec<u8>,
}

/// Class counts of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassBalance {
    pub n_pos: usize,
    pub n_neg: usize,
    pub rate: f64,
}

impl LabeledTable {
    /// Builds a table from row records, validating every cell.
    pub fn new(schema: Arc<FeatureSchema>, rows: Vec<Vec<Cell>>, labels: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = schema.len();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: width,
                    found: row.len(),
                });
            }
            cells.extend(row);
        }
        Self::from_flat(schema, cells, labels)
    }

    /// Builds a table from row-major cells.
    pub fn from_flat(schema: Arc<FeatureSchema>, cells: Vec<Cell>, labels: Vec<u8>) -> Result<Self> {
        let width = schema.len();
        if cells.len() != labels.len() * width {
            return Err(Error::LengthMismatch(format!(
                "{} cells for {} rows of width {width}",
                cells.len(),
                labels.len()
            )));
        }
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(Error::BadLabel { row: i + 1 });
            }
        }
        if width > 0 {
            for (i, row) in cells.chunks(width).enumerate() {
                for (spec, cell) in schema.features().iter().zip(row) {
                    match (spec.kind, *cell) {
                        (FeatureKind::Numeric, Cell::Num(v)) if v.is_finite() => {}
                        (FeatureKind::Numeric, c) => {
                            return Err(Error::NonNumericCell {
                                row: i + 1,
                                feature: spec.name.clone(),
                                value: format!("{c:?}"),
                            })
                        }
                        (FeatureKind::Categorical, Cell::Cat(k))
                            if (k as usize) < spec.categories.len() => {}
                        (FeatureKind::Categorical, c) => {
                            return Err(Error::UnknownCategory {
                                row: i + 1,
                                feature: spec.name.clone(),
                                value: format!("{c:?}"),
                            })
                        }
                    }
                }
            }
        }
        Ok(LabeledTable {
            schema,
            cells,
            labels,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Cell] {
        let w = self.schema.len();
        &self.cells[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Copies the given rows, in the given order, into a new table.
    pub fn select(&self, indices: &[usize]) -> LabeledTable {
        let w = self.schema.len();
        let mut cells = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            cells.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        LabeledTable {
            schema: Arc::clone(&self.schema),
            cells,
            labels,
        }
    }

    pub fn class_balance(&self) -> ClassBalance {
        class_balance(&self.labels)
    }
}

pub fn class_balance(labels: &[u8]) -> ClassBalance {
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    let rate = if labels.is_empty() {
        0.0
    } else {
        n_pos as f64 / labels.len() as f64
    };
    ClassBalance { n_pos, n_neg, rate }
}
