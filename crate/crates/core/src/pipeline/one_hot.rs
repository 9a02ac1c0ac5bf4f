use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, FeatureKind, FeatureSchema, LabeledTable};
use crate::error::{Error, Result};

use super::matrix::Matrix;

/// Column layout of one raw feature in the encoded matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedFeature {
    pub name: String,
    pub offset: usize,
    /// Declared categories in column order; empty for numeric features.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl EncodedFeature {
    pub fn is_numeric(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn width(&self) -> usize {
        self.categories.len().max(1)
    }
}

/// Maps raw features onto contiguous encoded column ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotMap {
    features: Vec<EncodedFeature>,
    width: usize,
}

impl OneHotMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn features(&self) -> &[EncodedFeature] {
        &self.features
    }

    /// `true` for columns that carry a numeric feature rather than a
    /// one-hot indicator.
    pub fn numeric_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.width];
        for f in self.features.iter().filter(|f| f.is_numeric()) {
            mask[f.offset] = true;
        }
        mask
    }

    /// Column index of `category` within feature `name`.
    pub fn column_of(&self, name: &str, category: &str) -> Option<usize> {
        let f = self.features.iter().find(|f| f.name == name)?;
        f.categories
            .iter()
            .position(|c| c == category)
            .map(|k| f.offset + k)
    }
}

/// Builds the column layout from the schema's declared category universe.
pub fn fit_one_hot(schema: &FeatureSchema) -> OneHotMap {
    let mut offset = 0;
    let features = schema
        .features()
        .iter()
        .map(|spec| {
            let f = EncodedFeature {
                name: spec.name.clone(),
                offset,
                categories: match spec.kind {
                    FeatureKind::Numeric => Vec::new(),
                    FeatureKind::Categorical => spec.categories.clone(),
                },
            };
            offset += f.width();
            f
        })
        .collect();
    OneHotMap {
        features,
        width: offset,
    }
}

pub fn encode(table: &LabeledTable, map: &OneHotMap) -> Result<Matrix> {
    let schema = table.schema();
    if schema.len() != map.features.len() {
        return Err(Error::SchemaMismatch);
    }
    // Translate the table's category indices into map columns by label.
    let mut translate: Vec<Vec<Option<usize>>> = Vec::with_capacity(schema.len());
    for (spec, f) in schema.features().iter().zip(&map.features) {
        if spec.name != f.name || spec.is_numeric() != f.is_numeric() {
            return Err(Error::SchemaMismatch);
        }
        translate.push(
            spec.categories
                .iter()
                .map(|c| f.categories.iter().position(|m| m == c).map(|k| f.offset + k))
                .collect(),
        );
    }

    let mut out = Matrix::zeros(table.n_rows(), map.width);
    for i in 0..table.n_rows() {
        let dst = out.row_mut(i);
        for (j, cell) in table.row(i).iter().enumerate() {
            match *cell {
                Cell::Num(v) => dst[map.features[j].offset] = v,
                Cell::Cat(k) => match translate[j][k as usize] {
                    Some(col) => dst[col] = 1.0,
                    None => {
                        return Err(Error::UnknownCategory {
                            row: i + 1,
                            feature: map.features[j].name.clone(),
                            value: schema.feature(j).categories[k as usize].clone(),
                        })
                    }
                },
            }
        }
    }
    Ok(out)
}
