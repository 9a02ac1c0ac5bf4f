use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Financial,
    Work,
    Transaction,
    Demographic,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [
        FeatureGroup::Financial,
        FeatureGroup::Work,
        FeatureGroup::Transaction,
        FeatureGroup::Demographic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Financial => "financial",
            FeatureGroup::Work => "work",
            FeatureGroup::Transaction => "transaction",
            FeatureGroup::Demographic => "demographic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub group: FeatureGroup,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>, group: FeatureGroup) -> Self {
        FeatureSpec {
            name: name.into(),
            group,
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        group: FeatureGroup,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        FeatureSpec {
            name: name.into(),
            group,
            kind: FeatureKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == FeatureKind::Numeric
    }

    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }
}

/// Ordered feature descriptors plus the name of the label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaFile", into = "SchemaFile")]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    label_name: String,
}

/// On-disk form of the schema sidecar.
#[derive(Serialize, Deserialize)]
struct SchemaFile {
    schema_version: u32,
    label_name: String,
    features: Vec<FeatureSpec>,
}

impl TryFrom<SchemaFile> for FeatureSchema {
    type Error = Error;

    fn try_from(file: SchemaFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidSchema(format!(
                "schema_version {} is not supported",
                file.schema_version
            )));
        }
        FeatureSchema::new(file.features, file.label_name)
    }
}

impl From<FeatureSchema> for SchemaFile {
    fn from(schema: FeatureSchema) -> Self {
        SchemaFile {
            schema_version: SCHEMA_VERSION,
            label_name: schema.label_name,
            features: schema.features,
        }
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>, label_name: impl Into<String>) -> Result<Self> {
        let label_name = label_name.into();
        if !is_token(&label_name) {
            return Err(Error::InvalidSchema(format!(
                "label name `{label_name}` must match [A-Za-z0-9_]+"
            )));
        }
        let mut names = HashSet::new();
        names.insert(label_name.as_str());
        for f in &features {
            if !is_token(&f.name) {
                return Err(Error::InvalidSchema(format!(
                    "feature name `{}` must match [A-Za-z0-9_]+",
                    f.name
                )));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate column name `{}`",
                    f.name
                )));
            }
            match f.kind {
                FeatureKind::Numeric if !f.categories.is_empty() => {
                    return Err(Error::InvalidSchema(format!(
                        "numeric feature `{}` lists categories",
                        f.name
                    )));
                }
                FeatureKind::Categorical => {
                    if f.categories.len() < 2 {
                        return Err(Error::InvalidSchema(format!(
                            "categorical feature `{}` needs at least 2 categories",
                            f.name
                        )));
                    }
                    let mut seen = HashSet::new();
                    for c in &f.categories {
                        if !is_token(c) {
                            return Err(Error::InvalidSchema(format!(
                                "category `{c}` of `{}` must match [A-Za-z0-9_]+",
                                f.name
                            )));
                        }
                        if !seen.insert(c) {
                            return Err(Error::InvalidSchema(format!(
                                "duplicate category `{c}` in `{}`",
                                f.name
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(FeatureSchema {
            features,
            label_name,
        })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn n_numeric(&self) -> usize {
        self.features.iter().filter(|f| f.is_numeric()).count()
    }

    pub fn n_categorical(&self) -> usize {
        self.len() - self.n_numeric()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
