//! Schema, raw tables, CSV ingestion, synthetic data and splitting.

mod csv_io;
mod schema;
mod split;
mod synth;
mod table;

pub use csv_io::{read_csv, read_csv_from, write_csv, write_csv_to};
pub use schema::{FeatureGroup, FeatureKind, FeatureSchema, FeatureSpec, SCHEMA_VERSION};
pub use split::{apportion, split, split_indices, SplitSpec};
pub use synth::{synthesize, Preset, SynthConfig, DEFAULT_CATEGORICAL, DEFAULT_NUMERIC, LABEL_NAME};
pub use table::{class_balance, Cell, ClassBalance, LabeledTable};
