//! Model files: the magic `FRWD`, a format version, then the fitted pipeline
//! and model as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::pipeline::FittedPipeline;

pub const MAGIC: &str = "FRWD";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Payload {
    pipeline: FittedPipeline,
    model: Model,
}

#[derive(Serialize)]
struct PayloadRef<'a> {
    pipeline: &'a FittedPipeline,
    model: &'a Model,
}

pub fn to_bytes(model: &Model, pipeline: &FittedPipeline) -> Result<Vec<u8>> {
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\n").into_bytes();
    serde_json::to_writer(&mut out, &PayloadRef { pipeline, model })?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<(Model, FittedPipeline)> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::CorruptModel("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::CorruptModel("header is not UTF-8".into()))?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::CorruptModel(format!("bad magic, expected `{MAGIC}`")))?;
    let version: u32 = version
        .trim()
        .parse()
        .map_err(|_| Error::CorruptModel(format!("bad format version `{version}`")))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let payload: Payload =
        serde_json::from_slice(&bytes[newline + 1..]).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if payload.model.width() != payload.pipeline.output_width() {
        return Err(Error::CorruptModel(format!(
            "model expects {} columns but the pipeline produces {}",
            payload.model.width(),
            payload.pipeline.output_width()
        )));
    }
    Ok((payload.model, payload.pipeline))
}

pub fn save_model(model: &Model, pipeline: &FittedPipeline, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model, pipeline)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(Model, FittedPipeline)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
