//! File formats: CSV tables, the binary model and reference containers,
//! report JSON and exported field CSVs.
//!
//! All writers are deterministic: the same values always produce the same
//! bytes. Parsers never panic on malformed input.

mod container;
pub mod export;
pub mod model_file;
pub mod reference;
pub mod tables;

pub use container::CONTAINER_VERSION;
pub use export::{export_fields, field_csv, ExportedField, LOG_VARIANCE_SENTINEL};
pub use model_file::{decode_model, encode_model, MODEL_MAGIC};
pub use reference::{decode_reference, encode_reference, REFERENCE_MAGIC};
pub use tables::{format_f64, parse_design, parse_outputs, write_design, write_outputs, OutputTable};

use serde::Serialize;

use crate::error::{Error, Result};

/// Pretty JSON with a trailing newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
