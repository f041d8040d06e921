//! Input plumbing: reading the `--input` source and classifying the JSON
//! document it contains.

use std::fs;
use std::io::Read;

use circfn_core::{CriticalCircleRecord, NormalForm, Profile, SurfaceKind};
use serde_json::Value;

use crate::CliError;

/// What a command was handed on `--input`.
pub enum Document {
    /// A full normal form `{surface, profile, diffeo}`.
    Form(NormalForm),
    /// A bare profile `{base, target, pieces}`.
    Profile(Profile),
    /// A pre-computed critical-circle table `{surface?, records}` for the
    /// combinatorial checks alone.
    Records {
        surface: Option<SurfaceKind>,
        records: Vec<CriticalCircleRecord>,
    },
}

/// Read the raw input text; `-` means stdin.
pub fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
    }
}

/// Classify and deserialize an input document.
///
/// JSON syntax errors and unrecognizable shapes are usage errors (exit 1);
/// a recognized document whose parts fail to assemble is a rejection
/// (exit 2), since assembly runs the same structural validation as
/// `compose`.
pub fn parse_document(text: &str) -> Result<Document, CliError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("malformed JSON: {e}")))?;
    let Some(obj) = value.as_object() else {
        return Err(CliError::Usage(
            "input must be a JSON object (normal form, profile, or records document)".into(),
        ));
    };
    if obj.contains_key("records") {
        let surface = match obj.get("surface") {
            Some(v) => Some(
                serde_json::from_value(v.clone())
                    .map_err(|e| CliError::Usage(format!("bad surface tag: {e}")))?,
            ),
            None => None,
        };
        let records = serde_json::from_value(obj["records"].clone())
            .map_err(|e| CliError::Rejected(format!("bad records list: {e}")))?;
        return Ok(Document::Records { surface, records });
    }
    if obj.contains_key("profile") {
        let nf: NormalForm = serde_json::from_value(value)
            .map_err(|e| CliError::Rejected(format!("normal form rejected: {e}")))?;
        return Ok(Document::Form(nf));
    }
    if obj.contains_key("pieces") {
        let p: Profile = serde_json::from_value(value)
            .map_err(|e| CliError::Rejected(format!("profile rejected: {e}")))?;
        return Ok(Document::Profile(p));
    }
    Err(CliError::Usage(
        "unrecognized document: expected a `profile` key (normal form), a `pieces` key (profile), or a `records` key".into(),
    ))
}

/// Read a second document from an explicit path (used by `equiv --other`
/// and `conjugate --bump`).
pub fn read_json<T: serde::de::DeserializeOwned>(path: &str, what: &str) -> Result<T, CliError> {
    let text = read_source(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed JSON in {what}: {e}")))?;
    serde_json::from_value(value).map_err(|e| CliError::Rejected(format!("{what} rejected: {e}")))
}
