//! Loading models, rational functions and integrators from JSON or TOML
//! documents.
//!
//! A model document holds either `atoms` (objects with `re`, `im`, `mass`)
//! plus optional `harmonic` coefficients `[[re, im], ...]`, or a single
//! `rational` table with `zeros`, `poles` and `scale`:
//!
//! ```toml
//! harmonic = [[0.5, 0.0]]
//!
//! [[atoms]]
//! re = 1.0
//! im = 0.0
//! mass = -1.0
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::integrators::Integrator;
use crate::potentials::{DeltaSubharmonicModel, HarmonicPart, Rational, RieszAtom};

/// Document syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    /// `.toml` selects TOML, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("toml") => Format::Toml,
            _ => Format::Json,
        }
    }
}

/// Deserializes `text`, reporting the location of the first offending line
/// or field.
pub fn parse_document<T: DeserializeOwned>(text: &str, format: Format, source_name: &str) -> Result<T> {
    let parse_error = |message: String| Error::Parse {
        source_name: source_name.to_string(),
        message,
    };
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| parse_error(e.to_string())),
        Format::Toml => toml::from_str(text).map_err(|e| parse_error(e.to_string().trim_end().to_string())),
    }
}

/// Reads and deserializes a file; I/O failures stay as [`std::io::Error`].
pub fn read_document<T: DeserializeOwned>(path: &Path) -> std::result::Result<Result<T>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_document(&text, Format::from_path(path), &path.display().to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    #[serde(default)]
    atoms: Option<Vec<RieszAtom>>,
    #[serde(default)]
    harmonic: Option<HarmonicPart>,
    #[serde(default)]
    rational: Option<Rational>,
}

impl ModelDocument {
    fn into_model(self, source_name: &str) -> Result<DeltaSubharmonicModel> {
        match (self.rational, self.atoms, self.harmonic) {
            (Some(f), None, None) => {
                f.validate()?;
                Ok(f.log_modulus())
            }
            (Some(_), _, _) => Err(Error::Parse {
                source_name: source_name.to_string(),
                message: "`rational` cannot be combined with `atoms` or `harmonic`".into(),
            }),
            (None, atoms, harmonic) => {
                DeltaSubharmonicModel::new(atoms.unwrap_or_default(), harmonic.unwrap_or_default())
            }
        }
    }
}

/// Parses a model document (atoms or a rational function).
pub fn parse_model(text: &str, format: Format, source_name: &str) -> Result<DeltaSubharmonicModel> {
    parse_document::<ModelDocument>(text, format, source_name)?.into_model(source_name)
}

/// Parses a rational-function document: either the bare `zeros`/`poles`/
/// `scale` table or one nested under `rational`.
pub fn parse_rational(text: &str, format: Format, source_name: &str) -> Result<Rational> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Nested { rational: Rational },
        Bare(Rational),
    }
    let f = match parse_document::<Doc>(text, format, source_name) {
        Ok(Doc::Nested { rational }) | Ok(Doc::Bare(rational)) => rational,
        // The untagged error is vague; re-parse as the bare form to get a located message.
        Err(_) => parse_document::<Rational>(text, format, source_name)?,
    };
    f.validate()?;
    Ok(f)
}

/// Parses an integrator document with `end`, `pieces`, `cantor` and `jumps`.
pub fn parse_integrator(text: &str, format: Format, source_name: &str) -> Result<Integrator> {
    parse_document(text, format, source_name)
}

/// Loads a model file, format chosen by extension.
pub fn load_model(path: &Path) -> std::result::Result<Result<DeltaSubharmonicModel>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_model(&text, Format::from_path(path), &path.display().to_string()))
}

/// Loads a rational-function file, format chosen by extension.
pub fn load_rational(path: &Path) -> std::result::Result<Result<Rational>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_rational(&text, Format::from_path(path), &path.display().to_string()))
}

/// Loads an integrator file, format chosen by extension.
pub fn load_integrator(path: &Path) -> std::result::Result<Result<Integrator>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_integrator(&text, Format::from_path(path), &path.display().to_string()))
}
