//! Resolves command-line arguments into a universe, programs and inputs.

use std::fs;
use std::path::Path;

use multiexec::dsl::{catalog, parse_named, Program};
use multiexec::labeled::LabeledSet;
use multiexec::lattice::PrincipalUniverse;
use multiexec::oracle::UniverseSpec;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Universe-related flags shared by every subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct UniverseArgs {
    /// JSON file `{"principals": [...], "values": [...], "fuel": n}`.
    #[arg(long, global = true, value_name = "FILE")]
    pub universe: Option<String>,
    /// Comma-separated principals; shorthand for a universe file.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        conflicts_with = "universe"
    )]
    pub principals: Option<Vec<String>>,
    /// Comma-separated value universe (default 0,1).
    #[arg(long, global = true, value_delimiter = ',')]
    pub values: Option<Vec<u64>>,
    /// Evaluation fuel per run.
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
}

impl UniverseArgs {
    pub fn explicit(&self) -> bool {
        self.universe.is_some() || self.principals.is_some()
    }

    /// The configured universe, or `fallback` when none was given.
    pub fn resolve(&self, fallback: PrincipalUniverse) -> Result<UniverseSpec, CliError> {
        let mut spec = match (&self.universe, &self.principals) {
            (Some(path), _) => {
                let text = read(path)?;
                serde_json::from_str::<UniverseSpec>(&text)
                    .map_err(|e| CliError::Config(format!("universe file {path}: {e}")))?
            }
            (None, Some(names)) => {
                UniverseSpec::with_principals(PrincipalUniverse::new(names.iter().cloned())?)
            }
            (None, None) => UniverseSpec::with_principals(fallback),
        };
        if let Some(values) = &self.values {
            spec.values = values.clone();
        }
        if let Some(fuel) = self.fuel {
            spec.fuel = fuel;
        }
        if spec.fuel == 0 {
            return Err(CliError::Config("fuel must be at least 1".into()));
        }
        spec.validate()?;
        Ok(spec)
    }

    /// The universe for `program`: explicit flags win, then the catalog
    /// entry's own universe, then `{H}`.
    pub fn for_program(&self, program: &str) -> Result<UniverseSpec, CliError> {
        let fallback = match catalog::entry(program) {
            Ok(entry) if !Path::new(program).exists() => entry.universe(),
            _ => PrincipalUniverse::two_point(),
        };
        self.resolve(fallback)
    }
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

/// A program source: an existing file path, otherwise a catalog name.
pub fn load_program(
    reference: &str,
    universe: &PrincipalUniverse,
) -> Result<(Program, String), CliError> {
    let path = Path::new(reference);
    if path.is_file() {
        let source = read(reference)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("main");
        return Ok((parse_named(name, &source, universe)?, source));
    }
    let entry = catalog::entry(reference).map_err(|_| {
        CliError::Config(format!(
            "{reference:?} is neither a file nor a catalog program"
        ))
    })?;
    Ok((entry.program(universe)?, entry.source.to_string()))
}

/// An input given inline as a literal (`{1^{H}}`) or JSON array, or as a
/// path to a file holding either.
pub fn load_input(text: &str, universe: &PrincipalUniverse) -> Result<LabeledSet, CliError> {
    let trimmed = text.trim_start();
    let body = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        text.to_string()
    } else {
        read(text)?
    };
    let body = body.trim();
    if body.starts_with('[') {
        let value: Value =
            serde_json::from_str(body).map_err(|e| CliError::Config(format!("input JSON: {e}")))?;
        Ok(LabeledSet::from_json(&value, universe)?)
    } else {
        Ok(LabeledSet::parse_literal(body, universe)?)
    }
}

/// SHA-256 of the canonical (key-sorted, compact) JSON encoding of `config`.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

pub fn spec_json(spec: &UniverseSpec) -> Value {
    json!({
        "principals": spec.principals.principals(),
        "values": spec.values,
        "fuel": spec.fuel,
    })
}
