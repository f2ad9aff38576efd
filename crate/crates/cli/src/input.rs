//! Distribution input shared by every subcommand.

use std::fs;

use sphermoments_core::{DistSpec, SphericalDistribution};

use crate::error::{CliError, CliResult};

/// Where a distribution JSON document comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistSource {
    Inline(String),
    File(String),
}

impl DistSource {
    /// `--dist-json TEXT` or `--dist @PATH` (a `--dist` value without `@` is inline JSON).
    pub fn from_flags(dist_json: Option<&str>, dist: Option<&str>) -> CliResult<Self> {
        match (dist_json, dist) {
            (Some(_), Some(_)) => Err(CliError::input("pass only one of --dist-json and --dist")),
            (Some(text), None) => Ok(DistSource::Inline(text.to_string())),
            (None, Some(arg)) => Ok(match arg.strip_prefix('@') {
                Some(path) => DistSource::File(path.to_string()),
                None => DistSource::Inline(arg.to_string()),
            }),
            (None, None) => Err(CliError::input("a distribution is required (--dist-json or --dist @path)")),
        }
    }

    pub fn read(&self) -> CliResult<String> {
        match self {
            DistSource::Inline(text) => Ok(text.clone()),
            DistSource::File(path) => fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        }
    }
}

pub fn parse_spec(text: &str) -> CliResult<DistSpec> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid distribution JSON: {e}")))
}

/// Parses and validates a distribution.
pub fn parse_distribution(text: &str) -> CliResult<SphericalDistribution> {
    let dist = parse_spec(text)?.to_distribution()?;
    dist.ensure_valid()?;
    Ok(dist)
}

pub fn load(source: &DistSource) -> CliResult<SphericalDistribution> {
    parse_distribution(&source.read()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources() {
        assert_eq!(DistSource::from_flags(None, Some("@a.json")).unwrap(), DistSource::File("a.json".into()));
        assert_eq!(DistSource::from_flags(Some("{}"), None).unwrap(), DistSource::Inline("{}".into()));
        assert!(DistSource::from_flags(Some("{}"), Some("@x")).is_err());
        assert!(DistSource::from_flags(None, None).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = parse_distribution(r#"{"kind":"vmf","n":2,"u":[1,0],"k":1,"extra":0}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn violations_are_listed() {
        match parse_distribution(r#"{"kind":"vmf","n":2,"u":[1,0],"k":-1}"#).unwrap_err() {
            CliError::Input { violations, .. } => assert_eq!(violations, vec!["k must be ≥ 0"]),
            other => panic!("{other:?}"),
        }
    }
}
