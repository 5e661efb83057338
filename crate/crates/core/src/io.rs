//! TOML text format for instances and solutions.
//!
//! Keys are the struct field names; grids are arrays of per-train rows,
//! `x[k][i]` being train `k` (0-based) at station `i` (0-based).

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, ModelError, Solution};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot encode document: {0}")]
    Encode(#[from] toml::ser::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn to_text<T: Serialize>(value: &T) -> Result<String, IoError> {
    Ok(toml::to_string(value)?)
}

pub fn from_text<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    Ok(toml::from_str(text)?)
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// Reads and validates an instance.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let inst: Instance = from_text(&read(path.as_ref())?)?;
    inst.check()?;
    Ok(inst)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<(), IoError> {
    write(path.as_ref(), &to_text(inst)?)
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<Solution, IoError> {
    from_text(&read(path.as_ref())?)
}

pub fn write_solution(path: impl AsRef<Path>, sol: &Solution) -> Result<(), IoError> {
    write(path.as_ref(), &to_text(sol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    #[test]
    fn instance_round_trip() {
        let mut inst = fixtures::uniform(3, 2, 10);
        inst.occurred_delay[1][0] = 7;
        let text = to_text(&inst).unwrap();
        assert!(text.contains("planned_arrival"));
        let back: Instance = from_text(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn solution_round_trip() {
        let inst = fixtures::uniform(3, 2, 10);
        let sol = Solution::planned(&inst);
        let back: Solution = from_text(&to_text(&sol).unwrap()).unwrap();
        assert_eq!(back, sol);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(matches!(from_text::<Instance>("num_stations = \"x\""), Err(IoError::Parse(_))));
    }
}
