//! JSON state files.
//!
//! ```json
//! { "kind": "pure" | "density", "dims": [d1, .., dn], "data": [[re, im], ..] }
//! ```
//!
//! Pure payloads hold `prod(dims)` amplitudes, density payloads hold
//! `prod(dims)^2` entries in row-major (row, col) order. Loaded states must
//! satisfy their invariants within [`FILE_TOLERANCE`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, PartySystem, PureState, State, FILE_TOLERANCE};
use crate::tensor::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

/// Wire form of a state file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

fn to_pairs(data: &[C64]) -> Vec<[f64; 2]> {
    data.iter().map(|c| [c.re, c.im]).collect()
}

impl From<&State> for StateFile {
    fn from(state: &State) -> Self {
        match state {
            State::Pure(p) => StateFile {
                kind: StateKind::Pure,
                dims: p.system().dims().to_vec(),
                data: to_pairs(p.data()),
            },
            State::Density(d) => StateFile {
                kind: StateKind::Density,
                dims: d.system().dims().to_vec(),
                data: to_pairs(&d.row_major()),
            },
        }
    }
}

impl StateFile {
    /// Converts to a state, checking shape and invariants at [`FILE_TOLERANCE`].
    pub fn into_state(self) -> Result<State> {
        if let Some((k, _)) = self.data.iter().enumerate().find(|(_, p)| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Parse(format!("data entry {k} is not finite")));
        }
        let system = PartySystem::new(self.dims).map_err(|e| Error::Parse(format!("dims: {e}")))?;
        let data: Vec<C64> = self.data.iter().map(|p| C64::new(p[0], p[1])).collect();
        let side = system.total_dim();
        let state = match self.kind {
            StateKind::Pure => {
                if data.len() != side {
                    return Err(Error::Parse(format!(
                        "pure state over {system} needs {side} data entries, found {}",
                        data.len()
                    )));
                }
                let psi = PureState::new(system, data)?;
                psi.validate_with(FILE_TOLERANCE).into_result("pure state payload")?;
                State::Pure(psi)
            }
            StateKind::Density => {
                if data.len() != side * side {
                    return Err(Error::Parse(format!(
                        "density matrix over {system} needs {} data entries, found {}",
                        side * side,
                        data.len()
                    )));
                }
                let rho = DensityMatrix::from_row_major(system, &data)?;
                rho.validate_with(FILE_TOLERANCE).into_result("density payload")?;
                State::Density(rho)
            }
        };
        Ok(state)
    }
}

/// Parses a state from JSON text.
pub fn state_from_json(text: &str) -> Result<State> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_state()
}

/// Serializes a state; values round-trip bit-exactly.
pub fn state_to_json(state: &State) -> String {
    serde_json::to_string(&StateFile::from(state)).expect("state files always serialize")
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn read_state(path: impl AsRef<Path>) -> Result<State> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    state_from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_state(state: &State, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = state_to_json(state);
    text.push('\n');
    fs::write(path, text).map_err(|e| with_path(e, path))?;
    Ok(())
}
