//! JSON state files.
//!
//! ```json
//! {"schema_version": 1, "modes": 2, "dims": [3, 3], "kind": "pure",
//!  "data": [[0.0, 0.0], [0.7071067811865476, 0.0], ...]}
//! ```
//!
//! `pure` data is a flat list of `[re, im]` pairs in row-major mode order
//! (mode 0 slowest); `density` data is a list of rows of pairs. `separable`
//! data is `{"weights": [...], "components": [[mode0_amps, mode1_amps, ...], ...]}`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::state::Repr;
use super::{FockVector, MultiModeState, C64};
use crate::error::{Error, Result};

pub const STATE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StateFile {
    schema_version: u32,
    modes: usize,
    dims: Vec<usize>,
    kind: String,
    data: Value,
}

#[derive(Serialize, Deserialize)]
struct SeparableData {
    weights: Vec<f64>,
    components: Vec<Vec<Vec<[f64; 2]>>>,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn data_err(kind: &str, e: serde_json::Error) -> Error {
    Error::InvalidState(format!("malformed {kind} data: {e}"))
}

/// Parses and validates a state file's contents.
pub fn state_from_json(text: &str) -> Result<MultiModeState> {
    let file: StateFile = serde_json::from_str(text).map_err(parse_err)?;
    if file.schema_version != STATE_SCHEMA_VERSION {
        return Err(Error::InvalidState(format!(
            "unsupported schema_version {}",
            file.schema_version
        )));
    }
    if file.modes != file.dims.len() {
        return Err(Error::InvalidState(format!(
            "modes = {} but {} dims given",
            file.modes,
            file.dims.len()
        )));
    }
    match file.kind.as_str() {
        "pure" => {
            let pairs: Vec<[f64; 2]> =
                serde_json::from_value(file.data).map_err(|e| data_err("pure", e))?;
            MultiModeState::pure(file.dims, pairs.iter().map(complex).collect())
        }
        "density" => {
            let rows: Vec<Vec<[f64; 2]>> =
                serde_json::from_value(file.data).map_err(|e| data_err("density", e))?;
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidState(
                    "density data must be a square matrix".into(),
                ));
            }
            let rho = DMatrix::from_fn(n, n, |i, j| complex(&rows[i][j]));
            MultiModeState::density(file.dims, rho)
        }
        "separable" => {
            let data: SeparableData =
                serde_json::from_value(file.data).map_err(|e| data_err("separable", e))?;
            let components = data
                .components
                .iter()
                .map(|term| {
                    term.iter()
                        .map(|amps| FockVector::new(amps.iter().map(complex).collect()))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let state = MultiModeState::separable(data.weights, components)?;
            if state.dims() != file.dims.as_slice() {
                return Err(Error::DimensionMismatch(format!(
                    "declared dims {:?}, components have {:?}",
                    file.dims,
                    state.dims()
                )));
            }
            Ok(state)
        }
        other => Err(Error::InvalidState(format!("unknown state kind {other:?}"))),
    }
}

pub fn state_to_json(state: &MultiModeState) -> String {
    let data = match &state.repr {
        Repr::Pure(v) => serde_json::to_value(v.iter().map(pair).collect::<Vec<_>>()),
        Repr::Density(rho) => serde_json::to_value(
            (0..rho.nrows())
                .map(|i| rho.row(i).iter().map(pair).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        ),
        Repr::Separable {
            weights,
            components,
        } => serde_json::to_value(SeparableData {
            weights: weights.clone(),
            components: components
                .iter()
                .map(|term| {
                    term.iter()
                        .map(|f| f.amps().iter().map(pair).collect())
                        .collect()
                })
                .collect(),
        }),
    }
    .expect("state data serializes");
    let file = StateFile {
        schema_version: STATE_SCHEMA_VERSION,
        modes: state.modes(),
        dims: state.dims().to_vec(),
        kind: state.kind().as_str().to_string(),
        data,
    };
    serde_json::to_string(&file).expect("state file serializes")
}

pub fn read_state_file(path: &Path) -> std::io::Result<std::result::Result<MultiModeState, Error>> {
    let text = std::fs::read_to_string(path)?;
    Ok(state_from_json(&text))
}

pub fn write_state_file(path: &Path, state: &MultiModeState) -> std::io::Result<()> {
    std::fs::write(path, state_to_json(state))
}
