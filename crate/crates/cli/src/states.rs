//! Initial states by name or from a JSON amplitude file.
//!
//! Names: `ground`, any bitstring of length `n`, `singlet` (n = 2), `a`..`f`,
//! `u`, `v` (n = 3), `a`..`j` and `omega-zero`, `omega-one-plus`,
//! `omega-one-minus` (n = 4, real couplings). A file holds
//! `{"amplitudes": [[re, im], …]}` and is normalized on load.

use std::path::Path;

use collective_dfs::encodings::{named_basis, omega_encoding, uv_states};
use collective_dfs::qubit_space::{computational_state, QubitCount, StateVector};
use collective_dfs::{CVector, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::model::ModelSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    amplitudes: Vec<[f64; 2]>,
}

/// Names understood for an `n`-qubit register, besides bitstrings.
pub fn known_names(n: usize) -> Vec<String> {
    let mut names = vec!["ground".to_owned()];
    match n {
        2 => names.push("singlet".into()),
        3 => names.extend("abcdefuv".chars().map(String::from)),
        4 => {
            names.extend("abcdefghij".chars().map(String::from));
            names.extend(["omega-zero", "omega-one-plus", "omega-one-minus"].map(String::from));
        }
        _ => {}
    }
    names
}

pub fn is_omega(name: &str) -> bool {
    name.starts_with("omega-")
}

fn unknown(name: &str, n: usize) -> CliError {
    CliError::Input(format!(
        "unknown state {name:?} for {n} qubits; expected a bitstring, a JSON file, or one of: {}",
        known_names(n).join(", ")
    ))
}

/// Resolve `name` against the model, falling back to a file path.
pub fn resolve(name: &str, spec: &ModelSpec) -> CliResult<StateVector> {
    let n = spec.qubits()?;
    if let Some(state) = named(name, n, spec)? {
        return Ok(state);
    }
    let path = Path::new(name);
    if path.is_file() {
        return from_file(path, n);
    }
    Err(unknown(name, n.get()))
}

fn named(name: &str, n: QubitCount, spec: &ModelSpec) -> CliResult<Option<StateVector>> {
    let count = n.get();
    if name == "ground" {
        return Ok(Some(computational_state(n, &"0".repeat(count))?));
    }
    if name.len() == count && name.chars().all(|c| c == '0' || c == '1') {
        return Ok(Some(computational_state(n, name)?));
    }
    let state = match (count, name) {
        (2, "singlet") => Some(StateVector::from_terms(n, &[("01", 1.0), ("10", -1.0)])?),
        (3, "u") => Some(uv_states().0),
        (3, "v") => Some(uv_states().1),
        (4, _) if is_omega(name) => {
            let enc = omega_encoding(&spec.real_couplings()?)?;
            let pick = match name {
                "omega-zero" => Some(enc.encoding.zero_l),
                "omega-one-plus" => enc.encoding.one_l.into_iter().next(),
                "omega-one-minus" => enc.encoding.one_l.into_iter().nth(1),
                _ => return Err(unknown(name, count)),
            };
            Some(pick.ok_or_else(|| {
                CliError::Degenerate(format!("{name} is undefined when Omega1 = Omega2 = 0"))
            })?)
        }
        (3 | 4, _) => {
            let mut chars = name.chars();
            match (chars.next(), chars.next()) {
                (Some(label), None) => named_basis(count).and_then(|b| b.state(label).cloned()),
                _ => None,
            }
        }
        _ => None,
    };
    Ok(state)
}

fn from_file(path: &Path, n: QubitCount) -> CliResult<StateVector> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    if file.amplitudes.len() != n.dim() {
        return Err(CliError::Input(format!(
            "{} holds {} amplitudes, expected {}",
            path.display(),
            file.amplitudes.len(),
            n.dim()
        )));
    }
    let amps = CVector::from_iterator(n.dim(), file.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)));
    Ok(StateVector::normalized(amps)?)
}
