//! JSON model files.
//!
//! ```json
//! {
//!   "n": 3,
//!   "a": {"uniform": 0.5},
//!   "b": {"preset": "case-ii", "b12": 0.4, "b13": -0.9}
//! }
//! ```
//!
//! `a` is `{"uniform": λ}` (collective decoherence, `a_αβ = λ/N`) or
//! `{"matrix": [[[re, im], …], …]}`; omitted means no dissipation. `b` is an
//! explicit matrix or one of the presets `uniform`, `case-ii`, `four-sym`,
//! `random`.

use std::path::Path;

use collective_dfs::dynamics::CouplingModel;
use collective_dfs::encodings::RealCouplings;
use collective_dfs::qubit_space::QubitCount;
use collective_dfs::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Uniform { uniform: f64 },
    Matrix { matrix: MatrixEntries },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    /// Every coupling (including on-site) equals `value`.
    Uniform { value: f64 },
    /// Three qubits with `b12 = b23`.
    CaseIi { b12: f64, b13: f64 },
    /// Four qubits with `b14 = b23`, `b13 = b24`.
    FourSym { b12: f64, b34: f64, b23: f64, b24: f64 },
    /// Real symmetric, off-diagonal entries uniform in `[-1, 1]`, zero diagonal.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    Matrix { matrix: MatrixEntries },
    Preset(Preset),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    #[serde(default)]
    pub a: Option<RateSpec>,
    pub b: CouplingSpec,
}

fn matrix_from_entries(n: usize, entries: &MatrixEntries, what: &str) -> CliResult<CMatrix> {
    if entries.len() != n || entries.iter().any(|row| row.len() != n) {
        return Err(CliError::Input(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(entries[i][j][0], entries[i][j][1])))
}

impl CouplingSpec {
    /// The `n × n` coupling matrix.
    pub fn matrix(&self, n: usize) -> CliResult<CMatrix> {
        let need = |want: usize, name: &str| {
            if n == want {
                Ok(())
            } else {
                Err(CliError::Input(format!("preset {name} needs n = {want}, got {n}")))
            }
        };
        let b = match self {
            CouplingSpec::Matrix { matrix } => return matrix_from_entries(n, matrix, "b"),
            CouplingSpec::Preset(Preset::Uniform { value }) => RealCouplings::from_fn(n, *value, |_, _| *value),
            CouplingSpec::Preset(Preset::CaseIi { b12, b13 }) => {
                need(3, "case-ii")?;
                RealCouplings::three(*b12, *b13, *b12)
            }
            CouplingSpec::Preset(Preset::FourSym { b12, b34, b23, b24 }) => {
                need(4, "four-sym")?;
                // order: b12, b13, b14, b23, b24, b34
                RealCouplings::four([*b12, *b24, *b23, *b23, *b24, *b34])
            }
            CouplingSpec::Preset(Preset::Random { seed }) => random_couplings(n, *seed),
        };
        Ok(b.to_matrix())
    }
}

/// Seeded real symmetric couplings with zero diagonal.
pub fn random_couplings(n: usize, seed: u64) -> RealCouplings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut upper = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            upper[i * n + j] = rng.random_range(-1.0..=1.0);
        }
    }
    RealCouplings::from_fn(n, 0.0, |i, j| upper[(i - 1) * n + (j - 1)])
}

impl ModelSpec {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        QubitCount::new(spec.n)?;
        Ok(spec)
    }

    pub fn qubits(&self) -> CliResult<QubitCount> {
        Ok(QubitCount::new(self.n)?)
    }

    pub fn b_matrix(&self) -> CliResult<CMatrix> {
        self.b.matrix(self.n)
    }

    pub fn to_model(&self) -> CliResult<CouplingModel> {
        let n = self.qubits()?;
        let b = self.b_matrix()?;
        let model = match &self.a {
            None => CouplingModel::new(CMatrix::zeros(self.n, self.n), b)?,
            Some(RateSpec::Uniform { uniform }) => CouplingModel::collective(n, *uniform, b)?,
            Some(RateSpec::Matrix { matrix }) => CouplingModel::new(matrix_from_entries(self.n, matrix, "a")?, b)?,
        };
        Ok(model)
    }

    /// Real couplings with a common diagonal, when `b` has that form.
    pub fn real_couplings(&self) -> CliResult<RealCouplings> {
        Ok(RealCouplings::from_matrix(&self.b_matrix()?)?)
    }
}
