//! Named collective bases for three and four qubits, closed-form blocks of
//! `H_S` in those bases, and logical encodings built from them.
//!
//! The closed forms assume identical qubits: `b` real symmetric with one
//! common on-site value `b₀` on the diagonal. [`RealCouplings`] enforces that.
//!
//! Three qubits (labels `a..f`):
//! - `a = |000⟩`, `d = (|001⟩+|010⟩+|100⟩)/√3`
//! - `b = (-2|001⟩+|010⟩+|100⟩)/√6`, `c = (|010⟩-|100⟩)/√2`
//! - `e = (2|110⟩-|101⟩-|011⟩)/√6`, `f = (|011⟩-|101⟩)/√2`
//!
//! Four qubits (labels `a..j`): `a..d` span one excitation (`a` symmetric,
//! `b`, `c`, `d` lowest weight with `J†b ∝ g`, `J†c ∝ h`, `J†d ∝ f`),
//! `e..j` span two excitations (`e` symmetric, `i`, `j` the singlets).

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3};
use serde::Serialize;

use crate::linalg::{hermiticity_residual, max_abs};
use crate::qubit_space::{QubitCount, StateVector};
use crate::{CMatrix, CVector, Error, Result, C64};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn sqrt6() -> f64 {
    6f64.sqrt()
}

/// Real symmetric couplings with a common on-site value.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCouplings {
    values: Vec<f64>,
    n: usize,
}

/// Tolerance when validating a complex matrix as [`RealCouplings`].
pub const COUPLING_TOL: f64 = 1e-12;

impl RealCouplings {
    /// `value(i, j)` for `i < j` (1-based) supplies the pair couplings.
    pub fn from_fn(n: usize, onsite: f64, value: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = onsite;
            for j in i + 1..n {
                let v = value(i + 1, j + 1);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { values, n }
    }

    /// Three qubits, zero on-site term.
    pub fn three(b12: f64, b13: f64, b23: f64) -> Self {
        Self::from_fn(3, 0.0, |i, j| match (i, j) {
            (1, 2) => b12,
            (1, 3) => b13,
            _ => b23,
        })
    }

    /// Four qubits from `[b12, b13, b14, b23, b24, b34]`, zero on-site term.
    pub fn four(pairs: [f64; 6]) -> Self {
        Self::four_with_onsite(pairs, 0.0)
    }

    pub fn four_with_onsite(pairs: [f64; 6], onsite: f64) -> Self {
        Self::from_fn(4, onsite, |i, j| match (i, j) {
            (1, 2) => pairs[0],
            (1, 3) => pairs[1],
            (1, 4) => pairs[2],
            (2, 3) => pairs[3],
            (2, 4) => pairs[4],
            _ => pairs[5],
        })
    }

    /// Validate a complex coupling matrix.
    pub fn from_matrix(b: &CMatrix) -> Result<Self> {
        if !b.is_square() || b.nrows() == 0 {
            return Err(Error::Dimension("coupling matrix must be square and nonempty".into()));
        }
        let residual = hermiticity_residual(b);
        if residual > COUPLING_TOL {
            return Err(Error::NotHermitian { residual });
        }
        if b.iter().any(|z| z.im.abs() > COUPLING_TOL) {
            return Err(Error::Couplings("must be real for the closed-form blocks".into()));
        }
        let onsite = b[(0, 0)].re;
        if (0..b.nrows()).any(|i| (b[(i, i)].re - onsite).abs() > COUPLING_TOL) {
            return Err(Error::Couplings("must share one on-site (diagonal) value".into()));
        }
        Ok(Self::from_fn(b.nrows(), onsite, |i, j| b[(i - 1, j - 1)].re))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `b_ij`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.n + (j - 1)]
    }

    pub fn onsite(&self) -> f64 {
        self.values[0]
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| C64::from(self.values[i * self.n + j]))
    }

    fn expect_qubits(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::Couplings(format!("expected {n}x{n}, got {}x{}", self.n, self.n)));
        }
        Ok(())
    }
}

/// Labelled collective basis.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedBasis {
    labels: Vec<char>,
    states: Vec<StateVector>,
}

impl NamedBasis {
    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, label: char) -> Option<&StateVector> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.states[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &StateVector)> {
        self.labels.iter().copied().zip(self.states.iter())
    }

    /// Named states carrying `k` excitations, in label order.
    pub fn in_sector(&self, k: usize) -> Vec<(char, &StateVector)> {
        self.iter().filter(|(_, s)| s.excitation() == Some(k)).collect()
    }

    /// Matrix elements `⟨x|op|y⟩` over the listed labels.
    pub fn project(&self, op: &CMatrix, labels: &[char]) -> Result<CMatrix> {
        let states: Vec<&StateVector> = labels
            .iter()
            .map(|&l| self.state(l).ok_or_else(|| Error::Invalid(format!("unknown label {l}"))))
            .collect::<Result<_>>()?;
        Ok(CMatrix::from_fn(states.len(), states.len(), |r, c| {
            states[r].amplitudes().dotc(&(op * states[c].amplitudes()))
        }))
    }
}

fn named(n: usize, entries: Vec<(char, Vec<(&str, f64)>)>) -> NamedBasis {
    let q = QubitCount::new(n).expect("3 or 4 qubits");
    let (labels, states) = entries
        .into_iter()
        .map(|(l, terms)| (l, StateVector::from_terms(q, &terms).expect("valid terms")))
        .unzip();
    NamedBasis { labels, states }
}

/// Three-qubit basis `a..f`.
pub fn three_qubit_basis() -> NamedBasis {
    named(
        3,
        vec![
            ('a', vec![("000", 1.0)]),
            ('b', vec![("001", -2.0), ("010", 1.0), ("100", 1.0)]),
            ('c', vec![("010", 1.0), ("100", -1.0)]),
            ('d', vec![("001", 1.0), ("010", 1.0), ("100", 1.0)]),
            ('e', vec![("110", 2.0), ("101", -1.0), ("011", -1.0)]),
            ('f', vec![("011", 1.0), ("101", -1.0)]),
        ],
    )
}

/// Four-qubit basis `a..j`.
pub fn four_qubit_basis() -> NamedBasis {
    named(
        4,
        vec![
            ('a', vec![("1000", 1.0), ("0100", 1.0), ("0010", 1.0), ("0001", 1.0)]),
            ('b', vec![("0100", 1.0), ("1000", -1.0)]),
            ('c', vec![("0001", 1.0), ("0010", -1.0)]),
            ('d', vec![("1000", 1.0), ("0100", 1.0), ("0010", -1.0), ("0001", -1.0)]),
            (
                'e',
                vec![
                    ("1100", 1.0),
                    ("1010", 1.0),
                    ("1001", 1.0),
                    ("0110", 1.0),
                    ("0101", 1.0),
                    ("0011", 1.0),
                ],
            ),
            ('f', vec![("1100", 1.0), ("0011", -1.0)]),
            ('g', vec![("0110", 1.0), ("0101", 1.0), ("1010", -1.0), ("1001", -1.0)]),
            ('h', vec![("1001", 1.0), ("1010", -1.0), ("0101", 1.0), ("0110", -1.0)]),
            // (|01⟩-|10⟩)⊗(|01⟩-|10⟩)/2
            ('i', vec![("0101", 1.0), ("0110", -1.0), ("1001", -1.0), ("1010", 1.0)]),
            (
                'j',
                vec![
                    ("0011", 2.0),
                    ("1100", 2.0),
                    ("0101", -1.0),
                    ("1010", -1.0),
                    ("0110", -1.0),
                    ("1001", -1.0),
                ],
            ),
        ],
    )
}

/// Named basis for `n ∈ {3, 4}`.
pub fn named_basis(n: usize) -> Option<NamedBasis> {
    match n {
        3 => Some(three_qubit_basis()),
        4 => Some(four_qubit_basis()),
        _ => None,
    }
}

/// One-excitation block of `H_S` over `(b, c, d)` for three qubits.
pub fn three_qubit_h1(b: &RealCouplings) -> Result<Matrix3<f64>> {
    b.expect_qubits(3)?;
    let (b0, b12, b13, b23) = (b.onsite(), b.get(1, 2), b.get(1, 3), b.get(2, 3));
    let bb = b0 + (b12 - 2.0 * b13 - 2.0 * b23) / 3.0;
    let bc = (b13 - b23) / sqrt3();
    let bd = (2.0 * b12 - b13 - b23) / (3.0 * SQRT2);
    let cc = b0 - b12;
    let cd = (b23 - b13) / sqrt6();
    let dd = b0 + 2.0 * (b12 + b13 + b23) / 3.0;
    Ok(Matrix3::new(bb, bc, bd, bc, cc, cd, bd, cd, dd))
}

/// `|u⟩ = ½|c⟩ - (√3/2)|b⟩` and `|v⟩ = (√3/2)|c⟩ + ½|b⟩`.
pub fn uv_states() -> (StateVector, StateVector) {
    let basis = three_qubit_basis();
    let b = basis.state('b').expect("b").amplitudes();
    let c = basis.state('c').expect("c").amplitudes();
    let half = C64::from(0.5);
    let s = C64::from(sqrt3() / 2.0);
    let u = c * half - b * s;
    let v = c * s + b * half;
    (StateVector::new(u), StateVector::new(v))
}

/// Closed-form second-order transfer rate `(1/τ₂)²` for
/// `c_u|u⟩ + c_v|v⟩` when `b12 = b23`. The value is `-2 Var(H_S)`, so its
/// magnitude is what [`crate::dynamics::tau2`] inverts.
pub fn tau2_case_ii(b12: f64, b13: f64, c_u: f64, c_v: f64) -> Result<f64> {
    let norm = c_u * c_u + c_v * c_v;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm: norm.sqrt() });
    }
    let (cu2, cv2) = (c_u * c_u, c_v * c_v);
    let mean = b13 * cu2 - (b13 - 4.0 * b12) / 3.0 * cv2;
    Ok(2.0 * mean * mean
        - 2.0 * b13 * b13 * cu2
        - 2.0 / 3.0 * (6.0 * b12 * b12 - 4.0 * b12 * b13 + b13 * b13) * cv2)
}

/// Blocks of `H_S` in the four-qubit named basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FourQubitBlocks {
    /// Over `(a, b, c, d)`.
    pub one_excitation: Matrix4<f64>,
    /// Over `(e, f, g, h, i, j)`.
    pub two_excitation: Matrix6<f64>,
}

impl FourQubitBlocks {
    /// The `{f, g, h}` sub-block.
    pub fn fgh(&self) -> Matrix3<f64> {
        self.two_excitation.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// The `{e, i, j}` sub-block.
    pub fn eij(&self) -> Matrix3<f64> {
        let m = &self.two_excitation;
        let idx = [0, 4, 5];
        Matrix3::from_fn(|r, c| m[(idx[r], idx[c])])
    }

    /// Largest coupling between `{f, g, h}` and `{e, i, j}`.
    pub fn cross_coupling(&self) -> f64 {
        let m = &self.two_excitation;
        let mut worst = 0.0f64;
        for r in [0, 4, 5] {
            for c in 1..4 {
                worst = worst.max(m[(r, c)].abs());
            }
        }
        worst
    }
}

pub fn four_qubit_blocks(b: &RealCouplings) -> Result<FourQubitBlocks> {
    b.expect_qubits(4)?;
    let b0 = b.onsite();
    let (b12, b13, b14) = (b.get(1, 2), b.get(1, 3), b.get(1, 4));
    let (b23, b24, b34) = (b.get(2, 3), b.get(2, 4), b.get(3, 4));
    let total = b12 + b13 + b14 + b23 + b24 + b34;
    let cross = b13 + b14 + b23 + b24;

    let aa = b0 + total / 2.0;
    let ab = -SQRT2 * (b13 + b14 - b23 - b24) / 4.0;
    let ac = -SQRT2 * (b13 - b14 + b23 - b24) / 4.0;
    let ad = (b12 - b34) / 2.0;
    let bb = b0 - b12;
    let bc = (b13 - b14 - b23 + b24) / 2.0;
    let bd = -ab;
    let cc = b0 - b34;
    let cd = ac;
    let dd = b0 + (b12 + b34 - cross) / 2.0;
    let one = Matrix4::new(
        aa, ab, ac, ad, //
        ab, bb, bc, bd, //
        ac, bc, cc, cd, //
        ad, bd, cd, dd,
    );

    let omega = OmegaPair::from_couplings(b)?;
    let ee = 2.0 * b0 + 2.0 * total / 3.0;
    let ei = -(b13 - b14 - b23 + b24) / sqrt6();
    let ej = -SQRT2 * (2.0 * b12 - cross + 2.0 * b34) / 6.0;
    let ff = 2.0 * b0;
    let gg = 2.0 * b0 - b12 + b34;
    let hh = 2.0 * b0 + b12 - b34;
    let ii = 2.0 * b0 - b12 - b34;
    let ij = -(b13 - b14 - b23 + b24) / sqrt3();
    let jj = 2.0 * b0 + (b12 + b34 - 2.0 * cross) / 3.0;
    let (fg, fh) = (omega.omega2, omega.omega1);
    let two = Matrix6::from_row_slice(&[
        ee, 0.0, 0.0, 0.0, ei, ej, //
        0.0, ff, fg, fh, 0.0, 0.0, //
        0.0, fg, gg, 0.0, 0.0, 0.0, //
        0.0, fh, 0.0, hh, 0.0, 0.0, //
        ei, 0.0, 0.0, 0.0, ii, ij, //
        ej, 0.0, 0.0, 0.0, ij, jj,
    ]);
    Ok(FourQubitBlocks { one_excitation: one, two_excitation: two })
}

/// `Ω₁ = (b14 - b13 - b23 + b24)/√2`, `Ω₂ = (b13 + b14 - b23 - b24)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaPair {
    pub omega1: f64,
    pub omega2: f64,
}

impl OmegaPair {
    pub fn from_couplings(b: &RealCouplings) -> Result<Self> {
        b.expect_qubits(4)?;
        let (b13, b14, b23, b24) = (b.get(1, 3), b.get(1, 4), b.get(2, 3), b.get(2, 4));
        Ok(Self {
            omega1: (b14 - b13 - b23 + b24) / SQRT2,
            omega2: (b13 + b14 - b23 - b24) / SQRT2,
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }
}

/// Below this `Ω₁² + Ω₂²` the encoding direction is undefined.
pub const OMEGA_DEGENERACY: f64 = 1e-14;

/// Logical qubit: one zero state and one or more one-state candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalEncoding {
    pub zero_l: StateVector,
    pub one_l: Vec<StateVector>,
    pub validity: String,
}

/// The two-excitation encoding built from eigenvectors of the `{f,g,h}`
/// coupling block.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEncoding {
    pub omegas: OmegaPair,
    pub encoding: LogicalEncoding,
    /// Coordinates over `(f, g, h)` of `zero_l` followed by `one_l`.
    pub fgh_coordinates: Vec<Vector3<f64>>,
    pub degenerate: bool,
}

const OMEGA_VALIDITY: &str = "two-excitation states immune to arbitrary real b until a jump \
occurs; eigenvectors of the {f,g,h} coupling block (diagonal phases absorbed), exact \
eigenvectors of the full block when b12 = b34";

const DEGENERATE_VALIDITY: &str = "degenerate: Omega1 = Omega2 = 0, the {f,g,h} coupling \
block vanishes and any orthonormal pair in span{g,h} is stationary up to diagonal phases";

/// `{f,g,h}` block with its diagonal removed.
pub fn fgh_coupling_block(b: &RealCouplings) -> Result<Matrix3<f64>> {
    let mut m = four_qubit_blocks(b)?.fgh();
    m.fill_diagonal(0.0);
    Ok(m)
}

/// `‖Bv - (v·Bv) v‖` for unit `v`.
pub fn eigen_residual(block: &Matrix3<f64>, v: &Vector3<f64>) -> f64 {
    let w = block * v;
    (w - v * v.dot(&w)).norm()
}

pub fn omega_encoding(b: &RealCouplings) -> Result<OmegaEncoding> {
    let omegas = OmegaPair::from_couplings(b)?;
    let basis = four_qubit_basis();
    let fgh: Vec<&CVector> = ['f', 'g', 'h']
        .iter()
        .map(|&l| basis.state(l).expect("named").amplitudes())
        .collect();
    let to_state = |coords: &Vector3<f64>| {
        StateVector::new(
            fgh[0] * C64::from(coords[0]) + fgh[1] * C64::from(coords[1]) + fgh[2] * C64::from(coords[2]),
        )
    };

    let r2 = omegas.omega1 * omegas.omega1 + omegas.omega2 * omegas.omega2;
    let (coords, degenerate, validity) = if r2 <= OMEGA_DEGENERACY {
        (
            vec![Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 0.0, 1.0)],
            true,
            DEGENERATE_VALIDITY,
        )
    } else {
        let r = r2.sqrt();
        let s = 1.0 / (SQRT2 * r);
        (
            vec![
                Vector3::new(0.0, omegas.omega1, -omegas.omega2) / r,
                Vector3::new(r, omegas.omega2, omegas.omega1) * s,
                Vector3::new(-r, omegas.omega2, omegas.omega1) * s,
            ],
            false,
            OMEGA_VALIDITY,
        )
    };
    let mut states = coords.iter().map(to_state);
    let zero_l = states.next().expect("zero state");
    let encoding = LogicalEncoding { zero_l, one_l: states.collect(), validity: validity.to_owned() };
    Ok(OmegaEncoding { omegas, encoding, fgh_coordinates: coords, degenerate })
}

/// Amplitudes of one exported state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportedState {
    pub label: String,
    /// `(bitstring, [re, im])` for every nonzero amplitude.
    pub amplitudes: Vec<(String, [f64; 2])>,
    /// Coefficients over `(f, g, h)`.
    pub fgh: [f64; 3],
    pub coupling_residual: f64,
    pub full_block_residual: f64,
}

/// JSON-ready description of an [`OmegaEncoding`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingExport {
    pub omega1: f64,
    pub omega2: f64,
    pub degenerate: bool,
    pub validity: String,
    pub states: Vec<ExportedState>,
}

impl OmegaEncoding {
    pub fn export(&self, b: &RealCouplings) -> Result<EncodingExport> {
        let coupling = fgh_coupling_block(b)?;
        let full = four_qubit_blocks(b)?.fgh();
        let q = QubitCount::new(4)?;
        let mut labels = vec!["zero_l".to_owned()];
        labels.extend((0..self.encoding.one_l.len()).map(|i| format!("one_l_{}", i + 1)));
        let states = std::iter::once(&self.encoding.zero_l)
            .chain(self.encoding.one_l.iter())
            .zip(&self.fgh_coordinates)
            .zip(labels)
            .map(|((state, coords), label)| ExportedState {
                label,
                amplitudes: state
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm() > 1e-15)
                    .map(|(idx, z)| (crate::qubit_space::bit_label(q, idx), [z.re, z.im]))
                    .collect(),
                fgh: [coords[0], coords[1], coords[2]],
                coupling_residual: eigen_residual(&coupling, coords),
                full_block_residual: eigen_residual(&full, coords),
            })
            .collect();
        Ok(EncodingExport {
            omega1: self.omegas.omega1,
            omega2: self.omegas.omega2,
            degenerate: self.degenerate,
            validity: self.encoding.validity.clone(),
            states,
        })
    }
}

/// Check helper: largest deviation between a closed-form real block and the
/// projection of `h` onto the listed named states.
pub fn block_deviation(basis: &NamedBasis, h: &CMatrix, labels: &[char], block: &[f64]) -> Result<f64> {
    let projected = basis.project(h, labels)?;
    let k = labels.len();
    let closed = CMatrix::from_fn(k, k, |r, c| C64::from(block[r * k + c]));
    Ok(max_abs(&(projected - closed)))
}
