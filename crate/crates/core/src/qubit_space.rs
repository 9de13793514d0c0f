//! Computational basis and spin operators on `N` qubits.
//!
//! Qubit 1 is the leftmost tensor factor: the ket `|b₁b₂…b_N⟩` sits at index
//! `Σ b_i 2^(N-i)`. `|0⟩` is the ground state, `σ_z|0⟩ = -|0⟩` and
//! `σ₋|1⟩ = |0⟩`, so a ket with `k` excitations has `J_z` weight `-(N-2k)`.

use crate::linalg::{hermiticity_residual, max_abs};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest register handled with dense matrices.
pub const MAX_QUBITS: usize = 12;

/// Number of physical qubits, `1 ..= MAX_QUBITS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitCount(usize);

impl QubitCount {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount { n, max: MAX_QUBITS });
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(self) -> usize {
        1 << self.0
    }

    /// Bit mask of qubit `i` (1-based) inside a basis index.
    fn mask(self, i: usize) -> usize {
        1 << (self.0 - i)
    }
}

impl std::fmt::Display for QubitCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unit-norm tolerance for [`StateVector::is_normalized`].
pub const NORM_TOL: f64 = 1e-12;

/// Complex amplitudes over the computational basis, optionally tagged with
/// an excitation number.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    excitation: Option<usize>,
}

impl StateVector {
    /// Wrap raw amplitudes. The excitation tag is inferred when every nonzero
    /// amplitude has the same popcount.
    pub fn new(amplitudes: CVector) -> Self {
        let excitation = infer_excitation(&amplitudes);
        Self { amplitudes, excitation }
    }

    /// Same as [`StateVector::new`] after scaling to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::new(amplitudes / C64::from(norm)))
    }

    /// Build from `(bitstring, amplitude)` terms, then normalize.
    pub fn from_terms(n: QubitCount, terms: &[(&str, f64)]) -> Result<Self> {
        let mut amps = CVector::zeros(n.dim());
        for (bits, amp) in terms {
            amps[bit_index(n, bits)?] += C64::from(*amp);
        }
        Self::normalized(amps)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn excitation(&self) -> Option<usize> {
        self.excitation
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

fn infer_excitation(amps: &CVector) -> Option<usize> {
    let mut k = None;
    for (idx, a) in amps.iter().enumerate() {
        if a.norm() > 1e-14 {
            let p = idx.count_ones() as usize;
            match k {
                None => k = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
    }
    k
}

fn bit_index(n: QubitCount, bits: &str) -> Result<usize> {
    if bits.len() != n.get() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Bitstring { bits: bits.to_owned(), n: n.get() });
    }
    Ok(bits.bytes().fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1')))
}

/// Bitstring label of a basis index, qubit 1 first.
pub fn bit_label(n: QubitCount, index: usize) -> String {
    (1..=n.get())
        .map(|i| if index & n.mask(i) != 0 { '1' } else { '0' })
        .collect()
}

/// Basis ket `|bits⟩` tagged with its popcount.
pub fn computational_state(n: QubitCount, bits: &str) -> Result<StateVector> {
    let idx = bit_index(n, bits)?;
    let mut amps = CVector::zeros(n.dim());
    amps[idx] = C64::from(1.0);
    Ok(StateVector { amplitudes: amps, excitation: Some(idx.count_ones() as usize) })
}

/// Dense square operator, optionally certified Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    hermitian: bool,
}

/// Hermiticity tolerance for [`Operator::hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, hermitian: false })
    }

    /// Construct and certify Hermiticity to [`HERMITIAN_TOL`].
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let residual = hermiticity_residual(&op.matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Operator { matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector::new(&self.matrix * &state.amplitudes)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator {
            matrix: crate::linalg::commutator(&self.matrix, &other.matrix),
            hermitian: false,
        }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// Single-qubit spin operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinKind {
    Plus,
    Minus,
    Z,
}

/// `σ_{i,kind}` acting on qubit `i` (1-based), identity elsewhere.
pub fn single_qubit_op(n: QubitCount, i: usize, kind: SpinKind) -> Result<Operator> {
    if i == 0 || i > n.get() {
        return Err(Error::QubitIndex { index: i, n: n.get() });
    }
    let dim = n.dim();
    let mask = n.mask(i);
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let excited = idx & mask != 0;
        match kind {
            SpinKind::Z => m[(idx, idx)] = C64::from(if excited { 1.0 } else { -1.0 }),
            SpinKind::Minus if excited => m[(idx ^ mask, idx)] = C64::from(1.0),
            SpinKind::Plus if !excited => m[(idx | mask, idx)] = C64::from(1.0),
            _ => {}
        }
    }
    let hermitian = kind == SpinKind::Z;
    Ok(Operator { matrix: m, hermitian })
}

/// Collective operator kinds: `J = Σσ₋`, `J† = Σσ₊`, `J_z = Σσ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collective {
    J,
    Jdag,
    Jz,
}

pub fn collective_op(n: QubitCount, kind: Collective) -> Operator {
    let dim = n.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        for i in 1..=n.get() {
            let mask = n.mask(i);
            let excited = idx & mask != 0;
            match kind {
                Collective::Jz => m[(idx, idx)] += C64::from(if excited { 1.0 } else { -1.0 }),
                Collective::J if excited => m[(idx ^ mask, idx)] += C64::from(1.0),
                Collective::Jdag if !excited => m[(idx | mask, idx)] += C64::from(1.0),
                _ => {}
            }
        }
    }
    Operator { matrix: m, hermitian: kind == Collective::Jz }
}

/// Residual of `[J_z, op]` (largest entry).
pub fn weight_breaking(n: QubitCount, op: &CMatrix) -> f64 {
    let dim = n.dim();
    // J_z is diagonal with entry 2·popcount − n.
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let dw = r.count_ones() as f64 - c.count_ones() as f64;
            worst = worst.max((op[(r, c)] * (2.0 * dw)).norm());
        }
    }
    worst
}

/// The `J_z` eigenspace with `k` excitations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSector {
    n: QubitCount,
    k: usize,
    basis_indices: Vec<usize>,
}

impl WeightSector {
    pub fn n(&self) -> QubitCount {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis_indices(&self) -> &[usize] {
        &self.basis_indices
    }

    pub fn dim(&self) -> usize {
        self.basis_indices.len()
    }

    /// `J_z` eigenvalue `-(n - 2k)`.
    pub fn weight(&self) -> i64 {
        2 * self.k as i64 - self.n.get() as i64
    }

    /// Isometry `2^n × dim` whose columns are the sector's basis kets.
    pub fn isometry(&self) -> CMatrix {
        let mut p = CMatrix::zeros(self.n.dim(), self.dim());
        for (col, &idx) in self.basis_indices.iter().enumerate() {
            p[(idx, col)] = C64::from(1.0);
        }
        p
    }

    /// Block `⟨row sector| op |self⟩`.
    pub fn block(&self, op: &CMatrix, rows: &WeightSector) -> CMatrix {
        CMatrix::from_fn(rows.dim(), self.dim(), |r, c| {
            op[(rows.basis_indices[r], self.basis_indices[c])]
        })
    }

    /// Restriction `P† op P` of an operator to this sector.
    pub fn restrict(&self, op: &CMatrix) -> CMatrix {
        self.block(op, self)
    }

    /// Sector coordinates of a full-space vector.
    pub fn coordinates(&self, v: &CVector) -> CVector {
        CVector::from_iterator(self.dim(), self.basis_indices.iter().map(|&i| v[i]))
    }

    /// Full-space vector from sector coordinates.
    pub fn embed(&self, coords: &CVector) -> CVector {
        let mut v = CVector::zeros(self.n.dim());
        for (c, &idx) in self.basis_indices.iter().enumerate() {
            v[idx] = coords[c];
        }
        v
    }

    /// Whether `v` vanishes outside this sector (to `tol`).
    pub fn supports(&self, v: &CVector, tol: f64) -> bool {
        v.iter()
            .enumerate()
            .all(|(idx, a)| idx.count_ones() as usize == self.k || a.norm() <= tol)
    }
}

/// All basis kets with exactly `k` excitations, in increasing index order.
pub fn weight_sector(n: QubitCount, k: usize) -> Result<WeightSector> {
    if k > n.get() {
        return Err(Error::Excitation { k, n: n.get() });
    }
    let basis_indices = (0..n.dim()).filter(|i| i.count_ones() as usize == k).collect();
    Ok(WeightSector { n, k, basis_indices })
}

/// Entrywise comparison helper used by tests and checks.
pub fn operators_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs(&(a - b)) <= tol
}
