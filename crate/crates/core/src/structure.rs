//! Decoherence-free structure of the collective jump operator.
//!
//! `V(k)` is the kernel of `J` inside the weight sector `W(k)`: the lowest
//! weight vectors of the su(2) towers that start at `k` excitations. A
//! completely decoherence-free subspace (CDFS) is the largest `W ⊆ V(k)`
//! with `H_S·W ⊆ W`. It is computed as the joint kernel of `J H_S^m`,
//! `m = 0, 1, …`, by growing the row space of that stack one power at a
//! time until it stops growing.

use std::collections::BTreeMap;
use std::fmt;

use crate::encodings::named_basis;
use crate::linalg::{self, column_space_abs, hermitian_norm, null_space, null_space_abs, RANK_TOL};
use crate::qubit_space::{
    collective_op, weight_breaking, weight_sector, Collective, Operator, QubitCount, StateVector,
    WeightSector,
};
use crate::{CMatrix, CVector, Error, Result, C64};

/// `C(n, k)`, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `dim V(k) = C(n,k) - C(n,k-1)`, or 0 when that difference is not positive.
pub fn df_dimension(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Err(Error::Excitation { k, n });
    }
    let (n64, k64) = (n as u64, k as u64);
    let overflow = || Error::Overflow(format!("C({n}, {k})"));
    let upper = binomial(n64, k64).ok_or_else(overflow)?;
    let lower = if k == 0 { 0 } else { binomial(n64, k64 - 1).ok_or_else(overflow)? };
    Ok(upper.saturating_sub(lower))
}

/// `n! / ((n/2 + 1)! (n/2)!)`, the Catalan number `C_{n/2}`.
pub fn strong_collective_dimension(n: usize) -> Result<u128> {
    if !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("strong-collective dimension needs even n, got {n}")));
    }
    df_dimension(n, n / 2)
}

/// Orthonormal states spanning a subspace of one weight sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    vectors: Vec<StateVector>,
    sector: WeightSector,
}

impl SubspaceBasis {
    fn from_coordinates(sector: WeightSector, coords: Vec<CVector>) -> Self {
        let vectors = coords.iter().map(|c| StateVector::new(sector.embed(c))).collect();
        Self { vectors, sector }
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn sector(&self) -> &WeightSector {
        &self.sector
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Full-space vectors as columns.
    pub fn columns(&self) -> CMatrix {
        let dim = self.sector.n().dim();
        if self.vectors.is_empty() {
            return CMatrix::zeros(dim, 0);
        }
        let cols: Vec<CVector> = self.vectors.iter().map(|v| v.amplitudes().clone()).collect();
        CMatrix::from_columns(&cols)
    }

    /// Sector coordinates as columns.
    pub fn coordinates(&self) -> CMatrix {
        if self.vectors.is_empty() {
            return CMatrix::zeros(self.sector.dim(), 0);
        }
        let cols: Vec<CVector> =
            self.vectors.iter().map(|v| self.sector.coordinates(v.amplitudes())).collect();
        CMatrix::from_columns(&cols)
    }

    /// Squared norm of the projection of `state` onto the subspace.
    pub fn weight_of(&self, state: &StateVector) -> f64 {
        self.vectors.iter().map(|v| v.overlap(state)).sum()
    }

    /// Chordal distance to another basis (see [`linalg::subspace_distance`]).
    pub fn distance(&self, other: &SubspaceBasis) -> f64 {
        linalg::subspace_distance(&self.columns(), &other.columns())
    }
}

/// `J` as a map `W(k) → W(k-1)` in sector coordinates. Empty for `k = 0`.
fn lowering_block(n: QubitCount, k: usize) -> Result<CMatrix> {
    let from = weight_sector(n, k)?;
    if k == 0 {
        return Ok(CMatrix::zeros(0, from.dim()));
    }
    let to = weight_sector(n, k - 1)?;
    let mut block = CMatrix::zeros(to.dim(), from.dim());
    let position: BTreeMap<usize, usize> =
        to.basis_indices().iter().enumerate().map(|(r, &i)| (i, r)).collect();
    for (c, &idx) in from.basis_indices().iter().enumerate() {
        for q in 0..n.get() {
            let bit = 1usize << q;
            if idx & bit != 0 {
                block[(position[&(idx ^ bit)], c)] += C64::from(1.0);
            }
        }
    }
    Ok(block)
}

/// Deterministic basis of a sector subspace given in coordinates.
///
/// Named states (n = 3, 4) are tried first, in order of their overlap with
/// the subspace; any remaining directions come from computational kets by
/// column pivoting.
fn canonical_basis(sector: &WeightSector, span: &CMatrix) -> Vec<CVector> {
    let target = span.ncols();
    if target == 0 {
        return Vec::new();
    }
    let mut chosen = Vec::with_capacity(target);
    if let Some(named) = named_basis(sector.n().get()) {
        let cands: Vec<CVector> = named
            .in_sector(sector.k())
            .iter()
            .map(|(_, s)| sector.coordinates(s.amplitudes()))
            .collect();
        if !cands.is_empty() {
            chosen = linalg::pivoted_basis(span, &CMatrix::from_columns(&cands), 1e-8);
        }
    }
    if chosen.len() < target {
        let rest = if chosen.is_empty() {
            span.clone()
        } else {
            let taken = CMatrix::from_columns(&chosen);
            span * null_space_abs(&(taken.adjoint() * span), 1e-8)
        };
        let extra = linalg::pivoted_basis(&rest, &CMatrix::identity(sector.dim(), sector.dim()), 1e-12);
        chosen.extend(extra);
    }
    chosen
}

/// Orthonormal basis of `V(k) = ker J ∩ W(k)`.
pub fn df_subspace(n: QubitCount, k: usize) -> Result<SubspaceBasis> {
    let sector = weight_sector(n, k)?;
    let kernel = null_space(&lowering_block(n, k)?, RANK_TOL);
    let coords = canonical_basis(&sector, &kernel);
    Ok(SubspaceBasis::from_coordinates(sector, coords))
}

/// Part of `outer` orthogonal to `inner`; both must live in the same sector.
pub fn remainder(outer: &SubspaceBasis, inner: &SubspaceBasis) -> Result<SubspaceBasis> {
    if outer.sector != inner.sector {
        return Err(Error::Dimension("subspaces lie in different weight sectors".into()));
    }
    let o = outer.coordinates();
    let rest = if inner.is_empty() {
        o
    } else {
        let keep = null_space_abs(&(inner.coordinates().adjoint() * &o), 1e-8);
        if keep.ncols() == 0 {
            CMatrix::zeros(o.nrows(), 0)
        } else {
            &o * keep
        }
    };
    let coords = canonical_basis(&outer.sector, &rest);
    Ok(SubspaceBasis::from_coordinates(outer.sector.clone(), coords))
}

/// Total spin of an irrep, stored as `2J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(twice: u32) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `2J + 1`.
    pub fn multiplet_size(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// One su(2) irrep: a lowest-weight vector and its `J†` ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepTower {
    pub spin: Spin,
    /// `[v, J†v/‖·‖, (J†)²v/‖·‖, …]`, starting at the lowest weight.
    pub ladder: Vec<StateVector>,
}

impl IrrepTower {
    pub fn lowest_weight(&self) -> &StateVector {
        &self.ladder[0]
    }
}

/// Largest register accepted by [`irrep_decompose`].
pub const MAX_DECOMPOSE_QUBITS: usize = 8;

/// Split the register into su(2) towers, highest spin first.
pub fn irrep_decompose(n: QubitCount) -> Result<Vec<IrrepTower>> {
    if n.get() > MAX_DECOMPOSE_QUBITS {
        return Err(Error::QubitCount { n: n.get(), max: MAX_DECOMPOSE_QUBITS });
    }
    let raise = collective_op(n, Collective::Jdag);
    let mut towers = Vec::new();
    for k in 0..=n.get() / 2 {
        let twice = (n.get() - 2 * k) as u32;
        for v in df_subspace(n, k)?.vectors() {
            let mut ladder = vec![v.clone()];
            for _ in 0..twice {
                let next = raise.apply(ladder.last().expect("nonempty"));
                ladder.push(StateVector::normalized(next.into_amplitudes())?);
            }
            towers.push(IrrepTower { spin: Spin(twice), ladder });
        }
    }
    Ok(towers)
}

/// Number of towers per spin.
pub fn spin_multiplicities(towers: &[IrrepTower]) -> BTreeMap<Spin, usize> {
    let mut counts = BTreeMap::new();
    for t in towers {
        *counts.entry(t.spin).or_insert(0) += 1;
    }
    counts
}

/// Completely decoherence-free subspace inside `V(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfsResult {
    pub basis: SubspaceBasis,
    /// Powers of `H_S` (or refinement passes, for the fixpoint route) taken
    /// before the construction stopped changing.
    pub iterations: usize,
}

fn check_system_hamiltonian(n: QubitCount, h: &Operator) -> Result<()> {
    if h.dim() != n.dim() {
        return Err(Error::Dimension(format!("H_S has dimension {}, expected {}", h.dim(), n.dim())));
    }
    let residual = linalg::hermiticity_residual(h.matrix());
    if residual > crate::qubit_space::HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let residual = weight_breaking(n, h.matrix());
    if residual > 1e-12 * (1.0 + linalg::max_abs(h.matrix())) {
        return Err(Error::BreaksWeight { residual });
    }
    Ok(())
}

/// Absolute cutoff for "no new direction" relative to the Hamiltonian scale.
fn growth_cutoff(h_block: &CMatrix) -> f64 {
    RANK_TOL * hermitian_norm(h_block).max(1.0)
}

/// Largest `W ⊆ V(k)` with `H_S W ⊆ W`, as the joint kernel of `J H_S^m`.
pub fn cdfs(n: QubitCount, k: usize, h: &Operator) -> Result<CdfsResult> {
    check_system_hamiltonian(n, h)?;
    let sector = weight_sector(n, k)?;
    let h_block = sector.restrict(h.matrix());
    let lower = lowering_block(n, k)?;
    let d = sector.dim();

    // Row space of [J; J H; J H²; …], kept as orthonormal columns of its adjoint.
    let mut rows = column_space_abs(&lower.adjoint(), RANK_TOL * linalg::max_abs(&lower).max(1.0));
    let mut frontier = rows.clone();
    let cutoff = growth_cutoff(&h_block);
    let mut iterations = 0;
    while rows.ncols() < d && frontier.ncols() > 0 {
        iterations += 1;
        let pushed = &h_block * &frontier;
        let residual = &pushed - &rows * (rows.adjoint() * &pushed);
        // second pass keeps the basis orthonormal to working precision
        let residual = &residual - &rows * (rows.adjoint() * &residual);
        frontier = column_space_abs(&residual, cutoff);
        if frontier.ncols() == 0 {
            break;
        }
        let mut cols: Vec<CVector> = rows.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(frontier.column_iter().map(|c| c.into_owned()));
        rows = CMatrix::from_columns(&cols);
    }
    let kernel = if rows.ncols() == 0 {
        CMatrix::identity(d, d)
    } else {
        null_space_abs(&rows.adjoint(), 1e-8)
    };
    let coords = canonical_basis(&sector, &kernel);
    Ok(CdfsResult { basis: SubspaceBasis::from_coordinates(sector, coords), iterations })
}

/// Reference construction: `W₀ = V(k)`, `W_{j+1} = {v ∈ W_j : H_S v ∈ W_j}`.
pub fn cdfs_fixpoint(n: QubitCount, k: usize, h: &Operator) -> Result<CdfsResult> {
    check_system_hamiltonian(n, h)?;
    let sector = weight_sector(n, k)?;
    let h_block = sector.restrict(h.matrix());
    let mut w = null_space(&lowering_block(n, k)?, RANK_TOL);
    let cutoff = growth_cutoff(&h_block);
    let mut iterations = 0;
    while w.ncols() > 0 {
        iterations += 1;
        let hw = &h_block * &w;
        let escape = &hw - &w * (w.adjoint() * &hw);
        let keep = null_space_abs(&escape, cutoff);
        if keep.ncols() == w.ncols() {
            break;
        }
        w = if keep.ncols() == 0 { CMatrix::zeros(w.nrows(), 0) } else { &w * keep };
    }
    let coords = canonical_basis(&sector, &w);
    Ok(CdfsResult { basis: SubspaceBasis::from_coordinates(sector, coords), iterations })
}

fn qubits_for(dim: usize) -> Result<QubitCount> {
    if !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    QubitCount::new(dim.trailing_zeros() as usize)
}

/// Tolerance on `‖J k‖` for unit Krylov vectors `k` in [`verify_cdf_state`].
pub const CDF_STATE_TOL: f64 = 1e-9;

/// Whether `J H_S^m x = 0` for every `m`, checked on an orthonormal Krylov
/// basis of `span{x, H_S x, H_S² x, …}`.
pub fn verify_cdf_state(x: &StateVector, h: &Operator) -> Result<bool> {
    if !x.is_normalized() {
        return Err(Error::NotNormalized { norm: x.norm() });
    }
    let n = qubits_for(x.dim())?;
    if h.dim() != x.dim() {
        return Err(Error::Dimension("state and H_S differ in dimension".into()));
    }
    let j = collective_op(n, Collective::J);
    let cutoff = RANK_TOL * hermitian_norm(h.matrix()).max(1.0);
    let mut krylov: Vec<CVector> = vec![x.amplitudes().clone()];
    loop {
        let last = krylov.last().expect("nonempty");
        if (j.matrix() * last).norm() > CDF_STATE_TOL {
            return Ok(false);
        }
        if krylov.len() == x.dim() {
            return Ok(true);
        }
        let mut next = h.matrix() * last;
        for _ in 0..2 {
            for q in &krylov {
                let c = q.dotc(&next);
                next -= q * c;
            }
        }
        let norm = next.norm();
        if norm <= cutoff {
            return Ok(true);
        }
        krylov.push(next / C64::from(norm));
    }
}

/// `max_t ‖J e^{-i H_S t} x‖` over `samples` equally spaced times in
/// `[0, 10/‖H_S‖]` (or `[0, 10]` when `H_S = 0`).
pub fn sampled_leakage(x: &StateVector, h: &Operator, samples: usize) -> Result<f64> {
    let n = qubits_for(x.dim())?;
    let j = collective_op(n, Collective::J);
    let norm = hermitian_norm(h.matrix());
    let horizon = if norm > 0.0 { 10.0 / norm } else { 10.0 };
    let (values, vectors) = linalg::hermitian_eigen(h.matrix());
    let coeffs = vectors.adjoint() * x.amplitudes();
    let steps = samples.max(2) - 1;
    let mut worst = 0.0f64;
    for s in 0..=steps {
        let t = horizon * s as f64 / steps as f64;
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&values).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        worst = worst.max((j.matrix() * (&vectors * phased)).norm());
    }
    Ok(worst)
}
