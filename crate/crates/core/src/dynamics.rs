//! Lindblad dynamics for collectively coupled qubits.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = -i[H_S, ρ] + Σ_αβ a_αβ (S_β ρ S_α† - ½{S_α† S_β, ρ}),
//! H_S   = Σ_αβ b_αβ S_α† S_β,        S_α = σ_α₋.
//! ```
//!
//! With `a_αβ ≡ a` the dissipator collapses to `γ(2JρJ† - {J†J, ρ})` with
//! `γ = a/2`, and `λ = N·a` is the only nonzero eigenvalue of `(a_αβ)`.
//!
//! Superoperators act on row-major vectorized matrices, so
//! `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use std::io::Write;

use crate::linalg::{self, hermitian_eigen, hermitian_eigenvalues, hermiticity_residual, kron};
use crate::qubit_space::{collective_op, weight_sector, Collective, Operator, QubitCount, StateVector};
use crate::report::format_significant;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Hermiticity tolerance for coupling matrices.
pub const COUPLING_HERMITIAN_TOL: f64 = 1e-12;

/// The coupling matrices `(a_αβ)` and `(b_αβ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    a: CMatrix,
    b: CMatrix,
    lambda: Option<f64>,
}

impl CouplingModel {
    /// Validate and wrap `a` (rates) and `b` (frequencies).
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() || a.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "coupling matrices must be square and equal in size, got {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        for m in [&a, &b] {
            let residual = hermiticity_residual(m);
            if residual > COUPLING_HERMITIAN_TOL {
                return Err(Error::NotHermitian { residual });
            }
        }
        let scale = linalg::max_abs(&a).max(1.0);
        let lowest = hermitian_eigenvalues(&a).first().copied().unwrap_or(0.0);
        if lowest < -1e-12 * scale {
            return Err(Error::Unphysical(format!(
                "rate matrix has negative eigenvalue {lowest:.3e}"
            )));
        }
        let lambda = uniform_value(&a).map(|v| v * a.nrows() as f64);
        Ok(Self { a, b, lambda })
    }

    /// Collective decoherence: `a = (λ/N)·X` with `X` the all-ones matrix.
    pub fn collective(n: QubitCount, lambda: f64, b: CMatrix) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Invalid(format!("λ must be finite and nonnegative, got {lambda}")));
        }
        let size = n.get();
        let a = CMatrix::from_element(size, size, C64::from(lambda / size as f64));
        let mut model = Self::new(a, b)?;
        model.lambda = Some(lambda);
        Ok(model)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    /// Number of qubits the couplings describe.
    pub fn qubits(&self) -> usize {
        self.a.nrows()
    }

    /// `N·a` when every entry of `(a_αβ)` equals the same real `a`.
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Rate `γ` of the collapsed form `γ(2JρJ† - {J†J, ρ})`, i.e. `λ/(2N)`.
    pub fn collapsed_rate(&self) -> Option<f64> {
        self.lambda.map(|l| l / (2.0 * self.qubits() as f64))
    }

    /// Same `b`, no dissipation.
    pub fn without_dissipation(&self) -> Self {
        let size = self.qubits();
        Self { a: CMatrix::zeros(size, size), b: self.b.clone(), lambda: Some(0.0) }
    }

    /// Diagonal jump operators `(γ_k, L_k)` with `a = Σ γ_k u_k u_k†` and
    /// `L_k = Σ_β conj(u_k[β]) S_β`. Zero rates are dropped.
    pub fn jump_operators(&self, n: QubitCount) -> Result<Vec<(f64, CMatrix)>> {
        self.check_size(n)?;
        let lowering = lowering_ops(n);
        let (rates, vectors) = hermitian_eigen(&self.a);
        let cutoff = 1e-14 * linalg::max_abs(&self.a);
        let mut jumps = Vec::new();
        for (k, &rate) in rates.iter().enumerate() {
            if rate <= cutoff {
                continue;
            }
            let mut l = CMatrix::zeros(n.dim(), n.dim());
            for (beta, s) in lowering.iter().enumerate() {
                l += s * vectors[(beta, k)].conj();
            }
            jumps.push((rate, l));
        }
        Ok(jumps)
    }

    fn check_size(&self, n: QubitCount) -> Result<()> {
        if self.qubits() != n.get() {
            return Err(Error::Dimension(format!(
                "couplings describe {} qubits, register has {n}",
                self.qubits()
            )));
        }
        Ok(())
    }
}

fn uniform_value(a: &CMatrix) -> Option<f64> {
    let first = a[(0, 0)];
    if first.im.abs() > COUPLING_HERMITIAN_TOL {
        return None;
    }
    a.iter().all(|z| (z - first).norm() <= COUPLING_HERMITIAN_TOL).then_some(first.re)
}

/// `σ_α₋` for `α = 1..=N` as dense matrices.
fn lowering_ops(n: QubitCount) -> Vec<CMatrix> {
    let size = n.get();
    (1..=size)
        .map(|alpha| {
            let mask = 1usize << (size - alpha);
            let mut m = CMatrix::zeros(n.dim(), n.dim());
            for idx in (0..n.dim()).filter(|idx| idx & mask != 0) {
                m[(idx ^ mask, idx)] = C64::from(1.0);
            }
            m
        })
        .collect()
}

/// `H_S = Σ b_αβ σ_α₊ σ_β₋`, built directly on basis kets.
pub fn system_hamiltonian(model: &CouplingModel, n: QubitCount) -> Result<Operator> {
    model.check_size(n)?;
    let size = n.get();
    let mask = |i: usize| 1usize << (size - 1 - i);
    let mut h = CMatrix::zeros(n.dim(), n.dim());
    for idx in 0..n.dim() {
        for beta in (0..size).filter(|&beta| idx & mask(beta) != 0) {
            let lowered = idx ^ mask(beta);
            for alpha in (0..size).filter(|&alpha| lowered & mask(alpha) == 0) {
                h[(lowered | mask(alpha), idx)] += model.b[(alpha, beta)];
            }
        }
    }
    Operator::hermitian(h)
}

/// Hermiticity tolerance for [`DensityMatrix`].
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted by [`DensityMatrix::new`].
pub const POSITIVITY_TOL: f64 = -1e-8;

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Hermitian, real trace at most one, positive semidefinite.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > DENSITY_HERMITIAN_TOL {
            return Err(Error::Unphysical(format!("not Hermitian (residual {residual:.3e})")));
        }
        let trace = matrix.trace();
        if trace.im.abs() > DENSITY_HERMITIAN_TOL || trace.re > 1.0 + 1e-10 {
            return Err(Error::Unphysical(format!("trace {trace} exceeds 1 or is not real")));
        }
        let rho = Self { matrix };
        let lowest = rho.min_eigenvalue();
        if lowest < POSITIVITY_TOL {
            return Err(Error::Unphysical(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized state.
    pub fn pure(state: &StateVector) -> Result<Self> {
        if !state.is_normalized() {
            return Err(Error::NotNormalized { norm: state.norm() });
        }
        let v = state.amplitudes();
        Ok(Self { matrix: v * v.adjoint() })
    }

    fn unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
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

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.norm_squared()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut herm = &self.matrix + self.matrix.adjoint();
        herm *= C64::from(0.5);
        hermitian_eigenvalues(&herm).first().copied().unwrap_or(0.0)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn population(&self, state: &StateVector) -> f64 {
        let v = state.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }
}

fn qubits_of(dim: usize) -> Result<QubitCount> {
    if !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    QubitCount::new(dim.trailing_zeros() as usize)
}

/// `Σ_αβ a_αβ (S_β ρ S_α† - ½{S_α† S_β, ρ})`, summed term by term.
pub fn dissipator(model: &CouplingModel, rho: &DensityMatrix) -> Result<CMatrix> {
    let n = qubits_of(rho.dim())?;
    model.check_size(n)?;
    let s = lowering_ops(n);
    let rho = rho.matrix();
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (alpha, s_alpha) in s.iter().enumerate() {
        let s_alpha_dag = s_alpha.adjoint();
        for (beta, s_beta) in s.iter().enumerate() {
            let coeff = model.a[(alpha, beta)];
            if coeff == C64::from(0.0) {
                continue;
            }
            let product = &s_alpha_dag * s_beta;
            let term = s_beta * rho * &s_alpha_dag
                - (&product * rho + rho * &product) * C64::from(0.5);
            out += term * coeff;
        }
    }
    Ok(out)
}

/// `γ(2JρJ† - {J†J, ρ})`.
pub fn collapsed_dissipator(rate: f64, n: QubitCount, rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.dim() != n.dim() {
        return Err(Error::Dimension(format!("ρ has dimension {}, expected {}", rho.dim(), n.dim())));
    }
    let j = collective_op(n, Collective::J).into_matrix();
    let jd = j.adjoint();
    let jdj = &jd * &j;
    let rho = rho.matrix();
    let out = (&j * rho * &jd) * C64::from(2.0) - &jdj * rho - rho * &jdj;
    Ok(out * C64::from(rate))
}

/// Largest register for which the full `4^N × 4^N` Liouvillian is built.
pub const MAX_FULL_LIOUVILLIAN_QUBITS: usize = 5;

/// Liouvillian on row-major vectorized `ρ`.
///
/// With `sector = Some((k_ket, k_bra))` only the block `W(k_ket) ρ W(k_bra)`
/// is kept: terms that leave the block are dropped, so the block evolution
/// loses trace.
pub fn liouvillian_matrix(
    model: &CouplingModel,
    n: QubitCount,
    sector: Option<(usize, usize)>,
) -> Result<CMatrix> {
    let h = system_hamiltonian(model, n)?.into_matrix();
    let jumps = model.jump_operators(n)?;
    let (left, right) = match sector {
        Some((k1, k2)) => (weight_sector(n, k1)?.isometry(), weight_sector(n, k2)?.isometry()),
        None => {
            if n.get() > MAX_FULL_LIOUVILLIAN_QUBITS {
                return Err(Error::Invalid(format!(
                    "full Liouvillian limited to {MAX_FULL_LIOUVILLIAN_QUBITS} qubits, got {n}"
                )));
            }
            (CMatrix::identity(n.dim(), n.dim()), CMatrix::identity(n.dim(), n.dim()))
        }
    };
    let restrict = |p: &CMatrix, m: &CMatrix| p.adjoint() * m * p;
    let (d1, d2) = (left.ncols(), right.ncols());
    let (id1, id2) = (CMatrix::identity(d1, d1), CMatrix::identity(d2, d2));
    let minus_i = C64::new(0.0, -1.0);

    let h1 = restrict(&left, &h);
    let h2 = restrict(&right, &h);
    let mut m = (kron(&h1, &id2) - kron(&id1, &h2.transpose())) * minus_i;
    for (rate, l) in &jumps {
        let k = l.adjoint() * l;
        let (k1, k2) = (restrict(&left, &k), restrict(&right, &k));
        let (l1, l2) = (restrict(&left, l), restrict(&right, l));
        let term = kron(&l1, &l2.map(|z| z.conj()))
            - (kron(&k1, &id2) + kron(&id1, &k2.transpose())) * C64::from(0.5);
        m += term * C64::from(*rate);
    }
    Ok(m)
}

/// Orthonormal basis (as columns) of the kernel of a Liouvillian.
pub fn steady_states(l: &CMatrix) -> Result<CMatrix> {
    if !l.is_square() {
        return Err(Error::Dimension(format!("Liouvillian is {}x{}", l.nrows(), l.ncols())));
    }
    Ok(linalg::null_space(l, linalg::RANK_TOL))
}

/// Unvectorize a row-major `d²` vector into a `d × d` matrix.
pub fn unvec(v: &CVector) -> Result<CMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::Dimension(format!("{} is not a square length", v.len())));
    }
    Ok(CMatrix::from_row_slice(d, d, v.as_slice()))
}

/// Row-major vectorization.
pub fn vec_row_major(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Right-hand side of the master equation, prepared once per model.
#[derive(Debug, Clone)]
pub struct Generator {
    /// `-iH - ½Σγ L†L`.
    effective: CMatrix,
    jumps: Vec<(f64, CMatrix, CMatrix)>,
    scale: f64,
}

impl Generator {
    pub fn new(model: &CouplingModel, n: QubitCount) -> Result<Self> {
        let h = system_hamiltonian(model, n)?.into_matrix();
        let jumps = model.jump_operators(n)?;
        let mut k = CMatrix::zeros(n.dim(), n.dim());
        for (rate, l) in &jumps {
            k += (l.adjoint() * l) * C64::from(*rate);
        }
        let effective = &h * C64::new(0.0, -1.0) - &k * C64::from(0.5);
        // H_S and K both preserve weight, so their spectra come sector by sector.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut k_norm = 0.0f64;
        for excitations in 0..=n.get() {
            let sector = weight_sector(n, excitations)?;
            let values = hermitian_eigenvalues(&sector.restrict(&h));
            lo = lo.min(values[0]);
            hi = hi.max(values[values.len() - 1]);
            let kv = hermitian_eigenvalues(&sector.restrict(&k));
            k_norm = k_norm.max(kv.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
        }
        let jumps = jumps.into_iter().map(|(r, l)| {
            let ld = l.adjoint();
            (r, l, ld)
        });
        Ok(Self { effective, jumps: jumps.collect(), scale: (hi - lo) + 2.0 * k_norm })
    }

    /// Upper bound on the magnitude of the generator's eigenvalues.
    pub fn spectral_scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let g_rho = &self.effective * rho;
        let mut out = &g_rho + g_rho.adjoint();
        for (rate, l, ld) in &self.jumps {
            out += (l * rho * ld) * C64::from(*rate);
        }
        out
    }

    fn rk4_step(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        let h = C64::from(dt);
        let half = C64::from(dt / 2.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * h));
        rho + (k1 + (k2 + k3) * C64::from(2.0) + k4) * (h / 6.0)
    }
}

/// Largest accepted `dt · spectral_scale`.
pub const STEP_LIMIT: f64 = 0.1;

/// Time series of states with derived scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// `Tr[ρ(0) ρ(t)]`.
    pub fidelity: Vec<f64>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// CSV with header `t,fidelity,trace,purity`, 15 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,fidelity,trace,purity")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                format_significant(self.times[i], 15),
                format_significant(self.fidelity[i], 15),
                format_significant(self.trace[i], 15),
                format_significant(self.purity[i], 15),
            )?;
        }
        Ok(())
    }
}

/// Number of steps and the step actually used to reach `t_final`.
fn step_plan(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::Invalid(format!("t_final must be positive, got {t_final}")));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    let ratio = t_final / dt;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    } as usize;
    let steps = steps.max(1);
    Ok((steps, t_final / steps as f64))
}

/// Integrate from `rho0` to `t_final` with fixed-step RK4.
///
/// The step is shrunk, if needed, so that a whole number of steps lands on
/// `t_final`. Fails with [`Error::StepTooLarge`] when `dt` times the
/// generator's spectral scale exceeds [`STEP_LIMIT`].
pub fn evolve(rho0: &DensityMatrix, model: &CouplingModel, t_final: f64, dt: f64) -> Result<Trajectory> {
    let n = qubits_of(rho0.dim())?;
    let generator = Generator::new(model, n)?;
    let product = dt * generator.spectral_scale();
    if product > STEP_LIMIT {
        return Err(Error::StepTooLarge { dt, product, limit: STEP_LIMIT });
    }
    let (steps, h) = step_plan(t_final, dt)?;
    let initial = rho0.matrix().clone();
    let record = |rho: &CMatrix| {
        let fidelity = initial.iter().zip(rho.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        (fidelity, rho.trace().re, rho.norm_squared())
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        fidelity: Vec::with_capacity(steps + 1),
        trace: Vec::with_capacity(steps + 1),
        purity: Vec::with_capacity(steps + 1),
    };
    let mut rho = initial.clone();
    for step in 0..=steps {
        if step > 0 {
            rho = generator.rk4_step(&rho, h);
        }
        let (f, tr, p) = record(&rho);
        traj.times.push(if step == steps { t_final } else { h * step as f64 });
        traj.fidelity.push(f);
        traj.trace.push(tr);
        traj.purity.push(p);
        traj.states.push(DensityMatrix::unchecked(rho.clone()));
    }
    Ok(traj)
}

/// Frobenius distance between the final states obtained with `dt` and `dt/2`.
pub fn step_halving_error(rho0: &DensityMatrix, model: &CouplingModel, t_final: f64, dt: f64) -> Result<f64> {
    let coarse = evolve(rho0, model, t_final, dt)?;
    let fine = evolve(rho0, model, t_final, dt / 2.0)?;
    Ok((coarse.final_state().matrix() - fine.final_state().matrix()).norm())
}

/// `Tr[ρ_U ρ]`.
pub fn fidelity(rho_u: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if rho_u.dim() != rho.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho_u.dim(), rho.dim())));
    }
    Ok((rho_u.matrix() * rho.matrix()).trace().re)
}

/// `⟨H²⟩ - ⟨H⟩²` in state `psi`.
pub fn energy_variance(psi: &StateVector, h: &Operator) -> Result<f64> {
    if psi.dim() != h.dim() {
        return Err(Error::Dimension(format!("state {} vs operator {}", psi.dim(), h.dim())));
    }
    let v = psi.amplitudes();
    let hv = h.matrix() * v;
    let mean = v.dotc(&hv).re;
    Ok((hv.norm_squared() - mean * mean).max(0.0))
}

/// Variance below which [`tau2`] reports an infinite timescale.
pub const VARIANCE_FLOOR: f64 = 1e-14;

/// `τ₂ = (2 Var H)^(-1/2)`, so that `F(t) ≈ 1 - t²/(2τ₂²)`; `+∞` for
/// eigenstates.
pub fn tau2(psi: &StateVector, h: &Operator) -> Result<f64> {
    let var = energy_variance(psi, h)?;
    Ok(if var < VARIANCE_FLOOR { f64::INFINITY } else { (2.0 * var).sqrt().recip() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{three_qubit_basis, uv_states, RealCouplings};
    use crate::qubit_space::{computational_state, single_qubit_op, SpinKind};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: usize) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn uniform_b(n: usize, value: f64) -> CMatrix {
        CMatrix::from_element(n, n, C64::from(value))
    }

    fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m / tr).unwrap()
    }

    fn singlet() -> StateVector {
        StateVector::from_terms(q(2), &[("01", 1.0), ("10", -1.0)]).unwrap()
    }

    #[test]
    fn hamiltonian_matches_operator_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = q(3);
        let mut b = CMatrix::zeros(3, 3);
        for i in 0..3 {
            b[(i, i)] = C64::from(rng.random_range(-1.0..1.0));
            for j in i + 1..3 {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                b[(i, j)] = z;
                b[(j, i)] = z.conj();
            }
        }
        let model = CouplingModel::new(CMatrix::zeros(3, 3), b.clone()).unwrap();
        let h = system_hamiltonian(&model, n).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        for a in 1..=3 {
            let plus = single_qubit_op(n, a, SpinKind::Plus).unwrap().into_matrix();
            for c in 1..=3 {
                let minus = single_qubit_op(n, c, SpinKind::Minus).unwrap().into_matrix();
                expected += (&plus * &minus) * b[(a - 1, c - 1)];
            }
        }
        assert!(linalg::max_abs(&(h.matrix() - expected)) < 1e-14);
        assert!(crate::qubit_space::weight_breaking(n, h.matrix()) < 1e-14);
    }

    #[test]
    fn uniform_hamiltonian_is_total_spin() {
        let n = q(4);
        let model = CouplingModel::new(CMatrix::zeros(4, 4), uniform_b(4, 0.7)).unwrap();
        let h = system_hamiltonian(&model, n).unwrap();
        let j = collective_op(n, Collective::J).into_matrix();
        let expected = j.adjoint() * &j * C64::from(0.7);
        assert!(linalg::max_abs(&(h.matrix() - expected)) < 1e-14);
        let c = three_qubit_basis().state('c').unwrap().clone();
        let model = CouplingModel::new(CMatrix::zeros(3, 3), uniform_b(3, 0.7)).unwrap();
        let h3 = system_hamiltonian(&model, q(3)).unwrap();
        assert!(h3.apply(&c).norm() < 1e-14);
    }

    #[test]
    fn model_validation() {
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::from(1.0);
        assert!(matches!(CouplingModel::new(bad.clone(), CMatrix::zeros(2, 2)), Err(Error::NotHermitian { .. })));
        assert!(matches!(CouplingModel::new(CMatrix::zeros(2, 2), bad), Err(Error::NotHermitian { .. })));
        assert!(matches!(CouplingModel::new(CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)), Err(Error::Dimension(_))));
        let neg = CMatrix::from_diagonal_element(2, 2, C64::from(-1.0));
        assert!(matches!(CouplingModel::new(neg, CMatrix::zeros(2, 2)), Err(Error::Unphysical(_))));
        let model = CouplingModel::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        assert!(system_hamiltonian(&model, q(3)).is_err());
    }

    #[test]
    fn lambda_is_the_nonzero_eigenvalue() {
        let model = CouplingModel::collective(q(4), 2.0, uniform_b(4, 0.0)).unwrap();
        assert_relative_eq!(model.lambda().unwrap(), 2.0);
        let eig = hermitian_eigenvalues(model.a());
        assert_relative_eq!(eig[3], 2.0, epsilon = 1e-12);
        assert!(eig[..3].iter().all(|v| v.abs() < 1e-12));
        assert_relative_eq!(model.collapsed_rate().unwrap(), 0.25);
        let detected = CouplingModel::new(model.a().clone(), uniform_b(4, 0.0)).unwrap();
        assert_relative_eq!(detected.lambda().unwrap(), 2.0, epsilon = 1e-14);
        assert!(CouplingModel::collective(q(2), -1.0, uniform_b(2, 0.0)).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::from(1.2);
        m[(1, 1)] = C64::from(-0.2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Unphysical(_))));
        let half = DensityMatrix::new(CMatrix::identity(2, 2) * C64::from(0.5)).unwrap();
        assert_relative_eq!(half.purity(), 0.5);
        assert_relative_eq!(half.trace(), 1.0);
        let unnorm = StateVector::new(CVector::from_element(2, C64::from(1.0)));
        assert!(DensityMatrix::pure(&unnorm).is_err());
    }

    #[test]
    fn dissipator_examples() {
        let n = q(3);
        let model = CouplingModel::collective(n, 1.3, uniform_b(3, 0.0)).unwrap();
        let ground = DensityMatrix::pure(&computational_state(n, "000").unwrap()).unwrap();
        assert!(linalg::max_abs(&dissipator(&model, &ground).unwrap()) < 1e-15);

        let basis = three_qubit_basis();
        let c = DensityMatrix::pure(basis.state('c').unwrap()).unwrap();
        assert!(linalg::max_abs(&dissipator(&model, &c).unwrap()) < 1e-15);

        // symmetric one-excitation state: ⟨J†J⟩ = 3, decays at 3a = λ into |000⟩
        let d_state = basis.state('d').unwrap();
        let d = DensityMatrix::pure(d_state).unwrap();
        let out = dissipator(&model, &d).unwrap();
        let rate = d_state.amplitudes().dotc(&(&out * d_state.amplitudes())).re;
        assert_relative_eq!(rate, -1.3, epsilon = 1e-14);
        assert_relative_eq!(out[(0, 0)].re, 1.3, epsilon = 1e-14);
        assert!(out.trace().norm() < 1e-14);
    }

    #[test]
    fn double_sum_equals_collapsed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for nn in 1..=4 {
            let n = q(nn);
            let lambda = rng.random_range(0.1..3.0);
            let model = CouplingModel::collective(n, lambda, uniform_b(nn, 0.0)).unwrap();
            for _ in 0..5 {
                let rho = random_density(&mut rng, n.dim());
                let general = dissipator(&model, &rho).unwrap();
                let collapsed = collapsed_dissipator(model.collapsed_rate().unwrap(), n, &rho).unwrap();
                assert!(linalg::max_abs(&(general - collapsed)) < 1e-12);
            }
        }
    }

    #[test]
    fn generator_matches_literal_master_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = q(3);
        let a = {
            let g = CMatrix::from_fn(3, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            &g * g.adjoint()
        };
        let b = RealCouplings::three(0.2, -0.4, 0.9).to_matrix();
        let model = CouplingModel::new(a, b).unwrap();
        let rho = random_density(&mut rng, 8);
        let h = system_hamiltonian(&model, n).unwrap().into_matrix();
        let expected = (&h * rho.matrix() - rho.matrix() * &h) * C64::new(0.0, -1.0)
            + dissipator(&model, &rho).unwrap();
        let generator = Generator::new(&model, n).unwrap();
        assert!(linalg::max_abs(&(generator.apply(rho.matrix()) - &expected)) < 1e-12);

        let l = liouvillian_matrix(&model, n, None).unwrap();
        let via_l = unvec(&(&l * vec_row_major(rho.matrix()))).unwrap();
        assert!(linalg::max_abs(&(via_l - expected)) < 1e-12);
    }

    #[test]
    fn full_liouvillian_preserves_trace_and_ground_state() {
        let n = q(2);
        let model = CouplingModel::collective(n, 0.8, RealCouplings::from_fn(2, 0.1, |_, _| 0.4).to_matrix()).unwrap();
        let l = liouvillian_matrix(&model, n, None).unwrap();
        // vec(I)† L = 0
        let id = vec_row_major(&CMatrix::identity(4, 4));
        assert!((l.adjoint() * id).norm() < 1e-13);
        let steady = steady_states(&l).unwrap();
        let ground = vec_row_major(&DensityMatrix::pure(&computational_state(n, "00").unwrap()).unwrap().into_matrix());
        let captured = (steady.adjoint() * &ground).norm();
        assert_relative_eq!(captured, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_model_has_zero_liouvillian() {
        let model = CouplingModel::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        let l = liouvillian_matrix(&model, q(2), None).unwrap();
        assert_eq!(linalg::max_abs(&l), 0.0);
        assert!(liouvillian_matrix(&model, q(2), Some((3, 0))).is_err());
    }

    #[test]
    fn sector_determinant_example() {
        let model = CouplingModel::collective(q(3), 1.0, RealCouplings::three(1.0, 2.0, 3.0).to_matrix()).unwrap();
        let m = liouvillian_matrix(&model, q(3), Some((1, 1))).unwrap();
        assert_eq!(m.shape(), (9, 9));
        let det = m.determinant();
        assert_relative_eq!(det.re, -16.0 / 27.0, epsilon = 1e-12);
        assert!(det.im.abs() < 1e-12);
    }

    #[test]
    fn sector_steady_states_follow_degeneracy() {
        let degenerate = CouplingModel::collective(q(3), 1.0, RealCouplings::three(0.5, 1.5, 0.5).to_matrix()).unwrap();
        let m = liouvillian_matrix(&degenerate, q(3), Some((1, 1))).unwrap();
        assert!(steady_states(&m).unwrap().ncols() >= 1);
        let generic = CouplingModel::collective(q(3), 1.0, RealCouplings::three(0.5, 1.5, 1.0).to_matrix()).unwrap();
        let m = liouvillian_matrix(&generic, q(3), Some((1, 1))).unwrap();
        assert_eq!(steady_states(&m).unwrap().ncols(), 0);
    }

    #[test]
    fn singlet_is_frozen() {
        let n = q(2);
        let model = CouplingModel::collective(n, 1.0, uniform_b(2, 0.6)).unwrap();
        let rho0 = DensityMatrix::pure(&singlet()).unwrap();
        let traj = evolve(&rho0, &model, 10.0, 0.01).unwrap();
        assert_eq!(traj.len(), 1001);
        assert!(traj.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-12));
        let h = system_hamiltonian(&model, n).unwrap();
        assert_eq!(tau2(&singlet(), &h).unwrap(), f64::INFINITY);
    }

    #[test]
    fn u_state_survives_case_ii() {
        let n = q(3);
        let model = CouplingModel::collective(n, 0.5, RealCouplings::three(0.4, -0.7, 0.4).to_matrix()).unwrap();
        let (u, _) = uv_states();
        let traj = evolve(&DensityMatrix::pure(&u).unwrap(), &model, 20.0, 0.01).unwrap();
        assert!(traj.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-9));
    }

    #[test]
    fn early_fidelity_curvature_is_tau2() {
        let n = q(3);
        let model = CouplingModel::collective(n, 1.0, RealCouplings::three(0.3, -0.5, 0.8).to_matrix())
            .unwrap()
            .without_dissipation();
        let b = three_qubit_basis().state('b').unwrap().clone();
        let h = system_hamiltonian(&model, n).unwrap();
        let tau = tau2(&b, &h).unwrap();
        let dt = 1e-3;
        let traj = evolve(&DensityMatrix::pure(&b).unwrap(), &model, 2.0 * dt, dt).unwrap();
        // F is even in t for a pure state under unitary flow: F''(0) ≈ 2(F(dt) − 1)/dt²
        let second = 2.0 * (traj.fidelity[1] - 1.0) / (dt * dt);
        assert_relative_eq!(second, -1.0 / (tau * tau), max_relative = 1e-4);
    }

    #[test]
    fn step_guard_and_halving() {
        let n = q(3);
        let model = CouplingModel::collective(n, 1.0, RealCouplings::three(2.0, -1.0, 0.5).to_matrix()).unwrap();
        let rho0 = DensityMatrix::pure(three_qubit_basis().state('b').unwrap()).unwrap();
        assert!(matches!(evolve(&rho0, &model, 1.0, 0.5), Err(Error::StepTooLarge { .. })));
        assert!(step_halving_error(&rho0, &model, 1.0, 0.005).unwrap() < 1e-8);
        assert!(evolve(&rho0, &model, -1.0, 0.001).is_err());
    }

    #[test]
    fn step_plan_lands_on_final_time() {
        assert_eq!(step_plan(1.0, 0.1).unwrap().0, 10);
        let (steps, h) = step_plan(1.0, 0.3).unwrap();
        assert_eq!(steps, 4);
        assert_relative_eq!(h, 0.25);
    }

    #[test]
    fn fidelity_examples() {
        let n = q(2);
        let a = DensityMatrix::pure(&computational_state(n, "01").unwrap()).unwrap();
        let b = DensityMatrix::pure(&computational_state(n, "10").unwrap()).unwrap();
        assert_relative_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let other = DensityMatrix::pure(&computational_state(q(1), "1").unwrap()).unwrap();
        assert!(fidelity(&a, &other).is_err());

        // H diagonal in ρ's eigenbasis: ρ_U(t) = ρ for all t
        let mix = DensityMatrix::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![0.5, 0.3, 0.2, 0.0].into_iter().map(C64::from).collect())),
        )
        .unwrap();
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![1.0, -2.0, 0.5, 3.0].into_iter().map(C64::from).collect()));
        for t in [0.0, 0.7, 3.1] {
            let u = linalg::unitary_propagator(&h, t);
            let rho_u = DensityMatrix::new(&u * mix.matrix() * u.adjoint()).unwrap();
            assert_relative_eq!(fidelity(&rho_u, &mix).unwrap(), mix.purity(), epsilon = 1e-14);
        }
    }

    #[test]
    fn csv_layout() {
        let model = CouplingModel::collective(q(2), 1.0, uniform_b(2, 0.0)).unwrap();
        let rho0 = DensityMatrix::pure(&singlet()).unwrap();
        let traj = evolve(&rho0, &model, 0.02, 0.01).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,fidelity,trace,purity");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0.01,1,1,1");
    }
}
