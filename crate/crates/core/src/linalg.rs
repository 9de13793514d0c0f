//! Dense linear-algebra helpers on complex matrices.
//!
//! Kernels and ranks use a relative singular-value cutoff: a singular value
//! `σ` counts as zero when `σ <= tol * σ_max`.

use faer::{Mat, Side};

use crate::{CMatrix, CVector, C64};

/// Relative singular-value cutoff used for kernels and ranks.
pub const RANK_TOL: f64 = 1e-10;

/// Largest entry magnitude of `m - m†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn to_faer(a: &CMatrix) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values (descending, padded with zeros to `ncols`) and the full
/// right singular basis as columns.
fn singular_decomposition(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let svd = to_faer(a).as_ref().svd().expect("SVD converges");
    let (s, v) = (svd.S(), svd.V());
    let cols = a.ncols();
    let sigma = (0..cols).map(|i| if i < a.nrows() { s[i].re } else { 0.0 }).collect();
    (sigma, CMatrix::from_fn(cols, cols, |i, j| v[(i, j)]))
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let (sigma, v) = singular_decomposition(a);
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return CMatrix::identity(cols, cols);
    }
    let cutoff = rel_tol * sigma_max;
    let kernel: Vec<CVector> = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(j, _)| v.column(j).into_owned())
        .collect();
    if kernel.is_empty() {
        CMatrix::zeros(cols, 0)
    } else {
        CMatrix::from_columns(&kernel)
    }
}

/// Orthonormal kernel basis using an absolute singular-value cutoff.
pub fn null_space_abs(a: &CMatrix, cutoff: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let (sigma, v) = singular_decomposition(a);
    let kernel: Vec<CVector> = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(j, _)| v.column(j).into_owned())
        .collect();
    if kernel.is_empty() {
        CMatrix::zeros(cols, 0)
    } else {
        CMatrix::from_columns(&kernel)
    }
}

/// Orthonormal basis of the column space, absolute singular-value cutoff.
pub fn column_space_abs(a: &CMatrix, cutoff: f64) -> CMatrix {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let svd = to_faer(a).as_ref().thin_svd().expect("SVD converges");
    let (s, u) = (svd.S(), svd.U());
    let cols: Vec<CVector> = (0..a.nrows().min(a.ncols()))
        .filter(|&j| s[j].re > cutoff)
        .map(|j| CVector::from_fn(a.nrows(), |i, _| u[(i, j)]))
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(a.nrows(), 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Numerical rank under the relative cutoff.
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let (sigma, _) = singular_decomposition(a);
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * sigma_max).count()
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.nrows() == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = to_faer(m).as_ref().self_adjoint_eigen(Side::Lower).expect("eigensolver converges");
    let (s, u) = (eig.S(), eig.U());
    let values = (0..m.nrows()).map(|i| s[i].re).collect();
    (values, CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| u[(i, j)]))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = to_faer(m)
        .as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("eigensolver converges");
    values.sort_by(f64::total_cmp);
    values
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    );
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * vectors.adjoint()
}

/// Orthogonal projector onto the span of orthonormal columns.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// Chordal distance `‖P_a - P_b‖_F / √2` between the spans of two
/// orthonormal column sets. Infinite when the dimensions differ.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return f64::INFINITY;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    (projector(a) - projector(b)).norm() / std::f64::consts::SQRT_2
}

/// Greedy pivoted Gram–Schmidt of `candidates` projected onto the subspace
/// spanned by the orthonormal columns of `basis`.
///
/// At each step the candidate with the largest remaining projection is taken
/// (lowest column index on ties), normalized, and removed from the rest. The
/// chosen vectors have positive overlap with the candidate that produced them.
/// Stops after `basis.ncols()` vectors or when no candidate retains a
/// component above `tol`.
pub fn pivoted_basis(basis: &CMatrix, candidates: &CMatrix, tol: f64) -> Vec<CVector> {
    let target = basis.ncols();
    let mut residual = basis * (basis.adjoint() * candidates);
    let mut chosen: Vec<CVector> = Vec::with_capacity(target);
    while chosen.len() < target {
        let mut best: Option<(usize, f64)> = None;
        for (j, col) in residual.column_iter().enumerate() {
            let norm = col.norm();
            match best {
                Some((_, b)) if norm <= b * (1.0 + 1e-12) => {}
                _ => best = Some((j, norm)),
            }
        }
        let Some((j, norm)) = best else { break };
        if norm <= tol {
            break;
        }
        let v: CVector = residual.column(j).into_owned() / C64::from(norm);
        let overlaps = v.adjoint() * &residual;
        residual -= &v * overlaps;
        chosen.push(v);
    }
    chosen
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
