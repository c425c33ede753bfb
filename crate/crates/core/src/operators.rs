//! Dense Hermitian operators on the finite model of `H`.
//!
//! Frame operators, rank-one operators and all the partial sums formed by the
//! selection procedures are stored as dense `n × n` complex matrices. Model
//! dimensions stay in the low hundreds, so a full eigendecomposition is cheap
//! and gives certifiable extreme eigenvalues.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{CVector, Error, Result};

/// Relative tolerance for the conjugate-symmetry check.
const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or above `-PSD_TOL·max(‖T‖, 1)` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;
/// Residual norm under which a spanning direction is considered dependent.
pub const SPAN_TOL: f64 = 1e-10;

/// A self-adjoint operator on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    mat: DMatrix<Complex64>,
}

impl HermitianOp {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            mat[(i, i)] = Complex64::new(*v, 0.0);
        }
        Self { mat }
    }

    /// Wraps a matrix after checking that it is square, finite and
    /// conjugate-symmetric. The stored matrix is symmetrized exactly.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = mat.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        let n = mat.nrows();
        let mut asym = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                asym = asym.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self::hermitize(mat))
    }

    /// `(M + M*)/2`, for matrices that are Hermitian up to rounding by
    /// construction.
    pub(crate) fn hermitize(mat: DMatrix<Complex64>) -> Self {
        let adj = mat.adjoint();
        Self {
            mat: (mat + adj) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// Adds `weight · T_f` in place, where `T_f g = ⟨g, f⟩ f`.
    pub fn add_rank_one(&mut self, f: &CVector, weight: f64) -> Result<()> {
        let n = self.dim();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
        for j in 0..n {
            let cj = f[j].conj() * weight;
            if cj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                self.mat[(i, j)] += f[i] * cj;
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    /// `self + alpha · other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat * Complex64::new(alpha, 0.0),
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(alpha, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real inner product `Re tr(A B)` of two Hermitian operators.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        if self
            .mat
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let mut ev: Vec<f64> = self.mat.symmetric_eigenvalues().iter().copied().collect();
        if ev.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence);
        }
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenvalues (ascending) together with the matching orthonormal
    /// eigenvectors as columns.
    pub fn eigen_decomposition(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let n = self.dim();
        if self
            .mat
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let eig = SymmetricEigen::try_new(self.mat.clone(), f64::EPSILON, 1000 * (n + 1))
            .ok_or(Error::NoConvergence)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Extreme eigenvalues `(min, max)`.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        let ev = self.eigenvalues()?;
        match (ev.first(), ev.last()) {
            (Some(lo), Some(hi)) => Ok((*lo, *hi)),
            _ => Ok((0.0, 0.0)),
        }
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> Result<f64> {
        let (lo, hi) = self.extreme_eigenvalues()?;
        Ok(lo.abs().max(hi.abs()))
    }

    /// `P_M T P_M`.
    pub fn compress(&self, m: &Subspace) -> Result<Self> {
        self.check_ambient(m)?;
        let p = m.projector();
        Ok(Self::hermitize(&p * &self.mat * &p))
    }

    /// `tr(P_M T P_M)`, computed as `Σ_j ⟨T q_j, q_j⟩` over the basis.
    pub fn compressed_trace(&self, m: &Subspace) -> Result<f64> {
        self.check_ambient(m)?;
        let tq = &self.mat * &m.basis;
        let mut tr = 0.0;
        for j in 0..m.dim() {
            tr += m.basis.column(j).dotc(&tq.column(j)).re;
        }
        Ok(tr)
    }

    /// Errors unless the operator is positive semi-definite within
    /// [`PSD_TOL`].
    pub fn ensure_psd(&self) -> Result<()> {
        let (lo, hi) = self.extreme_eigenvalues()?;
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if lo < -PSD_TOL * scale {
            return Err(Error::NotPositive { min_eig: lo });
        }
        Ok(())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    fn check_ambient(&self, m: &Subspace) -> Result<()> {
        if m.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m.ambient_dim(),
            });
        }
        Ok(())
    }
}

/// Extreme eigenvalues, trace and norm of a Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralSummary {
    pub min_eig: f64,
    pub max_eig: f64,
    pub trace: f64,
    pub op_norm: f64,
}

/// The rank-one operator `g ↦ ⟨g, f⟩ f` on `C^dim`.
pub fn rank_one(dim: usize, f: &CVector) -> Result<HermitianOp> {
    let mut t = HermitianOp::zeros(dim);
    t.add_rank_one(f, 1.0)?;
    Ok(t)
}

pub fn spectral_summary(t: &HermitianOp) -> Result<SpectralSummary> {
    let (min_eig, max_eig) = t.extreme_eigenvalues()?;
    Ok(SpectralSummary {
        min_eig,
        max_eig,
        trace: t.trace(),
        op_norm: min_eig.abs().max(max_eig.abs()),
    })
}

/// Weighted rank-one sum `Σ wᵢ T_{fᵢ}`.
pub fn weighted_sum(vectors: &[CVector], weights: &[f64]) -> Result<HermitianOp> {
    let first = vectors.first().ok_or(Error::Empty("no frame vectors"))?;
    if vectors.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            got: weights.len(),
        });
    }
    let mut s = HermitianOp::zeros(first.len());
    for (f, &w) in vectors.iter().zip(weights) {
        s.add_rank_one(f, w)?;
    }
    Ok(s)
}

/// Optimal frame bounds `(A, B)` of the weighted family: the extreme
/// eigenvalues of `Σ wᵢ T_{fᵢ}`.
pub fn frame_bounds(vectors: &[CVector], weights: &[f64]) -> Result<(f64, f64)> {
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::InvalidArgument(alloc::format!(
            "frame weights must be positive, got {w}"
        )));
    }
    weighted_sum(vectors, weights)?.extreme_eigenvalues()
}

/// Off-diagonal block defect of a PSD operator with respect to `M ⊕ M⊥`.
///
/// Returns `(‖T − P_M T P_M − P_{M⊥} T P_{M⊥}‖, (‖P_M T P_M‖·‖P_{M⊥} T P_{M⊥}‖)^{1/2})`;
/// the first never exceeds the second for PSD `T`.
pub fn compression_split_defect(t: &HermitianOp, m: &Subspace) -> Result<(f64, f64)> {
    t.ensure_psd()?;
    let inner = t.compress(m)?;
    let outer = t.compress(&m.complement())?;
    let defect = t.sub(&inner)?.sub(&outer)?.op_norm()?;
    let bound = libm::sqrt(inner.op_norm()? * outer.op_norm()?);
    Ok((defect, bound))
}

/// A subspace of `C^n` stored as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<Complex64>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    /// Orthonormalizes a spanning set, dropping directions whose residual
    /// (relative to the vector's own norm) is below [`SPAN_TOL`].
    pub fn from_spanning<'a, I>(ambient: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a CVector>,
    {
        let mut cols: Vec<CVector> = Vec::new();
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: v.len(),
                });
            }
            if cols.len() == ambient {
                break;
            }
            if let Some(q) = orthogonalize(&cols, v) {
                cols.push(q);
            }
        }
        Ok(Self::from_columns(ambient, &cols))
    }

    /// Checks orthonormality of the given columns (within 1e-10).
    pub fn from_orthonormal_columns(basis: DMatrix<Complex64>) -> Result<Self> {
        let gram = basis.adjoint() * &basis;
        let k = basis.ncols();
        let off = (gram - DMatrix::<Complex64>::identity(k, k))
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()));
        if off > 1e-10 {
            return Err(Error::InvalidArgument(alloc::format!(
                "columns are not orthonormal (defect {off:e})"
            )));
        }
        Ok(Self {
            ambient: basis.nrows(),
            basis,
        })
    }

    fn from_columns(ambient: usize, cols: &[CVector]) -> Self {
        let mut basis = DMatrix::zeros(ambient, cols.len());
        for (j, c) in cols.iter().enumerate() {
            basis.set_column(j, c);
        }
        Self { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<Complex64> {
        &self.basis * self.basis.adjoint()
    }

    pub fn project(&self, v: &CVector) -> CVector {
        &self.basis * (self.basis.adjoint() * v)
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Self {
        let mut cols: Vec<CVector> = self.columns();
        let start = cols.len();
        for i in 0..self.ambient {
            if cols.len() == self.ambient {
                break;
            }
            let mut e = CVector::zeros(self.ambient);
            e[i] = Complex64::new(1.0, 0.0);
            if let Some(q) = orthogonalize(&cols, &e) {
                cols.push(q);
            }
        }
        Self::from_columns(self.ambient, &cols[start..])
    }

    /// `self ⊕ other`, orthonormalized (the two need not be orthogonal).
    pub fn join(&self, other: &Self) -> Result<Self> {
        let a = self.columns();
        let b = other.columns();
        Self::from_spanning(self.ambient, a.iter().chain(b.iter()))
    }

    /// Orthonormal directions of `span(vectors)` orthogonal to `self`.
    pub fn extension<'a, I>(&self, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a CVector>,
    {
        let mut cols = self.columns();
        let start = cols.len();
        for v in vectors {
            if v.len() != self.ambient {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient,
                    got: v.len(),
                });
            }
            if cols.len() == self.ambient {
                break;
            }
            if let Some(q) = orthogonalize(&cols, v) {
                cols.push(q);
            }
        }
        Ok(Self::from_columns(self.ambient, &cols[start..]))
    }

    pub fn columns(&self) -> Vec<CVector> {
        (0..self.dim())
            .map(|j| self.basis.column(j).into_owned())
            .collect()
    }
}

/// Twice-iterated Gram–Schmidt of `v` against orthonormal `cols`; `None`
/// when the residual is negligible.
fn orthogonalize(cols: &[CVector], v: &CVector) -> Option<CVector> {
    let norm0 = v.norm();
    if norm0 == 0.0 {
        return None;
    }
    let mut r = v / Complex64::new(norm0, 0.0);
    for _ in 0..2 {
        for q in cols {
            let c = q.dotc(&r);
            r -= q * c;
        }
    }
    let res = r.norm();
    if res < SPAN_TOL {
        return None;
    }
    Some(r / Complex64::new(res, 0.0))
}
