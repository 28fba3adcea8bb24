//! Dense complex Hermitian matrices.
//!
//! Every operator in the laboratory (Hamiltonians, their derivatives,
//! frustration-free terms, amplified constructions) is stored as a dense
//! `HermitianMatrix`. Hermiticity is enforced at construction by
//! symmetrization `(A + A†)/2`, which is exact in floating point.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::{CMatrix, CVector, Cplx, Error, Result};

/// Default cap on matrix dimension. Overridable via `EIGENPATH_MAX_DIM`.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Configured dimension cap for dense matrices.
pub fn dimension_cap() -> usize {
    cap_from(std::env::var("EIGENPATH_MAX_DIM").ok().as_deref())
}

fn cap_from(var: Option<&str>) -> usize {
    var.and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_DIM)
}

/// A dense complex matrix guaranteed Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Build from an arbitrary square matrix, enforcing Hermiticity by
    /// symmetrization `(A + A†)/2`.
    pub fn new(raw: CMatrix) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::Config(format!(
                "matrix must be square, got {}x{}",
                raw.nrows(),
                raw.ncols()
            )));
        }
        if raw.nrows() == 0 {
            return Err(Error::Config("matrix dimension must be positive".into()));
        }
        let cap = dimension_cap();
        if raw.nrows() > cap {
            return Err(Error::DimensionCap {
                dim: raw.nrows(),
                cap,
            });
        }
        let sym = (&raw + raw.adjoint()).scale(0.5);
        Ok(Self { data: sym })
    }

    /// Wrap a matrix already known to be exactly Hermitian (internal use,
    /// e.g. real linear combinations of Hermitian matrices).
    fn wrap(data: CMatrix) -> Self {
        debug_assert!(hermiticity_defect(&data) < 1e-12 * (1.0 + data.camax()));
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Cplx::new(d, 0.0);
        }
        Self { data: m }
    }

    /// Build entrywise and symmetrize.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Cplx) -> Result<Self> {
        Self::new(CMatrix::from_fn(dim, dim, f))
    }

    /// Rank-one projector `|v⟩⟨v|` (not normalized; pass a unit vector for a
    /// projector).
    pub fn outer(v: &CVector) -> Self {
        let m = v * v.adjoint();
        Self::wrap(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Cplx {
        self.data[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::wrap(self.data.scale(factor))
    }

    /// Real linear combination `Σ cᵢ·Mᵢ`. Real coefficients preserve
    /// Hermiticity exactly.
    pub fn linear_combination(parts: &[(f64, &HermitianMatrix)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, m)| m.dim())
            .ok_or_else(|| Error::Config("empty linear combination".into()))?;
        let mut acc = CMatrix::zeros(dim, dim);
        for (c, m) in parts {
            if m.dim() != dim {
                return Err(Error::Config(format!(
                    "dimension mismatch in linear combination: {} vs {}",
                    m.dim(),
                    dim
                )));
            }
            acc += m.data.scale(*c);
        }
        Ok(Self::wrap(acc))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    /// Kronecker product `self ⊗ other` (row-major block convention:
    /// index = i·dim(other) + j).
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dim = self.dim() * other.dim();
        let cap = dimension_cap();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(Self::wrap(self.data.kronecker(&other.data)))
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.data * v
    }

    /// Real expectation value `⟨v|M|v⟩` for a Hermitian operator.
    pub fn expectation(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.data * v)).re
    }

    /// All eigenvalues, ascending. Values-only solve (no eigenvectors).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self
            .data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Spectral norm: largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Entry encoding used by all JSON documents: row-major nested arrays of
    /// `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.data[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }

    /// Decode the row-major `[re, im]` encoding.
    pub fn from_rows(dim: usize, rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Config(format!(
                "matrix entries must form a {dim}x{dim} grid"
            )));
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            Complex::new(rows[i][j][0], rows[i][j][1])
        });
        Self::new(m)
    }
}

/// Largest entrywise deviation from Hermiticity, `max |A - A†|`.
pub fn hermiticity_defect(m: &DMatrix<Cplx>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
