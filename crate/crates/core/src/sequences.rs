//! Finite vector systems in C^d: analysis/synthesis operators, frame
//! bounds, classification, and dual systems.

use crate::numerics::{self, ToleranceConfig};
use crate::{CMatrix, CVector, Error, Result};
use serde::Serialize;

/// A family {f_k}, k = 1..n, in C^d, with its synthesis matrix D (d x n,
/// column k holds f_k) cached at construction.
#[derive(Clone, Debug)]
pub struct SequenceSystem {
    dim: usize,
    synthesis: CMatrix,
}

/// Optimal constants of the frame inequality: the extreme eigenvalues of
/// the frame operator S = D D*.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    BesselOnly,
    Frame,
    RieszBasis,
    OrthonormalBasis,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SequenceClass {
    pub kind: SequenceKind,
    pub overcomplete: bool,
    pub satisfies_lower_frame_condition: bool,
}

impl SequenceKind {
    pub fn is_frame(self) -> bool {
        !matches!(self, SequenceKind::BesselOnly)
    }

    pub fn is_riesz(self) -> bool {
        matches!(self, SequenceKind::RieszBasis | SequenceKind::OrthonormalBasis)
    }
}

impl SequenceSystem {
    pub fn new(dim: usize, vectors: Vec<CVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter(
                "a sequence system needs at least one vector".into(),
            ));
        }
        for (k, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector {k} has length {} but the ambient dimension is {dim}",
                    v.len()
                )));
            }
        }
        let synthesis = CMatrix::from_fn(dim, vectors.len(), |i, k| vectors[k][i]);
        numerics::check_finite(&synthesis)?;
        Ok(Self { dim, synthesis })
    }

    /// Wraps a d x n matrix as the system of its columns.
    pub fn from_synthesis(synthesis: CMatrix) -> Result<Self> {
        if synthesis.ncols() == 0 || synthesis.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "synthesis matrix must have at least one row and column".into(),
            ));
        }
        numerics::check_finite(&synthesis)?;
        Ok(Self { dim: synthesis.nrows(), synthesis })
    }

    pub fn standard_basis(dim: usize) -> Self {
        Self { dim, synthesis: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.synthesis.column(k).into_owned()
    }

    pub fn vectors(&self) -> Vec<CVector> {
        (0..self.count()).map(|k| self.vector(k)).collect()
    }

    pub fn synthesis_matrix(&self) -> &CMatrix {
        &self.synthesis
    }

    /// D*: maps f to its coefficients {<f, f_k>}.
    pub fn analysis_matrix(&self) -> CMatrix {
        self.synthesis.adjoint()
    }

    /// Coefficients (<f, f_1>, ..., <f, f_n>) = D* f.
    pub fn analysis(&self, f: &CVector) -> Result<CVector> {
        if f.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "analysis input has length {} but the ambient dimension is {}",
                f.len(),
                self.dim
            )));
        }
        Ok(self.synthesis.adjoint() * f)
    }

    /// Sum_k c_k f_k = D c.
    pub fn synthesis(&self, c: &CVector) -> Result<CVector> {
        if c.len() != self.count() {
            return Err(Error::DimensionMismatch(format!(
                "synthesis input has length {} but the system has {} vectors",
                c.len(),
                self.count()
            )));
        }
        Ok(&self.synthesis * c)
    }

    /// Frame operator S = D D* = sum_k f_k (x) f_k.
    pub fn frame_operator(&self) -> CMatrix {
        &self.synthesis * self.synthesis.adjoint()
    }

    /// Gram matrix D* D of pairwise inner products.
    pub fn gram(&self) -> CMatrix {
        self.synthesis.adjoint() * &self.synthesis
    }

    /// Optimal (A, B): the extreme eigenvalues of S.
    pub fn frame_bounds(&self, tol: &ToleranceConfig) -> Result<FrameBounds> {
        let eig = numerics::hermitian_eigenvalues(&self.frame_operator(), tol)?;
        let lower = eig.first().copied().unwrap_or(0.0).max(0.0);
        let upper = eig.last().copied().unwrap_or(0.0).max(0.0);
        Ok(FrameBounds { lower, upper })
    }

    pub fn classify(&self, tol: &ToleranceConfig) -> Result<SequenceClass> {
        let bounds = self.frame_bounds(tol)?;
        let is_frame = bounds.upper > 0.0 && bounds.lower > tol.rank_tol * bounds.upper;
        let is_riesz = is_frame && self.count() == self.dim;
        let kind = if is_riesz && self.gram_is_identity(tol) {
            SequenceKind::OrthonormalBasis
        } else if is_riesz {
            SequenceKind::RieszBasis
        } else if is_frame {
            SequenceKind::Frame
        } else {
            SequenceKind::BesselOnly
        };
        Ok(SequenceClass {
            kind,
            overcomplete: is_frame && self.count() > self.dim,
            satisfies_lower_frame_condition: is_frame,
        })
    }

    fn gram_is_identity(&self, tol: &ToleranceConfig) -> bool {
        let g = self.gram();
        let n = g.nrows();
        (g - CMatrix::identity(n, n)).norm() <= tol.eq_abs * (n as f64).sqrt().max(1.0)
    }

    /// The frame {S^-1 f_k}; bounds invert to (1/B, 1/A).
    pub fn canonical_dual(&self, tol: &ToleranceConfig) -> Result<SequenceSystem> {
        let class = self.classify(tol)?;
        if !class.kind.is_frame() {
            return Err(Error::Precondition(
                "canonical dual requires a frame (lower frame bound is zero)".into(),
            ));
        }
        let s_inv = numerics::inverse(&self.frame_operator(), tol)?;
        SequenceSystem::from_synthesis(s_inv * &self.synthesis)
    }

    /// The unique {f~_k} with <f_k, f~_j> = delta_kj; exists for Riesz
    /// bases and coincides with the canonical dual there.
    pub fn biorthogonal_dual(&self, tol: &ToleranceConfig) -> Result<SequenceSystem> {
        let class = self.classify(tol)?;
        if !class.kind.is_riesz() {
            return Err(Error::Precondition(format!(
                "biorthogonal dual requires a Riesz basis, got {:?} with {} vectors in C^{}",
                class.kind,
                self.count(),
                self.dim
            )));
        }
        // D~ = (D^-1)*, so that D~* D = I.
        let d_inv = numerics::inverse(&self.synthesis, tol)?;
        SequenceSystem::from_synthesis(d_inv.adjoint())
    }

    /// Shifts every vector by the matching column of `delta`.
    pub fn perturbed_by(&self, delta: &CMatrix) -> Result<SequenceSystem> {
        if delta.nrows() != self.dim || delta.ncols() != self.count() {
            return Err(Error::DimensionMismatch(format!(
                "perturbation is {}x{} but the system is {}x{}",
                delta.nrows(),
                delta.ncols(),
                self.dim,
                self.count()
            )));
        }
        SequenceSystem::from_synthesis(&self.synthesis + delta)
    }
}

/// True when f = sum_k <f, g_k> f_k for all f, i.e. D_f C_g = I.
pub fn is_dual_pair(f_seq: &SequenceSystem, g_seq: &SequenceSystem, tol: &ToleranceConfig) -> Result<bool> {
    if f_seq.dim() != g_seq.dim() || f_seq.count() != g_seq.count() {
        return Err(Error::DimensionMismatch(format!(
            "dual pair needs matching shapes, got {}x{} vs {}x{}",
            f_seq.dim(),
            f_seq.count(),
            g_seq.dim(),
            g_seq.count()
        )));
    }
    let p = f_seq.synthesis_matrix() * g_seq.analysis_matrix();
    let d = f_seq.dim();
    let residual = (p - CMatrix::identity(d, d)).norm();
    Ok(residual <= tol.eq_abs * (d as f64).sqrt().max(1.0))
}
