//! Dense complex linear algebra shared by every module: singular value
//! decompositions, Hermitian eigensystems, Schatten norms, residual-checked
//! inverses, rank-one tensors.

use crate::{C64, CMatrix, CVector, Error, Result};
use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

// Iteration cap for the implicit-QR loops; generous for sizes up to 256.
const MAX_ITER: usize = 100_000;

/// Shared slack policy for every comparison in the crate.
///
/// `eq_abs` and `invert_floor` are relative: they multiply the operand scale
/// (Frobenius norm clamped at 1, or the largest singular value for the
/// invertibility floor). `bound_slack` is the relative slack applied to
/// inequality certificates, `rank_tol` the relative cutoff below which
/// singular values count as zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eq_abs: f64,
    pub bound_slack: f64,
    pub rank_tol: f64,
    pub invert_floor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_abs: 1e-10,
            bound_slack: 1e-9,
            rank_tol: 1e-12,
            invert_floor: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eq_abs", self.eq_abs),
            ("bound_slack", self.bound_slack),
            ("rank_tol", self.rank_tol),
            ("invert_floor", self.invert_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Singular values, kept sorted non-increasing and non-negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    fn from_unsorted(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0; // iteration noise; singular values are >= 0 by definition
            }
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest singular value; the operator norm.
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Smallest listed singular value (min(rows, cols) values are listed).
    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// (sum sigma_k^p)^(1/p); requires p >= 1.
    pub fn schatten(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Schatten norms need p >= 1, got {p}"
            )));
        }
        Ok(self.values.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
    }

    /// Number of singular values above rank_tol times the largest.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let cut = rank_tol * self.largest();
        self.values.iter().filter(|s| **s > cut).count()
    }
}

/// Full decomposition A = left * diag(spectrum) * right_t with orthonormal
/// columns in `left` and orthonormal rows in `right_t`.
pub struct SvdFactors {
    pub left: CMatrix,
    pub right_t: CMatrix,
    pub spectrum: SingularSpectrum,
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Frobenius norm clamped below at 1; the operand scale multiplying the
/// relative tolerances.
pub fn scale_of(a: &CMatrix) -> f64 {
    a.norm().max(1.0)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Inner product <f, g>, linear in the first argument.
pub fn inner(f: &CVector, g: &CVector) -> C64 {
    g.dotc(f)
}

pub fn svd(a: &CMatrix) -> Result<SvdFactors> {
    check_finite(a)?;
    let fac = a
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_ITER)
        .ok_or_else(|| Error::Decomposition("singular value iteration did not converge".into()))?;
    let left = fac.u.expect("u requested");
    let right_t = fac.v_t.expect("v_t requested");
    let raw: Vec<f64> = fac.singular_values.iter().copied().collect();
    // Sort descending and permute factors to match; nalgebra's ordering is
    // not part of its contract.
    let mut idx: Vec<usize> = (0..raw.len()).collect();
    idx.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).expect("finite singular values"));
    let left = CMatrix::from_fn(left.nrows(), left.ncols(), |r, c| left[(r, idx[c])]);
    let right_t = CMatrix::from_fn(right_t.nrows(), right_t.ncols(), |r, c| right_t[(idx[r], c)]);
    let spectrum = SingularSpectrum::from_unsorted(idx.iter().map(|&i| raw[i]).collect());
    Ok(SvdFactors { left, right_t, spectrum })
}

pub fn singular_values(a: &CMatrix) -> Result<SingularSpectrum> {
    check_finite(a)?;
    let fac = a
        .clone()
        .try_svd(false, false, f64::EPSILON, MAX_ITER)
        .ok_or_else(|| Error::Decomposition("singular value iteration did not converge".into()))?;
    Ok(SingularSpectrum::from_unsorted(
        fac.singular_values.iter().copied().collect(),
    ))
}

pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.largest())
}

pub fn smallest_singular(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.smallest())
}

pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    singular_values(a)?.schatten(p)
}

/// True when sigma_min clears the scaled invertibility floor.
pub fn spectrum_invertible(s: &SingularSpectrum, tol: &ToleranceConfig) -> bool {
    s.smallest() > tol.invert_floor * s.largest()
}

/// Real eigenvalues in ascending order with matching orthonormal
/// eigenvector columns.
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

pub fn hermitian_eig(a: &CMatrix, tol: &ToleranceConfig) -> Result<HermitianEig> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_finite(a)?;
    let dev = (a - a.adjoint()).norm();
    if dev > tol.eq_abs * scale_of(a) {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian: ||A - A*||_F = {dev:.3e}"
        )));
    }
    // Symmetrize to strip rounding asymmetry before iterating.
    let h = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, MAX_ITER)
        .ok_or_else(|| Error::Decomposition("eigenvalue iteration did not converge".into()))?;
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut idx: Vec<usize> = (0..raw.len()).collect();
    idx.sort_by(|&i, &j| raw[i].partial_cmp(&raw[j]).expect("finite eigenvalues"));
    let vectors = CMatrix::from_fn(eig.eigenvectors.nrows(), eig.eigenvectors.ncols(), |r, c| {
        eig.eigenvectors[(r, idx[c])]
    });
    Ok(HermitianEig {
        eigenvalues: idx.iter().map(|&i| raw[i]).collect(),
        eigenvectors: vectors,
    })
}

pub fn hermitian_eigenvalues(a: &CMatrix, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    Ok(hermitian_eig(a, tol)?.eigenvalues)
}

/// Inverse with a certified residual: ||A A^-1 - I||_F <= bound_slack.
/// SVD-based inverse refined by Newton steps when needed.
pub fn inverse(a: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let fac = svd(a)?;
    let floor = tol.invert_floor * fac.spectrum.largest();
    let sigma_min = fac.spectrum.smallest();
    if sigma_min <= floor {
        return Err(Error::Singular { sigma_min, floor });
    }
    let inv_sigma = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0 / fac.spectrum.values()[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut x = fac.right_t.adjoint() * inv_sigma * fac.left.adjoint();
    let id = CMatrix::identity(n, n);
    // Newton steps square the residual; iterate to the floating-point
    // floor, not merely below the certificate slack, because callers
    // compose inverses and the factor errors add up.
    let mut best = x.clone();
    let mut best_res = (&id - a * &best).norm();
    for _ in 0..4 {
        if best_res <= f64::EPSILON * n as f64 {
            break;
        }
        x = &x + &x * (&id - a * &x);
        let res = (&id - a * &x).norm();
        if res < best_res {
            best = x.clone();
            best_res = res;
        } else {
            break;
        }
    }
    if best_res <= tol.bound_slack {
        Ok(best)
    } else {
        Err(Error::Decomposition(format!(
            "inverse residual {best_res:.3e} exceeds slack {:.3e}; matrix too ill-conditioned",
            tol.bound_slack
        )))
    }
}

pub fn solve(a: &CMatrix, b: &CVector, tol: &ToleranceConfig) -> Result<CVector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: matrix is {}x{} but right-hand side has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    Ok(inverse(a, tol)? * b)
}

/// Rank-one tensor f (x) g: the map h |-> <h, g> f, as the matrix f g*.
pub fn tensor(f: &CVector, g: &CVector) -> CMatrix {
    f * g.adjoint()
}
