//! Symbol matrices U inserted between analysis and synthesis: dense,
//! diagonal, Toeplitz convolution, Frobenius tables, and a tri-band family
//! with decaying singular values.

use crate::numerics::{self, SingularSpectrum, ToleranceConfig};
use crate::{C64, CMatrix, Error, Result};
use serde::Serialize;

#[derive(Clone, Debug)]
pub enum SymbolKind {
    Dense,
    /// diag(m); entries off the diagonal are zero.
    Diagonal { m: Vec<C64> },
    /// Toeplitz truncation of a convolution: entry (j, k) = c_{j-k}, with
    /// c supported on offset..offset+len and zero outside (no wraparound).
    Convolution { kernel: Vec<C64>, offset: i64 },
    /// Dense matrix seen as a square-summable coefficient table.
    Frobenius,
    /// Symmetric tri-band family: entries (k,k), (k,k+1), (k+1,k) all
    /// equal 1/sqrt(k), 1-indexed.
    TriBlock,
}

impl SymbolKind {
    pub fn name(&self) -> &'static str {
        match self {
            SymbolKind::Dense => "dense",
            SymbolKind::Diagonal { .. } => "diagonal",
            SymbolKind::Convolution { .. } => "convolution",
            SymbolKind::Frobenius => "frobenius",
            SymbolKind::TriBlock => "triblock",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Symbol {
    matrix: CMatrix,
    kind: SymbolKind,
}

/// Operator, trace, and Hilbert-Schmidt norms read off one SVD.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SymbolNorms {
    pub op: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Symbol {
    pub fn dense(matrix: CMatrix) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        Ok(Self { matrix, kind: SymbolKind::Dense })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
            kind: SymbolKind::Diagonal { m: vec![C64::new(1.0, 0.0); n] },
        }
    }

    /// diag(m): the classic multiplier symbol of pointwise coefficient
    /// multiplication.
    pub fn diagonal(m: &[C64], n: usize) -> Result<Self> {
        if m.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "diagonal symbol of size {n} needs {n} entries, got {}",
                m.len()
            )));
        }
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            if i == j { m[i] } else { C64::new(0.0, 0.0) }
        });
        numerics::check_finite(&matrix)?;
        Ok(Self { matrix, kind: SymbolKind::Diagonal { m: m.to_vec() } })
    }

    /// n x n Toeplitz matrix of the kernel c, where `kernel[i]` holds
    /// c_{offset + i}; indices outside the support contribute zero.
    pub fn convolution(kernel: &[C64], offset: i64, n: usize) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::InvalidParameter("convolution kernel is empty".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("convolution symbol needs n >= 1".into()));
        }
        let at = |d: i64| -> C64 {
            let i = d - offset;
            if i >= 0 && (i as usize) < kernel.len() {
                kernel[i as usize]
            } else {
                C64::new(0.0, 0.0)
            }
        };
        let matrix = CMatrix::from_fn(n, n, |j, k| at(j as i64 - k as i64));
        numerics::check_finite(&matrix)?;
        Ok(Self {
            matrix,
            kind: SymbolKind::Convolution { kernel: kernel.to_vec(), offset },
        })
    }

    /// Dense table a_ij tagged as a Hilbert-Schmidt symbol.
    pub fn frobenius(a: CMatrix) -> Result<Self> {
        numerics::check_finite(&a)?;
        Ok(Self { matrix: a, kind: SymbolKind::Frobenius })
    }

    /// Tri-band matrix with (k,k) = (k,k+1) = (k+1,k) = 1/sqrt(k),
    /// 1-indexed; singular values decay as n grows.
    pub fn triblock(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "triblock symbol needs n >= 2, got {n}"
            )));
        }
        let mut matrix = CMatrix::zeros(n, n);
        for k in 0..n {
            let v = C64::new(1.0 / ((k + 1) as f64).sqrt(), 0.0);
            matrix[(k, k)] = v;
            if k + 1 < n {
                matrix[(k, k + 1)] = v;
                matrix[(k + 1, k)] = v;
            }
        }
        Ok(Self { matrix, kind: SymbolKind::TriBlock })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Conjugate transpose, with the structure tag carried along.
    pub fn adjoint(&self) -> Symbol {
        let matrix = self.matrix.adjoint();
        let kind = match &self.kind {
            SymbolKind::Dense => SymbolKind::Dense,
            SymbolKind::Diagonal { m } => {
                SymbolKind::Diagonal { m: m.iter().map(|z| z.conj()).collect() }
            }
            // (U*)_{jk} = conj(c_{k-j}): the reversed, conjugated kernel.
            SymbolKind::Convolution { kernel, offset } => SymbolKind::Convolution {
                kernel: kernel.iter().rev().map(|z| z.conj()).collect(),
                offset: -(offset + kernel.len() as i64 - 1),
            },
            SymbolKind::Frobenius => SymbolKind::Frobenius,
            SymbolKind::TriBlock => SymbolKind::TriBlock,
        };
        Symbol { matrix, kind }
    }

    /// Inverse with the shared residual contract; diagonal symbols invert
    /// entrywise and keep their tag, everything else goes dense.
    pub fn invert(&self, tol: &ToleranceConfig) -> Result<Symbol> {
        match &self.kind {
            SymbolKind::Diagonal { m } => {
                let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let floor = tol.invert_floor * max;
                let mut inv = Vec::with_capacity(m.len());
                for z in m {
                    if z.norm() <= floor {
                        return Err(Error::Singular { sigma_min: z.norm(), floor });
                    }
                    inv.push(C64::new(1.0, 0.0) / z);
                }
                Symbol::diagonal(&inv, m.len())
            }
            _ => Symbol::dense(numerics::inverse(&self.matrix, tol)?),
        }
    }

    /// Composition U1 U2; diagonal structure survives, everything else is
    /// tagged dense.
    pub fn compose(&self, other: &Symbol) -> Result<Symbol> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        match (&self.kind, &other.kind) {
            (SymbolKind::Diagonal { m: a }, SymbolKind::Diagonal { m: b }) => {
                let m: Vec<C64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                Symbol::diagonal(&m, m.len())
            }
            _ => Symbol::dense(&self.matrix * &other.matrix),
        }
    }

    pub fn norms(&self) -> Result<SymbolNorms> {
        let s = self.singular_profile()?;
        Ok(SymbolNorms {
            op: s.largest(),
            s1: s.schatten(1.0)?,
            s2: s.schatten(2.0)?,
        })
    }

    pub fn singular_profile(&self) -> Result<SingularSpectrum> {
        numerics::singular_values(&self.matrix)
    }
}
