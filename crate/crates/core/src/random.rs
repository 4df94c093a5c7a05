//! Deterministic random instance generation for sweeps and tests.
//!
//! A master seed fixes the run; each draw gets its own ChaCha stream so
//! individual draws can be replayed in isolation.

use crate::sequences::SequenceSystem;
use crate::symbols::Symbol;
use crate::{C64, CMatrix, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub use rand_chacha::ChaCha12Rng as DrawRng;

// Rejection caps for frame / Riesz draws. Gaussian draws at desk scale
// almost never hit them.
const FRAME_FLOOR: f64 = 1e-6;
const RIESZ_COND_CAP: f64 = 1e3;
const MAX_REJECTS: usize = 10_000;

/// RNG for one draw of a seeded sweep: same master seed and draw index,
/// same stream, independent across draw indices.
pub fn rng_for_draw(master_seed: u64, draw: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(draw);
    rng
}

/// Standard complex Gaussian: unit total variance.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    loop {
        let v = random_vector(rng, dim);
        let n = v.norm();
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// Square unitary from the QR factorization of a Gaussian draw.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    random_matrix(rng, n, n).qr().q()
}

/// Any Gaussian family is a Bessel sequence; no rejection involved.
pub fn random_bessel(rng: &mut impl Rng, dim: usize, count: usize) -> SequenceSystem {
    SequenceSystem::from_synthesis(random_matrix(rng, dim, count))
        .expect("gaussian draws are finite")
}

/// Gaussian family rejected until the frame operator is well away from
/// singular: lambda_min(S) > 1e-6 lambda_max. Requires count >= dim.
pub fn random_frame(rng: &mut impl Rng, dim: usize, count: usize) -> SequenceSystem {
    assert!(count >= dim, "a frame in C^d needs at least d vectors");
    for _ in 0..MAX_REJECTS {
        let d = random_matrix(rng, dim, count);
        let s = crate::numerics::singular_values(&d).expect("finite");
        // Frame operator spectrum is the squared singular values of D.
        if s.smallest().powi(2) > FRAME_FLOOR * s.largest().powi(2) {
            return SequenceSystem::from_synthesis(d).expect("gaussian draws are finite");
        }
    }
    unreachable!("frame rejection cap exceeded");
}

/// Square Gaussian draw with condition number at most 1e3.
pub fn random_riesz(rng: &mut impl Rng, dim: usize) -> SequenceSystem {
    for _ in 0..MAX_REJECTS {
        let d = random_matrix(rng, dim, dim);
        let s = crate::numerics::singular_values(&d).expect("finite");
        if s.smallest() > 0.0 && s.largest() / s.smallest() <= RIESZ_COND_CAP {
            return SequenceSystem::from_synthesis(d).expect("gaussian draws are finite");
        }
    }
    unreachable!("riesz rejection cap exceeded");
}

/// Columns of a random unitary: an orthonormal basis of C^d.
pub fn random_onb(rng: &mut impl Rng, dim: usize) -> SequenceSystem {
    SequenceSystem::from_synthesis(random_unitary(rng, dim)).expect("unitary is finite")
}

/// Dense Gaussian symbol.
pub fn random_symbol(rng: &mut impl Rng, rows: usize, cols: usize) -> Symbol {
    Symbol::dense(random_matrix(rng, rows, cols)).expect("gaussian draws are finite")
}

/// Symbol with prescribed singular value range: U = Q1 diag(sigma) Q2*,
/// sigma uniform in [lo, hi]. Keeps inversion sweeps well-conditioned.
pub fn random_symbol_with_sigma(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Symbol {
    let q1 = random_unitary(rng, n);
    let q2 = random_unitary(rng, n);
    let sigma = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(rng.random_range(lo..=hi), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Symbol::dense(q1 * sigma * q2.adjoint()).expect("finite")
}

/// Like `random_symbol_with_sigma` but with the listed singular values.
pub fn random_symbol_with_fixed_sigma(rng: &mut impl Rng, sigma: &[f64]) -> Symbol {
    let n = sigma.len();
    let q1 = random_unitary(rng, n);
    let q2 = random_unitary(rng, n);
    let s = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(sigma[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Symbol::dense(q1 * s * q2.adjoint()).expect("finite")
}

/// Hermitian positive semidefinite symbol G*G, normalized to unit scale.
pub fn random_psd_symbol(rng: &mut impl Rng, n: usize) -> Symbol {
    let g = random_matrix(rng, n, n);
    let p = g.adjoint() * &g;
    let p = (&p + p.adjoint()).scale(0.5 / n as f64);
    Symbol::dense(p).expect("finite")
}

/// Uniform integer in [lo, hi]; saves callers a direct rand dependency.
pub fn pick_size(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Uniform real in [lo, hi).
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
