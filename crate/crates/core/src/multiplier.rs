//! Assembly of generalized Bessel multipliers M = D_g U C_f and the
//! certificates tied to them: norm bounds, adjoint identity, positivity,
//! Riesz lower bounds, and biorthogonal composition.

use crate::numerics::{self, SingularSpectrum, ToleranceConfig};
use crate::sequences::SequenceSystem;
use crate::symbols::Symbol;
use crate::{CMatrix, CVector, Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// The triple (U, {g_k}, {f_k}) with the assembled matrix
/// M = D_g U D_f* of shape d_g x d_f.
#[derive(Clone, Debug)]
pub struct GeneralizedMultiplier {
    symbol: Symbol,
    synthesis_seq: SequenceSystem,
    analysis_seq: SequenceSystem,
    assembled: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateVerdict {
    Pass,
    Fail,
}

/// Outcome of one checked claim. Inequality claims pass when
/// lhs <= rhs (1 + slack) + slack * scale; identity claims are the rhs = 0
/// case with the residual on the left.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: CertificateVerdict,
    pub context: BTreeMap<String, f64>,
}

impl Certificate {
    pub fn inequality(
        claim: impl Into<String>,
        lhs: f64,
        rhs: f64,
        slack: f64,
        scale: f64,
        mut context: BTreeMap<String, f64>,
    ) -> Certificate {
        context.insert("scale".into(), scale);
        let pass = lhs <= rhs * (1.0 + slack) + slack * scale;
        Certificate {
            claim: claim.into(),
            lhs,
            rhs,
            slack,
            verdict: if pass { CertificateVerdict::Pass } else { CertificateVerdict::Fail },
            context,
        }
    }

    pub fn identity(
        claim: impl Into<String>,
        residual: f64,
        tol_abs: f64,
        scale: f64,
        context: BTreeMap<String, f64>,
    ) -> Certificate {
        Certificate::inequality(claim, residual, 0.0, tol_abs, scale, context)
    }

    pub fn passed(&self) -> bool {
        self.verdict == CertificateVerdict::Pass
    }

    /// Distance to the pass boundary; negative when failing.
    pub fn margin(&self) -> f64 {
        let scale = self.context.get("scale").copied().unwrap_or(1.0);
        self.rhs * (1.0 + self.slack) + self.slack * scale - self.lhs
    }
}

impl GeneralizedMultiplier {
    /// Assembles M = D_g U D_f*. The symbol must be
    /// (count of g) x (count of f).
    pub fn build(
        symbol: Symbol,
        synthesis_seq: SequenceSystem,
        analysis_seq: SequenceSystem,
    ) -> Result<Self> {
        if symbol.rows() != synthesis_seq.count() || symbol.cols() != analysis_seq.count() {
            return Err(Error::DimensionMismatch(format!(
                "symbol is {}x{} but the synthesis system has {} vectors and the analysis system {}",
                symbol.rows(),
                symbol.cols(),
                synthesis_seq.count(),
                analysis_seq.count()
            )));
        }
        let assembled =
            synthesis_seq.synthesis_matrix() * symbol.matrix() * analysis_seq.analysis_matrix();
        Ok(Self { symbol, synthesis_seq, analysis_seq, assembled })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn synthesis_seq(&self) -> &SequenceSystem {
        &self.synthesis_seq
    }

    pub fn analysis_seq(&self) -> &SequenceSystem {
        &self.analysis_seq
    }

    pub fn assembled(&self) -> &CMatrix {
        &self.assembled
    }

    /// Applies the three stages in sequence; equals assembled * f.
    pub fn apply(&self, f: &CVector) -> Result<CVector> {
        let coeff = self.analysis_seq.analysis(f)?;
        let mapped = self.symbol.matrix() * coeff;
        self.synthesis_seq.synthesis(&mapped)
    }

    /// M* as a multiplier: symbol U*, sequences swapped.
    pub fn adjoint(&self) -> Result<GeneralizedMultiplier> {
        GeneralizedMultiplier::build(
            self.symbol.adjoint(),
            self.analysis_seq.clone(),
            self.synthesis_seq.clone(),
        )
    }

    pub fn singular_profile(&self) -> Result<SingularSpectrum> {
        numerics::singular_values(&self.assembled)
    }
}

/// Sum_{j,k} U_jk g_j (x) f_k; the finite-rank expansion every multiplier
/// must match.
pub fn rank_one_expansion(
    symbol: &Symbol,
    synthesis_seq: &SequenceSystem,
    analysis_seq: &SequenceSystem,
) -> Result<CMatrix> {
    if symbol.rows() != synthesis_seq.count() || symbol.cols() != analysis_seq.count() {
        return Err(Error::DimensionMismatch(
            "rank-one expansion needs symbol dims matching the sequence counts".into(),
        ));
    }
    let mut acc = CMatrix::zeros(synthesis_seq.dim(), analysis_seq.dim());
    for j in 0..symbol.rows() {
        let g_j = synthesis_seq.vector(j);
        for k in 0..symbol.cols() {
            let f_k = analysis_seq.vector(k);
            acc += numerics::tensor(&g_j, &f_k) * symbol.matrix()[(j, k)];
        }
    }
    Ok(acc)
}

/// Residual of the adjoint identity: assembled* against the multiplier
/// built from (U*, f, g).
pub fn adjoint_check(m: &GeneralizedMultiplier, tol: &ToleranceConfig) -> Result<Certificate> {
    let swapped = m.adjoint()?;
    let residual = (m.assembled().adjoint() - swapped.assembled()).norm();
    let scale = numerics::scale_of(m.assembled());
    Ok(Certificate::identity(
        "adjoint_identity",
        residual,
        tol.eq_abs,
        scale,
        BTreeMap::new(),
    ))
}

/// ||M||_X <= sqrt(B_f B_g) ||U||_X for X in {op, S1, S2}, with the
/// optimal Bessel bounds in the context.
pub fn norm_certificates(
    m: &GeneralizedMultiplier,
    tol: &ToleranceConfig,
) -> Result<Vec<Certificate>> {
    let b_f = m.analysis_seq().frame_bounds(tol)?;
    let b_g = m.synthesis_seq().frame_bounds(tol)?;
    let factor = (b_f.upper * b_g.upper).sqrt();
    let u = m.symbol().norms()?;
    let spec = m.singular_profile()?;
    let m_norms = [
        ("operator_norm_bound", spec.largest(), u.op),
        ("schatten_1_bound", spec.schatten(1.0)?, u.s1),
        ("schatten_2_bound", spec.schatten(2.0)?, u.s2),
    ];
    let mut out = Vec::with_capacity(3);
    for (claim, lhs, u_norm) in m_norms {
        let rhs = factor * u_norm;
        let mut context = BTreeMap::new();
        context.insert("bessel_bound_analysis".into(), b_f.upper);
        context.insert("bessel_bound_synthesis".into(), b_g.upper);
        context.insert("symbol_norm".into(), u_norm);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        out.push(Certificate::inequality(claim, lhs, rhs, tol.bound_slack, scale, context));
    }
    Ok(out)
}

/// With a PSD symbol and f = g the multiplier is positive: checks
/// lambda_min of the Hermitian part of M.
pub fn positivity_check(
    symbol: &Symbol,
    seq: &SequenceSystem,
    tol: &ToleranceConfig,
) -> Result<Certificate> {
    let u = symbol.matrix();
    if u.nrows() != u.ncols() {
        return Err(Error::Precondition("positivity needs a square symbol".into()));
    }
    let herm_dev = (u - u.adjoint()).norm();
    if herm_dev > tol.eq_abs * numerics::scale_of(u) {
        return Err(Error::Precondition(format!(
            "symbol is not Hermitian: deviation {herm_dev:.3e}"
        )));
    }
    let u_eigs = numerics::hermitian_eigenvalues(u, tol)?;
    let u_min = u_eigs.first().copied().unwrap_or(0.0);
    if u_min < -tol.eq_abs * numerics::scale_of(u) {
        return Err(Error::Precondition(format!(
            "symbol is not positive semidefinite: lambda_min = {u_min:.3e}"
        )));
    }
    let m = GeneralizedMultiplier::build(symbol.clone(), seq.clone(), seq.clone())?;
    let herm = (m.assembled() + m.assembled().adjoint()).scale(0.5);
    let lambda_min = numerics::hermitian_eigenvalues(&herm, tol)?
        .first()
        .copied()
        .unwrap_or(0.0);
    let scale = numerics::scale_of(m.assembled());
    let mut context = BTreeMap::new();
    context.insert("lambda_min".into(), lambda_min);
    context.insert("symbol_lambda_min".into(), u_min);
    Ok(Certificate::inequality(
        "positive_multiplier",
        -lambda_min,
        0.0,
        tol.eq_abs,
        scale,
        context,
    ))
}

/// K sqrt(A_f A_g) <= ||M||_op for Riesz bases, where K is the largest
/// column norm of the symbol.
pub fn riesz_lower_bound(m: &GeneralizedMultiplier, tol: &ToleranceConfig) -> Result<Certificate> {
    let f_class = m.analysis_seq().classify(tol)?;
    let g_class = m.synthesis_seq().classify(tol)?;
    if !f_class.kind.is_riesz() || !g_class.kind.is_riesz() {
        return Err(Error::Precondition(format!(
            "lower bound needs Riesz bases on both sides, got {:?} and {:?}",
            f_class.kind, g_class.kind
        )));
    }
    let a_f = m.analysis_seq().frame_bounds(tol)?.lower;
    let a_g = m.synthesis_seq().frame_bounds(tol)?.lower;
    let u = m.symbol().matrix();
    let k = (0..u.ncols())
        .map(|c| u.column(c).norm())
        .fold(0.0, f64::max);
    let lhs = k * (a_f * a_g).sqrt();
    let rhs = numerics::operator_norm(m.assembled())?;
    let mut context = BTreeMap::new();
    context.insert("column_norm_max".into(), k);
    context.insert("lower_bound_analysis".into(), a_f);
    context.insert("lower_bound_synthesis".into(), a_g);
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    Ok(Certificate::inequality(
        "riesz_column_lower_bound",
        lhs,
        rhs,
        tol.bound_slack,
        scale,
        context,
    ))
}

/// Composition rule M1 M2 = M_{U1 U2, g, h} when the analysis system of
/// M1 and the synthesis system of M2 are biorthogonal.
pub fn compose_biorthogonal(
    m1: &GeneralizedMultiplier,
    m2: &GeneralizedMultiplier,
    tol: &ToleranceConfig,
) -> Result<GeneralizedMultiplier> {
    let f = m1.analysis_seq();
    let l = m2.synthesis_seq();
    if f.dim() != l.dim() || f.count() != l.count() {
        return Err(Error::DimensionMismatch(format!(
            "biorthogonal composition needs matching middle systems, got {}x{} vs {}x{}",
            f.dim(),
            f.count(),
            l.dim(),
            l.count()
        )));
    }
    // <l_k, f_j> = delta_kj, i.e. D_f* D_l = I.
    let p = f.analysis_matrix() * l.synthesis_matrix();
    let n = p.nrows();
    let deviation = numerics::max_abs_entry(&(&p - CMatrix::identity(n, n)));
    if deviation > tol.eq_abs * (n as f64).sqrt().max(1.0) {
        return Err(Error::Precondition(format!(
            "middle systems are not biorthogonal: max deviation {deviation:.3e}"
        )));
    }
    let product = m1.symbol().compose(m2.symbol())?;
    GeneralizedMultiplier::build(
        product,
        m1.synthesis_seq().clone(),
        m2.analysis_seq().clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::sequences::SequenceSystem;
    use crate::C64;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rvec(xs: &[f64]) -> CVector {
        CVector::from_iterator(xs.len(), xs.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn mercedes() -> SequenceSystem {
        let r3 = 3.0f64.sqrt();
        SequenceSystem::new(
            2,
            vec![
                rvec(&[0.0, 1.0]),
                rvec(&[-r3 / 2.0, -0.5]),
                rvec(&[r3 / 2.0, -0.5]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_symbol_on_orthonormal_basis_is_identity() {
        let onb = SequenceSystem::standard_basis(3);
        let m = GeneralizedMultiplier::build(Symbol::identity(3), onb.clone(), onb).unwrap();
        assert!((m.assembled() - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_symbol_gives_classic_multiplier() {
        // M = sum_k m_k e_k (x) e_k on the standard basis.
        let onb = SequenceSystem::standard_basis(3);
        let m_entries = [c(2.0), c(-1.0), c(0.5)];
        let u = Symbol::diagonal(&m_entries, 3).unwrap();
        let m = GeneralizedMultiplier::build(u, onb.clone(), onb.clone()).unwrap();
        let mut expect = CMatrix::zeros(3, 3);
        for (k, &entry) in m_entries.iter().enumerate() {
            let e = onb.vector(k);
            expect += numerics::tensor(&e, &e) * entry;
        }
        assert!((m.assembled() - expect).norm() < 1e-14);
    }

    #[test]
    fn single_term_diagonal_is_rank_one() {
        let mut rng = random::rng_for_draw(41, 0);
        let f = random::random_bessel(&mut rng, 4, 3);
        let g = random::random_bessel(&mut rng, 4, 3);
        let u = Symbol::diagonal(&[c(1.0), c(0.0), c(0.0)], 3).unwrap();
        let m = GeneralizedMultiplier::build(u, g.clone(), f.clone()).unwrap();
        let expect = numerics::tensor(&g.vector(0), &f.vector(0));
        assert!((m.assembled() - expect).norm() < 1e-12);
    }

    #[test]
    fn identity_symbol_on_frame_reproduces_frame_operator() {
        let seq = mercedes();
        let m =
            GeneralizedMultiplier::build(Symbol::identity(3), seq.clone(), seq.clone()).unwrap();
        assert!((m.assembled() - seq.frame_operator()).norm() < 1e-13);
        assert!((m.assembled() - CMatrix::identity(2, 2).scale(1.5)).norm() < 1e-13);
    }

    #[test]
    fn build_rejects_shape_mismatch() {
        let onb = SequenceSystem::standard_basis(3);
        let u = Symbol::identity(2);
        assert!(GeneralizedMultiplier::build(u, onb.clone(), onb).is_err());
    }

    #[test]
    fn apply_matches_assembled_action() {
        let mut rng = random::rng_for_draw(41, 1);
        let f = random::random_bessel(&mut rng, 4, 6);
        let g = random::random_bessel(&mut rng, 5, 7);
        let u = random::random_symbol(&mut rng, 7, 6);
        let m = GeneralizedMultiplier::build(u, g, f).unwrap();
        let x = random::random_vector(&mut rng, 4);
        let staged = m.apply(&x).unwrap();
        let direct = m.assembled() * &x;
        assert!((staged - direct).norm() <= 1e-12 * numerics::scale_of(m.assembled()));
    }

    #[test]
    fn assembled_matches_rank_one_expansion() {
        let mut rng = random::rng_for_draw(41, 2);
        let f = random::random_bessel(&mut rng, 3, 5);
        let g = random::random_bessel(&mut rng, 4, 6);
        let u = random::random_symbol(&mut rng, 6, 5);
        let m = GeneralizedMultiplier::build(u.clone(), g.clone(), f.clone()).unwrap();
        let expansion = rank_one_expansion(&u, &g, &f).unwrap();
        let scale = numerics::scale_of(m.assembled());
        assert!((m.assembled() - expansion).norm() <= 1e-10 * scale);
    }

    #[test]
    fn build_is_linear_in_the_symbol() {
        let mut rng = random::rng_for_draw(41, 3);
        let f = random::random_bessel(&mut rng, 3, 4);
        let g = random::random_bessel(&mut rng, 3, 5);
        let u1 = random::random_matrix(&mut rng, 5, 4);
        let u2 = random::random_matrix(&mut rng, 5, 4);
        let alpha = C64::new(0.7, -0.3);
        let beta = C64::new(-1.1, 0.4);
        let combo = Symbol::dense(&u1 * alpha + &u2 * beta).unwrap();
        let m_combo =
            GeneralizedMultiplier::build(combo, g.clone(), f.clone()).unwrap();
        let m1 = GeneralizedMultiplier::build(Symbol::dense(u1).unwrap(), g.clone(), f.clone())
            .unwrap();
        let m2 = GeneralizedMultiplier::build(Symbol::dense(u2).unwrap(), g, f).unwrap();
        let expect = m1.assembled() * alpha + m2.assembled() * beta;
        assert!((m_combo.assembled() - &expect).norm() <= 1e-12 * numerics::scale_of(&expect));
    }

    #[test]
    fn adjoint_identity_certificate_passes() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 4);
        let f = random::random_bessel(&mut rng, 6, 10);
        let g = random::random_bessel(&mut rng, 6, 10);
        let u = random::random_symbol(&mut rng, 10, 10);
        let m = GeneralizedMultiplier::build(u, g, f).unwrap();
        let cert = adjoint_check(&m, &tol).unwrap();
        assert!(cert.passed());
        assert!(cert.lhs <= 1e-11 * numerics::scale_of(m.assembled()));
    }

    #[test]
    fn adjoint_is_an_involution() {
        let mut rng = random::rng_for_draw(41, 5);
        let f = random::random_bessel(&mut rng, 4, 6);
        let g = random::random_bessel(&mut rng, 5, 7);
        let u = random::random_symbol(&mut rng, 7, 6);
        let m = GeneralizedMultiplier::build(u, g, f).unwrap();
        let back = m.adjoint().unwrap().adjoint().unwrap();
        assert!((back.assembled() - m.assembled()).norm() <= 1e-12 * numerics::scale_of(m.assembled()));
    }

    #[test]
    fn hermitian_symbol_with_shared_system_gives_hermitian_multiplier() {
        let mut rng = random::rng_for_draw(41, 6);
        let f = random::random_bessel(&mut rng, 4, 5);
        let u = random::random_psd_symbol(&mut rng, 5);
        let m = GeneralizedMultiplier::build(u, f.clone(), f).unwrap();
        assert!((m.assembled() - m.assembled().adjoint()).norm() <= 1e-12);
    }

    #[test]
    fn norm_certificates_pass_and_record_bounds() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 7);
        let f = random::random_bessel(&mut rng, 5, 8);
        let g = random::random_bessel(&mut rng, 4, 9);
        let u = random::random_symbol(&mut rng, 9, 8);
        let m = GeneralizedMultiplier::build(u, g, f).unwrap();
        for cert in norm_certificates(&m, &tol).unwrap() {
            assert!(cert.passed(), "{} failed: {} > {}", cert.claim, cert.lhs, cert.rhs);
        }
    }

    #[test]
    fn orthonormal_systems_make_norm_bounds_tight() {
        let mut rng = random::rng_for_draw(41, 8);
        let f = random::random_onb(&mut rng, 5);
        let g = random::random_onb(&mut rng, 5);
        let u = random::random_symbol(&mut rng, 5, 5);
        let u_op = u.norms().unwrap().op;
        let m = GeneralizedMultiplier::build(u, g, f).unwrap();
        let m_op = numerics::operator_norm(m.assembled()).unwrap();
        assert_relative_eq!(m_op, u_op, max_relative = 1e-9);
    }

    #[test]
    fn scaled_basis_attains_norm_bound() {
        // f_k = 2 e_k has Bessel bound 4; with U = I and an orthonormal g
        // the bound sqrt(4 * 1) = 2 is attained.
        let tol = ToleranceConfig::default();
        let f = SequenceSystem::from_synthesis(CMatrix::identity(3, 3).scale(2.0)).unwrap();
        let g = SequenceSystem::standard_basis(3);
        let m = GeneralizedMultiplier::build(Symbol::identity(3), g, f).unwrap();
        let certs = norm_certificates(&m, &tol).unwrap();
        let op = &certs[0];
        assert!(op.passed());
        assert_relative_eq!(op.lhs, 2.0, max_relative = 1e-12);
        assert_relative_eq!(op.rhs, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn positivity_certificate_for_psd_symbol() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 9);
        let f = random::random_bessel(&mut rng, 4, 6);
        let u = random::random_psd_symbol(&mut rng, 6);
        let cert = positivity_check(&u, &f, &tol).unwrap();
        assert!(cert.passed(), "lambda_min {}", cert.context["lambda_min"]);
    }

    #[test]
    fn positivity_with_identity_symbol_reproduces_frame_operator_spectrum() {
        let tol = ToleranceConfig::default();
        let seq = mercedes();
        let cert = positivity_check(&Symbol::identity(3), &seq, &tol).unwrap();
        assert!(cert.passed());
        assert_relative_eq!(cert.context["lambda_min"], 1.5, max_relative = 1e-10);
    }

    #[test]
    fn positivity_of_zero_symbol() {
        let tol = ToleranceConfig::default();
        let seq = SequenceSystem::standard_basis(3);
        let u = Symbol::diagonal(&[c(0.0); 3], 3).unwrap();
        let cert = positivity_check(&u, &seq, &tol).unwrap();
        assert!(cert.passed());
    }

    #[test]
    fn positivity_rejects_non_psd_symbol() {
        let tol = ToleranceConfig::default();
        let seq = SequenceSystem::standard_basis(2);
        let u = Symbol::diagonal(&[c(1.0), c(-1.0)], 2).unwrap();
        assert!(matches!(
            positivity_check(&u, &seq, &tol),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn riesz_lower_bound_is_tight_for_identity() {
        let tol = ToleranceConfig::default();
        let onb = SequenceSystem::standard_basis(4);
        let m = GeneralizedMultiplier::build(Symbol::identity(4), onb.clone(), onb).unwrap();
        let cert = riesz_lower_bound(&m, &tol).unwrap();
        assert!(cert.passed());
        assert_relative_eq!(cert.lhs, 1.0, max_relative = 1e-12);
        assert_relative_eq!(cert.rhs, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn riesz_lower_bound_sees_single_large_column() {
        let tol = ToleranceConfig::default();
        let onb = SequenceSystem::standard_basis(4);
        let mut m_entries = vec![c(0.0); 4];
        m_entries[3] = c(5.0);
        let u = Symbol::diagonal(&m_entries, 4).unwrap();
        let m = GeneralizedMultiplier::build(u, onb.clone(), onb).unwrap();
        let cert = riesz_lower_bound(&m, &tol).unwrap();
        assert!(cert.passed());
        assert_relative_eq!(cert.context["column_norm_max"], 5.0, max_relative = 1e-12);
    }

    #[test]
    fn riesz_lower_bound_rejects_overcomplete_input() {
        let tol = ToleranceConfig::default();
        let seq = mercedes();
        let m = GeneralizedMultiplier::build(Symbol::identity(3), seq.clone(), seq).unwrap();
        assert!(matches!(
            riesz_lower_bound(&m, &tol),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn composition_through_biorthogonal_middle() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 10);
        let f = random::random_riesz(&mut rng, 4);
        let l = f.biorthogonal_dual(&tol).unwrap();
        let g = random::random_bessel(&mut rng, 3, 5);
        let h = random::random_bessel(&mut rng, 5, 6);
        let u1 = random::random_symbol(&mut rng, 5, 4);
        let u2 = random::random_symbol(&mut rng, 4, 6);
        let m1 = GeneralizedMultiplier::build(u1, g, f).unwrap();
        let m2 = GeneralizedMultiplier::build(u2, l, h).unwrap();
        let composed = compose_biorthogonal(&m1, &m2, &tol).unwrap();
        let product = m1.assembled() * m2.assembled();
        let scale = numerics::scale_of(composed.assembled());
        assert!((composed.assembled() - product).norm() <= 1e-10 * scale);
    }

    #[test]
    fn composition_on_shared_orthonormal_basis_multiplies_symbols() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 11);
        let onb = random::random_onb(&mut rng, 4);
        let u1 = random::random_symbol(&mut rng, 4, 4);
        let u2 = random::random_symbol(&mut rng, 4, 4);
        let m1 =
            GeneralizedMultiplier::build(u1.clone(), onb.clone(), onb.clone()).unwrap();
        let m2 =
            GeneralizedMultiplier::build(u2.clone(), onb.clone(), onb.clone()).unwrap();
        let composed = compose_biorthogonal(&m1, &m2, &tol).unwrap();
        let direct = GeneralizedMultiplier::build(
            u1.compose(&u2).unwrap(),
            onb.clone(),
            onb,
        )
        .unwrap();
        assert!(
            (composed.assembled() - direct.assembled()).norm()
                <= 1e-10 * numerics::scale_of(direct.assembled())
        );
    }

    #[test]
    fn composition_rejects_non_biorthogonal_middle() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(41, 12);
        let f = random::random_riesz(&mut rng, 4);
        let mut l_mat = f.biorthogonal_dual(&tol).unwrap().synthesis_matrix().clone();
        l_mat[(0, 0)] += c(0.05);
        let l = SequenceSystem::from_synthesis(l_mat).unwrap();
        let g = random::random_bessel(&mut rng, 3, 5);
        let h = random::random_bessel(&mut rng, 5, 6);
        let m1 = GeneralizedMultiplier::build(random::random_symbol(&mut rng, 5, 4), g, f).unwrap();
        let m2 = GeneralizedMultiplier::build(random::random_symbol(&mut rng, 4, 6), l, h).unwrap();
        assert!(matches!(
            compose_biorthogonal(&m1, &m2, &tol),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn singular_profile_of_rank_one_multiplier() {
        let onb = SequenceSystem::standard_basis(3);
        let u = Symbol::diagonal(&[c(1.0), c(0.0), c(0.0)], 3).unwrap();
        let m = GeneralizedMultiplier::build(u, onb.clone(), onb).unwrap();
        let s = m.singular_profile().unwrap();
        assert_eq!(s.rank(1e-12), 1);
    }

    #[test]
    fn singular_profile_of_zero_multiplier() {
        let onb = SequenceSystem::standard_basis(2);
        let u = Symbol::diagonal(&[c(0.0), c(0.0)], 2).unwrap();
        let m = GeneralizedMultiplier::build(u, onb.clone(), onb).unwrap();
        assert_eq!(m.singular_profile().unwrap().values(), &[0.0, 0.0]);
    }

    #[test]
    fn triblock_profile_matches_symbol_svd_on_orthonormal_systems() {
        let onb = SequenceSystem::standard_basis(6);
        let u = Symbol::triblock(6).unwrap();
        let direct = u.singular_profile().unwrap();
        let m = GeneralizedMultiplier::build(u, onb.clone(), onb).unwrap();
        let through = m.singular_profile().unwrap();
        for (a, b) in direct.values().iter().zip(through.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn certificate_margin_sign_tracks_verdict() {
        let pass = Certificate::inequality("x", 1.0, 2.0, 1e-9, 1.0, BTreeMap::new());
        assert!(pass.passed() && pass.margin() > 0.0);
        let fail = Certificate::inequality("x", 3.0, 2.0, 1e-9, 1.0, BTreeMap::new());
        assert!(!fail.passed() && fail.margin() < 0.0);
    }
}
