//! Inversion and frame-detection machinery: the Riesz inverse formula,
//! lower frame bounds derived from invertible or bounded-below multipliers,
//! sesquilinear-form and near-identity sufficient conditions, reproducing
//! pairs, and the quantitative perturbation criterion.

use crate::multiplier::{Certificate, GeneralizedMultiplier};
use crate::numerics::{self, ToleranceConfig};
use crate::sequences::SequenceSystem;
use crate::symbols::Symbol;
use crate::{C64, CMatrix, Error, Result};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseMethod {
    RieszFormula,
    DirectSolve,
}

/// Summary of an invertibility analysis of one assembled multiplier.
#[derive(Clone, Debug, Serialize)]
pub struct InvertibilityReport {
    pub sigma_min: f64,
    pub invertible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<InverseMethod>,
    /// Lower frame bound derived for the synthesis sequence {g_k}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_lower_bound_synthesis: Option<f64>,
    /// Lower frame bound derived for the analysis sequence {f_k}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_lower_bound_analysis: Option<f64>,
}

/// Outcome of inverting through biorthogonal duals.
#[derive(Clone, Debug)]
pub enum RieszInversion {
    Invertible {
        inverse: Box<GeneralizedMultiplier>,
        left_residual: f64,
        right_residual: f64,
    },
    /// Singular symbol; the assembled multiplier must then be singular too.
    Singular {
        symbol_sigma_min: f64,
        multiplier_sigma_min: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub details: BTreeMap<String, f64>,
}

impl Hypothesis {
    fn new(name: &str, holds: bool, details: BTreeMap<String, f64>) -> Hypothesis {
        Hypothesis { name: name.into(), holds, details }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// Hypotheses held and the conclusion checked out.
    Confirmed,
    /// Some hypothesis failed; no claim either way.
    NotApplicable,
    /// Hypotheses held but the conclusion failed.
    Violated,
}

/// One proposition checked on one instance: which hypotheses held, whether
/// the conclusion was confirmed, and the measured margins.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub proposition: String,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion_checked: bool,
    pub margins: BTreeMap<String, f64>,
}

impl Verdict {
    pub fn status(&self) -> VerdictStatus {
        if self.hypotheses.iter().any(|h| !h.holds) {
            VerdictStatus::NotApplicable
        } else if self.conclusion_checked {
            VerdictStatus::Confirmed
        } else {
            VerdictStatus::Violated
        }
    }
}

fn require_square(m: &GeneralizedMultiplier) -> Result<usize> {
    let a = m.assembled();
    if a.nrows() != a.ncols() {
        return Err(Error::Precondition(format!(
            "need a square assembled multiplier, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Inverts M = D_g U C_f through the biorthogonal duals:
/// M^{-1} = D_{f~} U^{-1} C_{g~}. Requires Riesz bases on both sides; a
/// singular symbol yields the `Singular` variant, whose assembled
/// multiplier is checked to be singular as well.
pub fn riesz_inverse(m: &GeneralizedMultiplier, tol: &ToleranceConfig) -> Result<RieszInversion> {
    let f_class = m.analysis_seq().classify(tol)?;
    let g_class = m.synthesis_seq().classify(tol)?;
    if !f_class.kind.is_riesz() || !g_class.kind.is_riesz() {
        return Err(Error::Precondition(format!(
            "inversion through duals needs Riesz bases, got {:?} and {:?}",
            f_class.kind, g_class.kind
        )));
    }
    let u = m.symbol();
    if u.rows() != u.cols() {
        return Err(Error::DimensionMismatch(format!(
            "inversion needs a square symbol, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let u_spectrum = u.singular_profile()?;
    if !numerics::spectrum_invertible(&u_spectrum, tol) {
        let m_spectrum = m.singular_profile()?;
        return Ok(RieszInversion::Singular {
            symbol_sigma_min: u_spectrum.smallest(),
            multiplier_sigma_min: m_spectrum.smallest(),
        });
    }
    let u_inv = u.invert(tol)?;
    let f_dual = m.analysis_seq().biorthogonal_dual(tol)?;
    let g_dual = m.synthesis_seq().biorthogonal_dual(tol)?;
    let inverse = GeneralizedMultiplier::build(u_inv, f_dual, g_dual)?;
    let d = m.assembled().nrows();
    let eye = CMatrix::identity(d, d);
    let left_residual = numerics::operator_norm(&(inverse.assembled() * m.assembled() - &eye))?;
    let right_residual = numerics::operator_norm(&(m.assembled() * inverse.assembled() - &eye))?;
    Ok(RieszInversion::Invertible { inverse: Box::new(inverse), left_residual, right_residual })
}

/// From an invertible multiplier, derives lower frame bounds for both
/// sequences: A_g >= (|U| |M^{-1}|)^{-2} / B_f and symmetrically for f,
/// each certified against the spectral lower bound.
pub fn lower_frame_from_invertible(
    m: &GeneralizedMultiplier,
    tol: &ToleranceConfig,
) -> Result<(InvertibilityReport, Vec<Certificate>)> {
    require_square(m)?;
    let spectrum = m.singular_profile()?;
    if !numerics::spectrum_invertible(&spectrum, tol) {
        return Err(Error::Precondition(format!(
            "multiplier is singular: sigma_min = {:.3e}",
            spectrum.smallest()
        )));
    }
    let m_inv = numerics::inverse(m.assembled(), tol)?;
    let d = m.assembled().nrows();
    let residual =
        numerics::operator_norm(&(m.assembled() * &m_inv - CMatrix::identity(d, d)))?;
    let u_op = m.symbol().norms()?.op;
    let m_inv_op = numerics::operator_norm(&m_inv)?;
    let inv_factor = (u_op * m_inv_op).powi(-2);
    let f_bounds = m.analysis_seq().frame_bounds(tol)?;
    let g_bounds = m.synthesis_seq().frame_bounds(tol)?;
    let derived_g = inv_factor / f_bounds.upper;
    let derived_f = inv_factor / g_bounds.upper;
    let mut certs = Vec::with_capacity(2);
    for (claim, derived, actual) in [
        ("derived_lower_bound_synthesis", derived_g, g_bounds.lower),
        ("derived_lower_bound_analysis", derived_f, f_bounds.lower),
    ] {
        let mut context = BTreeMap::new();
        context.insert("derived".into(), derived);
        context.insert("spectral_lower_bound".into(), actual);
        context.insert("symbol_op_norm".into(), u_op);
        context.insert("inverse_op_norm".into(), m_inv_op);
        let scale = derived.abs().max(actual.abs()).max(1.0);
        certs.push(Certificate::inequality(claim, derived, actual, tol.bound_slack, scale, context));
    }
    let report = InvertibilityReport {
        sigma_min: spectrum.smallest(),
        invertible: true,
        inverse_residual: Some(residual),
        method: Some(InverseMethod::DirectSolve),
        derived_lower_bound_synthesis: Some(derived_g),
        derived_lower_bound_analysis: Some(derived_f),
    };
    Ok((report, certs))
}

/// With {g_k} a Riesz basis and an invertible symbol, the multiplier is
/// invertible exactly when {f_k} is a Riesz basis; checks both sides of
/// the equivalence numerically.
pub fn invertible_iff_riesz(
    m: &GeneralizedMultiplier,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    let g_class = m.synthesis_seq().classify(tol)?;
    if !g_class.kind.is_riesz() {
        return Err(Error::Precondition(format!(
            "the synthesis sequence must be a Riesz basis, got {:?}",
            g_class.kind
        )));
    }
    let u = m.symbol();
    if u.rows() != u.cols() {
        return Err(Error::Precondition(format!(
            "the symbol must be invertible, got a {}x{} matrix",
            u.rows(),
            u.cols()
        )));
    }
    let u_spectrum = u.singular_profile()?;
    if !numerics::spectrum_invertible(&u_spectrum, tol) {
        return Err(Error::Precondition(format!(
            "the symbol must be invertible: sigma_min = {:.3e}",
            u_spectrum.smallest()
        )));
    }
    let g_bounds = m.synthesis_seq().frame_bounds(tol)?;
    let mut g_details = BTreeMap::new();
    g_details.insert("lower".into(), g_bounds.lower);
    g_details.insert("upper".into(), g_bounds.upper);
    let mut u_details = BTreeMap::new();
    u_details.insert("sigma_min".into(), u_spectrum.smallest());
    u_details.insert("sigma_max".into(), u_spectrum.largest());

    let spectrum = m.singular_profile()?;
    let square = m.assembled().nrows() == m.assembled().ncols();
    let invertible = square && numerics::spectrum_invertible(&spectrum, tol);
    let f_class = m.analysis_seq().classify(tol)?;
    let f_bounds = m.analysis_seq().frame_bounds(tol)?;
    let f_riesz = f_class.kind.is_riesz();

    let mut margins = BTreeMap::new();
    margins.insert("multiplier_sigma_min".into(), spectrum.smallest());
    margins.insert("multiplier_sigma_max".into(), spectrum.largest());
    margins.insert("analysis_lower_bound".into(), f_bounds.lower);
    margins.insert("analysis_upper_bound".into(), f_bounds.upper);
    Ok(Verdict {
        proposition: "invertible_iff_analysis_riesz".into(),
        hypotheses: vec![
            Hypothesis::new("synthesis_riesz", true, g_details),
            Hypothesis::new("symbol_invertible", true, u_details),
        ],
        conclusion_checked: invertible == f_riesz,
        margins,
    })
}

/// A multiplier bounded below by C forces a lower frame bound
/// C^2 / (B_g |U|^2) on the analysis sequence. C is sigma_min when the
/// assembled matrix has no nontrivial kernel by shape, else 0; at or
/// below the floor there is no conclusion and no certificate.
pub fn bounded_below_frame_bound(
    m: &GeneralizedMultiplier,
    tol: &ToleranceConfig,
) -> Result<(InvertibilityReport, Option<Certificate>)> {
    let a = m.assembled();
    let spectrum = m.singular_profile()?;
    let c = if a.nrows() >= a.ncols() { spectrum.smallest() } else { 0.0 };
    let invertible =
        a.nrows() == a.ncols() && numerics::spectrum_invertible(&spectrum, tol);
    let floor = tol.invert_floor * spectrum.largest();
    if c <= floor {
        let report = InvertibilityReport {
            sigma_min: spectrum.smallest(),
            invertible,
            inverse_residual: None,
            method: None,
            derived_lower_bound_synthesis: None,
            derived_lower_bound_analysis: None,
        };
        return Ok((report, None));
    }
    let u_op = m.symbol().norms()?.op;
    let g_bounds = m.synthesis_seq().frame_bounds(tol)?;
    let f_bounds = m.analysis_seq().frame_bounds(tol)?;
    let derived = c.powi(2) / (g_bounds.upper * u_op.powi(2));
    let mut context = BTreeMap::new();
    context.insert("bounded_below_constant".into(), c);
    context.insert("synthesis_upper_bound".into(), g_bounds.upper);
    context.insert("symbol_op_norm".into(), u_op);
    let scale = derived.abs().max(f_bounds.lower.abs()).max(1.0);
    let cert = Certificate::inequality(
        "bounded_below_lower_frame_bound",
        derived,
        f_bounds.lower,
        tol.bound_slack,
        scale,
        context,
    );
    let report = InvertibilityReport {
        sigma_min: spectrum.smallest(),
        invertible,
        inverse_residual: None,
        method: None,
        derived_lower_bound_synthesis: None,
        derived_lower_bound_analysis: Some(derived),
    };
    Ok((report, Some(cert)))
}

/// Largest over a phase grid of the smallest eigenvalue of
/// Herm(e^{i theta} M); any grid point at or above `a` proves
/// |<Mh, h>| >= a |h|^2 for every h.
fn certified_form_bound(assembled: &CMatrix, tol: &ToleranceConfig) -> Result<f64> {
    const GRID: usize = 360;
    let mut best = f64::NEG_INFINITY;
    for step in 0..GRID {
        let theta = 2.0 * std::f64::consts::PI * (step as f64) / (GRID as f64);
        let rotated = assembled * C64::from_polar(1.0, theta);
        let herm = (&rotated + rotated.adjoint()).scale(0.5);
        let lambda_min = numerics::hermitian_eigenvalues(&herm, tol)?
            .first()
            .copied()
            .unwrap_or(f64::NEG_INFINITY);
        best = best.max(lambda_min);
    }
    Ok(best)
}

/// Sufficient condition through the sesquilinear form: if
/// |<Mh, h>| >= a |h|^2 for all h, both sequences are frames with lower
/// bounds a^2 / (B |U|^2). The hypothesis is certified through a phase
/// grid when possible and probed on unit vectors otherwise.
pub fn sesquilinear_lower_check(
    m: &GeneralizedMultiplier,
    a: f64,
    rng: &mut impl Rng,
    probes: usize,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the form lower bound must be positive and finite, got {a}"
        )));
    }
    let d = require_square(m)?;
    let assembled = m.assembled();
    let scale = numerics::scale_of(assembled);

    let certified = certified_form_bound(assembled, tol)?;
    let herm = (assembled + assembled.adjoint()).scale(0.5);
    let herm_eig = numerics::hermitian_eig(&herm, tol)?;
    let mut min_probe = f64::INFINITY;
    let form_at = |h: &crate::CVector| {
        let mh = assembled * h;
        numerics::inner(&mh, h).norm()
    };
    for k in 0..d {
        let col = herm_eig.eigenvectors.column(k).clone_owned();
        min_probe = min_probe.min(form_at(&col));
    }
    for _ in 0..probes {
        let h = crate::random::random_unit_vector(rng, d);
        min_probe = min_probe.min(form_at(&h));
    }
    let slack = tol.bound_slack * scale.max(1.0);
    let is_certified = certified >= a - slack;
    let holds = is_certified || min_probe >= a - slack;
    let mut details = BTreeMap::new();
    details.insert("certified_form_bound".into(), certified);
    details.insert("min_probe".into(), min_probe);
    details.insert("certified".into(), if is_certified { 1.0 } else { 0.0 });

    let u_op = m.symbol().norms()?.op;
    let f_bounds = m.analysis_seq().frame_bounds(tol)?;
    let g_bounds = m.synthesis_seq().frame_bounds(tol)?;
    let derived_f = a.powi(2) / (g_bounds.upper * u_op.powi(2));
    let derived_g = a.powi(2) / (f_bounds.upper * u_op.powi(2));
    let f_ok = f_bounds.lower >= derived_f * (1.0 - tol.bound_slack) - slack;
    let g_ok = g_bounds.lower >= derived_g * (1.0 - tol.bound_slack) - slack;

    let mut margins = BTreeMap::new();
    margins.insert("derived_analysis_lower".into(), derived_f);
    margins.insert("analysis_lower_bound".into(), f_bounds.lower);
    margins.insert("derived_synthesis_lower".into(), derived_g);
    margins.insert("synthesis_lower_bound".into(), g_bounds.lower);
    margins.insert("certified_form_bound".into(), certified);
    margins.insert("min_probe".into(), min_probe);
    Ok(Verdict {
        proposition: "sesquilinear_form_lower_bound".into(),
        hypotheses: vec![Hypothesis::new("form_bounded_below", holds, details)],
        conclusion_checked: holds && f_ok && g_ok,
        margins,
    })
}

/// Near-identity condition |h - Mh| <= l1 |h| + l2 |Mh|: certified when
/// |I - M|_op + max(-l2, 0) |M|_op <= l1, probed otherwise; concludes
/// sigma_min >= (1 - l1) / (1 + l2) for M and its adjoint.
pub fn identity_perturbation_check(
    m: &GeneralizedMultiplier,
    lambda1: f64,
    lambda2: f64,
    rng: &mut impl Rng,
    probes: usize,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    if !lambda1.is_finite() || lambda1 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be finite and < 1, got {lambda1}"
        )));
    }
    if !lambda2.is_finite() || lambda2 <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda2 must be finite and > -1, got {lambda2}"
        )));
    }
    let d = require_square(m)?;
    let assembled = m.assembled();
    let eye = CMatrix::identity(d, d);
    let identity_distance = numerics::operator_norm(&(&eye - assembled))?;
    let m_op = numerics::operator_norm(assembled)?;
    let certified =
        identity_distance + (-lambda2).max(0.0) * m_op <= lambda1 + tol.bound_slack;

    let mut probe_margin = f64::INFINITY;
    for _ in 0..probes {
        let h = crate::random::random_unit_vector(rng, d);
        let mh = assembled * &h;
        let lhs = (&h - &mh).norm();
        probe_margin = probe_margin.min(lambda1 + lambda2 * mh.norm() - lhs);
    }
    let probes_ok = probe_margin >= -tol.bound_slack;
    let holds = certified || probes_ok;
    let mut details = BTreeMap::new();
    details.insert("identity_distance".into(), identity_distance);
    details.insert("certified".into(), if certified { 1.0 } else { 0.0 });
    details.insert("min_probe_margin".into(), probe_margin);

    let bound = (1.0 - lambda1) / (1.0 + lambda2);
    let sigma_min = m.singular_profile()?.smallest();
    let adjoint_sigma_min = m.adjoint()?.singular_profile()?.smallest();
    let slack = tol.bound_slack * numerics::scale_of(assembled).max(1.0);
    let conclusion =
        sigma_min >= bound - slack && adjoint_sigma_min >= bound - slack;

    let mut margins = BTreeMap::new();
    margins.insert("derived_sigma_bound".into(), bound);
    margins.insert("sigma_min".into(), sigma_min);
    margins.insert("adjoint_sigma_min".into(), adjoint_sigma_min);
    margins.insert("identity_distance".into(), identity_distance);
    Ok(Verdict {
        proposition: "near_identity_invertibility".into(),
        hypotheses: vec![Hypothesis::new("near_identity", holds, details)],
        conclusion_checked: holds && conclusion,
        margins,
    })
}

/// The pair (f, g) reproduces exactly when the mixed operator
/// D_g C_f is invertible.
pub fn reproducing_pair_check(
    f_seq: &SequenceSystem,
    g_seq: &SequenceSystem,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    if f_seq.dim() != g_seq.dim() || f_seq.count() != g_seq.count() {
        return Err(Error::DimensionMismatch(format!(
            "reproducing pairs need matching systems, got {}x{} vs {}x{}",
            f_seq.dim(),
            f_seq.count(),
            g_seq.dim(),
            g_seq.count()
        )));
    }
    let mixed = g_seq.synthesis_matrix() * f_seq.analysis_matrix();
    let spectrum = numerics::singular_values(&mixed)?;
    let invertible = numerics::spectrum_invertible(&spectrum, tol);
    let mut details = BTreeMap::new();
    details.insert("sigma_min".into(), spectrum.smallest());
    details.insert("sigma_max".into(), spectrum.largest());
    let mut margins = BTreeMap::new();
    margins.insert("sigma_min".into(), spectrum.smallest());
    margins.insert("sigma_max".into(), spectrum.largest());
    if invertible {
        let inv = numerics::inverse(&mixed, tol)?;
        let d = mixed.nrows();
        let residual =
            numerics::operator_norm(&(&mixed * inv - CMatrix::identity(d, d)))?;
        margins.insert("inverse_residual".into(), residual);
    }
    Ok(Verdict {
        proposition: "reproducing_pair".into(),
        hypotheses: vec![Hypothesis::new("mixed_operator_invertible", invertible, details)],
        conclusion_checked: invertible,
        margins,
    })
}

/// Quantitative perturbation criterion: for a frame f with bounds (A, B),
/// a perturbed family g with mu* = lambda_max(S_{f-g}) inside
/// (0, (1/B)((AB^2 - A^2 B)/(A^2 + B^2))^2) and a symbol with
/// |U - I| < A^2/B^2, the family g is a frame and D_f U C_g is
/// invertible. Tight frames make the mu interval empty, so the verdict
/// is not applicable there.
pub fn perturbation_invertibility(
    symbol: &Symbol,
    f_seq: &SequenceSystem,
    g_seq: &SequenceSystem,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    if f_seq.dim() != g_seq.dim() || f_seq.count() != g_seq.count() {
        return Err(Error::DimensionMismatch(format!(
            "perturbation check needs matching systems, got {}x{} vs {}x{}",
            f_seq.dim(),
            f_seq.count(),
            g_seq.dim(),
            g_seq.count()
        )));
    }
    let n = f_seq.count();
    if symbol.rows() != n || symbol.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "the symbol must be {n}x{n} to compare with the identity, got {}x{}",
            symbol.rows(),
            symbol.cols()
        )));
    }
    let f_class = f_seq.classify(tol)?;
    let f_bounds = f_seq.frame_bounds(tol)?;
    let (a, b) = (f_bounds.lower, f_bounds.upper);
    let mut f_details = BTreeMap::new();
    f_details.insert("lower".into(), a);
    f_details.insert("upper".into(), b);
    let f_is_frame = f_class.kind.is_frame();

    let diff = f_seq.synthesis_matrix() - g_seq.synthesis_matrix();
    let s_diff = &diff * diff.adjoint();
    let mu_star = numerics::hermitian_eigenvalues(&s_diff, tol)?
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let mu_bound = if f_is_frame && b > 0.0 {
        ((a * b.powi(2) - a.powi(2) * b) / (a.powi(2) + b.powi(2))).powi(2) / b
    } else {
        0.0
    };
    let mut mu_details = BTreeMap::new();
    mu_details.insert("mu_star".into(), mu_star);
    mu_details.insert("mu_bound".into(), mu_bound);
    let mu_ok = mu_bound > 0.0 && mu_star < mu_bound;

    let eye = CMatrix::identity(n, n);
    let u_distance = numerics::operator_norm(&(symbol.matrix() - &eye))?;
    let u_budget = if b > 0.0 { a.powi(2) / b.powi(2) } else { 0.0 };
    let mut u_details = BTreeMap::new();
    u_details.insert("identity_distance".into(), u_distance);
    u_details.insert("budget".into(), u_budget);
    let u_ok = u_distance < u_budget;

    let hypotheses = vec![
        Hypothesis::new("base_is_frame", f_is_frame, f_details),
        Hypothesis::new("perturbation_within_mu_interval", mu_ok, mu_details),
        Hypothesis::new("symbol_near_identity", u_ok, u_details),
    ];

    let mut margins = BTreeMap::new();
    margins.insert("mu_star".into(), mu_star);
    margins.insert("mu_bound".into(), mu_bound);
    margins.insert("symbol_identity_distance".into(), u_distance);
    margins.insert("symbol_identity_budget".into(), u_budget);

    if !(f_is_frame && mu_ok && u_ok) {
        return Ok(Verdict {
            proposition: "perturbed_family_frame_and_invertible".into(),
            hypotheses,
            conclusion_checked: false,
            margins,
        });
    }

    let g_class = g_seq.classify(tol)?;
    let g_bounds = g_seq.frame_bounds(tol)?;
    let m_fg =
        GeneralizedMultiplier::build(symbol.clone(), f_seq.clone(), g_seq.clone())?;
    let m_ff =
        GeneralizedMultiplier::build(symbol.clone(), f_seq.clone(), f_seq.clone())?;
    let spectrum = m_fg.singular_profile()?;
    let invertible = numerics::spectrum_invertible(&spectrum, tol);

    // Proof chain: M_{U,f,f} stays within A^2/B of S_f, and switching the
    // analysis side to g moves the multiplier by at most |U| sqrt(B mu*).
    let chain_frame_distance =
        numerics::operator_norm(&(m_ff.assembled() - f_seq.frame_operator()))?;
    let chain_cross_distance =
        numerics::operator_norm(&(m_fg.assembled() - m_ff.assembled()))?;
    let u_op = symbol.norms()?.op;
    let chain_cross_budget = u_op * (b * mu_star).sqrt();

    margins.insert("multiplier_sigma_min".into(), spectrum.smallest());
    margins.insert("perturbed_lower_bound".into(), g_bounds.lower);
    margins.insert("perturbed_upper_bound".into(), g_bounds.upper);
    margins.insert("chain_frame_operator_distance".into(), chain_frame_distance);
    margins.insert("chain_frame_operator_budget".into(), a.powi(2) / b);
    margins.insert("chain_cross_distance".into(), chain_cross_distance);
    margins.insert("chain_cross_budget".into(), chain_cross_budget);

    let slack = tol.bound_slack;
    let chain_ok = chain_frame_distance <= a.powi(2) / b + slack
        && chain_cross_distance <= chain_cross_budget * (1.0 + slack) + slack;
    let conclusion = g_class.kind.is_frame() && invertible && chain_ok;
    Ok(Verdict {
        proposition: "perturbed_family_frame_and_invertible".into(),
        hypotheses,
        conclusion_checked: conclusion,
        margins,
    })
}
