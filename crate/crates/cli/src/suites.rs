//! Randomized check suites. Each suite replays one family of claims on
//! seeded draws: sizes and instances come from a per-draw ChaCha stream,
//! so any draw index can be reproduced in isolation.

use crate::config::SweepConfig;
use crate::report::{DrawRow, DrawStatus, SuiteReport};
use gbmul::invertibility::{
    self, identity_perturbation_check, invertible_iff_riesz, perturbation_invertibility,
    riesz_inverse, sesquilinear_lower_check, RieszInversion, VerdictStatus,
};
use gbmul::multiplier::{
    adjoint_check, compose_biorthogonal, norm_certificates, rank_one_expansion, riesz_lower_bound,
    Certificate,
};
use gbmul::numerics::{self, frobenius_norm, operator_norm, scale_of};
use gbmul::perturbation::{ConvergenceExperiment, NormMode, Schedule};
use gbmul::random::{
    pick_size, random_bessel, random_frame, random_matrix, random_onb, random_psd_symbol,
    random_riesz, random_symbol, random_symbol_with_fixed_sigma, random_symbol_with_sigma,
    random_unitary, rng_for_draw, uniform, DrawRng,
};
use gbmul::{
    C64, CMatrix, Error, GeneralizedMultiplier, Result, SequenceSystem, Symbol, ToleranceConfig,
};
use std::collections::BTreeMap;
use std::str::FromStr;

/// The ten claim families a sweep can exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteKind {
    /// Assembly oracle, operator/Schatten envelopes, adjoint identity,
    /// and envelope tightness on orthonormal bases.
    NormBounds,
    /// Lower frame bounds forced by a multiplier bounded away from zero,
    /// including the sesquilinear-form route.
    BoundedBelow,
    /// Invertibility of multipliers within a near-identity corridor.
    IdentityPerturbation,
    /// Column-norm lower bound for Riesz pairs.
    RieszLower,
    /// Symbolic calculus through biorthogonal middle systems.
    Composition,
    /// Inversion through biorthogonal duals, against direct solves.
    Inversion,
    /// Lower frame bounds derived from an invertible multiplier.
    DerivedLowerBound,
    /// Multiplier invertibility as a detector of Riesz analysis systems.
    RieszDetection,
    /// Joint sequence-and-symbol perturbation keeping invertibility.
    FramePerturbation,
    /// Perturbation schedules: envelopes and decay transfer.
    Convergence,
}

impl SuiteKind {
    pub fn all() -> [SuiteKind; 10] {
        [
            SuiteKind::NormBounds,
            SuiteKind::BoundedBelow,
            SuiteKind::IdentityPerturbation,
            SuiteKind::RieszLower,
            SuiteKind::Composition,
            SuiteKind::Inversion,
            SuiteKind::DerivedLowerBound,
            SuiteKind::RieszDetection,
            SuiteKind::FramePerturbation,
            SuiteKind::Convergence,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::NormBounds => "norm-bounds",
            SuiteKind::BoundedBelow => "bounded-below",
            SuiteKind::IdentityPerturbation => "identity-perturbation",
            SuiteKind::RieszLower => "riesz-lower",
            SuiteKind::Composition => "composition",
            SuiteKind::Inversion => "inversion",
            SuiteKind::DerivedLowerBound => "derived-lower-bound",
            SuiteKind::RieszDetection => "riesz-detection",
            SuiteKind::FramePerturbation => "frame-perturbation",
            SuiteKind::Convergence => "convergence",
        }
    }
}

impl FromStr for SuiteKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SuiteKind::all()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = SuiteKind::all().iter().map(|k| k.name()).collect();
                format!("unknown suite '{s}', expected one of: {}", names.join(", "))
            })
    }
}

/// Runs one suite over all draws (or a single replayed draw) and
/// aggregates the rows.
pub fn run_suite(
    kind: SuiteKind,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    replay: Option<u64>,
) -> Result<SuiteReport> {
    if let Some(draw) = replay {
        if draw >= cfg.draws {
            return Err(Error::InvalidParameter(format!(
                "replay index {draw} is outside 0..{}",
                cfg.draws
            )));
        }
    }
    let indices: Vec<u64> = match replay {
        Some(draw) => vec![draw],
        None => (0..cfg.draws).collect(),
    };
    let mut rows = Vec::with_capacity(indices.len());
    for draw in indices {
        rows.push(run_draw(kind, cfg, tol, draw, replay.is_some())?);
    }
    Ok(SuiteReport::from_rows(
        kind.name(),
        cfg.seed,
        cfg.draws,
        cfg.dims.to_string(),
        cfg.counts.to_string(),
        tol.clone(),
        rows,
    ))
}

/// Runs a single draw of a suite. `want_detail` forces full certificate
/// JSON into the row; failures always carry it.
pub fn run_draw(
    kind: SuiteKind,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let mut rng = rng_for_draw(cfg.seed, draw);
    match kind {
        SuiteKind::NormBounds => norm_bounds_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::BoundedBelow => bounded_below_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::IdentityPerturbation => {
            identity_perturbation_draw(&mut rng, cfg, tol, draw, want_detail)
        }
        SuiteKind::RieszLower => riesz_lower_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::Composition => composition_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::Inversion => inversion_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::DerivedLowerBound => {
            derived_lower_bound_draw(&mut rng, cfg, tol, draw, want_detail)
        }
        SuiteKind::RieszDetection => riesz_detection_draw(&mut rng, cfg, tol, draw, want_detail),
        SuiteKind::FramePerturbation => {
            frame_perturbation_draw(&mut rng, cfg, tol, draw, want_detail)
        }
        SuiteKind::Convergence => convergence_draw(&mut rng, cfg, tol, draw, want_detail),
    }
}

fn pick_dim(rng: &mut DrawRng, cfg: &SweepConfig) -> usize {
    let dims = cfg.dims.at_least(2);
    pick_size(rng, dims.lo, dims.hi)
}

fn pick_count(rng: &mut DrawRng, cfg: &SweepConfig, min: usize) -> usize {
    let counts = cfg.counts.at_least(min);
    pick_size(rng, counts.lo, counts.hi)
}

fn row_from_certs(
    draw: u64,
    dim: usize,
    count: usize,
    certs: Vec<Certificate>,
    want_detail: bool,
) -> DrawRow {
    let mut status = DrawStatus::Pass;
    let mut worst: Option<(f64, String)> = None;
    for cert in &certs {
        if !cert.passed() {
            status = DrawStatus::Fail;
        }
        let margin = cert.margin();
        if worst.as_ref().is_none_or(|(w, _)| margin < *w) {
            worst = Some((margin, cert.claim.clone()));
        }
    }
    let (worst_margin, worst_claim) = match worst {
        Some((m, c)) => (Some(m), c),
        None => (None, "no_certificates".to_string()),
    };
    let detail = (want_detail || status == DrawStatus::Fail)
        .then(|| serde_json::json!({ "certificates": certs }));
    DrawRow { draw, dim, count, status, worst_claim, worst_margin, detail }
}

fn row_from_verdict(
    draw: u64,
    dim: usize,
    count: usize,
    verdict: invertibility::Verdict,
    margin: Option<f64>,
    want_detail: bool,
) -> DrawRow {
    let status = match verdict.status() {
        VerdictStatus::Confirmed => DrawStatus::Pass,
        VerdictStatus::NotApplicable => DrawStatus::NotApplicable,
        VerdictStatus::Violated => DrawStatus::Fail,
    };
    let detail = (want_detail || status == DrawStatus::Fail)
        .then(|| serde_json::json!({ "verdict": verdict }));
    DrawRow {
        draw,
        dim,
        count,
        status,
        worst_claim: verdict.proposition.clone(),
        worst_margin: margin,
        detail,
    }
}

/// Difference of two margin entries, when both are present.
fn margin_gap(verdict: &invertibility::Verdict, upper: &str, lower: &str) -> Option<f64> {
    Some(verdict.margins.get(upper)? - verdict.margins.get(lower)?)
}

fn min_margin(candidates: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    candidates.into_iter().flatten().reduce(f64::min)
}

fn norm_bounds_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let n = pick_count(rng, cfg, 1);
    let g = random_bessel(rng, d, n);
    let f = random_bessel(rng, d, n);
    let u = random_symbol(rng, n, n);
    let m = GeneralizedMultiplier::build(u.clone(), g.clone(), f.clone())?;

    let mut certs = Vec::new();
    let expansion = rank_one_expansion(&u, &g, &f)?;
    let scale = scale_of(m.assembled()).max(scale_of(&expansion));
    let residual = frobenius_norm(&(m.assembled() - &expansion));
    certs.push(Certificate::identity(
        "assembly_expansion",
        residual,
        tol.eq_abs,
        scale,
        BTreeMap::new(),
    ));
    certs.extend(norm_certificates(&m, tol)?);
    certs.push(adjoint_check(&m, tol)?);

    // Orthonormal pairs attain the operator-norm envelope.
    if draw % 4 == 3 {
        let e1 = random_onb(rng, d);
        let e2 = random_onb(rng, d);
        let u2 = random_symbol(rng, d, d);
        let m2 = GeneralizedMultiplier::build(u2.clone(), e1, e2)?;
        let u_op = u2.norms()?.op;
        let m_op = operator_norm(m2.assembled())?;
        let mut ctx = BTreeMap::new();
        ctx.insert("multiplier_op_norm".into(), m_op);
        ctx.insert("symbol_op_norm".into(), u_op);
        certs.push(Certificate::identity(
            "operator_norm_tightness",
            (m_op - u_op).abs(),
            tol.bound_slack,
            u_op.max(1.0),
            ctx,
        ));
    }
    Ok(row_from_certs(draw, d, n, certs, want_detail))
}

fn bounded_below_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let n = pick_count(rng, cfg, d);
    let f = random_frame(rng, d, n);

    if draw % 3 == 2 {
        // Positive construction: M = D_f (P + 0.1 I) C_f is Hermitian
        // positive definite, so its smallest eigenvalue is a valid form
        // bound and both derived lower frame bounds must hold.
        let p = random_psd_symbol(rng, n);
        let shifted = p.matrix() + CMatrix::identity(n, n).scale(0.1);
        let u = Symbol::dense(shifted)?;
        let m = GeneralizedMultiplier::build(u, f.clone(), f)?;
        let herm = (m.assembled() + m.assembled().adjoint()).scale(0.5);
        let a = numerics::hermitian_eigenvalues(&herm, tol)?[0];
        let verdict = sesquilinear_lower_check(&m, a, rng, 16, tol)?;
        let margin = min_margin([
            margin_gap(&verdict, "analysis_lower_bound", "derived_analysis_lower"),
            margin_gap(&verdict, "synthesis_lower_bound", "derived_synthesis_lower"),
        ]);
        return Ok(row_from_verdict(draw, d, n, verdict, margin, want_detail));
    }

    let g = random_bessel(rng, d, n);
    let u = if draw % 5 == 3 {
        // Zero symbol: no lower bound exists, the draw must opt out
        // rather than fail.
        Symbol::dense(CMatrix::zeros(n, n))?
    } else {
        random_symbol(rng, n, n)
    };
    let m = GeneralizedMultiplier::build(u, f, g)?;
    let (report, cert) = invertibility::bounded_below_frame_bound(&m, tol)?;
    match cert {
        Some(cert) => Ok(row_from_certs(draw, d, n, vec![cert], want_detail)),
        None => Ok(DrawRow {
            draw,
            dim: d,
            count: n,
            status: DrawStatus::NotApplicable,
            worst_claim: "bounded_below_no_conclusion".into(),
            worst_margin: None,
            detail: want_detail.then(|| serde_json::json!({ "report": report })),
        }),
    }
}

fn identity_perturbation_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let n = pick_count(rng, cfg, d);
    let f = random_frame(rng, d, n);
    let dual = f.canonical_dual(tol)?;

    // M = I + D_f E C_dual with the deviation rescaled to a known target.
    let e_raw = random_matrix(rng, n, n);
    let probe = GeneralizedMultiplier::build(Symbol::dense(e_raw.clone())?, f.clone(), dual.clone())?;
    let reach = operator_norm(probe.assembled())?.max(1e-12);
    let target = uniform(rng, 0.1, 0.5);
    let e = e_raw * C64::new(target / reach, 0.0);
    let u = Symbol::dense(CMatrix::identity(n, n) + e)?;
    let m = GeneralizedMultiplier::build(u, f, dual)?;

    let (lambda1, lambda2) = match draw % 3 {
        0 => (target + 0.05, 0.0),
        1 => (target + 0.05, 0.25),
        _ => (target + 0.25 * (1.0 + target) + 0.02, -0.25),
    };
    let verdict = identity_perturbation_check(&m, lambda1, lambda2, rng, 16, tol)?;
    let margin = min_margin([
        margin_gap(&verdict, "sigma_min", "derived_sigma_bound"),
        margin_gap(&verdict, "adjoint_sigma_min", "derived_sigma_bound"),
    ]);
    Ok(row_from_verdict(draw, d, n, verdict, margin, want_detail))
}

fn riesz_lower_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let g = random_riesz(rng, d);
    let f = random_riesz(rng, d);
    let u = random_symbol(rng, d, d);
    let m = GeneralizedMultiplier::build(u, g, f)?;
    let mut certs = vec![riesz_lower_bound(&m, tol)?];

    // Orthonormal bases with the identity symbol attain the bound.
    if draw % 5 == 4 {
        let e = random_onb(rng, d);
        let m2 = GeneralizedMultiplier::build(Symbol::identity(d), e.clone(), e)?;
        let cert = riesz_lower_bound(&m2, tol)?;
        let ratio = cert.lhs / cert.rhs.max(f64::MIN_POSITIVE);
        let mut ctx = BTreeMap::new();
        ctx.insert("ratio".into(), ratio);
        certs.push(Certificate::inequality(
            "riesz_lower_tightness",
            0.999,
            ratio,
            tol.bound_slack,
            1.0,
            ctx,
        ));
        certs.push(cert);
    }
    Ok(row_from_certs(draw, d, d, certs, want_detail))
}

fn composition_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let n = pick_count(rng, cfg, 1);
    let f = random_riesz(rng, d);
    let f_dual = f.biorthogonal_dual(tol)?;
    let g = random_bessel(rng, d, n);
    let h = random_bessel(rng, d, n);
    let u1 = random_symbol(rng, n, d);
    let u2 = random_symbol(rng, d, n);
    let m1 = GeneralizedMultiplier::build(u1, g, f)?;

    if draw % 7 == 6 {
        // A perturbed middle system is no longer biorthogonal and must be
        // rejected, not silently composed.
        let delta = random_matrix(rng, d, d) * C64::new(0.05, 0.0);
        let broken = f_dual.perturbed_by(&delta)?;
        let m2 = GeneralizedMultiplier::build(u2, broken, h)?;
        let row = match compose_biorthogonal(&m1, &m2, tol) {
            Err(Error::Precondition(_)) => DrawRow {
                draw,
                dim: d,
                count: n,
                status: DrawStatus::Pass,
                worst_claim: "non_biorthogonal_rejection".into(),
                worst_margin: None,
                detail: None,
            },
            Err(e) => return Err(e),
            Ok(_) => DrawRow {
                draw,
                dim: d,
                count: n,
                status: DrawStatus::Fail,
                worst_claim: "non_biorthogonal_rejection".into(),
                worst_margin: None,
                detail: Some(serde_json::json!({
                    "error": "composition accepted a non-biorthogonal middle pair"
                })),
            },
        };
        return Ok(row);
    }

    let m2 = GeneralizedMultiplier::build(u2, f_dual, h)?;
    let composed = compose_biorthogonal(&m1, &m2, tol)?;
    let product = m1.assembled() * m2.assembled();
    let residual = operator_norm(&(composed.assembled() - &product))?;
    let scale = scale_of(&product).max(scale_of(composed.assembled()));
    let cert = Certificate::identity(
        "biorthogonal_composition",
        residual,
        tol.eq_abs,
        scale,
        BTreeMap::new(),
    );
    Ok(row_from_certs(draw, d, n, vec![cert], want_detail))
}

fn inversion_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let g = random_riesz(rng, d);
    let f = random_riesz(rng, d);
    let singular_draw = draw % 4 == 3;
    let u = if singular_draw {
        let mut sigma: Vec<f64> = (0..d).map(|_| uniform(rng, 0.5, 2.0)).collect();
        sigma[d - 1] = 0.0;
        random_symbol_with_fixed_sigma(rng, &sigma)
    } else {
        random_symbol_with_sigma(rng, d, 0.5, 2.0)
    };
    let m = GeneralizedMultiplier::build(u, g, f)?;
    let spectrum = m.singular_profile()?;
    let floor = tol.invert_floor * spectrum.largest();

    match riesz_inverse(&m, tol)? {
        RieszInversion::Invertible { inverse, left_residual, right_residual } => {
            if singular_draw {
                return Ok(DrawRow {
                    draw,
                    dim: d,
                    count: d,
                    status: DrawStatus::Fail,
                    worst_claim: "singular_symbol_gives_singular_multiplier".into(),
                    worst_margin: Some(floor - spectrum.smallest()),
                    detail: Some(serde_json::json!({
                        "error": "a singular symbol produced an invertible multiplier"
                    })),
                });
            }
            let mut certs = Vec::new();
            certs.push(Certificate::identity(
                "inverse_left_residual",
                left_residual,
                tol.bound_slack,
                1.0,
                BTreeMap::new(),
            ));
            certs.push(Certificate::identity(
                "inverse_right_residual",
                right_residual,
                tol.bound_slack,
                1.0,
                BTreeMap::new(),
            ));
            let direct = numerics::inverse(m.assembled(), tol)?;
            let gap = operator_norm(&(inverse.assembled() - &direct))?;
            certs.push(Certificate::identity(
                "inverse_formula_matches_direct",
                gap,
                tol.bound_slack,
                scale_of(&direct),
                BTreeMap::new(),
            ));
            // Invertible symbol must yield an invertible multiplier.
            let mut ctx = BTreeMap::new();
            ctx.insert("sigma_min".into(), spectrum.smallest());
            ctx.insert("sigma_max".into(), spectrum.largest());
            certs.push(Certificate::inequality(
                "invertible_iff",
                floor,
                spectrum.smallest(),
                0.0,
                1.0,
                ctx,
            ));
            Ok(row_from_certs(draw, d, d, certs, want_detail))
        }
        RieszInversion::Singular { symbol_sigma_min, multiplier_sigma_min } => {
            let pass = singular_draw && !numerics::spectrum_invertible(&spectrum, tol);
            let status = if pass { DrawStatus::Pass } else { DrawStatus::Fail };
            let detail = (want_detail || !pass).then(|| {
                serde_json::json!({
                    "symbol_sigma_min": symbol_sigma_min,
                    "multiplier_sigma_min": multiplier_sigma_min,
                })
            });
            Ok(DrawRow {
                draw,
                dim: d,
                count: d,
                status,
                worst_claim: "singular_symbol_gives_singular_multiplier".into(),
                worst_margin: Some(floor - multiplier_sigma_min),
                detail,
            })
        }
    }
}

fn derived_lower_bound_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let g = random_riesz(rng, d);
    let f = random_riesz(rng, d);
    let u = random_symbol_with_sigma(rng, d, 0.5, 2.0);
    let m = GeneralizedMultiplier::build(u, g, f)?;
    let (_report, certs) = invertibility::lower_frame_from_invertible(&m, tol)?;
    Ok(row_from_certs(draw, d, d, certs, want_detail))
}

fn riesz_detection_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let g = random_riesz(rng, d);
    let u = random_symbol_with_sigma(rng, d, 0.5, 2.0);
    let f = match draw % 3 {
        0 => random_riesz(rng, d),
        1 => {
            // Rank-deficient analysis system: one vector is a multiple of
            // another, so the multiplier must come out singular.
            let mut synthesis = random_matrix(rng, d, d);
            let doubled = synthesis.column(0) * C64::new(2.0, 0.0);
            synthesis.set_column(1, &doubled);
            SequenceSystem::from_synthesis(synthesis)?
        }
        _ => random_onb(rng, d),
    };
    let m = GeneralizedMultiplier::build(u, g, f)?;
    let verdict = invertible_iff_riesz(&m, tol)?;
    // Distance from the invertibility decision boundary.
    let margin = verdict.margins.get("multiplier_sigma_min").and_then(|sigma_min| {
        let sigma_max = verdict.margins.get("multiplier_sigma_max")?;
        Some((sigma_min - tol.invert_floor * sigma_max).abs())
    });
    Ok(row_from_verdict(draw, d, d, verdict, margin, want_detail))
}

/// Square system with frame bounds exactly (1, 2): unitary rotations of
/// singular values sqrt(1 + k/(d-1)).
fn spread_riesz(rng: &mut DrawRng, d: usize) -> SequenceSystem {
    let q = random_unitary(rng, d);
    let v = random_unitary(rng, d);
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new((1.0 + i as f64 / (d as f64 - 1.0)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    SequenceSystem::from_synthesis(q * diag * v.adjoint()).expect("finite construction")
}

fn frame_perturbation_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    let d = pick_dim(rng, cfg);
    let tight_draw = draw % 3 == 2;
    // Tight frames leave no room for the perturbation radius; those draws
    // must come back not applicable rather than failed.
    let f = if tight_draw { random_onb(rng, d) } else { spread_riesz(rng, d) };

    let delta_raw = random_matrix(rng, d, d);
    let delta_target = uniform(rng, 0.05, 0.25);
    let delta_scale = delta_target / operator_norm(&delta_raw)?.max(1e-12);
    let g = f.perturbed_by(&(delta_raw * C64::new(delta_scale, 0.0)))?;

    let e_raw = random_matrix(rng, d, d);
    let dev = uniform(rng, 0.02, 0.2);
    let e_scale = dev / operator_norm(&e_raw)?.max(1e-12);
    let u = Symbol::dense(CMatrix::identity(d, d) + e_raw * C64::new(e_scale, 0.0))?;

    let verdict = perturbation_invertibility(&u, &f, &g, tol)?;
    let margin = min_margin([
        margin_gap(&verdict, "mu_bound", "mu_star"),
        margin_gap(&verdict, "symbol_identity_budget", "symbol_identity_distance"),
        verdict.margins.get("multiplier_sigma_min").copied(),
    ]);
    Ok(row_from_verdict(draw, d, d, verdict, margin, want_detail))
}

fn convergence_draw(
    rng: &mut DrawRng,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    draw: u64,
    want_detail: bool,
) -> Result<DrawRow> {
    const STEPS: usize = 12;
    let d = pick_dim(rng, cfg);
    let n = pick_count(rng, cfg, 1);
    let g = random_bessel(rng, d, n);
    let f = random_bessel(rng, d, n);
    let u = random_symbol(rng, n, n);
    let base = GeneralizedMultiplier::build(u.clone(), g.clone(), f.clone())?;

    // 1/l schedules by default; every fourth draw decays geometrically to
    // 1e-6 of the first step, exercising the decay-transfer clause.
    let geometric = draw % 4 == 3;
    let eps = |l: usize| {
        if geometric {
            10f64.powf(-6.0 * (l as f64 - 1.0) / (STEPS as f64 - 1.0))
        } else {
            1.0 / l as f64
        }
    };
    let schedule = match draw % 3 {
        0 => {
            let e = random_matrix(rng, n, n);
            Schedule::Symbol(
                (1..=STEPS)
                    .map(|l| Symbol::dense(u.matrix() + &e * C64::new(eps(l), 0.0)))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        1 => {
            let e = random_matrix(rng, d, n);
            Schedule::Synthesis(
                (1..=STEPS)
                    .map(|l| g.perturbed_by(&(&e * C64::new(eps(l), 0.0))))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        _ => {
            let e = random_matrix(rng, d, n);
            Schedule::Analysis(
                (1..=STEPS)
                    .map(|l| f.perturbed_by(&(&e * C64::new(eps(l), 0.0))))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    let experiment = ConvergenceExperiment::new(base, schedule, NormMode::all().to_vec())?;
    let report = experiment.run(tol)?;

    let pass = report.all_satisfied && report.envelope_monotone;
    let margin = report
        .rows
        .iter()
        .map(|row| {
            row.envelope * (1.0 + tol.bound_slack) + tol.bound_slack - row.multiplier_distance
        })
        .reduce(f64::min);
    let status = if pass { DrawStatus::Pass } else { DrawStatus::Fail };
    let detail = (want_detail || !pass).then(|| serde_json::json!({ "report": report }));
    Ok(DrawRow {
        draw,
        dim: d,
        count: n,
        status,
        worst_claim: "perturbation_envelope".into(),
        worst_margin: margin,
        detail,
    })
}
