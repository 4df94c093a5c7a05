//! Convergence of multipliers under perturbation of the symbol or of one
//! sequence, with the explicit envelopes sqrt(B_f B_g) |dU|_X and
//! |U|_op sqrt(B) times the lp sequence distance.

use crate::multiplier::GeneralizedMultiplier;
use crate::numerics::{self, ToleranceConfig};
use crate::sequences::SequenceSystem;
use crate::symbols::Symbol;
use crate::{CMatrix, Error, Result};
use serde::Serialize;
use std::str::FromStr;

/// Norms in which distances and envelopes are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Op,
    S1,
    S2,
}

impl NormMode {
    pub fn all() -> [NormMode; 3] {
        [NormMode::Op, NormMode::S1, NormMode::S2]
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormMode::Op => "op",
            NormMode::S1 => "s1",
            NormMode::S2 => "s2",
        }
    }

    pub fn measure(&self, a: &CMatrix) -> Result<f64> {
        match self {
            NormMode::Op => numerics::operator_norm(a),
            NormMode::S1 => numerics::schatten_norm(a, 1.0),
            NormMode::S2 => numerics::schatten_norm(a, 2.0),
        }
    }

    /// Exponent of the sequence distance that controls this norm when a
    /// sequence (not the symbol) is perturbed.
    fn sequence_exponent(&self) -> f64 {
        match self {
            NormMode::S1 => 1.0,
            NormMode::Op | NormMode::S2 => 2.0,
        }
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<NormMode> {
        match s {
            "op" => Ok(NormMode::Op),
            "s1" => Ok(NormMode::S1),
            "s2" => Ok(NormMode::S2),
            other => Err(Error::Parse(format!(
                "unknown norm mode {other:?}, expected op, s1 or s2"
            ))),
        }
    }
}

/// Which component of the base multiplier the schedule replaces,
/// step by step.
#[derive(Clone, Debug)]
pub enum Schedule {
    Symbol(Vec<Symbol>),
    Synthesis(Vec<SequenceSystem>),
    Analysis(Vec<SequenceSystem>),
}

impl Schedule {
    pub fn len(&self) -> usize {
        match self {
            Schedule::Symbol(v) => v.len(),
            Schedule::Synthesis(v) => v.len(),
            Schedule::Analysis(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// (sum_k |a_k - b_k|^p)^(1/p) over paired vectors.
pub fn lp_sequence_distance(a: &SequenceSystem, b: &SequenceSystem, p: f64) -> Result<f64> {
    if a.dim() != b.dim() || a.count() != b.count() {
        return Err(Error::DimensionMismatch(format!(
            "sequence distance needs matching systems, got {}x{} vs {}x{}",
            a.dim(),
            a.count(),
            b.dim(),
            b.count()
        )));
    }
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "sequence distance needs a finite exponent p >= 1, got {p}"
        )));
    }
    let mut acc = 0.0;
    for k in 0..a.count() {
        acc += (a.vector(k) - b.vector(k)).norm().powf(p);
    }
    Ok(acc.powf(1.0 / p))
}

/// A base multiplier, a one-sided perturbation schedule and the norms to
/// report. Step labels default to 1..=L.
#[derive(Clone, Debug)]
pub struct ConvergenceExperiment {
    base: GeneralizedMultiplier,
    schedule: Schedule,
    norms: Vec<NormMode>,
    labels: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub l: usize,
    pub norm: String,
    /// Distance of the perturbed component from the base one, in the
    /// norm controlling this row.
    pub param_distance: f64,
    pub multiplier_distance: f64,
    pub envelope: f64,
    pub satisfied: bool,
}

/// Tail-to-head decay of the schedule and of the multiplier distances in
/// one norm. When the schedule distance itself decays below `target`,
/// the multiplier distance must follow.
#[derive(Clone, Debug, Serialize)]
pub struct DecaySummary {
    pub norm: String,
    pub param_ratio: Option<f64>,
    pub multiplier_ratio: Option<f64>,
    pub target: f64,
    pub triggered: bool,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub all_satisfied: bool,
    pub decay: Vec<DecaySummary>,
    pub envelope_monotone: bool,
}

const DECAY_TARGET: f64 = 1e-6;

impl ConvergenceExperiment {
    pub fn new(
        base: GeneralizedMultiplier,
        schedule: Schedule,
        norms: Vec<NormMode>,
    ) -> Result<Self> {
        let labels = (1..=schedule.len()).collect();
        Self::with_labels(base, schedule, norms, labels)
    }

    pub fn with_labels(
        base: GeneralizedMultiplier,
        schedule: Schedule,
        norms: Vec<NormMode>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if schedule.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a schedule needs at least 2 steps, got {}",
                schedule.len()
            )));
        }
        if norms.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one norm mode is required".into(),
            ));
        }
        if labels.len() != schedule.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} steps",
                labels.len(),
                schedule.len()
            )));
        }
        if labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "step labels must be strictly increasing".into(),
            ));
        }
        match &schedule {
            Schedule::Symbol(steps) => {
                let (r, c) = (base.symbol().rows(), base.symbol().cols());
                for (i, s) in steps.iter().enumerate() {
                    if s.rows() != r || s.cols() != c {
                        return Err(Error::DimensionMismatch(format!(
                            "step {i} symbol is {}x{}, base is {r}x{c}",
                            s.rows(),
                            s.cols()
                        )));
                    }
                }
            }
            Schedule::Synthesis(steps) => {
                let b = base.synthesis_seq();
                for (i, s) in steps.iter().enumerate() {
                    if s.dim() != b.dim() || s.count() != b.count() {
                        return Err(Error::DimensionMismatch(format!(
                            "step {i} synthesis system is {}x{}, base is {}x{}",
                            s.dim(),
                            s.count(),
                            b.dim(),
                            b.count()
                        )));
                    }
                }
            }
            Schedule::Analysis(steps) => {
                let b = base.analysis_seq();
                for (i, s) in steps.iter().enumerate() {
                    if s.dim() != b.dim() || s.count() != b.count() {
                        return Err(Error::DimensionMismatch(format!(
                            "step {i} analysis system is {}x{}, base is {}x{}",
                            s.dim(),
                            s.count(),
                            b.dim(),
                            b.count()
                        )));
                    }
                }
            }
        }
        Ok(Self { base, schedule, norms, labels })
    }

    pub fn base(&self) -> &GeneralizedMultiplier {
        &self.base
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn norms(&self) -> &[NormMode] {
        &self.norms
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Measures every step of the schedule against its envelope.
    pub fn run(&self, tol: &ToleranceConfig) -> Result<ConvergenceReport> {
        let b_f = self.base.analysis_seq().frame_bounds(tol)?.upper;
        let b_g = self.base.synthesis_seq().frame_bounds(tol)?.upper;
        let u_op = self.base.symbol().norms()?.op;
        let slack = tol.bound_slack;

        let mut rows = Vec::with_capacity(self.schedule.len() * self.norms.len());
        for (step, &l) in self.labels.iter().enumerate() {
            let (perturbed, distances) = self.step_distances(step)?;
            let delta_m = perturbed.assembled() - self.base.assembled();
            for (mode, param_distance) in self.norms.iter().zip(distances) {
                let multiplier_distance = mode.measure(&delta_m)?;
                let envelope = match &self.schedule {
                    Schedule::Symbol(_) => (b_f * b_g).sqrt() * param_distance,
                    Schedule::Synthesis(_) => u_op * b_f.sqrt() * param_distance,
                    Schedule::Analysis(_) => u_op * b_g.sqrt() * param_distance,
                };
                let satisfied = multiplier_distance <= envelope * (1.0 + slack) + slack;
                rows.push(ConvergenceRow {
                    l,
                    norm: mode.name().into(),
                    param_distance,
                    multiplier_distance,
                    envelope,
                    satisfied,
                });
            }
        }

        let mut decay = Vec::with_capacity(self.norms.len());
        let mut envelope_monotone = true;
        for mode in &self.norms {
            let per_mode: Vec<&ConvergenceRow> =
                rows.iter().filter(|r| r.norm == mode.name()).collect();
            let ratio = |first: f64, last: f64| {
                if first > 0.0 { Some(last / first) } else { None }
            };
            let param_ratio = ratio(
                per_mode.first().map_or(0.0, |r| r.param_distance),
                per_mode.last().map_or(0.0, |r| r.param_distance),
            );
            let multiplier_ratio = ratio(
                per_mode.first().map_or(0.0, |r| r.multiplier_distance),
                per_mode.last().map_or(0.0, |r| r.multiplier_distance),
            );
            let triggered =
                param_ratio.is_some_and(|r| r <= DECAY_TARGET * (1.0 + slack));
            let satisfied = !triggered
                || multiplier_ratio
                    .is_none_or(|r| r <= DECAY_TARGET * (1.0 + slack) + slack);
            decay.push(DecaySummary {
                norm: mode.name().into(),
                param_ratio,
                multiplier_ratio,
                target: DECAY_TARGET,
                triggered,
                satisfied,
            });
            let strictly_decreasing = per_mode
                .windows(2)
                .all(|w| w[1].param_distance < w[0].param_distance);
            if strictly_decreasing
                && !per_mode.windows(2).all(|w| w[1].envelope < w[0].envelope)
            {
                envelope_monotone = false;
            }
        }

        let all_satisfied =
            rows.iter().all(|r| r.satisfied) && decay.iter().all(|d| d.satisfied);
        Ok(ConvergenceReport { rows, all_satisfied, decay, envelope_monotone })
    }

    /// Builds the perturbed multiplier for one step and the schedule
    /// distances, one per requested norm.
    fn step_distances(&self, step: usize) -> Result<(GeneralizedMultiplier, Vec<f64>)> {
        match &self.schedule {
            Schedule::Symbol(steps) => {
                let s = &steps[step];
                let perturbed = GeneralizedMultiplier::build(
                    s.clone(),
                    self.base.synthesis_seq().clone(),
                    self.base.analysis_seq().clone(),
                )?;
                let delta_u = s.matrix() - self.base.symbol().matrix();
                let distances = self
                    .norms
                    .iter()
                    .map(|mode| mode.measure(&delta_u))
                    .collect::<Result<Vec<_>>>()?;
                Ok((perturbed, distances))
            }
            Schedule::Synthesis(steps) => {
                let s = &steps[step];
                let perturbed = GeneralizedMultiplier::build(
                    self.base.symbol().clone(),
                    s.clone(),
                    self.base.analysis_seq().clone(),
                )?;
                let distances = self
                    .norms
                    .iter()
                    .map(|mode| {
                        lp_sequence_distance(
                            s,
                            self.base.synthesis_seq(),
                            mode.sequence_exponent(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((perturbed, distances))
            }
            Schedule::Analysis(steps) => {
                let s = &steps[step];
                let perturbed = GeneralizedMultiplier::build(
                    self.base.symbol().clone(),
                    self.base.synthesis_seq().clone(),
                    s.clone(),
                )?;
                let distances = self
                    .norms
                    .iter()
                    .map(|mode| {
                        lp_sequence_distance(
                            s,
                            self.base.analysis_seq(),
                            mode.sequence_exponent(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((perturbed, distances))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::C64;
    use approx::assert_relative_eq;

    fn onb(d: usize) -> SequenceSystem {
        SequenceSystem::standard_basis(d)
    }

    fn base_identity(d: usize) -> GeneralizedMultiplier {
        GeneralizedMultiplier::build(Symbol::identity(d), onb(d), onb(d)).unwrap()
    }

    #[test]
    fn identical_systems_have_zero_distance() {
        let s = onb(4);
        assert_eq!(lp_sequence_distance(&s, &s, 1.0).unwrap(), 0.0);
        assert_eq!(lp_sequence_distance(&s, &s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_vector_difference_is_its_norm() {
        let a = onb(3);
        let mut mat = a.synthesis_matrix().clone();
        mat[(1, 0)] += C64::new(3.0, 0.0);
        let b = SequenceSystem::from_synthesis(mat).unwrap();
        assert_relative_eq!(lp_sequence_distance(&a, &b, 1.0).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(lp_sequence_distance(&a, &b, 2.0).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn l2_distance_is_the_frobenius_distance_of_synthesis_matrices() {
        let mut rng = random::rng_for_draw(44, 0);
        let a = random::random_bessel(&mut rng, 4, 7);
        let b = random::random_bessel(&mut rng, 4, 7);
        let direct = (a.synthesis_matrix() - b.synthesis_matrix()).norm();
        assert_relative_eq!(
            lp_sequence_distance(&a, &b, 2.0).unwrap(),
            direct,
            max_relative = 1e-12
        );
    }

    #[test]
    fn distance_rejects_bad_inputs() {
        let a = onb(3);
        let b = onb(4);
        assert!(lp_sequence_distance(&a, &b, 2.0).is_err());
        assert!(lp_sequence_distance(&a, &a, 0.5).is_err());
    }

    #[test]
    fn constant_schedule_reports_zeros() {
        let tol = ToleranceConfig::default();
        let base = base_identity(3);
        let steps = vec![Symbol::identity(3); 4];
        let exp = ConvergenceExperiment::new(
            base,
            Schedule::Symbol(steps),
            NormMode::all().to_vec(),
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
        for row in &report.rows {
            assert_eq!(row.param_distance, 0.0);
            assert_eq!(row.multiplier_distance, 0.0);
        }
    }

    #[test]
    fn reciprocal_symbol_schedule_on_orthonormal_bases_is_exact() {
        // With unitary synthesis and analysis the multiplier distance
        // equals the symbol distance at every step.
        let tol = ToleranceConfig::default();
        let d = 4;
        let mut rng = random::rng_for_draw(44, 1);
        let e = random::random_matrix(&mut rng, d, d);
        let base = base_identity(d);
        let steps: Vec<Symbol> = (1..=20)
            .map(|l| {
                Symbol::dense(CMatrix::identity(d, d) + e.scale(1.0 / l as f64)).unwrap()
            })
            .collect();
        let exp = ConvergenceExperiment::new(
            base,
            Schedule::Symbol(steps),
            NormMode::all().to_vec(),
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
        assert!(report.envelope_monotone);
        let e_op = numerics::operator_norm(&e).unwrap();
        for row in report.rows.iter().filter(|r| r.norm == "op") {
            assert_relative_eq!(
                row.multiplier_distance,
                e_op / row.l as f64,
                max_relative = 1e-11
            );
            assert_relative_eq!(row.envelope, row.param_distance, max_relative = 1e-11);
        }
    }

    #[test]
    fn random_bessel_systems_stay_under_the_symbol_envelope() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(44, 2);
        let f = random::random_bessel(&mut rng, 5, 9);
        let g = random::random_bessel(&mut rng, 4, 8);
        let u = random::random_symbol(&mut rng, 8, 9);
        let e = random::random_matrix(&mut rng, 8, 9);
        let base = GeneralizedMultiplier::build(u.clone(), g, f).unwrap();
        let steps: Vec<Symbol> = (1..=20)
            .map(|l| Symbol::dense(u.matrix() + e.scale(1.0 / l as f64)).unwrap())
            .collect();
        let exp = ConvergenceExperiment::new(
            base,
            Schedule::Symbol(steps),
            NormMode::all().to_vec(),
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
    }

    #[test]
    fn synthesis_perturbation_matches_the_rank_one_oracle() {
        // Perturbing one synthesis vector by (1/l) h moves the multiplier
        // by at most |U| sqrt(B_f) (1/l) |h| in Hilbert-Schmidt norm.
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(44, 3);
        let f = random::random_bessel(&mut rng, 4, 6);
        let g = random::random_bessel(&mut rng, 4, 6);
        let u = random::random_symbol(&mut rng, 6, 6);
        let h = random::random_vector(&mut rng, 4);
        let base = GeneralizedMultiplier::build(u.clone(), g.clone(), f.clone()).unwrap();
        let steps: Vec<SequenceSystem> = (1..=10)
            .map(|l| {
                let mut mat = g.synthesis_matrix().clone();
                for r in 0..4 {
                    mat[(r, 2)] += h[r] / C64::new(l as f64, 0.0);
                }
                SequenceSystem::from_synthesis(mat).unwrap()
            })
            .collect();
        let exp = ConvergenceExperiment::new(
            base.clone(),
            Schedule::Synthesis(steps.clone()),
            vec![NormMode::S2, NormMode::S1, NormMode::Op],
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
        let u_op = u.norms().unwrap().op;
        let b_f = f.frame_bounds(&tol).unwrap().upper;
        for row in report.rows.iter().filter(|r| r.norm == "s2") {
            let budget = u_op * b_f.sqrt() * h.norm() / row.l as f64;
            assert!(row.multiplier_distance <= budget * (1.0 + 1e-9) + 1e-12);
        }
        // The difference multiplier is exactly linear in the synthesis system.
        let delta =
            SequenceSystem::from_synthesis(steps[0].synthesis_matrix() - g.synthesis_matrix())
                .unwrap();
        let direct = GeneralizedMultiplier::build(u.clone(), delta, f.clone()).unwrap();
        let first = GeneralizedMultiplier::build(u, steps[0].clone(), f).unwrap();
        let residual = (first.assembled() - base.assembled() - direct.assembled()).norm();
        assert!(residual <= 1e-12 * numerics::scale_of(base.assembled()));
    }

    #[test]
    fn analysis_perturbation_stays_under_the_mirrored_envelope() {
        let tol = ToleranceConfig::default();
        let mut rng = random::rng_for_draw(44, 4);
        let f = random::random_bessel(&mut rng, 5, 7);
        let g = random::random_bessel(&mut rng, 4, 6);
        let u = random::random_symbol(&mut rng, 6, 7);
        let delta = random::random_matrix(&mut rng, 5, 7);
        let base = GeneralizedMultiplier::build(u, g, f.clone()).unwrap();
        let steps: Vec<SequenceSystem> = (1..=12)
            .map(|l| {
                let mat = f.synthesis_matrix() + delta.scale(1.0 / (l * l) as f64);
                SequenceSystem::from_synthesis(mat).unwrap()
            })
            .collect();
        let exp = ConvergenceExperiment::new(
            base,
            Schedule::Analysis(steps),
            NormMode::all().to_vec(),
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
        assert!(report.envelope_monotone);
    }

    #[test]
    fn geometric_schedule_triggers_and_meets_the_decay_target() {
        let tol = ToleranceConfig::default();
        let d = 3;
        let mut rng = random::rng_for_draw(44, 5);
        let e = random::random_matrix(&mut rng, d, d);
        let base = base_identity(d);
        let steps: Vec<Symbol> = (1..=20)
            .map(|l| {
                let eps = 10f64.powf(-6.0 * (l as f64 - 1.0) / 19.0);
                Symbol::dense(CMatrix::identity(d, d) + e.scale(eps)).unwrap()
            })
            .collect();
        let exp = ConvergenceExperiment::new(
            base,
            Schedule::Symbol(steps),
            NormMode::all().to_vec(),
        )
        .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(report.all_satisfied);
        for summary in &report.decay {
            assert!(summary.triggered, "{} not triggered", summary.norm);
            assert!(summary.satisfied);
            assert_relative_eq!(
                summary.multiplier_ratio.unwrap(),
                1e-6,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn slow_schedules_do_not_trigger_the_decay_clause() {
        let tol = ToleranceConfig::default();
        let d = 3;
        let mut rng = random::rng_for_draw(44, 6);
        let e = random::random_matrix(&mut rng, d, d);
        let base = base_identity(d);
        let steps: Vec<Symbol> = (1..=20)
            .map(|l| {
                Symbol::dense(CMatrix::identity(d, d) + e.scale(1.0 / l as f64)).unwrap()
            })
            .collect();
        let exp =
            ConvergenceExperiment::new(base, Schedule::Symbol(steps), vec![NormMode::Op])
                .unwrap();
        let report = exp.run(&tol).unwrap();
        assert!(!report.decay[0].triggered);
        assert!(report.decay[0].satisfied);
    }

    #[test]
    fn experiment_rejects_degenerate_configurations() {
        let base = base_identity(2);
        let one_step = Schedule::Symbol(vec![Symbol::identity(2)]);
        assert!(ConvergenceExperiment::new(base.clone(), one_step, vec![NormMode::Op]).is_err());
        let drift = Schedule::Symbol(vec![Symbol::identity(2), Symbol::identity(3)]);
        assert!(ConvergenceExperiment::new(base.clone(), drift, vec![NormMode::Op]).is_err());
        let steps = Schedule::Symbol(vec![Symbol::identity(2), Symbol::identity(2)]);
        assert!(ConvergenceExperiment::new(base.clone(), steps.clone(), vec![]).is_err());
        assert!(ConvergenceExperiment::with_labels(
            base,
            steps,
            vec![NormMode::Op],
            vec![3, 3]
        )
        .is_err());
    }

    #[test]
    fn explicit_labels_are_reported() {
        let tol = ToleranceConfig::default();
        let base = base_identity(2);
        let steps = Schedule::Symbol(vec![Symbol::identity(2), Symbol::identity(2)]);
        let exp =
            ConvergenceExperiment::with_labels(base, steps, vec![NormMode::Op], vec![5, 9])
                .unwrap();
        let report = exp.run(&tol).unwrap();
        let labels: Vec<usize> = report.rows.iter().map(|r| r.l).collect();
        assert_eq!(labels, vec![5, 9]);
    }
}
