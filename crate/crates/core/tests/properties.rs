//! Randomized invariants for the whole pipeline: sequence operators,
//! duals, multiplier assembly, norm estimates, and perturbation envelopes.
//!
//! Each property draws instances from a seeded ChaCha stream so that
//! proptest shrinks over (seed, dims) instead of raw matrix entries.

use gbmul::multiplier::rank_one_expansion;
use gbmul::numerics::{
    self, frobenius_norm, inner, max_abs_entry, operator_norm, scale_of, schatten_norm,
    singular_values, tensor,
};
use gbmul::perturbation::lp_sequence_distance;
use gbmul::random::{
    random_bessel, random_frame, random_matrix, random_onb, random_riesz, random_symbol,
    random_unit_vector, random_vector, rng_for_draw,
};
use gbmul::sequences::is_dual_pair;
use gbmul::{C64, CMatrix, GeneralizedMultiplier, SequenceSystem, Symbol, ToleranceConfig};
use proptest::prelude::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// Strategy knobs: small dims keep each case cheap, the seed varies the
/// actual entries.
fn dims() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..6, 0usize..8).prop_map(|(seed, d, extra)| (seed, d, d + extra))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// <D c, h> in C^d equals <c, D* h> in C^n.
    #[test]
    fn synthesis_and_analysis_are_adjoint((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 0);
        let f = random_bessel(&mut rng, d, n);
        let c = random_vector(&mut rng, n);
        let h = random_vector(&mut rng, d);
        let lhs = inner(&f.synthesis(&c).unwrap(), &h);
        let rhs = inner(&c, &f.analysis(&h).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    /// A ||h||^2 <= sum_k |<h, f_k>|^2 <= B ||h||^2 on random probes.
    #[test]
    fn frame_bounds_sandwich_the_coefficient_energy((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 1);
        let f = random_frame(&mut rng, d, n);
        let bounds = f.frame_bounds(&tol()).unwrap();
        for _ in 0..4 {
            let h = random_unit_vector(&mut rng, d);
            let energy = f.analysis(&h).unwrap().norm_squared();
            prop_assert!(bounds.lower <= energy * (1.0 + 1e-9) + 1e-12);
            prop_assert!(energy <= bounds.upper * (1.0 + 1e-9) + 1e-12);
        }
    }

    /// Each member of a Bessel system has norm at most sqrt(B).
    #[test]
    fn member_norms_stay_below_the_upper_root((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 2);
        let f = random_bessel(&mut rng, d, n);
        let b = f.frame_bounds(&tol()).unwrap().upper;
        for k in 0..f.count() {
            prop_assert!(f.vector(k).norm() <= b.sqrt() * (1.0 + 1e-12));
        }
    }

    /// Canonical dual: bounds invert and the dual of the dual is the
    /// original system.
    #[test]
    fn canonical_dual_inverts_bounds_and_is_an_involution((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 3);
        let f = random_frame(&mut rng, d, n);
        let bounds = f.frame_bounds(&tol()).unwrap();
        let dual = f.canonical_dual(&tol()).unwrap();
        let dual_bounds = dual.frame_bounds(&tol()).unwrap();
        prop_assert!((dual_bounds.lower - 1.0 / bounds.upper).abs() <= 1e-8 / bounds.upper);
        prop_assert!((dual_bounds.upper - 1.0 / bounds.lower).abs() <= 1e-8 / bounds.lower);
        prop_assert!(is_dual_pair(&f, &dual, &tol()).unwrap());
        let back = dual.canonical_dual(&tol()).unwrap();
        let dist = frobenius_norm(&(back.synthesis_matrix() - f.synthesis_matrix()));
        prop_assert!(dist <= 1e-8 * scale_of(f.synthesis_matrix()));
    }

    /// Overcomplete frames admit duals besides the canonical one: shift the
    /// canonical dual along a null direction of the synthesis operator.
    #[test]
    fn overcomplete_frames_have_alternative_duals((seed, d, extra) in (any::<u64>(), 2usize..6, 1usize..6)) {
        let n = d + extra;
        let mut rng = rng_for_draw(seed, 4);
        let f = random_frame(&mut rng, d, n);
        let canonical = f.canonical_dual(&tol()).unwrap();
        // Null vector of D_f: project a generic draw with I - C_dual D.
        let proj =
            CMatrix::identity(n, n) - canonical.analysis_matrix() * f.synthesis_matrix();
        let raw = &proj * random_vector(&mut rng, n);
        prop_assume!(raw.norm() > 1e-6);
        let null = raw.unscale(raw.norm());
        prop_assert!(f.synthesis(&null).unwrap().norm() <= 1e-9);
        // g_k = canonical_k + conj(null_k) c keeps D_f C_g = I for any c.
        let c = random_vector(&mut rng, d);
        let shift = CMatrix::from_fn(d, n, |i, k| c[i] * null[k].conj());
        let alt = SequenceSystem::from_synthesis(canonical.synthesis_matrix() + shift).unwrap();
        prop_assert!(is_dual_pair(&f, &alt, &tol()).unwrap());
        let moved = frobenius_norm(&(alt.synthesis_matrix() - canonical.synthesis_matrix()));
        prop_assert!(moved > 1e-8 * c.norm());
    }

    /// Assembly agrees with the explicit rank-one expansion
    /// sum_jk U_jk g_j (x) f_k.
    #[test]
    fn assembly_matches_the_rank_one_expansion((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 5);
        let g = random_bessel(&mut rng, d, n);
        let f = random_bessel(&mut rng, d, n);
        let u = random_symbol(&mut rng, n, n);
        let m = GeneralizedMultiplier::build(u.clone(), g.clone(), f.clone()).unwrap();
        let expansion = rank_one_expansion(&u, &g, &f).unwrap();
        let resid = max_abs_entry(&(m.assembled() - &expansion));
        prop_assert!(resid <= 1e-11 * scale_of(m.assembled()).max(scale_of(&expansion)));
    }

    /// The map U -> M is linear.
    #[test]
    fn assembly_is_linear_in_the_symbol((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 6);
        let g = random_bessel(&mut rng, d, n);
        let f = random_bessel(&mut rng, d, n);
        let u1 = random_matrix(&mut rng, n, n);
        let u2 = random_matrix(&mut rng, n, n);
        let a = gbmul::random::complex_gaussian(&mut rng);
        let b = gbmul::random::complex_gaussian(&mut rng);
        let build = |m: CMatrix| {
            GeneralizedMultiplier::build(Symbol::dense(m).unwrap(), g.clone(), f.clone()).unwrap()
        };
        let combo = build(&u1 * a + &u2 * b);
        let expect = build(u1).assembled() * a + build(u2).assembled() * b;
        let resid = max_abs_entry(&(combo.assembled() - &expect));
        prop_assert!(resid <= 1e-10 * scale_of(&expect).max(1.0));
    }

    /// Adjoint round trip: (M*)* rebuilds M exactly as a multiplier.
    #[test]
    fn adjoint_is_an_involution((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 7);
        let m = GeneralizedMultiplier::build(
            random_symbol(&mut rng, n, n),
            random_bessel(&mut rng, d, n),
            random_bessel(&mut rng, d, n),
        )
        .unwrap();
        let back = m.adjoint().unwrap().adjoint().unwrap();
        let resid = max_abs_entry(&(m.assembled() - back.assembled()));
        prop_assert!(resid <= 1e-12 * scale_of(m.assembled()));
        let cross = max_abs_entry(&(m.assembled().adjoint() - m.adjoint().unwrap().assembled()));
        prop_assert!(cross <= 1e-11 * scale_of(m.assembled()));
    }

    /// Identity symbol with one shared system assembles the frame operator.
    #[test]
    fn identity_symbol_gives_the_frame_operator((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 8);
        let f = random_bessel(&mut rng, d, n);
        let m = GeneralizedMultiplier::build(Symbol::identity(n), f.clone(), f.clone()).unwrap();
        let resid = max_abs_entry(&(m.assembled() - f.frame_operator()));
        prop_assert!(resid <= 1e-11 * scale_of(m.assembled()).max(1.0));
    }

    /// Rank-one interchange: U (f (x) g) = (U f) (x) g and
    /// (f (x) g) U = f (x) (U* g).
    #[test]
    fn tensors_absorb_operators_on_either_side((seed, d, _n) in dims()) {
        let mut rng = rng_for_draw(seed, 9);
        let f = random_vector(&mut rng, d);
        let g = random_vector(&mut rng, d);
        let u = random_matrix(&mut rng, d, d);
        let left = &u * tensor(&f, &g);
        let left_expect = tensor(&(&u * &f), &g);
        prop_assert!(max_abs_entry(&(left - left_expect)) <= 1e-11 * scale_of(&u));
        let right = tensor(&f, &g) * &u;
        let right_expect = tensor(&f, &(u.adjoint() * &g));
        prop_assert!(max_abs_entry(&(right - right_expect)) <= 1e-11 * scale_of(&u));
    }

    /// Hilbert-Schmidt norm squared equals the summed column energies, and
    /// matches the p = 2 Schatten value.
    #[test]
    fn hilbert_schmidt_norm_counts_column_energy((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 10);
        let a = random_matrix(&mut rng, d, n);
        let columns: f64 = (0..n).map(|k| a.column(k).norm_squared()).sum();
        let s2 = schatten_norm(&a, 2.0).unwrap();
        prop_assert!((s2 * s2 - columns).abs() <= 1e-9 * columns.max(1.0));
        prop_assert!((s2 - frobenius_norm(&a)).abs() <= 1e-10 * s2.max(1.0));
    }

    /// Schatten norms dominate the operator norm and shrink as p grows.
    #[test]
    fn schatten_norms_dominate_the_operator_norm((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 11);
        let a = random_matrix(&mut rng, d, n);
        let op = operator_norm(&a).unwrap();
        let s2 = schatten_norm(&a, 2.0).unwrap();
        let s1 = schatten_norm(&a, 1.0).unwrap();
        prop_assert!(op <= s2 * (1.0 + 1e-12));
        prop_assert!(s2 <= s1 * (1.0 + 1e-12));
    }

    /// ||A B||_X <= ||A||_op ||B||_X for X in {op, S1, S2}.
    #[test]
    fn products_are_norm_submultiplicative((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 12);
        let a = random_matrix(&mut rng, d, d);
        let b = random_matrix(&mut rng, d, n);
        let prod = &a * &b;
        let a_op = operator_norm(&a).unwrap();
        for p in [1.0, 2.0] {
            let lhs = schatten_norm(&prod, p).unwrap();
            let rhs = a_op * schatten_norm(&b, p).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
        }
        let lhs = operator_norm(&prod).unwrap();
        prop_assert!(lhs <= a_op * operator_norm(&b).unwrap() * (1.0 + 1e-10) + 1e-12);
    }

    /// Multiplier norms obey ||M||_X <= sqrt(B_f B_g) ||U||_X in every mode.
    #[test]
    fn multiplier_norms_respect_the_bessel_envelope((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 13);
        let g = random_bessel(&mut rng, d, n);
        let f = random_bessel(&mut rng, d, n);
        let u = random_symbol(&mut rng, n, n);
        let root = (f.frame_bounds(&tol()).unwrap().upper
            * g.frame_bounds(&tol()).unwrap().upper)
            .sqrt();
        let m = GeneralizedMultiplier::build(u.clone(), g, f).unwrap();
        let norms = u.norms().unwrap();
        for (got, cap) in [
            (operator_norm(m.assembled()).unwrap(), norms.op),
            (schatten_norm(m.assembled(), 1.0).unwrap(), norms.s1),
            (schatten_norm(m.assembled(), 2.0).unwrap(), norms.s2),
        ] {
            prop_assert!(got <= root * cap * (1.0 + 1e-9) + 1e-12);
        }
    }

    /// Banded convolution symbols commute away from the truncation border.
    #[test]
    fn convolution_symbols_commute_in_the_interior(
        (seed, n) in (any::<u64>(), 14usize..24)
    ) {
        let mut rng = rng_for_draw(seed, 14);
        let mut kernel = |len: usize| -> Vec<C64> {
            (0..len).map(|_| gbmul::random::complex_gaussian(&mut rng)).collect()
        };
        let c1 = Symbol::convolution(&kernel(3), -1, n).unwrap();
        let c2 = Symbol::convolution(&kernel(2), 1, n).unwrap();
        let comm = c1.matrix() * c2.matrix() - c2.matrix() * c1.matrix();
        // Bandwidths: |offset| + len <= 4, so rows/cols >= 6 from either
        // edge see the full convolution on both orders.
        let margin = 6;
        for j in margin..n - margin {
            for k in margin..n - margin {
                prop_assert!(comm[(j, k)].norm() <= 1e-12);
            }
        }
    }

    /// On a shared orthonormal basis, multiplier composition is symbol
    /// composition.
    #[test]
    fn onb_multipliers_compose_like_their_symbols((seed, d, _n) in dims()) {
        let mut rng = rng_for_draw(seed, 15);
        let e = random_onb(&mut rng, d);
        let u1 = random_symbol(&mut rng, d, d);
        let u2 = random_symbol(&mut rng, d, d);
        let m1 = GeneralizedMultiplier::build(u1.clone(), e.clone(), e.clone()).unwrap();
        let m2 = GeneralizedMultiplier::build(u2.clone(), e.clone(), e.clone()).unwrap();
        let composed = GeneralizedMultiplier::build(u1.compose(&u2).unwrap(), e.clone(), e).unwrap();
        let product = m1.assembled() * m2.assembled();
        let resid = max_abs_entry(&(composed.assembled() - product));
        prop_assert!(resid <= 1e-10 * scale_of(composed.assembled()).max(1.0));
    }

    /// Symbol perturbations transfer with the sqrt(B_f B_g) factor in one
    /// step, for all three norms.
    #[test]
    fn single_step_symbol_perturbation_respects_the_envelope((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 16);
        let g = random_bessel(&mut rng, d, n);
        let f = random_bessel(&mut rng, d, n);
        let u = random_matrix(&mut rng, n, n);
        let du = random_matrix(&mut rng, n, n) * C64::new(0.1, 0.0);
        let root = (f.frame_bounds(&tol()).unwrap().upper
            * g.frame_bounds(&tol()).unwrap().upper)
            .sqrt();
        let base = GeneralizedMultiplier::build(
            Symbol::dense(u.clone()).unwrap(), g.clone(), f.clone()).unwrap();
        let moved = GeneralizedMultiplier::build(
            Symbol::dense(&u + &du).unwrap(), g, f).unwrap();
        let diff = moved.assembled() - base.assembled();
        for p in [1.0, 2.0] {
            let lhs = schatten_norm(&diff, p).unwrap();
            prop_assert!(lhs <= root * schatten_norm(&du, p).unwrap() * (1.0 + 1e-9) + 1e-12);
        }
        let lhs = operator_norm(&diff).unwrap();
        prop_assert!(lhs <= root * operator_norm(&du).unwrap() * (1.0 + 1e-9) + 1e-12);
    }

    /// Moving the synthesis system is exactly linear: the multiplier
    /// difference is the multiplier built on the difference system.
    #[test]
    fn synthesis_perturbation_is_exactly_linear((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 17);
        let g = random_bessel(&mut rng, d, n);
        let f = random_bessel(&mut rng, d, n);
        let u = random_symbol(&mut rng, n, n);
        let delta = random_matrix(&mut rng, d, n) * C64::new(0.05, 0.0);
        let moved = g.perturbed_by(&delta).unwrap();
        let m0 = GeneralizedMultiplier::build(u.clone(), g, f.clone()).unwrap();
        let m1 = GeneralizedMultiplier::build(u.clone(), moved, f.clone()).unwrap();
        let diff_sys = SequenceSystem::from_synthesis(delta).unwrap();
        let md = GeneralizedMultiplier::build(u, diff_sys, f).unwrap();
        let resid = max_abs_entry(&(m1.assembled() - m0.assembled() - md.assembled()));
        prop_assert!(resid <= 1e-11 * scale_of(m0.assembled()).max(1.0));
    }

    /// The p = 2 sequence distance is the Frobenius distance of the
    /// synthesis matrices.
    #[test]
    fn l2_sequence_distance_is_frobenius((seed, d, n) in dims()) {
        let mut rng = rng_for_draw(seed, 18);
        let a = random_bessel(&mut rng, d, n);
        let b = random_bessel(&mut rng, d, n);
        let dist = lp_sequence_distance(&a, &b, 2.0).unwrap();
        let frob = frobenius_norm(&(a.synthesis_matrix() - b.synthesis_matrix()));
        prop_assert!((dist - frob).abs() <= 1e-10 * frob.max(1.0));
        // p = 1 dominates p = 2 entrywise by power-mean monotonicity.
        let d1 = lp_sequence_distance(&a, &b, 1.0).unwrap();
        prop_assert!(dist <= d1 * (1.0 + 1e-12));
    }

    /// Riesz systems: analysis then biorthogonal synthesis reproduces the
    /// identity, and frame bounds are the squared extreme singular values.
    #[test]
    fn riesz_biorthogonal_dual_reconstructs((seed, d, _n) in dims()) {
        let mut rng = rng_for_draw(seed, 19);
        let f = random_riesz(&mut rng, d);
        let dual = f.biorthogonal_dual(&tol()).unwrap();
        let mixed = f.synthesis_matrix() * dual.analysis_matrix();
        let resid = max_abs_entry(&(mixed - CMatrix::identity(d, d)));
        prop_assert!(resid <= 1e-8);
        let bounds = f.frame_bounds(&tol()).unwrap();
        let s = singular_values(f.synthesis_matrix()).unwrap();
        prop_assert!((bounds.lower - s.smallest().powi(2)).abs() <= 1e-9 * bounds.upper);
        prop_assert!((bounds.upper - s.largest().powi(2)).abs() <= 1e-9 * bounds.upper);
    }
}

/// Larger seeded cases run once: decomposition quality does not drift with
/// size.
#[test]
fn svd_reconstructs_a_64_by_64_draw() {
    let mut rng = rng_for_draw(97, 0);
    let a = random_matrix(&mut rng, 64, 64);
    let fac = numerics::svd(&a).unwrap();
    let n = fac.spectrum.len();
    let sigma = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(fac.spectrum.values()[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let back = &fac.left * sigma * &fac.right_t;
    let resid = frobenius_norm(&(back - &a));
    assert!(resid <= 1e-10 * frobenius_norm(&a), "svd residual {resid}");
}

#[test]
fn wide_gaussian_system_with_256_vectors_behaves_like_a_frame() {
    let mut rng = rng_for_draw(98, 0);
    let f = random_bessel(&mut rng, 64, 256);
    let class = f.classify(&tol()).unwrap();
    assert!(class.kind.is_frame());
    assert!(class.overcomplete);
    let bounds = f.frame_bounds(&tol()).unwrap();
    assert!(bounds.lower > 0.0 && bounds.upper.is_finite());
    // Coefficient energy of probes stays inside the certified bounds.
    for k in 0..4 {
        let h = random_unit_vector(&mut rng, 64);
        let energy = f.analysis(&h).unwrap().norm_squared();
        assert!(
            bounds.lower * (1.0 - 1e-9) <= energy && energy <= bounds.upper * (1.0 + 1e-9),
            "probe {k} escaped the frame bounds"
        );
    }
    let m = GeneralizedMultiplier::build(Symbol::identity(256), f.clone(), f.clone()).unwrap();
    let resid = max_abs_entry(&(m.assembled() - f.frame_operator()));
    assert!(resid <= 1e-10 * scale_of(m.assembled()));
}
