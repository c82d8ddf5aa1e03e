use kreinlab::family::{self, BlockFamily, ConditioningRule, SequenceRule, Target};
use kreinlab::krein::{self, KreinOperator};
use kreinlab::numerics::{self, c64, norm2, ComplexMatrix, Region, Tolerances};
use kreinlab::products::{self, FactorPair};
use kreinlab::random::{complex_gaussian, fundamental_symmetry, j_selfadjoint, seeded};
use kreinlab::signtype::{self, SignType};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn pair(seed: u64, p: usize, q: usize) -> FactorPair {
    let mut rng = seeded(seed);
    FactorPair::new(complex_gaussian(&mut rng, p, q), complex_gaussian(&mut rng, q, p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonzero_spectra_match(seed in any::<u64>(), p in 1usize..=8, q in 1usize..=8) {
        let pr = pair(seed, p, q);
        let r = products::compare_nonzero_spectra(&pr, &tol()).unwrap();
        prop_assert!(r.matched);
        prop_assert!(r.max_value_discrepancy <= 1e-8 * pr.scale());
        // At most min(p, q) eigenvalues can be nonzero.
        let count: usize = r.nonzero_clusters_ab.iter().map(|c| c.algebraic_mult).sum();
        prop_assert!(count <= p.min(q));
    }

    #[test]
    fn pole_at_zero_is_simple_when_ab_is_invertible(seed in any::<u64>(), p in 1usize..=5, extra in 1usize..=3) {
        let r = products::zero_pole_order(&pair(seed, p, p + extra), &tol()).unwrap();
        prop_assert!(r.corollary_applies);
        prop_assert_eq!(r.order_ba, 1);
        prop_assert_eq!(r.zero_multiplicity_ba, extra);
    }

    #[test]
    fn identities_hold_off_the_spectrum(seed in any::<u64>(), re in -3.0f64..3.0, im in 0.2f64..3.0) {
        let pr = pair(seed, 3, 5);
        let lambda = c64(re, im);
        let mu = c64(-re, -im);
        if let Ok(r) = products::resolvent_identity_residuals(&pr, lambda, mu, 1e-6) {
            prop_assert!(r.residual_ppp <= 1e-9 * r.resolvent_norm.max(1.0));
            prop_assert!(r.residual_two_param <= 1e-9 * r.resolvent_norm.max(1.0));
        }
    }

    #[test]
    fn form_adjoint_identity(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = seeded(seed);
        let j = fundamental_symmetry(&mut rng, d);
        let t = complex_gaussian(&mut rng, d, d);
        let adj = krein::krein_adjoint(&t, &j).unwrap();
        let x = complex_gaussian(&mut rng, d, 1);
        let y = complex_gaussian(&mut rng, d, 1);
        let lhs = j.form(&(&t * &x), &y);
        let rhs = j.form(&x, &(&adj * &y));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (norm2(&t) * x.norm() * y.norm()).max(1.0));
    }

    #[test]
    fn weyr_sums_to_dimension(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = seeded(seed);
        let m = complex_gaussian(&mut rng, d, d);
        let es = numerics::eigenstructure(&m, &tol()).unwrap();
        prop_assert_eq!(es.dim(), d);
        for c in &es.clusters {
            prop_assert_eq!(c.weyr.iter().sum::<usize>(), c.algebraic_mult);
            prop_assert!(c.weyr.windows(2).all(|w| w[0] >= w[1]));
        }
        let all = numerics::riesz_projection(&m, &Region::disk(c64(0.0, 0.0), 2.0 * es.spectral_radius + 1.0), &tol()).unwrap();
        prop_assert!(norm2(&(all - ComplexMatrix::identity(d, d))) <= 1e-8 * d as f64);
    }

    #[test]
    fn products_of_random_operators_are_selfadjoint(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = seeded(seed);
        let j = fundamental_symmetry(&mut rng, d);
        let op = KreinOperator::new(complex_gaussian(&mut rng, d, d), j).unwrap();
        let (first, second) = krein::product_pair(&op).unwrap();
        prop_assert!(krein::is_j_selfadjoint(&first, &op.j, 1e-10).unwrap());
        prop_assert!(krein::is_j_selfadjoint(&second, &op.j, 1e-10).unwrap());
    }

    #[test]
    fn definitizers_certify(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = seeded(seed);
        let j = fundamental_symmetry(&mut rng, d);
        let a = j_selfadjoint(&mut rng, &j);
        let p = signtype::definitize(&a, &j, 3, seed, &tol()).unwrap();
        prop_assert!(signtype::is_definitizing(&p, &a, &j).unwrap());
    }

    #[test]
    fn classification_matches_gram_sign(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = seeded(seed);
        let j = fundamental_symmetry(&mut rng, d);
        let a = j_selfadjoint(&mut rng, &j);
        for c in signtype::classify_spectrum(&a, &j, &tol()).unwrap() {
            let i = c.eigenspace_inertia;
            match c.sign_type {
                SignType::PositiveType => prop_assert!(c.semisimple && i.n_minus == 0 && i.n_zero == 0),
                SignType::NegativeType => prop_assert!(c.semisimple && i.n_plus == 0 && i.n_zero == 0),
                SignType::Critical => prop_assert!(!c.semisimple || i.n_zero > 0 || (i.n_plus > 0 && i.n_minus > 0)),
            }
        }
    }
}

#[test]
fn truncations_nest_and_repeat() {
    let fam = BlockFamily::example_one(SequenceRule::Power(1.0), true, 4).unwrap();
    let small = family::truncate(&fam, 3).unwrap();
    let large = family::truncate(&fam, 5).unwrap();
    assert_eq!(large.t.view((0, 0), (6, 6)), small.t);
    assert_eq!(large.j.matrix().view((0, 0), (6, 6)), *small.j.matrix());
    assert_eq!(family::truncate(&fam, 5).unwrap(), large);
}

#[test]
fn example_one_truncation_with_identity_unitaries() {
    let fam = BlockFamily::example_one(SequenceRule::Power(1.0), false, 0).unwrap();
    let op = family::truncate(&fam, 2).unwrap();
    assert_eq!(op.t, numerics::diag_real(&[1.0, 1.0, 0.5, 0.5]));
    let first = Target::First.select(&op).unwrap();
    assert!(norm2(&(first - numerics::diag_real(&[1.0, 1.0, 0.25, 0.25]))) < 1e-15);
}

/// With `kappa(n) = n`, the projection onto `lambda_n` alone has norm
/// `(n + 1/n) / 2`, within a factor 4 of `n`.
#[test]
fn graded_projection_norms_track_conditioning() {
    let fam = BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Power(1.0), 0).unwrap();
    let op = family::truncate(&fam, 32).unwrap();
    let first = Target::First.select(&op).unwrap();
    let p = match fam.kind() {
        family::FamilyKind::GradedNeutrality(p) => p.clone(),
        _ => unreachable!(),
    };
    let mut eigs: Vec<f64> = (1..=32)
        .flat_map(|n| {
            let (l, lp) = BlockFamily::graded_eigenvalues(&p, n).unwrap();
            [l, lp]
        })
        .collect();
    eigs.sort_by(f64::total_cmp);
    let es = numerics::eigenstructure(&first, &tol()).unwrap();
    for n in [2usize, 5, 9, 17, 32] {
        let (l, _) = BlockFamily::graded_eigenvalues(&p, n).unwrap();
        let k = eigs.iter().position(|&e| e == l).unwrap();
        let below = if k > 0 { eigs[k - 1] } else { l - 1.0 };
        let above = eigs.get(k + 1).copied().unwrap_or(l + 1.0);
        let e = signtype::interval_projection_with(&first, &op.j, &es, (below + l) / 2.0, (l + above) / 2.0).unwrap();
        assert_eq!(e.multiplicity, 1);
        let kappa = n as f64;
        assert!(e.norm <= 4.0 * kappa && e.norm >= kappa / 4.0, "n = {n}: norm {}", e.norm);
        assert!((e.norm - (kappa + 1.0 / kappa) / 2.0).abs() < 1e-6 * kappa);
    }
}

#[test]
fn growth_fit_far_from_spectrum_is_clamped() {
    let a = numerics::diag_real(&[1.0, 2.0]);
    let f = family::growth_order_fit(&a, 5.0, &family::default_y_grid(), tol().growth_guard).unwrap();
    assert!(f.raw_slope.abs() < 0.05);
    assert_eq!(f.m_hat, 1.0);
}
