use num_traits::{Signed, Zero};
use proptest::prelude::*;

use entropic_clt::algebra::{rat, rat_int, CumulantSet, CumulantTensor, Rational};
use entropic_clt::coeffs::{cj_exact, cj_symbolic, expansion_prediction};
use entropic_clt::edgeworth::{cdf_correction, density_correction, EdgeworthApproximant};
use entropic_clt::quadrature::integrate_adaptive;

fn cumulants(max_order: usize) -> impl Strategy<Value = CumulantSet> {
    prop::collection::vec((-40i64..=40, 1i64..=8), max_order - 2)
        .prop_map(|v| CumulantSet::new(v.into_iter().map(|(p, q)| rat(p, q * 4)).collect()))
}

fn flip_odd(c: &CumulantSet) -> CumulantSet {
    CumulantSet::new(
        c.gammas()
            .iter()
            .enumerate()
            .map(|(i, g)| if (i + 3) % 2 == 1 { -g.clone() } else { g.clone() })
            .collect(),
    )
}

/// `∫ f` over `[-14, 14]`, piecewise so no stretch of the integrand is skipped.
fn integrate<F: Fn(f64) -> f64>(f: F) -> f64 {
    (-14..14)
        .map(|a| integrate_adaptive(&f, a as f64, a as f64 + 1.0, 1e-12, 1e-15).unwrap())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cdf_term_differentiates_to_density_term(c in cumulants(8), k in 1usize..=4, x in -4.0f64..4.0) {
        let q = density_correction(&c, k).unwrap();
        let big_q = cdf_correction(&c, k).unwrap();
        let h = 1e-5;
        let numeric = (big_q.eval(x + h) - big_q.eval(x - h)) / (2.0 * h);
        let scale = q.dense_f64().iter().map(|a| a.abs()).sum::<f64>().max(1.0);
        prop_assert!((numeric - q.eval(x)).abs() < 1e-6 * scale);
    }

    #[test]
    fn density_terms_have_bounded_degree_and_zero_mass(c in cumulants(8), k in 1usize..=4) {
        let q = density_correction(&c, k).unwrap();
        if let Some(top) = q.max_order() {
            prop_assert!(top <= 3 * k);
            prop_assert_eq!(top % 2, k % 2);
        }
        // orders ≥ 1 integrate to zero against φ, so no H_0 component survives
        prop_assert!(q.coeff(&0).is_zero());
        let scale = q.dense_f64().iter().map(|a| a.abs()).sum::<f64>().max(1.0);
        let mass = integrate(|x| q.eval(x));
        prop_assert!(mass.abs() < 1e-10 * scale);
    }

    #[test]
    fn fourier_matches_quadrature(c in cumulants(6), k in 1usize..=3, t in -3.0f64..3.0) {
        let q = density_correction(&c, k).unwrap();
        let re = integrate(|x| (t * x).cos() * q.eval(x));
        let im = integrate(|x| (t * x).sin() * q.eval(x));
        let f = q.fourier(t);
        let tol = 1e-10 * q.dense_f64().iter().map(|a| a.abs()).sum::<f64>().max(1.0);
        prop_assert!((f.re - re).abs() < tol && (f.im - im).abs() < tol, "{} vs {} + {}i", f, re, im);
    }

    #[test]
    fn coefficients_ignore_reflection(c in cumulants(7), j in 1usize..=3) {
        // X and -X have the same entropic distance
        prop_assert_eq!(cj_exact(&c, j).unwrap(), cj_exact(&flip_odd(&c), j).unwrap());
    }

    #[test]
    fn first_coefficient_is_nonnegative_and_quadratic(c in cumulants(5), lambda in -5i64..=5) {
        let c1 = cj_exact(&c, 1).unwrap();
        prop_assert!(!c1.is_negative());
        let scaled = CumulantSet::new(c.gammas().iter().map(|g| g * rat_int(lambda)).collect());
        prop_assert_eq!(cj_exact(&scaled, 1).unwrap(), c1 * rat_int(lambda * lambda));
    }

    #[test]
    fn independent_coordinates_add(c in cumulants(5)) {
        let p = cj_symbolic(2, 2).unwrap();
        let one = cj_exact(&c, 2).unwrap();
        prop_assert_eq!(p.evaluate_tensor(&CumulantTensor::iid_product(&c, 2)).unwrap(), one.clone() * rat_int(2));
        prop_assert_eq!(p.evaluate_tensor(&CumulantTensor::gaussian_padded(&c, 2)).unwrap(), one);
    }

    #[test]
    fn approximant_integrates_to_one(c in cumulants(6), n in 4u64..200) {
        let a = EdgeworthApproximant::new(&c, 6).unwrap();
        let mass = integrate(|x| a.density(n, x));
        prop_assert!((mass - 1.0).abs() < 1e-9);
        prop_assert!((a.cdf(n, 40.0) - 1.0).abs() < 1e-12 && a.cdf(n, -40.0).abs() < 1e-12);
    }
}

#[test]
fn gaussian_cumulants_give_nothing() {
    let c = CumulantSet::gaussian(9);
    for j in 1..=4 {
        assert_eq!(cj_exact(&c, j).unwrap(), Rational::zero());
    }
    for k in 1..=7 {
        assert!(density_correction(&c, k).unwrap().is_zero());
    }
    assert_eq!(expansion_prediction(&c, 8.0, 10).unwrap().value, 0.0);
}
