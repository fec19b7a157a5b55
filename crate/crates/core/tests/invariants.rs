use calabi_core::asymptotics::series_g;
use calabi_core::gluing::{classify, cutoff_chi, epsilon_beta, plan_with_epsilon, NuRegime, PlanOptions};
use calabi_core::params::{derive, q, BetaSpec, GeometryParams, Regime, J0, Q};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn geometry() -> impl Strategy<Value = GeometryParams> {
    (2u32..=6, 1i128..=40, 1u32..=4).prop_flat_map(|(n, den, j0)| {
        // alpha = 1 + k / den in (1, n + 1)
        let top = n as i128 * den - 1;
        (1i128..=top).prop_map(move |k| GeometryParams::new(n, q(den + k, den), J0::Finite(j0)).unwrap())
    })
}

fn exact_beta(g: &GeometryParams) -> impl Strategy<Value = Q> {
    let bs = g.beta_star_exact();
    (-50i128..=50).prop_map(move |k| {
        let b = bs + q(k, 200);
        if b <= Q::zero() || b >= Q::one() {
            bs
        } else {
            b
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_constant_identities((g, b) in geometry().prop_flat_map(|g| { let s = exact_beta(&g); (Just(g), s) })) {
        let c = derive(&g, BetaSpec::Exact(b)).unwrap();
        let e = c.exact.clone().unwrap();
        let r = |x: &Q| BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()));
        let (al, bs, mu, lam, a, bb, cb) = (r(&g.alpha), r(&e.beta_star), r(&e.mu), r(&e.lambda), r(&e.a), r(&e.b), r(&e.c_beta));
        let n = BigRational::from_integer(BigInt::from(g.n));
        let one = BigRational::one();
        prop_assert_eq!(&bs * &n, &al - &one);
        prop_assert_eq!(&mu * &lam, &al - &one);
        prop_assert_eq!(&a * (&n + &one), mu.clone());
        // F'(lambda) = 0
        let pow = |x: &BigRational, k: u32| (0..k).fold(BigRational::one(), |acc, _| acc * x);
        let lp = pow(&lam, g.n - 1);
        prop_assert!((&bb * &n * &lp - &a * (&n + &one) * &lp * &lam).is_zero());
        // F(alpha) + C_beta = 0
        prop_assert!((pow(&al, g.n) * (&bb - &a * &al) + &cb).is_zero());
        let expect = if b == e.beta_star { Regime::Critical } else if b > e.beta_star { Regime::Supercritical } else { Regime::Subcritical };
        prop_assert_eq!(c.regime, expect);
    }

    #[test]
    fn regime_criteria_agree(g in geometry()) {
        let nu0 = g.nu0_exact().unwrap();
        let n = Q::from_integer(g.n as i128);
        let by_nu = if nu0 < n { NuRegime::Less } else if nu0 == n { NuRegime::Equal } else { NuRegime::Greater };
        prop_assert_eq!(classify(&g), by_nu);
    }

    #[test]
    fn epsilon_beta_increases(g in geometry(), e1 in -14.0f64..-7.0, step in 0.05f64..2.0) {
        let c1 = derive(&g, BetaSpec::Offset(10f64.powf(e1))).unwrap();
        let c2 = derive(&g, BetaSpec::Offset(10f64.powf(e1 + step))).unwrap();
        let a = epsilon_beta(&c1, 1.0).unwrap();
        let b = epsilon_beta(&c2, 1.0).unwrap();
        prop_assert!(a < b, "{a} {b}");
        if classify(&g) == NuRegime::Equal {
            prop_assert!(b < (-1.0 / g.n as f64).exp());
        }
    }

    #[test]
    fn cutoff_is_monotone(x1 in -8.0f64..2.0, x2 in -8.0f64..2.0) {
        let g = GeometryParams::new(2, q(3, 2), J0::Finite(1)).unwrap();
        let c = derive(&g, BetaSpec::Exact(q(1, 4))).unwrap();
        let plan = plan_with_epsilon(&c, 1e-3, 0.8, &PlanOptions::default()).unwrap();
        let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let a = cutoff_chi(&plan, plan.r_eps * lo.exp());
        let b = cutoff_chi(&plan, plan.r_eps * hi.exp());
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b);
    }

    #[test]
    fn apex_series_solves_the_relation(n in 2u32..=5, k in 1i128..=7, s in 1e-4f64..5e-3) {
        let g = GeometryParams::new(n, q(8 + k, 8), J0::Finite(1)).unwrap();
        let c = derive(&g, BetaSpec::Exact(g.beta_star_exact())).unwrap();
        let series = series_g(&c, 12).unwrap();
        prop_assert!(series.residual(&c, s) <= s.powi(13) + 1e-14 * s.powi(n as i32));
    }
}

#[test]
fn equal_case_root_matches_displayed_form() {
    let g = GeometryParams::new(3, q(2, 1), J0::Finite(1)).unwrap();
    for d in [1e-6, 1e-9, 1e-12] {
        let c = derive(&g, BetaSpec::Offset(d)).unwrap();
        let eps = epsilon_beta(&c, 1.0).unwrap();
        let shown = (d / -d.ln()).powf(1.0 / 3.0);
        let r = eps / shown;
        assert!((0.5..=2.0).contains(&r), "{d}: {r}");
    }
}
