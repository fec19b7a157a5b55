use calabi_core::asymptotics::formula_coefficients;
use calabi_core::gluing::{regime_law, NuRegime};
use calabi_core::obstruction::{gap_and_i2, ModelInputs, ObstructionModel};
use calabi_core::params::{derive, q, BetaSpec, GeometryParams, J0};
use calabi_core::profile::Normalization;
use calabi_core::Error;

fn geom(n: u32, a: (i128, i128)) -> GeometryParams {
    GeometryParams::new(n, q(a.0, a.1), J0::Finite(1)).unwrap()
}

/// alpha^n / ((n-1) n (n+1) b^{1+1/n}) divided by the A1 scale b^{(1+1/n)(n-1)}.
fn a_l_oracle(n: u32, alpha: f64) -> f64 {
    let nf = n as f64;
    let b = (alpha - 1.0) / nf;
    let raw = alpha.powi(n as i32) / ((nf - 1.0) * nf * (nf + 1.0) * b.powf(1.0 + 1.0 / nf));
    raw / b.powf((1.0 + 1.0 / nf) * (nf - 1.0))
}

#[test]
fn green_coefficient_matches_closed_form() {
    for (n, a) in [(2, (3, 2)), (3, (2, 1)), (4, (5, 2)), (5, (7, 4))] {
        let g = geom(n, a);
        let c = derive(&g, BetaSpec::Exact(g.beta_star_exact())).unwrap();
        let got = formula_coefficients(&c, 2, Normalization::A1Normalized).unwrap().a_l;
        let want = a_l_oracle(n, a.0 as f64 / a.1 as f64);
        assert!((got / want - 1.0).abs() < 1e-12, "n={n}: {got} vs {want}");
    }
    let g = geom(2, (3, 2));
    let c = derive(&g, BetaSpec::Exact(q(1, 4))).unwrap();
    assert_eq!(formula_coefficients(&c, 2, Normalization::A1Normalized).unwrap().a_l, 24.0);
}

#[test]
fn matched_constants_in_the_greater_case() {
    let c = derive(&geom(2, (3, 2)), BetaSpec::Offset(1e-8)).unwrap();
    let m = ObstructionModel::new(&c, 0.8, ModelInputs::default(), 10.0).unwrap();
    assert_eq!(m.regime, NuRegime::Greater);
    // (2n-2) lambda a_TY and (2n-2) lambda 4^{n-1} a_L with lambda = 1
    assert!((m.kappa.positive - 2.0).abs() < 1e-15);
    assert!((m.kappa.negative - 192.0).abs() < 1e-12);
    assert!((m.kappa_ratio - 1.0 / 96.0).abs() < 1e-15);
}

#[test]
fn j_by_parts_in_every_regime() {
    for (n, a, theta, eps) in [(2, (3, 2), 0.8, 1e-3), (3, (2, 1), 0.5, 1e-3), (4, (5, 2), 0.6, 1e-3)] {
        let g = geom(n, a);
        let c = derive(&g, BetaSpec::Exact(g.beta_star_exact())).unwrap();
        let m = ObstructionModel::new(&c, theta, ModelInputs::default(), 10.0).unwrap();
        let ev = m.evaluate_at(eps).unwrap();
        assert!((ev.j_value - ev.j_by_parts).abs() <= 1e-8 * ev.j_value.abs(), "n={n}");
    }
}

#[test]
fn boundary_term_follows_green_law() {
    let c = derive(&geom(2, (3, 2)), BetaSpec::Offset(1e-9)).unwrap();
    let inputs = ModelInputs { a_ty: 0.0, constrained: false, ..Default::default() };
    let m = ObstructionModel::new(&c, 0.6, inputs, 10.0).unwrap();
    let plan = m.plan_at(1e-3).unwrap();
    let b = gap_and_i2(m.star(), m.beta_profile(), &plan, &inputs).unwrap();
    let law = -2.0 * (c.lambda - b.t_beta) * 4.0 * m.a_l * c.delta;
    assert!((b.value / law - 1.0).abs() < 0.05, "{} vs {law}", b.value);
    assert_eq!(b.tail, 0.0);
}

#[test]
fn regime_laws_for_the_quadric_family() {
    assert_eq!(regime_law(&geom(5, (3, 1))), "(β−β_*)^{2/5}");
    assert_eq!(regime_law(&geom(6, (7, 2))), "(β−β_*)^{5/12}");
    assert_eq!(regime_law(&geom(4, (5, 4))), "(β−β_*)^{1/4}");
}

#[test]
fn oversized_inputs_are_rejected() {
    let big = GeometryParams { n: 60, alpha: q(181, 29), j0: J0::Finite(1) };
    assert!(matches!(derive(&big, BetaSpec::Exact(q(1, 2))), Err(Error::Domain(_))));
    assert!(GeometryParams::new(2001, q(3, 2), J0::Finite(1)).is_err());
}
