//! One PASS/FAIL line per acceptance criterion, written to stderr unbuffered so
//! the lines appear even when the harness captures output.

use calabi_core::asymptotics::{
    closed_form_residual, critical_closed_form, critical_family_fit, extinction_deviation, fit_expansion,
    FitWindow,
};
use calabi_core::branch::oracle_deviation;
use calabi_core::gluing::{make_plan, NuRegime, PlanOptions};
use calabi_core::metric::{
    cone_angle_at_d, cone_angle_at_infinity, cone_comparison, futaki_rigidity_check, g1_linearization, potential_v,
    small_beta_collapse, BarrierSpec,
};
use calabi_core::obstruction::{gap_and_i2, ModelInputs, ObstructionModel};
use calabi_core::params::{derive, q, BetaSpec, DerivedConstants, GeometryParams, Regime, J0};
use calabi_core::profile::{solve_profile, GridSpec, Normalization, ProfileSolution};
use calabi_core::residuals::{profile_residuals, Residuals};
use calabi_core::Error;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

const GEOMETRIES: [(u32, (i128, i128)); 3] = [(2, (3, 2)), (3, (2, 1)), (4, (5, 2))];

fn report(id: &str, pass: bool, what: String) {
    let line = format!("{} criterion {id}: {what}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {id} failed: {what}");
}

fn geom(n: u32, a: (i128, i128)) -> GeometryParams {
    GeometryParams::new(n, q(a.0, a.1), J0::Finite(1)).unwrap()
}

fn consts(n: u32, a: (i128, i128), beta: BetaSpec) -> DerivedConstants {
    derive(&geom(n, a), beta).unwrap()
}

fn critical(n: u32, a: (i128, i128)) -> DerivedConstants {
    let g = geom(n, a);
    derive(&g, BetaSpec::Exact(g.beta_star_exact())).unwrap()
}

/// beta in {beta_* - 0.05, beta_*, beta_* + 1e-4, beta_* + 1e-8}
fn beta_matrix(n: u32, a: (i128, i128)) -> Vec<DerivedConstants> {
    let g = geom(n, a);
    [BetaSpec::Offset(-0.05), BetaSpec::Exact(g.beta_star_exact()), BetaSpec::Offset(1e-4), BetaSpec::Offset(1e-8)]
        .into_iter()
        .map(|b| derive(&g, b).unwrap())
        .collect()
}

struct Case {
    label: String,
    raw: ProfileSolution,
    res: Vec<Residuals>,
}

fn matrix() -> &'static Vec<Case> {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        let mut out = Vec::new();
        for (n, a) in GEOMETRIES {
            for c in beta_matrix(n, a) {
                let mut res = Vec::new();
                let mut raw = None;
                for norm in [Normalization::Raw, Normalization::A1Normalized] {
                    let sol = solve_profile(&c, GridSpec::default(), norm).unwrap();
                    res.push(profile_residuals(&sol, 7).unwrap());
                    if norm == Normalization::Raw {
                        raw = Some(sol);
                    }
                }
                out.push(Case { label: format!("n={n} beta-beta_*={:e}", c.delta), raw: raw.unwrap(), res });
            }
        }
        out
    })
}

/// alpha^n / ((n-1) n (n+1) b^{1+1/n}), divided by b^{(1+1/n)(n-1)} in A1 coordinates.
fn a_l_oracle(n: u32, alpha: f64) -> f64 {
    let nf = n as f64;
    let b = (alpha - 1.0) / nf;
    let raw = alpha.powi(n as i32) / ((nf - 1.0) * nf * (nf + 1.0) * b.powf(1.0 + 1.0 / nf));
    raw / b.powf((1.0 + 1.0 / nf) * (nf - 1.0))
}

#[test]
fn criterion_01_closed_form() {
    let c = critical(2, (3, 2));
    let raw = solve_profile(&c, GridSpec::default(), Normalization::Raw).unwrap();
    let fit = critical_family_fit(&raw, -10.0, 10.0, 81).unwrap();
    let a1 = solve_profile(&c, GridSpec::default(), Normalization::A1Normalized).unwrap();
    let literal = closed_form_residual(&a1, |x: f64| x.ln_1p(), 1e-3, 40).unwrap();
    // independent of the library's closed form: (alpha/beta_*) log(1 + (beta_*/alpha) x)
    let corrected = closed_form_residual(&a1, |x: f64| 6.0 * (x / 6.0).ln_1p(), 1e-3, 40).unwrap();
    let lib = closed_form_residual(&a1, |x| critical_closed_form(&c, x), 1e-3, 40).unwrap();
    let sup = fit.sup_residual.max(corrected).max(lib);
    let mut lines = String::new();
    lines.push_str(&format!(
        "two-parameter family fit sup {:.3e} on u in [-10, 10]; A1 vs (alpha/beta_*) log(1 + beta_* rho^2/alpha) {:.3e} (tol 1e-8)",
        fit.sup_residual,
        corrected.max(lib)
    ));
    report("1a", sup < 1e-8, lines);
    report("1b", literal < 1e-8, format!("A1 profile vs log(1 + rho^2) as printed: sup {literal:.3e} (tol 1e-8)"));
}

#[test]
fn criterion_02_residuals() {
    let mut worst = (0.0f64, 0.0f64, String::new());
    for case in matrix() {
        for r in &case.res {
            if r.monge_ampere.max(r.first_integral) > worst.0.max(worst.1) {
                worst.2 = case.label.clone();
            }
            worst.0 = worst.0.max(r.monge_ampere);
            worst.1 = worst.1.max(r.first_integral);
        }
    }
    report(
        "2",
        worst.0 < 1e-8 && worst.1 < 1e-8,
        format!(
            "Monge-Ampere {:.3e}, first integral {:.3e} over 3 geometries x 4 betas x 2 normalizations, worst at {} (tol 1e-8)",
            worst.0, worst.1, worst.2
        ),
    );
}

#[test]
fn criterion_03_eigen_identity() {
    let e = matrix().iter().flat_map(|c| c.res.iter()).map(|r| r.eigen_analytic).fold(0.0, f64::max);
    let s = matrix().iter().flat_map(|c| c.res.iter()).map(|r| r.eigen_stencil).fold(0.0, f64::max);
    report("3", e < 1e-7, format!("eigen-identity residual {e:.3e} (tol 1e-7); five-point stencil diagnostic {s:.3e}"));
}

#[test]
fn criterion_04_branch_oracle() {
    let mut worst = (0.0f64, 0.0f64);
    for case in matrix() {
        let (g1, g2) = oracle_deviation(&case.raw, 20.0).unwrap();
        worst = (worst.0.max(g1), worst.1.max(g2));
    }
    report(
        "4",
        worst.0 < 1e-8 && worst.1 < 1e-8,
        format!("two-branch vs t-parametrized, |u - u0| <= 20: G1 side {:.3e}, G2 side {:.3e} (tol 1e-8)", worst.0, worst.1),
    );
}

#[test]
fn criterion_05_cone_angles() {
    let mut d_err = 0.0f64;
    let mut far_err = 0.0f64;
    for (n, a) in GEOMETRIES {
        for c in beta_matrix(n, a) {
            d_err = d_err.max((cone_angle_at_d(&c).unwrap() / (2.0 * PI * c.beta) - 1.0).abs());
            if c.regime == Regime::Subcritical {
                let f = cone_angle_at_infinity(&c).unwrap();
                let expect = 2.0 * PI * c.mu * (c.lambda - f.gamma);
                far_err = far_err.max((f.fitted / expect - 1.0).abs());
            }
        }
    }
    let mut gap = 0.0f64;
    for (n, a) in GEOMETRIES {
        let c = consts(n, a, BetaSpec::Value(1e-3));
        let r = small_beta_collapse(&c).unwrap();
        gap = gap.max((r.gap_ratio - 1.0).abs());
    }
    report(
        "5",
        d_err < 1e-6 && far_err < 1e-4 && gap < 0.01,
        format!(
            "angle at D rel {d_err:.3e} (tol 1e-6); far angle rel {far_err:.3e} (tol 1e-4); (lambda-gamma)(alpha-1)/(alpha beta) at beta=1e-3 off by {gap:.3e} (tol 1e-2)"
        ),
    );
}

#[test]
fn criterion_06_extinction() {
    let mut k = 0.0f64;
    for (n, a) in GEOMETRIES {
        for e in 4..=10 {
            let c = consts(n, a, BetaSpec::Offset(10f64.powi(-e)));
            let scale = c.c_beta.powf(1.0 / n as f64);
            let law = -c.c_beta.ln() / (n as f64 * c.beta_star);
            let sol = solve_profile(&c, GridSpec::default(), Normalization::Raw).unwrap();
            k = k.max(extinction_deviation(&c).unwrap().abs() / scale);
            k = k.max((sol.u_extinct().unwrap() - law).abs() / scale);
        }
    }
    report(
        "6",
        k <= 1e-6,
        format!("max |u_beta + log(C_beta)/(n beta_*)| / C_beta^(1/n) = {k:.3e} over beta-beta_* in 1e-4..1e-10, 3 geometries (K <= 1e-6)"),
    );
}

#[test]
fn criterion_07_green_coefficient() {
    let mut ratios = Vec::new();
    let mut positive = true;
    let mut lines = Vec::new();
    for (n, a, deltas) in [(2, (3, 2), &[1e-6, 1e-8, 1e-10][..]), (3, (2, 1), &[1e-8, 1e-10][..])] {
        let star = solve_profile(&critical(n, a), GridSpec::default(), Normalization::A1Normalized).unwrap();
        let oracle = a_l_oracle(n, a.0 as f64 / a.1 as f64);
        for &d in deltas {
            let c = consts(n, a, BetaSpec::Offset(d));
            let beta = solve_profile(&c, GridSpec::default(), Normalization::A1Normalized).unwrap();
            let rep = fit_expansion(&beta, &star, &FitWindow::default()).unwrap();
            positive &= rep.fitted_a_l > 0.0;
            ratios.push(rep.fitted_a_l / oracle);
            lines.push(format!("n={n} {d:e}: {:.5}", rep.fitted_a_l / oracle));
        }
    }
    let dev = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) - ratios.iter().cloned().fold(f64::MAX, f64::min);
    report(
        "7",
        dev < 0.02 && spread < 0.02 && positive,
        format!("fitted a_L / (alpha^n form) [{}], max dev {dev:.3e}, spread {spread:.3e} (tol 2e-2), positive {positive}", lines.join(", ")),
    );
    // the printed form with a = mu/(n+1) in place of alpha
    let c = consts(2, (3, 2), BetaSpec::Offset(1e-8));
    let star = solve_profile(&critical(2, (3, 2)), GridSpec::default(), Normalization::A1Normalized).unwrap();
    let beta = solve_profile(&c, GridSpec::default(), Normalization::A1Normalized).unwrap();
    let rep = fit_expansion(&beta, &star, &FitWindow::default()).unwrap();
    let nf = 2.0;
    let literal = c.a.powi(2) / ((nf - 1.0) * nf * (nf + 1.0) * c.b.powf(1.0 + 1.0 / nf)) / c.b.powf((1.0 + 1.0 / nf) * (nf - 1.0));
    let lit_dev = (rep.fitted_a_l / literal - 1.0).abs();
    report("7-literal", lit_dev < 0.02, format!("fitted a_L {:.6} vs a^n form {literal:.6} at n=2: dev {lit_dev:.3e} (tol 2e-2)", rep.fitted_a_l));
}

#[test]
fn criterion_08_metric() {
    // dV/dbeta = (alpha^n - s^{n+1}/alpha) / ((n+1) s^{n-1})
    let oracle = |c: &DerivedConstants, s: f64| {
        let n = c.n as i32;
        (c.alpha.powi(n) - s.powi(n + 1) / c.alpha) / ((n as f64 + 1.0) * s.powi(n - 1))
    };
    let h = 1e-6;
    let (mut fd_err, mut an_err) = (0.0f64, 0.0f64);
    for (n, a) in GEOMETRIES {
        let star = critical(n, a);
        let up = consts(n, a, BetaSpec::Offset(h));
        for f in [0.05, 0.3, 0.6, 0.95] {
            let s = f * star.alpha;
            let fd = (potential_v(&up, s).unwrap() - potential_v(&star, s).unwrap()) / h;
            let want = oracle(&star, s);
            fd_err = fd_err.max((fd / want - 1.0).abs());
            an_err = an_err.max((g1_linearization(&star, s).unwrap().dv_dbeta / want - 1.0).abs());
        }
    }
    let c = consts(2, (3, 2), BetaSpec::Offset(1e-10));
    let plan = make_plan(&c, 0.6, 0.0, &PlanOptions::default()).unwrap();
    let r2 = plan.r_eps * plan.r_eps;
    let (lo, hi) = (c.beta_star * r2 / 16.0, c.beta_star * r2);
    let cone = cone_comparison(&c, lo, hi, 41).unwrap();
    report(
        "8",
        fd_err < 1e-4 && an_err < 1e-12 && cone.kappa < 0.02,
        format!(
            "difference quotient at h=1e-6 rel {fd_err:.3e} (tol 1e-4), analytic dV/dbeta rel {an_err:.3e}; cone kappa {:.4} on s in [{lo:.3e}, {hi:.3e}] (tol 0.02)",
            cone.kappa
        ),
    );
}

#[test]
fn criterion_09_rigidity() {
    let r = futaki_rigidity_check(&BarrierSpec::default(), None).unwrap();
    let one = |_u: f64| 1.0;
    let e = futaki_rigidity_check(&BarrierSpec::default(), Some(&one)).unwrap();
    report(
        "9",
        r.strict && r.gap > 0.0 && !e.strict,
        format!("default barrier gap {:.6} strict {}; f = 1 ratio {:.12} flagged equality {}", r.gap, r.strict, e.ratio, !e.strict),
    );
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn power_law(p: u32, q: u32) -> String {
    let g = gcd(p, q);
    format!("(β−β_*)^{{{}/{}}}", p / g, q / g)
}

#[test]
fn criterion_10_regime_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_calabi")).args(["regimes", "--format", "csv", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("regimes.csv")).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for rec in rdr.records() {
        let r = rec.unwrap();
        let (family, n, law) = (&r[0], r[1].parse::<u32>().unwrap(), &r[6]);
        let want = match (family, n) {
            ("quadric", 2) => "(β−β_*)^{1/2}".to_string(),
            ("quadric", 3) => "((β−β_*)/(−log(β−β_*)))^{1/3}".to_string(),
            ("quadric", n) => power_law(n - 1, 2 * n),
            (_, n) => power_law(1, n),
        };
        if law != want {
            bad.push(format!("{family} n={n}: {law} != {want}"));
        }
        checked += 1;
    }
    report("10", bad.is_empty() && checked == 12, format!("{checked} rows checked against the printed laws; mismatches {bad:?}"));
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn criterion_11a_j_by_parts() {
    let mut worst = 0.0f64;
    for ((n, a), theta) in GEOMETRIES.into_iter().zip([0.8, 0.5, 0.6]) {
        let m = ObstructionModel::new(&critical(n, a), theta, ModelInputs::default(), 10.0).unwrap();
        for eps in [1e-2, 1e-3, 1e-4] {
            let ev = m.evaluate_at(eps).unwrap();
            worst = worst.max((ev.j_value - ev.j_by_parts).abs() / ev.j_value.abs());
        }
    }
    report("11a", worst < 1e-8, format!("J direct vs by parts, rel {worst:.3e} (tol 1e-8)"));
}

#[test]
fn criterion_11b_exponent() {
    let eps_grid = |lo: i32, hi: i32| -> Vec<f64> { (0..=8).map(|i| 10f64.powf(lo as f64 + (hi - lo) as f64 * i as f64 / 8.0)).collect() };
    let positive = |n: u32, a: (i128, i128), theta: f64, eps: &[f64]| -> Vec<f64> {
        let m = ObstructionModel::new(&critical(n, a), theta, ModelInputs::default(), 10.0).unwrap();
        eps.iter().map(|&e| m.evaluate_at(e).unwrap().a_total).collect()
    };
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let e2 = eps_grid(-5, -3);
    let g = slope(&ln(&e2), &ln(&positive(2, (3, 2), 0.8, &e2)));
    let e4 = eps_grid(-5, -3);
    let l = slope(&ln(&e4), &ln(&positive(4, (5, 2), 0.6, &e4)));
    let e3 = eps_grid(-6, -4);
    let a3 = positive(3, (2, 1), 0.5, &e3);
    let corrected: Vec<f64> = a3.iter().zip(&e3).map(|(a, e)| (a / (1.0 / e).ln()).ln()).collect();
    let eq = slope(&ln(&e3), &corrected);
    let raw_eq = slope(&ln(&e3), &ln(&a3));
    let loglog: Vec<f64> = e3.iter().map(|e| (1.0 / e).ln().ln()).collect();
    let per: Vec<f64> = a3.iter().zip(&e3).map(|(a, e)| (a / e.powi(3)).ln()).collect();
    let log_power = slope(&loglog, &per);
    let nu0_less = 8.0 / 3.0;
    let ok = (g / 2.0 - 1.0).abs() < 0.02 && (l / nu0_less - 1.0).abs() < 0.02 && (eq / 3.0 - 1.0).abs() < 0.02 && log_power >= 0.5;
    report(
        "11b",
        ok,
        format!(
            "slopes at beta=beta_*: nu0>n {g:.4} (want 2), nu0<n {l:.4} (want 8/3), nu0=n {eq:.4} after the log factor (want 3, raw {raw_eq:.4}); log power {log_power:.3} (>= 0.5); tol 2%"
        ),
    );
}

#[test]
fn criterion_11c_negative_linear() {
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    let inputs = ModelInputs { a_ty: 0.0, constrained: false, ..Default::default() };
    let cases: [((u32, (i128, i128)), f64, &[f64]); 3] = [
        ((2, (3, 2)), 1e-3, &[1e-8, 1e-9, 1e-10]),
        ((3, (2, 1)), 1e-3, &[1e-12, 1e-14]),
        ((4, (5, 2)), 1e-4, &[1e-16]),
    ];
    for ((n, a), eps, deltas) in cases {
        let a_l = a_l_oracle(n, a.0 as f64 / a.1 as f64);
        for &d in deltas {
            let c = consts(n, a, BetaSpec::Offset(d));
            let m = ObstructionModel::new(&c, 0.6, inputs, 10.0).unwrap();
            let plan = m.plan_at(eps).unwrap();
            let b = gap_and_i2(m.star(), m.beta_profile(), &plan, &inputs).unwrap();
            let nf = n as f64;
            let law = -(2.0 * nf - 2.0) * (c.lambda - b.t_beta) * 4f64.powi(n as i32 - 1) * a_l * d;
            let r = b.value / law;
            worst = worst.max((r - 1.0).abs());
            lines.push(format!("n={n} {d:e}: {r:.4}"));
        }
    }
    report("11c", worst < 0.05, format!("I2 / (-(2n-2)(lambda - t_beta) 4^(n-1) a_L (beta-beta_*)) [{}] (tol 5%)", lines.join(", ")));
}

#[test]
fn criterion_11d_sign_change() {
    let mut lines = Vec::new();
    let mut ok = true;
    for ((n, a), theta, d) in [((2, (3, 2)), 0.8, 1e-8), ((2, (3, 2)), 0.8, 1e-10), ((3, (2, 1)), 0.5, 1e-14), ((4, (5, 2)), 0.6, 1e-16)] {
        let c = consts(n, a, BetaSpec::Offset(d));
        let m = ObstructionModel::new(&c, theta, ModelInputs::default(), 10.0).unwrap();
        let bound = m.eta_max().unwrap();
        let f = make_plan(&c, theta, 0.0, &m.opts).unwrap().f_bound;
        match m.find_sign_change() {
            Ok(eta) => {
                let av = m.evaluate(eta).unwrap().a_total;
                let good = eta.abs() <= bound && bound <= 10.0 * f + 1e-15 && av.abs() < 1e-3 * d;
                ok &= good;
                lines.push(format!("n={n} {d:e}: eta {eta:.4} (|eta| <= {bound:.3}), |A|/(beta-beta_*) {:.1e}", av.abs() / d));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("n={n} {d:e}: {e}"));
            }
        }
    }
    let mut kappa = Vec::new();
    for d in [1e-6, 1e-8] {
        let m = ObstructionModel::new(&consts(2, (3, 2), BetaSpec::Offset(d)), 0.8, ModelInputs::default(), 10.0).unwrap();
        let k = m.fitted_kappa(1e-3).unwrap();
        ok &= k >= 1e-3;
        kappa.push(format!("{k:.1}"));
    }
    report("11d", ok, format!("roots [{}]; fitted kappa at n=2 [{}] >= 1e-3", lines.join("; "), kappa.join(", ")));
}

#[test]
fn criterion_11e_wrong_sign() {
    let c = consts(2, (3, 2), BetaSpec::Offset(1e-8));
    let inputs = ModelInputs { a_ty: -1.0, constrained: false, ..Default::default() };
    let m = ObstructionModel::new(&c, 0.8, inputs, 10.0).unwrap();
    assert_eq!(m.regime, NuRegime::Greater);
    let r = m.find_sign_change();
    let rejected = matches!(ObstructionModel::new(&c, 0.8, ModelInputs { a_ty: -1.0, ..Default::default() }, 10.0), Err(Error::Domain(_)));
    report(
        "11e",
        matches!(r, Err(Error::NoSignChange(_))) && rejected,
        format!("a_TY = -1 in nu0>n: {:?}; constrained inputs reject it: {rejected}", r.map_err(|e| e.kind())),
    );
}

fn run_cli(args: &[&str], out: &Path) {
    let o = Command::new(env!("CARGO_BIN_EXE_calabi")).args(args).arg("--out").arg(out).env_remove("CALABI_OUT").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn criterion_12_determinism() {
    let runs: [&[&str]; 4] = [&["solve", "--beta", "0.3"], &["glue"], &["obstruct", "--no-root"], &["regimes"]];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut compared = 0;
    let mut differ = Vec::new();
    for args in runs {
        for d in [a.path(), b.path()] {
            run_cli(args, d);
        }
    }
    for e in std::fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        compared += 1;
        if std::fs::read(a.path().join(&name)).unwrap() != std::fs::read(b.path().join(&name)).unwrap() {
            differ.push(name.to_string_lossy().to_string());
        }
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut golden_bad = Vec::new();
    for (file, name) in [("regimes.csv", "regimes.csv"), ("regimes.json", "regimes.json"), ("gluing.json", "gluing.json"), ("gluing.csv", "gluing.csv")] {
        if std::fs::read(a.path().join(file)).unwrap() != std::fs::read(golden.join(name)).unwrap() {
            golden_bad.push(name);
        }
    }
    let c = tempfile::tempdir().unwrap();
    run_cli(&["solve", "--beta", "1/4"], c.path());
    for (file, name) in [("profile.csv", "profile_critical.csv"), ("profile.json", "profile_critical.json")] {
        if std::fs::read(c.path().join(file)).unwrap() != std::fs::read(golden.join(name)).unwrap() {
            golden_bad.push(name);
        }
    }
    report(
        "12",
        differ.is_empty() && golden_bad.is_empty() && compared == 8,
        format!("{compared} files byte-identical across two runs (differing {differ:?}); golden mismatches {golden_bad:?}"),
    );
}
