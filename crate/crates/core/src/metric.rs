//! Metric coefficients of the radial ansatz: g = ds^2/V + 4 V eta^2 + (2s/(alpha-1)) g_D.

use crate::error::{err, Result};
use crate::lsq;
use crate::math::{abs, exp, ln, powi, sqrt, PI};
use crate::params::{BetaSpec, DerivedConstants, Regime};
use crate::profile::{solve_profile, GridSpec, Model, Normalization};
use crate::quad::{integrate, Tolerance};
use alloc::vec;
use alloc::vec::Vec;

/// (alpha^{n+1} - s^{n+1}) / (alpha - s)
fn geometric_sum(c: &DerivedConstants, s: f64) -> f64 {
    let mut acc = 0.0;
    let mut sk = 1.0;
    for k in 0..=c.n {
        acc += sk * powi(c.alpha, c.n - k);
        sk *= s;
    }
    acc
}

fn check_interior(c: &DerivedConstants, s: f64) -> Result<()> {
    if !(s > 0.0 && s < c.alpha) {
        return Err(err!(Domain, "s = {s} outside (0, {})", c.alpha));
    }
    Ok(())
}

/// V = s (1 - s/alpha) beta_* (1 + (beta - beta_*)(alpha^{n+1} - s^{n+1}) / ((n+1) beta_* s^n (alpha - s)))
pub fn potential_v(consts: &DerivedConstants, s: f64) -> Result<f64> {
    let c = consts;
    check_interior(c, s)?;
    let corr = c.delta * geometric_sum(c, s) / ((c.nf() + 1.0) * c.beta_star * powi(s, c.n));
    Ok(s * (1.0 - s / c.alpha) * c.beta_star * (1.0 + corr))
}

/// (F(s) + C_beta) / s^{n-1}
pub fn potential_v_unfactored(consts: &DerivedConstants, s: f64) -> Result<f64> {
    check_interior(consts, s)?;
    Ok((consts.f(s) + consts.c_beta) / powi(s, consts.n - 1))
}

/// 2 pi times the slope of V at s = alpha, fitted from V/w = m + q w with w = alpha - s.
pub fn cone_angle_at_d(consts: &DerivedConstants) -> Result<f64> {
    let m = Model::new(consts, 1e-12)?;
    let a = consts.alpha;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..30 {
        let w = a * 1e-8 * exp(ln(1e4) * i as f64 / 29.0);
        rows.push(vec![1.0, w]);
        y.push(m.h_w(w) / powi(a - w, consts.n - 1) / w);
    }
    let fit = lsq::solve(&rows, &y)?;
    if !(fit.coef[0] > 0.0) {
        return Err(err!(Fit, "non-positive slope {} at D", fit.coef[0]));
    }
    Ok(2.0 * PI * fit.coef[0])
}

#[derive(Debug, Clone, Copy)]
pub struct FarCone {
    /// 2 pi mu (lambda - gamma)
    pub angle: f64,
    /// 2 pi times the fitted decay rate of phi' + gamma as u -> infinity
    pub fitted: f64,
    pub gamma: f64,
}

pub fn cone_angle_at_infinity(consts: &DerivedConstants) -> Result<FarCone> {
    let c = consts;
    if c.regime != Regime::Subcritical {
        return Err(err!(Regime, "the far end is a cone only for beta < beta_*"));
    }
    let sol = solve_profile(c, GridSpec::default(), Normalization::Raw)?;
    let gamma = sol.model.t_min;
    let cut = 1e-5 * (c.lambda - gamma);
    let pts: Vec<_> = sol.samples().into_iter().filter(|p| p.t < c.lambda && p.d < cut).collect();
    if pts.len() < 8 {
        return Err(err!(Fit, "only {} samples near the far end", pts.len()));
    }
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.u, p.d]).collect();
    let y: Vec<f64> = pts.iter().map(|p| ln(p.d)).collect();
    let fit = lsq::solve(&rows, &y)?;
    Ok(FarCone { angle: 2.0 * PI * c.mu * (c.lambda - gamma), fitted: -2.0 * PI * fit.coef[1], gamma })
}

#[derive(Debug, Clone, Copy)]
pub struct ConeComparison {
    /// largest deviation from 1 of the ds^2 and eta^2 coefficient ratios against the cone
    pub kappa: f64,
    pub v_ratio_min: f64,
    pub v_ratio_max: f64,
}

/// Compares g with g_cone = ds^2/(s beta_*) + 4 s beta_* eta^2 + 2s g_D/(alpha-1) on [s_lo, s_hi].
pub fn cone_comparison(consts: &DerivedConstants, s_lo: f64, s_hi: f64, points: usize) -> Result<ConeComparison> {
    let c = consts;
    if !(s_lo > 0.0 && s_hi > s_lo && s_hi < c.alpha) {
        return Err(err!(Domain, "bad window [{s_lo}, {s_hi}]"));
    }
    if c.delta > 0.0 && powi(s_lo, c.n) <= 10.0 * c.delta {
        return Err(err!(Window, "s^n = {:e} not above 10 (beta - beta_*) = {:e}", powi(s_lo, c.n), 10.0 * c.delta));
    }
    let m = points.max(2) - 1;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=m {
        let s = s_lo * exp(ln(s_hi / s_lo) * i as f64 / m as f64);
        let r = potential_v(c, s)? / (s * c.beta_star);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let kappa = [hi - 1.0, 1.0 - lo, 1.0 / lo - 1.0, 1.0 - 1.0 / hi].into_iter().map(abs).fold(0.0, f64::max);
    Ok(ConeComparison { kappa, v_ratio_min: lo, v_ratio_max: hi })
}

#[derive(Debug, Clone, Copy)]
pub struct G1Coefficients {
    /// coefficient of ds^2 in g_1
    pub ds2: f64,
    /// coefficient of eta^2 in g_1
    pub eta2: f64,
    /// dV/dbeta, independent of beta
    pub dv_dbeta: f64,
    /// ds2 relative to the ds^2 coefficient of g_{beta_*}; finite at s = alpha
    pub relative: f64,
}

pub fn g1_linearization(consts: &DerivedConstants, s: f64) -> Result<G1Coefficients> {
    let c = consts;
    check_interior(c, s)?;
    let dv = (c.alpha - s) * geometric_sum(c, s) / ((c.nf() + 1.0) * c.alpha * powi(s, c.n - 1));
    let v_star = s * (1.0 - s / c.alpha) * c.beta_star;
    let relative = -geometric_sum(c, s) / ((c.nf() + 1.0) * c.beta_star * powi(s, c.n));
    Ok(G1Coefficients { ds2: -dv / (v_star * v_star), eta2: 4.0 * dv, dv_dbeta: dv, relative })
}

/// (V_{beta_*+h} - V_{beta_*}) / h
pub fn dv_dbeta_difference(consts: &DerivedConstants, s: f64, h: f64) -> Result<f64> {
    let star = consts.with_beta(BetaSpec::Offset(0.0))?;
    let up = consts.with_beta(BetaSpec::Offset(h))?;
    Ok((potential_v(&up, s)? - potential_v(&star, s)?) / h)
}

#[derive(Debug, Clone, Copy)]
pub struct CollapseReport {
    /// (F(lambda) + C_beta) 2(alpha-1) / (alpha^n beta^2)
    pub nexus_ratio: f64,
    /// sup 4V / beta over the interior
    pub sup_4v_over_beta: f64,
    /// circle length 2 pi sqrt(4 V(lambda))
    pub circle_length: f64,
    /// half of int ds / sqrt(V) over (gamma, alpha)
    pub half_length: f64,
    /// (lambda - gamma)(alpha - 1) / (alpha beta)
    pub gap_ratio: f64,
}

pub fn small_beta_collapse(consts: &DerivedConstants) -> Result<CollapseReport> {
    let c = consts;
    if c.regime != Regime::Subcritical || c.beta > 0.05 {
        return Err(err!(Regime, "collapse report needs a subcritical beta <= 0.05"));
    }
    let m = Model::new(c, 1e-12)?;
    let gamma = m.t_min;
    let h_lam = c.f_lambda() + c.c_beta;
    let nexus_ratio = h_lam * 2.0 * (c.alpha - 1.0) / (powi(c.alpha, c.n) * c.beta * c.beta);
    let mut sup = 0.0f64;
    for i in 1..400 {
        let t = gamma + (c.alpha - gamma) * i as f64 / 400.0;
        let v = m.h_at(t, c.alpha - t, t - gamma) / powi(t, c.n - 1);
        sup = sup.max(4.0 * v);
    }
    let n1 = c.n - 1;
    let tol = Tolerance::rel(1e-10);
    // s = gamma + y^2 below lambda and s = alpha - y^2 above
    let lower = integrate(
        |y| {
            let d = y * y;
            2.0 / sqrt(m.h_over_d(d) / powi(gamma + d, n1))
        },
        0.0,
        sqrt(c.lambda - gamma),
        tol,
    )?;
    let upper = integrate(
        |y| {
            let w = y * y;
            let t = c.alpha - w;
            2.0 / sqrt(m.k_of(t) / powi(t, n1))
        },
        0.0,
        sqrt(c.alpha - c.lambda),
        tol,
    )?;
    Ok(CollapseReport {
        nexus_ratio,
        sup_4v_over_beta: sup / c.beta,
        circle_length: 2.0 * PI * sqrt(4.0 * h_lam / powi(c.lambda, n1)),
        half_length: 0.5 * (lower.value + upper.value),
        gap_ratio: (c.lambda - gamma) * (c.alpha - 1.0) / (c.alpha * c.beta),
    })
}

/// phi = -u + e^u for u <= -u_j, e^{-u} for u >= u_j, quintic in between; all translated by shift.
#[derive(Debug, Clone, Copy)]
pub struct BarrierSpec {
    pub u_j: f64,
    pub shift: f64,
}

impl Default for BarrierSpec {
    fn default() -> Self {
        BarrierSpec { u_j: 2.0, shift: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Barrier {
    spec: BarrierSpec,
    quintic: Vec<f64>,
}

impl Barrier {
    pub fn new(spec: BarrierSpec) -> Result<Barrier> {
        let uj = spec.u_j;
        if !(uj > 0.0) {
            return Err(err!(Barrier, "join half-width must be positive"));
        }
        let (l, r) = (-uj, uj);
        let el = exp(l);
        let er = exp(-r);
        let targets = [-l + el, -1.0 + el, el, er, -er, er];
        let mut rows = Vec::new();
        for &x in &[l, r] {
            rows.push((0..6).map(|k| powi(x, k)).collect::<Vec<_>>());
            rows.push((0..6).map(|k| if k == 0 { 0.0 } else { k as f64 * powi(x, k - 1) }).collect());
            rows.push((0..6).map(|k| if k < 2 { 0.0 } else { (k * (k - 1)) as f64 * powi(x, k - 2) }).collect());
        }
        let y = [targets[0], targets[1], targets[2], targets[3], targets[4], targets[5]];
        let quintic = lsq::solve(&rows, &y)?.coef;
        let b = Barrier { spec, quintic };
        for i in 0..=2000 {
            let u = l + (r - l) * i as f64 / 2000.0;
            let (_, d1, d2) = b.local(u);
            if !(d1 < 0.0 && d2 > 0.0) {
                return Err(err!(Barrier, "join is not decreasing and convex at u = {u}"));
            }
        }
        Ok(b)
    }

    /// (phi, phi', phi'') in the untranslated variable
    fn local(&self, u: f64) -> (f64, f64, f64) {
        let uj = self.spec.u_j;
        if u <= -uj {
            let e = exp(u);
            (-u + e, -1.0 + e, e)
        } else if u >= uj {
            let e = exp(-u);
            (e, -e, e)
        } else {
            let q = &self.quintic;
            let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for k in (0..6).rev() {
                d2 = d2 * u + d1 * 2.0;
                d1 = d1 * u + p;
                p = p * u + q[k];
            }
            (p, d1, d2)
        }
    }

    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        self.local(u - self.spec.shift)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RigidityReport {
    /// int f phi'' du / int phi'' du
    pub ratio: f64,
    pub gap: f64,
    pub strict: bool,
}

/// Ratio of int f phi'' to int phi'' with f = -phi' unless another f is given.
pub fn futaki_rigidity_check(spec: &BarrierSpec, f: Option<&dyn Fn(f64) -> f64>) -> Result<RigidityReport> {
    let b = Barrier::new(*spec)?;
    let (uj, sh) = (spec.u_j, spec.shift);
    let cuts = [-uj - 60.0 + sh, -uj + sh, uj + sh, uj + 60.0 + sh];
    let tol = Tolerance::rel(1e-13);
    let (mut num, mut den) = (0.0, 0.0);
    for w in cuts.windows(2) {
        num += integrate(
            |u| {
                let (_, d1, d2) = b.eval(u);
                let fv = match f {
                    Some(g) => g(u),
                    None => -d1,
                };
                fv * d2
            },
            w[0],
            w[1],
            tol,
        )?
        .value;
        den += integrate(|u| b.eval(u).2, w[0], w[1], tol)?.value;
    }
    let ratio = num / den;
    let gap = 1.0 - ratio;
    Ok(RigidityReport { ratio, gap, strict: gap > 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, q, GeometryParams, J0};

    fn consts(beta: BetaSpec) -> DerivedConstants {
        derive(&GeometryParams::new(2, q(3, 2), J0::Finite(1)).unwrap(), beta).unwrap()
    }

    #[test]
    fn factored_matches_unfactored() {
        let c = consts(BetaSpec::Value(0.3));
        let a = potential_v(&c, 0.5).unwrap();
        let b = potential_v_unfactored(&c, 0.5).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
        assert!(potential_v(&c, c.alpha).is_err());
    }

    #[test]
    fn critical_potential() {
        let c = consts(BetaSpec::Exact(q(1, 4)));
        let s = 0.7;
        assert!((potential_v(&c, s).unwrap() - s * 0.25 * (1.0 - s / 1.5)).abs() < 1e-16);
    }

    #[test]
    fn cone_angle_d_all_regimes() {
        for beta in [0.1, 0.25, 0.3] {
            let c = consts(BetaSpec::Value(beta));
            let a = cone_angle_at_d(&c).unwrap();
            assert!((a / (2.0 * PI * beta) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn far_cone_angle() {
        let c = consts(BetaSpec::Value(0.1));
        let fc = cone_angle_at_infinity(&c).unwrap();
        assert!((fc.fitted / fc.angle - 1.0).abs() < 1e-4, "{} {}", fc.fitted, fc.angle);
        assert!(fc.angle > 0.0 && fc.angle < 2.0 * PI * (c.alpha - 1.0));
    }

    #[test]
    fn linearization_against_difference() {
        let c = consts(BetaSpec::Exact(q(1, 4)));
        for s in [0.1, 0.7, 1.4] {
            let g = g1_linearization(&c, s).unwrap();
            let fd = dv_dbeta_difference(&c, s, 1e-6).unwrap();
            assert!((fd / g.dv_dbeta - 1.0).abs() < 1e-4);
        }
        let near = g1_linearization(&c, c.alpha * (1.0 - 1e-12)).unwrap().relative;
        assert!((near + 1.0 / 0.25).abs() < 1e-9);
    }

    #[test]
    fn rigidity_default_and_constant() {
        let r = futaki_rigidity_check(&BarrierSpec::default(), None).unwrap();
        assert!(r.strict && (r.gap - 0.5).abs() < 1e-9);
        let one = |_u: f64| 1.0;
        let e = futaki_rigidity_check(&BarrierSpec::default(), Some(&one)).unwrap();
        assert!(!e.strict);
        let sh = futaki_rigidity_check(&BarrierSpec { u_j: 2.0, shift: 3.7 }, None).unwrap();
        assert!((sh.gap - r.gap).abs() < 1e-10);
    }
}
