//! Gluing scales: nu0 regime, epsilon_beta, zone geometry, weight rho and cutoff chi.

use crate::error::{err, Result};
use crate::math::{abs, exp, ln, powf, sqrt};
use crate::params::{q, DerivedConstants, GeometryParams, Regime, J0, Q};
use crate::profile::{Normalization, ProfileSolution};
use crate::roots::{newton, RootTol};
use alloc::format;
use alloc::string::String;
use num_integer::Integer;
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuRegime {
    Less,
    Equal,
    Greater,
}

impl NuRegime {
    pub fn name(&self) -> &'static str {
        match self {
            NuRegime::Less => "nu0<n",
            NuRegime::Equal => "nu0=n",
            NuRegime::Greater => "nu0>n",
        }
    }
}

/// nu0 against n, decided exactly as j0 against alpha - 1.
pub fn classify(geom: &GeometryParams) -> NuRegime {
    match geom.j0 {
        J0::Infinite => NuRegime::Greater,
        J0::Finite(j) => {
            let d = Q::from_integer(j as i128) - (geom.alpha - Q::one());
            if d.is_zero() {
                NuRegime::Equal
            } else if d > Q::zero() {
                NuRegime::Greater
            } else {
                NuRegime::Less
            }
        }
    }
}

/// nu0 as a float, infinite when j0 is.
pub fn nu0(geom: &GeometryParams) -> f64 {
    geom.nu0_exact().map(|v| crate::params::q_to_f64(&v)).unwrap_or(f64::INFINITY)
}

fn fraction(x: Q) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// The law of epsilon_beta as an expression in beta - beta_*.
pub fn regime_law(geom: &GeometryParams) -> String {
    let inv_n = q(1, geom.n as i128);
    match classify(geom) {
        NuRegime::Greater => format!("(β−β_*)^{{{}}}", fraction(inv_n)),
        NuRegime::Equal => format!("((β−β_*)/(−log(β−β_*)))^{{{}}}", fraction(inv_n)),
        NuRegime::Less => {
            let e = geom.nu0_exact().map(|v| Q::one() / v).unwrap_or(Q::zero());
            let g = e.numer().gcd(e.denom());
            format!("(β−β_*)^{{{}}}", fraction(Q::new(e.numer() / g, e.denom() / g)))
        }
    }
}

/// Solves beta - beta_* = k eps^{nu0}, k eps^n log(1/eps) or k eps^n by regime.
pub fn epsilon_beta(consts: &DerivedConstants, kappa_ratio: f64) -> Result<f64> {
    let c = consts;
    if c.regime != Regime::Supercritical {
        return Err(err!(Regime, "epsilon_beta needs beta > beta_*"));
    }
    if !(kappa_ratio > 0.0) {
        return Err(err!(Domain, "kappa ratio must be positive"));
    }
    let target = c.delta / kappa_ratio;
    let nf = c.nf();
    match classify(&c.geom) {
        NuRegime::Less => Ok(powf(target, 1.0 / nu0(&c.geom))),
        NuRegime::Greater => Ok(powf(target, 1.0 / nf)),
        NuRegime::Equal => {
            // eps^n log(1/eps) increases on (0, e^{-1/n}] up to 1/(n e)
            let top = 1.0 / (nf * core::f64::consts::E);
            if target >= top {
                return Err(err!(NoRoot, "beta - beta_* = {:e} above the monotone-branch maximum {:e}", c.delta, top * kappa_ratio));
            }
            let lt = ln(target);
            let hi = -1.0 / nf;
            let mut lo = lt / nf - 10.0;
            while nf * lo + ln(-lo) - lt > 0.0 {
                lo -= 10.0;
            }
            let x = newton(|x| (nf * x + ln(-x) - lt, nf + 1.0 / x), lo, hi, RootTol { x_rel: 1e-14, x_abs: 1e-12, max_iter: 200 })?;
            Ok(exp(x))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlanOptions {
    pub margin: f64,
    pub kappa_ratio: f64,
    /// exponent in F = eps^sigma when nu0 > n
    pub sigma: Option<f64>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { margin: 10.0, kappa_ratio: 1.0, sigma: None }
    }
}

#[derive(Debug, Clone)]
pub struct GluingPlan {
    pub n: u32,
    pub beta_star: f64,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon_beta: Option<f64>,
    pub eta: f64,
    pub theta: f64,
    pub r_eps: f64,
    pub u_eps: f64,
    /// u at rho = 2 r_eps (inner edge of the gluing zone, towards D)
    pub u_zone_inner: f64,
    /// u at rho = r_eps / 2
    pub u_zone_outer: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub nu0: f64,
    pub regime: NuRegime,
    pub e_bound: f64,
    pub f_bound: f64,
    pub sigma: f64,
    pub margin: f64,
    /// rho_eps^2 / (beta - beta_*)^{1/n}
    pub lower_margin: f64,
    /// 1 / rho_eps^2
    pub upper_margin: f64,
}

fn check_theta(geom: &GeometryParams, theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(err!(Theta, "theta = {theta} outside (0, 1)"));
    }
    let nf = geom.n as f64;
    match classify(geom) {
        NuRegime::Less => {
            let bound = 1.0 - (nu0(geom) - 1.0) / nf;
            if theta <= bound {
                return Err(err!(Theta, "theta = {theta} must exceed 1 - (nu0 - 1)/n = {bound}"));
            }
        }
        NuRegime::Greater => {
            let bound = 1.0 / (nf + 1.0);
            if theta <= bound {
                return Err(err!(Theta, "theta = {theta} must exceed 1/(n+1) = {bound}"));
            }
        }
        NuRegime::Equal => {}
    }
    Ok(())
}

pub fn default_sigma(geom: &GeometryParams, theta: f64) -> f64 {
    let nf = geom.n as f64;
    let bs = crate::params::q_to_f64(&geom.beta_star_exact());
    let v = nu0(geom);
    let second = if v.is_finite() { (v - nf) * bs * theta } else { f64::INFINITY };
    (1.0 - theta).min(second) / 2.0
}

/// Plan at eps = epsilon_beta (1 + eta).
pub fn make_plan(consts: &DerivedConstants, theta: f64, eta: f64, opts: &PlanOptions) -> Result<GluingPlan> {
    check_theta(&consts.geom, theta)?;
    if !(abs(eta) < 0.5) {
        return Err(err!(Domain, "|eta| = {} must be below 1/2", abs(eta)));
    }
    let eb = epsilon_beta(consts, opts.kappa_ratio)?;
    build(consts, eb * (1.0 + eta), Some(eb), eta, theta, opts)
}

/// Plan at a given eps, e.g. at beta = beta_*.
pub fn plan_with_epsilon(consts: &DerivedConstants, epsilon: f64, theta: f64, opts: &PlanOptions) -> Result<GluingPlan> {
    check_theta(&consts.geom, theta)?;
    if consts.regime == Regime::Subcritical {
        return Err(err!(Regime, "gluing needs beta >= beta_*"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(err!(Domain, "epsilon = {epsilon} outside (0, 1)"));
    }
    build(consts, epsilon, None, 0.0, theta, opts)
}

fn build(c: &DerivedConstants, eps: f64, eb: Option<f64>, eta: f64, theta: f64, opts: &PlanOptions) -> Result<GluingPlan> {
    let nf = c.nf();
    let bs = c.beta_star;
    let r_eps = powf(eps, (1.0 - theta) / 2.0);
    let u_eps = -(2.0 / bs) * ln(r_eps / 2.0);
    let l4 = ln(4.0) / bs;
    let regime = classify(&c.geom);
    let v = nu0(&c.geom);
    let e_bound = match regime {
        NuRegime::Less => powf(eps, v - nf * (1.0 - theta)),
        NuRegime::Equal => powf(eps, nf * theta) * ln(1.0 / eps),
        NuRegime::Greater => powf(eps, nf * theta),
    };
    let sigma = opts.sigma.unwrap_or_else(|| default_sigma(&c.geom, theta));
    let e_ref = eb.unwrap_or(eps);
    let f_bound = match regime {
        NuRegime::Less => powf(e_ref, (1.0 - theta) * f64::min(1.0, nf - v)),
        NuRegime::Equal => 1.0 / ln(1.0 / e_ref),
        NuRegime::Greater => powf(e_ref, sigma),
    };
    let rho2 = r_eps * r_eps / 4.0;
    let lower_margin = if c.delta > 0.0 { rho2 / powf(c.delta, 1.0 / nf) } else { f64::INFINITY };
    let upper_margin = 1.0 / rho2;
    if lower_margin < opts.margin || upper_margin < opts.margin {
        return Err(err!(
            Window,
            "gluing window too narrow: margins {lower_margin:.3e} (lower) and {upper_margin:.3e} (upper), need {}",
            opts.margin
        ));
    }
    Ok(GluingPlan {
        n: c.n,
        beta_star: bs,
        alpha: c.alpha,
        delta: c.delta,
        epsilon: eps,
        epsilon_beta: eb,
        eta,
        theta,
        r_eps,
        u_eps,
        u_zone_inner: u_eps - l4,
        u_zone_outer: u_eps + l4,
        rho_min: sqrt(eps),
        rho_max: 2.0 * sqrt(c.alpha / bs),
        nu0: v,
        regime,
        e_bound,
        f_bound,
        sigma,
        margin: opts.margin,
        lower_margin,
        upper_margin,
    })
}

/// rho at u: (4/beta_*) t(u) up to u_eps, max(4 e^{-beta_* u}, eps) beyond.
pub fn weight_rho(plan: &GluingPlan, profile: &ProfileSolution, u: f64) -> Result<f64> {
    if profile.normalization != Normalization::A1Normalized {
        return Err(err!(Domain, "weight rho is defined on the A1-normalized profile"));
    }
    if u <= plan.u_eps {
        let p = profile.sample_at_u(u)?;
        Ok(sqrt(4.0 / plan.beta_star * p.t))
    } else {
        Ok(sqrt(f64::max(4.0 * exp(-plan.beta_star * u), plan.epsilon)))
    }
}

/// Inner and outer values of rho^2 at u_eps and their relative mismatch.
pub fn rho_mismatch(plan: &GluingPlan, profile: &ProfileSolution) -> Result<f64> {
    let inner = weight_rho(plan, profile, plan.u_eps)?;
    let outer = sqrt(f64::max(4.0 * exp(-plan.beta_star * plan.u_eps), plan.epsilon));
    Ok(abs(inner / outer - 1.0))
}

/// 6y^5 - 15y^4 + 10y^3 with y = log_4(2 rho / r_eps), clamped to [0, 1].
pub fn cutoff_chi(plan: &GluingPlan, rho: f64) -> f64 {
    if !(rho > 0.0) {
        return 0.0;
    }
    let y = ((ln(rho / plan.r_eps) + ln(2.0)) / ln(4.0)).clamp(0.0, 1.0);
    y * y * y * (10.0 - 15.0 * y + 6.0 * y * y)
}
