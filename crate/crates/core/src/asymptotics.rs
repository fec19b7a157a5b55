//! Apex series, expansion coefficients and their extraction from solved profiles.
//!
//! Coordinates: rho^2 = e^{-beta_* u} in the profile's output u, r = 2 rho.
//! Windows are given in the raw scale (rho of Raw coordinates) so that a window names the
//! same zone in either normalization.

use crate::error::{err, Result};
use crate::lsq;
use crate::math::{abs, exp, ln, ln1p, powf, powi};
use crate::params::{DerivedConstants, Regime};
use crate::profile::{extinction_time, ProfileSample, ProfileSolution, Normalization};
use crate::roots::{newton, RootTol};
use crate::series;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub const MAX_ORDER: usize = 20;

/// gamma(s) = G(s^n) = sigma q(sigma) with sigma = b^{-1/n} s and q^n (1 - (a/b) sigma q) = 1.
#[derive(Debug, Clone)]
pub struct ApexSeries {
    pub order: usize,
    /// c_k, the coefficient of s^k in gamma(s), k = 0..=order
    pub coefficients: Vec<f64>,
    /// exact coefficients of q(sigma) when a/b is rational
    pub q_exact: Option<Vec<BigRational>>,
}

fn q_series<T: series::Coef>(n: u32, kappa: T, len: usize) -> Vec<T> {
    let mut q = vec![T::zero(); len];
    q[0] = T::one();
    let nn: T = series::int(n);
    for k in 1..len {
        let qn = series::pow(&q, n, k);
        let qn1 = series::mul(&qn, &q, k - 1);
        let e = qn[k].clone() - kappa.clone() * qn1[k - 1].clone();
        q[k] = -(e / nn.clone());
    }
    q
}

fn big(x: &crate::params::Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn series_g(consts: &DerivedConstants, order: usize) -> Result<ApexSeries> {
    if order == 0 || order > MAX_ORDER {
        return Err(err!(Domain, "series order {order} outside 1..={MAX_ORDER}"));
    }
    let c = consts;
    let (q, q_exact) = match &c.exact {
        Some(e) => {
            let qe = q_series(c.n, big(&e.a) / big(&e.b), order);
            let qf = qe.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
            (qf, Some(qe))
        }
        None => (q_series(c.n, c.a / c.b, order), None),
    };
    let c1 = powf(c.b, -1.0 / c.nf());
    let mut coefficients = vec![0.0; order + 1];
    let mut p = 1.0;
    for k in 1..=order {
        p *= c1;
        coefficients[k] = p * q[k - 1];
    }
    Ok(ApexSeries { order, coefficients, q_exact })
}

impl ApexSeries {
    pub fn eval(&self, s: f64) -> f64 {
        series::eval(&self.coefficients, s)
    }

    /// |gamma(s)^n (b - a gamma(s)) - s^n|
    pub fn residual(&self, consts: &DerivedConstants, s: f64) -> f64 {
        let g = self.eval(s);
        abs(consts.f(g) - powi(s, consts.n))
    }
}

/// Formula values of the expansion phi = sum a_k rho^{2k} + delta a_L rho^{2-2n} + ...
#[derive(Debug, Clone)]
pub struct FormulaCoefficients {
    pub normalization: Normalization,
    /// a_k for k = 0..=order
    pub a: Vec<f64>,
    pub a_l: f64,
}

/// Factor X / rho^2 between the raw-scale variable and the output rho^2.
pub fn rho_scale(consts: &DerivedConstants, norm: Normalization) -> f64 {
    match norm {
        Normalization::Raw => 1.0,
        Normalization::A1Normalized => powf(consts.b, 1.0 + 1.0 / consts.nf()),
    }
}

pub fn formula_coefficients(consts: &DerivedConstants, order: usize, norm: Normalization) -> Result<FormulaCoefficients> {
    let c = consts;
    let n = c.n;
    let nf = c.nf();
    let g = series_g(c, order)?;
    // t/(s (1 - t/lambda)) as a series in s, then integrated against n/(lambda mu) ds
    let over_s: Vec<f64> = g.coefficients[1..].to_vec();
    let mut denom: Vec<f64> = g.coefficients.iter().map(|v| -v / c.lambda).collect();
    denom[0] = 1.0;
    let h = series::mul(&over_s, &series::inverse(&denom, order), order - 1);
    let mut big_phi = vec![0.0; order + 1];
    for k in 0..order {
        big_phi[k + 1] = nf / (c.lambda * c.mu) * h[k] / (k as f64 + 1.0);
    }
    // s = x exp(-(mu/n) Phi(s)) with x = rho^2
    let mut s = vec![0.0; order + 1];
    s[1] = 1.0;
    for _ in 0..order {
        let comp = series::compose(&big_phi, &s, order);
        let arg: Vec<f64> = comp.iter().map(|v| -c.mu / nf * v).collect();
        let e = series::exp(&arg, order);
        let mut next = vec![0.0; order + 1];
        next[1..].copy_from_slice(&e[..order]);
        s = next;
    }
    let mut a = series::compose(&big_phi, &s, order);
    a[0] = 0.0;
    let mut a_l = powi(c.alpha, n) / ((nf - 1.0) * nf * (nf + 1.0) * powf(c.b, 1.0 + 1.0 / nf));
    let sc = rho_scale(c, norm);
    let mut p = 1.0;
    for v in a.iter_mut() {
        *v *= p;
        p *= sc;
    }
    a_l /= powi(sc, n - 1);
    Ok(FormulaCoefficients { normalization: norm, a, a_l })
}

/// Closed form of the critical profile in A1 coordinates: (alpha/beta_*) log(1 + (beta_*/alpha) x), x = rho^2.
pub fn critical_closed_form(consts: &DerivedConstants, x: f64) -> f64 {
    let r = consts.beta_star / consts.alpha;
    ln1p(r * x) / r
}

#[derive(Debug, Clone, Copy)]
pub struct FitWindow {
    /// raw-scale r bounds; None picks 3 (beta - beta_*)^{1/(2n)}
    pub r_lo: Option<f64>,
    pub r_hi: f64,
    pub points: usize,
    /// polynomial terms fitted on the critical profile
    pub poly_terms: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { r_lo: None, r_hi: 0.3, points: 25, poly_terms: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub formula: FormulaCoefficients,
    /// fitted a_k, k = 0..poly_terms
    pub fitted_a: Vec<f64>,
    pub poly_residual: f64,
    pub fitted_a_l: f64,
    /// coefficient of (t_* - lambda), the translation mode
    pub gauge: f64,
    pub green_residual: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// smallest value of phi_beta - phi_* after removing the translation mode and the additive constant
    pub min_corrected_diff: f64,
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| lo * exp(ln(hi / lo) * i as f64 / m as f64)).collect()
}

/// u at which the output rho^2 equals x / scale, i.e. at raw-scale rho^2 = x.
fn u_of_raw_x(consts: &DerivedConstants, norm: Normalization, x: f64) -> f64 {
    -ln(x / rho_scale(consts, norm)) / consts.beta_star
}

fn check_pair(beta: &ProfileSolution, star: &ProfileSolution) -> Result<()> {
    if beta.normalization != star.normalization {
        return Err(err!(Domain, "profiles use different normalizations"));
    }
    if star.regime != Regime::Critical {
        return Err(err!(Regime, "reference profile must be critical"));
    }
    match beta.regime {
        Regime::Subcritical => Err(err!(Regime, "expansion needs beta >= beta_*")),
        _ => Ok(()),
    }
}

fn window_bounds(consts: &DerivedConstants, w: &FitWindow) -> Result<(f64, f64)> {
    let nf = consts.nf();
    let delta = consts.delta.max(0.0);
    let lo = w.r_lo.unwrap_or(3.0 * powf(delta, 1.0 / (2.0 * nf)));
    if delta > 0.0 && powf(delta, 1.0 / nf) >= w.r_hi * w.r_hi {
        return Err(err!(Window, "(beta - beta_*)^(1/n) = {:e} not below r_hi^2 = {:e}", powf(delta, 1.0 / nf), w.r_hi * w.r_hi));
    }
    if delta > 0.0 && lo >= w.r_hi {
        return Err(err!(Window, "empty window: r_lo = {lo:e} >= r_hi = {:e}", w.r_hi));
    }
    Ok((if lo > 0.0 { lo } else { w.r_hi * 1e-2 }, w.r_hi))
}

struct Pair {
    /// output rho^2
    p: f64,
    beta: ProfileSample,
    star: ProfileSample,
}

fn sample_pairs(beta: &ProfileSolution, star: &ProfileSolution, rs: &[f64]) -> Result<Vec<Pair>> {
    let c = beta.consts();
    let sc = rho_scale(c, beta.normalization);
    rs.iter()
        .map(|&r| {
            let x = r * r / 4.0;
            let u = u_of_raw_x(c, beta.normalization, x);
            Ok(Pair { p: x / sc, beta: beta.sample_at_u(u)?, star: star.sample_at_u(u)? })
        })
        .collect()
}

fn green_rows(c: &DerivedConstants, pairs: &[Pair]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = c.n as i32;
    let d = c.delta;
    let rows = pairs
        .iter()
        .map(|pr| {
            let p = pr.p;
            let mut row = vec![pr.star.t - c.lambda];
            for k in 0..=n {
                row.push(d * powf(p, (1 - n + k) as f64));
            }
            row.push(d * ln(p));
            row.push(d * d * powf(p, (1 - 2 * n) as f64));
            row.push(d * d * d * powf(p, (1 - 3 * n) as f64));
            row
        })
        .collect();
    let y = pairs.iter().map(|pr| pr.beta.phi - pr.star.phi).collect();
    (rows, y)
}

/// Polynomial part fitted on the critical profile alone.
pub fn fit_polynomial(star: &ProfileSolution, terms: usize) -> Result<(Vec<f64>, f64)> {
    let c = star.consts();
    let sc = rho_scale(c, star.normalization);
    // fit in X = raw-scale rho^2 on [1e-3, 0.1] (times the radius of convergence scale)
    let xs = geometric(1e-3, 0.1, 40);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for &x in &xs {
        let u = u_of_raw_x(c, star.normalization, x);
        let s = star.sample_at_u(u)?;
        rows.push((0..terms).map(|k| powi(x, k as u32)).collect());
        y.push(s.phi);
    }
    let fit = lsq::solve(&rows, &y)?;
    let mut out = fit.coef;
    let mut p = 1.0;
    for v in out.iter_mut() {
        *v *= p;
        p *= sc;
    }
    Ok((out, fit.max_residual))
}

pub fn fit_expansion(beta: &ProfileSolution, star: &ProfileSolution, window: &FitWindow) -> Result<ExpansionReport> {
    check_pair(beta, star)?;
    let c = beta.consts();
    let norm = beta.normalization;
    let formula = formula_coefficients(c, window.poly_terms.max(3), norm)?;
    let (fitted_a, poly_residual) = fit_polynomial(star, window.poly_terms.max(3))?;
    let (r_lo, r_hi) = window_bounds(c, window)?;
    let rs = geometric(r_lo, r_hi, window.points);
    let pairs = sample_pairs(beta, star, &rs)?;
    if c.regime == Regime::Critical {
        let green_residual = pairs.iter().map(|p| abs(p.beta.phi - p.star.phi)).fold(0.0, f64::max);
        return Ok(ExpansionReport {
            formula,
            fitted_a,
            poly_residual,
            fitted_a_l: 0.0,
            gauge: 0.0,
            green_residual,
            r_lo,
            r_hi,
            min_corrected_diff: 0.0,
        });
    }
    let (rows, y) = green_rows(c, &pairs);
    let fit = lsq::solve(&rows, &y)?;
    let gauge = fit.coef[0];
    // the constant column sits at index n and is not separable from the translation mode
    let k0 = c.n as usize;
    let min_corrected_diff =
        rows.iter().zip(&y).map(|(r, v)| v - gauge * r[0] - fit.coef[k0] * r[k0]).fold(f64::INFINITY, f64::min);
    Ok(ExpansionReport {
        formula,
        fitted_a,
        poly_residual,
        fitted_a_l: fit.coef[1],
        gauge,
        green_residual: fit.max_residual,
        r_lo,
        r_hi,
        min_corrected_diff,
    })
}

/// Translates the supercritical profile so its difference with the critical one carries
/// no (t_* - lambda) component. Returns the translated profile and the total shift.
pub fn gauge_fixed(beta: &ProfileSolution, star: &ProfileSolution, window: &FitWindow) -> Result<(ProfileSolution, f64)> {
    check_pair(beta, star)?;
    let c = beta.consts();
    if c.regime == Regime::Critical {
        return Ok((beta.clone(), 0.0));
    }
    let (r_lo, r_hi) = window_bounds(c, window)?;
    let rs = geometric(r_lo, r_hi, window.points);
    let mut total = 0.0;
    let mut cur = beta.clone();
    for _ in 0..4 {
        let pairs = sample_pairs(&cur, star, &rs)?;
        let (rows, y) = green_rows(c, &pairs);
        let k = lsq::solve(&rows, &y)?.coef[0];
        total -= k;
        cur = beta.translated(total);
        if abs(k) <= 1e-13 * (1.0 + abs(total)) {
            break;
        }
    }
    Ok((cur, total))
}

#[derive(Debug, Clone)]
pub struct DerivativeReport {
    /// coefficient of rho^2 in rho d_rho phi_* (expected 2 a_1)
    pub poly_slope: f64,
    /// coefficient of rho^2 in (rho d_rho)^2 phi_* (expected 4 a_1)
    pub poly_second: f64,
    pub expected_a1: f64,
    /// log-log slope in r of |rho d_rho (phi_beta - phi_*)|
    pub green_exponent: f64,
    /// measured sign of rho d_rho (phi_beta - phi_*)
    pub green_sign: f64,
    /// ratio of second to first derivative corrections (magnitude 2n-2)
    pub green_ratio: f64,
    /// fitted K in |V_beta / V_* - 1| <= K ((beta - beta_*)/r^{2n} + r^2)
    pub metric_k: f64,
}

pub fn fit_derivative_expansions(beta: &ProfileSolution, star: &ProfileSolution, window: &FitWindow) -> Result<DerivativeReport> {
    check_pair(beta, star)?;
    let c = star.consts();
    let bs = c.beta_star;
    let sc = rho_scale(c, star.normalization);
    let a1 = formula_coefficients(c, 3, star.normalization)?.a[1];
    // polynomial part on the critical profile: rho d_rho phi = (2/beta_*) t, (rho d_rho)^2 phi = (4/beta_*^2) V
    let xs = geometric(1e-4, 1e-2, 30);
    let mut rows = Vec::new();
    let mut y1 = Vec::new();
    let mut y2 = Vec::new();
    for &x in &xs {
        let s = star.sample_at_u(u_of_raw_x(c, star.normalization, x))?;
        let p = x / sc;
        rows.push((1..=4).map(|k| powi(p, k)).collect());
        y1.push(2.0 / bs * s.t);
        y2.push(4.0 / (bs * bs) * s.v);
    }
    let poly_slope = lsq::solve(&rows, &y1)?.coef[0];
    let poly_second = lsq::solve(&rows, &y2)?.coef[0];
    let (mut green_exponent, mut green_sign, mut green_ratio, mut metric_k) = (0.0, 0.0, 0.0, 0.0);
    if beta.regime == Regime::Supercritical {
        let (gf, _) = gauge_fixed(beta, star, window)?;
        let (r_lo, r_hi) = window_bounds(beta.consts(), window)?;
        let d = beta.consts().delta;
        let nf = c.nf();
        let rs = geometric(r_lo, r_hi, window.points);
        let pairs = sample_pairs(&gf, star, &rs)?;
        // Green's term dominates where both the nonlinear and polynomial corrections are small
        let x_lo = 30.0 * powf(d, 1.0 / nf);
        let mut lr = Vec::new();
        let mut ld = Vec::new();
        let mut ratios = Vec::new();
        for (r, pr) in rs.iter().zip(&pairs) {
            let x = r * r / 4.0;
            let v = pr.beta.v / pr.star.v - 1.0;
            metric_k = f64::max(metric_k, abs(v) / (d / powi(*r, 2 * c.n) + r * r));
            if x < x_lo || x > 1e-2 {
                continue;
            }
            let d1 = 2.0 / bs * (pr.beta.t - pr.star.t);
            let d2 = 4.0 / (bs * bs) * (pr.beta.v - pr.star.v);
            lr.push(vec![ln(*r), 1.0]);
            ld.push(ln(abs(d1)));
            green_sign += if d1 > 0.0 { 1.0 } else { -1.0 };
            ratios.push(d2 / d1);
        }
        if lr.len() < 4 {
            return Err(err!(Window, "too few points ({}) where the Green's term dominates", lr.len()));
        }
        green_exponent = lsq::solve(&lr, &ld)?.coef[0];
        green_sign = if green_sign > 0.0 { 1.0 } else { -1.0 };
        green_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    }
    Ok(DerivativeReport { poly_slope, poly_second, expected_a1: a1, green_exponent, green_sign, green_ratio, metric_k })
}

#[derive(Debug, Clone, Copy)]
pub struct NearD {
    pub c1: f64,
    pub c2: f64,
    pub beta_fit: f64,
    /// beta / (mu alpha^{n-1}); depends on the additive normalization of u
    pub c1_formula: f64,
    pub c2_over_c1: f64,
    pub max_residual: f64,
}

/// Fits phi' + alpha ~ c1 e^{beta u} and phi'' ~ c2 e^{beta u} as u -> -infinity.
pub fn near_d_expansion(sol: &ProfileSolution) -> Result<NearD> {
    let c = sol.consts();
    if c.regime == Regime::Subcritical {
        return Err(err!(Regime, "near-D fit is defined for beta >= beta_*"));
    }
    let top = c.alpha - c.lambda;
    let pts: Vec<ProfileSample> = sol.samples().into_iter().filter(|p| p.t > c.lambda && p.w < 1e-6 * top && p.w > 0.0).collect();
    if pts.len() < 8 {
        return Err(err!(Fit, "only {} samples near D", pts.len()));
    }
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.u, p.w]).collect();
    let y: Vec<f64> = pts.iter().map(|p| ln(p.w)).collect();
    let fit = lsq::solve(&rows, &y)?;
    if fit.max_residual > 1e-3 {
        return Err(err!(Fit, "exponent fit residual {:e}", fit.max_residual));
    }
    let rows2: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.w]).collect();
    let y2: Vec<f64> = pts.iter().map(|p| p.v / p.w).collect();
    let ratio = lsq::solve(&rows2, &y2)?.coef[0];
    let c1 = exp(fit.coef[0]);
    Ok(NearD {
        c1,
        c2: ratio * c1,
        beta_fit: fit.coef[1],
        c1_formula: c.beta / (c.mu * powi(c.alpha, c.n - 1)),
        c2_over_c1: ratio,
        max_residual: fit.max_residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ClosedFormFit {
    pub c0: f64,
    pub c1: f64,
    pub sup_residual: f64,
}

/// Fits phi = c0 - alpha u + (alpha/beta_*) log(1 + c1 e^{beta_* u}) through u = -5 and u = 5,
/// then measures the sup residual on [u_lo, u_hi].
pub fn critical_family_fit(sol: &ProfileSolution, u_lo: f64, u_hi: f64, points: usize) -> Result<ClosedFormFit> {
    let c = sol.consts();
    if c.regime != Regime::Critical {
        return Err(err!(Regime, "closed form holds only at beta = beta_*"));
    }
    let (al, bs) = (c.alpha, c.beta_star);
    let (ua, ub) = (-5.0, 5.0);
    let pa = sol.sample_at_u(ua)?.phi;
    let pb = sol.sample_at_u(ub)?.phi;
    let target = (pb - pa + al * (ub - ua)) * bs / al;
    let soft = |z: f64| if z > 30.0 { z + ln1p(exp(-z)) } else { ln1p(exp(z)) };
    let logistic = |z: f64| 1.0 / (1.0 + exp(-z));
    let l = newton(
        |l| (soft(l + bs * ub) - soft(l + bs * ua) - target, logistic(l + bs * ub) - logistic(l + bs * ua)),
        -60.0,
        60.0,
        RootTol::default(),
    )?;
    let c1 = exp(l);
    let model = |u: f64| -al * u + al / bs * soft(l + bs * u);
    let c0 = pa - model(ua);
    let mut sup = 0.0f64;
    let m = points.max(2) - 1;
    for i in 0..=m {
        let u = u_lo + (u_hi - u_lo) * i as f64 / m as f64;
        let p = sol.sample_at_u(u)?;
        sup = sup.max(abs(p.phi - c0 - model(u)));
    }
    Ok(ClosedFormFit { c0, c1, sup_residual: sup })
}

/// sup over rho in [rho_lo, 1] of |phi(rho) - f(rho^2)|.
pub fn closed_form_residual<F: Fn(f64) -> f64>(sol: &ProfileSolution, f: F, rho_lo: f64, points: usize) -> Result<f64> {
    let bs = sol.consts().beta_star;
    let mut sup = 0.0f64;
    for rho in geometric(rho_lo, 1.0, points) {
        let x = rho * rho;
        let p = sol.sample_at_u(-ln(x) / bs)?;
        sup = sup.max(abs(p.phi - f(x)));
    }
    Ok(sup)
}

/// u_beta + log(C_beta) / (n beta_*), in raw coordinates.
pub fn extinction_deviation(consts: &DerivedConstants) -> Result<f64> {
    Ok(extinction_time(consts)? + ln(consts.c_beta) / (consts.nf() * consts.beta_star))
}
