//! Residuals of the profile equations on interior samples.

use crate::error::Result;
use crate::math::{abs, exp, powi};
use crate::profile::ProfileSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// max |t^{n-1} V / (k e^{-mu phi - (alpha-1) u}) - 1|
    pub monge_ampere: f64,
    /// max |F(t) + C_beta - e^{mu psi}| / (F(t) + C_beta), psi in raw coordinates
    pub first_integral: f64,
    /// eigen-identity with phi''' = V'(t) dt/du
    pub eigen_analytic: f64,
    /// eigen-identity with phi''' from a five-point stencil of V(u), on samples whose local length
    /// V/|V'| is at least 1e-2; floor ~1e-9 from the u inversion
    pub eigen_stencil: f64,
    pub samples: usize,
}

/// Samples with alpha - t and t - t_min above the given fractions of their ranges.
fn interior(sol: &ProfileSolution, w_frac: f64, d_frac: f64) -> impl Iterator<Item = crate::profile::ProfileSample> + '_ {
    let c = sol.consts();
    let wr = c.alpha - c.lambda;
    let dr = c.lambda - sol.model.t_min;
    sol.samples().into_iter().filter(move |p| p.w > w_frac * wr && p.d > d_frac * dr)
}

pub fn profile_residuals(sol: &ProfileSolution, stencil_stride: usize) -> Result<Residuals> {
    let c = sol.consts();
    let n = c.n;
    let nf = c.nf();
    let k = sol.ma_factor();
    let shift = sol.phi_shift + c.lambda * sol.u_shift;
    let mut r = Residuals { monge_ampere: 0.0, first_integral: 0.0, eigen_analytic: 0.0, eigen_stencil: 0.0, samples: 0 };
    for p in interior(sol, 1e-10, 1e-8) {
        let lhs = powi(p.t, n - 1) * p.v;
        let rhs = k * exp(-c.mu * p.phi - (c.alpha - 1.0) * p.u);
        r.monge_ampere = r.monge_ampere.max(abs(lhs / rhs - 1.0));
        let fi = exp(c.mu * (p.psi + shift));
        r.first_integral = r.first_integral.max(abs(p.h - fi) / p.h);
        // phi' = -t, phi'' = V, V'(t) = F'(t) / t^{n-1} - (n-1) V / t, dt/du = -V
        let dv_dt = c.df(p.t) / powi(p.t, n - 1) - (nf - 1.0) * p.v / p.t;
        let third = -dv_dt * p.v;
        let terms = [third / p.v, (nf - 1.0) * p.v / -p.t, -c.mu * p.t, c.alpha - 1.0];
        let scale = terms.iter().fold(0.0f64, |m, x| m.max(abs(*x)));
        r.eigen_analytic = r.eigen_analytic.max(abs(terms.iter().sum::<f64>()) / scale);
        r.samples += 1;
    }
    let u_end = sol.u_extinct().unwrap_or(f64::INFINITY);
    for p in interior(sol, 1e-10, 1e-8).step_by(stencil_stride.max(1)) {
        // step scaled to the local length V / |V'|
        let dv_du = -(c.df(p.t) / powi(p.t, n - 1) - (nf - 1.0) * p.v / p.t) * p.v;
        let len = abs(p.v / dv_du);
        if len < 1e-2 {
            continue;
        }
        let h = 2e-3 * f64::min(1.0, len);
        if p.u + 3.0 * h >= u_end {
            continue;
        }
        let v = |du: f64| sol.sample_at_u(p.u + du).map(|s| s.v);
        let third = (v(-2.0 * h)? - 8.0 * v(-h)? + 8.0 * v(h)? - v(2.0 * h)?) / (12.0 * h);
        let terms = [third / p.v, (nf - 1.0) * p.v / -p.t, -c.mu * p.t, c.alpha - 1.0];
        let scale = terms.iter().fold(0.0f64, |m, x| m.max(abs(*x)));
        r.eigen_stencil = r.eigen_stencil.max(abs(terms.iter().sum::<f64>()) / scale);
    }
    Ok(r)
}
