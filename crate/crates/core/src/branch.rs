//! Two-branch construction of the profile from psi.
//!
//! With psi = psi0 - y^2 and t = lambda + y z the branch relation F(t) = e^{mu psi} - C_beta
//! becomes z^2 R(y z) = (F(lambda) + C_beta)(1 - e^{-mu y^2}) / y^2, and du = -2 dy / z.
//! Branch G2 has z > 0 (t > lambda), branch G1 has z < 0.

use crate::error::{err, Result};
use crate::math::{abs, binomial, expm1, powi, sqrt};
use crate::params::DerivedConstants;
use crate::profile::{nexus_psi, subcritical_gamma, Branch, ProfileSolution};
use crate::quad::{integrate, Tolerance};
use crate::roots::{newton, RootTol};
use crate::params::Regime;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct BranchOracle {
    consts: DerivedConstants,
    /// -f_k for k >= 2, where f_k is the Taylor coefficient of F at lambda
    r: Vec<f64>,
    h0: f64,
    t_min: f64,
}

impl BranchOracle {
    pub fn new(consts: &DerivedConstants) -> Result<BranchOracle> {
        let c = consts;
        let n = c.n;
        let r = (2..=n + 1)
            .map(|k| {
                let fb = if k <= n { c.b * binomial(n, k) * powi(c.lambda, n - k) } else { 0.0 };
                -(fb - c.a * binomial(n + 1, k) * powi(c.lambda, n + 1 - k))
            })
            .collect();
        let t_min = if c.regime == Regime::Subcritical { subcritical_gamma(c)? } else { 0.0 };
        Ok(BranchOracle { consts: c.clone(), r, h0: c.f_lambda() + c.c_beta, t_min })
    }

    fn r_and_dr(&self, d: f64) -> (f64, f64) {
        let mut r = 0.0;
        let mut dr = 0.0;
        for k in (0..self.r.len()).rev() {
            dr = dr * d + r;
            r = r * d + self.r[k];
        }
        (r, dr)
    }

    /// z(y) on the given branch.
    pub fn z(&self, branch: Branch, y: f64) -> Result<f64> {
        let mu = self.consts.mu;
        let q = if y * y < 1e-300 { self.h0 * mu } else { self.h0 * -expm1(-mu * y * y) / (y * y) };
        let (lo, hi) = match branch {
            Branch::G2 => (0.0, (self.consts.alpha - self.consts.lambda) / y),
            Branch::G1 => ((self.t_min - self.consts.lambda) / y, 0.0),
        };
        newton(
            |z| {
                let (r, dr) = self.r_and_dr(y * z);
                (z * z * r - q, 2.0 * z * r + z * z * y * dr)
            },
            lo,
            hi,
            RootTol { x_rel: 1e-15, x_abs: 1e-300, max_iter: 200 },
        )
    }

    /// u - u0 at the point of the branch where psi takes the given value.
    pub fn u_offset(&self, branch: Branch, psi: f64) -> Result<f64> {
        let psi0 = nexus_psi(&self.consts);
        let gap = psi0 - psi;
        if gap < 0.0 {
            return Err(err!(Range, "psi = {psi} above its maximum {psi0}"));
        }
        let y_top = sqrt(gap);
        if y_top == 0.0 {
            return Ok(0.0);
        }
        let mut failed = None;
        let est = integrate(
            |y| match self.z(branch, y) {
                Ok(z) => -2.0 / z,
                Err(e) => {
                    failed = Some(e);
                    0.0
                }
            },
            0.0,
            y_top,
            Tolerance::rel(1e-11),
        )?;
        if let Some(e) = failed {
            return Err(e);
        }
        Ok(est.value)
    }
}

/// Largest |u - u0| mismatch between the branch construction and the solved profile
/// over samples with |u - u0| <= span. Returns (G1 side, G2 side).
pub fn oracle_deviation(sol: &ProfileSolution, span: f64) -> Result<(f64, f64)> {
    let oracle = BranchOracle::new(sol.consts())?;
    let c = sol.consts();
    let u0 = sol.u0();
    let shift = sol.phi_shift + c.lambda * sol.u_shift;
    let mut dev = (0.0f64, 0.0f64);
    for p in sol.samples() {
        let du = p.u - u0;
        if abs(du) > span || du == 0.0 {
            continue;
        }
        let branch = if p.t > c.lambda { Branch::G2 } else { Branch::G1 };
        // psi in raw coordinates
        let psi_raw = p.psi + shift;
        let off = oracle.u_offset(branch, psi_raw)?;
        let e = abs(off - du);
        match branch {
            Branch::G1 => dev.0 = dev.0.max(e),
            Branch::G2 => dev.1 = dev.1.max(e),
        }
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, q, BetaSpec, GeometryParams, J0};
    use crate::profile::{solve_profile, GridSpec, Normalization};

    #[test]
    fn branches_reproduce_profile() {
        let g = GeometryParams::new(2, q(3, 2), J0::Finite(1)).unwrap();
        for beta in [0.1, 0.25, 0.3] {
            let c = derive(&g, BetaSpec::Value(beta)).unwrap();
            let sol = solve_profile(&c, GridSpec::default(), Normalization::Raw).unwrap();
            let (d1, d2) = oracle_deviation(&sol, 20.0).unwrap();
            assert!(d1 < 1e-8 && d2 < 1e-8, "{beta}: {d1:e} {d2:e}");
        }
    }

    #[test]
    fn z_signs() {
        let g = GeometryParams::new(3, q(2, 1), J0::Finite(1)).unwrap();
        let c = derive(&g, BetaSpec::Value(0.4)).unwrap();
        let o = BranchOracle::new(&c).unwrap();
        assert!(o.z(Branch::G2, 0.5).unwrap() > 0.0);
        assert!(o.z(Branch::G1, 0.5).unwrap() < 0.0);
    }
}
