//! One-dimensional obstruction: the integral J, the boundary term I2 and the balance A(eta).

use crate::asymptotics::{formula_coefficients, gauge_fixed, FitWindow};
use crate::error::{err, Result};
use crate::gluing::{classify, epsilon_beta, make_plan, plan_with_epsilon, GluingPlan, NuRegime, PlanOptions};
use crate::math::{abs, exp, ln, powf, powi, sqrt};
use crate::params::{BetaSpec, DerivedConstants, Regime};
use crate::profile::{solve_profile, GridSpec, Normalization, ProfileSample, ProfileSolution, Side};
use crate::quad::{integrate, Tolerance};
use crate::roots::{bisect, RootTol};

#[derive(Debug, Clone, Copy)]
pub struct ModelInputs {
    /// fiber density of the eigenfunction, integrated over D
    pub c_phi: f64,
    /// Green's-term coefficient of the Tian-Yau potential
    pub a_ty: f64,
    /// enforce a_ty > 0
    pub constrained: bool,
    /// multiplies the matched kappa ratio used for epsilon_beta
    pub kappa_factor: f64,
    /// replaces the matched kappa ratio
    pub kappa_ratio: Option<f64>,
}

impl Default for ModelInputs {
    fn default() -> Self {
        ModelInputs { c_phi: 1.0, a_ty: 1.0, constrained: true, kappa_factor: 1.0, kappa_ratio: None }
    }
}

impl ModelInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_phi >= 0.0) || !self.a_ty.is_finite() {
            return Err(err!(Domain, "c_phi must be nonnegative and a_TY finite"));
        }
        if self.constrained && !(self.a_ty > 0.0) {
            return Err(err!(Domain, "constrained inputs need a_TY > 0, got {}", self.a_ty));
        }
        if !(self.kappa_factor > 0.0) || self.kappa_ratio.is_some_and(|k| !(k > 0.0)) {
            return Err(err!(Domain, "kappa ratio and factor must be positive"));
        }
        Ok(())
    }
}

fn exponent_c(c: &DerivedConstants) -> Result<f64> {
    let nu0 = c.nu0.ok_or_else(|| err!(Domain, "J is not defined for j0 = infinity"))?;
    Ok(c.beta_star * (nu0 - c.nf()))
}

/// int g(sample) du over u <= u_top, or over the whole profile when u_top is None.
fn integrate_du<G: Fn(&ProfileSample) -> f64>(sol: &ProfileSolution, u_top: Option<f64>, g: G) -> Result<f64> {
    let m = &sol.model;
    let c = &m.consts;
    let x_w = ln(c.alpha - c.lambda);
    let x_d = ln(c.lambda - m.t_min);
    let tol = Tolerance::rel(1e-12);
    let piece = |side: Side, lo: f64, hi: f64| -> Result<f64> {
        let mut failed = None;
        let sign = if side == Side::D { 1.0 } else { -1.0 };
        let est = integrate(
            |x| match sol.sample_at_offset(side, x) {
                Ok(p) => sign * g(&p) * m.integrands(side, x).1,
                Err(e) => {
                    failed = Some(e);
                    0.0
                }
            },
            lo,
            hi,
            tol,
        )?;
        match failed {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    };
    let x_lo = x_w - 40.0;
    let (d_side_top, zero_lo) = match u_top {
        Some(u) => {
            let p = sol.sample_at_u(u)?;
            if p.t >= c.lambda {
                return piece(Side::D, x_lo, ln(p.w));
            }
            (x_w, ln(p.d))
        }
        None => {
            let floor = if c.c_beta > 0.0 { ln(c.c_beta) / c.nf() - 40.0 } else { x_d - 550.0 / c.nf() };
            (x_w, floor.min(x_d - 40.0))
        }
    };
    Ok(piece(Side::D, x_lo, d_side_top)? + piece(Side::Zero, zero_lo, x_d)?)
}

/// Upper limit of J: u at rho = 2 r_eps.
pub fn j_upper(plan: &GluingPlan) -> f64 {
    plan.u_zone_inner
}

/// J = int_{-inf}^{U} e^{c u} (phi' + lambda) e^{-mu phi} du with c = beta_*(nu0 - n).
pub fn j_integral(profile: &ProfileSolution, plan: &GluingPlan) -> Result<f64> {
    let c = profile.consts();
    let ce = exponent_c(c)?;
    let (mu, lam) = (c.mu, c.lambda);
    integrate_du(profile, Some(j_upper(plan)), |p| (lam - p.t) * exp(ce * p.u - mu * p.phi))
}

/// J = -(1/mu) e^{c U - mu phi(U)} + (beta_* nu0 / mu) int_{-inf}^{U} e^{c u - mu phi} du.
pub fn j_integral_by_parts(profile: &ProfileSolution, plan: &GluingPlan) -> Result<f64> {
    let c = profile.consts();
    let ce = exponent_c(c)?;
    let nu0 = c.nu0.unwrap_or(f64::INFINITY);
    let mu = c.mu;
    let top = j_upper(plan);
    let s = profile.sample_at_u(top)?;
    let bulk = integrate_du(profile, Some(top), |p| exp(ce * p.u - mu * p.phi))?;
    Ok(-exp(ce * top - mu * s.phi) / mu + c.beta_star * nu0 / mu * bulk)
}

/// a_beta = (beta_* nu0 / mu) int e^{c u - mu phi} du over the whole profile (nu0 < n).
pub fn j_limit(profile: &ProfileSolution) -> Result<f64> {
    let c = profile.consts();
    let ce = exponent_c(c)?;
    if ce >= 0.0 && c.regime == Regime::Critical {
        return Err(err!(Domain, "J diverges unless nu0 < n"));
    }
    let mu = c.mu;
    let mut bulk = integrate_du(profile, None, |p| exp(ce * p.u - mu * p.phi))?;
    if c.regime == Regime::Critical {
        // beyond the last node u grows like -x/b and phi is frozen
        let m = &profile.model;
        let x_d = ln(c.lambda - m.t_min);
        let p = profile.sample_at_offset(Side::Zero, (x_d - 550.0 / c.nf()).min(x_d - 40.0))?;
        bulk += exp(ce * p.u - mu * p.phi) / -ce;
    }
    Ok(c.beta_star * c.nu0.unwrap_or(f64::INFINITY) / mu * bulk)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerm {
    pub value: f64,
    /// part carried by the Tian-Yau tail
    pub tail: f64,
    /// part carried by phi_* - phi_beta
    pub gap: f64,
    pub r: f64,
    pub t_beta: f64,
    pub t_star: f64,
}

/// d/dr of the Tian-Yau tail at r.
fn tail_slope(plan: &GluingPlan, a_ty: f64, r: f64) -> f64 {
    let nf = plan.n as f64;
    let eps = plan.epsilon;
    match plan.regime {
        NuRegime::Greater => (2.0 - 2.0 * nf) * a_ty * powi(eps, plan.n) * powf(r, 1.0 - 2.0 * nf),
        NuRegime::Equal => a_ty * powi(eps, plan.n) * powf(r, 1.0 - 2.0 * nf) * ((2.0 - 2.0 * nf) * ln(r / sqrt(eps)) + 1.0),
        NuRegime::Less => (2.0 - 2.0 * plan.nu0) * a_ty * powf(eps, plan.nu0) * powf(r, 1.0 - 2.0 * plan.nu0),
    }
}

/// I2 = -d_r psi (phi'_beta + lambda) r^{2n-1} at r = r_eps / 2, where psi = eps Phi - phi_beta.
pub fn gap_and_i2(star: &ProfileSolution, beta: &ProfileSolution, plan: &GluingPlan, inputs: &ModelInputs) -> Result<BoundaryTerm> {
    let c = beta.consts();
    if star.regime != Regime::Critical || beta.regime == Regime::Subcritical {
        return Err(err!(Regime, "I2 needs a critical reference and beta >= beta_*"));
    }
    if star.normalization != Normalization::A1Normalized || beta.normalization != Normalization::A1Normalized {
        return Err(err!(Domain, "I2 is defined on A1-normalized profiles"));
    }
    let r = plan.r_eps / 2.0;
    let u = plan.u_zone_outer;
    if let Some(ue) = beta.u_extinct() {
        if u >= ue {
            return Err(err!(Window, "r_eps / 2 lies beyond the extinction of the beta profile (u = {u:.6} >= {ue:.6})"));
        }
    }
    let pb = beta.sample_at_u(u)?;
    let ps = star.sample_at_u(u)?;
    let weight = (c.lambda - pb.t) * powf(r, 2.0 * c.nf() - 1.0);
    let tail = -tail_slope(plan, inputs.a_ty, r) * weight;
    let gap = -(2.0 / (c.beta_star * r)) * (ps.t - pb.t) * weight;
    Ok(BoundaryTerm { value: tail + gap, tail, gap, r, t_beta: pb.t, t_star: ps.t })
}

/// delta(r) = r^2 + (beta - beta_*) / r^{2n}.
pub fn error_envelope(plan: &GluingPlan) -> f64 {
    let r = plan.r_eps;
    r * r + plan.delta / powi(r, 2 * plan.n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaConstants {
    /// coefficient of the positive eps-power
    pub positive: f64,
    /// coefficient of beta - beta_*
    pub negative: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub eta: f64,
    pub epsilon: f64,
    pub j_value: f64,
    pub j_by_parts: f64,
    /// eps^{nu0} c_phi J
    pub j_part: f64,
    pub i2: BoundaryTerm,
    pub a_total: f64,
}

#[derive(Debug, Clone)]
pub struct ObstructionModel {
    pub consts: DerivedConstants,
    pub theta: f64,
    pub inputs: ModelInputs,
    pub regime: NuRegime,
    /// a_L of the A1-normalized expansion
    pub a_l: f64,
    pub kappa: KappaConstants,
    /// ratio passed to epsilon_beta
    pub kappa_ratio: f64,
    /// a_beta (nu0 < n) of the critical profile
    pub a_beta_star: Option<f64>,
    pub gauge_shift: f64,
    pub opts: PlanOptions,
    star: ProfileSolution,
    beta: ProfileSolution,
}

impl ObstructionModel {
    pub fn new(consts: &DerivedConstants, theta: f64, inputs: ModelInputs, margin: f64) -> Result<ObstructionModel> {
        inputs.validate()?;
        if consts.regime == Regime::Subcritical {
            return Err(err!(Regime, "obstruction needs beta >= beta_*"));
        }
        let grid = GridSpec::default();
        let star_c = consts.with_beta(BetaSpec::Exact(consts.geom.beta_star_exact()))?;
        let star = solve_profile(&star_c, grid, Normalization::A1Normalized)?;
        let (beta, gauge_shift) = if consts.regime == Regime::Critical {
            (star.clone(), 0.0)
        } else {
            let raw = solve_profile(consts, grid, Normalization::A1Normalized)?;
            gauge_fixed(&raw, &star, &FitWindow::default())?
        };
        let regime = classify(&consts.geom);
        let nf = consts.nf();
        let a_l = formula_coefficients(&star_c, 2, Normalization::A1Normalized)?.a_l;
        let lam = star_c.lambda;
        let negative = (2.0 * nf - 2.0) * lam * powi(4.0, consts.n - 1) * a_l;
        let mut a_beta_star = None;
        let positive = match regime {
            NuRegime::Greater => (2.0 * nf - 2.0) * lam * inputs.a_ty,
            NuRegime::Equal => inputs.c_phi * lam * (1.0 - theta) / star_c.beta_star + (nf - 1.0) * lam * inputs.a_ty * theta,
            NuRegime::Less => {
                let a = j_limit(&star)?;
                a_beta_star = Some(a);
                inputs.c_phi * a
            }
        };
        let ratio = abs(positive) / negative;
        let kappa = KappaConstants { positive, negative, ratio };
        let kappa_ratio = inputs.kappa_ratio.unwrap_or(ratio) * inputs.kappa_factor;
        let opts = PlanOptions { margin, kappa_ratio, sigma: None };
        Ok(ObstructionModel { consts: consts.clone(), theta, inputs, regime, a_l, kappa, kappa_ratio, a_beta_star, gauge_shift, opts, star, beta })
    }

    pub fn star(&self) -> &ProfileSolution {
        &self.star
    }

    /// The beta profile after removing the translation mode against the critical one.
    pub fn beta_profile(&self) -> &ProfileSolution {
        &self.beta
    }

    pub fn epsilon_beta(&self) -> Result<f64> {
        epsilon_beta(&self.consts, self.kappa_ratio)
    }

    pub fn plan(&self, eta: f64) -> Result<GluingPlan> {
        make_plan(&self.consts, self.theta, eta, &self.opts)
    }

    pub fn plan_at(&self, epsilon: f64) -> Result<GluingPlan> {
        plan_with_epsilon(&self.consts, epsilon, self.theta, &self.opts)
    }

    pub fn evaluate_plan(&self, plan: &GluingPlan, eta: f64) -> Result<Evaluation> {
        let (j_value, j_by_parts, j_part) = if self.consts.nu0.is_some() {
            let j = j_integral(&self.beta, plan)?;
            let jp = j_integral_by_parts(&self.beta, plan)?;
            (j, jp, powf(plan.epsilon, plan.nu0) * self.inputs.c_phi * j)
        } else {
            (0.0, 0.0, 0.0)
        };
        let i2 = gap_and_i2(&self.star, &self.beta, plan, &self.inputs)?;
        Ok(Evaluation { eta, epsilon: plan.epsilon, j_value, j_by_parts, j_part, i2, a_total: j_part + i2.value })
    }

    pub fn evaluate(&self, eta: f64) -> Result<Evaluation> {
        self.evaluate_plan(&self.plan(eta)?, eta)
    }

    pub fn evaluate_at(&self, epsilon: f64) -> Result<Evaluation> {
        self.evaluate_plan(&self.plan_at(epsilon)?, 0.0)
    }

    /// A(eta) without the J integral by parts.
    fn a_of(&self, eta: f64) -> Result<f64> {
        let plan = self.plan(eta)?;
        let j = if self.consts.nu0.is_some() {
            powf(plan.epsilon, plan.nu0) * self.inputs.c_phi * j_integral(&self.beta, &plan)?
        } else {
            0.0
        };
        Ok(j + gap_and_i2(&self.star, &self.beta, &plan, &self.inputs)?.value)
    }

    /// Half-width of the eta bracket: min(10 F, 0.45).
    pub fn eta_max(&self) -> Result<f64> {
        Ok((10.0 * self.plan(0.0)?.f_bound).min(0.45))
    }

    /// kappa in A = (beta - beta_*)(kappa eta + ...), by a central difference at eta = 0.
    pub fn fitted_kappa(&self, h: f64) -> Result<f64> {
        Ok((self.a_of(h)? - self.a_of(-h)?) / (2.0 * h * self.consts.delta))
    }

    /// Root of A(eta) on [-eta_max, eta_max].
    pub fn find_sign_change(&self) -> Result<f64> {
        let em = self.eta_max()?;
        let lo = self.a_of(-em)?;
        let hi = self.a_of(em)?;
        if !(lo * hi < 0.0) {
            return Err(err!(NoSignChange, "A(-{em:.3e}) = {lo:.6e} and A({em:.3e}) = {hi:.6e} share a sign"));
        }
        let mut failed = None;
        let root = bisect(
            |eta| match self.a_of(eta) {
                Ok(v) => v,
                Err(e) => {
                    failed = Some(e);
                    0.0
                }
            },
            -em,
            em,
            RootTol { x_rel: 0.0, x_abs: 1e-12, max_iter: 100 },
        )?;
        if let Some(e) = failed {
            return Err(e);
        }
        let a = self.a_of(root)?;
        if abs(a) >= 1e-3 * self.consts.delta {
            return Err(err!(Convergence, "|A(eta_root)| = {:e} not below 1e-3 (beta - beta_*)", abs(a)));
        }
        Ok(root)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionReport {
    pub regime: NuRegime,
    pub nu0: f64,
    pub delta: f64,
    pub theta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub epsilon_beta: Option<f64>,
    pub j_value: f64,
    pub j_by_parts: f64,
    pub i_normal: f64,
    pub i2_value: f64,
    pub i2_tail: f64,
    pub i2_gap: f64,
    pub a_total: f64,
    pub kappa: KappaConstants,
    pub kappa_ratio: f64,
    pub a_l: f64,
    /// a_beta (nu0 < n) or dJ/du_eps (nu0 = n)
    pub leading_constant: Option<f64>,
    pub fitted_kappa: Option<f64>,
    pub e_bound: f64,
    pub f_bound: f64,
    pub envelope: f64,
    pub eta_root: Option<f64>,
}

impl ObstructionModel {
    pub fn report(&self, eta: f64, with_root: bool) -> Result<ObstructionReport> {
        let plan = self.plan(eta)?;
        let ev = self.evaluate_plan(&plan, eta)?;
        let leading_constant = match self.regime {
            NuRegime::Less => Some(j_limit(&self.beta)?),
            NuRegime::Equal => {
                let p = self.beta.sample_at_u(j_upper(&plan))?;
                Some((self.consts.lambda - p.t) * exp(-self.consts.mu * p.phi))
            }
            NuRegime::Greater => None,
        };
        let eta_root = if with_root { Some(self.find_sign_change()?) } else { None };
        Ok(ObstructionReport {
            regime: self.regime,
            nu0: plan.nu0,
            delta: self.consts.delta,
            theta: self.theta,
            eta,
            epsilon: plan.epsilon,
            epsilon_beta: plan.epsilon_beta,
            j_value: ev.j_value,
            j_by_parts: ev.j_by_parts,
            i_normal: ev.j_part,
            i2_value: ev.i2.value,
            i2_tail: ev.i2.tail,
            i2_gap: ev.i2.gap,
            a_total: ev.a_total,
            kappa: self.kappa,
            kappa_ratio: self.kappa_ratio,
            a_l: self.a_l,
            leading_constant,
            fitted_kappa: Some(self.fitted_kappa(1e-3)?),
            e_bound: plan.e_bound,
            f_bound: plan.f_bound,
            envelope: error_envelope(&plan),
            eta_root,
        })
    }
}

pub fn model_obstruction(consts: &DerivedConstants, theta: f64, eta: f64, inputs: ModelInputs) -> Result<ObstructionReport> {
    ObstructionModel::new(consts, theta, inputs, PlanOptions::default().margin)?.report(eta, false)
}

pub fn find_sign_change(consts: &DerivedConstants, theta: f64, inputs: ModelInputs) -> Result<f64> {
    ObstructionModel::new(consts, theta, inputs, PlanOptions::default().margin)?.find_sign_change()
}
