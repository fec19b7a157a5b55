//! Radial profile in the moment-map parametrization t = -phi'.
//!
//! Along t in (t_min, alpha): e^{mu psi} = F(t) + C_beta, dphi/dt = t^n / (F + C),
//! du/dt = -t^{n-1} / (F + C) and V = phi'' = (F + C) / t^{n-1}.
//! Each point is addressed by an offset variable that stays accurate at its end:
//! d = t - t_min below the nexus and w = alpha - t above it, both integrated in log scale.

use crate::error::{err, Result};
use crate::math::{abs, binomial, ceil, exp, ln, powi};
use crate::params::{DerivedConstants, Regime};
use crate::quad::{integrate, Tolerance};
use crate::roots::{newton, RootTol};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    A1Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    G1,
    G2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// offset d = t - t_min, used for t <= lambda
    Zero,
    /// offset w = alpha - t, used for t >= lambda
    D,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub ratio: f64,
    /// smallest d as a fraction of lambda - t_min
    pub d_floor: f64,
    /// smallest w as a fraction of alpha - lambda
    pub w_floor: f64,
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { ratio: 1.05, d_floor: 1e-10, w_floor: 1e-12, tol: 1e-12 }
    }
}

impl GridSpec {
    pub fn resolution(&self) -> usize {
        let l = ln(self.ratio);
        (ceil(-ln(self.d_floor) / l) + ceil(-ln(self.w_floor) / l)) as usize + 1
    }
}

/// The structure function and its stable evaluations.
#[derive(Debug, Clone)]
pub struct Model {
    pub consts: DerivedConstants,
    pub t_min: f64,
    /// Taylor coefficients of F(t_min + d) - F(t_min) in d (index k holds d^k)
    shifted: Vec<f64>,
    tol: Tolerance,
}

pub fn eval_f(consts: &DerivedConstants, t: f64) -> f64 {
    consts.f(t)
}

pub fn invert_f(consts: &DerivedConstants, branch: Branch, s: f64) -> Result<f64> {
    let c = consts;
    let f_lam = c.f_lambda();
    let (lo, hi, smin) = match branch {
        Branch::G1 => (0.0, c.lambda, 0.0),
        Branch::G2 => (c.lambda, c.alpha, -c.c_beta),
    };
    let slack = 1e-12 * (1.0 + abs(f_lam));
    if s < smin - slack || s > f_lam + slack {
        return Err(err!(Range, "s = {s} outside the {:?} range [{smin}, {f_lam}]", branch));
    }
    if s >= f_lam {
        return Ok(c.lambda);
    }
    if branch == Branch::G1 && s <= 0.0 {
        return Ok(0.0);
    }
    if branch == Branch::G2 && s <= -c.c_beta {
        return Ok(c.alpha);
    }
    newton(|t| (c.f(t) - s, c.df(t)), lo, hi, RootTol::default())
}

/// gamma = G1(-C_beta), the lower end of the subcritical profile.
pub fn subcritical_gamma(consts: &DerivedConstants) -> Result<f64> {
    if consts.regime != Regime::Subcritical {
        return Err(err!(Regime, "gamma is defined only for beta < beta_*"));
    }
    let c = consts;
    newton(|t| (c.f(t) + c.c_beta, c.df(t)), 0.0, c.lambda, RootTol::default())
}

/// psi''(u0) = -e^{mu psi0} / lambda^{n-1}; psi has its maximum at the nexus.
pub fn nexus_second_derivative(consts: &DerivedConstants) -> f64 {
    -(consts.f_lambda() + consts.c_beta) / powi(consts.lambda, consts.n - 1)
}

/// psi0 = mu^{-1} log(F(lambda) + C_beta)
pub fn nexus_psi(consts: &DerivedConstants) -> f64 {
    ln(consts.f_lambda() + consts.c_beta) / consts.mu
}

impl Model {
    pub fn new(consts: &DerivedConstants, tol: f64) -> Result<Model> {
        let t_min = match consts.regime {
            Regime::Subcritical => subcritical_gamma(consts)?,
            _ => 0.0,
        };
        let n = consts.n;
        let mut shifted = alloc::vec![0.0; n as usize + 2];
        for k in 1..=n + 1 {
            shifted[k as usize] = consts.b * binomial(n, k) * powi(t_min, n.saturating_sub(k))
                * if k <= n { 1.0 } else { 0.0 }
                - consts.a * binomial(n + 1, k) * powi(t_min, n + 1 - k);
        }
        Ok(Model { consts: consts.clone(), t_min, shifted, tol: Tolerance::rel(tol) })
    }

    fn n(&self) -> u32 {
        self.consts.n
    }

    /// K(t) = (F(t) + C_beta) / (alpha - t)
    pub fn k_of(&self, t: f64) -> f64 {
        let c = &self.consts;
        let n = self.n();
        let mut sum = 0.0;
        let mut tk = 1.0;
        for k in 0..=n {
            sum += tk * powi(c.alpha, n - k);
            tk *= t;
        }
        (c.beta_star * powi(t, n) + c.delta / (c.nf() + 1.0) * sum) / c.alpha
    }

    /// F + C_beta at t = alpha - w
    pub fn h_w(&self, w: f64) -> f64 {
        w * self.k_of(self.consts.alpha - w)
    }

    /// (F + C_beta) / d at t = t_min + d
    pub fn h_over_d(&self, d: f64) -> f64 {
        if self.consts.regime == Regime::Subcritical {
            let mut acc = 0.0;
            for k in (1..self.shifted.len()).rev() {
                acc = acc * d + self.shifted[k];
            }
            acc
        } else {
            let c = &self.consts;
            powi(d, c.n - 1) * (c.b - c.a * d) + c.c_beta / d
        }
    }

    /// F + C_beta at t = t_min + d
    pub fn h_d(&self, d: f64) -> f64 {
        if self.consts.regime == Regime::Subcritical {
            d * self.h_over_d(d)
        } else {
            let c = &self.consts;
            powi(d, c.n) * (c.b - c.a * d) + c.c_beta
        }
    }

    /// Stable F + C_beta at a point given by t and both offsets.
    pub fn h_at(&self, t: f64, w: f64, d: f64) -> f64 {
        if t >= self.consts.lambda {
            self.h_w(w)
        } else {
            self.h_d(d)
        }
    }

    pub fn t_of(&self, side: Side, x: f64) -> f64 {
        match side {
            Side::D => self.consts.alpha - exp(x),
            Side::Zero => self.t_min + exp(x),
        }
    }

    /// (dphi/dx, du/dx) with x the log of the side's offset.
    pub fn integrands(&self, side: Side, x: f64) -> (f64, f64) {
        let n = self.n();
        let off = exp(x);
        match side {
            Side::D => {
                let t = self.consts.alpha - off;
                let k = self.k_of(t);
                (-powi(t, n) / k, powi(t, n - 1) / k)
            }
            Side::Zero => {
                let t = self.t_min + off;
                let hd = self.h_over_d(off);
                (powi(t, n) / hd, -powi(t, n - 1) / hd)
            }
        }
    }

    pub fn phi_increment(&self, side: Side, x1: f64, x2: f64) -> Result<f64> {
        Ok(integrate(|x| self.integrands(side, x).0, x1, x2, self.tol)?.value)
    }

    pub fn u_increment(&self, side: Side, x1: f64, x2: f64) -> Result<f64> {
        Ok(integrate(|x| self.integrands(side, x).1, x1, x2, self.tol)?.value)
    }

    /// Lower integration limit standing in for d -> 0 on the zero side.
    fn x_floor(&self, x1: f64) -> f64 {
        let c = &self.consts;
        let anchor = if c.c_beta > 0.0 { ln(c.c_beta) / c.nf() } else { x1 };
        anchor.min(x1) - 40.0
    }

    /// int_{t_min}^{t_min + e^x} (integrand) on the zero side; Critical/Supercritical only.
    pub fn zero_side_from_origin(&self, x: f64) -> Result<(f64, f64)> {
        let lo = self.x_floor(x);
        let phi = self.phi_increment(Side::Zero, lo, x)?;
        let u = self.u_increment(Side::Zero, lo, x)?;
        Ok((phi, u))
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    s: f64,
    c: f64,
}

impl Acc {
    fn new(v: f64) -> Acc {
        Acc { s: v, c: 0.0 }
    }
    fn add(&mut self, v: f64) {
        let t = self.s + v;
        if abs(self.s) >= abs(v) {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    side: Side,
    x: f64,
    t: f64,
    w: f64,
    d: f64,
    phi: f64,
    u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub u: f64,
    pub phi: f64,
    pub psi: f64,
    /// V = phi''
    pub v: f64,
    /// F(t) + C_beta evaluated stably
    pub h: f64,
    /// alpha - t
    pub w: f64,
    /// t - t_min
    pub d: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub model: Model,
    pub regime: Regime,
    pub normalization: Normalization,
    /// output u = raw u + u_shift
    pub u_shift: f64,
    /// output phi = raw phi + phi_shift
    pub phi_shift: f64,
    nodes: Vec<Node>,
    u0_raw: f64,
    u_extinct_raw: Option<f64>,
}

/// u-translation applied by A1Normalized: (1 + 1/n) log(b) / b.
pub fn a1_shift(consts: &DerivedConstants) -> f64 {
    (1.0 + 1.0 / consts.nf()) * ln(consts.b) / consts.b
}

fn geometric(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let steps = (ceil(ln(hi / lo) / ln(ratio)) as usize).max(1);
    (0..=steps).map(|i| hi * exp(ln(lo / hi) * i as f64 / steps as f64)).collect()
}

pub fn solve_profile(consts: &DerivedConstants, grid: GridSpec, normalization: Normalization) -> Result<ProfileSolution> {
    if grid.resolution() < 64 {
        return Err(err!(Domain, "grid resolution {} below 64", grid.resolution()));
    }
    if !(grid.ratio > 1.0) || !(grid.d_floor > 0.0 && grid.d_floor < 1.0) || !(grid.w_floor > 0.0 && grid.w_floor < 1.0) {
        return Err(err!(Domain, "invalid grid specification"));
    }
    let model = Model::new(consts, grid.tol)?;
    let c = &model.consts;
    let lam = c.lambda;
    let t_min = model.t_min;
    let d_top = lam - t_min;
    let w_top = c.alpha - lam;
    if d_top <= 0.0 {
        return Err(err!(Regime, "degenerate profile: t_min = {t_min} reaches lambda"));
    }

    // zero side, from the nexus downward
    // below d ~ 1e-3 (C/b)^{1/n} the supercritical u has saturated at u_beta
    let mut d_lo = d_top * grid.d_floor;
    if c.regime == Regime::Supercritical {
        d_lo = d_lo.max(1e-3 * crate::math::powf(c.c_beta / c.b, 1.0 / c.nf()));
    }
    let ds = geometric(d_lo.min(0.5 * d_top), d_top, grid.ratio);
    let ws = geometric(w_top * grid.w_floor, w_top, grid.ratio);

    let mut zero: Vec<Node> = ds
        .iter()
        .map(|&d| {
            let t = if d == d_top { lam } else { t_min + d };
            Node { side: Side::Zero, x: ln(d), t, w: c.alpha - t, d, phi: 0.0, u: 0.0 }
        })
        .collect();
    let mut dside: Vec<Node> = ws
        .iter()
        .map(|&w0| {
            let t = if w0 == w_top { lam } else { c.alpha - w0 };
            let w = if w0 == w_top { w_top } else { c.alpha - t };
            Node { side: Side::D, x: ln(w), t, w, d: t - t_min, phi: 0.0, u: 0.0 }
        })
        .collect();

    // phi along the zero side
    let phi_lam = if c.regime == Regime::Subcritical {
        0.0
    } else {
        let last = zero.len() - 1;
        let (p0, _) = model.zero_side_from_origin(zero[last].x)?;
        let mut acc = Acc::new(p0);
        zero[last].phi = acc.value();
        for i in (0..last).rev() {
            acc.add(model.phi_increment(Side::Zero, zero[i + 1].x, zero[i].x)?);
            zero[i].phi = acc.value();
        }
        zero[0].phi
    };
    if c.regime == Regime::Subcritical {
        let mut acc = Acc::new(0.0);
        zero[0].phi = 0.0;
        for i in 1..zero.len() {
            acc.add(model.phi_increment(Side::Zero, zero[i - 1].x, zero[i].x)?);
            zero[i].phi = acc.value();
        }
    }
    // phi along the D side
    {
        let mut acc = Acc::new(phi_lam);
        dside[0].phi = phi_lam;
        for i in 1..dside.len() {
            acc.add(model.phi_increment(Side::D, dside[i - 1].x, dside[i].x)?);
            dside[i].phi = acc.value();
        }
    }
    // u anchored through psi = -phi - lambda u at the nexus
    let psi0 = nexus_psi(c);
    let u0 = -(phi_lam + psi0) / lam;
    for (nodes, side) in [(&mut zero, Side::Zero), (&mut dside, Side::D)] {
        let mut acc = Acc::new(u0);
        nodes[0].u = u0;
        for i in 1..nodes.len() {
            acc.add(model.u_increment(side, nodes[i - 1].x, nodes[i].x)?);
            nodes[i].u = acc.value();
        }
    }

    // order by decreasing t
    let mut nodes: Vec<Node> = dside.into_iter().rev().collect();
    nodes.extend(zero.into_iter().skip(1));

    let u_extinct_raw = if c.regime == Regime::Supercritical {
        let last = nodes[nodes.len() - 1];
        let (_, du) = model.zero_side_from_origin(last.x)?;
        Some(last.u - du)
    } else {
        None
    };

    let mut sol = ProfileSolution {
        regime: c.regime,
        model,
        normalization: Normalization::Raw,
        u_shift: 0.0,
        phi_shift: 0.0,
        nodes,
        u0_raw: u0,
        u_extinct_raw,
    };
    if normalization == Normalization::A1Normalized {
        sol.normalization = Normalization::A1Normalized;
        sol.u_shift = a1_shift(&sol.model.consts);
    }
    Ok(sol)
}

/// Extinction time of the supercritical profile from an independent t-quadrature:
/// u_beta = u(lambda) + int_0^lambda t^{n-1} / (F + C_beta) dt.
pub fn extinction_time(consts: &DerivedConstants) -> Result<f64> {
    if consts.regime != Regime::Supercritical {
        return Err(err!(Regime, "extinction time is finite only for beta > beta_*"));
    }
    let model = Model::new(consts, 1e-12)?;
    let (phi_lam, du) = model.zero_side_from_origin(ln(consts.lambda))?;
    let u0 = -(phi_lam + nexus_psi(consts)) / consts.lambda;
    Ok(u0 - du)
}

impl ProfileSolution {
    pub fn consts(&self) -> &DerivedConstants {
        &self.model.consts
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn out(&self, n: &Node) -> ProfileSample {
        let c = &self.model.consts;
        let u = n.u + self.u_shift;
        let phi = n.phi + self.phi_shift;
        let h = self.model.h_at(n.t, n.w, n.d);
        ProfileSample { t: n.t, u, phi, psi: -phi - c.lambda * u, v: h / powi(n.t, c.n - 1), h, w: n.w, d: n.d }
    }

    /// Samples ordered by decreasing t (increasing u).
    pub fn samples(&self) -> Vec<ProfileSample> {
        self.nodes.iter().map(|n| self.out(n)).collect()
    }

    /// Factor k with t^{n-1} V = k e^{-mu phi - (alpha-1) u} in output coordinates.
    pub fn ma_factor(&self) -> f64 {
        let c = &self.model.consts;
        exp(c.mu * self.phi_shift + (c.alpha - 1.0) * self.u_shift)
    }

    pub fn u0(&self) -> f64 {
        self.u0_raw + self.u_shift
    }

    pub fn psi0(&self) -> f64 {
        nexus_psi(&self.model.consts) - (self.phi_shift + self.model.consts.lambda * self.u_shift)
    }

    pub fn u_extinct(&self) -> Option<f64> {
        self.u_extinct_raw.map(|v| v + self.u_shift)
    }

    pub fn u_range(&self) -> (f64, f64) {
        let lo = f64::NEG_INFINITY;
        let hi = self.u_extinct().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// The exact symmetry phi(u) -> phi(u - s) - lambda s of the equation.
    pub fn translated(&self, s: f64) -> ProfileSolution {
        let mut out = self.clone();
        out.u_shift += s;
        out.phi_shift -= self.model.consts.lambda * s;
        out
    }

    fn node_at(&self, side: Side, x: f64, from: &Node) -> Result<Node> {
        let m = &self.model;
        let t = m.t_of(side, x);
        let off = exp(x);
        let (w, d) = match side {
            Side::D => (off, t - m.t_min),
            Side::Zero => (m.consts.alpha - t, off),
        };
        let phi = from.phi + m.phi_increment(side, from.x, x)?;
        let u = from.u + m.u_increment(side, from.x, x)?;
        Ok(Node { side, x, t, w, d, phi, u })
    }

    /// Profile values at an output-coordinate u.
    pub fn sample_at_u(&self, u: f64) -> Result<ProfileSample> {
        let target = u - self.u_shift;
        if !target.is_finite() {
            return Err(err!(Range, "u = {u} is not finite"));
        }
        if let Some(ue) = self.u_extinct_raw {
            if target >= ue {
                return Err(err!(Range, "u = {u} beyond the extinction time {}", ue + self.u_shift));
            }
        }
        let first = self.nodes[0];
        let last = self.nodes[self.nodes.len() - 1];
        let (side, anchor, xa, xb) = if target <= first.u {
            let (xa, _) = self.extend(first, target, Side::D)?;
            (Side::D, first, xa, first.x)
        } else if target >= last.u {
            let (xa, _) = self.extend(last, target, Side::Zero)?;
            (Side::Zero, last, xa, last.x)
        } else {
            let i = self.nodes.partition_point(|n| n.u <= target);
            let (a, b) = (self.nodes[i - 1], self.nodes[i]);
            if a.u == target {
                return Ok(self.out(&a));
            }
            // a and b share a side except across the nexus, where the nexus node belongs to both
            let side = if b.side == a.side { a.side } else { Side::Zero };
            let (na, nb) = if side == Side::Zero {
                (if a.side == Side::D { self.nexus_as_zero(&a) } else { a }, b)
            } else {
                (a, b)
            };
            (side, na, na.x.min(nb.x), na.x.max(nb.x))
        };
        let m = &self.model;
        let x = newton(
            |x| {
                let du = m.u_increment(side, anchor.x, x).unwrap_or(f64::NAN);
                (anchor.u + du - target, m.integrands(side, x).1)
            },
            xa,
            xb,
            RootTol { x_rel: 0.0, x_abs: 1e-14, max_iter: 200 },
        )?;
        let node = self.node_at(side, x, &anchor)?;
        if abs(node.u - target) > 1e-10 * (1.0 + abs(target)) {
            return Err(err!(Convergence, "inversion at u = {u} missed by {:e}", node.u - target));
        }
        Ok(self.out(&node))
    }

    fn nexus_as_zero(&self, n: &Node) -> Node {
        let d = self.model.consts.lambda - self.model.t_min;
        Node { side: Side::Zero, x: ln(d), d, ..*n }
    }

    /// Walks outward in x from `from` until u passes `target`; returns the far x.
    fn extend(&self, from: Node, target: f64, side: Side) -> Result<(f64, f64)> {
        let mut x = from.x;
        let mut u = from.u;
        let m = &self.model;
        for _ in 0..200 {
            let nx = x - 4.0;
            if nx < -700.0 {
                break;
            }
            let nu = u + m.u_increment(side, x, nx)?;
            let passed = match side {
                Side::D => nu <= target,
                Side::Zero => nu >= target,
            };
            x = nx;
            u = nu;
            if passed {
                return Ok((x, u));
            }
        }
        Err(err!(Range, "u = {} outside the profile's reach", target + self.u_shift))
    }

    /// Values where the side's offset (alpha - t or t - t_min) equals e^x.
    pub fn sample_at_offset(&self, side: Side, x: f64) -> Result<ProfileSample> {
        if !x.is_finite() {
            return Err(err!(Range, "offset exponent {x} is not finite"));
        }
        let c = &self.model.consts;
        let top = match side {
            Side::D => c.alpha - c.lambda,
            Side::Zero => c.lambda - self.model.t_min,
        };
        if x > ln(top) + 1e-15 {
            return Err(err!(Range, "offset e^{x} beyond the nexus"));
        }
        let anchor = self
            .nodes
            .iter()
            .filter_map(|n| match (n.side, side) {
                (a, b) if a == b => Some(*n),
                (Side::D, Side::Zero) if n.t == c.lambda => Some(self.nexus_as_zero(n)),
                _ => None,
            })
            .min_by(|a, b| abs(a.x - x).total_cmp(&abs(b.x - x)))
            .ok_or_else(|| err!(Range, "no node on the requested side"))?;
        let node = self.node_at(side, x, &anchor)?;
        Ok(self.out(&node))
    }

    /// Values at a given t (output coordinates).
    pub fn sample_at_t(&self, t: f64) -> Result<ProfileSample> {
        let m = &self.model;
        let c = &m.consts;
        if !(t > m.t_min && t < c.alpha) {
            return Err(err!(Range, "t = {t} outside ({}, {})", m.t_min, c.alpha));
        }
        let (side, x) = if t >= c.lambda { (Side::D, ln(c.alpha - t)) } else { (Side::Zero, ln(t - m.t_min)) };
        let i = self.nodes.partition_point(|n| n.t > t);
        let anchor = if i < self.nodes.len() { self.nodes[i] } else { self.nodes[self.nodes.len() - 1] };
        let anchor = if anchor.side != side { self.nexus_as_zero(&anchor) } else { anchor };
        let node = self.node_at(side, x, &anchor)?;
        Ok(self.out(&node))
    }
}
