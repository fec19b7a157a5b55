//! Geometric inputs and the constant table derived from (n, alpha, beta).

use crate::error::{err, Result};
use crate::math::powi;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = Ratio<i128>;

pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn q_to_f64(x: &Q) -> f64 {
    let n = *x.numer();
    let d = *x.denom();
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    }
}

fn big(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn big_pow(x: &BigRational, k: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..k {
        r *= x;
    }
    r
}

/// Back to 128-bit rationals, failing when the exact value does not fit.
fn small(x: BigRational) -> Result<Q> {
    match (x.numer().to_i128(), x.denom().to_i128()) {
        (Some(a), Some(b)) => Ok(Q::new(a, b)),
        _ => Err(err!(Domain, "exact constants exceed 128-bit rationals")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum J0 {
    Finite(u32),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryParams {
    pub n: u32,
    pub alpha: Q,
    pub j0: J0,
}

impl GeometryParams {
    pub fn new(n: u32, alpha: Q, j0: J0) -> Result<Self> {
        let g = GeometryParams { n, alpha, j0 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(err!(Domain, "n = {} must be at least 2", self.n));
        }
        if self.n > 1000 || self.alpha.numer().abs() > 1_000_000_000_000_000 || *self.alpha.denom() > 1_000_000_000_000_000 {
            return Err(err!(Domain, "n <= 1000 and alpha with numerator and denominator at most 1e15 are supported"));
        }
        if self.alpha <= Q::one()|| self.alpha >= Q::from_integer(self.n as i128 + 1) {
            return Err(err!(Domain, "alpha = {} must lie in (1, {})", self.alpha, self.n + 1));
        }
        if let J0::Finite(0) = self.j0 {
            return Err(err!(Domain, "j0 must be at least 1"));
        }
        Ok(())
    }

    pub fn beta_star_exact(&self) -> Q {
        (self.alpha - Q::one()) / Q::from_integer(self.n as i128)
    }

    pub fn alpha_f64(&self) -> f64 {
        q_to_f64(&self.alpha)
    }

    /// nu0 = n j0 / (alpha - 1); `None` when j0 is infinite.
    pub fn nu0_exact(&self) -> Option<Q> {
        match self.j0 {
            J0::Finite(j) => Some(Q::from_integer(j as i128 * self.n as i128) / (self.alpha - Q::one())),
            J0::Infinite => None,
        }
    }
}

/// How beta is supplied. `Offset` stores beta - beta_* directly, which keeps
/// C_beta accurate when the offset is far below machine epsilon relative to beta_*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Exact(Q),
    Value(f64),
    Offset(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Subcritical => "Subcritical",
            Regime::Critical => "Critical",
            Regime::Supercritical => "Supercritical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConstants {
    pub beta: Q,
    pub beta_star: Q,
    pub mu: Q,
    pub lambda: Q,
    pub a: Q,
    pub b: Q,
    pub c_beta: Q,
    pub a_n_alpha: Q,
    pub b_n_alpha: Q,
    pub nu0: Option<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub geom: GeometryParams,
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    /// beta - beta_*
    pub delta: f64,
    pub beta_star: f64,
    pub mu: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c_beta: f64,
    pub a_n_alpha: f64,
    pub b_n_alpha: f64,
    /// `None` encodes j0 = infinity.
    pub nu0: Option<f64>,
    pub regime: Regime,
    pub exact: Option<ExactConstants>,
}

pub fn derive(geom: &GeometryParams, beta: BetaSpec) -> Result<DerivedConstants> {
    geom.validate()?;
    let n = geom.n;
    let nq = Q::from_integer(n as i128);
    let alpha_q = geom.alpha;
    let bs_q = geom.beta_star_exact();
    let alpha = q_to_f64(&alpha_q);
    let beta_star = q_to_f64(&bs_q);
    let a_n_alpha_big = BigRational::from_integer(BigInt::from(1u8) << (n - 1)) * big(&nq) / big_pow(&big(&(alpha_q - Q::one())), n - 1);
    let b_n_alpha_big = big_pow(&big(&bs_q), n + 1) * &a_n_alpha_big;
    let a_n_alpha_q = small(a_n_alpha_big)?;
    let b_n_alpha_q = small(b_n_alpha_big)?;

    let (beta_f, delta, exact_beta) = match beta {
        BetaSpec::Exact(b) => (q_to_f64(&b), q_to_f64(&(b - bs_q)), Some(b)),
        BetaSpec::Value(v) => (v, v - beta_star, None),
        BetaSpec::Offset(d) => (beta_star + d, d, None),
    };
    if !(beta_f > 0.0 && beta_f < 1.0) || !delta.is_finite() {
        return Err(err!(Domain, "beta = {beta_f} must lie in (0, 1)"));
    }
    if let Some(b) = exact_beta {
        if b <= Q::zero() || b >= Q::one() {
            return Err(err!(Domain, "beta = {b} must lie in (0, 1)"));
        }
    }

    let regime = match (beta, exact_beta) {
        (_, Some(b)) => {
            let d = b - bs_q;
            if d.is_zero() {
                Regime::Critical
            } else if d.is_positive() {
                Regime::Supercritical
            } else {
                Regime::Subcritical
            }
        }
        (BetaSpec::Offset(d), _) => {
            if d == 0.0 {
                Regime::Critical
            } else if d > 0.0 {
                Regime::Supercritical
            } else {
                Regime::Subcritical
            }
        }
        _ => {
            if delta.abs() <= 1e-14 {
                Regime::Critical
            } else if delta > 0.0 {
                Regime::Supercritical
            } else {
                Regime::Subcritical
            }
        }
    };
    // an exactly critical float input is snapped so C_beta vanishes
    let delta = if regime == Regime::Critical { 0.0 } else { delta };
    let beta_f = if regime == Regime::Critical { beta_star } else { beta_f };

    let mu = (alpha + beta_f - 1.0) / alpha;
    let lambda = (alpha - 1.0) / mu;
    let c_beta = powi(alpha, n) * delta / (n as f64 + 1.0);

    let exact = match exact_beta {
        None => None,
        Some(b) => {
            let (al, bb, bs, nb) = (big(&alpha_q), big(&b), big(&bs_q), big(&nq));
            let one = BigRational::one();
            let mu_b = (&al + &bb - &one) / &al;
            let mu_q = small(mu_b.clone())?;
            Some(ExactConstants {
                beta: b,
                beta_star: bs_q,
                mu: mu_q,
                lambda: small((&al - &one) / &mu_b)?,
                a: small(&mu_b / (&nb + &one))?,
                b: bs_q,
                c_beta: small(big_pow(&al, n) * (&bb - &bs) / (&nb + &one))?,
                a_n_alpha: a_n_alpha_q,
                b_n_alpha: b_n_alpha_q,
                nu0: geom.nu0_exact(),
            })
        }
    };
    let (mu, lambda, a, c_beta) = match &exact {
        Some(e) => (q_to_f64(&e.mu), q_to_f64(&e.lambda), q_to_f64(&e.a), q_to_f64(&e.c_beta)),
        None => (mu, lambda, mu / (n as f64 + 1.0), c_beta),
    };

    Ok(DerivedConstants {
        geom: geom.clone(),
        n,
        alpha,
        beta: beta_f,
        delta,
        beta_star,
        mu,
        lambda,
        a,
        b: beta_star,
        c_beta,
        a_n_alpha: q_to_f64(&a_n_alpha_q),
        b_n_alpha: q_to_f64(&b_n_alpha_q),
        nu0: geom.nu0_exact().map(|v| q_to_f64(&v)),
        regime,
        exact,
    })
}

pub fn regime(consts: &DerivedConstants) -> Regime {
    consts.regime
}

impl DerivedConstants {
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// F(t) = t^n (b - a t)
    pub fn f(&self, t: f64) -> f64 {
        powi(t, self.n) * (self.b - self.a * t)
    }

    /// F'(t) = mu t^{n-1} (lambda - t)
    pub fn df(&self, t: f64) -> f64 {
        self.mu * powi(t, self.n - 1) * (self.lambda - t)
    }

    /// F(lambda) = beta_* lambda^n / (n+1)
    pub fn f_lambda(&self) -> f64 {
        self.beta_star * powi(self.lambda, self.n) / (self.nf() + 1.0)
    }

    /// Same parameters with another beta.
    pub fn with_beta(&self, beta: BetaSpec) -> Result<DerivedConstants> {
        derive(&self.geom, beta)
    }
}
