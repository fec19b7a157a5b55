//! Subcommand bodies. Each writes its files under the output directory and
//! reports the written paths on `out`.

use crate::config::{RunConfig, Tolerances};
use crate::error::{CoreResult, InputError, EXIT_OK};
use crate::output::{ensure_dir, fmt_f, num, nums, opt, rational, write_csv, write_json, Table};
use anyhow::Result;
use calabi_core::asymptotics::{fit_derivative_expansions, fit_expansion, gauge_fixed, rho_scale, FitWindow};
use calabi_core::gluing::{classify, cutoff_chi, make_plan, nu0, regime_law, GluingPlan, PlanOptions};
use calabi_core::metric::{
    cone_angle_at_d, cone_angle_at_infinity, cone_comparison, futaki_rigidity_check, g1_linearization, potential_v,
    small_beta_collapse, BarrierSpec,
};
use calabi_core::obstruction::{ModelInputs, ObstructionModel, ObstructionReport};
use calabi_core::params::{derive, BetaSpec, DerivedConstants, GeometryParams, Regime, J0};
use calabi_core::profile::{solve_profile, GridSpec, Normalization, ProfileSolution};
use calabi_core::residuals::profile_residuals;
use serde_json::{json, Value};
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn norm_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Raw => "raw",
        Normalization::A1Normalized => "a1",
    }
}

pub fn geometry_json(g: &GeometryParams) -> Value {
    json!({
        "n": g.n,
        "alpha": rational(&g.alpha),
        "j0": match g.j0 { J0::Finite(k) => json!(k), J0::Infinite => json!("infinity") },
    })
}

pub fn beta_json(b: &BetaSpec) -> Value {
    match b {
        BetaSpec::Exact(q) => rational(q),
        BetaSpec::Offset(d) => json!({ "offset": num(*d) }),
        BetaSpec::Value(v) => json!({ "value": num(*v) }),
    }
}

pub fn tolerances_json(t: &Tolerances) -> Value {
    json!({
        "monge_ampere": num(t.monge_ampere),
        "first_integral": num(t.first_integral),
        "eigen": num(t.eigen),
        "branch": num(t.branch),
        "closed_form": num(t.closed_form),
        "cone_d": num(t.cone_d),
        "far_cone": num(t.far_cone),
        "green": num(t.green),
        "linearization": num(t.linearization),
        "extinction_k": num(t.extinction_k),
    })
}

/// Echo of the resolved configuration; the output directory is left out so
/// the bytes do not depend on where they are written.
pub fn config_json(cfg: &RunConfig) -> Value {
    json!({
        "geometry": geometry_json(&cfg.geometry),
        "beta": beta_json(&cfg.beta),
        "theta": num(cfg.theta),
        "eta": num(cfg.eta),
        "margin": num(cfg.margin),
    })
}

pub fn constants_json(c: &DerivedConstants) -> Value {
    let exact = c.exact.as_ref().map(|e| {
        json!({
            "beta": rational(&e.beta),
            "beta_star": rational(&e.beta_star),
            "mu": rational(&e.mu),
            "lambda": rational(&e.lambda),
            "a": rational(&e.a),
            "b": rational(&e.b),
            "c_beta": rational(&e.c_beta),
        })
    });
    json!({
        "n": c.n,
        "alpha": num(c.alpha),
        "beta": num(c.beta),
        "delta": num(c.delta),
        "beta_star": num(c.beta_star),
        "mu": num(c.mu),
        "lambda": num(c.lambda),
        "a": num(c.a),
        "b": num(c.b),
        "c_beta": num(c.c_beta),
        "nu0": opt(c.nu0),
        "regime": c.regime.name(),
        "exact": exact.unwrap_or(Value::Null),
    })
}

fn header(command: &str, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(VERSION));
    m.insert("config".into(), config_json(cfg));
    m
}

/// Writes `<stem>.csv` and/or `<stem>.json` as the format asks.
pub fn emit(cfg: &RunConfig, dir: &Path, stem: &str, table: &Table, meta: Value, out: &mut dyn Write) -> Result<()> {
    ensure_dir(dir)?;
    if cfg.format.csv() {
        let p = dir.join(format!("{stem}.csv"));
        write_csv(&p, table)?;
        writeln!(out, "wrote {}", p.display())?;
    }
    if cfg.format.json() {
        let p = dir.join(format!("{stem}.json"));
        write_json(&p, &meta)?;
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

pub fn profile_table(sol: &ProfileSolution) -> Table {
    let mut t = Table::new(&["t", "u", "phi", "psi", "V"]);
    for p in sol.samples() {
        t.push_f(&[p.t, p.u, p.phi, p.psi, p.v]);
    }
    t
}

pub fn profile_meta(sol: &ProfileSolution, grid: &GridSpec) -> Value {
    json!({
        "regime": sol.regime.name(),
        "normalization": norm_name(sol.normalization),
        "constants": constants_json(sol.consts()),
        "anchors": {
            "u0": num(sol.u0()),
            "psi0": num(sol.psi0()),
            "u_extinct": opt(sol.u_extinct()),
            "u_shift": num(sol.u_shift),
            "phi_shift": num(sol.phi_shift),
            "t_min": num(sol.model.t_min),
        },
        "grid": {
            "ratio": num(grid.ratio),
            "d_floor": num(grid.d_floor),
            "w_floor": num(grid.w_floor),
            "tol": num(grid.tol),
        },
        "samples": sol.len(),
    })
}

pub fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let c = derive(&cfg.geometry, cfg.beta).core()?;
    let grid = GridSpec::default();
    let sol = solve_profile(&c, grid, cfg.normalization.unwrap_or(Normalization::Raw)).core()?;
    let mut meta = header("solve", cfg);
    meta.insert("profile".into(), profile_meta(&sol, &grid));
    meta.insert("tolerances".into(), tolerances_json(&cfg.tolerances));
    emit(cfg, &cfg.output_dir, "profile", &profile_table(&sol), Value::Object(meta), out)?;
    Ok(EXIT_OK)
}

fn critical(c: &DerivedConstants) -> Result<DerivedConstants> {
    c.with_beta(BetaSpec::Exact(c.geom.beta_star_exact())).core()
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| lo * (hi / lo).powf(i as f64 / m as f64)).collect()
}

pub fn expand(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let c = derive(&cfg.geometry, cfg.beta).core()?;
    let norm = cfg.normalization.unwrap_or(Normalization::A1Normalized);
    let grid = GridSpec::default();
    let star = solve_profile(&critical(&c)?, grid, norm).core()?;
    let beta = solve_profile(&c, grid, norm).core()?;
    let w = FitWindow::default();
    let rep = fit_expansion(&beta, &star, &w).core()?;
    let der = fit_derivative_expansions(&beta, &star, &w).core()?;
    let (gf, shift) = gauge_fixed(&beta, &star, &w).core()?;
    let sc = rho_scale(&c, norm);
    let mut table = Table::new(&["r", "diff", "model"]);
    for r in geometric(rep.r_lo, rep.r_hi, w.points) {
        let x = r * r / 4.0;
        let p = x / sc;
        let u = -(x / sc).ln() / c.beta_star;
        let d = gf.sample_at_u(u).core()?.phi - star.sample_at_u(u).core()?.phi;
        table.push_f(&[2.0 * p.sqrt(), d, rep.fitted_a_l * c.delta * p.powi(1 - c.n as i32)]);
    }
    let mut meta = header("expand", cfg);
    meta.insert(
        "expansion".into(),
        json!({
            "normalization": norm_name(norm),
            "formula_a": nums(&rep.formula.a),
            "formula_a_l": num(rep.formula.a_l),
            "fitted_a": nums(&rep.fitted_a),
            "poly_residual": num(rep.poly_residual),
            "fitted_a_l": num(rep.fitted_a_l),
            "a_l_ratio": num(if rep.formula.a_l != 0.0 && c.delta > 0.0 { rep.fitted_a_l / rep.formula.a_l } else { f64::NAN }),
            "gauge": num(rep.gauge),
            "gauge_shift": num(shift),
            "green_residual": num(rep.green_residual),
            "r_lo": num(rep.r_lo),
            "r_hi": num(rep.r_hi),
            "min_corrected_diff": num(rep.min_corrected_diff),
        }),
    );
    meta.insert(
        "derivatives".into(),
        json!({
            "poly_slope": num(der.poly_slope),
            "poly_second": num(der.poly_second),
            "expected_a1": num(der.expected_a1),
            "green_exponent": num(der.green_exponent),
            "green_sign": num(der.green_sign),
            "green_ratio": num(der.green_ratio),
            "metric_k": num(der.metric_k),
        }),
    );
    emit(cfg, &cfg.output_dir, "expansion", &table, Value::Object(meta), out)?;
    Ok(EXIT_OK)
}

fn plan_options(cfg: &RunConfig) -> PlanOptions {
    PlanOptions { margin: cfg.margin, ..PlanOptions::default() }
}

/// s-window of the gluing zone rho in [r_eps/2, 2 r_eps], using rho^2 = (4/beta_*) s.
pub fn gluing_zone_s(plan: &GluingPlan) -> (f64, f64) {
    let r2 = plan.r_eps * plan.r_eps;
    (plan.beta_star * r2 / 16.0, plan.beta_star * r2)
}

fn err_json(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

pub fn metric(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let c = derive(&cfg.geometry, cfg.beta).core()?;
    let star = critical(&c)?;
    let mut table = Table::new(&["s", "V", "ds2", "eta2", "dv_dbeta", "relative"]);
    for i in 1..64 {
        let s = c.alpha * i as f64 / 64.0;
        let g = g1_linearization(&star, s).core()?;
        table.push_f(&[s, potential_v(&c, s).core()?, g.ds2, g.eta2, g.dv_dbeta, g.relative]);
    }
    let angle = cone_angle_at_d(&c).core()?;
    let far = match c.regime {
        Regime::Subcritical => match cone_angle_at_infinity(&c) {
            Ok(f) => json!({ "angle": num(f.angle), "fitted": num(f.fitted), "gamma": num(f.gamma) }),
            Err(e) => err_json(e),
        },
        _ => Value::Null,
    };
    let collapse = match c.regime {
        Regime::Subcritical if c.beta <= 0.05 => match small_beta_collapse(&c) {
            Ok(r) => json!({
                "nexus_ratio": num(r.nexus_ratio),
                "sup_4v_over_beta": num(r.sup_4v_over_beta),
                "circle_length": num(r.circle_length),
                "half_length": num(r.half_length),
                "gap_ratio": num(r.gap_ratio),
            }),
            Err(e) => err_json(e),
        },
        _ => Value::Null,
    };
    let cone = if c.delta > 0.0 {
        match make_plan(&c, cfg.theta, cfg.eta, &plan_options(cfg)) {
            Ok(plan) => {
                let (lo, hi) = gluing_zone_s(&plan);
                match cone_comparison(&c, lo, hi, 41) {
                    Ok(k) => json!({
                        "s_lo": num(lo),
                        "s_hi": num(hi),
                        "kappa": num(k.kappa),
                        "v_ratio_min": num(k.v_ratio_min),
                        "v_ratio_max": num(k.v_ratio_max),
                    }),
                    Err(e) => err_json(e),
                }
            }
            Err(e) => err_json(e),
        }
    } else {
        Value::Null
    };
    let rig = futaki_rigidity_check(&BarrierSpec::default(), None).core()?;
    let one = |_u: f64| 1.0;
    let eq = futaki_rigidity_check(&BarrierSpec::default(), Some(&one)).core()?;
    let mut meta = header("metric", cfg);
    meta.insert("constants".into(), constants_json(&c));
    meta.insert(
        "cone_angle_d".into(),
        json!({ "fitted": num(angle), "expected": num(2.0 * std::f64::consts::PI * c.beta) }),
    );
    meta.insert("far_cone".into(), far);
    meta.insert("collapse".into(), collapse);
    meta.insert("cone_comparison".into(), cone);
    meta.insert(
        "rigidity".into(),
        json!({
            "ratio": num(rig.ratio),
            "gap": num(rig.gap),
            "strict": rig.strict,
            "constant_ratio": num(eq.ratio),
            "constant_strict": eq.strict,
        }),
    );
    emit(cfg, &cfg.output_dir, "metric", &table, Value::Object(meta), out)?;
    Ok(EXIT_OK)
}

pub fn plan_json(p: &GluingPlan) -> Value {
    json!({
        "n": p.n,
        "beta_star": num(p.beta_star),
        "alpha": num(p.alpha),
        "delta": num(p.delta),
        "epsilon": num(p.epsilon),
        "epsilon_beta": opt(p.epsilon_beta),
        "eta": num(p.eta),
        "theta": num(p.theta),
        "r_eps": num(p.r_eps),
        "u_eps": num(p.u_eps),
        "u_zone_inner": num(p.u_zone_inner),
        "u_zone_outer": num(p.u_zone_outer),
        "rho_min": num(p.rho_min),
        "rho_max": num(p.rho_max),
        "nu0": num(p.nu0),
        "regime": p.regime.name(),
        "e_bound": num(p.e_bound),
        "f_bound": num(p.f_bound),
        "sigma": num(p.sigma),
        "margin": num(p.margin),
        "lower_margin": num(p.lower_margin),
        "upper_margin": num(p.upper_margin),
    })
}

pub fn glue(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let c = derive(&cfg.geometry, cfg.beta).core()?;
    let plan = make_plan(&c, cfg.theta, cfg.eta, &plan_options(cfg)).core()?;
    let mut table = Table::new(&["rho", "chi"]);
    for rho in geometric(plan.rho_min, plan.rho_max, 201) {
        table.push_f(&[rho, cutoff_chi(&plan, rho)]);
    }
    let mut meta = header("glue", cfg);
    meta.insert("law".into(), json!(regime_law(&cfg.geometry)));
    meta.insert("plan".into(), plan_json(&plan));
    emit(cfg, &cfg.output_dir, "gluing", &table, Value::Object(meta), out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ObstructArgs {
    /// fiber density of the eigenfunction
    #[arg(long, allow_hyphen_values = true)]
    pub c_phi: Option<f64>,
    /// Green's-term coefficient of the Tian-Yau potential
    #[arg(long, allow_hyphen_values = true)]
    pub a_ty: Option<f64>,
    /// allow a_TY <= 0
    #[arg(long)]
    pub unconstrained: bool,
    /// skip the sign-change search
    #[arg(long)]
    pub no_root: bool,
}

impl ObstructArgs {
    pub fn inputs(&self) -> ModelInputs {
        let d = ModelInputs::default();
        ModelInputs {
            c_phi: self.c_phi.unwrap_or(d.c_phi),
            a_ty: self.a_ty.unwrap_or(d.a_ty),
            constrained: !self.unconstrained,
            ..d
        }
    }
}

pub fn report_json(r: &ObstructionReport) -> Value {
    json!({
        "regime": r.regime.name(),
        "nu0": num(r.nu0),
        "delta": num(r.delta),
        "theta": num(r.theta),
        "eta": num(r.eta),
        "epsilon": num(r.epsilon),
        "epsilon_beta": opt(r.epsilon_beta),
        "j_value": num(r.j_value),
        "j_by_parts": num(r.j_by_parts),
        "i_normal": num(r.i_normal),
        "i2_value": num(r.i2_value),
        "i2_tail": num(r.i2_tail),
        "i2_gap": num(r.i2_gap),
        "a_total": num(r.a_total),
        "kappa_positive": num(r.kappa.positive),
        "kappa_negative": num(r.kappa.negative),
        "kappa_ratio": num(r.kappa_ratio),
        "a_l": num(r.a_l),
        "leading_constant": opt(r.leading_constant),
        "fitted_kappa": opt(r.fitted_kappa),
        "e_bound": num(r.e_bound),
        "f_bound": num(r.f_bound),
        "envelope": num(r.envelope),
        "eta_root": opt(r.eta_root),
    })
}

pub fn obstruct(cfg: &RunConfig, args: &ObstructArgs, out: &mut dyn Write) -> Result<i32> {
    let c = derive(&cfg.geometry, cfg.beta).core()?;
    let inputs = args.inputs();
    let model = ObstructionModel::new(&c, cfg.theta, inputs, cfg.margin).core()?;
    let rep = model.report(cfg.eta, !args.no_root).core()?;
    let etas = if cfg.etas.is_empty() {
        let m = model.eta_max().core()?;
        (0..=20).map(|i| -m + 2.0 * m * i as f64 / 20.0).collect()
    } else {
        cfg.etas.clone()
    };
    let mut table = Table::new(&["eta", "epsilon", "j_part", "i2", "a_total"]);
    for eta in etas {
        match model.evaluate(eta) {
            Ok(ev) => table.push_f(&[eta, ev.epsilon, ev.j_part, ev.i2.value, ev.a_total]),
            Err(_) => table.push_f(&[eta, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        }
    }
    let mut meta = header("obstruct", cfg);
    meta.insert(
        "inputs".into(),
        json!({
            "c_phi": num(inputs.c_phi),
            "a_ty": num(inputs.a_ty),
            "constrained": inputs.constrained,
        }),
    );
    meta.insert("report".into(), report_json(&rep));
    emit(cfg, &cfg.output_dir, "obstruction", &table, Value::Object(meta), out)?;
    Ok(EXIT_OK)
}

struct PointResult {
    row: Vec<String>,
    error: Option<anyhow::Error>,
}

fn sweep_point(cfg: &RunConfig, i: usize, beta: BetaSpec) -> PointResult {
    let dir = cfg.output_dir.join("sweep").join(format!("point_{i:03}"));
    let run = || -> Result<Vec<String>> {
        let c = derive(&cfg.geometry, beta).core()?;
        let grid = GridSpec::default();
        let sol = solve_profile(&c, grid, cfg.normalization.unwrap_or(Normalization::Raw)).core()?;
        let res = profile_residuals(&sol, 7).core()?;
        let mut meta = header("sweep", cfg);
        meta.insert("beta".into(), beta_json(&beta));
        meta.insert("profile".into(), profile_meta(&sol, &grid));
        // per-point output goes to its own directory only
        emit(cfg, &dir, "profile", &profile_table(&sol), Value::Object(meta), &mut std::io::sink())?;
        Ok(vec![
            i.to_string(),
            fmt_f(c.beta),
            fmt_f(c.delta),
            c.regime.name().into(),
            sol.len().to_string(),
            fmt_f(sol.u0()),
            fmt_f(sol.u_extinct().unwrap_or(f64::NAN)),
            fmt_f(res.monge_ampere),
            fmt_f(res.first_integral),
            fmt_f(res.eigen_analytic),
            "ok".into(),
        ])
    };
    match run() {
        Ok(row) => PointResult { row, error: None },
        Err(e) => {
            let mut row = vec![i.to_string()];
            row.extend((0..9).map(|_| "nan".to_string()));
            row.push(e.to_string());
            PointResult { row, error: Some(e) }
        }
    }
}

pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    if cfg.betas.is_empty() {
        return Err(InputError::new("sweep needs a beta list (--betas or \"betas\" in the config)").into());
    }
    let results: Vec<PointResult> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg.betas.iter().enumerate().map(|(i, b)| s.spawn(move || sweep_point(cfg, i, *b))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut table = Table::new(&[
        "index", "beta", "delta", "regime", "samples", "u0", "u_extinct", "monge_ampere", "first_integral", "eigen", "status",
    ]);
    let mut points = Vec::new();
    for r in &results {
        points.push(json!({ "index": r.row[0], "regime": r.row[3], "status": r.row[10] }));
        table.push(r.row.clone());
    }
    let mut meta = header("sweep", cfg);
    meta.insert("betas".into(), Value::Array(cfg.betas.iter().map(beta_json).collect()));
    meta.insert("points".into(), Value::Array(points));
    emit(cfg, &cfg.output_dir.join("sweep"), "summary", &table, Value::Object(meta), out)?;
    match results.into_iter().find_map(|r| r.error) {
        Some(e) => Err(e),
        None => Ok(EXIT_OK),
    }
}

/// Quadric, degree-n and degree-(n-1) hypersurface families of projective space.
pub fn default_regime_rows() -> Vec<(String, GeometryParams)> {
    use calabi_core::params::q;
    let mut rows = Vec::new();
    let mut add = |family: &str, n: u32, num: i128, den: i128| {
        if let Ok(g) = GeometryParams::new(n, q(num, den), J0::Finite(1)) {
            rows.push((family.to_string(), g));
        }
    };
    for n in 2..=6 {
        add("quadric", n, n as i128 + 1, 2);
    }
    for n in 3..=6 {
        add("degree n", n, n as i128 + 1, n as i128);
    }
    for n in 4..=6 {
        add("degree n-1", n, n as i128 + 1, n as i128 - 1);
    }
    rows
}

pub fn parse_row(s: &str) -> Result<GeometryParams> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(InputError::new(format!("row {s:?} must be n,alpha,j0")).into());
    }
    let n: u32 = parts[0].trim().parse().map_err(|_| InputError::new(format!("bad n in {s:?}")))?;
    let alpha = crate::config::parse_rational(parts[1])?;
    let j0 = crate::config::parse_j0(parts[2])?;
    GeometryParams::new(n, alpha, j0).map_err(|e| InputError::new(e.to_string()).into())
}

pub fn regimes(cfg: &RunConfig, rows: &[String], out: &mut dyn Write) -> Result<i32> {
    let list: Vec<(String, GeometryParams)> = if rows.is_empty() {
        default_regime_rows()
    } else {
        rows.iter().map(|r| Ok(("custom".to_string(), parse_row(r)?))).collect::<Result<_>>()?
    };
    let mut table = Table::new(&["family", "n", "alpha", "j0", "nu0", "regime", "law"]);
    let mut items = Vec::new();
    for (family, g) in &list {
        let j0 = match g.j0 {
            J0::Finite(k) => k.to_string(),
            J0::Infinite => "infinity".into(),
        };
        let nu = match g.nu0_exact() {
            Some(v) => v.to_string(),
            None => "infinity".into(),
        };
        let law = regime_law(g);
        let reg = classify(g).name();
        writeln!(out, "{family:<11} n={} alpha={} j0={j0:<8} nu0={nu:<6} {reg:<8} eps_beta = {law}", g.n, g.alpha)?;
        table.push(vec![family.clone(), g.n.to_string(), g.alpha.to_string(), j0.clone(), nu.clone(), reg.into(), law.clone()]);
        items.push(json!({
            "family": family,
            "geometry": geometry_json(g),
            "nu0": num(nu0(g)),
            "regime": reg,
            "law": law,
        }));
    }
    let mut meta = serde_json::Map::new();
    meta.insert("command".into(), json!("regimes"));
    meta.insert("version".into(), json!(VERSION));
    meta.insert("rows".into(), Value::Array(items));
    emit(cfg, &cfg.output_dir, "regimes", &table, Value::Object(meta), out)?;
    Ok(EXIT_OK)
}
