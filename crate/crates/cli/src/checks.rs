//! One function per check; each returns a graded result with details.

use std::str::FromStr;

use gray_holonomy::fields::cube::good_three_path;
use gray_holonomy::fields::thin::{thin_perturbations, ThinKind};
use gray_holonomy::fields::{Cube, FormTriple};
use gray_holonomy::holonomy::{
    baez_schreiber_residual, convergence, green, interchange_factors, invariance_suite,
    path_holonomy, stokes, surface_holonomy, volume_holonomy, wilson_sphere, ConvergenceFamily,
    WilsonOptions,
};
use gray_holonomy::linalg::from_rows;
use gray_holonomy::{
    check_differential_axioms, check_two_crossed_axioms, verify_gray_axioms, AxiomReport,
    LieTwoCrossedModule, Module,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Instance, ScenarioConfig};
use crate::CliError;

pub const CHECKS: [&str; 11] = [
    "axioms",
    "gray",
    "differential",
    "holonomy",
    "green",
    "stokes",
    "interchange",
    "wilson",
    "invariance",
    "baez_schreiber",
    "convergence",
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// The graded quantity, `null` when it is not a finite number.
    pub residual: Option<f64>,
    pub tolerance: f64,
    /// `"<="` for residuals, `">="` for convergence orders.
    pub comparison: &'static str,
    pub details: Value,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn below(name: &str, residual: f64, tol: f64, details: Value) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass: residual.is_finite() && residual <= tol,
        residual: finite(residual),
        tolerance: tol,
        comparison: "<=",
        details,
    }
}

fn core(e: gray_holonomy::Error) -> CliError {
    use gray_holonomy::Error as E;
    match e {
        E::Config(_)
        | E::DimensionMismatch(_)
        | E::UnsupportedKind(_)
        | E::ConstraintViolation { .. }
        | E::NotASphereMap(_)
        | E::NotAComplex(_)
        | E::LengthUnsupported(_)
        | E::BoundaryMismatch { .. } => CliError::config(e.to_string()),
        other => CliError::Run(other.into()),
    }
}

/// Everything a check needs, resolved from flags and config.
pub struct Context<'a> {
    pub cfg: &'a ScenarioConfig,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Context<'_> {
    fn tol(&self, check: &str, default: f64) -> f64 {
        self.tol.unwrap_or_else(|| self.cfg.tolerance(check, default))
    }

    fn instance(&self) -> Result<Instance, CliError> {
        let desc = self.cfg.instance.clone().unwrap_or_else(config::default_instance);
        config::instance(&desc)
    }

    fn triple(&self, inst: &Instance, d: usize) -> Result<FormTriple, CliError> {
        let d = config::triple_dim(self.cfg.triple.as_ref()).unwrap_or(d);
        config::triple(inst, self.cfg.triple.as_ref(), d, self.cfg.factor())
    }

    fn cube_or(&self, d: usize, default: impl FnOnce() -> Result<Cube, CliError>) -> Result<Cube, CliError> {
        match &self.cfg.cube {
            Some(v) => config::cube(v, d),
            None => default(),
        }
    }

    fn dim(&self, default: usize) -> usize {
        config::triple_dim(self.cfg.triple.as_ref()).unwrap_or(default)
    }
}

fn axiom_result(name: &str, r: &AxiomReport, extra: Value) -> CheckResult {
    let failures: Vec<Value> = r
        .failures()
        .iter()
        .map(|e| json!({"identity": e.identity, "max_residual": e.max_residual, "worst_seed_index": e.worst_seed_index}))
        .collect();
    CheckResult {
        name: name.into(),
        pass: r.pass(),
        residual: finite(r.max_residual()),
        tolerance: r.tol,
        comparison: "<=",
        details: json!({
            "instance": extra,
            "seed": r.seed,
            "n_samples": r.n_samples,
            "entries": r.entries,
            "failures": failures,
        }),
    }
}

pub fn axioms(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let n = cx.cfg.samples.unwrap_or(200);
    let r = check_two_crossed_axioms(inst.lie().as_ref(), n, cx.seed, cx.tol("axioms", 1e-9));
    Ok(axiom_result("axioms", &r, json!(inst.name())))
}

pub fn gray(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let n = cx.cfg.samples.unwrap_or(100);
    let module: Module = inst.lie();
    let r = verify_gray_axioms(&module, n, cx.seed, cx.tol("gray", 1e-9));
    Ok(axiom_result("gray", &r, json!(inst.name())))
}

pub fn differential(cx: &Context, automorphism: bool) -> Result<CheckResult, CliError> {
    let n = cx.cfg.samples.unwrap_or(200);
    let tol = cx.tol("differential", 1e-9);
    if automorphism {
        let g = match &cx.cfg.instance {
            Some(config::InstanceDesc::Adjoint { group }) => group.clone(),
            Some(_) => {
                return Err(CliError::config(
                    "the automorphism instance is built from a group descriptor",
                ))
            }
            None => config::GroupDesc {
                kind: "GL".into(),
                n: 2,
            },
        };
        let a = config::automorphism(&g)?;
        let r = check_differential_axioms(&a, n, cx.seed, tol);
        return Ok(axiom_result("differential", &r, json!("automorphism")));
    }
    let inst = cx.instance()?;
    let r = check_differential_axioms(inst.algebra(), n, cx.seed, tol);
    Ok(axiom_result("differential", &r, json!(inst.name())))
}

pub fn holonomy(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let c = cx.cube_or(d, || gray_holonomy::fields::cube::bigon(d, cx.seed).map_err(core))?;
    let res = cx.cfg.resolution(64);
    let h = t.module.as_ref();
    let r = match c.n() {
        1 => path_holonomy(h.g(), &t.omega, c.as_ref(), 0.0, 1.0, res.nt),
        2 => surface_holonomy(h, &t.omega, &t.m, c.as_ref(), res.nt, res.ns).map(|r| r.e),
        _ => volume_holonomy(&t, c.as_ref(), res).map(|r| r.l),
    }
    .map_err(core)?;
    Ok(below(
        "holonomy",
        r.drift,
        cx.tol("holonomy", 1e-8),
        json!({"level": c.n(), "result": r, "resolution": res_json(res)}),
    ))
}

fn res_json(r: gray_holonomy::holonomy::Resolution) -> Value {
    json!({"N_t": r.nt, "N_s": r.ns, "N_x": r.nx})
}

pub fn green_check(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let c = cx.cube_or(d, || gray_holonomy::fields::cube::bigon(d, cx.seed).map_err(core))?;
    let res = cx.cfg.resolution(64);
    let r = green(&t, c.as_ref(), res).map_err(core)?;
    Ok(below(
        "green",
        r.residual,
        cx.tol("green", 1e-6),
        json!({"report": r, "resolution": res_json(res), "recipe": t.recipe}),
    ))
}

pub fn stokes_check(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let c = cx.cube_or(d, || good_three_path(d, cx.seed).map_err(core))?;
    let res = cx.cfg.resolution(32);
    let r = stokes(&t, c.as_ref(), res).map_err(core)?;
    Ok(below(
        "stokes",
        r.residual,
        cx.tol("stokes", 1e-6),
        json!({"report": r, "resolution": res_json(res), "recipe": t.recipe}),
    ))
}

pub fn interchange_check(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let (g, gp) = config::interchange_pair(cx.cfg, d, cx.seed)?;
    let res = cx.cfg.resolution(64);
    let mut factors = vec![t.factor];
    for f in cx.cfg.factors.iter().flatten() {
        if !factors.contains(f) {
            factors.push(*f);
        }
    }
    let reports = interchange_factors(&t, g, gp, res, &factors).map_err(core)?;
    let tol = cx.tol("interchange", 1e-5);
    let scan: Vec<Value> = reports
        .iter()
        .map(|r| json!({"factor": r.factor, "residual": r.residual, "pass": r.residual <= tol}))
        .collect();
    Ok(below(
        "interchange",
        reports[0].residual,
        tol,
        json!({
            "report": reports[0],
            "lifting_factor": t.factor,
            "factor_scan": scan,
            "resolution": res_json(res),
        }),
    ))
}

pub fn wilson(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let t = cx.triple(&inst, 4)?;
    let s = cx.cube_or(4, || Ok(gray_holonomy::fields::cube::sphere()))?;
    let res = cx.cfg.resolution(32);
    let rotation = match &cx.cfg.rotation {
        Some(rows) => Some(from_rows(rows).map_err(core)?),
        None => None,
    };
    let opts = WilsonOptions {
        reversal: cx.cfg.reversal.unwrap_or(true),
        rotation,
        whisker: false,
    };
    let r = wilson_sphere(&t, s, res, &opts).map_err(core)?;
    let graded = [
        Some(r.delta_defect),
        r.reversal_defect,
        r.conjugation_defect,
    ]
    .into_iter()
    .flatten()
    .fold(0.0, f64::max);
    Ok(below(
        "wilson",
        graded,
        cx.tol("wilson", 1e-5),
        json!({"report": r, "resolution": res_json(res)}),
    ))
}

pub fn invariance(cx: &Context, kind: Option<&str>) -> Result<CheckResult, CliError> {
    let kind = kind
        .or(cx.cfg.thin_kind.as_deref())
        .unwrap_or("laminated");
    let kind = ThinKind::from_str(kind).map_err(core)?;
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let level = kind.cube_dim();
    let (default_cube, default_n): (Cube, usize) = match kind {
        ThinKind::Rank1 => {
            let a = vec![0.1; d];
            let b = vec![0.5; d];
            let mut rng = gray_holonomy::algebra::rng_from_seed(cx.seed);
            (
                gray_holonomy::fields::cube::random_path(&a, &b, 0.4, &mut rng).map_err(core)?,
                256,
            )
        }
        ThinKind::Laminated => (gray_holonomy::fields::cube::bigon(d, cx.seed).map_err(core)?, 64),
        ThinKind::Rank3 => (good_three_path(d, cx.seed).map_err(core)?, 32),
    };
    let base = cx.cube_or(d, || Ok(default_cube))?;
    let count = cx.cfg.perturbations.unwrap_or(5);
    let ps = thin_perturbations(base.clone(), kind, cx.seed, count).map_err(core)?;
    let res = cx.cfg.resolution(default_n);
    let r = invariance_suite(level, &t, base.as_ref(), &ps, res).map_err(core)?;
    Ok(below(
        "invariance",
        r.max_deviation,
        cx.tol("invariance", 1e-6),
        json!({"kind": format!("{kind:?}").to_lowercase(), "report": r, "resolution": res_json(res)}),
    ))
}

pub fn baez_schreiber(cx: &Context) -> Result<CheckResult, CliError> {
    let inst = cx.instance()?;
    let d = cx.dim(3);
    let t = cx.triple(&inst, d)?;
    let plot = cx.cube_or(d, || {
        gray_holonomy::fields::cube::path_family(d, cx.seed).map_err(core)
    })?;
    let nt = cx.cfg.resolution(128).nt;
    let step = cx.cfg.fd_step.unwrap_or(1e-3);
    let h: &dyn LieTwoCrossedModule = t.module.as_ref();
    let a = baez_schreiber_residual(h, &t.omega, &t.m, plot.as_ref(), nt, step).map_err(core)?;
    let b =
        baez_schreiber_residual(h, &t.omega, &t.m, plot.as_ref(), nt, 0.5 * step).map_err(core)?;
    let tol = cx.tol("baez_schreiber", 1e-4);
    let mut r = below(
        "baez_schreiber",
        a,
        tol,
        json!({
            "fd_step": step,
            "residual_half_step": b,
            "ratio": a / b,
            "N_t": nt,
        }),
    );
    // second-order differences: halving the step divides the residual by 4
    r.pass &= b <= 0.25 * tol;
    Ok(r)
}

pub fn convergence_check(
    cx: &Context,
    op: Option<&str>,
    family: Option<&str>,
    ns: Option<Vec<usize>>,
) -> Result<CheckResult, CliError> {
    let desc = cx.cfg.convergence.clone();
    let op = op
        .map(String::from)
        .or_else(|| desc.as_ref().and_then(|c| c.op.clone()))
        .unwrap_or_else(|| "path".into());
    let family_name = family
        .map(String::from)
        .or_else(|| desc.as_ref().and_then(|c| c.family.clone()));
    let ns = ns.or_else(|| desc.as_ref().and_then(|c| c.n.clone()));
    let (fam, default_ns, min_order) = match op.as_str() {
        "path" => {
            if let Some(f) = family_name.as_deref().filter(|f| *f != "const-exp") {
                return Err(CliError::config(format!(
                    "unknown path family {f:?}; expected const-exp"
                )));
            }
            (
                ConvergenceFamily::ConstExp { dim: 2, seed: cx.seed },
                vec![8, 16, 32, 64, 128, 256],
                3.5,
            )
        }
        "green" | "stokes" => {
            let inst = cx.instance()?;
            let d = cx.dim(3);
            let t = Box::new(cx.triple(&inst, d)?);
            if op == "green" {
                let cube = cx.cube_or(d, || {
                    gray_holonomy::fields::cube::bigon(d, cx.seed).map_err(core)
                })?;
                (ConvergenceFamily::Green { triple: t, cube }, vec![8, 16, 32, 64], 2.0)
            } else {
                let cube = cx.cube_or(d, || good_three_path(d, cx.seed).map_err(core))?;
                (ConvergenceFamily::Stokes { triple: t, cube }, vec![8, 16, 32], 2.0)
            }
        }
        other => {
            return Err(CliError::config(format!(
                "unknown convergence op {other:?}; expected path, green or stokes"
            )))
        }
    };
    let ns = ns.unwrap_or(default_ns);
    if ns.len() < 2 || ns.iter().any(|&n| n < 2) {
        return Err(CliError::config("convergence needs at least two resolutions >= 2"));
    }
    let s = convergence(&fam, &ns).map_err(core)?;
    let min_order = cx.tol.unwrap_or_else(|| cx.cfg.tolerance("convergence", min_order));
    Ok(CheckResult {
        name: "convergence".into(),
        pass: s.order.is_finite() && s.order >= min_order,
        residual: finite(s.order),
        tolerance: min_order,
        comparison: ">=",
        details: json!({"op": op, "study": s}),
    })
}

/// Runs a check by its config name.
pub fn by_name(cx: &Context, name: &str) -> Result<CheckResult, CliError> {
    match name {
        "axioms" => axioms(cx),
        "gray" => gray(cx),
        "differential" => differential(cx, false),
        "holonomy" => holonomy(cx),
        "green" => green_check(cx),
        "stokes" => stokes_check(cx),
        "interchange" => interchange_check(cx),
        "wilson" => wilson(cx),
        "invariance" => invariance(cx, None),
        "baez_schreiber" => baez_schreiber(cx),
        "convergence" => convergence_check(cx, None, None, None),
        other => Err(CliError::config(format!(
            "unknown check {other:?}; valid checks: {}",
            CHECKS.join(", ")
        ))),
    }
}
