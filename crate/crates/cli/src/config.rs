//! Scenario configuration: which module, which forms, which cubes.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::fields::cube::{
    bigon, composable_bigons, cube_from_json, good_three_path, path_family, random_path, sphere,
    straight_path,
};
use gray_holonomy::fields::form::FormJson;
use gray_holonomy::fields::triple::{
    adjoint_recipe, flat_recipe, flat_recipe_constant_m, DEFAULT_LIFTING_FACTOR,
};
use gray_holonomy::holonomy::Resolution;
use gray_holonomy::instances::{
    make_adjoint, make_automorphism, make_chain_complex, random_boundaries, AdjointInstance,
    ChainComplexInstance, CrossedModuleData,
};
use gray_holonomy::linalg::from_rows;
use gray_holonomy::{
    Cube, DifferentialTwoCrossedModule, FormField, FormTriple, GroupSpec, LieTwoCrossedModule,
};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub instance: Option<InstanceDesc>,
    pub triple: Option<TripleDesc>,
    pub cube: Option<Value>,
    /// The two 2-paths of the interchange check.
    pub cubes: Option<Vec<Value>>,
    pub resolution: Option<ResolutionDesc>,
    pub checks: Option<Vec<String>>,
    pub seed: Option<u64>,
    /// Per-check tolerance overrides, keyed by check name.
    pub tol: Option<BTreeMap<String, f64>>,
    pub lifting_factor: Option<f64>,
    /// Extra lifting factors scanned by the interchange check.
    pub factors: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub thin_kind: Option<String>,
    pub perturbations: Option<usize>,
    pub fd_step: Option<f64>,
    pub rotation: Option<Vec<Vec<f64>>>,
    pub reversal: Option<bool>,
    pub convergence: Option<ConvergenceDesc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "instance", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceDesc {
    Adjoint {
        group: GroupDesc,
    },
    Chain {
        dims: Vec<usize>,
        /// Boundary matrices, rows first; random (seeded) when absent.
        boundaries: Option<Vec<Vec<Vec<f64>>>>,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDesc {
    #[serde(rename = "type")]
    pub kind: String,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "recipe", deny_unknown_fields)]
pub enum TripleDesc {
    R1 {
        d: Option<usize>,
        degree: Option<u32>,
        scale: Option<f64>,
        seed: Option<u64>,
    },
    R2 {
        d: Option<usize>,
        degree: Option<u32>,
        scale: Option<f64>,
        seed: Option<u64>,
        /// `"flat"` (default) or `"constant_m"`.
        variant: Option<String>,
    },
    #[serde(rename = "user")]
    User {
        omega: FormJson,
        m: FormJson,
        theta: FormJson,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionDesc {
    #[serde(rename = "N_t")]
    pub nt: usize,
    #[serde(rename = "N_s")]
    pub ns: Option<usize>,
    #[serde(rename = "N_x")]
    pub nx: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceDesc {
    pub op: Option<String>,
    pub family: Option<String>,
    pub n: Option<Vec<usize>>,
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// A module with both its group and Lie algebra level.
#[derive(Clone)]
pub enum Instance {
    Adjoint(Arc<AdjointInstance>),
    Chain(Arc<ChainComplexInstance>),
}

impl Instance {
    pub fn lie(&self) -> Arc<dyn LieTwoCrossedModule> {
        match self {
            Instance::Adjoint(h) => h.clone(),
            Instance::Chain(h) => h.clone(),
        }
    }

    pub fn name(&self) -> String {
        self.lie().name()
    }

    pub fn algebra(&self) -> &dyn DifferentialTwoCrossedModule {
        match self {
            Instance::Adjoint(h) => h.algebra(),
            Instance::Chain(h) => h.algebra(),
        }
    }
}

fn core_err(e: gray_holonomy::Error) -> CliError {
    CliError::config(e.to_string())
}

pub fn group(desc: &GroupDesc) -> Result<GroupSpec, CliError> {
    match desc.kind.as_str() {
        "GL" => GroupSpec::general_linear(desc.n).map_err(core_err),
        "SO" => GroupSpec::special_orthogonal(desc.n).map_err(core_err),
        other => Err(CliError::config(format!(
            "unknown group type {other:?}; expected GL or SO"
        ))),
    }
}

pub fn instance(desc: &InstanceDesc) -> Result<Instance, CliError> {
    match desc {
        InstanceDesc::Adjoint { group: g } => {
            Ok(Instance::Adjoint(make_adjoint(group(g)?).map_err(core_err)?))
        }
        InstanceDesc::Chain {
            dims,
            boundaries,
            seed,
        } => {
            let b = match boundaries {
                Some(rows) => rows
                    .iter()
                    .map(|r| from_rows(r))
                    .collect::<gray_holonomy::Result<Vec<_>>>()
                    .map_err(core_err)?,
                None => {
                    if dims.len() < 2 {
                        return Err(CliError::config("chain complex needs at least two dims"));
                    }
                    random_boundaries(dims, Some(1), &mut rng_from_seed(seed.unwrap_or(3)))
                }
            };
            Ok(Instance::Chain(
                make_chain_complex(dims, &b).map_err(core_err)?,
            ))
        }
    }
}

/// The automorphism 2-crossed module of the identity crossed module on
/// the Lie algebra of `group`.
pub fn automorphism(
    g: &GroupDesc,
) -> Result<gray_holonomy::instances::AutomorphismInstance, CliError> {
    let spec = group(g)?;
    make_automorphism(CrossedModuleData::identity_adjoint(spec.basis())).map_err(core_err)
}

pub fn default_instance() -> InstanceDesc {
    InstanceDesc::Adjoint {
        group: GroupDesc {
            kind: "GL".into(),
            n: 2,
        },
    }
}

/// Builds the form triple; `d` is the ambient dimension used when the
/// descriptor does not fix one.
pub fn triple(
    inst: &Instance,
    desc: Option<&TripleDesc>,
    d: usize,
    factor: f64,
) -> Result<FormTriple, CliError> {
    let default = match inst {
        Instance::Adjoint(_) => TripleDesc::R1 {
            d: None,
            degree: None,
            scale: None,
            seed: None,
        },
        Instance::Chain(_) => TripleDesc::R2 {
            d: None,
            degree: None,
            scale: None,
            seed: None,
            variant: None,
        },
    };
    let desc = desc.unwrap_or(&default);
    let t = match (desc, inst) {
        (
            TripleDesc::R1 {
                d: dd,
                degree,
                scale,
                seed,
            },
            Instance::Adjoint(h),
        ) => adjoint_recipe(
            h.clone(),
            dd.unwrap_or(d),
            degree.unwrap_or(2),
            scale.unwrap_or(0.5),
            seed.unwrap_or(1),
        )
        .map_err(core_err)?,
        (TripleDesc::R1 { .. }, _) => {
            return Err(CliError::config(
                "recipe R1 needs the adjoint instance (e = g + g)",
            ))
        }
        (
            TripleDesc::R2 {
                d: dd,
                degree,
                scale,
                seed,
                variant,
            },
            Instance::Chain(h),
        ) => {
            let args = (
                dd.unwrap_or(d),
                degree.unwrap_or(2),
                scale.unwrap_or(0.5),
                seed.unwrap_or(4),
            );
            match variant.as_deref().unwrap_or("flat") {
                "flat" => flat_recipe(h.clone(), args.0, args.1, args.2, args.3),
                "constant_m" => flat_recipe_constant_m(h.clone(), args.0, args.1, args.2, args.3),
                other => {
                    return Err(CliError::config(format!(
                        "unknown R2 variant {other:?}; expected flat or constant_m"
                    )))
                }
            }
            .map_err(core_err)?
        }
        (TripleDesc::R2 { .. }, _) => {
            return Err(CliError::config(
                "recipe R2 needs a chain-complex instance",
            ))
        }
        (TripleDesc::User { omega, m, theta }, _) => {
            let [sg, se, sl] = inst.algebra().shapes();
            let f = |j: &FormJson, s| FormField::from_json(j, s).map_err(core_err);
            FormTriple::user(inst.lie(), f(omega, sg)?, f(m, se)?, f(theta, sl)?)
                .map_err(core_err)?
        }
    };
    Ok(t.with_factor(factor))
}

/// The ambient dimension fixed by a triple descriptor, if any.
pub fn triple_dim(desc: Option<&TripleDesc>) -> Option<usize> {
    match desc? {
        TripleDesc::R1 { d, .. } | TripleDesc::R2 { d, .. } => *d,
        TripleDesc::User { omega, .. } => Some(omega.d),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key)
}

fn vec_field(v: &Value, key: &str) -> Result<Vec<f64>, CliError> {
    serde_json::from_value(
        field(v, key)
            .cloned()
            .ok_or_else(|| CliError::config(format!("cube builder needs \"{key}\"")))?,
    )
    .map_err(|e| CliError::config(format!("cube field {key}: {e}")))
}

/// Parses a cube: either the explicit form `{"n", "base", "epsilon"}` or a
/// named builder such as `{"builder": "bigon", "d": 3, "seed": 2}`.
pub fn cube(v: &Value, d: usize) -> Result<Cube, CliError> {
    let Some(name) = v.get("builder").and_then(Value::as_str) else {
        return cube_from_json(v).map_err(core_err);
    };
    let dd = v.get("d").and_then(Value::as_u64).map_or(d, |x| x as usize);
    let seed = v.get("seed").and_then(Value::as_u64).unwrap_or(1);
    let c = match name {
        "straight_path" => straight_path(&vec_field(v, "from")?, &vec_field(v, "to")?),
        "random_path" => {
            let scale = v.get("scale").and_then(Value::as_f64).unwrap_or(0.4);
            random_path(
                &vec_field(v, "from")?,
                &vec_field(v, "to")?,
                scale,
                &mut rng_from_seed(seed),
            )
        }
        "bigon" => bigon(dd, seed),
        "good_three_path" => good_three_path(dd, seed),
        "path_family" => path_family(dd, seed),
        "sphere" => Ok(sphere()),
        other => {
            return Err(CliError::config(format!(
                "unknown cube builder {other:?}; expected straight_path, random_path, bigon, good_three_path, path_family or sphere"
            )))
        }
    };
    c.map_err(core_err)
}

pub fn interchange_pair(
    cfg: &ScenarioConfig,
    d: usize,
    seed: u64,
) -> Result<(Cube, Cube), CliError> {
    match &cfg.cubes {
        Some(v) if v.len() == 2 => Ok((cube(&v[0], d)?, cube(&v[1], d)?)),
        Some(_) => Err(CliError::config("\"cubes\" must hold exactly two 2-paths")),
        None => composable_bigons(d, seed).map_err(core_err),
    }
}

impl ScenarioConfig {
    pub fn resolution(&self, default: usize) -> Resolution {
        match self.resolution {
            Some(r) => Resolution {
                nt: r.nt,
                ns: r.ns.unwrap_or(r.nt),
                nx: r.nx.unwrap_or(r.nt),
            },
            None => Resolution::uniform(default),
        }
    }

    pub fn factor(&self) -> f64 {
        self.lifting_factor.unwrap_or(DEFAULT_LIFTING_FACTOR)
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tol
            .as_ref()
            .and_then(|t| t.get(check).copied())
            .unwrap_or(default)
    }
}
