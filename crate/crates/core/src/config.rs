//! TOML run configuration: schema, parsing of embedded expressions, and
//! construction of the domain objects the task runner consumes.
//!
//! Layout: `[run]` (seed/tol/steps), `[bundle]`, `[connection]`, `[group]`,
//! `[gauge]`, `[action]`, `[section]`, `[linear]`, `[candidate]`,
//! `[fields]`, `[curve.NAME]`, and numbered `[task.N]` tables executed in
//! numeric order. All expressions are strings in the expression grammar.

use crate::associate::{AssociationCandidate, RepresentationMatrices};
use crate::bundle::{BundleChart, SectionField, VectorField};
use crate::connection::{ChristoffelField, LinearChristoffel};
use crate::expr::{parse_expr, Expr};
use crate::liegroup::{ActionGenerators, MatrixLieGroup};
use crate::principal::GaugeField;
use crate::transport::Curve;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("{path}: bad expression `{src}`: {msg}")]
    BadExpr {
        path: String,
        src: String,
        msg: String,
    },
}

fn invalid(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSection {
    pub base_dim: usize,
    pub fiber_dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSection {
    /// `gamma[alpha][mu]`
    pub gamma: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub kind: String,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    /// `comps[mu][a]`
    pub comps: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSection {
    pub kind: String,
    pub charge: Option<i64>,
    /// custom: `generators[a][alpha]` over the fiber variables
    pub generators: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSection {
    pub comps: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    /// `coeff[alpha][mu][omega]`
    pub coeff: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSection {
    /// `s[a][alpha][omega]`
    pub s: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSection {
    pub x: Vec<String>,
    pub y: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub comps: Vec<String>,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub kind: String,
    pub x: Option<Vec<f64>>,
    pub f: Option<Vec<f64>>,
    pub f0: Option<Vec<f64>>,
    pub curve: Option<String>,
    pub samples: Option<usize>,
    pub phi: Option<String>,
    /// flux direction indices and algebra coefficient, 1-based
    pub mu: Option<usize>,
    pub nu: Option<usize>,
    pub a: Option<usize>,
    pub rect: Option<Vec<f64>>,
    pub divs: Option<usize>,
    pub tol: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub run: Option<RunSection>,
    pub bundle: Option<BundleSection>,
    pub connection: Option<ConnectionSection>,
    pub group: Option<GroupSection>,
    pub gauge: Option<GaugeSection>,
    pub action: Option<ActionSection>,
    pub section: Option<SectionSection>,
    pub linear: Option<LinearSection>,
    pub candidate: Option<CandidateSection>,
    pub fields: Option<FieldsSection>,
    pub curve: Option<BTreeMap<String, CurveSection>>,
    pub task: Option<BTreeMap<String, TaskSection>>,
}

/// Effective run settings after CLI flag overrides.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub seed: u64,
    pub tol: f64,
    pub steps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            tol: crate::bundle::DEFAULT_TOL_BASE,
            steps: 64,
        }
    }
}

/// Fully constructed domain objects, ready for the task runner.
pub struct RunConfig {
    pub settings: Settings,
    pub chart: Option<BundleChart>,
    pub connection: Option<ChristoffelField>,
    pub group: Option<Arc<MatrixLieGroup>>,
    pub gauge: Option<GaugeField>,
    pub gens: Option<ActionGenerators>,
    pub rep: Option<RepresentationMatrices>,
    pub section: Option<SectionField>,
    pub linear: Option<Arc<LinearChristoffel>>,
    pub candidate: Option<AssociationCandidate>,
    pub fields: Option<(VectorField, VectorField)>,
    pub curves: BTreeMap<String, Curve>,
    /// Tasks in numeric order, with their config-key label.
    pub tasks: Vec<(u64, TaskSection)>,
}

fn parse_all(
    path: &str,
    srcs: &[String],
    allowed: &[&str],
) -> Result<Vec<Expr>, ConfigError> {
    srcs.iter()
        .map(|s| {
            parse_expr(s, allowed).map_err(|e| ConfigError::BadExpr {
                path: path.to_string(),
                src: s.clone(),
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn parse_config(text: &str) -> Result<RawConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

pub fn build(raw: &RawConfig, overrides: &RunSection) -> Result<RunConfig, ConfigError> {
    let run = raw.run.clone().unwrap_or_default();
    let defaults = Settings::default();
    let settings = Settings {
        seed: overrides.seed.or(run.seed).unwrap_or(defaults.seed),
        tol: overrides.tol.or(run.tol).unwrap_or(defaults.tol),
        steps: overrides.steps.or(run.steps).unwrap_or(defaults.steps),
    };

    // base dimension: from [bundle], else from [gauge]
    let base_dim = match (&raw.bundle, &raw.gauge) {
        (Some(b), _) => Some(b.base_dim),
        (None, Some(g)) => Some(g.comps.len()),
        _ => None,
    };
    let base_vars: Option<Vec<String>> =
        base_dim.map(|m| (1..=m).map(|i| format!("x{i}")).collect());

    let chart = raw
        .bundle
        .as_ref()
        .map(|b| {
            BundleChart::standard(b.base_dim, b.fiber_dim)
                .map_err(|e| invalid("bundle", e.to_string()))
        })
        .transpose()?;

    let connection = match (&raw.connection, &chart) {
        (Some(c), Some(chart)) => {
            let all = chart.all_vars();
            let vars: Vec<&str> = all.iter().map(|s| s.as_str()).collect();
            let mut rows = Vec::new();
            for (alpha, row) in c.gamma.iter().enumerate() {
                rows.push(parse_all(
                    &format!("connection.gamma[{alpha}]"),
                    row,
                    &vars,
                )?);
            }
            Some(
                ChristoffelField::explicit(chart.clone(), rows)
                    .map_err(|e| invalid("connection", e.to_string()))?,
            )
        }
        (Some(_), None) => {
            return Err(invalid("connection", "requires a [bundle] section"));
        }
        _ => None,
    };

    let group = raw
        .group
        .as_ref()
        .map(|g| -> Result<Arc<MatrixLieGroup>, ConfigError> {
            match g.kind.as_str() {
                "u1" => Ok(MatrixLieGroup::u1()),
                "so3" => Ok(MatrixLieGroup::so3()),
                "su2" => Ok(MatrixLieGroup::su2()),
                "gl" => {
                    let n = g
                        .n
                        .ok_or_else(|| invalid("group", "kind \"gl\" requires n"))?;
                    Ok(MatrixLieGroup::gl(n))
                }
                other => Err(invalid("group.kind", format!("unknown group `{other}`"))),
            }
        })
        .transpose()?;

    let gauge = match (&raw.gauge, &group) {
        (Some(g), Some(group)) => {
            let vars = base_vars
                .as_ref()
                .expect("base dim known when gauge present");
            let allowed: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            let mut comps = Vec::new();
            for (mu, row) in g.comps.iter().enumerate() {
                if row.len() != group.dim() {
                    return Err(invalid(
                        &format!("gauge.comps[{mu}]"),
                        format!("expected {} coefficients, got {}", group.dim(), row.len()),
                    ));
                }
                comps.push(parse_all(&format!("gauge.comps[{mu}]"), row, &allowed)?);
            }
            Some(
                GaugeField::explicit(group.clone(), vars.clone(), comps)
                    .map_err(|e| invalid("gauge", e.to_string()))?,
            )
        }
        (Some(_), None) => return Err(invalid("gauge", "requires a [group] section")),
        _ => None,
    };

    let (gens, rep) = match (&raw.action, &group) {
        (Some(a), Some(group)) => match a.kind.as_str() {
            "standard" => {
                let rep = RepresentationMatrices::standard(group.clone())
                    .map_err(|e| invalid("action", e.to_string()))?;
                let gens = rep
                    .generators()
                    .map_err(|e| invalid("action", e.to_string()))?;
                (Some(gens), Some(rep))
            }
            "adjoint" => {
                let rep = RepresentationMatrices::adjoint(group.clone())
                    .map_err(|e| invalid("action", e.to_string()))?;
                let gens = rep
                    .generators()
                    .map_err(|e| invalid("action", e.to_string()))?;
                (Some(gens), Some(rep))
            }
            "u1-charge" => {
                let k = a
                    .charge
                    .ok_or_else(|| invalid("action", "kind \"u1-charge\" requires charge"))?;
                let rep = RepresentationMatrices::u1_charge(k)
                    .map_err(|e| invalid("action", e.to_string()))?;
                let gens = rep
                    .generators()
                    .map_err(|e| invalid("action", e.to_string()))?;
                (Some(gens), Some(rep))
            }
            "left" => (
                Some(ActionGenerators::left_multiplication(group.clone())),
                None,
            ),
            "custom" => {
                let gens_src = a.generators.as_ref().ok_or_else(|| {
                    invalid("action", "kind \"custom\" requires generators")
                })?;
                if gens_src.len() != group.dim() {
                    return Err(invalid(
                        "action.generators",
                        format!("expected {} generators, got {}", group.dim(), gens_src.len()),
                    ));
                }
                let n = gens_src[0].len();
                let fiber_vars: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
                let allowed: Vec<&str> = fiber_vars.iter().map(|s| s.as_str()).collect();
                let mut gens = Vec::new();
                for (a_idx, row) in gens_src.iter().enumerate() {
                    gens.push(parse_all(
                        &format!("action.generators[{a_idx}]"),
                        row,
                        &allowed,
                    )?);
                }
                let gens = ActionGenerators::new(group.clone(), fiber_vars, gens)
                    .map_err(|e| invalid("action", e.to_string()))?;
                (Some(gens), None)
            }
            other => return Err(invalid("action.kind", format!("unknown action `{other}`"))),
        },
        (Some(_), None) => return Err(invalid("action", "requires a [group] section")),
        _ => (None, None),
    };

    let section = match (&raw.section, &base_vars) {
        (Some(s), Some(vars)) => {
            let allowed: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            Some(SectionField::new(parse_all("section.comps", &s.comps, &allowed)?))
        }
        (Some(_), None) => {
            return Err(invalid("section", "requires a [bundle] or [gauge] section"))
        }
        _ => None,
    };

    let linear = match (&raw.linear, &base_vars) {
        (Some(l), Some(vars)) => {
            let allowed: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            let mut coeff = Vec::new();
            for (alpha, per_alpha) in l.coeff.iter().enumerate() {
                let mut per_mu = Vec::new();
                for (mu, row) in per_alpha.iter().enumerate() {
                    per_mu.push(parse_all(
                        &format!("linear.coeff[{alpha}][{mu}]"),
                        row,
                        &allowed,
                    )?);
                }
                coeff.push(per_mu);
            }
            Some(Arc::new(
                LinearChristoffel::explicit(vars.clone(), coeff)
                    .map_err(|e| invalid("linear", e.to_string()))?,
            ))
        }
        (Some(_), None) => {
            return Err(invalid("linear", "requires a [bundle] or [gauge] section"))
        }
        _ => None,
    };

    let candidate = match (&raw.candidate, &base_vars) {
        (Some(c), Some(vars)) => {
            let allowed: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            let mut s = Vec::new();
            for (a_idx, per_a) in c.s.iter().enumerate() {
                let mut mat = Vec::new();
                for (alpha, row) in per_a.iter().enumerate() {
                    mat.push(parse_all(
                        &format!("candidate.s[{a_idx}][{alpha}]"),
                        row,
                        &allowed,
                    )?);
                }
                s.push(mat);
            }
            Some(AssociationCandidate {
                base_vars: vars.clone(),
                s,
            })
        }
        (Some(_), None) => {
            return Err(invalid("candidate", "requires a [bundle] or [gauge] section"))
        }
        _ => None,
    };

    let fields = match (&raw.fields, &base_vars) {
        (Some(f), Some(vars)) => {
            let allowed: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            let x = VectorField::from_exprs(parse_all("fields.x", &f.x, &allowed)?);
            let y = VectorField::from_exprs(parse_all("fields.y", &f.y, &allowed)?);
            Some((x, y))
        }
        (Some(_), None) => {
            return Err(invalid("fields", "requires a [bundle] or [gauge] section"))
        }
        _ => None,
    };

    let mut curves = BTreeMap::new();
    if let Some(cs) = &raw.curve {
        for (name, c) in cs {
            let comps = parse_all(&format!("curve.{name}"), &c.comps, &["t"])?;
            curves.insert(name.clone(), Curve::new(comps, c.t0, c.t1));
        }
    }

    let mut tasks = Vec::new();
    if let Some(ts) = &raw.task {
        for (key, t) in ts {
            let n: u64 = key.parse().map_err(|_| {
                invalid(&format!("task.{key}"), "task keys must be integers")
            })?;
            tasks.push((n, t.clone()));
        }
        tasks.sort_by_key(|(n, _)| *n);
    }

    Ok(RunConfig {
        settings,
        chart,
        connection,
        group,
        gauge,
        gens,
        rep,
        section,
        linear,
        candidate,
        fields,
        curves,
        tasks,
    })
}
