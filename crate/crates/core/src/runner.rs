//! Task runner and command-line entry point.
//!
//! `run <config>` executes the numbered tasks of a TOML config in order and
//! prints a report; `check <config>` only validates the schema. Exit codes:
//! 0 all verdicts pass, 1 at least one verdict failed, 2 usage or config
//! error, 3 numeric abort while executing a task.

use crate::associate;
use crate::config::{self, RunConfig, RunSection, TaskSection};
use crate::connection;
use crate::expr::Expr;
use crate::principal::GaugeTransformation;
use crate::report::{Report, TaskReport, Value};
use crate::transport;
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// Config-level problem discovered while dispatching a task (exit 2).
    #[error("task.{task}: {msg}")]
    Config { task: u64, msg: String },
    /// Numeric or evaluation failure inside a task (exit 3).
    #[error("task.{task}: {msg}")]
    Numeric { task: u64, msg: String },
}

fn need<'a, T>(opt: &'a Option<T>, task: u64, what: &str) -> Result<&'a T, RunError> {
    opt.as_ref().ok_or_else(|| RunError::Config {
        task,
        msg: format!("requires {what}"),
    })
}

fn need_field<T: Clone>(opt: &Option<T>, task: u64, what: &str) -> Result<T, RunError> {
    opt.clone().ok_or_else(|| RunError::Config {
        task,
        msg: format!("missing field `{what}`"),
    })
}

fn numeric(task: u64, e: impl std::fmt::Display) -> RunError {
    RunError::Numeric {
        task,
        msg: e.to_string(),
    }
}

fn matrix_value(rows: &[Vec<f64>]) -> Value {
    Value::List(rows.iter().map(|r| Value::num_list(r)).collect())
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn curve_for<'a>(
    cfg: &'a RunConfig,
    task: u64,
    t: &TaskSection,
) -> Result<&'a transport::Curve, RunError> {
    let name = need_field(&t.curve, task, "curve")?;
    cfg.curves.get(&name).ok_or_else(|| RunError::Config {
        task,
        msg: format!("unknown curve `{name}`"),
    })
}

fn run_task(
    cfg: &RunConfig,
    id: u64,
    t: &TaskSection,
) -> Result<(bool, BTreeMap<String, Value>), RunError> {
    let settings = cfg.settings;
    let tol = t.tol.unwrap_or(settings.tol);
    let steps = t.steps.unwrap_or(settings.steps);
    let samples = t.samples.unwrap_or(20);
    let mut d = Value::map();

    match t.kind.as_str() {
        "curvature" => {
            let gamma = need(&cfg.connection, id, "a [connection] section")?;
            let x = need_field(&t.x, id, "x")?;
            let f = need_field(&t.f, id, "f")?;
            let r = connection::curvature_coeffs(gamma, &x, &f).map_err(|e| numeric(id, e))?;
            let mut asym = 0.0f64;
            let coeffs: Vec<Value> = r
                .iter()
                .map(|per_alpha| {
                    for (mu, row) in per_alpha.iter().enumerate() {
                        for (nu, &v) in row.iter().enumerate() {
                            asym = asym.max((v + per_alpha[nu][mu]).abs());
                        }
                    }
                    matrix_value(per_alpha)
                })
                .collect();
            let finite = r
                .iter()
                .all(|pa| pa.iter().all(|row| all_finite(row)));
            d.insert("coeffs".into(), Value::List(coeffs));
            d.insert("antisymmetry_residual".into(), Value::Num(asym));
            Ok((finite && asym <= 1e-12, d))
        }
        "check-identity" => {
            let gamma = need(&cfg.connection, id, "a [connection] section")?;
            let section = need(&cfg.section, id, "a [section] section")?;
            let (xf, yf) = need(&cfg.fields, id, "a [fields] section")?;
            let x = need_field(&t.x, id, "x")?;
            let r = connection::curvature_identity_residual(gamma, section, xf, yf, &x, tol)
                .map_err(|e| numeric(id, e))?;
            d.insert("max_residual".into(), Value::Num(r.max_residual));
            d.insert("tol".into(), Value::Num(r.tol));
            Ok((r.pass, d))
        }
        "check-linear" => {
            let gamma = need(&cfg.connection, id, "a [connection] section")?;
            let r = connection::is_linear(gamma, samples, settings.seed, tol)
                .map_err(|e| numeric(id, e))?;
            d.insert("max_deviation".into(), Value::Num(r.max_deviation));
            d.insert("tol".into(), Value::Num(r.tol));
            d.insert("linear".into(), Value::Bool(r.linear.is_some()));
            Ok((r.linear.is_some(), d))
        }
        "check-principal-axiom" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let r = crate::principal::check_principal_axiom(gauge, samples, settings.seed)
                .map_err(|e| numeric(id, e))?;
            d.insert("max_residual".into(), Value::Num(r.max_residual));
            d.insert("tol".into(), Value::Num(r.tol));
            Ok((r.pass, d))
        }
        "gauge-covariance" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let phi_src = need_field(&t.phi, id, "phi")?;
            let vars = gauge.base_vars();
            let allowed: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            let phi: Expr = crate::expr::parse_expr(&phi_src, &allowed)
                .map_err(|e| RunError::Config {
                    task: id,
                    msg: format!("bad expression `{phi_src}`: {e}"),
                })?;
            let group = gauge.group();
            let gt = match group.kind {
                crate::liegroup::GroupKind::U1 => GaugeTransformation::u1_phase(vars.clone(), phi),
                crate::liegroup::GroupKind::SO3 => {
                    GaugeTransformation::so3_about_z(vars.clone(), phi)
                }
                _ => {
                    return Err(RunError::Config {
                        task: id,
                        msg: format!(
                            "gauge-covariance supports u1 and so3 groups, not `{}`",
                            group.name
                        ),
                    })
                }
            };
            let transformed = gauge.gauge_transform(&gt);
            let m = gauge.base_dim();
            let dim = group.dim();
            let mut rng = crate::sampling::rng(settings.seed);
            let mut max_res = 0.0f64;
            for _ in 0..samples {
                let x = crate::sampling::point(&mut rng, m, -1.0, 1.0);
                let f_base = gauge.field_strength(&x).map_err(|e| numeric(id, e))?;
                let f_new = transformed.field_strength(&x).map_err(|e| numeric(id, e))?;
                let g_at = gt.element_at(&x).map_err(|e| numeric(id, e))?;
                let g_inv = crate::liegroup::GroupElement {
                    group: group.clone(),
                    mat: g_at
                        .mat
                        .clone()
                        .try_inverse()
                        .ok_or_else(|| numeric(id, "singular gauge transformation"))?,
                };
                for mu in 0..m {
                    for nu in 0..m {
                        let elem = group
                            .algebra_element(f_base[mu][nu].clone())
                            .map_err(|e| numeric(id, e))?;
                        let ad = crate::liegroup::adjoint(&g_inv, &elem)
                            .map_err(|e| numeric(id, e))?;
                        for a in 0..dim {
                            max_res = max_res.max((f_new[mu][nu][a] - ad.coords[a]).abs());
                        }
                    }
                }
            }
            d.insert("max_residual".into(), Value::Num(max_res));
            d.insert("tol".into(), Value::Num(tol));
            Ok((max_res <= tol, d))
        }
        "induce" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let gens = need(&cfg.gens, id, "an [action] section")?;
            let induced =
                associate::induce_connection(gauge, gens).map_err(|e| numeric(id, e))?;
            let x = need_field(&t.x, id, "x")?;
            let f = need_field(&t.f, id, "f")?;
            let g = induced.gamma_at(&x, &f).map_err(|e| numeric(id, e))?;
            let finite = g.iter().all(|row| all_finite(row));
            d.insert("gamma".into(), matrix_value(&g));
            Ok((finite, d))
        }
        "universality" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let gens = need(&cfg.gens, id, "an [action] section")?;
            let r = associate::universality_check(gauge, gens, samples, settings.seed, tol)
                .map_err(|e| numeric(id, e))?;
            d.insert("max_residual".into(), Value::Num(r.max_residual));
            d.insert("tol".into(), Value::Num(r.tol));
            Ok((r.pass, d))
        }
        "product-check" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let gens = need(&cfg.gens, id, "an [action] section")?;
            let r = associate::product_preservation_check(
                gauge,
                gens,
                gens,
                samples,
                settings.seed,
            )
            .map_err(|e| numeric(id, e))?;
            d.insert("max_residual".into(), Value::Num(r.max_residual));
            d.insert("tol".into(), Value::Num(r.tol));
            Ok((r.pass, d))
        }
        "candidate-check" => {
            let linear = need(&cfg.linear, id, "a [linear] section")?;
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let candidate = need(&cfg.candidate, id, "a [candidate] section")?;
            let r = associate::check_association_candidate(
                linear,
                gauge,
                candidate,
                samples,
                settings.seed,
                tol,
            )
            .map_err(|e| numeric(id, e))?;
            for (name, part) in [
                ("parallel", &r.parallel),
                ("representation", &r.representation),
                ("curvature", &r.curvature),
            ] {
                let mut m = Value::map();
                m.insert("max_residual".into(), Value::Num(part.max_residual));
                m.insert("pass".into(), Value::Bool(part.pass));
                d.insert(name.into(), Value::Map(m));
            }
            Ok((r.pass, d))
        }
        "transport" => {
            let gamma = need(&cfg.connection, id, "a [connection] section")?;
            let curve = curve_for(cfg, id, t)?;
            let f0 = need_field(&t.f0, id, "f0")?;
            let r = transport::parallel_transport_fiber(gamma, curve, &f0, steps)
                .map_err(|e| numeric(id, e))?;
            d.insert("f".into(), Value::num_list(&r.f));
            d.insert("error_estimate".into(), Value::Num(r.error_estimate));
            Ok((all_finite(&r.f), d))
        }
        "holonomy" => {
            let curve = curve_for(cfg, id, t)?;
            if let Some(gamma) = &cfg.connection {
                let h = transport::holonomy_loop(gamma, curve, steps)
                    .map_err(|e| numeric(id, e))?;
                let rows: Vec<Vec<f64>> = (0..h.matrix.nrows())
                    .map(|i| (0..h.matrix.ncols()).map(|j| h.matrix[(i, j)]).collect())
                    .collect();
                d.insert("matrix".into(), matrix_value(&rows));
                d.insert("error_estimate".into(), Value::Num(h.error_estimate));
                Ok((rows.iter().all(|r| all_finite(r)), d))
            } else {
                let gauge = need(&cfg.gauge, id, "a [connection] or [gauge] section")?;
                let h = transport::group_holonomy_loop(gauge, curve, steps)
                    .map_err(|e| numeric(id, e))?;
                let rows: Vec<Vec<f64>> = (0..h.g.mat.nrows())
                    .map(|i| (0..h.g.mat.ncols()).map(|j| h.g.mat[(i, j)]).collect())
                    .collect();
                d.insert("matrix".into(), matrix_value(&rows));
                d.insert("error_estimate".into(), Value::Num(h.error_estimate));
                d.insert(
                    "membership_residual".into(),
                    Value::Num(h.g.membership_residual()),
                );
                Ok((rows.iter().all(|r| all_finite(r)), d))
            }
        }
        "flux" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let a = need_field(&t.a, id, "a")?;
            let mu = need_field(&t.mu, id, "mu")?;
            let nu = need_field(&t.nu, id, "nu")?;
            if a == 0 || mu == 0 || nu == 0 {
                return Err(RunError::Config {
                    task: id,
                    msg: "a, mu, nu are 1-based indices".into(),
                });
            }
            let rect = need_field(&t.rect, id, "rect")?;
            if rect.len() != 4 {
                return Err(RunError::Config {
                    task: id,
                    msg: "rect must be [u0, u1, v0, v1]".into(),
                });
            }
            let divs = t.divs.unwrap_or(64);
            let base = t.x.clone().unwrap_or_else(|| vec![0.0; gauge.base_dim()]);
            let total = transport::flux(
                gauge,
                a - 1,
                mu - 1,
                nu - 1,
                &base,
                [[rect[0], rect[1]], [rect[2], rect[3]]],
                divs,
            )
            .map_err(|e| numeric(id, e))?;
            d.insert("flux".into(), Value::Num(total));
            Ok((total.is_finite(), d))
        }
        "reproduce" => {
            let gauge = need(&cfg.gauge, id, "a [gauge] section")?;
            let curve = curve_for(cfg, id, t)?;
            let r = associate::reproducing_check(gauge, curve, steps)
                .map_err(|e| numeric(id, e))?;
            d.insert("max_residual".into(), Value::Num(r.max_residual));
            d.insert("tol".into(), Value::Num(r.tol));
            Ok((r.pass, d))
        }
        other => Err(RunError::Config {
            task: id,
            msg: format!("unknown task kind `{other}`"),
        }),
    }
}

pub fn run_config(cfg: &RunConfig) -> Result<Report, RunError> {
    let mut report = Report::default();
    for (id, t) in &cfg.tasks {
        let start = Instant::now();
        let (pass, detail) = run_task(cfg, *id, t)?;
        report.tasks.push(TaskReport {
            id: *id,
            kind: t.kind.clone(),
            pass,
            detail,
            elapsed: start.elapsed(),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "gaugekit", about = "Connection and curvature checks on fiber bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the tasks of a config file and print a report.
    Run {
        config: std::path::PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Validate a config file without running anything.
    Check { config: std::path::PathBuf },
}

fn load(path: &std::path::Path, overrides: &RunSection) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let raw = config::parse_config(&text).map_err(|e| e.to_string())?;
    config::build(&raw, overrides).map_err(|e| e.to_string())
}

pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Check { config } => match load(&config, &RunSection::default()) {
            Ok(cfg) => {
                println!("ok: {} task(s)", cfg.tasks.len());
                0
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                2
            }
        },
        Command::Run {
            config,
            seed,
            tol,
            steps,
            format,
            out,
        } => {
            let overrides = RunSection { seed, tol, steps };
            let cfg = match load(&config, &overrides) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return 2;
                }
            };
            let report = match run_config(&cfg) {
                Ok(r) => r,
                Err(e @ RunError::Config { .. }) => {
                    eprintln!("error: {e}");
                    return 2;
                }
                Err(e @ RunError::Numeric { .. }) => {
                    eprintln!("numeric abort: {e}");
                    return 3;
                }
            };
            let rendered = match format {
                Format::Text => report.text(),
                Format::Structured => report.structured(),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 3;
                    }
                }
                None => print!("{rendered}"),
            }
            if report.all_passed() {
                0
            } else {
                1
            }
        }
    }
}
