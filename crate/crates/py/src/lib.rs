//! Python bindings: expression evaluation with exact derivatives, explicit
//! and induced connections, matrix Lie groups, gauge fields with transport
//! and flux, and the config runner.

use gaugekit::associate::{induce_connection, RepresentationMatrices};
use gaugekit::bundle::BundleChart;
use gaugekit::connection::{curvature_coeffs, is_linear, ChristoffelField};
use gaugekit::expr::{parse_expr, Expr, Scalar};
use gaugekit::liegroup::{exp as group_exp, MatrixLieGroup};
use gaugekit::principal::GaugeField as CoreGaugeField;
use gaugekit::transport::{
    flux as core_flux, group_transport, holonomy_loop, parallel_transport_fiber, Curve,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_all(srcs: &[String], vars: &[String]) -> PyResult<Vec<Expr>> {
    let allowed: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    srcs.iter().map(|s| parse_expr(s, &allowed).map_err(err)).collect()
}

fn matrix_rows(mat: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)]).collect())
        .collect()
}

/// A parsed scalar expression over named variables.
#[pyclass(name = "Expression")]
struct PyExpression {
    expr: Expr,
    vars: Vec<String>,
}

#[pymethods]
impl PyExpression {
    #[new]
    fn new(src: &str, vars: Vec<String>) -> PyResult<Self> {
        let allowed: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let expr = parse_expr(src, &allowed).map_err(err)?;
        Ok(PyExpression { expr, vars })
    }

    fn eval(&self, vals: Vec<f64>) -> PyResult<f64> {
        self.expr.eval_slice(&self.vars, &vals).map_err(err)
    }

    /// Exact gradient via forward-mode duals, one seeded pass per variable.
    fn grad(&self, vals: Vec<f64>) -> PyResult<Vec<f64>> {
        (0..self.vars.len())
            .map(|i| {
                let seeded: Vec<gaugekit::expr::D1> = vals
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| if i == j { v.lift_seeded() } else { v.lift() })
                    .collect();
                self.expr
                    .eval_slice(&self.vars, &seeded)
                    .map(|d| d.eps)
                    .map_err(err)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Expression({})", self.expr)
    }
}

/// A matrix Lie group with a fixed algebra basis.
#[pyclass(name = "LieGroup")]
struct PyLieGroup {
    group: Arc<MatrixLieGroup>,
}

#[pymethods]
impl PyLieGroup {
    #[staticmethod]
    fn u1() -> Self {
        PyLieGroup { group: MatrixLieGroup::u1() }
    }

    #[staticmethod]
    fn so3() -> Self {
        PyLieGroup { group: MatrixLieGroup::so3() }
    }

    #[staticmethod]
    fn su2() -> Self {
        PyLieGroup { group: MatrixLieGroup::su2() }
    }

    #[staticmethod]
    fn gl(n: usize) -> Self {
        PyLieGroup { group: MatrixLieGroup::gl(n) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.group.dim()
    }

    #[getter]
    fn name(&self) -> String {
        self.group.name.clone()
    }

    /// `exp(t X)` for algebra coordinates `coords`, as a matrix.
    fn exp(&self, coords: Vec<f64>, t: f64) -> PyResult<Vec<Vec<f64>>> {
        let x = self.group.algebra_element(coords).map_err(err)?;
        Ok(matrix_rows(&group_exp(&x, t).mat))
    }

    /// Lie bracket in algebra coordinates.
    fn bracket(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let a = self.group.algebra_element(x).map_err(err)?;
        let b = self.group.algebra_element(y).map_err(err)?;
        Ok(gaugekit::liegroup::bracket(&a, &b).map_err(err)?.coords)
    }

    fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        self.group.structure.clone()
    }
}

fn make_curve(comps: Vec<String>, t0: f64, t1: f64) -> PyResult<Curve> {
    let exprs = parse_all(&comps, &["t".to_string()])?;
    Ok(Curve::new(exprs, t0, t1))
}

/// A connection on a fiber bundle in chart coordinates `x1.. / f1..`.
#[pyclass(name = "Connection")]
struct PyConnection {
    field: ChristoffelField,
}

#[pymethods]
impl PyConnection {
    /// Explicit Christoffel symbols `gamma[alpha][mu]` as expression strings
    /// over the chart variables.
    #[new]
    fn new(base_dim: usize, fiber_dim: usize, gamma: Vec<Vec<String>>) -> PyResult<Self> {
        let chart = BundleChart::standard(base_dim, fiber_dim).map_err(err)?;
        let vars = chart.all_vars();
        let exprs = gamma
            .iter()
            .map(|row| parse_all(row, &vars))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyConnection {
            field: ChristoffelField::explicit(chart, exprs).map_err(err)?,
        })
    }

    #[getter]
    fn base_dim(&self) -> usize {
        self.field.base_dim()
    }

    #[getter]
    fn fiber_dim(&self) -> usize {
        self.field.fiber_dim()
    }

    fn gamma_at(&self, x: Vec<f64>, f: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.field.gamma_at(&x, &f).map_err(err)
    }

    /// Curvature coefficients `R[alpha][mu][nu]` at a point.
    fn curvature(&self, x: Vec<f64>, f: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        curvature_coeffs(&self.field, &x, &f).map_err(err)
    }

    /// Parallel transport of `f0` along the curve `x(t)`; returns the final
    /// fiber point and a Richardson error estimate.
    #[pyo3(signature = (comps, t0, t1, f0, steps = 64))]
    fn transport(
        &self,
        comps: Vec<String>,
        t0: f64,
        t1: f64,
        f0: Vec<f64>,
        steps: usize,
    ) -> PyResult<(Vec<f64>, f64)> {
        let curve = make_curve(comps, t0, t1)?;
        let t = parallel_transport_fiber(&self.field, &curve, &f0, steps).map_err(err)?;
        Ok((t.f, t.error_estimate))
    }

    /// Holonomy matrix of a chart-closed loop (fiberwise linear connections).
    #[pyo3(signature = (comps, t0, t1, steps = 64))]
    fn holonomy(
        &self,
        comps: Vec<String>,
        t0: f64,
        t1: f64,
        steps: usize,
    ) -> PyResult<Vec<Vec<f64>>> {
        let curve = make_curve(comps, t0, t1)?;
        let h = holonomy_loop(&self.field, &curve, steps).map_err(err)?;
        Ok(matrix_rows(&h.matrix))
    }

    /// Sampling-based linearity verdict: `(is_linear, max_deviation)`.
    #[pyo3(signature = (samples = 30, seed = 0, tol = 1e-9))]
    fn check_linear(&self, samples: usize, seed: u64, tol: f64) -> PyResult<(bool, f64)> {
        let r = is_linear(&self.field, samples, seed, tol).map_err(err)?;
        Ok((r.linear.is_some(), r.max_deviation))
    }
}

/// A local gauge field `A_mu(x)` in algebra coordinates.
#[pyclass(name = "GaugeField")]
struct PyGaugeField {
    gauge: CoreGaugeField,
}

#[pymethods]
impl PyGaugeField {
    /// `comps[mu][a]`: coefficient expressions over `x1..xm`.
    #[new]
    fn new(group: &PyLieGroup, base_dim: usize, comps: Vec<Vec<String>>) -> PyResult<Self> {
        let vars: Vec<String> = (1..=base_dim).map(|i| format!("x{i}")).collect();
        let exprs = comps
            .iter()
            .map(|row| parse_all(row, &vars))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyGaugeField {
            gauge: CoreGaugeField::explicit(group.group.clone(), vars, exprs).map_err(err)?,
        })
    }

    /// Field strength `F[mu][nu][a]` at a point.
    fn field_strength(&self, x: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        self.gauge.field_strength(&x).map_err(err)
    }

    /// Transport the identity group element along a curve; returns the
    /// resulting matrix and a Richardson error estimate.
    #[pyo3(signature = (comps, t0, t1, steps = 64))]
    fn holonomy(
        &self,
        comps: Vec<String>,
        t0: f64,
        t1: f64,
        steps: usize,
    ) -> PyResult<(Vec<Vec<f64>>, f64)> {
        let curve = make_curve(comps, t0, t1)?;
        let id = self.gauge.group().identity_element();
        let t = group_transport(&self.gauge, &curve, &id, steps).map_err(err)?;
        Ok((matrix_rows(&t.g.mat), t.error_estimate))
    }

    /// Flux of `F^a_{mu nu}` over a coordinate rectangle (0-based indices).
    #[pyo3(signature = (a, mu, nu, rect, base = None, divs = 64))]
    fn flux(
        &self,
        a: usize,
        mu: usize,
        nu: usize,
        rect: (f64, f64, f64, f64),
        base: Option<Vec<f64>>,
        divs: usize,
    ) -> PyResult<f64> {
        let base = base.unwrap_or_else(|| vec![0.0; self.gauge.base_dim()]);
        core_flux(
            &self.gauge,
            a,
            mu,
            nu,
            &base,
            [[rect.0, rect.1], [rect.2, rect.3]],
            divs,
        )
        .map_err(err)
    }

    /// Connection induced on R^n by the defining representation.
    fn induce_standard(&self) -> PyResult<PyConnection> {
        let rho = RepresentationMatrices::standard(self.gauge.group()).map_err(err)?;
        let gens = rho.generators().map_err(err)?;
        Ok(PyConnection {
            field: induce_connection(&self.gauge, &gens).map_err(err)?,
        })
    }

    /// Connection-form axiom check: `(pass, max_residual)`.
    #[pyo3(signature = (samples = 5, seed = 0))]
    fn check_axiom(&self, samples: usize, seed: u64) -> PyResult<(bool, f64)> {
        let r = gaugekit::principal::check_principal_axiom(&self.gauge, samples, seed)
            .map_err(err)?;
        Ok((r.pass, r.max_residual))
    }
}

/// Run a TOML config; returns `(all_passed, report_text)` with the report in
/// the canonical structured format.
#[pyfunction]
fn run_config_text(text: &str) -> PyResult<(bool, String)> {
    let raw = gaugekit::config::parse_config(text).map_err(err)?;
    let cfg = gaugekit::config::build(&raw, &gaugekit::config::RunSection::default())
        .map_err(err)?;
    let report = gaugekit::runner::run_config(&cfg).map_err(err)?;
    Ok((report.all_passed(), report.structured()))
}

#[pymodule]
fn gaugekit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpression>()?;
    m.add_class::<PyLieGroup>()?;
    m.add_class::<PyConnection>()?;
    m.add_class::<PyGaugeField>()?;
    m.add_function(wrap_pyfunction!(run_config_text, m)?)?;
    Ok(())
}
