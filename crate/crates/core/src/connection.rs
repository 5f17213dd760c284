//! Non-linear connections in local coordinates: Christoffel symbols
//! `Gamma^alpha_mu(x, f)`, vertical projection and horizontal lift,
//! covariant derivatives of sections, curvature, the vertical-lift
//! connection on the vertical bundle, and the commutator identity that
//! realizes curvature through iterated covariant derivatives.
//!
//! Sign conventions: horizontal vectors satisfy `fdot = -Gamma xdot`,
//! `(D_mu s)^alpha = d_mu s^alpha + Gamma^alpha_mu(x, s(x))`, and
//! `R^alpha_munu = d_mu Gamma^alpha_nu - d_nu Gamma^alpha_mu
//!  + sum_beta (Gamma^beta_nu dGamma^alpha_mu/df^beta
//!            - Gamma^beta_mu dGamma^alpha_nu/df^beta)`.

use crate::bundle::{
    difference, lie_bracket, theta, BundleChart, BundleError, PointOnTotalSpace,
    SecondVerticalVector, SectionField, TangentVector, VectorField, VerticalVector,
    DEFAULT_TOL_BASE,
};
use crate::expr::{EvalError, Expr, Scalar};
use crate::liegroup::{ActionGenerators, LieError};
use crate::principal::{GaugeField, PrincipalError};
use nalgebra::DMatrix;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("connection is not linear in the fiber (max deviation {max_dev:e} > tol {tol:e})")]
    NotLinear { max_dev: f64, tol: f64 },
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Principal(#[from] PrincipalError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Christoffel symbols of a (generally non-linear) connection, evaluatable
/// over any scalar type. Derived connections are deferred nodes rather than
/// expression trees, so every derivative of them stays exact.
#[derive(Debug, Clone)]
pub enum ChristoffelField {
    Explicit {
        chart: BundleChart,
        /// `exprs[alpha][mu]` over the chart's base and fiber variables.
        exprs: Vec<Vec<Expr>>,
    },
    /// `Gamma^alpha_mu(x, f) = (A_mu(x) *_inf f)^alpha` through the
    /// infinitesimal action of the structure group.
    Induced {
        gauge: GaugeField,
        gens: ActionGenerators,
    },
    /// The induced connection on the vertical bundle, with fiber `(f, df)`.
    VerticalLift { base: Box<ChristoffelField> },
    /// Product connection on a fibered product over the same base.
    Product {
        a: Box<ChristoffelField>,
        b: Box<ChristoffelField>,
    },
    /// `Gamma^alpha_mu(x, f) = Gamma^alpha_{mu omega}(x) f^omega`.
    LinearEmbed { linear: Arc<LinearChristoffel> },
}

impl ChristoffelField {
    pub fn explicit(chart: BundleChart, exprs: Vec<Vec<Expr>>) -> Result<Self, ConnectionError> {
        if exprs.len() != chart.fiber_dim() {
            return Err(ConnectionError::DimensionMismatch {
                expected: chart.fiber_dim(),
                got: exprs.len(),
            });
        }
        for row in &exprs {
            if row.len() != chart.base_dim() {
                return Err(ConnectionError::DimensionMismatch {
                    expected: chart.base_dim(),
                    got: row.len(),
                });
            }
        }
        Ok(ChristoffelField::Explicit { chart, exprs })
    }

    pub fn induced(gauge: GaugeField, gens: ActionGenerators) -> Self {
        ChristoffelField::Induced { gauge, gens }
    }

    pub fn base_dim(&self) -> usize {
        match self {
            ChristoffelField::Explicit { chart, .. } => chart.base_dim(),
            ChristoffelField::Induced { gauge, .. } => gauge.base_dim(),
            ChristoffelField::VerticalLift { base } => base.base_dim(),
            ChristoffelField::Product { a, .. } => a.base_dim(),
            ChristoffelField::LinearEmbed { linear } => linear.base_vars.len(),
        }
    }

    pub fn fiber_dim(&self) -> usize {
        match self {
            ChristoffelField::Explicit { chart, .. } => chart.fiber_dim(),
            ChristoffelField::Induced { gens, .. } => gens.fiber_dim(),
            ChristoffelField::VerticalLift { base } => 2 * base.fiber_dim(),
            ChristoffelField::Product { a, b } => a.fiber_dim() + b.fiber_dim(),
            ChristoffelField::LinearEmbed { linear } => linear.fiber_dim,
        }
    }

    /// Chart of the total space the connection lives on. Derived
    /// connections relabel fiber variables to the standard `f1..fn`.
    pub fn chart(&self) -> BundleChart {
        match self {
            ChristoffelField::Explicit { chart, .. } => chart.clone(),
            ChristoffelField::Induced { gauge, gens } => {
                BundleChart::new(gauge.base_vars(), gens.fiber_vars.clone()).expect("valid chart")
            }
            ChristoffelField::VerticalLift { base } => {
                let inner = base.chart();
                let mut fiber = inner.fiber_vars.clone();
                fiber.extend(inner.fiber_vars.iter().map(|v| format!("d{v}")));
                BundleChart::new(inner.base_vars, fiber).expect("valid chart")
            }
            ChristoffelField::Product { a, b } => {
                let ca = a.chart();
                let n = a.fiber_dim() + b.fiber_dim();
                let fiber = (1..=n).map(|i| format!("f{i}")).collect();
                BundleChart::new(ca.base_vars, fiber).expect("valid chart")
            }
            ChristoffelField::LinearEmbed { linear } => BundleChart::new(
                linear.base_vars.clone(),
                (1..=linear.fiber_dim).map(|i| format!("f{i}")).collect(),
            )
            .expect("valid chart"),
        }
    }

    /// `Gamma^alpha_mu(x, f)`, indexed `[alpha][mu]`.
    pub fn gamma_at<T: Scalar>(
        &self,
        x: &[T],
        f: &[T],
    ) -> Result<Vec<Vec<T>>, ConnectionError> {
        match self {
            ChristoffelField::Explicit { chart, exprs } => {
                let vars = chart.all_vars();
                let mut vals = x.to_vec();
                vals.extend_from_slice(f);
                exprs
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| e.eval_slice(&vars, &vals).map_err(Into::into))
                            .collect()
                    })
                    .collect()
            }
            ChristoffelField::Induced { gauge, gens } => {
                let coords = gauge.coords_at(x)?;
                let m = gauge.base_dim();
                let n = gens.fiber_dim();
                let mut out = vec![vec![T::from_f64(0.0); m]; n];
                for (mu, row) in coords.iter().enumerate().take(m) {
                    let acted = gens.act_inf(row, f)?;
                    for alpha in 0..n {
                        out[alpha][mu] = acted[alpha];
                    }
                }
                Ok(out)
            }
            ChristoffelField::VerticalLift { base } => {
                let n = base.fiber_dim();
                let m = base.base_dim();
                let (fb, df) = f.split_at(n);
                let gamma = base.gamma_at(x, fb)?;
                let mut out = vec![vec![T::from_f64(0.0); m]; 2 * n];
                for alpha in 0..n {
                    out[alpha].clone_from_slice(&gamma[alpha]);
                }
                // df-block: sum_beta dGamma^alpha_mu/df^beta df^beta
                for beta in 0..n {
                    let seeded: Vec<T::Lifted> = fb
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| if i == beta { v.lift_seeded() } else { v.lift() })
                        .collect();
                    let xs: Vec<T::Lifted> = x.iter().map(|&v| v.lift()).collect();
                    let dgamma = base.gamma_at(&xs, &seeded)?;
                    for alpha in 0..n {
                        for mu in 0..m {
                            out[n + alpha][mu] = out[n + alpha][mu]
                                + T::lower_eps(dgamma[alpha][mu]) * df[beta];
                        }
                    }
                }
                Ok(out)
            }
            ChristoffelField::Product { a, b } => {
                let (fa, fb) = f.split_at(a.fiber_dim());
                let mut out = a.gamma_at(x, fa)?;
                out.extend(b.gamma_at(x, fb)?);
                Ok(out)
            }
            ChristoffelField::LinearEmbed { linear } => {
                let coeff = linear.coeff_at(x)?;
                let m = linear.base_vars.len();
                let n = linear.fiber_dim;
                let mut out = vec![vec![T::from_f64(0.0); m]; n];
                for alpha in 0..n {
                    for mu in 0..m {
                        for omega in 0..n {
                            out[alpha][mu] =
                                out[alpha][mu] + coeff[alpha][mu][omega] * f[omega];
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Vertical projection of a tangent vector:
/// `(dx, df) -> (0, df^alpha + Gamma^alpha_mu dx^mu)`.
pub fn project(
    gamma: &ChristoffelField,
    v: &TangentVector,
) -> Result<VerticalVector, ConnectionError> {
    let g = gamma.gamma_at(&v.at.x, &v.at.f)?;
    let df = (0..gamma.fiber_dim())
        .map(|alpha| {
            v.df[alpha]
                + g[alpha]
                    .iter()
                    .zip(&v.dx)
                    .map(|(gm, dx)| gm * dx)
                    .sum::<f64>()
        })
        .collect();
    Ok(VerticalVector {
        x: v.at.x.clone(),
        f: v.at.f.clone(),
        df,
    })
}

/// Horizontal lift of a base vector: `df = -Gamma dx`.
pub fn horizontal_lift(
    gamma: &ChristoffelField,
    at: &PointOnTotalSpace,
    dx: &[f64],
) -> Result<TangentVector, ConnectionError> {
    let g = gamma.gamma_at(&at.x, &at.f)?;
    let df = (0..gamma.fiber_dim())
        .map(|alpha| {
            -g[alpha]
                .iter()
                .zip(dx)
                .map(|(gm, d)| gm * d)
                .sum::<f64>()
        })
        .collect();
    Ok(TangentVector {
        at: at.clone(),
        dx: dx.to_vec(),
        df,
    })
}

/// `(D_X s)^alpha = X^mu (d_mu s^alpha + Gamma^alpha_mu(x, s(x)))` over
/// generic scalars, so outer dual seeds can differentiate the whole thing.
pub fn covariant_derivative_at<T: Scalar>(
    gamma: &ChristoffelField,
    s: &SectionField,
    xfield: &VectorField,
    x: &[T],
) -> Result<Vec<T>, ConnectionError> {
    let chart = gamma.chart();
    let f = s.value_at(&chart, x)?;
    let jac = s.jacobian_at(&chart, x)?;
    let g = gamma.gamma_at(x, &f)?;
    let xc = xfield.components_at(&chart, x)?;
    let n = gamma.fiber_dim();
    let m = gamma.base_dim();
    let mut out = vec![T::from_f64(0.0); n];
    for alpha in 0..n {
        for mu in 0..m {
            out[alpha] = out[alpha] + xc[mu] * (jac[alpha][mu] + g[alpha][mu]);
        }
    }
    Ok(out)
}

/// Covariant derivative as a vertical vector at `(x, s(x))`.
pub fn covariant_derivative(
    gamma: &ChristoffelField,
    s: &SectionField,
    xfield: &VectorField,
    x: &[f64],
) -> Result<VerticalVector, ConnectionError> {
    let chart = gamma.chart();
    let f = s.value_at(&chart, x)?;
    let df = covariant_derivative_at(gamma, s, xfield, x)?;
    Ok(VerticalVector {
        x: x.to_vec(),
        f,
        df,
    })
}

/// Curvature coefficients `R^alpha_munu(x, f)`, indexed `[alpha][mu][nu]`.
pub fn curvature_coeffs<T: Scalar>(
    gamma: &ChristoffelField,
    x: &[T],
    f: &[T],
) -> Result<Vec<Vec<Vec<T>>>, ConnectionError> {
    let m = gamma.base_dim();
    let n = gamma.fiber_dim();
    let g = gamma.gamma_at(x, f)?;
    // dgx[mu][alpha][nu] = d_mu Gamma^alpha_nu
    let mut dgx = vec![vec![vec![T::from_f64(0.0); m]; n]; m];
    for mu in 0..m {
        let xs: Vec<T::Lifted> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == mu { v.lift_seeded() } else { v.lift() })
            .collect();
        let fs: Vec<T::Lifted> = f.iter().map(|&v| v.lift()).collect();
        let d = gamma.gamma_at(&xs, &fs)?;
        for alpha in 0..n {
            for nu in 0..m {
                dgx[mu][alpha][nu] = T::lower_eps(d[alpha][nu]);
            }
        }
    }
    // dgf[beta][alpha][mu] = dGamma^alpha_mu / df^beta
    let mut dgf = vec![vec![vec![T::from_f64(0.0); m]; n]; n];
    for beta in 0..n {
        let xs: Vec<T::Lifted> = x.iter().map(|&v| v.lift()).collect();
        let fs: Vec<T::Lifted> = f
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == beta { v.lift_seeded() } else { v.lift() })
            .collect();
        let d = gamma.gamma_at(&xs, &fs)?;
        for alpha in 0..n {
            for mu in 0..m {
                dgf[beta][alpha][mu] = T::lower_eps(d[alpha][mu]);
            }
        }
    }
    let mut r = vec![vec![vec![T::from_f64(0.0); m]; m]; n];
    for alpha in 0..n {
        for mu in 0..m {
            for nu in 0..m {
                let mut acc = dgx[mu][alpha][nu] - dgx[nu][alpha][mu];
                for beta in 0..n {
                    acc = acc + g[beta][nu] * dgf[beta][alpha][mu]
                        - g[beta][mu] * dgf[beta][alpha][nu];
                }
                r[alpha][mu][nu] = acc;
            }
        }
    }
    Ok(r)
}

/// The connection induced on the vertical bundle `VE -> M`, with fiber
/// coordinates `(f, df)`.
pub fn vertical_lift_connection(gamma: &ChristoffelField) -> ChristoffelField {
    ChristoffelField::VerticalLift {
        base: Box::new(gamma.clone()),
    }
}

/// Product connection on the fibered product of two bundles over one base.
pub fn product_connection(
    a: &ChristoffelField,
    b: &ChristoffelField,
) -> Result<ChristoffelField, ConnectionError> {
    if a.base_dim() != b.base_dim() {
        return Err(ConnectionError::DimensionMismatch {
            expected: a.base_dim(),
            got: b.base_dim(),
        });
    }
    Ok(ChristoffelField::Product {
        a: Box::new(a.clone()),
        b: Box::new(b.clone()),
    })
}

/// Iterated covariant derivative `D^vert_X D_Y s` as a point of the second
/// vertical bundle: blocks `(x; s(x); D_Y s; D_X s; delta)` with
/// `delta^alpha = X^mu (d_mu v^alpha + dGamma^alpha_mu/df^beta v^beta)`,
/// `v = D_Y s` — the covariant derivative of the vertical-vector-valued
/// section `x -> (s(x), v(x))` with respect to the vertical-lift connection.
pub fn iterated_covariant_derivative(
    gamma: &ChristoffelField,
    s: &SectionField,
    xfield: &VectorField,
    yfield: &VectorField,
    x: &[f64],
) -> Result<SecondVerticalVector, ConnectionError> {
    let chart = gamma.chart();
    let m = gamma.base_dim();
    let n = gamma.fiber_dim();
    let f = s.value_at(&chart, x)?;
    let v = covariant_derivative_at(gamma, s, yfield, x)?;
    let fvary = covariant_derivative_at(gamma, s, xfield, x)?;
    let xc = xfield.components_at(&chart, x)?;

    // dv[mu][alpha] = d_mu v^alpha with an outer dual seed around the whole
    // covariant derivative
    let mut dv = vec![vec![0.0; n]; m];
    for mu in 0..m {
        let xs: Vec<crate::expr::D1> = x
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == mu { w.lift_seeded() } else { w.lift() })
            .collect();
        let vs = covariant_derivative_at(gamma, s, yfield, &xs)?;
        for alpha in 0..n {
            dv[mu][alpha] = vs[alpha].eps;
        }
    }

    // dGamma^alpha_mu/df^beta at (x, s(x))
    let mut dgf = vec![vec![vec![0.0; m]; n]; n];
    for beta in 0..n {
        let xs: Vec<crate::expr::D1> = x.iter().map(|&w| w.lift()).collect();
        let fs: Vec<crate::expr::D1> = f
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == beta { w.lift_seeded() } else { w.lift() })
            .collect();
        let d = gamma.gamma_at(&xs, &fs)?;
        for alpha in 0..n {
            for mu in 0..m {
                dgf[beta][alpha][mu] = d[alpha][mu].eps;
            }
        }
    }

    let mut delta = vec![0.0; n];
    for alpha in 0..n {
        for mu in 0..m {
            let mut inner = dv[mu][alpha];
            for beta in 0..n {
                inner += dgf[beta][alpha][mu] * v[beta];
            }
            delta[alpha] += xc[mu] * inner;
        }
    }

    Ok(SecondVerticalVector {
        x: x.to_vec(),
        f,
        fdot: v,
        fvary,
        fvarydot: delta,
    })
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Residual of the commutator identity realizing curvature:
/// `(D^vert_X D_Y s - Theta(D^vert_Y D_X s)) - D_{[X,Y]} s - R(X,Y)s = 0`.
pub fn curvature_identity_residual(
    gamma: &ChristoffelField,
    s: &SectionField,
    xfield: &VectorField,
    yfield: &VectorField,
    x: &[f64],
    tol: f64,
) -> Result<IdentityReport, ConnectionError> {
    let chart = gamma.chart();
    let ixy = iterated_covariant_derivative(gamma, s, xfield, yfield, x)?;
    let iyx = iterated_covariant_derivative(gamma, s, yfield, xfield, x)?;
    let second_diff = difference(&ixy, &theta(&iyx), DEFAULT_TOL_BASE.max(tol))?;

    let bracket = lie_bracket(xfield, yfield);
    let dbr = covariant_derivative_at(gamma, s, &bracket, x)?;

    let f = s.value_at(&chart, x)?;
    let r = curvature_coeffs(gamma, x, &f)?;
    let xc = xfield.components_at(&chart, x)?;
    let yc = yfield.components_at(&chart, x)?;

    let mut max_residual = 0.0f64;
    for alpha in 0..gamma.fiber_dim() {
        let mut curv = 0.0;
        for mu in 0..gamma.base_dim() {
            for nu in 0..gamma.base_dim() {
                curv += r[alpha][mu][nu] * xc[mu] * yc[nu];
            }
        }
        let res = second_diff.df[alpha] - dbr[alpha] - curv;
        max_residual = max_residual.max(res.abs());
    }
    Ok(IdentityReport {
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Coefficients of a linear connection on a vector bundle,
/// `Gamma^alpha_{mu omega}(x)`, again as a deferred evaluator.
#[derive(Debug, Clone)]
pub struct LinearChristoffel {
    pub base_vars: Vec<String>,
    pub fiber_dim: usize,
    pub kind: LinearKind,
}

#[derive(Debug, Clone)]
pub enum LinearKind {
    /// `exprs[alpha][mu][omega]` over the base variables.
    Explicit { exprs: Vec<Vec<Vec<Expr>>> },
    /// `Gamma^alpha_{mu omega} = A^a_mu rho_a[alpha][omega]` for a
    /// representation of the structure algebra.
    Rep {
        gauge: GaugeField,
        rho: Vec<DMatrix<f64>>,
    },
    /// Coefficients read off a connection already known to be fiberwise
    /// linear: `Gamma^alpha_{mu omega}(x) = Gamma^alpha_mu(x, e_omega)`.
    FromField { base: Arc<ChristoffelField> },
}

impl LinearChristoffel {
    pub fn explicit(
        base_vars: Vec<String>,
        exprs: Vec<Vec<Vec<Expr>>>,
    ) -> Result<Self, ConnectionError> {
        let n = exprs.len();
        let m = base_vars.len();
        for per_alpha in &exprs {
            if per_alpha.len() != m {
                return Err(ConnectionError::DimensionMismatch {
                    expected: m,
                    got: per_alpha.len(),
                });
            }
            for per_mu in per_alpha {
                if per_mu.len() != n {
                    return Err(ConnectionError::DimensionMismatch {
                        expected: n,
                        got: per_mu.len(),
                    });
                }
            }
        }
        Ok(LinearChristoffel {
            base_vars,
            fiber_dim: n,
            kind: LinearKind::Explicit { exprs },
        })
    }

    /// `coeff[alpha][mu][omega]`.
    pub fn coeff_at<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<Vec<T>>>, ConnectionError> {
        let m = self.base_vars.len();
        let n = self.fiber_dim;
        match &self.kind {
            LinearKind::Explicit { exprs } => exprs
                .iter()
                .map(|per_alpha| {
                    per_alpha
                        .iter()
                        .map(|per_mu| {
                            per_mu
                                .iter()
                                .map(|e| e.eval_slice(&self.base_vars, x).map_err(Into::into))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            LinearKind::Rep { gauge, rho } => {
                let coords = gauge.coords_at(x)?;
                let mut out = vec![vec![vec![T::from_f64(0.0); n]; m]; n];
                for mu in 0..m {
                    for (a, &c) in coords[mu].iter().enumerate() {
                        for alpha in 0..n {
                            for omega in 0..n {
                                out[alpha][mu][omega] = out[alpha][mu][omega]
                                    + c * T::from_f64(rho[a][(alpha, omega)]);
                            }
                        }
                    }
                }
                Ok(out)
            }
            LinearKind::FromField { base } => {
                let mut out = vec![vec![vec![T::from_f64(0.0); n]; m]; n];
                for omega in 0..n {
                    let e_omega: Vec<T> = (0..n)
                        .map(|i| T::from_f64(if i == omega { 1.0 } else { 0.0 }))
                        .collect();
                    let g = base.gamma_at(x, &e_omega)?;
                    for alpha in 0..n {
                        for mu in 0..m {
                            out[alpha][mu][omega] = g[alpha][mu];
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Embed back as a (fiberwise linear) Christoffel field.
    pub fn embed(self: &Arc<Self>) -> ChristoffelField {
        ChristoffelField::LinearEmbed {
            linear: self.clone(),
        }
    }

    /// Classical curvature of the linear connection, as the matrix
    /// `R_munu` with entries `[alpha][omega]`:
    /// `R^alpha_{munu;omega} = d_mu Gamma^alpha_{nu omega}
    ///  - d_nu Gamma^alpha_{mu omega}
    ///  + Gamma^alpha_{mu beta} Gamma^beta_{nu omega}
    ///  - Gamma^alpha_{nu beta} Gamma^beta_{mu omega}`.
    pub fn classical_curvature<T: Scalar>(
        &self,
        x: &[T],
    ) -> Result<Vec<Vec<Vec<Vec<T>>>>, ConnectionError> {
        let m = self.base_vars.len();
        let n = self.fiber_dim;
        let g = self.coeff_at(x)?;
        // dg[mu][alpha][nu][omega] = d_mu Gamma^alpha_{nu omega}
        let mut dg = vec![vec![vec![vec![T::from_f64(0.0); n]; m]; n]; m];
        for mu in 0..m {
            let xs: Vec<T::Lifted> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| if i == mu { v.lift_seeded() } else { v.lift() })
                .collect();
            let d = self.coeff_at(&xs)?;
            for alpha in 0..n {
                for nu in 0..m {
                    for omega in 0..n {
                        dg[mu][alpha][nu][omega] = T::lower_eps(d[alpha][nu][omega]);
                    }
                }
            }
        }
        let mut r = vec![vec![vec![vec![T::from_f64(0.0); n]; n]; m]; m];
        for mu in 0..m {
            for nu in 0..m {
                for alpha in 0..n {
                    for omega in 0..n {
                        let mut acc = dg[mu][alpha][nu][omega] - dg[nu][alpha][mu][omega];
                        for beta in 0..n {
                            acc = acc + g[alpha][mu][beta] * g[beta][nu][omega]
                                - g[alpha][nu][beta] * g[beta][mu][omega];
                        }
                        r[mu][nu][alpha][omega] = acc;
                    }
                }
            }
        }
        Ok(r)
    }
}

#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub max_deviation: f64,
    pub tol: f64,
    pub linear: Option<Arc<LinearChristoffel>>,
}

/// Decide by sampling whether a connection is fiberwise linear; if it is,
/// return its coefficients as an evaluator. Tests `Gamma(x, 0) = 0` and
/// additivity/homogeneity on random fiber pairs.
pub fn is_linear(
    gamma: &ChristoffelField,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LinearityReport, ConnectionError> {
    use rand::Rng;
    let mut rng = crate::sampling::rng(seed);
    let m = gamma.base_dim();
    let n = gamma.fiber_dim();
    let mut max_dev = 0.0f64;
    for _ in 0..samples {
        let x = crate::sampling::point(&mut rng, m, -1.0, 1.0);
        let f = crate::sampling::point(&mut rng, n, -1.5, 1.5);
        let g = crate::sampling::point(&mut rng, n, -1.5, 1.5);
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(p, q)| a * p + b * q).collect();
        let gz = gamma.gamma_at(&x, &vec![0.0; n])?;
        let gf = gamma.gamma_at(&x, &f)?;
        let gg = gamma.gamma_at(&x, &g)?;
        let gc = gamma.gamma_at(&x, &combo)?;
        for alpha in 0..n {
            for mu in 0..m {
                max_dev = max_dev.max(gz[alpha][mu].abs());
                max_dev = max_dev
                    .max((gc[alpha][mu] - a * gf[alpha][mu] - b * gg[alpha][mu]).abs());
            }
        }
    }
    let linear = if max_dev <= tol {
        Some(Arc::new(LinearChristoffel {
            base_vars: gamma.chart().base_vars,
            fiber_dim: n,
            kind: LinearKind::FromField {
                base: Arc::new(gamma.clone()),
            },
        }))
    } else {
        None
    };
    Ok(LinearityReport {
        max_deviation: max_dev,
        tol,
        linear,
    })
}
