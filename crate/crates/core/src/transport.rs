//! Parallel transport along curves by fixed-step RK4, holonomy of loops,
//! and surface flux of a field strength by composite Simpson quadrature.
//!
//! Transport ODEs: `fdot = -Gamma(x(t), f) xdot` on a fiber bundle and
//! `gdot = -A(xdot) g` on a trivialized principal bundle. Error estimates
//! come from Richardson comparison of a full-step and half-step run.

use crate::connection::{ChristoffelField, ConnectionError};
use crate::expr::{Expr, Scalar};
use crate::liegroup::GroupElement;
use crate::principal::{GaugeField, PrincipalError};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("curve is not closed (endpoint deviation {dev:e} > tol {tol:e})")]
    NotClosed { dev: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step count must be positive")]
    ZeroSteps,
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Principal(#[from] PrincipalError),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
}

/// Parametrized curve in the base, one expression per coordinate over `t`.
#[derive(Debug, Clone)]
pub struct Curve {
    pub comps: Vec<Expr>,
    pub t0: f64,
    pub t1: f64,
}

impl Curve {
    pub fn new(comps: Vec<Expr>, t0: f64, t1: f64) -> Self {
        Curve { comps, t0, t1 }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn point_at(&self, t: f64) -> Result<Vec<f64>, TransportError> {
        let vars = vec!["t".to_string()];
        self.comps
            .iter()
            .map(|c| c.eval_slice(&vars, &[t]).map_err(Into::into))
            .collect()
    }

    /// Exact velocity via a dual seed on `t`.
    pub fn velocity_at(&self, t: f64) -> Result<Vec<f64>, TransportError> {
        let vars = vec!["t".to_string()];
        self.comps
            .iter()
            .map(|c| {
                c.eval_slice(&vars, &[t.lift_seeded()])
                    .map(|d| d.eps)
                    .map_err(Into::into)
            })
            .collect()
    }

    pub fn is_closed(&self, tol: f64) -> Result<bool, TransportError> {
        let a = self.point_at(self.t0)?;
        let b = self.point_at(self.t1)?;
        let dev = a
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        Ok(dev <= tol)
    }
}

/// Classic RK4 with fixed steps over `[t0, t1]`.
fn rk4<E>(
    mut rhs: impl FnMut(f64, &[f64]) -> Result<Vec<f64>, E>,
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Vec<f64>, E> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let n = y.len();
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &y)?;
        let y2: Vec<f64> = (0..n).map(|j| y[j] + 0.5 * h * k1[j]).collect();
        let k2 = rhs(t + 0.5 * h, &y2)?;
        let y3: Vec<f64> = (0..n).map(|j| y[j] + 0.5 * h * k2[j]).collect();
        let k3 = rhs(t + 0.5 * h, &y3)?;
        let y4: Vec<f64> = (0..n).map(|j| y[j] + h * k3[j]).collect();
        let k4 = rhs(t + h, &y4)?;
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct FiberTransport {
    pub f: Vec<f64>,
    /// Richardson estimate `|y_h - y_{h/2}| / 15` of the local error.
    pub error_estimate: f64,
}

/// Transport a fiber point along the curve: `fdot = -Gamma(x(t), f) xdot`.
/// Returns the half-step solution with a Richardson error estimate.
pub fn parallel_transport_fiber(
    gamma: &ChristoffelField,
    curve: &Curve,
    f0: &[f64],
    steps: usize,
) -> Result<FiberTransport, TransportError> {
    if steps == 0 {
        return Err(TransportError::ZeroSteps);
    }
    if f0.len() != gamma.fiber_dim() {
        return Err(TransportError::DimensionMismatch {
            expected: gamma.fiber_dim(),
            got: f0.len(),
        });
    }
    let rhs = |t: f64, f: &[f64]| -> Result<Vec<f64>, TransportError> {
        let x = curve.point_at(t)?;
        let v = curve.velocity_at(t)?;
        let g = gamma.gamma_at(&x, f)?;
        Ok((0..f.len())
            .map(|alpha| -g[alpha].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    };
    let coarse = rk4(rhs, f0, curve.t0, curve.t1, steps)?;
    let fine = rk4(rhs, f0, curve.t0, curve.t1, 2 * steps)?;
    let err = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / 15.0;
    Ok(FiberTransport {
        f: fine,
        error_estimate: err,
    })
}

#[derive(Debug, Clone)]
pub struct GroupTransport {
    pub g: GroupElement,
    pub error_estimate: f64,
    /// Largest membership drift seen before projection kicked in.
    pub max_drift: f64,
}

/// Transport a group element along the curve: `gdot = -A(xdot) g`, with the
/// iterate projected back onto the group whenever its membership residual
/// exceeds `1e-12`.
pub fn group_transport(
    gauge: &GaugeField,
    curve: &Curve,
    g0: &GroupElement,
    steps: usize,
) -> Result<GroupTransport, TransportError> {
    if steps == 0 {
        return Err(TransportError::ZeroSteps);
    }
    let group = gauge.group();
    let k = group.k;
    let flat = |mat: &DMatrix<f64>| -> Vec<f64> {
        let mut v = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                v.push(mat[(i, j)]);
            }
        }
        v
    };
    let unflat = |v: &[f64]| -> DMatrix<f64> {
        DMatrix::from_fn(k, k, |i, j| v[i * k + j])
    };
    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>, TransportError> {
        let x = curve.point_at(t)?;
        let v = curve.velocity_at(t)?;
        let coords = gauge.coords_at(&x)?;
        let mut pulled = vec![0.0; group.dim()];
        for (mu, &vel) in v.iter().enumerate() {
            for a in 0..group.dim() {
                pulled[a] += coords[mu][a] * vel;
            }
        }
        let a_mat = group.matrix_of(&pulled);
        let g = unflat(y);
        Ok(flat(&(-a_mat * g)))
    };

    let run = |steps: usize| -> Result<(Vec<f64>, f64), TransportError> {
        let h = (curve.t1 - curve.t0) / steps as f64;
        let mut y = flat(&g0.mat);
        let mut max_drift = 0.0f64;
        for i in 0..steps {
            let t = curve.t0 + i as f64 * h;
            y = rk4(rhs, &y, t, t + h, 1)?;
            let elem = GroupElement {
                group: group.clone(),
                mat: unflat(&y),
            };
            let drift = elem.membership_residual();
            max_drift = max_drift.max(drift);
            if drift > 1e-12 {
                y = flat(&elem.project_to_group().mat);
            }
        }
        Ok((y, max_drift))
    };
    let (coarse, _) = run(steps)?;
    let (fine, max_drift) = run(2 * steps)?;
    let err = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / 15.0;
    Ok(GroupTransport {
        g: GroupElement {
            group: group.clone(),
            mat: unflat(&fine),
        },
        error_estimate: err,
        max_drift,
    })
}

pub const LOOP_CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Holonomy {
    /// Holonomy of the loop as a fiber-to-fiber linear map, columns the
    /// transports of the standard basis vectors.
    pub matrix: DMatrix<f64>,
    pub error_estimate: f64,
}

/// Holonomy of a closed loop for a fiberwise linear connection, assembled
/// from basis transports. The loop must close to within `1e-9`.
pub fn holonomy_loop(
    gamma: &ChristoffelField,
    curve: &Curve,
    steps: usize,
) -> Result<Holonomy, TransportError> {
    let a = curve.point_at(curve.t0)?;
    let b = curve.point_at(curve.t1)?;
    let dev = a
        .iter()
        .zip(&b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if dev > LOOP_CLOSURE_TOL {
        return Err(TransportError::NotClosed {
            dev,
            tol: LOOP_CLOSURE_TOL,
        });
    }
    let n = gamma.fiber_dim();
    let mut mat = DMatrix::zeros(n, n);
    let mut err = 0.0f64;
    for omega in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == omega { 1.0 } else { 0.0 }).collect();
        let t = parallel_transport_fiber(gamma, curve, &e, steps)?;
        for alpha in 0..n {
            mat[(alpha, omega)] = t.f[alpha];
        }
        err = err.max(t.error_estimate);
    }
    Ok(Holonomy {
        matrix: mat,
        error_estimate: err,
    })
}

/// Holonomy of a closed loop on the principal bundle: transport of the
/// identity element.
pub fn group_holonomy_loop(
    gauge: &GaugeField,
    curve: &Curve,
    steps: usize,
) -> Result<GroupTransport, TransportError> {
    let a = curve.point_at(curve.t0)?;
    let b = curve.point_at(curve.t1)?;
    let dev = a
        .iter()
        .zip(&b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if dev > LOOP_CLOSURE_TOL {
        return Err(TransportError::NotClosed {
            dev,
            tol: LOOP_CLOSURE_TOL,
        });
    }
    let id = gauge.group().identity_element();
    group_transport(gauge, curve, &id, steps)
}

/// Flux of the field-strength coefficient `F_munu^a` over the coordinate
/// rectangle `[u0, u1] x [v0, v1]` in base directions `(mu, nu)`, by
/// composite Simpson quadrature with `divs` subdivisions per axis (rounded
/// up to even). Base coordinates other than `mu, nu` are held at `base`.
#[allow(clippy::too_many_arguments)]
pub fn flux(
    gauge: &GaugeField,
    a: usize,
    mu: usize,
    nu: usize,
    base: &[f64],
    rect: [[f64; 2]; 2],
    divs: usize,
) -> Result<f64, TransportError> {
    let n = divs.max(2) + divs % 2;
    let [ulim, vlim] = rect;
    let hu = (ulim[1] - ulim[0]) / n as f64;
    let hv = (vlim[1] - vlim[0]) / n as f64;
    let weight = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n {
        let u = ulim[0] + i as f64 * hu;
        for j in 0..=n {
            let v = vlim[0] + j as f64 * hv;
            let mut x = base.to_vec();
            x[mu] = u;
            x[nu] = v;
            let f = gauge.field_strength(&x)?;
            total += weight(i) * weight(j) * f[mu][nu][a];
        }
    }
    Ok(total * hu * hv / 9.0)
}
