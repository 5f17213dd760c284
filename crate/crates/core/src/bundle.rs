//! Charted fiber bundles, sections, tangent and vertical vectors, and the
//! second iterated vertical tangent bundle with its involution, double
//! projection and affine difference.
//!
//! All computations are chart-local. A point of the second vertical bundle
//! is stored as the five blocks `(x; f; fdot; fvary; fvarydot)`, with the
//! base point carried as passive data: chart changes act on the fiber
//! coordinates only.

use crate::expr::{Dual, EvalError, Expr, Scalar};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chart requires base and fiber dimension >= 1")]
    DegenerateChart,
    #[error("duplicate variable name `{0}` in chart")]
    DuplicateVariable(String),
    #[error("second vertical vectors do not share a fiber of the double projection (max deviation {max_dev:e} > tol {tol:e})")]
    BaseMismatch { max_dev: f64, tol: f64 },
    #[error("chart change has singular Jacobian (|det| = {det:e})")]
    SingularJacobian { det: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Local chart on the total space of a fiber bundle: `m` base coordinates
/// and `n` fiber coordinates with their variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleChart {
    pub base_vars: Vec<String>,
    pub fiber_vars: Vec<String>,
}

impl BundleChart {
    /// Standard variable names `x1..xm` and `f1..fn`.
    pub fn standard(m: usize, n: usize) -> Result<Self, BundleError> {
        let base = (1..=m).map(|i| format!("x{i}")).collect();
        let fiber = (1..=n).map(|i| format!("f{i}")).collect();
        Self::new(base, fiber)
    }

    pub fn new(base_vars: Vec<String>, fiber_vars: Vec<String>) -> Result<Self, BundleError> {
        if base_vars.is_empty() || fiber_vars.is_empty() {
            return Err(BundleError::DegenerateChart);
        }
        let mut seen = std::collections::HashSet::new();
        for v in base_vars.iter().chain(fiber_vars.iter()) {
            if !seen.insert(v.clone()) {
                return Err(BundleError::DuplicateVariable(v.clone()));
            }
        }
        Ok(BundleChart {
            base_vars,
            fiber_vars,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base_vars.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_vars.len()
    }

    /// All variable names, base first.
    pub fn all_vars(&self) -> Vec<String> {
        let mut v = self.base_vars.clone();
        v.extend(self.fiber_vars.iter().cloned());
        v
    }

    pub fn check_base(&self, x: &[f64]) -> Result<(), BundleError> {
        if x.len() != self.base_dim() {
            return Err(BundleError::DimensionMismatch {
                expected: self.base_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_fiber(&self, f: &[f64]) -> Result<(), BundleError> {
        if f.len() != self.fiber_dim() {
            return Err(BundleError::DimensionMismatch {
                expected: self.fiber_dim(),
                got: f.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOnTotalSpace {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// Tangent vector at a point of the total space; vertical iff `dx = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub at: PointOnTotalSpace,
    pub dx: Vec<f64>,
    pub df: Vec<f64>,
}

impl TangentVector {
    pub fn is_vertical(&self) -> bool {
        self.dx.iter().all(|&c| c == 0.0)
    }
}

/// Element of the vertical tangent bundle in coordinates `(x, f, df)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalVector {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
}

/// Coordinates `(x; f; fdot; fvary; fvarydot)` of the second iterated
/// vertical tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondVerticalVector {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub fdot: Vec<f64>,
    pub fvary: Vec<f64>,
    pub fvarydot: Vec<f64>,
}

/// Local section as one expression per fiber coordinate, over base variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionField {
    pub comps: Vec<Expr>,
}

impl SectionField {
    pub fn new(comps: Vec<Expr>) -> Self {
        SectionField { comps }
    }

    pub fn value_at<T: Scalar>(
        &self,
        chart: &BundleChart,
        x: &[T],
    ) -> Result<Vec<T>, BundleError> {
        self.comps
            .iter()
            .map(|c| c.eval_slice(&chart.base_vars, x).map_err(Into::into))
            .collect()
    }

    /// Exact Jacobian `d f^alpha / d x^mu` via dual seeds.
    pub fn jacobian_at<T: Scalar>(
        &self,
        chart: &BundleChart,
        x: &[T],
    ) -> Result<Vec<Vec<T>>, BundleError> {
        let m = chart.base_dim();
        let mut jac = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            let mut row = Vec::with_capacity(m);
            for mu in 0..m {
                let seeded: Vec<T::Lifted> = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if i == mu { v.lift_seeded() } else { v.lift() })
                    .collect();
                row.push(T::lower_eps(c.eval_slice(&chart.base_vars, &seeded)?));
            }
            jac.push(row);
        }
        Ok(jac)
    }
}

/// Point `(x, f(x))` and the exact Jacobian of the section there.
pub fn section_jet(
    chart: &BundleChart,
    s: &SectionField,
    x: &[f64],
) -> Result<(PointOnTotalSpace, Vec<Vec<f64>>), BundleError> {
    chart.check_base(x)?;
    let f = s.value_at(chart, x)?;
    let jac = s.jacobian_at(chart, x)?;
    Ok((
        PointOnTotalSpace {
            x: x.to_vec(),
            f,
        },
        jac,
    ))
}

/// Vector field on the base, evaluatable over any scalar type. Lie brackets
/// are kept as a deferred node and expanded pointwise with dual numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorField {
    Expr(Vec<Expr>),
    Bracket(Box<VectorField>, Box<VectorField>),
}

impl VectorField {
    pub fn from_exprs(comps: Vec<Expr>) -> Self {
        VectorField::Expr(comps)
    }

    /// Coordinate field d/dx^mu.
    pub fn coordinate(m: usize, mu: usize) -> Self {
        VectorField::Expr(
            (0..m)
                .map(|i| Expr::constant(if i == mu { 1.0 } else { 0.0 }))
                .collect(),
        )
    }

    pub fn components_at<T: Scalar>(
        &self,
        chart: &BundleChart,
        x: &[T],
    ) -> Result<Vec<T>, BundleError> {
        match self {
            VectorField::Expr(comps) => comps
                .iter()
                .map(|c| c.eval_slice(&chart.base_vars, x).map_err(Into::into))
                .collect(),
            VectorField::Bracket(xf, yf) => {
                let m = chart.base_dim();
                let xs = xf.components_at(chart, x)?;
                let ys = yf.components_at(chart, x)?;
                // [X,Y]^mu = sum_nu X^nu d_nu Y^mu - Y^nu d_nu X^mu
                let mut out = vec![T::from_f64(0.0); m];
                for nu in 0..m {
                    let seeded: Vec<T::Lifted> = x
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| if i == nu { v.lift_seeded() } else { v.lift() })
                        .collect();
                    let dy = yf.components_at(chart, &seeded)?;
                    let dx = xf.components_at(chart, &seeded)?;
                    for mu in 0..m {
                        out[mu] = out[mu] + xs[nu] * T::lower_eps(dy[mu])
                            - ys[nu] * T::lower_eps(dx[mu]);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Lie bracket of base vector fields as an evaluatable field.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField::Bracket(Box::new(x.clone()), Box::new(y.clone()))
}

/// The involution on the second vertical bundle: swap `fdot` and `fvary`.
pub fn theta(sv: &SecondVerticalVector) -> SecondVerticalVector {
    SecondVerticalVector {
        x: sv.x.clone(),
        f: sv.f.clone(),
        fdot: sv.fvary.clone(),
        fvary: sv.fdot.clone(),
        fvarydot: sv.fvarydot.clone(),
    }
}

/// Double projection `(f; fdot; fvary; fvarydot) -> (f; fvary) + (f; fdot)`.
pub fn double_projection(sv: &SecondVerticalVector) -> (VerticalVector, VerticalVector) {
    (
        VerticalVector {
            x: sv.x.clone(),
            f: sv.f.clone(),
            df: sv.fvary.clone(),
        },
        VerticalVector {
            x: sv.x.clone(),
            f: sv.f.clone(),
            df: sv.fdot.clone(),
        },
    )
}

pub const DEFAULT_TOL_BASE: f64 = 1e-9;

/// Affine difference of two second vertical vectors sharing a fiber of the
/// double projection: only the `fvarydot` blocks may differ.
pub fn difference(
    a: &SecondVerticalVector,
    b: &SecondVerticalVector,
    tol: f64,
) -> Result<VerticalVector, BundleError> {
    let max_dev = a
        .x
        .iter()
        .zip(&b.x)
        .chain(a.f.iter().zip(&b.f))
        .chain(a.fdot.iter().zip(&b.fdot))
        .chain(a.fvary.iter().zip(&b.fvary))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if max_dev > tol
        || a.f.len() != b.f.len()
        || a.fdot.len() != b.fdot.len()
        || a.fvary.len() != b.fvary.len()
    {
        return Err(BundleError::BaseMismatch { max_dev, tol });
    }
    Ok(VerticalVector {
        x: a.x.clone(),
        f: a.f.clone(),
        df: a
            .fvarydot
            .iter()
            .zip(&b.fvarydot)
            .map(|(p, q)| p - q)
            .collect(),
    })
}

/// Induced change of coordinates on the second vertical bundle for a fiber
/// diffeomorphism `h` (one expression per new fiber coordinate, over the
/// chart's fiber variables). Second partials of `h` enter through the
/// quadratic term and are computed with nested duals.
pub fn change_chart_second_vertical(
    chart: &BundleChart,
    sv: &SecondVerticalVector,
    h: &[Expr],
) -> Result<SecondVerticalVector, BundleError> {
    let n = chart.fiber_dim();
    if h.len() != n {
        return Err(BundleError::DimensionMismatch {
            expected: n,
            got: h.len(),
        });
    }
    chart.check_fiber(&sv.f)?;

    let vars = &chart.fiber_vars;
    let f = &sv.f;

    let value: Vec<f64> = h
        .iter()
        .map(|c| c.eval_slice(vars, f))
        .collect::<Result<_, _>>()?;

    // first partials dh^w/df^a
    let mut jac = vec![vec![0.0; n]; n];
    for a in 0..n {
        let seeded: Vec<Dual<f64>> = f
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == a { Dual::seeded(v) } else { Dual::constant(v) })
            .collect();
        for (w, c) in h.iter().enumerate() {
            jac[w][a] = c.eval_slice(vars, &seeded)?.eps;
        }
    }
    let det = DMatrix::from_fn(n, n, |r, c| jac[r][c]).determinant();
    if det.abs() <= 1e-12 {
        return Err(BundleError::SingularJacobian { det });
    }

    // second partials d2h^w/df^a df^b via nested duals
    let mut hess = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            let seeded: Vec<Dual<Dual<f64>>> = f
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let inner = if i == a {
                        Dual::seeded(v)
                    } else {
                        Dual::constant(v)
                    };
                    let outer_eps = Dual::constant(if i == b { 1.0 } else { 0.0 });
                    Dual::new(inner, outer_eps)
                })
                .collect();
            for (w, c) in h.iter().enumerate() {
                hess[w][a][b] = c.eval_slice(vars, &seeded)?.eps.eps;
            }
        }
    }

    let mat_vec = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|w| (0..n).map(|a| jac[w][a] * v[a]).sum())
            .collect()
    };
    let hdot = mat_vec(&sv.fdot);
    let hvary = mat_vec(&sv.fvary);
    let mut hvarydot = mat_vec(&sv.fvarydot);
    for w in 0..n {
        for a in 0..n {
            for b in 0..n {
                hvarydot[w] += hess[w][a][b] * sv.fvary[a] * sv.fdot[b];
            }
        }
    }

    Ok(SecondVerticalVector {
        x: sv.x.clone(),
        f: value,
        fdot: hdot,
        fvary: hvary,
        fvarydot: hvarydot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn sv(
        x: &[f64],
        f: &[f64],
        fdot: &[f64],
        fvary: &[f64],
        fvarydot: &[f64],
    ) -> SecondVerticalVector {
        SecondVerticalVector {
            x: x.to_vec(),
            f: f.to_vec(),
            fdot: fdot.to_vec(),
            fvary: fvary.to_vec(),
            fvarydot: fvarydot.to_vec(),
        }
    }

    #[test]
    fn section_jet_cases() {
        let chart = BundleChart::standard(1, 1).unwrap();
        // constant section
        let s = SectionField::new(vec![parse_expr("3", &[]).unwrap()]);
        let (_, jac) = section_jet(&chart, &s, &[0.7]).unwrap();
        assert_eq!(jac, vec![vec![0.0]]);
        // identity section
        let s = SectionField::new(vec![parse_expr("x1", &["x1"]).unwrap()]);
        let (_, jac) = section_jet(&chart, &s, &[0.7]).unwrap();
        assert_eq!(jac, vec![vec![1.0]]);
        // sin section, finite-difference check
        let s = SectionField::new(vec![parse_expr("sin(x1)", &["x1"]).unwrap()]);
        let (pt, jac) = section_jet(&chart, &s, &[0.5]).unwrap();
        assert!((pt.f[0] - 0.5f64.sin()).abs() < 1e-15);
        assert!((jac[0][0] - 0.5f64.cos()).abs() < 1e-15);
        let h = 1e-6;
        let fd = ((0.5 + h).sin() - (0.5 - h).sin()) / (2.0 * h);
        assert!((jac[0][0] - fd).abs() < 1e-9);
    }

    #[test]
    fn lie_bracket_cases() {
        let chart = BundleChart::standard(2, 1).unwrap();
        // coordinate fields commute
        let dx1 = VectorField::coordinate(2, 0);
        let dx2 = VectorField::coordinate(2, 1);
        let b = lie_bracket(&dx1, &dx2);
        assert_eq!(b.components_at(&chart, &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
        // [X,X] = 0
        let x = VectorField::from_exprs(vec![
            parse_expr("x2", &["x1", "x2"]).unwrap(),
            parse_expr("x1*x2", &["x1", "x2"]).unwrap(),
        ]);
        let b = lie_bracket(&x, &x);
        assert_eq!(b.components_at(&chart, &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
        // X=(x2,0), Y=(0,x1) at (1,1): [X,Y] = (-1, 1)
        let x = VectorField::from_exprs(vec![
            parse_expr("x2", &["x1", "x2"]).unwrap(),
            parse_expr("0", &[]).unwrap(),
        ]);
        let y = VectorField::from_exprs(vec![
            parse_expr("0", &[]).unwrap(),
            parse_expr("x1", &["x1", "x2"]).unwrap(),
        ]);
        let b = lie_bracket(&x, &y);
        let v = b.components_at(&chart, &[1.0, 1.0]).unwrap();
        assert_eq!(v, vec![-1.0, 1.0]);
        // FD oracle on the defining formula, h = 1e-6
        let h = 1e-6;
        let at = [1.0, 1.0];
        let mut fd = vec![0.0; 2];
        for nu in 0..2 {
            let mut plus = at;
            plus[nu] += h;
            let mut minus = at;
            minus[nu] -= h;
            let dyp = y.components_at(&chart, &plus).unwrap();
            let dym = y.components_at(&chart, &minus).unwrap();
            let dxp = x.components_at(&chart, &plus).unwrap();
            let dxm = x.components_at(&chart, &minus).unwrap();
            let xs = x.components_at(&chart, &at).unwrap();
            let ys = y.components_at(&chart, &at).unwrap();
            for mu in 0..2 {
                fd[mu] += xs[nu] * (dyp[mu] - dym[mu]) / (2.0 * h)
                    - ys[nu] * (dxp[mu] - dxm[mu]) / (2.0 * h);
            }
        }
        for mu in 0..2 {
            assert!((v[mu] - fd[mu]).abs() < 1e-8);
        }
    }

    #[test]
    fn theta_cases() {
        let a = sv(&[0.1], &[1.0, 2.0], &[1.0, 0.0], &[0.0, 1.0], &[2.0, 2.0]);
        let t = theta(&a);
        assert_eq!(t.fdot, vec![0.0, 1.0]);
        assert_eq!(t.fvary, vec![1.0, 0.0]);
        assert_eq!(t.fvarydot, vec![2.0, 2.0]);
        // involution
        assert_eq!(theta(&t), a);
        // fixed point when fdot = fvary
        let b = sv(&[0.1], &[1.0], &[3.0], &[3.0], &[5.0]);
        assert_eq!(theta(&b), b);
    }

    #[test]
    fn double_projection_cases() {
        let a = sv(&[0.0], &[1.0, 1.0], &[1.0, 2.0], &[3.0, 4.0], &[9.0, 9.0]);
        let (l, r) = double_projection(&a);
        assert_eq!(l.df, vec![3.0, 4.0]);
        assert_eq!(r.df, vec![1.0, 2.0]);
        // Pi after theta swaps the two summands
        let (lt, rt) = double_projection(&theta(&a));
        assert_eq!(lt, r);
        assert_eq!(rt, l);
        // zero input
        let z = sv(&[0.0], &[0.0], &[0.0], &[0.0], &[0.0]);
        let (l, r) = double_projection(&z);
        assert_eq!(l.df, vec![0.0]);
        assert_eq!(r.df, vec![0.0]);
    }

    #[test]
    fn difference_cases() {
        let a = sv(&[0.0], &[1.0], &[2.0], &[3.0], &[5.0]);
        // a - a = 0
        assert_eq!(
            difference(&a, &a, DEFAULT_TOL_BASE).unwrap().df,
            vec![0.0]
        );
        let mut b = a.clone();
        b.fvarydot = vec![4.0];
        assert_eq!(difference(&a, &b, DEFAULT_TOL_BASE).unwrap().df, vec![1.0]);
        // mismatched fdot blocks
        let mut c = a.clone();
        c.fdot = vec![7.0];
        assert!(matches!(
            difference(&a, &c, DEFAULT_TOL_BASE),
            Err(BundleError::BaseMismatch { .. })
        ));
    }

    #[test]
    fn difference_is_affine() {
        let a = sv(&[0.2], &[1.0], &[2.0], &[3.0], &[5.0]);
        let mut b = a.clone();
        b.fvarydot = vec![1.5];
        let mut c = a.clone();
        c.fvarydot = vec![-0.5];
        let ab = difference(&a, &b, DEFAULT_TOL_BASE).unwrap();
        let bc = difference(&b, &c, DEFAULT_TOL_BASE).unwrap();
        let ac = difference(&a, &c, DEFAULT_TOL_BASE).unwrap();
        for i in 0..1 {
            assert_eq!(ab.df[i] + bc.df[i], ac.df[i]);
        }
    }

    #[test]
    fn chart_change_identity() {
        let chart = BundleChart::standard(1, 2).unwrap();
        let h = vec![
            parse_expr("f1", &["f1", "f2"]).unwrap(),
            parse_expr("f2", &["f1", "f2"]).unwrap(),
        ];
        let a = sv(&[0.1], &[1.0, 2.0], &[0.5, 0.25], &[3.0, 4.0], &[1.0, -1.0]);
        assert_eq!(change_chart_second_vertical(&chart, &a, &h).unwrap(), a);
    }

    #[test]
    fn chart_change_commutes_with_theta() {
        let chart = BundleChart::standard(1, 2).unwrap();
        // random-ish quadratic diffeomorphism near the identity
        let h = vec![
            parse_expr("f1 + 0.3*f2^2", &["f1", "f2"]).unwrap(),
            parse_expr("f2 + 0.1*f1*f2", &["f1", "f2"]).unwrap(),
        ];
        let a = sv(
            &[0.1],
            &[0.4, -0.2],
            &[0.5, 0.25],
            &[-0.7, 0.9],
            &[1.0, -1.0],
        );
        let lhs = change_chart_second_vertical(&chart, &theta(&a), &h).unwrap();
        let rhs = theta(&change_chart_second_vertical(&chart, &a, &h).unwrap());
        for (p, q) in lhs.fvarydot.iter().zip(&rhs.fvarydot) {
            assert!((p - q).abs() < 1e-14);
        }
        assert_eq!(lhs.fdot, rhs.fdot);
        assert_eq!(lhs.fvary, rhs.fvary);
    }

    #[test]
    fn chart_change_linear_has_no_quadratic_term() {
        let chart = BundleChart::standard(1, 2).unwrap();
        let h = vec![
            parse_expr("2*f1 + f2", &["f1", "f2"]).unwrap(),
            parse_expr("f1 - f2", &["f1", "f2"]).unwrap(),
        ];
        let a = sv(&[0.0], &[1.0, 2.0], &[1.0, 0.0], &[0.0, 1.0], &[3.0, 4.0]);
        let out = change_chart_second_vertical(&chart, &a, &h).unwrap();
        // fvarydot transforms by the constant Jacobian alone
        assert_eq!(out.fvarydot, vec![2.0 * 3.0 + 4.0, 3.0 - 4.0]);
    }

    #[test]
    fn chart_change_singular_jacobian() {
        let chart = BundleChart::standard(1, 2).unwrap();
        let h = vec![
            parse_expr("f1 + f2", &["f1", "f2"]).unwrap(),
            parse_expr("f1 + f2", &["f1", "f2"]).unwrap(),
        ];
        let a = sv(&[0.0], &[1.0, 2.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert!(matches!(
            change_chart_second_vertical(&chart, &a, &h),
            Err(BundleError::SingularJacobian { .. })
        ));
    }
}
