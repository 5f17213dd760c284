//! Matrix Lie groups and algebras: brackets, exponentials, adjoint action,
//! the twisted involution on the principal second vertical bundle, and
//! infinitesimal actions given by fundamental vector fields.
//!
//! Complex groups (U1, SU2) are realized as real matrix groups of doubled
//! size, so the scalar field stays real throughout.

use crate::expr::{Dual, EvalError, Expr, Scalar};
use crate::linalg::Mat;
use nalgebra::DMatrix;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("matrix does not lie in the span of the algebra basis (residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("basis matrices are linearly dependent")]
    DependentBasis,
    #[error("structure constants fail to reproduce the matrix bracket (residual {residual:e})")]
    StructureMismatch { residual: f64 },
    #[error("group element is singular")]
    SingularElement,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    U1,
    SO3,
    SU2,
    GeneralLinear,
    Custom,
}

/// A matrix Lie group with a fixed basis of its Lie algebra.
#[derive(Debug, Clone)]
pub struct MatrixLieGroup {
    pub name: String,
    pub kind: GroupKind,
    /// Real matrix size.
    pub k: usize,
    pub basis: Vec<DMatrix<f64>>,
    /// `[e_a, e_b] = sum_c structure[a][b][c] e_c`
    pub structure: Vec<Vec<Vec<f64>>>,
    /// Pseudo-inverse mapping a flattened matrix to basis coordinates.
    extractor: Vec<Vec<f64>>,
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut v = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl MatrixLieGroup {
    pub fn from_basis(
        name: &str,
        kind: GroupKind,
        basis: Vec<DMatrix<f64>>,
    ) -> Result<Arc<Self>, LieError> {
        let d = basis.len();
        let k = basis[0].nrows();
        let mut b = DMatrix::zeros(k * k, d);
        for (a, e) in basis.iter().enumerate() {
            for (i, v) in flatten(e).into_iter().enumerate() {
                b[(i, a)] = v;
            }
        }
        let svd = b.clone().svd(true, true);
        if svd.singular_values.iter().any(|&s| s < 1e-10) {
            return Err(LieError::DependentBasis);
        }
        let pinv = svd.pseudo_inverse(1e-12).map_err(|_| LieError::DependentBasis)?;
        let extractor: Vec<Vec<f64>> = (0..d)
            .map(|a| (0..k * k).map(|j| pinv[(a, j)]).collect())
            .collect();

        let mut group = MatrixLieGroup {
            name: name.to_string(),
            kind,
            k,
            basis,
            structure: vec![vec![vec![0.0; d]; d]; d],
            extractor,
        };
        for a in 0..d {
            for bi in 0..d {
                let comm = &group.basis[a] * &group.basis[bi] - &group.basis[bi] * &group.basis[a];
                let coords = group.coords_of(&comm)?;
                // structure constants must reproduce the bracket to 1e-12
                let rebuilt = group.matrix_of(&coords);
                let res = (&comm - &rebuilt).abs().max();
                if res > 1e-12 {
                    return Err(LieError::StructureMismatch { residual: res });
                }
                group.structure[a][bi] = coords;
            }
        }
        Ok(Arc::new(group))
    }

    /// U(1) as 2x2 rotation matrices; algebra basis the standard symplectic J.
    pub fn u1() -> Arc<Self> {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        Self::from_basis("U1", GroupKind::U1, vec![j]).expect("builtin")
    }

    /// SO(3) with the standard angular-momentum basis, `[e1,e2] = e3` cyclic.
    pub fn so3() -> Arc<Self> {
        let e1 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        let e2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let e3 = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        Self::from_basis("SO3", GroupKind::SO3, vec![e1, e2, e3]).expect("builtin")
    }

    /// SU(2) realized as left multiplication by unit quaternions on R^4;
    /// basis `L_i/2, L_j/2, L_k/2`, so again `[e1,e2] = e3` cyclic.
    pub fn su2() -> Arc<Self> {
        let l = |b: f64, c: f64, d: f64| {
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, -b, -c, -d, //
                    b, 0.0, -d, c, //
                    c, d, 0.0, -b, //
                    d, -c, b, 0.0,
                ],
            ) * 0.5
        };
        Self::from_basis(
            "SU2",
            GroupKind::SU2,
            vec![l(1.0, 0.0, 0.0), l(0.0, 1.0, 0.0), l(0.0, 0.0, 1.0)],
        )
        .expect("builtin")
    }

    /// GL(n, R) with the elementary-matrix basis, row-major.
    pub fn gl(n: usize) -> Arc<Self> {
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = DMatrix::zeros(n, n);
                e[(i, j)] = 1.0;
                basis.push(e);
            }
        }
        Self::from_basis(&format!("GL{n}"), GroupKind::GeneralLinear, basis).expect("builtin")
    }

    pub fn custom(name: &str, basis: Vec<DMatrix<f64>>) -> Result<Arc<Self>, LieError> {
        Self::from_basis(name, GroupKind::Custom, basis)
    }

    /// Algebra dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_of(&self, coords: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.k, self.k);
        for (a, &c) in coords.iter().enumerate() {
            m += &self.basis[a] * c;
        }
        m
    }

    /// Basis coordinates of a matrix, with a span check at 1e-9.
    pub fn coords_of(&self, m: &DMatrix<f64>) -> Result<Vec<f64>, LieError> {
        let v = flatten(m);
        let coords: Vec<f64> = self
            .extractor
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let residual = (m - self.matrix_of(&coords)).abs().max();
        if residual > 1e-9 {
            return Err(LieError::NotInSpan { residual });
        }
        Ok(coords)
    }

    /// Coordinate extraction over generic scalars; the span invariant is
    /// checked separately on primal samples.
    pub fn coords_of_generic<T: Scalar>(&self, m: &Mat<T>) -> Vec<T> {
        let k = self.k;
        self.extractor
            .iter()
            .map(|row| {
                let mut acc = T::from_f64(0.0);
                for i in 0..k {
                    for j in 0..k {
                        acc = acc + T::from_f64(row[i * k + j]) * m[i][j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn basis_generic<T: Scalar>(&self, a: usize) -> Mat<T> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| T::from_f64(self.basis[a][(i, j)])).collect())
            .collect()
    }

    pub fn identity_element(self: &Arc<Self>) -> GroupElement {
        GroupElement {
            group: self.clone(),
            mat: DMatrix::identity(self.k, self.k),
        }
    }

    pub fn algebra_element(self: &Arc<Self>, coords: Vec<f64>) -> Result<AlgebraElement, LieError> {
        if coords.len() != self.dim() {
            return Err(LieError::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        Ok(AlgebraElement {
            group: self.clone(),
            coords,
        })
    }
}

/// Element of the Lie algebra in basis coordinates.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub group: Arc<MatrixLieGroup>,
    pub coords: Vec<f64>,
}

impl AlgebraElement {
    pub fn matrix(&self) -> DMatrix<f64> {
        self.group.matrix_of(&self.coords)
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Element of the group as a real matrix.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub group: Arc<MatrixLieGroup>,
    pub mat: DMatrix<f64>,
}

/// Matrix commutator re-expressed in basis coordinates.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, LieError> {
    let m = x.matrix() * y.matrix() - y.matrix() * x.matrix();
    Ok(AlgebraElement {
        group: x.group.clone(),
        coords: x.group.coords_of(&m)?,
    })
}

/// Bracket through the structure constants (used where the matrices are
/// not materialized).
pub fn bracket_coords<T: Scalar>(group: &MatrixLieGroup, x: &[T], y: &[T]) -> Vec<T> {
    let d = group.dim();
    let mut out = vec![T::from_f64(0.0); d];
    for a in 0..d {
        for b in 0..d {
            let xy = x[a] * y[b];
            for c in 0..d {
                out[c] = out[c] + T::from_f64(group.structure[a][b][c]) * xy;
            }
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.abs().max();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = m / 2f64.powi(s as i32);
    let n = m.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for i in 1..64 {
        term = &term * &a / (i as f64);
        sum += &term;
        if term.abs().max() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn rodrigues(w: &[f64], t: f64) -> DMatrix<f64> {
    let wx = w[0] * t;
    let wy = w[1] * t;
    let wz = w[2] * t;
    let theta = (wx * wx + wy * wy + wz * wz).sqrt();
    let k = DMatrix::from_row_slice(3, 3, &[0.0, -wz, wy, wz, 0.0, -wx, -wy, wx, 0.0]);
    let (a, b) = if theta < 1e-8 {
        // series: sin t/t and (1-cos t)/t^2
        (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    DMatrix::identity(3, 3) + &k * a + &k * &k * b
}

/// Group exponential of `t X`: closed form for U1 and SO3, scaling and
/// squaring otherwise.
pub fn exp(x: &AlgebraElement, t: f64) -> GroupElement {
    let mat = match x.group.kind {
        GroupKind::U1 => {
            let phi = x.coords[0] * t;
            DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()])
        }
        GroupKind::SO3 => rodrigues(&x.coords, t),
        _ => expm(&(x.matrix() * t)),
    };
    GroupElement {
        group: x.group.clone(),
        mat,
    }
}

/// Adjoint action `g X g^-1` in basis coordinates.
pub fn adjoint(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement, LieError> {
    let inv = g.mat.clone().try_inverse().ok_or(LieError::SingularElement)?;
    let m = &g.mat * x.matrix() * inv;
    Ok(AlgebraElement {
        group: g.group.clone(),
        coords: g.group.coords_of(&m)?,
    })
}

/// The involution on the principal second vertical bundle in the iterated
/// vertical trivialization: `(g, X, Y, Z) -> (g, Y, X, Z + [X, Y])`.
pub fn theta_principal(
    g: &GroupElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    z: &AlgebraElement,
) -> Result<(GroupElement, AlgebraElement, AlgebraElement, AlgebraElement), LieError> {
    let xy = bracket(x, y)?;
    let new_z = AlgebraElement {
        group: z.group.clone(),
        coords: z.coords.iter().zip(&xy.coords).map(|(a, b)| a + b).collect(),
    };
    Ok((g.clone(), y.clone(), x.clone(), new_z))
}

impl GroupElement {
    /// Distance from the group manifold, per group kind.
    pub fn membership_residual(&self) -> f64 {
        let k = self.group.k;
        let ortho = (&self.mat.transpose() * &self.mat - DMatrix::<f64>::identity(k, k))
            .abs()
            .max();
        let det = self.mat.determinant();
        match self.group.kind {
            GroupKind::U1 | GroupKind::SO3 => ortho + (det - 1.0).abs(),
            GroupKind::SU2 => {
                // must be left multiplication by a unit quaternion
                let q = [self.mat[(0, 0)], self.mat[(1, 0)], self.mat[(2, 0)], self.mat[(3, 0)]];
                let rebuilt = quaternion_matrix(&q);
                let span = (&self.mat - &rebuilt).abs().max();
                let unit = (q.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs();
                span + unit
            }
            GroupKind::GeneralLinear | GroupKind::Custom => {
                if det.abs() > 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Project back onto the group manifold (drift control in transport).
    pub fn project_to_group(&self) -> GroupElement {
        let mat = match self.group.kind {
            GroupKind::U1 | GroupKind::SO3 => {
                let svd = self.mat.clone().svd(true, true);
                let u = svd.u.unwrap();
                let vt = svd.v_t.unwrap();
                u * vt
            }
            GroupKind::SU2 => {
                let mut q = [
                    self.mat[(0, 0)],
                    self.mat[(1, 0)],
                    self.mat[(2, 0)],
                    self.mat[(3, 0)],
                ];
                let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
                for c in &mut q {
                    *c /= n;
                }
                quaternion_matrix(&q)
            }
            GroupKind::GeneralLinear | GroupKind::Custom => self.mat.clone(),
        };
        GroupElement {
            group: self.group.clone(),
            mat,
        }
    }
}

fn quaternion_matrix(q: &[f64; 4]) -> DMatrix<f64> {
    let (a, b, c, d) = (q[0], q[1], q[2], q[3]);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            a, -b, -c, -d, //
            b, a, -d, c, //
            c, d, a, -b, //
            d, -c, b, a,
        ],
    )
}

/// Fundamental vector fields `K_a(f)` of a smooth left action, one
/// expression per fiber component and algebra basis element.
#[derive(Debug, Clone)]
pub struct ActionGenerators {
    pub group: Arc<MatrixLieGroup>,
    pub fiber_vars: Vec<String>,
    /// `gens[a][alpha]` is the alpha-component of `K_a`.
    pub gens: Vec<Vec<Expr>>,
}

impl ActionGenerators {
    pub fn new(
        group: Arc<MatrixLieGroup>,
        fiber_vars: Vec<String>,
        gens: Vec<Vec<Expr>>,
    ) -> Result<Self, LieError> {
        if gens.len() != group.dim() {
            return Err(LieError::DimensionMismatch {
                expected: group.dim(),
                got: gens.len(),
            });
        }
        Ok(ActionGenerators {
            group,
            fiber_vars,
            gens,
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_vars.len()
    }

    /// Linear action `K_a(f) = rho_a f` from representation matrices.
    pub fn linear(group: Arc<MatrixLieGroup>, rho: &[DMatrix<f64>]) -> Result<Self, LieError> {
        let n = rho[0].nrows();
        let fiber_vars: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
        let gens = rho
            .iter()
            .map(|mat| {
                (0..n)
                    .map(|alpha| {
                        let mut acc = Expr::constant(0.0);
                        for (w, var) in fiber_vars.iter().enumerate() {
                            let c = mat[(alpha, w)];
                            if c != 0.0 {
                                acc = acc + Expr::constant(c) * Expr::var(var);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self::new(group, fiber_vars, gens)
    }

    /// Left multiplication of the group on itself, with the fiber given by
    /// matrix entries in row-major order: `K_a(g) = e_a g`.
    pub fn left_multiplication(group: Arc<MatrixLieGroup>) -> Self {
        let k = group.k;
        let fiber_vars: Vec<String> = (1..=k * k).map(|i| format!("f{i}")).collect();
        let gens = (0..group.dim())
            .map(|a| {
                let e = &group.basis[a];
                let mut comps = Vec::with_capacity(k * k);
                for i in 0..k {
                    for j in 0..k {
                        let mut acc = Expr::constant(0.0);
                        for l in 0..k {
                            let c = e[(i, l)];
                            if c != 0.0 {
                                acc = acc
                                    + Expr::constant(c) * Expr::var(&fiber_vars[l * k + j]);
                            }
                        }
                        comps.push(acc);
                    }
                }
                comps
            })
            .collect();
        ActionGenerators {
            group,
            fiber_vars,
            gens,
        }
    }

    /// `X *_inf f = sum_a X^a K_a(f)`.
    pub fn act_inf<T: Scalar>(&self, x_coords: &[T], f: &[T]) -> Result<Vec<T>, LieError> {
        if x_coords.len() != self.group.dim() {
            return Err(LieError::DimensionMismatch {
                expected: self.group.dim(),
                got: x_coords.len(),
            });
        }
        let n = self.fiber_dim();
        let mut out = vec![T::from_f64(0.0); n];
        for (a, k_a) in self.gens.iter().enumerate() {
            for (alpha, comp) in k_a.iter().enumerate() {
                out[alpha] = out[alpha] + x_coords[a] * comp.eval_slice(&self.fiber_vars, f)?;
            }
        }
        Ok(out)
    }

    /// Vector-field bracket `[K_a, K_b]^alpha(f)` via exact duals.
    fn generator_bracket(&self, a: usize, b: usize, f: &[f64]) -> Result<Vec<f64>, LieError> {
        let n = self.fiber_dim();
        let ka: Vec<f64> = self.gens[a]
            .iter()
            .map(|c| c.eval_slice(&self.fiber_vars, f))
            .collect::<Result<_, _>>()?;
        let kb: Vec<f64> = self.gens[b]
            .iter()
            .map(|c| c.eval_slice(&self.fiber_vars, f))
            .collect::<Result<_, _>>()?;
        let mut out = vec![0.0; n];
        for beta in 0..n {
            let seeded: Vec<Dual<f64>> = f
                .iter()
                .enumerate()
                .map(|(i, &v)| if i == beta { Dual::seeded(v) } else { Dual::constant(v) })
                .collect();
            for alpha in 0..n {
                let dkb = self.gens[b][alpha].eval_slice(&self.fiber_vars, &seeded)?.eps;
                let dka = self.gens[a][alpha].eval_slice(&self.fiber_vars, &seeded)?.eps;
                out[alpha] += ka[beta] * dkb - kb[beta] * dka;
            }
        }
        Ok(out)
    }

    /// Verify the anti-homomorphism law `[K_X, K_Y] = -K_{[X,Y]}` at sampled
    /// fiber points. The report carries the maximum residual.
    pub fn check_generator_law(
        &self,
        samples: usize,
        seed: u64,
        tol: f64,
    ) -> Result<GeneratorLawReport, LieError> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = self.group.dim();
        let n = self.fiber_dim();
        let mut max_residual = 0.0f64;
        for _ in 0..samples {
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for a in 0..d {
                for b in 0..d {
                    let lhs = self.generator_bracket(a, b, &f)?;
                    // -K_{[e_a,e_b]}(f)
                    let mut rhs = vec![0.0; n];
                    for c in 0..d {
                        let coeff = self.group.structure[a][b][c];
                        if coeff == 0.0 {
                            continue;
                        }
                        for (alpha, comp) in self.gens[c].iter().enumerate() {
                            rhs[alpha] -= coeff * comp.eval_slice(&self.fiber_vars, &f)?;
                        }
                    }
                    for alpha in 0..n {
                        max_residual = max_residual.max((lhs[alpha] - rhs[alpha]).abs());
                    }
                }
            }
        }
        Ok(GeneratorLawReport {
            max_residual,
            tol,
            pass: max_residual <= tol,
        })
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorLawReport {
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64]) {
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn structure_constants_so3() {
        let g = MatrixLieGroup::so3();
        // [e1,e2] = e3 and cyclic
        assert_close(&g.structure[0][1], &[0.0, 0.0, 1.0]);
        assert_close(&g.structure[1][2], &[1.0, 0.0, 0.0]);
        assert_close(&g.structure[2][0], &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn structure_constants_su2_match_so3() {
        let g = MatrixLieGroup::su2();
        assert_close(&g.structure[0][1], &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn bracket_cases() {
        let g = MatrixLieGroup::so3();
        let x = g.algebra_element(vec![0.3, -0.1, 0.9]).unwrap();
        let xx = bracket(&x, &x).unwrap();
        assert!(xx.norm() < 1e-15);
        let e1 = g.algebra_element(vec![1.0, 0.0, 0.0]).unwrap();
        let e2 = g.algebra_element(vec![0.0, 1.0, 0.0]).unwrap();
        let e3 = bracket(&e1, &e2).unwrap();
        assert!((e3.coords[2] - 1.0).abs() < 1e-14);
        // abelian
        let u1 = MatrixLieGroup::u1();
        let a = u1.algebra_element(vec![0.7]).unwrap();
        let b = u1.algebra_element(vec![-1.3]).unwrap();
        assert!(bracket(&a, &b).unwrap().norm() < 1e-15);
    }

    #[test]
    fn exp_cases() {
        let g = MatrixLieGroup::so3();
        let x = g.algebra_element(vec![0.2, 0.5, -0.4]).unwrap();
        // exp(0) = id
        let zero = g.algebra_element(vec![0.0; 3]).unwrap();
        assert!((exp(&zero, 1.0).mat - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-15);
        // one-parameter subgroup
        let lhs = exp(&x, 0.3).mat * exp(&x, 0.8).mat;
        let rhs = exp(&x, 1.1).mat;
        assert!((lhs - rhs).abs().max() < 1e-10);
        // quarter turn about e3 maps (1,0,0) to (0,1,0)
        let e3 = g.algebra_element(vec![0.0, 0.0, 1.0]).unwrap();
        let r = exp(&e3, std::f64::consts::FRAC_PI_2).mat;
        let v = r * DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert!((v[(0, 0)]).abs() < 1e-12);
        assert!((v[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_series_matches_rodrigues() {
        let g = MatrixLieGroup::so3();
        let x = g.algebra_element(vec![0.9, -1.2, 0.3]).unwrap();
        let closed = exp(&x, 1.0).mat;
        let series = expm(&x.matrix());
        assert!((closed - series).abs().max() < 1e-12);
    }

    #[test]
    fn exp_lands_in_group() {
        let g = MatrixLieGroup::su2();
        let x = g.algebra_element(vec![2.0, -3.0, 1.0]).unwrap();
        for t in [0.1, 1.0, 2.5] {
            assert!(exp(&x, t).membership_residual() < 1e-9);
        }
    }

    #[test]
    fn adjoint_cases() {
        let g = MatrixLieGroup::so3();
        let x = g.algebra_element(vec![0.4, 0.1, -0.7]).unwrap();
        let id = g.identity_element();
        let ax = adjoint(&id, &x).unwrap();
        for (a, b) in ax.coords.iter().zip(&x.coords) {
            assert!((a - b).abs() < 1e-14);
        }
        // abelian adjoint is trivial
        let u1 = MatrixLieGroup::u1();
        let gx = exp(&u1.algebra_element(vec![0.9]).unwrap(), 1.0);
        let y = u1.algebra_element(vec![-2.0]).unwrap();
        let ay = adjoint(&gx, &y).unwrap();
        assert!((ay.coords[0] + 2.0).abs() < 1e-12);
        // d/dt Ad_exp(tY) X |_0 = [Y, X] via finite differences
        let y = g.algebra_element(vec![0.3, -0.5, 0.2]).unwrap();
        let h = 1e-6;
        let p = adjoint(&exp(&y, h), &x).unwrap();
        let m = adjoint(&exp(&y, -h), &x).unwrap();
        let fd: Vec<f64> = p
            .coords
            .iter()
            .zip(&m.coords)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let br = bracket(&y, &x).unwrap();
        for (a, b) in fd.iter().zip(&br.coords) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn theta_principal_cases() {
        let g = MatrixLieGroup::so3();
        let ge = g.identity_element();
        let x = g.algebra_element(vec![1.0, 0.0, 0.0]).unwrap();
        let y = g.algebra_element(vec![0.0, 1.0, 0.0]).unwrap();
        let z = g.algebra_element(vec![0.0, 0.0, 5.0]).unwrap();
        // fixed point when X = Y
        let (_, a, b, c) = theta_principal(&ge, &x, &x, &z).unwrap();
        assert_eq!(a.coords, x.coords);
        assert_eq!(b.coords, x.coords);
        assert_eq!(c.coords, z.coords);
        // involution: Z + [X,Y] + [Y,X] = Z
        let (_, a, b, c) = theta_principal(&ge, &x, &y, &z).unwrap();
        let (_, a2, b2, c2) = theta_principal(&ge, &a, &b, &c).unwrap();
        assert_eq!(a2.coords, x.coords);
        assert_eq!(b2.coords, y.coords);
        for (p, q) in c2.coords.iter().zip(&z.coords) {
            assert!((p - q).abs() < 1e-14);
        }
        // abelian degeneration: plain swap
        let u1 = MatrixLieGroup::u1();
        let (_, a, b, c) = theta_principal(
            &u1.identity_element(),
            &u1.algebra_element(vec![2.0]).unwrap(),
            &u1.algebra_element(vec![3.0]).unwrap(),
            &u1.algebra_element(vec![4.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(a.coords, vec![3.0]);
        assert_eq!(b.coords, vec![2.0]);
        assert_eq!(c.coords, vec![4.0]);
    }

    #[test]
    fn act_inf_cases() {
        let g = MatrixLieGroup::so3();
        let rho: Vec<DMatrix<f64>> = g.basis.clone();
        let k = ActionGenerators::linear(g.clone(), &rho).unwrap();
        // X = 0 acts as zero
        let out = k.act_inf(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
        // e3 x (1,0,0) = (0,1,0)
        let out = k.act_inf(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 0.0]);
        // FD oracle: d/dt exp(t e3) f |_0
        let e3 = g.algebra_element(vec![0.0, 0.0, 1.0]).unwrap();
        let h = 1e-6;
        let f = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let p = exp(&e3, h).mat * &f;
        let m = exp(&e3, -h).mat * &f;
        for i in 0..3 {
            let fd = (p[(i, 0)] - m[(i, 0)]) / (2.0 * h);
            assert!((fd - out[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn generator_law_so3_passes() {
        let g = MatrixLieGroup::so3();
        let k = ActionGenerators::linear(g.clone(), &g.basis.clone()).unwrap();
        let rep = k.check_generator_law(10, 7, 1e-12).unwrap();
        assert!(rep.pass, "max residual {}", rep.max_residual);
    }

    #[test]
    fn generator_law_sign_flip_fails() {
        let g = MatrixLieGroup::so3();
        let mut rho = g.basis.clone();
        rho[0] = -rho[0].clone();
        let k = ActionGenerators::linear(g.clone(), &rho).unwrap();
        let rep = k.check_generator_law(10, 7, 1e-8).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn generator_law_abelian_trivial() {
        let u1 = MatrixLieGroup::u1();
        let rho = vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])];
        let k = ActionGenerators::linear(u1, &rho).unwrap();
        let rep = k.check_generator_law(10, 7, 1e-14).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn equivariance_of_infinitesimal_action() {
        // rho(g) act_inf(X, f) = act_inf(Ad_g X, rho(g) f) in the linear case
        let g = MatrixLieGroup::so3();
        let k = ActionGenerators::linear(g.clone(), &g.basis.clone()).unwrap();
        let x = g.algebra_element(vec![0.3, 0.8, -0.2]).unwrap();
        let gamma = exp(&g.algebra_element(vec![1.0, -0.4, 0.6]).unwrap(), 1.0);
        let f = [0.5, -1.0, 2.0];
        let lhs_v = k.act_inf(&x.coords, &f).unwrap();
        let lhs = &gamma.mat * DMatrix::from_column_slice(3, 1, &lhs_v);
        let gf = &gamma.mat * DMatrix::from_column_slice(3, 1, &f);
        let adx = adjoint(&gamma, &x).unwrap();
        let rhs = k
            .act_inf(&adx.coords, &[gf[(0, 0)], gf[(1, 0)], gf[(2, 0)]])
            .unwrap();
        for i in 0..3 {
            assert!((lhs[(i, 0)] - rhs[i]).abs() < 1e-10);
        }
    }
}
