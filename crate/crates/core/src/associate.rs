//! Associated bundles: connections induced by a gauge field through an
//! infinitesimal action, universality of the principal curvature, the
//! moving-frame correspondence between linear connections and GL(n) gauge
//! fields, and the three-part criterion deciding whether a linear
//! connection is associated to a given principal connection.

use crate::connection::{
    curvature_coeffs, ChristoffelField, ConnectionError, LinearChristoffel, LinearKind,
};
use crate::expr::{Expr, Scalar};
use crate::liegroup::{ActionGenerators, LieError, MatrixLieGroup};
use crate::principal::{GaugeField, PrincipalError};
use nalgebra::DMatrix;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssociateError {
    #[error("representation matrices do not respect the bracket (residual {residual:e})")]
    NotARepresentation { residual: f64 },
    #[error("gauge field and action belong to different groups")]
    GroupMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Principal(#[from] PrincipalError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Transport(#[from] Box<crate::transport::TransportError>),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
}

/// A Lie algebra representation by constant matrices, one per basis
/// element, validated against the structure constants on construction.
#[derive(Debug, Clone)]
pub struct RepresentationMatrices {
    pub group: Arc<MatrixLieGroup>,
    pub mats: Vec<DMatrix<f64>>,
}

impl RepresentationMatrices {
    pub fn new(
        group: Arc<MatrixLieGroup>,
        mats: Vec<DMatrix<f64>>,
    ) -> Result<Self, AssociateError> {
        if mats.len() != group.dim() {
            return Err(AssociateError::DimensionMismatch {
                expected: group.dim(),
                got: mats.len(),
            });
        }
        let mut residual = 0.0f64;
        for a in 0..group.dim() {
            for b in 0..group.dim() {
                let mut expect = DMatrix::zeros(mats[0].nrows(), mats[0].ncols());
                for c in 0..group.dim() {
                    expect += &mats[c] * group.structure[a][b][c];
                }
                let comm = &mats[a] * &mats[b] - &mats[b] * &mats[a];
                residual = residual.max((comm - expect).abs().max());
            }
        }
        if residual > 1e-12 {
            return Err(AssociateError::NotARepresentation { residual });
        }
        Ok(RepresentationMatrices { group, mats })
    }

    /// The defining representation: the basis matrices themselves.
    pub fn standard(group: Arc<MatrixLieGroup>) -> Result<Self, AssociateError> {
        let mats = group.basis.clone();
        Self::new(group, mats)
    }

    /// Adjoint representation from the structure constants:
    /// `(ad e_a)^c_b = structure[a][b][c]`.
    pub fn adjoint(group: Arc<MatrixLieGroup>) -> Result<Self, AssociateError> {
        let d = group.dim();
        let mats = (0..d)
            .map(|a| DMatrix::from_fn(d, d, |c, b| group.structure[a][b][c]))
            .collect();
        Self::new(group, mats)
    }

    /// U(1) acting on the plane with integer charge `k`.
    pub fn u1_charge(k: i64) -> Result<Self, AssociateError> {
        let group = MatrixLieGroup::u1();
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        Self::new(group, vec![j * k as f64])
    }

    pub fn fiber_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// Evaluate on algebra coordinates: `sum_a z^a rho_a`.
    pub fn apply(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.fiber_dim();
        let mut out = DMatrix::zeros(n, n);
        for (a, &c) in z.iter().enumerate() {
            out += &self.mats[a] * c;
        }
        out
    }

    pub fn generators(&self) -> Result<ActionGenerators, LieError> {
        ActionGenerators::linear(self.group.clone(), &self.mats)
    }
}

/// Connection induced on the associated bundle:
/// `Gamma^alpha_mu(x, f) = (A_mu(x) *_inf f)^alpha`.
pub fn induce_connection(
    gauge: &GaugeField,
    gens: &ActionGenerators,
) -> Result<ChristoffelField, AssociateError> {
    if !Arc::ptr_eq(&gauge.group(), &gens.group) && gauge.group().name != gens.group.name {
        return Err(AssociateError::GroupMismatch);
    }
    Ok(ChristoffelField::induced(gauge.clone(), gens.clone()))
}

/// Linear connection induced by a representation:
/// `Gamma^alpha_{mu omega} = A^a_mu rho_a[alpha][omega]`.
pub fn induce_linear(
    gauge: &GaugeField,
    rho: &RepresentationMatrices,
) -> Result<LinearChristoffel, AssociateError> {
    if gauge.group().name != rho.group.name {
        return Err(AssociateError::GroupMismatch);
    }
    Ok(LinearChristoffel {
        base_vars: gauge.base_vars(),
        fiber_dim: rho.fiber_dim(),
        kind: LinearKind::Rep {
            gauge: gauge.clone(),
            rho: rho.mats.clone(),
        },
    })
}

/// Read a linear connection as a GL(n) gauge field through its moving
/// frame: `A_mu(x) = Gamma_mu(x)` as a matrix.
pub fn moving_frame_gauge_field(linear: &Arc<LinearChristoffel>) -> GaugeField {
    GaugeField::MovingFrame {
        group: MatrixLieGroup::gl(linear.fiber_dim),
        linear: linear.clone(),
    }
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Universality of the principal curvature: on every associated bundle the
/// curvature of the induced connection is the infinitesimal action of the
/// field strength, `R_munu(x, f) = F_munu(x) *_inf f`.
pub fn universality_check(
    gauge: &GaugeField,
    gens: &ActionGenerators,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ResidualReport, AssociateError> {
    let induced = induce_connection(gauge, gens)?;
    let m = gauge.base_dim();
    let n = gens.fiber_dim();
    let mut rng = crate::sampling::rng(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let x = crate::sampling::point(&mut rng, m, -1.0, 1.0);
        let f = crate::sampling::point(&mut rng, n, -1.5, 1.5);
        let r = curvature_coeffs(&induced, &x, &f)?;
        let fs = gauge.field_strength(&x)?;
        for mu in 0..m {
            for nu in 0..m {
                let acted = gens.act_inf(&fs[mu][nu], &f)?;
                for alpha in 0..n {
                    max_residual = max_residual.max((r[alpha][mu][nu] - acted[alpha]).abs());
                }
            }
        }
    }
    Ok(ResidualReport {
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Direct sum of two actions of the same group, on the fibered product.
pub fn direct_sum(
    a: &ActionGenerators,
    b: &ActionGenerators,
) -> Result<ActionGenerators, AssociateError> {
    if a.group.name != b.group.name {
        return Err(AssociateError::GroupMismatch);
    }
    let na = a.fiber_dim();
    let n = na + b.fiber_dim();
    let fiber_vars: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
    let map_a: std::collections::HashMap<String, String> = a
        .fiber_vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), fiber_vars[i].clone()))
        .collect();
    let map_b: std::collections::HashMap<String, String> = b
        .fiber_vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), fiber_vars[na + i].clone()))
        .collect();
    let gens = a
        .gens
        .iter()
        .zip(&b.gens)
        .map(|(ka, kb)| {
            let mut comps: Vec<Expr> = ka.iter().map(|e| e.rename(&map_a)).collect();
            comps.extend(kb.iter().map(|e| e.rename(&map_b)));
            comps
        })
        .collect();
    Ok(ActionGenerators {
        group: a.group.clone(),
        fiber_vars,
        gens,
    })
}

/// The association functor preserves products: inducing on a fibered
/// product through the direct-sum action agrees with the product of the
/// induced connections.
pub fn product_preservation_check(
    gauge: &GaugeField,
    gens_a: &ActionGenerators,
    gens_b: &ActionGenerators,
    samples: usize,
    seed: u64,
) -> Result<ResidualReport, AssociateError> {
    let tol = 1e-12;
    let ind_a = induce_connection(gauge, gens_a)?;
    let ind_b = induce_connection(gauge, gens_b)?;
    let product = crate::connection::product_connection(&ind_a, &ind_b)?;
    let summed = induce_connection(gauge, &direct_sum(gens_a, gens_b)?)?;
    let m = gauge.base_dim();
    let n = summed.fiber_dim();
    let mut rng = crate::sampling::rng(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let x = crate::sampling::point(&mut rng, m, -1.0, 1.0);
        let f = crate::sampling::point(&mut rng, n, -1.5, 1.5);
        let g1 = product.gamma_at(&x, &f)?;
        let g2 = summed.gamma_at(&x, &f)?;
        for alpha in 0..n {
            for mu in 0..m {
                max_residual = max_residual.max((g1[alpha][mu] - g2[alpha][mu]).abs());
            }
        }
    }
    Ok(ResidualReport {
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// The bundle of groups associated through left multiplication reproduces
/// principal transport: transporting the matrix entries of the identity
/// with the induced connection equals the group transport.
pub fn reproducing_check(
    gauge: &GaugeField,
    curve: &crate::transport::Curve,
    steps: usize,
) -> Result<ResidualReport, AssociateError> {
    let tol = 1e-6;
    let group = gauge.group();
    let k = group.k;
    let gens = ActionGenerators::left_multiplication(group.clone());
    let induced = induce_connection(gauge, &gens)?;
    // identity matrix, row-major, as the initial fiber point
    let mut f0 = vec![0.0; k * k];
    for i in 0..k {
        f0[i * k + i] = 1.0;
    }
    let via_fiber = crate::transport::parallel_transport_fiber(&induced, curve, &f0, steps)
        .map_err(Box::new)?;
    let via_group =
        crate::transport::group_transport(gauge, curve, &group.identity_element(), steps)
            .map_err(Box::new)?;
    let mut max_residual = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            max_residual =
                max_residual.max((via_fiber.f[i * k + j] - via_group.g.mat[(i, j)]).abs());
        }
    }
    Ok(ResidualReport {
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Candidate intertwiner family `S_a(x)` for the association criterion,
/// given entrywise over the base variables: `s[a][alpha][omega]`.
#[derive(Debug, Clone)]
pub struct AssociationCandidate {
    pub base_vars: Vec<String>,
    pub s: Vec<Vec<Vec<Expr>>>,
}

impl AssociationCandidate {
    /// Constant candidate from representation matrices.
    pub fn constant(base_vars: Vec<String>, mats: &[DMatrix<f64>]) -> Self {
        let s = mats
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| Expr::constant(m[(i, j)])).collect())
                    .collect()
            })
            .collect();
        AssociationCandidate { base_vars, s }
    }

    /// `s_at[a][alpha][omega]` over generic scalars.
    pub fn s_at<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<Vec<T>>>, AssociateError> {
        self.s
            .iter()
            .map(|per_a| {
                per_a
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| e.eval_slice(&self.base_vars, x).map_err(Into::into))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub parallel: ResidualReport,
    pub representation: ResidualReport,
    pub curvature: ResidualReport,
    pub pass: bool,
}

/// Decide whether the linear connection `linear` is associated to the
/// principal connection `gauge` through the candidate family `S_a(x)`.
/// Three verdicts, each with tolerance `tol`:
///
/// 1. parallel: `d_mu S^alpha_{a omega} + Gamma^alpha_{mu beta} S^beta_{a omega}
///    - S^alpha_{b omega} (ad A_mu)^b_a - S^alpha_{a beta} Gamma^beta_{mu omega} = 0`
/// 2. representation: `S_a S_b - S_b S_a = c^c_{ab} S_c`
/// 3. curvature: `R_munu = S(F_munu)`
pub fn check_association_candidate(
    linear: &LinearChristoffel,
    gauge: &GaugeField,
    candidate: &AssociationCandidate,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<CandidateReport, AssociateError> {
    let group = gauge.group();
    let d = group.dim();
    let m = gauge.base_dim();
    let n = linear.fiber_dim;
    let mut rng = crate::sampling::rng(seed);
    let mut res_parallel = 0.0f64;
    let mut res_rep = 0.0f64;
    let mut res_curv = 0.0f64;

    for _ in 0..samples {
        let x = crate::sampling::point(&mut rng, m, -1.0, 1.0);
        let s = candidate.s_at(&x)?;
        let g = linear.coeff_at(&x)?;
        let a_coords = gauge.coords_at(&x)?;

        // ds[mu][a][alpha][omega] = d_mu S^alpha_{a omega}
        let mut ds = vec![vec![vec![vec![0.0; n]; n]; d]; m];
        for mu in 0..m {
            let xs: Vec<crate::expr::D1> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| if i == mu { v.lift_seeded() } else { v.lift() })
                .collect();
            let sd = candidate.s_at(&xs)?;
            for a in 0..d {
                for alpha in 0..n {
                    for omega in 0..n {
                        ds[mu][a][alpha][omega] = sd[a][alpha][omega].eps;
                    }
                }
            }
        }

        // (1) parallelism of S as a section of Hom(ad P, End E)
        for mu in 0..m {
            // (ad A_mu)^b_a = sum_c A^c_mu structure[c][a][b]
            let mut ad = vec![vec![0.0; d]; d];
            for (c, &coeff) in a_coords[mu].iter().enumerate() {
                for a in 0..d {
                    for b in 0..d {
                        ad[b][a] += coeff * group.structure[c][a][b];
                    }
                }
            }
            for a in 0..d {
                for alpha in 0..n {
                    for omega in 0..n {
                        let mut r = ds[mu][a][alpha][omega];
                        for beta in 0..n {
                            r += g[alpha][mu][beta] * s[a][beta][omega];
                            r -= s[a][alpha][beta] * g[beta][mu][omega];
                        }
                        for b in 0..d {
                            r -= s[b][alpha][omega] * ad[b][a];
                        }
                        res_parallel = res_parallel.max(r.abs());
                    }
                }
            }
        }

        // (2) S is a pointwise representation
        for a in 0..d {
            for b in 0..d {
                for alpha in 0..n {
                    for omega in 0..n {
                        let mut comm = 0.0;
                        for beta in 0..n {
                            comm += s[a][alpha][beta] * s[b][beta][omega]
                                - s[b][alpha][beta] * s[a][beta][omega];
                        }
                        let mut expect = 0.0;
                        for c in 0..d {
                            expect += group.structure[a][b][c] * s[c][alpha][omega];
                        }
                        res_rep = res_rep.max((comm - expect).abs());
                    }
                }
            }
        }

        // (3) curvature of the linear connection is S of the field strength
        let rc = linear.classical_curvature(&x)?;
        let fs = gauge.field_strength(&x)?;
        for mu in 0..m {
            for nu in 0..m {
                for alpha in 0..n {
                    for omega in 0..n {
                        let mut expect = 0.0;
                        for a in 0..d {
                            expect += fs[mu][nu][a] * s[a][alpha][omega];
                        }
                        res_curv = res_curv.max((rc[mu][nu][alpha][omega] - expect).abs());
                    }
                }
            }
        }
    }

    let mk = |r: f64| ResidualReport {
        max_residual: r,
        tol,
        pass: r <= tol,
    };
    let parallel = mk(res_parallel);
    let representation = mk(res_rep);
    let curvature = mk(res_curv);
    let pass = parallel.pass && representation.pass && curvature.pass;
    Ok(CandidateReport {
        parallel,
        representation,
        curvature,
        pass,
    })
}
