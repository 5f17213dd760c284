//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Oracles are independent of the code under test wherever
//! the value is derived: finite differences, closed-form ODE solutions,
//! Stokes-type surface integrals, and analytic antiderivatives.

use gaugekit::associate::{
    check_association_candidate, induce_connection, induce_linear, AssociationCandidate,
    RepresentationMatrices,
};
use gaugekit::bundle::{BundleChart, SectionField, VectorField};
use gaugekit::connection::{
    curvature_coeffs, curvature_identity_residual, is_linear, ChristoffelField,
    LinearChristoffel,
};
use gaugekit::expr::{parse_expr, Expr};
use gaugekit::liegroup::{adjoint, ActionGenerators, GroupElement, MatrixLieGroup};
use gaugekit::principal::{check_principal_axiom, GaugeField, GaugeTransformation};
use gaugekit::sampling;
use gaugekit::transport::{flux, group_transport, parallel_transport_fiber, Curve};
use rand::Rng;
use std::sync::Arc;

const PI: f64 = std::f64::consts::PI;

fn xvars(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

fn unit_field(m: usize, mu: usize) -> VectorField {
    VectorField::from_exprs(
        (0..m)
            .map(|i| Expr::constant(if i == mu { 1.0 } else { 0.0 }))
            .collect(),
    )
}

/// Random explicit connection with polynomial/trig Christoffel symbols.
fn random_connection(seed: u64) -> (ChristoffelField, usize, usize) {
    let mut rng = sampling::rng(seed);
    let m = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=3);
    let chart = BundleChart::standard(m, n).unwrap();
    let vars = chart.all_vars();
    let exprs: Vec<Vec<Expr>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        sampling::polynomial(&mut rng, &vars, 2)
                    } else {
                        sampling::trig_polynomial(&mut rng, &vars)
                    }
                })
                .collect()
        })
        .collect();
    (
        ChristoffelField::explicit(chart, exprs).unwrap(),
        m,
        n,
    )
}

#[test]
fn criterion_1_curvature_commutator_identity() {
    let start = std::time::Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let (gamma, m, n) = random_connection(1000 + i);
        let mut rng = sampling::rng(2000 + i);
        let base = xvars(m);
        let section = SectionField::new(
            (0..n)
                .map(|_| sampling::polynomial(&mut rng, &base, 2))
                .collect(),
        );
        // coordinate fields on even suites, random polynomial fields on odd
        let (xf, yf) = if i % 2 == 0 {
            (unit_field(m, 0), unit_field(m, m - 1))
        } else {
            (
                VectorField::from_exprs(
                    (0..m)
                        .map(|_| sampling::polynomial(&mut rng, &base, 2))
                        .collect(),
                ),
                VectorField::from_exprs(
                    (0..m)
                        .map(|_| sampling::polynomial(&mut rng, &base, 2))
                        .collect(),
                ),
            )
        };
        for _ in 0..50 {
            let x = sampling::point(&mut rng, m, -0.8, 0.8);
            let r = curvature_identity_residual(&gamma, &section, &xf, &yf, &x, 1e-10)
                .unwrap();
            worst = worst.max(r.max_residual);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst <= 1e-10, "worst residual {worst:e}");
    assert!(elapsed <= 10.0, "runtime {elapsed}s");
    println!("criterion 1 (curvature/commutator identity): pass (residual {worst:.2e}, {elapsed:.2}s)");
}

#[test]
fn criterion_2_coefficients_match_fd_horizontal_lift_commutators() {
    // R^alpha_munu = -[H_mu, H_nu]^alpha with H_mu = d_mu - Gamma^alpha_mu d_alpha,
    // the bracket evaluated by central differences at h = 1e-4.
    let h = 1e-4;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let (gamma, m, n) = random_connection(1000 + i);
        let mut rng = sampling::rng(3000 + i);
        let gam = |x: &[f64], f: &[f64]| gamma.gamma_at(x, f).unwrap();
        for _ in 0..3 {
            let x = sampling::point(&mut rng, m, -0.8, 0.8);
            let f = sampling::point(&mut rng, n, -0.8, 0.8);
            let exact = curvature_coeffs(&gamma, &x, &f).unwrap();
            let g0 = gam(&x, &f);
            // directional derivative of Gamma^alpha_nu along H_mu by FD
            let d_along = |mu: usize, nu: usize, alpha: usize| -> f64 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[mu] += h;
                xm[mu] -= h;
                let mut acc = (gam(&xp, &f)[alpha][nu] - gam(&xm, &f)[alpha][nu]) / (2.0 * h);
                for beta in 0..n {
                    let mut fp = f.clone();
                    let mut fm = f.clone();
                    fp[beta] += h;
                    fm[beta] -= h;
                    let dgdf =
                        (gam(&x, &fp)[alpha][nu] - gam(&x, &fm)[alpha][nu]) / (2.0 * h);
                    acc -= g0[beta][mu] * dgdf;
                }
                acc
            };
            for mu in 0..m {
                for nu in 0..m {
                    for alpha in 0..n {
                        let fd = d_along(mu, nu, alpha) - d_along(nu, mu, alpha);
                        worst = worst.max((exact[alpha][mu][nu] - fd).abs());
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-5, "worst FD mismatch {worst:e}");
    println!("criterion 2 (coefficients vs FD horizontal-lift commutators): pass ({worst:.2e})");
}

#[test]
fn criterion_3_linearity_characterization() {
    // induced linear connections are accepted
    let so3 = MatrixLieGroup::so3();
    let vars = xvars(2);
    let mut rng = sampling::rng(77);
    let comps = sampling::gauge_field_exprs(&mut rng, &vars, 2, 3, 2);
    let gauge = GaugeField::explicit(so3.clone(), vars.clone(), comps).unwrap();
    let rho = RepresentationMatrices::standard(so3.clone()).unwrap();
    let lin = Arc::new(induce_linear(&gauge, &rho).unwrap());
    let accepted = is_linear(&lin.embed(), 30, 5, 1e-9).unwrap();
    assert!(accepted.linear.is_some(), "induced linear rejected");

    let u1 = GaugeField::explicit(
        MatrixLieGroup::u1(),
        vars.clone(),
        vec![
            vec![parse_expr("x2^2", &["x1", "x2"]).unwrap()],
            vec![parse_expr("x1 - x2", &["x1", "x2"]).unwrap()],
        ],
    )
    .unwrap();
    let rho2 = RepresentationMatrices::u1_charge(2).unwrap();
    let lin2 = Arc::new(induce_linear(&u1, &rho2).unwrap());
    assert!(is_linear(&lin2.embed(), 30, 6, 1e-9).unwrap().linear.is_some());

    // fiber-quadratic perturbations are rejected
    for i in 0..10u64 {
        let mut rng = sampling::rng(400 + i);
        let chart = BundleChart::standard(2, 2).unwrap();
        let base = xvars(2);
        let q = rng.gen_range(0.001..1.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let exprs: Vec<Vec<Expr>> = (0..2)
            .map(|alpha| {
                (0..2)
                    .map(|_| {
                        let mut lin_part = Expr::constant(0.0);
                        for w in 1..=2 {
                            lin_part = lin_part
                                + sampling::polynomial(&mut rng, &base, 2)
                                    * Expr::var(&format!("f{w}"));
                        }
                        let quad = Expr::constant(q)
                            * Expr::var(&format!("f{}", alpha + 1))
                            * Expr::var("f1");
                        lin_part + quad
                    })
                    .collect()
            })
            .collect();
        let gamma = ChristoffelField::explicit(chart, exprs).unwrap();
        let verdict = is_linear(&gamma, 30, 500 + i, 1e-9).unwrap();
        assert!(
            verdict.linear.is_none() && verdict.max_deviation >= 1e-6,
            "perturbation {i} (q={q}) not rejected: deviation {:e}",
            verdict.max_deviation
        );
    }

    // classical curvature equals the contracted coefficient formula
    let mut rng = sampling::rng(88);
    let base = xvars(2);
    let coeff: Vec<Vec<Vec<Expr>>> = (0..2)
        .map(|_| {
            (0..2)
                .map(|_| {
                    (0..2)
                        .map(|_| sampling::polynomial(&mut rng, &base, 2))
                        .collect()
                })
                .collect()
        })
        .collect();
    let lin = Arc::new(LinearChristoffel::explicit(base.clone(), coeff).unwrap());
    let embedded = lin.embed();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = sampling::point(&mut rng, 2, -1.0, 1.0);
        let classical = lin.classical_curvature(&x).unwrap();
        for omega in 0..2 {
            let e: Vec<f64> = (0..2).map(|i| if i == omega { 1.0 } else { 0.0 }).collect();
            let contracted = curvature_coeffs(&embedded, &x, &e).unwrap();
            for mu in 0..2 {
                for nu in 0..2 {
                    for alpha in 0..2 {
                        worst = worst.max(
                            (classical[mu][nu][alpha][omega] - contracted[alpha][mu][nu])
                                .abs(),
                        );
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-12, "classical vs contracted {worst:e}");
    println!("criterion 3 (linear-connection characterization): pass ({worst:.2e})");
}

#[test]
fn criterion_4_principal_connection_axiom() {
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let group = if i % 2 == 0 {
            MatrixLieGroup::so3()
        } else {
            MatrixLieGroup::u1()
        };
        let m = 2 + (i % 2) as usize;
        let vars = xvars(m);
        let mut rng = sampling::rng(600 + i);
        let comps = sampling::gauge_field_exprs(&mut rng, &vars, m, group.dim(), 2);
        let gauge = GaugeField::explicit(group, vars, comps).unwrap();
        let report = check_principal_axiom(&gauge, 4, 700 + i).unwrap();
        assert!(report.pass, "field {i}: residual {:e}", report.max_residual);
        worst = worst.max(report.max_residual);
    }
    assert!(worst <= 1e-6);
    println!("criterion 4 (principal connection axiom): pass ({worst:.2e})");
}

#[test]
fn criterion_5_gauge_covariance_and_u1_group_chart() {
    // F[A^gamma] = Ad_{gamma^-1} F[A] over 25 seeded transformations
    let mut worst = 0.0f64;
    for i in 0..25u64 {
        let so3_case = i % 2 == 0;
        let group = if so3_case {
            MatrixLieGroup::so3()
        } else {
            MatrixLieGroup::u1()
        };
        let vars = xvars(2);
        let mut rng = sampling::rng(800 + i);
        let comps = sampling::gauge_field_exprs(&mut rng, &vars, 2, group.dim(), 2);
        let gauge = GaugeField::explicit(group.clone(), vars.clone(), comps).unwrap();
        let phi = sampling::polynomial(&mut rng, &vars, 2);
        let gt = if so3_case {
            GaugeTransformation::so3_about_z(vars.clone(), phi)
        } else {
            GaugeTransformation::u1_phase(vars.clone(), phi)
        };
        let transformed = gauge.gauge_transform(&gt);
        for _ in 0..5 {
            let x = sampling::point(&mut rng, 2, -1.0, 1.0);
            let f_base = gauge.field_strength(&x).unwrap();
            let f_new = transformed.field_strength(&x).unwrap();
            let g = gt.element_at(&x).unwrap();
            let g_inv = GroupElement {
                group: group.clone(),
                mat: g.mat.clone().try_inverse().unwrap(),
            };
            for mu in 0..2 {
                for nu in 0..2 {
                    let elem = group.algebra_element(f_base[mu][nu].clone()).unwrap();
                    let ad = adjoint(&g_inv, &elem).unwrap();
                    for a in 0..group.dim() {
                        worst = worst.max((f_new[mu][nu][a] - ad.coords[a]).abs());
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-10, "covariance residual {worst:e}");

    // U1 with an explicit group chart: put the phase angle on the fiber and
    // read the curvature of Gamma^1_mu = A_mu off the coefficient formula
    let vars = xvars(2);
    let a1 = parse_expr("x2^2 - 0.5*x1", &["x1", "x2"]).unwrap();
    let a2 = parse_expr("sin(x1) + x1*x2", &["x1", "x2"]).unwrap();
    let gauge = GaugeField::explicit(
        MatrixLieGroup::u1(),
        vars.clone(),
        vec![vec![a1.clone()], vec![a2.clone()]],
    )
    .unwrap();
    let chart = BundleChart::standard(2, 1).unwrap();
    let total_space = ChristoffelField::explicit(chart, vec![vec![a1, a2]]).unwrap();
    let mut rng = sampling::rng(900);
    let mut chart_worst = 0.0f64;
    for _ in 0..25 {
        let x = sampling::point(&mut rng, 2, -1.0, 1.0);
        let f = sampling::point(&mut rng, 1, -PI, PI);
        let r = curvature_coeffs(&total_space, &x, &f).unwrap();
        let fs = gauge.field_strength(&x).unwrap();
        chart_worst = chart_worst.max((r[0][0][1] - fs[0][1][0]).abs());
    }
    assert!(chart_worst <= 1e-10, "group chart residual {chart_worst:e}");
    println!("criterion 5 (gauge covariance + U1 group chart): pass ({worst:.2e}, {chart_worst:.2e})");
}

#[test]
fn criterion_6_universality_of_principal_curvature() {
    use gaugekit::associate::universality_check;
    // U1 on R^2
    let vars = xvars(2);
    let u1 = GaugeField::explicit(
        MatrixLieGroup::u1(),
        vars.clone(),
        vec![
            vec![parse_expr("x2^2", &["x1", "x2"]).unwrap()],
            vec![parse_expr("x1*x2 - 1", &["x1", "x2"]).unwrap()],
        ],
    )
    .unwrap();
    let gens_u1 = RepresentationMatrices::u1_charge(1).unwrap().generators().unwrap();
    let r1 = universality_check(&u1, &gens_u1, 100, 21, 1e-10).unwrap();
    assert!(r1.pass, "U1 residual {:e}", r1.max_residual);

    // SO3 on R^3
    let so3 = MatrixLieGroup::so3();
    let vars3 = xvars(3);
    let mut rng = sampling::rng(22);
    let comps = sampling::gauge_field_exprs(&mut rng, &vars3, 3, 3, 2);
    let gauge3 = GaugeField::explicit(so3.clone(), vars3, comps).unwrap();
    let rho = RepresentationMatrices::standard(so3.clone()).unwrap();
    let gens3 = rho.generators().unwrap();
    let r2 = universality_check(&gauge3, &gens3, 100, 23, 1e-10).unwrap();
    assert!(r2.pass, "SO3 residual {:e}", r2.max_residual);

    // holonomy-level version: induced transport = rho(group transport)
    let curve = Curve::new(
        vec![
            parse_expr("t", &["t"]).unwrap(),
            parse_expr("t^2 - 0.3*t", &["t"]).unwrap(),
            parse_expr("sin(t)", &["t"]).unwrap(),
        ],
        0.0,
        1.0,
    );
    let induced = induce_connection(&gauge3, &gens3).unwrap();
    let f0 = [0.3, -0.4, 0.8];
    let fiber = parallel_transport_fiber(&induced, &curve, &f0, 256).unwrap();
    let g = group_transport(&gauge3, &curve, &so3.identity_element(), 256).unwrap();
    let expect = &g.g.mat * nalgebra::DVector::from_row_slice(&f0);
    let mut hol = 0.0f64;
    for alpha in 0..3 {
        hol = hol.max((fiber.f[alpha] - expect[alpha]).abs());
    }
    assert!(hol <= 1e-6, "holonomy-level residual {hol:e}");
    println!(
        "criterion 6 (universality of principal curvature): pass ({:.2e}, {:.2e}, {hol:.2e})",
        r1.max_residual, r2.max_residual
    );
}

#[test]
fn criterion_7_functorial_properties() {
    use gaugekit::associate::product_preservation_check;
    let so3 = MatrixLieGroup::so3();
    let vars = xvars(2);
    let mut rng = sampling::rng(31);
    let comps = sampling::gauge_field_exprs(&mut rng, &vars, 2, 3, 2);
    let gauge = GaugeField::explicit(so3.clone(), vars.clone(), comps).unwrap();
    let gens_std = RepresentationMatrices::standard(so3.clone())
        .unwrap()
        .generators()
        .unwrap();
    let gens_adj = RepresentationMatrices::adjoint(so3.clone())
        .unwrap()
        .generators()
        .unwrap();
    let prod = product_preservation_check(&gauge, &gens_std, &gens_adj, 15, 32).unwrap();
    assert!(prod.pass, "product residual {:e}", prod.max_residual);
    assert!(prod.max_residual <= 1e-12);

    // trivial action: all generators vanish, so the induced connection is
    // exactly zero, not merely small
    let trivial = ActionGenerators::new(
        so3.clone(),
        vec!["f1".into(), "f2".into()],
        vec![vec![Expr::constant(0.0); 2]; 3],
    )
    .unwrap();
    let induced = induce_connection(&gauge, &trivial).unwrap();
    for _ in 0..10 {
        let x = sampling::point(&mut rng, 2, -1.0, 1.0);
        let f = sampling::point(&mut rng, 2, -1.0, 1.0);
        let g = induced.gamma_at(&x, &f).unwrap();
        for row in &g {
            for &v in row {
                assert_eq!(v, 0.0, "trivial action induced a nonzero symbol");
            }
        }
    }

    // induced linear connections pass is_linear
    let rho = RepresentationMatrices::standard(so3.clone()).unwrap();
    let lin = Arc::new(induce_linear(&gauge, &rho).unwrap());
    assert!(is_linear(&lin.embed(), 25, 33, 1e-9).unwrap().linear.is_some());
    println!(
        "criterion 7 (functorial properties): pass ({:.2e})",
        prod.max_residual
    );
}

#[test]
fn criterion_8_association_verifier() {
    // forward direction: L = induce_linear(A, rho), S = rho -> all pass
    let so3 = MatrixLieGroup::so3();
    let vars = xvars(2);
    let mut rng = sampling::rng(41);
    let comps = sampling::gauge_field_exprs(&mut rng, &vars, 2, 3, 2);
    let gauge = GaugeField::explicit(so3.clone(), vars.clone(), comps.clone()).unwrap();
    let rho = RepresentationMatrices::standard(so3.clone()).unwrap();
    let linear = induce_linear(&gauge, &rho).unwrap();
    let candidate = AssociationCandidate::constant(vars.clone(), &rho.mats);
    let fwd = check_association_candidate(&linear, &gauge, &candidate, 12, 42, 1e-8).unwrap();
    assert!(
        fwd.parallel.pass && fwd.representation.pass && fwd.curvature.pass,
        "forward direction failed: {fwd:?}"
    );

    // control A: S scaled by a non-constant function of x (abelian so the
    // bracket check stays trivially satisfied) -> parallel and curvature fail
    let u1_vars = xvars(2);
    let u1 = GaugeField::explicit(
        MatrixLieGroup::u1(),
        u1_vars.clone(),
        vec![
            vec![parse_expr("x2^2 - 0.5", &["x1", "x2"]).unwrap()],
            vec![parse_expr("0.3*x1", &["x1", "x2"]).unwrap()],
        ],
    )
    .unwrap();
    let rho_u1 = RepresentationMatrices::u1_charge(2).unwrap();
    let lin_u1 = induce_linear(&u1, &rho_u1).unwrap();
    let scale = parse_expr("1 + x1^2", &["x1", "x2"]).unwrap();
    let scaled = AssociationCandidate {
        base_vars: u1_vars.clone(),
        s: vec![rho_u1.mats[0]
            .row_iter()
            .map(|row| {
                row.iter()
                    .map(|&v| scale.clone() * Expr::constant(v))
                    .collect()
            })
            .collect()],
    };
    let a = check_association_candidate(&lin_u1, &u1, &scaled, 12, 43, 1e-8).unwrap();
    assert!(!a.parallel.pass, "control A: parallel should fail");
    assert!(a.representation.pass, "control A: representation should pass");
    assert!(!a.curvature.pass, "control A: curvature should fail");

    // control B: L perturbed by an identity-valued one-form; the perturbation
    // commutes through the parallel condition but shifts the curvature
    let basis = &so3.basis;
    let coeff: Vec<Vec<Vec<Expr>>> = (0..3)
        .map(|alpha| {
            (0..2)
                .map(|mu| {
                    (0..3)
                        .map(|omega| {
                            let mut acc = Expr::constant(0.0);
                            for (a_idx, e) in basis.iter().enumerate() {
                                let c = e[(alpha, omega)];
                                if c != 0.0 {
                                    acc = acc
                                        + comps[mu][a_idx].clone() * Expr::constant(c);
                                }
                            }
                            if alpha == omega && mu == 1 {
                                acc = acc + Expr::var("x1");
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let perturbed = LinearChristoffel::explicit(vars.clone(), coeff).unwrap();
    let b = check_association_candidate(&perturbed, &gauge, &candidate, 12, 44, 1e-8).unwrap();
    assert!(b.parallel.pass, "control B: parallel should pass");
    assert!(b.representation.pass, "control B: representation should pass");
    assert!(!b.curvature.pass, "control B: curvature should fail");

    // control C: flat trivial setup with a sign flipped on one generator;
    // only the bracket relations notice
    let flat_gauge = GaugeField::explicit(
        so3.clone(),
        vars.clone(),
        vec![vec![Expr::constant(0.0); 3]; 2],
    )
    .unwrap();
    let flat_linear = LinearChristoffel::explicit(
        vars.clone(),
        vec![vec![vec![Expr::constant(0.0); 3]; 2]; 3],
    )
    .unwrap();
    let mut flipped_mats = rho.mats.clone();
    flipped_mats[2] = -flipped_mats[2].clone();
    let flipped = AssociationCandidate::constant(vars.clone(), &flipped_mats);
    let c = check_association_candidate(&flat_linear, &flat_gauge, &flipped, 12, 45, 1e-8)
        .unwrap();
    assert!(c.parallel.pass, "control C: parallel should pass");
    assert!(!c.representation.pass, "control C: representation should fail");
    assert!(c.curvature.pass, "control C: curvature should pass");

    println!("criterion 8 (association verifier + negative controls): pass");
}

#[test]
fn criterion_9_transport_numerics() {
    // RK4 order on a closed-form oracle: fdot = -f^2, f(1) = 1/2
    let chart = BundleChart::standard(1, 1).unwrap();
    let gamma = ChristoffelField::explicit(
        chart,
        vec![vec![parse_expr("f1^2", &["x1", "f1"]).unwrap()]],
    )
    .unwrap();
    let line = Curve::new(vec![Expr::var("t")], 0.0, 1.0);
    let err = |steps: usize| -> f64 {
        let t = parallel_transport_fiber(&gamma, &line, &[1.0], steps).unwrap();
        (t.f[0] - 0.5).abs()
    };
    let order = (err(4) / err(8)).log2();
    assert!(order >= 3.8, "observed order {order}");

    // monopole (k = 1, A_phi = (1 - cos theta)/2) in spherical coordinates
    let vars = xvars(2);
    let a_phi = Expr::constant(0.5) * (Expr::constant(1.0) - Expr::var("x1").cos());
    let gauge = GaugeField::explicit(
        MatrixLieGroup::u1(),
        vars,
        vec![vec![Expr::constant(0.0)], vec![a_phi]],
    )
    .unwrap();

    // latitude holonomy vs the Stokes oracle: the transport angle equals
    // minus the flux through the polar cap, 2*pi*(1 - cos theta0)/2
    let theta0 = 1.1f64;
    let latitude = Curve::new(
        vec![
            Expr::constant(theta0),
            Expr::constant(2.0 * PI) * Expr::var("t"),
        ],
        0.0,
        1.0,
    );
    let h = group_transport(
        &gauge,
        &latitude,
        &gauge.group().identity_element(),
        256,
    )
    .unwrap();
    let angle = h.g.mat[(1, 0)].atan2(h.g.mat[(0, 0)]);
    let stokes = -(PI * (1.0 - theta0.cos()));
    let diff = (angle - stokes + PI).rem_euclid(2.0 * PI) - PI;
    assert!(diff.abs() <= 1e-5, "holonomy {angle} vs Stokes {stokes}");

    // flux over the epsilon-excised sphere vs the analytic antiderivative
    // -cos(theta)/2: total = 2*pi*cos(eps) = 2*pi*(1 - O(eps^2))
    let eps = 1e-3f64;
    let total = flux(
        &gauge,
        0,
        0,
        1,
        &[0.0, 0.0],
        [[eps, PI - eps], [0.0, 2.0 * PI]],
        128,
    )
    .unwrap();
    let analytic = 2.0 * PI * eps.cos();
    assert!((total - analytic).abs() <= 1e-6, "flux {total} vs {analytic}");
    assert!(
        (total / (2.0 * PI) - 1.0).abs() <= eps * eps,
        "flux not 2*pi*(1 - O(eps^2)): {total}"
    );
    println!("criterion 9 (transport numerics): pass (order {order:.2})");
}

#[test]
fn criterion_10_structured_report_determinism() {
    use std::process::Command;
    let cfg = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/monopole.toml");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_gaugekit"))
            .args(["run", cfg.to_str().unwrap(), "--format", "structured"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout, "structured reports differ between runs");
    println!("criterion 10 (structured report determinism): pass");
}
