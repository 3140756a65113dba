use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use magstat::femspace::FESpace;
use magstat::materials::{BrauerParams, LinearIsotropic, SharedLaw};
use magstat::mesh::generate_unit_square;
use magstat::solver::{newton_solve, NewtonConfig};
use magstat::{Problem, Source};

fn iron_problem(p: usize) -> Problem<f64> {
    let mesh = Arc::new(generate_unit_square::<f64>(3).unwrap());
    let tags: Vec<i32> = mesh.boundary_tags().into_iter().collect();
    let space = Arc::new(FESpace::new(mesh, p, &tags).unwrap());
    let law: SharedLaw<f64> = Arc::new(BrauerParams::standard_iron());
    let laws = BTreeMap::from([(1, law)]);
    let hs = Arc::new(|x: [f64; 2]| [300.0 * x[1], -200.0 * x[0]]);
    Problem::with_default_rule(space, laws, Source::Field(hs)).unwrap()
}

fn state(n: usize, seed: &[f64], scale: f64) -> Vec<f64> {
    (0..n).map(|i| scale * seed[i % seed.len()]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_and_hessian_are_derivatives(
        p in 1usize..=3,
        s1 in prop::collection::vec(-1.0..1.0f64, 97),
        s2 in prop::collection::vec(-1.0..1.0f64, 89),
        scale in 0.0..0.5f64,
    ) {
        let problem = iron_problem(p);
        let n = problem.n_free();
        let a = state(n, &s1, scale);
        let d = state(n, &s2, 0.1);
        let eps = 1e-5;

        let r = problem.assemble_residual(&a).unwrap();
        let rd: f64 = r.iter().zip(&d).map(|(x, y)| x * y).sum();
        let fd = (problem.energy_change(&a, &d, eps).unwrap() - problem.energy_change(&a, &d, -eps).unwrap()) / (2.0 * eps);
        let mag: f64 = r.iter().zip(&d).map(|(x, y)| (x * y).abs()).sum();
        prop_assert!((rd - fd).abs() <= 1e-6 * mag.max(1e-12));

        let h = problem.assemble_hessian(&a).unwrap();
        prop_assert!(h.asymmetry() <= 1e-12 * h.max_abs());
        let hd = h.mul(&d);
        let ap: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + eps * y).collect();
        let am: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x - eps * y).collect();
        let (rp, rm) = (problem.assemble_residual(&ap).unwrap(), problem.assemble_residual(&am).unwrap());
        let err: f64 = hd.iter().zip(rp.iter().zip(&rm)).map(|(x, (u, v))| (x - (u - v) / (2.0 * eps)).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = hd.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-5 * norm);
        prop_assert!(h.bilinear(&d, &d) > 0.0);
    }

    #[test]
    fn energy_change_matches_energy_difference(
        s1 in prop::collection::vec(-1.0..1.0f64, 53),
        s2 in prop::collection::vec(-1.0..1.0f64, 59),
        tau in 0.01..1.0f64,
    ) {
        let problem = iron_problem(2);
        let n = problem.n_free();
        let a = state(n, &s1, 0.3);
        let d = state(n, &s2, 0.3);
        let ad: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + tau * y).collect();
        let diff = problem.assemble_energy(&ad).unwrap() - problem.assemble_energy(&a).unwrap();
        let change = problem.energy_change(&a, &d, tau).unwrap();
        let scale = problem.assemble_energy(&a).unwrap().abs() + problem.assemble_energy(&ad).unwrap().abs();
        prop_assert!((diff - change).abs() <= 1e-10 * scale);
    }
}

/// With a linear law and a source that is exact for the space, the discrete
/// solution is the interpolant of the bubble `x(1-x)y(1-y)`.
#[test]
fn polynomial_solution_is_reproduced() {
    let nu = 3.0;
    let mesh = Arc::new(generate_unit_square::<f64>(2).unwrap());
    let tags: Vec<i32> = mesh.boundary_tags().into_iter().collect();
    let space = Arc::new(FESpace::new(mesh, 4, &tags).unwrap());
    let law: SharedLaw<f64> = Arc::new(LinearIsotropic::new(nu).unwrap());
    let js = Arc::new(move |x: [f64; 2]| 2.0 * nu * (x[0] * (1.0 - x[0]) + x[1] * (1.0 - x[1])));
    let problem = Problem::with_default_rule(Arc::clone(&space), BTreeMap::from([(1, law)]), Source::Density(js)).unwrap();
    let (a, report) = newton_solve(&problem, None, &NewtonConfig::default()).unwrap();
    assert!(report.converged);
    let exact = space.interpolate(|x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])).unwrap();
    let err = a.iter().zip(exact.iter()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "max coefficient error {err}");
}

/// Galerkin orthogonality for the linear problem: the residual of the
/// discrete solution vanishes against every test function, and the energy
/// grows quadratically in any direction.
#[test]
fn linear_solution_is_energy_minimizer() {
    let mesh = Arc::new(generate_unit_square::<f64>(4).unwrap());
    let tags: Vec<i32> = mesh.boundary_tags().into_iter().collect();
    let space = Arc::new(FESpace::new(mesh, 2, &tags).unwrap());
    let law: SharedLaw<f64> = Arc::new(LinearIsotropic::new(2.0).unwrap());
    let js = Arc::new(|x: [f64; 2]| (3.0 * x[0]).sin() + x[1]);
    let problem = Problem::with_default_rule(space, BTreeMap::from([(1, law)]), Source::Density(js)).unwrap();
    let (a, _) = newton_solve(&problem, None, &NewtonConfig::default()).unwrap();
    let r = problem.assemble_residual(&a).unwrap();
    let load: f64 = problem.assemble_load().iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-10 * load);
    for i in [0, 7, 20] {
        let mut d = vec![0.0; problem.n_free()];
        d[i] = 1.0;
        let dw = problem.energy_change(&a, &d, 1e-2).unwrap();
        let expect = 0.5 * 1e-4 * 2.0 * problem.assemble_stiffness().get(i, i);
        assert!((dw - expect).abs() <= 1e-8 * expect);
    }
}
