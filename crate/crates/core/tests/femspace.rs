use std::sync::Arc;

use proptest::prelude::*;

use magstat::femspace::{FESpace, LagrangeBasis};
use magstat::mesh::{generate_disc, generate_unit_square};
use magstat::quadrature::rule_for_degree;
use magstat::assembly::default_rule;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_is_nodal_and_partitions_unity(p in 1usize..=5, s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let basis = LagrangeBasis::new(p);
        prop_assert_eq!(basis.len(), (p + 1) * (p + 2) / 2);
        let n = basis.len();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        for j in 0..n {
            basis.eval(basis.node::<f64>(j), &mut v, &mut g);
            for (i, vi) in v.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vi - want).abs() < 1e-10);
            }
        }
        let xi = [s * (1.0 - t), t];
        basis.eval(xi, &mut v, &mut g);
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-11);
        prop_assert!(g.iter().map(|d| d[0]).sum::<f64>().abs() < 1e-9);
        prop_assert!(g.iter().map(|d| d[1]).sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn interpolation_reproduces_space_polynomials(
        p in 1usize..=4,
        c in prop::collection::vec(-1.0..1.0f64, 15),
        s in 0.0..1.0f64,
        t in 0.0..1.0f64,
    ) {
        let space = FESpace::new(Arc::new(generate_unit_square::<f64>(2).unwrap()), p, &[]).unwrap();
        let f = |x: [f64; 2]| -> f64 {
            let mut k = 0;
            let mut acc = 0.0;
            for a in 0..=p {
                for b in 0..=p - a {
                    acc += c[k] * x[0].powi(a as i32) * x[1].powi(b as i32);
                    k += 1;
                }
            }
            acc
        };
        let coeffs = space.interpolate(f).unwrap();
        let xi = [s * (1.0 - t), t];
        for e in 0..space.num_elements() {
            let x = space.map_to_physical(e, xi);
            let v = space.eval_field(&coeffs, e, xi).unwrap();
            prop_assert!((v - f(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn curl_norm_is_exact_and_definite(
        p in 1usize..=5,
        seed in prop::collection::vec(-1.0..1.0f64, 400),
        disc in any::<bool>(),
    ) {
        let mesh = if disc { generate_disc::<f64>(1.0, 2).unwrap() } else { generate_unit_square::<f64>(2).unwrap() };
        let tags: Vec<i32> = mesh.boundary_tags().into_iter().collect();
        let space = FESpace::new(Arc::new(mesh), p, &tags).unwrap();
        let v: Vec<f64> = (0..space.n_free()).map(|i| seed[i % seed.len()] + 1e-3 * i as f64).collect();
        let default = space.curl_norm_h(&v, &default_rule(p).unwrap());
        let exact = space.curl_norm_h(&v, &rule_for_degree(8).unwrap());
        prop_assert!(default > 0.0);
        prop_assert!((default - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn dirichlet_dofs_are_removed() {
    let mesh = Arc::new(generate_unit_square::<f64>(4).unwrap());
    let tags: Vec<i32> = mesh.boundary_tags().into_iter().collect();
    for p in 1..=5 {
        let free = FESpace::new(Arc::clone(&mesh), p, &[]).unwrap();
        let clamped = FESpace::new(Arc::clone(&mesh), p, &tags).unwrap();
        let side = 4 * p + 1;
        assert_eq!(free.n_free(), side * side);
        assert_eq!(clamped.n_free(), (side - 2) * (side - 2));
    }
    assert!(FESpace::new(Arc::clone(&mesh), 6, &tags).is_err());
}
