use proptest::prelude::*;

use magstat::quadrature::{discrete_inner_product, rule_for_degree, STORED_DEGREES};
use magstat::mesh::generate_unit_square;
use magstat::QuadratureRule;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Exact integral of `x^a y^b` over the triangle with vertices v0, v0+e1, v0+e2
/// for v0 = 0: `|det| a! b! / (a+b+2)!` after the substitution x = e1 s + e2 t
/// only holds for axis-aligned legs, which is what the strategy generates.
fn scaled_monomial(a: u32, b: u32, sx: f64, sy: f64) -> f64 {
    sx.powi(a as i32 + 1) * sy.powi(b as i32 + 1) * factorial(a) * factorial(b) / factorial(a + b + 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stored_rules_integrate_polynomials(
        idx in 0usize..STORED_DEGREES.len(),
        coeffs in prop::collection::vec(-1.0..1.0f64, 45),
        sx in 0.1..3.0f64,
        sy in 0.1..3.0f64,
    ) {
        let d = STORED_DEGREES[idx] as u32;
        let rule: QuadratureRule<f64> = rule_for_degree(d as usize).unwrap();
        let mut terms = Vec::new();
        for a in 0..=d {
            for b in 0..=d - a {
                terms.push((a, b));
            }
        }
        let exact: f64 = terms.iter().zip(&coeffs).map(|(&(a, b), c)| c * scaled_monomial(a, b, sx, sy)).sum();
        let f = |x: [f64; 2]| -> f64 {
            terms.iter().zip(&coeffs).map(|(&(a, b), c)| c * x[0].powi(a as i32) * x[1].powi(b as i32)).sum()
        };
        let q = rule.integrate_on(&[[0.0, 0.0], [sx, 0.0], [0.0, sy]], f);
        let scale: f64 = terms.iter().zip(&coeffs).map(|(&(a, b), c)| (c * scaled_monomial(a, b, sx, sy)).abs()).sum();
        prop_assert!((q - exact).abs() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn discrete_inner_product_is_symmetric_and_positive(
        p in prop::array::uniform3(-1.0..1.0f64),
        r in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let mesh = generate_unit_square::<f64>(3).unwrap();
        let rule: QuadratureRule<f64> = rule_for_degree(2).unwrap();
        let u = |x: [f64; 2]| p[0] + p[1] * x[0] + p[2] * x[1];
        let v = |x: [f64; 2]| r[0] + r[1] * x[0] * x[1] + r[2] * x[1];
        let uv = discrete_inner_product(&mesh, &rule, u, v);
        let vu = discrete_inner_product(&mesh, &rule, v, u);
        prop_assert!((uv - vu).abs() <= 1e-14);
        prop_assert!(discrete_inner_product(&mesh, &rule, u, u) >= 0.0);
    }
}

#[test]
fn requests_above_the_table_fail() {
    assert!(rule_for_degree::<f64>(9).is_err());
    for d in 0..=8 {
        assert!(rule_for_degree::<f64>(d).unwrap().degree() >= d);
    }
}
