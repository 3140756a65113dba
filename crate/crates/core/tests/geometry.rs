use std::sync::Arc;

use proptest::prelude::*;

use magstat::geometry::{pullback_material, pushforward_b, AffineMap, QuarterAnnulus, SharedMap};
use magstat::materials::{AnisotropicLinear, BrauerParams, MaterialLaw, SharedLaw};

fn matrix() -> impl Strategy<Value = [[f64; 2]; 2]> {
    prop::array::uniform4(-2.0..2.0f64)
        .prop_map(|m| [[m[0], m[1]], [m[2], m[3]]])
        .prop_filter("orientation preserving", |m| m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.05)
}

fn maps() -> impl Strategy<Value = SharedMap<f64>> {
    prop_oneof![
        (matrix(), prop::array::uniform2(-1.0..1.0f64))
            .prop_map(|(matrix, shift)| Arc::new(AffineMap { matrix, shift }) as SharedMap<f64>),
        (0.1..0.9f64, 1.0..2.0f64).prop_map(|(ri, ro)| Arc::new(QuarterAnnulus::new(ri, ro).unwrap()) as SharedMap<f64>),
    ]
}

fn physical() -> Vec<SharedLaw<f64>> {
    vec![
        Arc::new(BrauerParams::standard_iron()),
        Arc::new(AnisotropicLinear::new([[1.5, 0.3], [0.3, 1.0]]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn energy_and_pairing_are_invariant(
        map in maps(),
        idx in 0usize..2,
        x in prop::array::uniform2(0.0..1.0f64),
        b1 in prop::array::uniform2(-2.0..2.0f64),
        b2 in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let phys = Arc::clone(&physical()[idx]);
        let law = pullback_material(Arc::clone(&map), Arc::clone(&phys), &[x]).unwrap();
        let j = map.det_jacobian(x);
        let xp = map.phi(x);
        let (p1, p2) = (pushforward_b(map.as_ref(), x, b1).unwrap(), pushforward_b(map.as_ref(), x, b2).unwrap());

        let w_ref = law.energy(x, b1);
        let w_phys = j * phys.energy(xp, p1);
        prop_assert!((w_ref - w_phys).abs() <= 1e-12 * w_phys.abs().max(1e-300));

        let (h1, h2) = (law.field(x, b1), law.field(x, b2));
        let lhs = (h1[0] - h2[0]) * (b1[0] - b2[0]) + (h1[1] - h2[1]) * (b1[1] - b2[1]);
        let (g1, g2) = (phys.field(xp, p1), phys.field(xp, p2));
        let rhs = j * ((g1[0] - g2[0]) * (p1[0] - p2[0]) + (g1[1] - g2[1]) * (p1[1] - p2[1]));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
    }

    #[test]
    fn pulled_back_bounds_hold_at_probes(map in maps(), x in prop::array::uniform2(0.0..1.0f64), b in prop::array::uniform2(-3.0..3.0f64), xi in prop::array::uniform2(-1.0..1.0f64)) {
        let phys = Arc::clone(&physical()[0]);
        let law = pullback_material(Arc::clone(&map), phys, &[x]).unwrap();
        let bounds = law.bounds().unwrap();
        let nu = law.differential_reluctivity(x, b);
        let q = xi[0] * (nu[0][0] * xi[0] + nu[0][1] * xi[1]) + xi[1] * (nu[1][0] * xi[0] + nu[1][1] * xi[1]);
        let n2 = xi[0] * xi[0] + xi[1] * xi[1];
        prop_assert!(q >= bounds.gamma * n2 * (1.0 - 1e-9));
        prop_assert!(q <= bounds.lipschitz * n2 * (1.0 + 1e-9));
    }
}

#[test]
fn reflections_are_rejected() {
    let map: SharedMap<f64> = Arc::new(AffineMap { matrix: [[1.0, 0.0], [0.0, -1.0]], shift: [0.0, 0.0] });
    let law: SharedLaw<f64> = Arc::new(BrauerParams::standard_iron());
    assert!(matches!(pullback_material(map, law, &[[0.5, 0.5]]), Err(magstat::Error::Orientation { .. })));
}
