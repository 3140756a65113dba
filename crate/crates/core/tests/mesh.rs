use proptest::prelude::*;

use magstat::mesh::{generate_disc, generate_rectangle, parse_mesh, serialize_mesh};
use magstat::Mesh;

fn rectangle() -> impl Strategy<Value = Mesh<f64>> {
    (1usize..6, 1usize..6, -2.0..2.0f64, 0.1..3.0f64, -2.0..2.0f64, 0.1..3.0f64)
        .prop_map(|(nx, ny, x0, w, y0, h)| generate_rectangle(nx, ny, [x0, x0 + w], [y0, y0 + h]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_rectangles_tile_the_box(m in rectangle()) {
        let (lo, hi) = m.bounding_box();
        let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        prop_assert!((m.total_area() - box_area).abs() <= 1e-12 * box_area);
        for t in 0..m.num_triangles() {
            prop_assert!(m.signed_area(t) > 0.0);
        }
    }

    #[test]
    fn refinement_quarters_triangles(m in rectangle()) {
        let r = m.refine_uniform();
        prop_assert_eq!(r.num_triangles(), 4 * m.num_triangles());
        prop_assert!((r.total_area() - m.total_area()).abs() <= 1e-12 * m.total_area());
        for t in 0..m.num_triangles() {
            let parent = m.signed_area(t);
            let kids: f64 = (4 * t..4 * t + 4).map(|c| r.signed_area(c)).sum();
            prop_assert!((kids - parent).abs() <= 1e-12 * parent);
            for c in 4 * t..4 * t + 4 {
                prop_assert!((r.signed_area(c) - parent / 4.0).abs() <= 1e-12 * parent);
                prop_assert!((r.shape_ratio(c) - m.shape_ratio(t)).abs() <= 1e-10 * m.shape_ratio(t));
                prop_assert_eq!(r.regions()[c], m.regions()[t]);
            }
        }
        prop_assert_eq!(r.boundary_edges().len(), 2 * m.boundary_edges().len());
        prop_assert_eq!(r.boundary_tags(), m.boundary_tags());
    }

    #[test]
    fn text_format_round_trips(m in rectangle()) {
        let back: Mesh<f64> = parse_mesh(&serialize_mesh(&m)).unwrap();
        prop_assert_eq!(back.vertices(), m.vertices());
        prop_assert_eq!(back.triangles(), m.triangles());
        prop_assert_eq!(back.regions(), m.regions());
        prop_assert_eq!(back.boundary_edges().len(), m.boundary_edges().len());
    }
}

#[test]
fn disc_area_converges_to_circle() {
    let mut prev = f64::INFINITY;
    for rings in [2, 4, 8, 16] {
        let m: Mesh<f64> = generate_disc(1.0, rings).unwrap();
        let gap = std::f64::consts::PI - m.total_area();
        assert!(gap > 0.0 && gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-2);
}

#[test]
fn malformed_text_reports_line() {
    let text = "$Nodes 3\n1 0 0\n2 1 0\n3 0 x\n";
    match parse_mesh::<f64>(text) {
        Err(magstat::Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
}
