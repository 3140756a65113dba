use proptest::prelude::*;

use magstat::harness::{
    compute_eoc, find_benchmark, manufactured, relative_errors, run_study, setup_from_config, solve_level,
    study_csv, study_overrides, ErrorMode, Reference, STUDY_CSV_HEADER,
};
use magstat::solver::NewtonConfig;

proptest! {
    #[test]
    fn eoc_recovers_geometric_rates(e0 in 1e-6..1.0f64, rate in 0.5..5.0f64, n in 2usize..6) {
        let errors: Vec<f64> = (0..n).map(|i| e0 * 2f64.powf(-rate * i as f64)).collect();
        let eoc = compute_eoc(&errors, 2.0).unwrap();
        prop_assert_eq!(eoc.len(), n - 1);
        for r in eoc {
            prop_assert!((r - rate).abs() < 1e-9);
        }
    }
}

#[test]
fn studies_are_bitwise_reproducible() {
    let bench = manufactured();
    let cfg = NewtonConfig::default();
    let a = run_study(&bench, 1, 2, &cfg).unwrap();
    let b = run_study(&bench, 1, 2, &cfg).unwrap();
    let csv = study_csv(&a.rows);
    assert_eq!(csv, study_csv(&b.rows));
    assert_eq!(csv.lines().next().unwrap(), STUDY_CSV_HEADER);
    assert_eq!(csv.lines().count(), 3);
    for (x, y) in a.reports.iter().zip(&b.reports) {
        assert_eq!(x.to_json(), y.to_json());
    }
}

/// Against a reference one level finer, the error is within a few percent of
/// the error against a reference two levels finer.
#[test]
fn refined_reference_is_consistent() {
    let bench = find_benchmark("two_wire_disc").unwrap();
    let cfg = NewtonConfig::default();
    let coarse = solve_level(&bench, 0, 1, &cfg).unwrap();
    let fine = solve_level(&bench, 1, 1, &cfg).unwrap();
    let finer = solve_level(&bench, 2, 1, &cfg).unwrap();
    let (e1, _) = relative_errors(&coarse, Reference::Finer(&fine)).unwrap();
    let (e2, _) = relative_errors(&coarse, Reference::Finer(&finer)).unwrap();
    assert!(e1 > 0.0 && e2 > 0.0);
    assert!(e1 <= 1.05 * e2 && e2 <= 2.0 * e1, "{e1} vs {e2}");
    let (e_fine, _) = relative_errors(&fine, Reference::Finer(&finer)).unwrap();
    assert!(e_fine < e2);
}

#[test]
fn benchmarks_are_listed_and_switchable() {
    for name in ["manufactured", "two_wire_disc", "pm_toy", "annulus_mapped", "annulus_direct"] {
        let b = find_benchmark(name).unwrap();
        assert_eq!(b.name, name);
    }
    assert!(find_benchmark("nope").is_err());
    let b = manufactured().with_error_mode(ErrorMode::parse("successive-refinement").unwrap()).unwrap();
    assert_eq!(b.error_mode.name(), "successive-refinement");
}

#[test]
fn config_drives_a_solve() {
    let text = "\
mesh = unit_square
n = 4
degree = 1

[material.1]
type = brauer

[source]
type = field
hx = 0
hy = 800

[newton]
rho = 0.5
sigma = 0.01
";
    let setup = setup_from_config(text, None).unwrap();
    assert_eq!(setup.problem.space().degree(), 2);
    let (_, report) = magstat::solver::newton_solve(&setup.problem, None, &setup.newton).unwrap();
    assert!(report.converged);

    assert!(setup_from_config(&format!("{text}bogus = 1\n"), None).is_err());
    assert!(study_overrides("[newton]\nsigma = 0.7\n").is_err());
    assert_eq!(study_overrides("error_mode = successive-refinement\n").unwrap().error_mode.map(|m| m.name()), Some("successive-refinement"));
}
