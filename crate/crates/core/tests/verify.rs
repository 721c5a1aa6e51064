use laguerre_bellman::verify::{
    analytic_form_max, beta_grid, brute_force_form, check_c1_matching, check_case_split, check_general_left,
    check_general_right, check_h_sign, check_majorization, check_simple_conditions, run_suite, FormCase,
    SuiteOptions,
};
use laguerre_bellman::{sharp_constants, BellmanProfile, Grid};

fn suite_passes(p: f64) {
    let prof = BellmanProfile::new(p).unwrap();
    for r in run_suite(&prof, &SuiteOptions::default()) {
        assert!(r.passed, "p={p}: {}", r.to_json());
    }
}

#[test]
fn right_suite_passes() {
    for p in [2.0, 2.1, 2.5, 3.0, 5.0, 10.0] {
        suite_passes(p);
    }
}

#[test]
fn left_suite_passes() {
    for p in [1.2, 1.5, 1.8] {
        suite_passes(p);
    }
}

#[test]
fn large_order_suite_passes() {
    suite_passes(40.0);
}

#[test]
fn suite_contents_depend_on_side() {
    let ids = |p: f64| -> Vec<String> {
        run_suite(&BellmanProfile::new(p).unwrap(), &SuiteOptions::default())
            .into_iter()
            .map(|r| r.condition_id)
            .collect()
    };
    assert!(ids(3.0).contains(&"general_right".to_string()));
    assert!(ids(1.5).contains(&"general_left".to_string()));
    // H_2 L_2 vanishes identically, so no sign is checked at p = 2
    assert!(!ids(2.0).contains(&"h_laguerre_sign".to_string()));
}

#[test]
fn wrong_constant_is_caught() {
    for p in [1.5, 3.0, 5.0] {
        let c = sharp_constants(p).unwrap().c_p;
        let prof = BellmanProfile::with_constant(p, 0.9 * c).unwrap();
        let failed: Vec<_> = run_suite(&prof, &SuiteOptions::default()).into_iter().filter(|r| !r.passed).collect();
        assert!(!failed.is_empty(), "p={p}");
        assert!(failed.iter().any(|r| r.condition_id == "majorization"));
    }
}

#[test]
fn individual_checks() {
    let prof = BellmanProfile::new(3.0).unwrap();
    let grid = Grid::standard(2000, prof.z_p());
    assert!(check_majorization(&prof, &grid).passed);
    assert!(check_c1_matching(&prof).passed);
    let (plus, minus) = check_simple_conditions(&prof, &grid);
    assert!(plus.passed && minus.passed);
    assert!(check_h_sign(&prof, &grid).passed);
    assert!(check_general_right(&prof, &grid).passed);

    let left = BellmanProfile::new(1.5).unwrap();
    let grid = Grid::standard(2000, left.z_p());
    assert!(check_general_left(&left, &grid, &beta_grid(10.0, 46)).passed);
}

#[test]
fn report_json_schema() {
    let prof = BellmanProfile::new(3.0).unwrap();
    let r = check_majorization(&prof, &Grid::uniform(50, 0.01, 0.99));
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in ["condition_id", "grid", "worst_slack", "worst_point", "passed"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["condition_id"], "majorization");
}

#[test]
fn grid_standard_is_sorted_and_dense_near_zero() {
    let z = 0.4;
    let g = Grid::standard(1000, z);
    assert!(g.points.len() > 1000);
    assert!(g.points.windows(2).all(|w| w[0] < w[1]));
    let near = g.points.iter().filter(|&&s| (s - z).abs() < 1e-3).count();
    assert!(near >= 20, "{near}");
}

#[test]
fn case_split_covers_all_cases_and_holds() {
    let prof = BellmanProfile::new(3.0).unwrap();
    let mut seen = Vec::new();
    for i in 1..400 {
        let s = i as f64 / 400.0;
        let rec = check_case_split(&prof, 1.0 - s, s).unwrap();
        assert!(rec.holds, "s={s}: {rec:?}");
        assert!(rec.analytic_max <= 1e-8 * rec.coefficients.scale, "s={s}: {rec:?}");
        if !seen.contains(&rec.case) {
            seen.push(rec.case);
        }
    }
    assert!(seen.contains(&FormCase::NonNegativeA) || seen.contains(&FormCase::NegativeAWithinCone));
    assert!(check_case_split(&BellmanProfile::new(1.5).unwrap(), 0.5, 0.5).is_err());
}

#[test]
fn brute_force_never_beats_analytic_max() {
    for p in [1.5, 3.0, 6.0] {
        let prof = BellmanProfile::new(p).unwrap();
        for i in 1..40 {
            let s = i as f64 / 40.0;
            let (x, y) = (1.0 - s, s);
            let analytic = analytic_form_max(&prof, x, y, 10.0).unwrap();
            let sampled = brute_force_form(&prof, x, y, 4000, i).unwrap();
            let scale = laguerre_bellman::verify::FormCoefficients::at(&prof, x, y).unwrap().scale;
            assert!(sampled <= analytic + 1e-12 * scale, "p={p} s={s}: {sampled} > {analytic}");
            assert!(analytic <= 1e-8 * scale, "p={p} s={s}: {analytic}");
        }
    }
}

#[test]
fn form_rejects_axis_points() {
    let prof = BellmanProfile::new(3.0).unwrap();
    assert!(analytic_form_max(&prof, 0.0, 1.0, 10.0).is_err());
    assert!(brute_force_form(&prof, 1.0, 0.0, 10, 0).is_err());
}
