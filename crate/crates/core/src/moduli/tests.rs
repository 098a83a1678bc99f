use approx::assert_abs_diff_eq;

use super::*;
use crate::space::SpaceSpec;

/// Exact modulus of convexity for l_p with p >= 2 (disjoint-support
/// extremal pair): delta(eps) = 1 - (1 - (eps/2)^p)^(1/p).
fn two_point_delta(p: f64, eps: f64) -> f64 {
    1.0 - (1.0 - (eps / 2.0).powf(p)).powf(1.0 / p)
}

fn lp(p: f64, d: usize) -> SpaceSpec {
    SpaceSpec::lp(p, d).unwrap()
}

#[test]
fn euclid_closed_forms() {
    let s = SpaceSpec::euclidean(2);
    let b = SearchBudget::quick();
    assert_abs_diff_eq!(delta(&s, 1.0, &b).unwrap(), 0.1339745962155614, epsilon = 1e-14);
    assert_abs_diff_eq!(delta(&s, 0.0, &b).unwrap(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(delta(&s, 2.0, &b).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(zeta_minus(&s, 1.0, &b).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(zeta_plus(&s, 2.0, &b).unwrap(), 5f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(zeta_plus(&s, 0.0, &b).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(rho(&s, 1.0, &b).unwrap(), 2f64.sqrt() - 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(rho(&s, 0.0, &b).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn lp_estimators_match_euclid_at_p2() {
    // p = 2 in lp mode forces the search path; closed forms are the oracle.
    let s = lp(2.0, 2);
    let b = SearchBudget::quick();
    let eps = [0.25, 0.5, 1.0, 1.5, 1.9];
    let est = delta_grid(&s, &eps, &b).unwrap();
    for (&e, &d) in eps.iter().zip(&est) {
        assert_abs_diff_eq!(d, euclid_delta(e), epsilon = 1e-4);
    }
    let ts = [0.25, 1.0, 2.0];
    let zm = zeta_minus_grid(&s, &ts, &b).unwrap();
    let zp = zeta_plus_grid(&s, &ts, &b).unwrap();
    for i in 0..ts.len() {
        assert_abs_diff_eq!(zm[i], euclid_zeta(ts[i]), epsilon = 1e-4);
        assert_abs_diff_eq!(zp[i], euclid_zeta(ts[i]), epsilon = 1e-4);
    }
    let taus = [0.25, 0.5];
    let rh = rho_grid(&s, &taus, &b).unwrap();
    for i in 0..taus.len() {
        assert_abs_diff_eq!(rh[i], euclid_rho(taus[i]), epsilon = 1e-4);
    }
}

#[test]
fn lp_delta_matches_two_point_formula_above_2() {
    let b = SearchBudget::quick();
    for &p in &[3.0, 4.0] {
        let s = lp(p, 2);
        let eps = [0.5, 1.0, 1.8];
        let est = delta_grid(&s, &eps, &b).unwrap();
        for (&e, &d) in eps.iter().zip(&est) {
            let exact = two_point_delta(p, e);
            // Search undershoots the infimum never, overshoots only by the
            // sweep resolution.
            assert!(d >= exact - 1e-12, "delta({e}) = {d} below exact {exact}");
            assert!(d <= exact + 1e-4, "delta({e}) = {d} above exact {exact}");
        }
    }
}

#[test]
fn p4_delta_at_one_is_small_but_positive() {
    let s = lp(4.0, 2);
    let d = delta(&s, 1.0, &SearchBudget::quick()).unwrap();
    assert!(d > 0.0 && d <= 0.05, "delta = {d}");
    assert_abs_diff_eq!(d, two_point_delta(4.0, 1.0), epsilon = 1e-4);
}

#[test]
fn p15_zeta_minus_stays_in_band() {
    let s = lp(1.5, 2);
    let z = zeta_minus(&s, 0.5, &SearchBudget::quick()).unwrap();
    assert!(z > 1.0 && z <= 1.25f64.sqrt() + 1e-9, "zeta = {z}");
    // Regression baseline measured at this budget; the search is
    // deterministic, so drift beyond refinement noise means a change in
    // behavior.
    assert_abs_diff_eq!(z, 1.0616682054762734, epsilon = 1e-6);
}

#[test]
fn dimension_three_agrees_with_planar_extremals() {
    let b = SearchBudget::quick();
    // Sections of l_2 are circles, so any sampled plane gives the truth.
    let z = zeta_minus(&lp(2.0, 3), 1.0, &b).unwrap();
    assert_abs_diff_eq!(z, 2f64.sqrt(), epsilon = 1e-3);
    // For p >= 2 the delta extremal pair lives in a coordinate plane.
    let d = delta(&lp(3.0, 3), 1.0, &b).unwrap();
    assert_abs_diff_eq!(d, two_point_delta(3.0, 1.0), epsilon = 1e-3);
}

#[test]
fn interpolant_rectifies_noisy_knots() {
    let ts = [0.5, 1.0, 1.5];
    let vs = [1.2, 1.1, 2.9]; // dip at 1.0, envelope breach at 1.5
    let z = ZetaInterpolant::from_knots(&ts, &vs).unwrap();
    assert_eq!(z.eval(0.0), 1.0);
    assert_eq!(z.eval(-1.0), 1.0);
    let mut prev = 1.0;
    for i in 0..=60 {
        let t = 2.0 * i as f64 / 60.0;
        let v = z.eval(t);
        assert!(v >= prev - 1e-12, "not monotone at {t}");
        assert!(v <= 1.0 + t + 1e-12, "envelope breach at {t}");
        prev = v;
    }
    // Beyond the last knot: slope-1 extension.
    let v2 = z.eval(2.0);
    assert_abs_diff_eq!(z.eval(3.0), v2 + 1.0, epsilon = 1e-12);
}

#[test]
fn isotonic_pools_adjacent_violators() {
    assert_eq!(isotonic(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
    assert_eq!(isotonic(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    assert_eq!(isotonic(&[2.0, 1.0]), vec![1.5, 1.5]);
}

#[test]
fn table_build_export_and_fits() {
    let s = lp(1.5, 2);
    let grid: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let table = ModulusTable::build(&s, &grid, &SearchBudget::quick()).unwrap();
    let csv = table.to_csv();
    assert!(csv.starts_with("eps,delta,zeta_minus,zeta_plus\n"));
    assert_eq!(csv.lines().count(), 10);

    // Power type q = max(p, 2) = 2 for p = 1.5; both fits positive, the
    // floor at most the geometric mean.
    let reg = fit_power_type_regression(&table).unwrap();
    let floor = fit_power_type_floor(&table).unwrap();
    assert_eq!(reg.q, 2.0);
    assert!(reg.c_x > 0.0);
    assert!(floor.c_x > 0.0);
    assert!(floor.c_x <= reg.c_x + 1e-12);

    let zi = table.zeta_minus_interpolant().unwrap();
    assert_eq!(zi.eval(0.0), 1.0);
    assert!(zi.eval(1.0) >= 1.0);
}

#[test]
fn equivalence_checks_p3_planar() {
    let s = lp(3.0, 2);
    let b = SearchBudget::quick();
    let conv = check_convexity_equivalence(&s, &[0.2, 0.5, 0.9], &b, 1e-3).unwrap();
    assert!(conv.passed(), "convexity margins: {:?}", conv.entries);
    let smooth = check_smoothness_equivalence(&s, &[0.1, 0.25, 0.5], &b, 1e-3).unwrap();
    assert!(smooth.passed(), "smoothness margins: {:?}", smooth.entries);
}

#[test]
fn equivalence_checks_euclid_analytic() {
    let s = SpaceSpec::euclidean(4);
    let b = SearchBudget::quick();
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let conv = check_convexity_equivalence(&s, &grid, &b, 1e-9).unwrap();
    assert_eq!(conv.violations, 0);
    let sgrid: Vec<f64> = (1..=10).map(|i| i as f64 / 20.0).collect();
    let smooth = check_smoothness_equivalence(&s, &sgrid, &b, 1e-9).unwrap();
    assert_eq!(smooth.violations, 0);
}

#[test]
fn rejects_invalid_inputs() {
    let b = SearchBudget::quick();
    let s1 = SpaceSpec::lp(1.0, 2).unwrap();
    assert!(delta(&s1, 0.5, &b).is_err()); // p = 1 not uniformly convex
    let s = SpaceSpec::euclidean(2);
    assert!(delta(&s, -0.1, &b).is_err());
    assert!(delta(&s, 2.5, &b).is_err());
    assert!(delta_grid(&s, &[0.5, 0.5], &b).is_err()); // not strictly increasing
    assert!(zeta_minus(&s, -1.0, &b).is_err());
    assert!(check_convexity_equivalence(&s, &[0.5, 1.2], &b, 1e-3).is_err());
    assert!(check_smoothness_equivalence(&s, &[0.6], &b, 1e-3).is_err());
    assert!(ZetaInterpolant::from_knots(&[0.0, 1.0], &[1.0]).is_err());
}
