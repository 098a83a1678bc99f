//! Greedy averaging with a dimension-free certificate.
//!
//! Given points of the unit ball whose convex hull contains the origin,
//! each step appends the element most opposed to the norming functional of
//! the running sum a_k = x_1 + ... + x_k. Such an element always pairs
//! nonpositively with the functional, which caps the growth of ||a_k|| by
//! the growing radius sequence R_k and makes the running average a_k / k
//! shrink at the rate R_k / k independently of the dimension.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::wolfe;
use crate::sequences::{RadiusSequence, SequenceKind};
use crate::space::{self, SpaceSpec, Vector};

/// Partial sums with norm at or below this are treated as zero: the norming
/// functional is undefined there and the next pick is unconstrained.
const ZERO_SUM: f64 = 1e-12;

/// Transcript of one greedy run.
///
/// `chosen[j]` is the point picked at step j + 1 and `partial_norms[j]` the
/// norm of the sum after that pick. `inner_products[j]` records the pairing
/// of `chosen[j + 1]` with the norming functional of the sum it was picked
/// against, or 0.0 on steps where the sum had vanished and the pick was
/// unconstrained.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaratheodoryRun {
    pub chosen: Vec<Vector>,
    pub partial_norms: Vec<f64>,
    pub bound: RadiusSequence,
    pub inner_products: Vec<f64>,
}

impl CaratheodoryRun {
    /// Number of completed steps K.
    pub fn steps(&self) -> usize {
        self.chosen.len()
    }
}

fn check_inputs(
    space: &SpaceSpec,
    points: &[Vector],
    steps: usize,
    bound: &RadiusSequence,
    tol: f64,
) -> Result<(), Error> {
    space.validate()?;
    if !space.is_smooth() {
        return Err(Error::BadExponent(space.p, "(1, infinity) for the greedy step"));
    }
    if points.is_empty() {
        return Err(Error::invalid("point set must be nonempty"));
    }
    for s in points {
        space.check_dim(s.dim())?;
    }
    if steps == 0 {
        return Err(Error::invalid("step count K starts at 1"));
    }
    if bound.kind != SequenceKind::CaratheodoryR {
        return Err(Error::invalid(
            "radius sequence has the wrong kind: need the growing caratheodory_R sequence",
        ));
    }
    if bound.k_max() < steps {
        return Err(Error::invalid(format!(
            "radius sequence covers k <= {}, need k <= {}",
            bound.k_max(),
            steps
        )));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tol must be finite and nonnegative"));
    }
    for (i, s) in points.iter().enumerate() {
        let ns = space::norm(space, s)?;
        if ns > 1.0 + tol {
            return Err(Error::invalid(format!(
                "point {} has norm {:.6e}, outside the unit ball",
                i, ns
            )));
        }
    }
    Ok(())
}

/// Runs K greedy steps over `points` and certifies ||a_k|| <= R_k.
///
/// The first pick is always `points[0]`; afterwards the pick is the argmin
/// of the pairing with the norming functional of the running sum, ties
/// resolved toward the lowest index. The run does not stop early when the
/// sum hits zero, since the bound is stated per k.
///
/// The origin must lie in conv(points) within `tol`. Hull membership does
/// not depend on the norm, so the check runs in Euclidean geometry for
/// every exponent.
pub fn greedy_caratheodory(
    space: &SpaceSpec,
    points: &[Vector],
    steps: usize,
    bound: &RadiusSequence,
    tol: f64,
) -> Result<CaratheodoryRun, Error> {
    check_inputs(space, points, steps, bound, tol)?;

    let raw: Vec<Vec<f64>> = points.iter().map(|s| s.0.clone()).collect();
    let mnp = wolfe::min_norm_point(&raw);
    let hull_tol = tol.max(1e-9);
    if mnp.dist > hull_tol {
        if !mnp.converged {
            return Err(Error::NonConvergence {
                context: "hull membership check for the origin".into(),
                residual: mnp.dist,
                iterations: mnp.iterations,
            });
        }
        return Err(Error::invalid(format!(
            "origin lies outside conv(S): distance {:.6e} exceeds {:.1e}",
            mnp.dist, hull_tol
        )));
    }

    let bound_slack = tol.max(1e-8);
    let mut chosen: Vec<Vector> = Vec::with_capacity(steps);
    let mut partial_norms: Vec<f64> = Vec::with_capacity(steps);
    let mut inner_products: Vec<f64> = Vec::with_capacity(steps.saturating_sub(1));
    let mut a = vec![0.0; space.dim];

    for k in 1..=steps {
        let idx = if k == 1 {
            0
        } else {
            let na = space::norm_slice(space, &a);
            if na <= ZERO_SUM {
                inner_products.push(0.0);
                0
            } else {
                let f = space::norming_slice(space, &a, na);
                let mut best_i = 0;
                let mut best_v = f64::INFINITY;
                for (i, s) in points.iter().enumerate() {
                    let v = space::dot(&f, s.as_slice());
                    if v < best_v {
                        best_i = i;
                        best_v = v;
                    }
                }
                inner_products.push(best_v);
                best_i
            }
        };
        let x = &points[idx];
        for (ai, xi) in a.iter_mut().zip(x.as_slice()) {
            *ai += xi;
        }
        let nk = space::norm_slice(space, &a);
        chosen.push(x.clone());
        partial_norms.push(nk);

        // k <= bound.k_max() was checked up front.
        let rk = bound.value(k).unwrap();
        if nk > rk + bound_slack {
            let run = CaratheodoryRun {
                chosen,
                partial_norms,
                bound: bound.clone(),
                inner_products,
            };
            let snapshot = serde_json::to_string(&run).unwrap_or_default();
            return Err(Error::BoundViolation(format!(
                "||a_{}|| = {:.12e} exceeds R_{} = {:.12e} plus slack {:.1e}; \
                 this contradicts the certified bound; run: {}",
                k, nk, k, rk, bound_slack, snapshot
            )));
        }
    }

    Ok(CaratheodoryRun {
        chosen,
        partial_norms,
        bound: bound.clone(),
        inner_products,
    })
}

/// The running average against its certified envelope: entries
/// (k, ||a_k|| / k, R_k / k) for k = 1..K.
pub fn caratheodory_error_curve(run: &CaratheodoryRun) -> Vec<(usize, f64, f64)> {
    run.partial_norms
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let k = j + 1;
            let rk = run.bound.value(k).unwrap_or(f64::NAN);
            (k, n / k as f64, rk / k as f64)
        })
        .collect()
}

/// CSV of the error curve with columns `k,a_k_over_k,R_k_over_k`.
pub fn error_curve_csv(run: &CaratheodoryRun) -> String {
    let mut out = String::from("k,a_k_over_k,R_k_over_k\n");
    for (k, v, b) in caratheodory_error_curve(run) {
        out.push_str(&format!("{},{},{}\n", k, crate::fmt_f64(v), crate::fmt_f64(b)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{self, SearchBudget};
    use crate::sequences::{caratheodory_radii, euclidean_zeta, helly_radii, ZetaSource};
    use crate::DEFAULT_SEED;
    use rand::Rng;

    fn euclid_bound(k: usize) -> RadiusSequence {
        caratheodory_radii(euclidean_zeta, k, 1e-12, ZetaSource::EuclideanClosedForm).unwrap()
    }

    #[test]
    fn two_point_run_alternates() {
        let space = SpaceSpec::euclidean(2);
        let s = vec![Vector(vec![1.0, 0.0]), Vector(vec![-1.0, 0.0])];
        let run = greedy_caratheodory(&space, &s, 6, &euclid_bound(6), 1e-9).unwrap();

        assert_eq!(run.partial_norms, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        for (j, x) in run.chosen.iter().enumerate() {
            let want = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(x.0, vec![want, 0.0]);
        }
        // The pick after each reset is unconstrained and recorded as 0.
        assert_eq!(run.inner_products, vec![-1.0, 0.0, -1.0, 0.0, -1.0]);

        let curve = caratheodory_error_curve(&run);
        assert_eq!(curve.len(), 6);
        assert_eq!(curve[0], (1, 1.0, 1.0));
        for (k, avg, env) in curve {
            let want = if k % 2 == 0 { 0.0 } else { 1.0 / k as f64 };
            assert!((avg - want).abs() < 1e-15);
            assert!(avg <= env + 1e-12);
        }
    }

    #[test]
    fn zero_set_stays_at_zero() {
        let space = SpaceSpec::lp(3.0, 2).unwrap();
        let s = vec![Vector::zeros(2)];
        let run = greedy_caratheodory(&space, &s, 4, &euclid_bound(4), 1e-9).unwrap();
        assert_eq!(run.partial_norms, vec![0.0; 4]);
        assert_eq!(run.inner_products, vec![0.0; 3]);
    }

    /// Max of ||a_k|| over every greedy-consistent tie-break path: the first
    /// pick ranges over all of S, later picks over every argmin within 1e-12.
    fn tie_break_max_norm(v: &[[f64; 2]], k_max: usize) -> f64 {
        fn rec(v: &[[f64; 2]], a: [f64; 2], k: usize, k_max: usize, seen: f64, best: &mut f64) {
            if k == k_max {
                if seen > *best {
                    *best = seen;
                }
                return;
            }
            let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
            let allowed: Vec<usize> = if na < 1e-13 {
                (0..v.len()).collect()
            } else {
                let ips: Vec<f64> =
                    v.iter().map(|u| (u[0] * a[0] + u[1] * a[1]) / na).collect();
                let m = ips.iter().cloned().fold(f64::INFINITY, f64::min);
                (0..v.len()).filter(|&i| ips[i] <= m + 1e-12).collect()
            };
            for i in allowed {
                let a2 = [a[0] + v[i][0], a[1] + v[i][1]];
                let n2 = (a2[0] * a2[0] + a2[1] * a2[1]).sqrt();
                rec(v, a2, k + 1, k_max, seen.max(n2), best);
            }
        }
        let mut best = 0.0;
        for u in v {
            rec(v, *u, 1, k_max, (u[0] * u[0] + u[1] * u[1]).sqrt(), &mut best);
        }
        best
    }

    #[test]
    fn three_directions_match_tie_break_enumeration() {
        let space = SpaceSpec::euclidean(2);
        let angles = [0.0, 2.0 * std::f64::consts::PI / 3.0, 4.0 * std::f64::consts::PI / 3.0];
        let v: Vec<[f64; 2]> = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
        let s: Vec<Vector> = v.iter().map(|u| Vector(u.to_vec())).collect();

        let run = greedy_caratheodory(&space, &s, 9, &euclid_bound(9), 1e-9).unwrap();
        let worst = tie_break_max_norm(&v, 9);

        // Exhausting all 216 consistent paths shows the partial sums never
        // leave the unit ball, well under the sqrt(3) cap.
        assert!((worst - 1.0).abs() < 1e-9, "enumerated max {worst}");
        assert!(worst <= 3f64.sqrt() + 1e-12);
        for &n in &run.partial_norms {
            assert!(n <= worst + 1e-12);
        }
        for k in 3..=9 {
            assert!(run.bound.value(k).unwrap() > 3f64.sqrt());
        }
    }

    fn random_ball_points(
        space: &SpaceSpec,
        count: usize,
        seed_tag: u64,
    ) -> Vec<Vector> {
        let mut rng = crate::seeds::rng(DEFAULT_SEED, &[31, seed_tag]);
        let mut pts = Vec::with_capacity(count);
        // A symmetric pair puts the origin in the hull exactly.
        let mut v: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = space::norm_slice(space, &v);
        for c in v.iter_mut() {
            *c /= nv.max(1e-12);
        }
        pts.push(Vector(v.clone()));
        pts.push(Vector(v.iter().map(|c| -c).collect()));
        while pts.len() < count {
            let mut x: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nx = space::norm_slice(space, &x);
            if nx < 1e-9 {
                continue;
            }
            let r = rng.gen_range(0.2..1.0);
            for c in x.iter_mut() {
                *c *= r / nx;
            }
            pts.push(Vector(x));
        }
        pts
    }

    #[test]
    fn euclid_run_obeys_step_inequality_and_envelope() {
        let space = SpaceSpec::euclidean(8);
        let s = random_ball_points(&space, 50, 0);
        let k_steps = 200;
        let run = greedy_caratheodory(&space, &s, k_steps, &euclid_bound(k_steps), 1e-7).unwrap();

        for &ip in &run.inner_products {
            assert!(ip <= 1e-9, "chosen pairing {ip} should be nonpositive");
        }
        // Euclid: ||a|| zeta_plus(||x||/||a||) = sqrt(||a||^2 + ||x||^2).
        for j in 0..k_steps - 1 {
            let na = run.partial_norms[j];
            if na <= 1e-13 {
                continue;
            }
            let nx = space::norm_slice(&space, run.chosen[j + 1].as_slice());
            let cap = (na * na + nx * nx).sqrt();
            assert!(
                run.partial_norms[j + 1] <= cap + 1e-8,
                "step {j}: {} > {}",
                run.partial_norms[j + 1],
                cap
            );
        }
        // Loose sanity ceiling for the averaged norms, scaled by sqrt(k).
        let limit = 4.0 * std::f64::consts::E * std::f64::consts::E;
        for (k, avg, _) in caratheodory_error_curve(&run) {
            assert!(avg * (k as f64).sqrt() <= limit);
        }
    }

    #[test]
    fn lp_run_obeys_interpolant_step_inequality() {
        let space = SpaceSpec::lp(3.0, 3).unwrap();
        let ts: Vec<f64> = (1..=16).map(|i| i as f64 * 0.25).collect();
        let interp = moduli::zeta_plus_interpolant(&space, &ts, &SearchBudget::quick()).unwrap();
        let k_steps = 40;
        let bound =
            caratheodory_radii(|t| interp.eval(t), k_steps, 1e-10, ZetaSource::EstimatedTable)
                .unwrap();

        let s = random_ball_points(&space, 20, 1);
        let run = greedy_caratheodory(&space, &s, k_steps, &bound, 1e-7).unwrap();

        for &ip in &run.inner_products {
            assert!(ip <= 1e-9);
        }
        for j in 0..k_steps - 1 {
            let na = run.partial_norms[j];
            if na <= 1e-13 {
                continue;
            }
            let nx = space::norm_slice(&space, run.chosen[j + 1].as_slice());
            let cap = na * interp.eval(nx / na);
            assert!(
                run.partial_norms[j + 1] <= cap + 1e-3,
                "step {j}: {} > {}",
                run.partial_norms[j + 1],
                cap
            );
        }
    }

    #[test]
    fn fabricated_small_bound_reports_violation() {
        let space = SpaceSpec::euclidean(2);
        let s = vec![Vector(vec![1.0, 0.0]), Vector(vec![-1.0, 0.0])];
        let fake = RadiusSequence {
            values: vec![0.5, 0.5],
            kind: SequenceKind::CaratheodoryR,
            zeta_source: ZetaSource::Custom,
            root_tol: 0.0,
        };
        let err = greedy_caratheodory(&space, &s, 2, &fake, 1e-9).unwrap_err();
        match err {
            Error::BoundViolation(msg) => {
                assert!(msg.contains("exceeds"));
                assert!(msg.contains("partial_norms"), "snapshot missing from {msg}");
            }
            other => panic!("expected BoundViolation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let space = SpaceSpec::euclidean(2);
        let seq = euclid_bound(6);
        let pair = vec![Vector(vec![1.0, 0.0]), Vector(vec![-1.0, 0.0])];

        // Origin outside the hull.
        let off = vec![Vector(vec![1.0, 0.0]), Vector(vec![0.0, 1.0])];
        let err = greedy_caratheodory(&space, &off, 2, &seq, 1e-9).unwrap_err();
        assert!(err.to_string().contains("conv"));

        // Point outside the unit ball.
        let far = vec![Vector(vec![1.5, 0.0]), Vector(vec![-1.5, 0.0])];
        assert!(greedy_caratheodory(&space, &far, 2, &seq, 1e-9)
            .unwrap_err()
            .to_string()
            .contains("unit ball"));

        // Wrong sequence kind.
        let shrink = helly_radii(euclidean_zeta, 6, 1e-12, ZetaSource::EuclideanClosedForm).unwrap();
        assert!(greedy_caratheodory(&space, &pair, 2, &shrink, 1e-9)
            .unwrap_err()
            .to_string()
            .contains("kind"));

        // K out of range.
        assert!(greedy_caratheodory(&space, &pair, 0, &seq, 1e-9).is_err());
        assert!(greedy_caratheodory(&space, &pair, 7, &seq, 1e-9).is_err());

        // Dimension mismatch and non-smooth exponent.
        let one_d = vec![Vector(vec![1.0])];
        assert!(matches!(
            greedy_caratheodory(&space, &one_d, 1, &seq, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
        let l1 = SpaceSpec::lp(1.0, 2).unwrap();
        assert!(matches!(
            greedy_caratheodory(&l1, &pair, 2, &seq, 1e-9),
            Err(Error::BadExponent(..))
        ));
    }

    #[test]
    fn run_round_trips_through_json_and_csv() {
        let space = SpaceSpec::euclidean(2);
        let s = vec![Vector(vec![1.0, 0.0]), Vector(vec![-1.0, 0.0])];
        let run = greedy_caratheodory(&space, &s, 4, &euclid_bound(4), 1e-9).unwrap();

        let json = serde_json::to_string(&run).unwrap();
        let back: CaratheodoryRun = serde_json::from_str(&json).unwrap();
        assert_eq!(back.partial_norms, run.partial_norms);
        assert_eq!(back.chosen, run.chosen);
        assert_eq!(back.inner_products, run.inner_products);

        let csv = error_curve_csv(&run);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,a_k_over_k,R_k_over_k"));
        assert_eq!(
            lines.next(),
            Some("1,1.0000000000000000e0,1.0000000000000000e0")
        );
        assert_eq!(csv.lines().count(), 5);
    }
}
