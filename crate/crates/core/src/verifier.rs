//! Sampling oracles for the geometric inequalities the search engines rely
//! on: the supporting-hyperplane deviation identities, the minimal-deviation
//! bound dist(x, K and L) >= rho * zeta_minus(rho_L / rho), the shrinking
//! radius corollary dist(0, K and L) > 1 / r_j, and the smoothness-side cap
//! ||x + z|| <= ||x|| * zeta_plus(||z|| / ||x||).
//!
//! Each check samples random configurations, evaluates the inequality, and
//! records any violation beyond a slack as a machine-readable
//! counterexample. The inequalities are theorems: slacks only absorb solver
//! and estimator bias, so a non-empty failure list points at a bug in a
//! solver or estimator rather than at the mathematics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::geometry::{self, ConvexSet, IntersectionOutcome, SolveOptions};
use crate::moduli::{self, SearchBudget};
use crate::sequences::{euclidean_zeta, helly_radii, RadiusSequence, SequenceKind, ZetaSource};
use crate::space::{self, Mode, SpaceSpec, Vector};

const TAG_SUPPORT: u64 = 41;
const TAG_MIN_DEV: u64 = 42;
const TAG_SEQUENCE: u64 = 43;
const TAG_MAX_DEV: u64 = 44;

/// The deviation identities are checked with exact norm arithmetic, so
/// only rounding has to be absorbed.
const SUPPORT_SLACK: f64 = 1e-6;
/// The lemma checks run a projection solver and, in lp mode, a zeta
/// estimator; both biases sit well below this.
const LEMMA_SLACK: f64 = 1e-3;

/// Outcome of one sampling check. `worst_margin` is the smallest amount by
/// which the tested inequality held (negative means a violation was
/// sampled); `failures` holds one payload per violation beyond the check's
/// slack, in trial order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub worst_margin: f64,
    pub failures: Vec<serde_json::Value>,
    pub seed: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn merge_trials(
    name: String,
    seed: u64,
    results: Vec<(f64, Option<serde_json::Value>)>,
) -> CheckReport {
    let trials = results.len();
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for (margin, failure) in results {
        worst = worst.min(margin);
        failures.extend(failure);
    }
    CheckReport { name, trials, worst_margin: worst, failures, seed }
}

fn require_smooth(space: &SpaceSpec) -> Result<(), Error> {
    space.validate()?;
    if !space.is_smooth() {
        return Err(Error::BadExponent(space.p, "(1, infinity)"));
    }
    Ok(())
}

fn check_budget(seed: u64) -> SearchBudget {
    SearchBudget::quick().with_seed(seed)
}

/// Unit vector in the space norm with a rejection step against degenerate
/// directions.
fn sample_unit(space: &SpaceSpec, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = space::norm_slice(space, &x);
        if n > 0.2 {
            return x.iter().map(|c| c / n).collect();
        }
    }
}

/// Unit functional in the dual norm.
fn sample_dual_unit(space: &SpaceSpec, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = space::dual_norm_slice(space, &a);
        if n > 0.2 {
            return a.iter().map(|c| c / n).collect();
        }
    }
}

fn euclid_cos(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    space::dot(u, v) / (nu * nv).max(1e-300)
}

/// Second halfspace normal, resampled away from the sliver regime: when it
/// nearly opposes `against`, the intersection degenerates into a distant
/// thin wedge whose distance blows up like 1 / angle, which satisfies the
/// inequalities vacuously but exceeds any projection budget.
fn sample_transversal_dual_unit(
    space: &SpaceSpec,
    against: &[f64],
    rng: &mut impl Rng,
) -> Vec<f64> {
    loop {
        let c = sample_dual_unit(space, rng);
        if euclid_cos(&c, against) > -0.9 {
            return c;
        }
    }
}

/// One-point zeta_minus value: closed form in Euclidean mode, search
/// estimate otherwise. The search estimates an infimum from above, so the
/// bias tightens bounds built from it; LEMMA_SLACK covers the gap.
fn zeta_minus_at(space: &SpaceSpec, t: f64, budget: &SearchBudget) -> Result<f64, Error> {
    if t <= 0.0 {
        return Ok(1.0);
    }
    if space.mode == Mode::Euclidean {
        return Ok(euclidean_zeta(t));
    }
    moduli::zeta_minus(space, t, budget)
}

/// One-point zeta_plus value; the search estimates a supremum from below.
fn zeta_plus_at(space: &SpaceSpec, t: f64, budget: &SearchBudget) -> Result<f64, Error> {
    if t <= 0.0 {
        return Ok(1.0);
    }
    if space.mode == Mode::Euclidean {
        return Ok(euclidean_zeta(t));
    }
    moduli::zeta_plus(space, t, budget)
}

/// Checks both supporting-hyperplane identities in the plane.
///
/// Per trial: a random unit x, the tangent line H through x from its
/// norming functional, and a deviation rho (fixed when `rho` is given,
/// otherwise drawn from (0, 2)). The extremal norms over H at distance rho
/// from x are computed exactly from the two points x +- rho w; sampled
/// points of the outward halfspace at distance >= rho must not undercut
/// the minimum, and sampled points of the ball-side halfspace at distance
/// <= rho must not exceed the maximum.
pub fn check_supporting_deviation(
    space: &SpaceSpec,
    rho: Option<f64>,
    trials: usize,
    samples_per_trial: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    require_smooth(space)?;
    if space.dim != 2 {
        return Err(Error::invalid("supporting-deviation check needs dim = 2"));
    }
    if trials == 0 || samples_per_trial == 0 {
        return Err(Error::invalid("trials and samples_per_trial must be positive"));
    }
    if let Some(r) = rho {
        if !(r > 0.0 && r <= 2.0) {
            return Err(Error::invalid("fixed rho must lie in (0, 2]"));
        }
    }

    let results: Vec<_> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::seeds::rng(seed, &[TAG_SUPPORT, trial]);
            let x = sample_unit(space, &mut rng);
            let nx = space::norm_slice(space, &x);
            let j = space::norming_slice(space, &x, nx);
            // In the plane the kernel of the functional is the rotation.
            let mut w = vec![-j[1], j[0]];
            let nw = space::norm_slice(space, &w);
            for c in w.iter_mut() {
                *c /= nw;
            }
            let rho = rho.unwrap_or_else(|| rng.gen_range(0.05..2.0));

            let plus = space::axpy(&x, rho, &w);
            let minus = space::axpy(&x, -rho, &w);
            let (np, nm) = (space::norm_slice(space, &plus), space::norm_slice(space, &minus));
            let inf_h = np.min(nm);
            let sup_h = np.max(nm);

            // The two hyperplane points witness equality on both sides.
            let mut margin = 0.0f64;
            let mut failure = None;
            for sample in 0..samples_per_trial {
                // Outward side: y = (1 + u) x + a w has <j, y> >= <j, x>.
                let u = rng.gen_range(0.0..3.0);
                let a = rng.gen_range(-3.0..3.0);
                let y: Vec<f64> =
                    x.iter().zip(&w).map(|(xi, wi)| (1.0 + u) * xi + a * wi).collect();
                let dev: Vec<f64> = x.iter().zip(&w).map(|(xi, wi)| u * xi + a * wi).collect();
                if space::norm_slice(space, &dev) >= rho {
                    let m = space::norm_slice(space, &y) - inf_h;
                    if m < margin {
                        margin = m;
                    }
                    if m < -SUPPORT_SLACK && failure.is_none() {
                        failure = Some(json!({
                            "trial": trial, "sample": sample, "side": "inf",
                            "x": x, "w": w, "rho": rho, "point": y,
                            "norm": space::norm_slice(space, &y), "hyperplane_min": inf_h,
                        }));
                    }
                }
                // Ball side: z = (1 - u') x + a' w with ||z - x|| <= rho.
                let u2 = rng.gen_range(0.0..rho / 2.0);
                let a2 = rng.gen_range(-rho / 2.0..rho / 2.0);
                let z: Vec<f64> =
                    x.iter().zip(&w).map(|(xi, wi)| (1.0 - u2) * xi + a2 * wi).collect();
                let m = sup_h - space::norm_slice(space, &z);
                if m < margin {
                    margin = m;
                }
                if m < -SUPPORT_SLACK && failure.is_none() {
                    failure = Some(json!({
                        "trial": trial, "sample": sample, "side": "sup",
                        "x": x, "w": w, "rho": rho, "point": z,
                        "norm": space::norm_slice(space, &z), "hyperplane_max": sup_h,
                    }));
                }
            }
            (margin, failure)
        })
        .collect();

    Ok(merge_trials(
        format!("supporting_deviation p={} d={}", space.p, space.dim),
        seed,
        results,
    ))
}

/// Checks dist(x, K and L) >= rho * zeta_minus(rho_L / rho) on random
/// halfspace pairs.
///
/// K and L are halfspaces because their point distances have closed dual
/// norm forms: the nearest point y of x in K and the hypothesis distances
/// are then exact, and only the left side runs through the intersection
/// solver.
pub fn check_min_deviation_lemma(
    space: &SpaceSpec,
    trials: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    require_smooth(space)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let budget = check_budget(seed);
    let opts = SolveOptions::for_space(space);

    let results: Vec<(f64, Option<serde_json::Value>)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(f64, Option<serde_json::Value>), Error> {
            let mut rng = crate::seeds::rng(seed, &[TAG_MIN_DEV, trial]);
            let x: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = sample_dual_unit(space, &mut rng);
            let rho = rng.gen_range(0.4..1.6);
            let k_set = ConvexSet::halfspace(a.clone(), space::dot(&a, &x) - rho);
            let y = geometry::nearest_point(space, &k_set, &Vector(x.clone()), &opts)?.point;

            let c = sample_transversal_dual_unit(space, &a, &mut rng);
            let rho_l0 = rng.gen_range(0.4..1.6);
            let l_set = ConvexSet::halfspace(c.clone(), space::dot(&c, y.as_slice()) - rho_l0);
            // dist(y, K and L) >= dist(y, L) = rho_l0, so shrinking by a hair
            // makes hypothesis (2) strict.
            let rho_l = rho_l0 * (1.0 - 1e-9);

            let bound = rho * zeta_minus_at(space, rho_l / rho, &budget)?;
            let sets = [k_set, l_set];
            let (margin, dist) = match geometry::nearest_point_intersection(
                space,
                &sets,
                &Vector(x.clone()),
                &opts,
            )? {
                IntersectionOutcome::Feasible(res) => (res.dist - bound, res.dist),
                // dist to the empty set is infinite; nothing to refute.
                IntersectionOutcome::Empty { .. } => (f64::INFINITY, f64::INFINITY),
                IntersectionOutcome::Indeterminate(_) => (-2.0 * LEMMA_SLACK - 1.0, f64::NAN),
            };
            let failure = (margin < -LEMMA_SLACK).then(|| {
                json!({
                    "trial": trial, "x": x, "halfspace_a": a, "rho": rho,
                    "halfspace_c": c, "rho_l": rho_l, "bound": bound, "dist": dist,
                })
            });
            Ok((margin, failure))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(merge_trials(
        format!("min_deviation p={} d={}", space.p, space.dim),
        seed,
        results,
    ))
}

/// Checks the shrinking-radius corollary dist(0, K and L) > 1 / r_j.
///
/// Per trial: j in [2, 12], a point p with ||p|| just above 1 / r_{j-1},
/// K the halfspace beyond p's norming functional (which makes p the exact
/// nearest point from the origin), and L a halfspace with
/// dist(p, L) = 1 + eta > 1.
pub fn check_sequence_corollary(
    space: &SpaceSpec,
    rseq: &RadiusSequence,
    trials: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    require_smooth(space)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if rseq.kind != SequenceKind::HellyR {
        return Err(Error::invalid(
            "sequence corollary needs the shrinking helly_r radius sequence",
        ));
    }
    let j_hi = rseq.k_max().min(12);
    if j_hi < 2 {
        return Err(Error::invalid("radius sequence must cover k = 2"));
    }
    let opts = SolveOptions::for_space(space);

    let results: Vec<(f64, Option<serde_json::Value>)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(f64, Option<serde_json::Value>), Error> {
            let mut rng = crate::seeds::rng(seed, &[TAG_SEQUENCE, trial]);
            let j = rng.gen_range(2..=j_hi);
            let r_prev = rseq.value(j - 1).unwrap();
            let r_j = rseq.value(j).unwrap();

            // Hypothesis (1) is strict; stay clearly above the threshold.
            let npt = 1.0 / r_prev + rng.gen_range(1e-3..0.5);
            let dir = sample_unit(space, &mut rng);
            let p: Vec<f64> = dir.iter().map(|c| c * npt).collect();
            let jf = space::norming_slice(space, &p, space::norm_slice(space, &p));
            let neg_jf: Vec<f64> = jf.iter().map(|v| -v).collect();
            let k_set = ConvexSet::halfspace(neg_jf.clone(), -npt);

            let c = sample_transversal_dual_unit(space, &neg_jf, &mut rng);
            let eta = rng.gen_range(1e-3..1.0);
            let l_set = ConvexSet::halfspace(c.clone(), space::dot(&c, &p) - (1.0 + eta));

            let target = 1.0 / r_j;
            let sets = [k_set, l_set];
            let (margin, dist) = match geometry::nearest_point_intersection(
                space,
                &sets,
                &Vector::zeros(space.dim),
                &opts,
            )? {
                IntersectionOutcome::Feasible(res) => (res.dist - target, res.dist),
                IntersectionOutcome::Empty { .. } => (f64::INFINITY, f64::INFINITY),
                IntersectionOutcome::Indeterminate(_) => (-2.0 * LEMMA_SLACK - 1.0, f64::NAN),
            };
            let failure = (margin < -LEMMA_SLACK).then(|| {
                json!({
                    "trial": trial, "j": j, "p": p, "halfspace_c": c, "eta": eta,
                    "target": target, "dist": dist,
                })
            });
            Ok((margin, failure))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(merge_trials(
        format!("sequence_corollary p={} d={}", space.p, space.dim),
        seed,
        results,
    ))
}

/// Checks ||x + z|| <= ||x|| * zeta_plus(||z|| / ||x||) for z on the far
/// side of the hyperplane where x's norming functional vanishes.
pub fn check_max_deviation(
    space: &SpaceSpec,
    trials: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    require_smooth(space)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let budget = check_budget(seed);
    // Shared by every trial's quasi-orthogonal equality witness.
    let zeta_one = zeta_plus_at(space, 1.0, &budget)?;

    let results: Vec<(f64, Option<serde_json::Value>)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<(f64, Option<serde_json::Value>), Error> {
            let mut rng = crate::seeds::rng(seed, &[TAG_MAX_DEV, trial]);
            let dir = sample_unit(space, &mut rng);
            let nx = rng.gen_range(0.25..2.0);
            let x: Vec<f64> = dir.iter().map(|c| c * nx).collect();
            let nx = space::norm_slice(space, &x);
            let jf = space::norming_slice(space, &x, nx);

            // Push a random vector into {<jf, .> <= 0}; scaling keeps it
            // there, so the ratio ||z|| / ||x|| can be fixed in (0, 2).
            let g: Vec<f64> = (0..space.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t_neg = rng.gen_range(0.0..1.0);
            let lam = (space::dot(&jf, &g) + t_neg) / nx;
            let zdir: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - lam * xi).collect();
            let nz_raw = space::norm_slice(space, &zdir);
            let target = rng.gen_range(0.0..2.0) * nx;
            let z: Vec<f64> = if nz_raw > 1e-9 {
                zdir.iter().map(|c| c * target / nz_raw).collect()
            } else {
                vec![0.0; space.dim]
            };

            let nz = space::norm_slice(space, &z);
            let sum: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let mut margin = nx * zeta_plus_at(space, nz / nx, &budget)? - space::norm_slice(space, &sum);

            // Quasi-orthogonal direction at ||z|| = ||x||: the equality case
            // of the bound, up to estimator bias.
            let wq = space::quasi_orthogonalize(space, &g, &x);
            let nwq = space::norm_slice(space, &wq);
            if nwq > 1e-9 {
                let sum_q: Vec<f64> =
                    x.iter().zip(&wq).map(|(a, b)| a + b * nx / nwq).collect();
                let mq = nx * zeta_one - space::norm_slice(space, &sum_q);
                margin = margin.min(mq);
            }

            let failure = (margin < -LEMMA_SLACK).then(|| {
                json!({
                    "trial": trial, "x": x, "z": z, "margin": margin,
                })
            });
            Ok((margin, failure))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(merge_trials(
        format!("max_deviation p={} d={}", space.p, space.dim),
        seed,
        results,
    ))
}

/// Shrinking radii for the sequence check: closed form in Euclidean mode,
/// per-query zeta_minus estimation otherwise so no interpolation error
/// feeds the recursion.
pub fn suite_radii(space: &SpaceSpec, k_max: usize, seed: u64) -> Result<RadiusSequence, Error> {
    if space.mode == Mode::Euclidean {
        return helly_radii(euclidean_zeta, k_max, 1e-12, ZetaSource::EuclideanClosedForm);
    }
    let budget = check_budget(seed);
    let zeta = |t: f64| zeta_minus_at(space, t, &budget).unwrap_or(f64::NAN);
    helly_radii(zeta, k_max, 1e-9, ZetaSource::EstimatedTable)
}

/// Runs every check across p in {1.5, 2, 3} and d in {2, 3, 4} with the
/// default budgets. The supporting-deviation identities are planar, so that
/// check only runs at d = 2.
pub fn run_suite(seed: u64) -> Result<Vec<CheckReport>, Error> {
    let mut reports = Vec::new();
    for &p in &[1.5, 2.0, 3.0] {
        for &d in &[2usize, 3, 4] {
            let space =
                if p == 2.0 { SpaceSpec::euclidean(d) } else { SpaceSpec::lp(p, d)? };
            if d == 2 {
                reports.push(check_supporting_deviation(&space, None, 500, 64, seed)?);
            }
            reports.push(check_min_deviation_lemma(&space, 300, seed)?);
            let rseq = suite_radii(&space, 12, seed)?;
            reports.push(check_sequence_corollary(&space, &rseq, 200, seed)?);
            reports.push(check_max_deviation(&space, 300, seed)?);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_SEED;

    #[test]
    fn euclid_hyperplane_extremes_and_sphere_slice() {
        // x = e1, H = {y_1 = 1}: both points of H at distance rho have norm
        // sqrt(1 + rho^2), so min = max there.
        let rho = 1.0f64;
        let m = (1.0 + rho * rho).sqrt();
        assert!((m - 2f64.sqrt()).abs() < 1e-15);

        // Minimal norm over the sphere {||x - z|| = rho} cut to the ball
        // side is |rho - 1|, attained toward the origin.
        for rho in [1.0, 1.7] {
            let mut best = f64::INFINITY;
            let n = 20_000;
            for i in 0..=n {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let z = [1.0 + rho * th.cos(), rho * th.sin()];
                if z[0] <= 1.0 {
                    best = best.min((z[0] * z[0] + z[1] * z[1]).sqrt());
                }
            }
            assert!((best - (rho - 1.0f64).abs()).abs() < 1e-3, "rho={rho} best={best}");
        }
    }

    #[test]
    fn supporting_deviation_passes_euclid_and_lp() {
        let e2 = SpaceSpec::euclidean(2);
        let r = check_supporting_deviation(&e2, None, 120, 48, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-6, "worst {}", r.worst_margin);
        assert_eq!(r.trials, 120);

        let l3 = SpaceSpec::lp(3.0, 2).unwrap();
        for rho in [Some(0.25), None] {
            let r = check_supporting_deviation(&l3, rho, 100, 48, DEFAULT_SEED).unwrap();
            assert!(r.passed(), "failures: {:?}", r.failures);
            assert!(r.worst_margin >= -1e-4);
        }
    }

    #[test]
    fn min_deviation_orthogonal_euclid_pair_is_tight() {
        // rho = rho_L = 1 with orthogonal halfspaces: the corner sits at
        // distance sqrt(2), matching rho * zeta_minus(1) exactly.
        let space = SpaceSpec::euclidean(2);
        let opts = SolveOptions::for_space(&space);
        let k_set = ConvexSet::halfspace(vec![1.0, 0.0], -1.0);
        let l_set = ConvexSet::halfspace(vec![0.0, 1.0], -1.0);
        let out = geometry::nearest_point_intersection(
            &space,
            &[k_set, l_set],
            &Vector::zeros(2),
            &opts,
        )
        .unwrap();
        let res = out.feasible().expect("two halfspaces always intersect");
        assert!((res.dist - 2f64.sqrt()).abs() < 1e-6);
        assert!((euclidean_zeta(1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn min_deviation_passes_euclid_and_lp() {
        let e3 = SpaceSpec::euclidean(3);
        let r = check_min_deviation_lemma(&e3, 80, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-3);

        let l15 = SpaceSpec::lp(1.5, 3).unwrap();
        let r = check_min_deviation_lemma(&l15, 40, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-3);
    }

    #[test]
    fn sequence_corollary_explicit_j2_instance() {
        // ||p|| = 1/r_1 + 1e-3, orthogonal L at distance just over 1: the
        // corner distance clears 1/r_2 = 1/0.7861... with real margin.
        let space = SpaceSpec::euclidean(2);
        let rseq = suite_radii(&space, 2, DEFAULT_SEED).unwrap();
        let r2 = rseq.value(2).unwrap();
        assert!((r2 - 0.7861513777574233).abs() < 1e-10);

        let npt = 1.0 + 1e-3;
        let k_set = ConvexSet::halfspace(vec![-1.0, 0.0], -npt);
        let l_set = ConvexSet::halfspace(vec![0.0, 1.0], -1.0015);
        let opts = SolveOptions::for_space(&space);
        let out = geometry::nearest_point_intersection(
            &space,
            &[k_set, l_set],
            &Vector::zeros(2),
            &opts,
        )
        .unwrap();
        let res = out.feasible().unwrap();
        let corner = (npt * npt + 1.0015f64 * 1.0015).sqrt();
        assert!((res.dist - corner).abs() < 1e-6);
        assert!(res.dist > 1.0 / r2);
    }

    #[test]
    fn sequence_corollary_passes_euclid_and_lp() {
        let e2 = SpaceSpec::euclidean(2);
        let rseq = suite_radii(&e2, 12, DEFAULT_SEED).unwrap();
        let r = check_sequence_corollary(&e2, &rseq, 80, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-3);

        let l3 = SpaceSpec::lp(3.0, 2).unwrap();
        let rseq = suite_radii(&l3, 8, DEFAULT_SEED).unwrap();
        let r = check_sequence_corollary(&l3, &rseq, 60, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-3);
    }

    #[test]
    fn max_deviation_equality_and_shrink_cases() {
        // Quasi-orthogonal z with ||z|| = ||x|| meets the Euclidean bound
        // with equality; z = -x collapses the sum entirely.
        let x = [2.0f64, 0.0];
        let z = [0.0f64, 2.0];
        let lhs = ((x[0] + z[0]).powi(2) + (x[1] + z[1]).powi(2)).sqrt();
        assert!((lhs - 2.0 * euclidean_zeta(1.0)).abs() < 1e-12);
        assert!(0.0 <= 2.0 * euclidean_zeta(1.0));

        let e4 = SpaceSpec::euclidean(4);
        let r = check_max_deviation(&e4, 80, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-6);

        let l15 = SpaceSpec::lp(1.5, 4).unwrap();
        let r = check_max_deviation(&l15, 40, DEFAULT_SEED).unwrap();
        assert!(r.passed(), "failures: {:?}", r.failures);
        assert!(r.worst_margin >= -1e-3);
    }

    #[test]
    fn reports_are_reproducible_from_the_seed() {
        let space = SpaceSpec::lp(3.0, 2).unwrap();
        let a = check_supporting_deviation(&space, None, 40, 16, 7).unwrap();
        let b = check_supporting_deviation(&space, None, 40, 16, 7).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let e3 = SpaceSpec::euclidean(3);
        assert!(check_supporting_deviation(&e3, None, 10, 10, 0).is_err());
        let e2 = SpaceSpec::euclidean(2);
        assert!(check_supporting_deviation(&e2, Some(2.5), 10, 10, 0).is_err());
        assert!(check_supporting_deviation(&e2, None, 0, 10, 0).is_err());
        let l1 = SpaceSpec::lp(1.0, 2).unwrap();
        assert!(check_min_deviation_lemma(&l1, 10, 0).is_err());

        let wrong = crate::sequences::caratheodory_radii(
            |t| 1.0 + t,
            4,
            1e-9,
            ZetaSource::Custom,
        )
        .unwrap();
        assert!(check_sequence_corollary(&e2, &wrong, 10, 0).is_err());
    }
}
