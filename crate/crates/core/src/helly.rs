//! Greedy witness/certificate search over finite families of convex sets,
//! the colorful variant, the fractional verifier, and the centerpoint
//! construction.
//!
//! All searches work in coordinates scaled by 1/r_k: a witness there is a
//! point within 1 (+tol) of every set, which unscales to distances within
//! r_k; a filled tuple certifies that its intersection misses the unit
//! ball. The violator rule (maximum distance, ties to the lowest index)
//! and the lowest-unused-index padding make every run deterministic.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{
    intersects_ball, nearest_point, nearest_point_intersection, BallStatus, ConvexSet,
    IntersectionOutcome, SolveOptions,
};
use crate::sequences::{RadiusSequence, SequenceKind};
use crate::space::{self, SpaceSpec, Vector};

const TAG_FRACTIONAL: u64 = 21;
const TAG_CENTERPOINT: u64 = 22;

/// One successful projection along a greedy run, in scaled coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    /// Number of sets chosen when this projection ran (1-based).
    pub step: usize,
    pub dist_scaled: f64,
    pub point_scaled: Vector,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum HellyOutcome {
    Witness {
        x: Vector,
        per_set_dist: Vec<f64>,
    },
    Certificate {
        /// Chosen indices in greedy order (padded with the lowest unused
        /// indices when the running intersection became empty).
        indices: Vec<usize>,
        /// Unscaled distance from the origin to the certified
        /// intersection; None when that intersection is empty.
        dist_lower_bound: Option<f64>,
        trace: Vec<TraceStep>,
    },
}

/// Position of a set inside a list of families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorIndex {
    pub color: usize,
    pub index: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum ColorfulOutcome {
    /// Every set of family `color` lies within r_k of x.
    Witness {
        x: Vector,
        color: usize,
        per_set_dist: Vec<f64>,
    },
    Certificate {
        indices: Vec<ColorIndex>,
        dist_lower_bound: Option<f64>,
        trace: Vec<TraceStep>,
    },
}

fn check_search_inputs(
    space: &SpaceSpec,
    rseq: &RadiusSequence,
    k: usize,
    tol: f64,
) -> Result<f64, Error> {
    space.validate()?;
    if rseq.kind != SequenceKind::HellyR {
        return Err(Error::invalid(
            "search needs the shrinking radius sequence (kind helly_r)",
        ));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    rseq.value(k)
        .ok_or_else(|| Error::invalid(format!("radius sequence holds {} values, need k = {k}", rseq.k_max())))
}

/// Distance from `p` to every listed set, failing on non-convergence.
fn scan_dists(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    p: &Vector,
    opts: &SolveOptions,
) -> Result<Vec<f64>, Error> {
    sets.iter()
        .map(|s| {
            let r = nearest_point(space, s, p, opts)?;
            if !r.converged {
                return Err(Error::NonConvergence {
                    context: "distance scan projection did not settle".into(),
                    residual: r.residual,
                    iterations: r.iterations,
                });
            }
            Ok(r.dist)
        })
        .collect()
}

/// Max-distance violator among sets not yet chosen; ties break to the
/// lowest index. A set violates when its scaled distance exceeds 1 + tol.
fn pick_violator(dists: &[f64], chosen: &[usize], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in dists.iter().enumerate() {
        if chosen.contains(&i) || d <= 1.0 + tol {
            continue;
        }
        match best {
            Some((_, bd)) if d <= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

/// Greedy monochrome search: returns a witness point within r_k of every
/// set, or a tuple of at most k indices whose intersection misses the unit
/// ball (or is empty).
pub fn helly_search(
    space: &SpaceSpec,
    family: &[ConvexSet],
    k: usize,
    rseq: &RadiusSequence,
    tol: f64,
) -> Result<HellyOutcome, Error> {
    if family.is_empty() {
        return Err(Error::invalid("family must be nonempty"));
    }
    if k < 1 || k > family.len() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            family.len()
        )));
    }
    let rk = check_search_inputs(space, rseq, k, tol)?;
    for set in family {
        set.validate(space)?;
    }
    let opts = SolveOptions::for_space(space);
    let scaled: Vec<ConvexSet> = family.iter().map(|s| s.scale(1.0 / rk)).collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut p = Vector::zeros(space.dim);
    loop {
        let dists = scan_dists(space, &scaled, &p, &opts)?;
        let Some(viol) = pick_violator(&dists, &chosen, tol) else {
            let x = Vector(space::scale(p.as_slice(), rk));
            let per_set_dist = scan_dists(space, family, &x, &opts)?;
            return Ok(HellyOutcome::Witness { x, per_set_dist });
        };
        chosen.push(viol);
        let subset: Vec<ConvexSet> = chosen.iter().map(|&i| scaled[i].clone()).collect();
        match nearest_point_intersection(space, &subset, &Vector::zeros(space.dim), &opts)? {
            IntersectionOutcome::Feasible(res) => {
                trace.push(TraceStep {
                    step: chosen.len(),
                    dist_scaled: res.dist,
                    point_scaled: res.point.clone(),
                    iterations: res.iterations,
                    residual: res.residual,
                });
                if chosen.len() == k {
                    return Ok(HellyOutcome::Certificate {
                        indices: chosen,
                        dist_lower_bound: Some(rk * res.dist),
                        trace,
                    });
                }
                p = res.point;
            }
            IntersectionOutcome::Empty { .. } => {
                let mut pad = 0usize;
                while chosen.len() < k {
                    if !chosen.contains(&pad) {
                        chosen.push(pad);
                    }
                    pad += 1;
                }
                return Ok(HellyOutcome::Certificate {
                    indices: chosen,
                    dist_lower_bound: None,
                    trace,
                });
            }
            IntersectionOutcome::Indeterminate(res) => {
                return Err(Error::NonConvergence {
                    context: format!(
                        "projection onto the running {}-set intersection did not settle",
                        chosen.len()
                    ),
                    residual: res.residual,
                    iterations: res.iterations,
                });
            }
        }
    }
}

/// Colorful greedy search over exactly k families: either some family lies
/// entirely within r_k of a point, or a rainbow tuple (one set per family)
/// certifies a miss.
pub fn colorful_search(
    space: &SpaceSpec,
    families: &[Vec<ConvexSet>],
    rseq: &RadiusSequence,
    tol: f64,
) -> Result<ColorfulOutcome, Error> {
    let k = families.len();
    if k == 0 {
        return Err(Error::invalid("need at least one family"));
    }
    if families.iter().any(|f| f.is_empty()) {
        return Err(Error::invalid("every family must be nonempty"));
    }
    let rk = check_search_inputs(space, rseq, k, tol)?;
    for fam in families {
        for set in fam {
            set.validate(space)?;
        }
    }
    let opts = SolveOptions::for_space(space);
    let scaled: Vec<Vec<ConvexSet>> = families
        .iter()
        .map(|f| f.iter().map(|s| s.scale(1.0 / rk)).collect())
        .collect();

    let mut chosen: Vec<ColorIndex> = Vec::new();
    let mut chosen_sets: Vec<ConvexSet> = Vec::new();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut p = Vector::zeros(space.dim);
    let mut last_dist = 0.0f64;
    for color in 0..k {
        let dists = scan_dists(space, &scaled[color], &p, &opts)?;
        let Some(viol) = pick_violator(&dists, &[], tol) else {
            let x = Vector(space::scale(p.as_slice(), rk));
            let per_set_dist = scan_dists(space, &families[color], &x, &opts)?;
            return Ok(ColorfulOutcome::Witness { x, color, per_set_dist });
        };
        chosen.push(ColorIndex { color, index: viol });
        chosen_sets.push(scaled[color][viol].clone());
        match nearest_point_intersection(space, &chosen_sets, &Vector::zeros(space.dim), &opts)? {
            IntersectionOutcome::Feasible(res) => {
                trace.push(TraceStep {
                    step: chosen.len(),
                    dist_scaled: res.dist,
                    point_scaled: res.point.clone(),
                    iterations: res.iterations,
                    residual: res.residual,
                });
                last_dist = res.dist;
                p = res.point;
            }
            IntersectionOutcome::Empty { .. } => {
                // Rainbow padding: the first set of each remaining family.
                for c in (color + 1)..k {
                    chosen.push(ColorIndex { color: c, index: 0 });
                }
                return Ok(ColorfulOutcome::Certificate {
                    indices: chosen,
                    dist_lower_bound: None,
                    trace,
                });
            }
            IntersectionOutcome::Indeterminate(res) => {
                return Err(Error::NonConvergence {
                    context: format!(
                        "projection onto the running rainbow {}-tuple did not settle",
                        chosen.len()
                    ),
                    residual: res.residual,
                    iterations: res.iterations,
                });
            }
        }
    }
    Ok(ColorfulOutcome::Certificate {
        indices: chosen,
        dist_lower_bound: Some(rk * last_dist),
        trace,
    })
}

/// Knobs for the fractional verifier.
#[derive(Clone, Copy, Debug)]
pub struct FractionalOptions {
    /// Claimed fraction of k-tuples meeting the unit ball; must be in (0, 1].
    pub alpha: f64,
    /// Exhaustive tuple enumeration when the tuple count fits this budget,
    /// uniform sampling of this many tuples otherwise.
    pub tuple_budget: usize,
    /// Cap on collected feasibility-witness center candidates.
    pub center_candidates: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for FractionalOptions {
    fn default() -> Self {
        FractionalOptions {
            alpha: 1.0,
            tuple_budget: 20_000,
            center_candidates: 64,
            tol: 1e-7,
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FractionalReport {
    /// Measured fraction of checked tuples whose intersection meets the
    /// unit ball (indeterminate checks count as misses).
    pub alpha_empirical: f64,
    /// 1 - (1 - alpha_empirical)^(1/k).
    pub beta_target: f64,
    pub best_center: Vector,
    /// Colorful mode only: the family the center covers.
    pub best_color: Option<usize>,
    /// Fraction of the (best color's) family within r_k of best_center.
    pub covered_fraction: f64,
    pub tuples_checked: usize,
    pub sampled: bool,
    pub indeterminate_checks: usize,
}

impl FractionalReport {
    /// Did the search reach the guaranteed fraction?
    pub fn clears_target(&self) -> bool {
        self.covered_fraction + 1e-12 >= self.beta_target
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn beta_from_alpha(alpha: f64, k: usize) -> f64 {
    1.0 - (1.0 - alpha).max(0.0).powf(1.0 / k as f64)
}

fn check_fractional_inputs(opts: &FractionalOptions) -> Result<(), Error> {
    if !(opts.alpha > 0.0 && opts.alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {}",
            opts.alpha
        )));
    }
    if opts.tuple_budget == 0 {
        return Err(Error::invalid("tuple budget must be positive"));
    }
    Ok(())
}

/// Count of sets within rk (+tol) of x, by independent projections.
fn covered_count(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    x: &Vector,
    rk: f64,
    tol: f64,
    solve: &SolveOptions,
) -> Result<usize, Error> {
    let mut n = 0;
    for s in sets {
        if nearest_point(space, s, x, solve)?.dist <= rk + tol {
            n += 1;
        }
    }
    Ok(n)
}

/// Fractional verifier, monochrome mode: measures how many k-tuples meet
/// the unit ball and searches greedy/witness candidates for a center whose
/// r_k-ball meets at least a beta fraction of the family.
pub fn fractional_verify(
    space: &SpaceSpec,
    family: &[ConvexSet],
    k: usize,
    rseq: &RadiusSequence,
    opts: &FractionalOptions,
) -> Result<FractionalReport, Error> {
    check_fractional_inputs(opts)?;
    if family.is_empty() {
        return Err(Error::invalid("family must be nonempty"));
    }
    let n = family.len();
    if k < 1 || k > n {
        return Err(Error::invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    let rk = check_search_inputs(space, rseq, k, opts.tol)?;
    let solve = SolveOptions::for_space(space);
    let origin = Vector::zeros(space.dim);

    // (a) measure alpha over k-tuples.
    let exhaustive = binomial(n, k) <= opts.tuple_budget as u128;
    let tuples: Vec<Vec<usize>> = if exhaustive {
        (0..n).combinations(k).collect()
    } else {
        let mut rng = crate::seeds::rng(opts.seed, &[TAG_FRACTIONAL, 0]);
        (0..opts.tuple_budget)
            .map(|_| {
                let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
                idx.sort_unstable();
                idx
            })
            .collect()
    };
    let mut hits = 0usize;
    let mut indeterminate = 0usize;
    let mut witnesses: Vec<Vector> = Vec::new();
    for tuple in &tuples {
        let sets: Vec<ConvexSet> = tuple.iter().map(|&i| family[i].clone()).collect();
        let check = intersects_ball(space, &sets, &origin, 1.0, &solve)?;
        match check.status {
            BallStatus::Intersects => {
                hits += 1;
                if witnesses.len() < opts.center_candidates {
                    if let Some(w) = check.witness {
                        witnesses.push(w);
                    }
                }
            }
            BallStatus::Misses => {}
            BallStatus::Indeterminate => indeterminate += 1,
        }
    }
    let alpha_empirical = hits as f64 / tuples.len() as f64;
    let beta_target = beta_from_alpha(alpha_empirical, k);

    // (b) candidate centers: origin, greedy projections, tuple witnesses.
    let mut candidates = vec![origin.clone()];
    match helly_search(space, family, k, rseq, opts.tol)? {
        HellyOutcome::Witness { x, .. } => candidates.push(x),
        HellyOutcome::Certificate { trace, .. } => {
            for step in &trace {
                candidates.push(Vector(space::scale(step.point_scaled.as_slice(), rk)));
            }
        }
    }
    candidates.extend(witnesses);

    let mut best_center = origin;
    let mut best = 0usize;
    for cand in &candidates {
        let c = covered_count(space, family, cand, rk, opts.tol, &solve)?;
        if c > best {
            best = c;
            best_center = cand.clone();
        }
    }
    Ok(FractionalReport {
        alpha_empirical,
        beta_target,
        best_center,
        best_color: None,
        covered_fraction: best as f64 / n as f64,
        tuples_checked: tuples.len(),
        sampled: !exhaustive,
        indeterminate_checks: indeterminate,
    })
}

/// Fractional verifier over rainbow tuples (one set per family); the center
/// must cover a beta fraction of some single family.
pub fn fractional_verify_colorful(
    space: &SpaceSpec,
    families: &[Vec<ConvexSet>],
    rseq: &RadiusSequence,
    opts: &FractionalOptions,
) -> Result<FractionalReport, Error> {
    check_fractional_inputs(opts)?;
    let k = families.len();
    if k == 0 || families.iter().any(|f| f.is_empty()) {
        return Err(Error::invalid("need k nonempty families"));
    }
    let rk = check_search_inputs(space, rseq, k, opts.tol)?;
    let solve = SolveOptions::for_space(space);
    let origin = Vector::zeros(space.dim);

    let total: u128 = families
        .iter()
        .fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128));
    let exhaustive = total <= opts.tuple_budget as u128;
    let tuples: Vec<Vec<usize>> = if exhaustive {
        families
            .iter()
            .map(|f| 0..f.len())
            .multi_cartesian_product()
            .collect()
    } else {
        let mut rng = crate::seeds::rng(opts.seed, &[TAG_FRACTIONAL, 1]);
        (0..opts.tuple_budget)
            .map(|_| families.iter().map(|f| rng.gen_range(0..f.len())).collect())
            .collect()
    };
    let mut hits = 0usize;
    let mut indeterminate = 0usize;
    let mut witnesses: Vec<Vector> = Vec::new();
    for tuple in &tuples {
        let sets: Vec<ConvexSet> = tuple
            .iter()
            .enumerate()
            .map(|(c, &i)| families[c][i].clone())
            .collect();
        let check = intersects_ball(space, &sets, &origin, 1.0, &solve)?;
        match check.status {
            BallStatus::Intersects => {
                hits += 1;
                if witnesses.len() < opts.center_candidates {
                    if let Some(w) = check.witness {
                        witnesses.push(w);
                    }
                }
            }
            BallStatus::Misses => {}
            BallStatus::Indeterminate => indeterminate += 1,
        }
    }
    let alpha_empirical = hits as f64 / tuples.len() as f64;
    let beta_target = beta_from_alpha(alpha_empirical, k);

    let mut candidates = vec![origin.clone()];
    match colorful_search(space, families, rseq, opts.tol)? {
        ColorfulOutcome::Witness { x, .. } => candidates.push(x),
        ColorfulOutcome::Certificate { trace, .. } => {
            for step in &trace {
                candidates.push(Vector(space::scale(step.point_scaled.as_slice(), rk)));
            }
        }
    }
    candidates.extend(witnesses);

    let mut best_center = origin;
    let mut best_color = 0usize;
    let mut best_frac = -1.0f64;
    for cand in &candidates {
        for (color, fam) in families.iter().enumerate() {
            let c = covered_count(space, fam, cand, rk, opts.tol, &solve)?;
            let frac = c as f64 / fam.len() as f64;
            if frac > best_frac {
                best_frac = frac;
                best_center = cand.clone();
                best_color = color;
            }
        }
    }
    Ok(FractionalReport {
        alpha_empirical,
        beta_target,
        best_center,
        best_color: Some(best_color),
        covered_fraction: best_frac.max(0.0),
        tuples_checked: tuples.len(),
        sampled: !exhaustive,
        indeterminate_checks: indeterminate,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterpointResult {
    pub x: Vector,
    /// Ball radius used in the halfspace test (r_k).
    pub r: f64,
    pub k: usize,
    pub n: usize,
    pub directions_checked: usize,
    /// Over all checked directions u, the least number of points in the
    /// halfspace {y : <u, y> >= <u, x> - r}.
    pub min_halfspace_count: usize,
}

impl CenterpointResult {
    pub fn required(&self) -> usize {
        self.n.div_ceil(self.k)
    }

    pub fn passed(&self) -> bool {
        self.min_halfspace_count >= self.required()
    }
}

/// Centerpoint construction (Euclidean only): runs the greedy search over
/// hulls of all large subsets, then verifies the halfspace-count property
/// along sampled directions and all pairwise difference directions.
pub fn centerpoint(
    space: &SpaceSpec,
    points: &[Vector],
    k: usize,
    rseq: &RadiusSequence,
    dir_samples: usize,
    seed: u64,
) -> Result<CenterpointResult, Error> {
    space.validate()?;
    if !matches!(space.mode, crate::space::Mode::Euclidean) {
        return Err(Error::invalid(
            "centerpoint construction runs in euclidean mode only",
        ));
    }
    let n = points.len();
    if n == 0 || n > 14 {
        return Err(Error::invalid(format!(
            "subset enumeration needs 1..=14 points, got {n}"
        )));
    }
    if k < 1 || k > n {
        return Err(Error::invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    for p in points {
        space.check_dim(p.dim())?;
        if space::norm_slice(space, p.as_slice()) > 1.0 + 1e-8 {
            return Err(Error::invalid(
                "all points must lie inside the unit ball",
            ));
        }
    }
    let rk = check_search_inputs(space, rseq, k, 1e-7)?;

    let m = n * (k - 1) / k + 1;
    let hulls: Vec<ConvexSet> = (0..n)
        .combinations(m)
        .map(|subset| {
            ConvexSet::Hull {
                points: subset.iter().map(|&i| points[i].clone()).collect(),
            }
        })
        .collect();

    let x = if hulls.len() < k {
        // Too few subsets to run a k-search (happens when m = n); any point
        // of the hull of P works, centroid by convention.
        let mut c = vec![0.0; space.dim];
        for p in points {
            for (ci, v) in c.iter_mut().zip(p.as_slice()) {
                *ci += v / n as f64;
            }
        }
        Vector(c)
    } else {
        match helly_search(space, &hulls, k, rseq, 1e-7)? {
            HellyOutcome::Witness { x, .. } => x,
            HellyOutcome::Certificate { indices, trace, .. } => {
                return Err(Error::BoundViolation(format!(
                    "centerpoint hypothesis failed: certificate tuple {indices:?} after {} projections (every k-tuple of large-subset hulls must share a point of P)",
                    trace.len()
                )));
            }
        }
    };

    // Direction set: all pairwise differences plus seeded Gaussian samples.
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space::sub(points[i].as_slice(), points[j].as_slice());
            let nd = space::norm_slice(space, &d);
            if nd > 1e-12 {
                dirs.push(space::scale(&d, 1.0 / nd));
            }
        }
    }
    let mut rng = crate::seeds::rng(seed, &[TAG_CENTERPOINT]);
    while dirs.len() < dir_samples + n * (n - 1) / 2 {
        let g: Vec<f64> = (0..space.dim).map(|_| gaussian(&mut rng)).collect();
        let nd = space::norm_slice(space, &g);
        if nd > 1e-9 {
            dirs.push(space::scale(&g, 1.0 / nd));
        }
    }

    let mut min_count = usize::MAX;
    for u in &dirs {
        // dual_norm = norm in euclidean mode; u is unit.
        let threshold = space::dot(u, x.as_slice()) - rk - 1e-6;
        let count = points
            .iter()
            .filter(|y| space::dot(u, y.as_slice()) >= threshold)
            .count();
        min_count = min_count.min(count);
    }
    Ok(CenterpointResult {
        x,
        r: rk,
        k,
        n,
        directions_checked: dirs.len(),
        min_halfspace_count: min_count,
    })
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; u clamped away from zero.
    let u: f64 = rng.gen_range(1e-12..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}
