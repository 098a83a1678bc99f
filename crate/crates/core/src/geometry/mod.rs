//! Convex sets and metric projections.
//!
//! Four set shapes cover every consumer in the crate: halfspaces, norm
//! balls, polytopes given by halfspace lists, and convex hulls of finite
//! point sets. Projections are exact closed forms where available
//! (halfspace and ball in any smooth lp space), Wolfe's minimum norm point
//! method for hulls, Dykstra's scheme for Euclidean intersections, and an
//! exact penalty descent warm started from the Euclidean answer otherwise.

pub(crate) mod atoms;
mod dykstra;
mod penalty;
pub(crate) mod wolfe;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::space::{self, DualVector, Mode, SpaceSpec, Vector};

use atoms::Atom;

/// One linear constraint <a, x> <= b.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: DualVector,
    pub b: f64,
}

/// A closed convex set in one of the supported shapes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexSet {
    Halfspace { a: DualVector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Polytope { halfspaces: Vec<Halfspace> },
    Hull { points: Vec<Vector> },
}

impl ConvexSet {
    pub fn halfspace(a: Vec<f64>, b: f64) -> Self {
        ConvexSet::Halfspace { a: DualVector(a), b }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        ConvexSet::Ball { center: Vector(center), radius }
    }

    pub fn polytope(constraints: Vec<(Vec<f64>, f64)>) -> Self {
        ConvexSet::Polytope {
            halfspaces: constraints
                .into_iter()
                .map(|(a, b)| Halfspace { a: DualVector(a), b })
                .collect(),
        }
    }

    pub fn hull(points: Vec<Vec<f64>>) -> Self {
        ConvexSet::Hull { points: points.into_iter().map(Vector).collect() }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace { a, .. } => a.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Polytope { halfspaces } => {
                halfspaces.first().map_or(0, |h| h.a.dim())
            }
            ConvexSet::Hull { points } => points.first().map_or(0, |p| p.dim()),
        }
    }

    pub fn validate(&self, space: &SpaceSpec) -> Result<(), Error> {
        let check_finite = |xs: &[f64], what: &str| {
            if xs.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} has a non-finite entry")))
            }
        };
        match self {
            ConvexSet::Halfspace { a, b } => {
                space.check_dim(a.dim())?;
                check_finite(a.as_slice(), "halfspace normal")?;
                if !b.is_finite() {
                    return Err(Error::invalid("halfspace offset must be finite"));
                }
                if a.as_slice().iter().all(|v| *v == 0.0) {
                    return Err(Error::ZeroVector("halfspace normal"));
                }
            }
            ConvexSet::Ball { center, radius } => {
                space.check_dim(center.dim())?;
                check_finite(center.as_slice(), "ball center")?;
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::invalid(format!(
                        "ball radius must be finite and nonnegative, got {radius}"
                    )));
                }
            }
            ConvexSet::Polytope { halfspaces } => {
                if halfspaces.is_empty() {
                    return Err(Error::invalid("polytope needs at least one halfspace"));
                }
                for h in halfspaces {
                    ConvexSet::Halfspace { a: h.a.clone(), b: h.b }.validate(space)?;
                }
            }
            ConvexSet::Hull { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("hull needs at least one point"));
                }
                for p in points {
                    space.check_dim(p.dim())?;
                    check_finite(p.as_slice(), "hull point")?;
                }
            }
        }
        Ok(())
    }

    /// Image of the set under x -> factor * x (factor > 0).
    pub fn scale(&self, factor: f64) -> Self {
        debug_assert!(factor > 0.0 && factor.is_finite());
        match self {
            ConvexSet::Halfspace { a, b } => {
                ConvexSet::Halfspace { a: a.clone(), b: b * factor }
            }
            ConvexSet::Ball { center, radius } => ConvexSet::Ball {
                center: Vector(space::scale(center.as_slice(), factor)),
                radius: radius * factor,
            },
            ConvexSet::Polytope { halfspaces } => ConvexSet::Polytope {
                halfspaces: halfspaces
                    .iter()
                    .map(|h| Halfspace { a: h.a.clone(), b: h.b * factor })
                    .collect(),
            },
            ConvexSet::Hull { points } => ConvexSet::Hull {
                points: points
                    .iter()
                    .map(|p| Vector(space::scale(p.as_slice(), factor)))
                    .collect(),
            },
        }
    }

    /// Membership up to a distance slack of `tol` in the ambient norm.
    pub fn contains(&self, space: &SpaceSpec, x: &Vector, tol: f64) -> Result<bool, Error> {
        self.validate(space)?;
        space.check_dim(x.dim())?;
        let gap = self
            .atoms()
            .iter()
            .map(|a| a.dist_ambient(space, x.as_slice()))
            .fold(0.0f64, f64::max);
        Ok(gap <= tol)
    }

    pub(crate) fn atoms(&self) -> Vec<Atom<'_>> {
        match self {
            ConvexSet::Halfspace { a, b } => {
                vec![Atom::Halfspace { a: a.as_slice(), b: *b }]
            }
            ConvexSet::Ball { center, radius } => {
                vec![Atom::Ball { center: center.as_slice(), radius: *radius }]
            }
            ConvexSet::Polytope { halfspaces } => halfspaces
                .iter()
                .map(|h| Atom::Halfspace { a: h.a.as_slice(), b: h.b })
                .collect(),
            ConvexSet::Hull { points } => vec![Atom::Hull { points }],
        }
    }
}

/// Tolerance and iteration budget for the projection solvers.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Feasibility / distance tolerance in the ambient norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl SolveOptions {
    /// Mode-dependent defaults: closed-form-backed Euclidean solvers run
    /// tight, the lp penalty path gets a looser target and a bigger budget.
    pub fn for_space(space: &SpaceSpec) -> Self {
        match space.mode {
            Mode::Euclidean => SolveOptions { tol: 1e-8, max_iter: 10_000 },
            Mode::Lp => SolveOptions { tol: 1e-6, max_iter: 100_000 },
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iter: 10_000 }
    }
}

/// Metric projection output. `residual` is the worst constraint gap at
/// `point` in the ambient norm; closed forms report zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NearestPointResult {
    pub point: Vector,
    pub dist: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Outcome of projecting onto an intersection of sets.
#[derive(Clone, Debug)]
pub enum IntersectionOutcome {
    Feasible(NearestPointResult),
    /// A pair of members is disjoint by closed form, or the residual
    /// plateaued far above tolerance: the intersection is empty.
    Empty { residual: f64, iterations: usize },
    /// Solver stopped without a verdict either way.
    Indeterminate(NearestPointResult),
}

impl IntersectionOutcome {
    pub fn feasible(&self) -> Option<&NearestPointResult> {
        match self {
            IntersectionOutcome::Feasible(r) => Some(r),
            _ => None,
        }
    }
}

fn require_projectable(space: &SpaceSpec) -> Result<(), Error> {
    space.validate()?;
    if !space.is_smooth() {
        return Err(Error::BadExponent(
            space.p,
            "(1, inf); metric projections need a smooth norm",
        ));
    }
    Ok(())
}

/// Nearest point of `set` from `x0` in the norm of `space`.
///
/// Halfspace and ball have closed forms in every smooth lp space; hulls use
/// the minimum norm point method (Euclidean) and polytopes Dykstra's scheme,
/// both switching to the penalty solver warm started from the Euclidean
/// answer in lp mode.
pub fn nearest_point(
    space: &SpaceSpec,
    set: &ConvexSet,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<NearestPointResult, Error> {
    require_projectable(space)?;
    set.validate(space)?;
    space.check_dim(x0.dim())?;

    match set {
        ConvexSet::Halfspace { a, b } => {
            let atom = Atom::Halfspace { a: a.as_slice(), b: *b };
            let point = atom.project_ambient(space, x0.as_slice());
            let dist = (space::dot(a.as_slice(), x0.as_slice()) - b).max(0.0)
                / space::dual_norm_slice(space, a.as_slice());
            Ok(exact_result(point, dist))
        }
        ConvexSet::Ball { center, radius } => {
            let atom = Atom::Ball { center: center.as_slice(), radius: *radius };
            let point = atom.project_ambient(space, x0.as_slice());
            let diff = space::sub(x0.as_slice(), center.as_slice());
            let dist = (space::norm_slice(space, &diff) - radius).max(0.0);
            Ok(exact_result(point, dist))
        }
        ConvexSet::Polytope { .. } | ConvexSet::Hull { .. } => {
            match solve_atoms(space, &set.atoms(), x0, opts)? {
                IntersectionOutcome::Feasible(r) | IntersectionOutcome::Indeterminate(r) => Ok(r),
                IntersectionOutcome::Empty { residual, iterations } => Err(Error::NonConvergence {
                    context: "projection target appears to be empty".into(),
                    residual,
                    iterations,
                }),
            }
        }
    }
}

fn exact_result(point: Vec<f64>, dist: f64) -> NearestPointResult {
    NearestPointResult {
        point: Vector(point),
        dist,
        iterations: 0,
        residual: 0.0,
        converged: true,
    }
}

/// Nearest point of the intersection of `sets` from `x0`. An empty slice
/// denotes the whole space.
pub fn nearest_point_intersection(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<IntersectionOutcome, Error> {
    require_projectable(space)?;
    for set in sets {
        set.validate(space)?;
    }
    space.check_dim(x0.dim())?;
    let atoms: Vec<Atom<'_>> = sets.iter().flat_map(|s| s.atoms()).collect();
    solve_atoms(space, &atoms, x0, opts)
}

fn solve_atoms(
    space: &SpaceSpec,
    atoms: &[Atom<'_>],
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<IntersectionOutcome, Error> {
    // Pairwise closed forms decide emptiness outright where the iterative
    // scheme could only stall (opposite halfspaces, separated balls).
    if let Some(gap) = atoms::certify_empty_pair(atoms) {
        return Ok(IntersectionOutcome::Empty { residual: gap, iterations: 0 });
    }
    // Phase 1 always runs the Euclidean scheme: it is the answer in
    // Euclidean mode and the warm start (plus the emptiness verdict, which
    // is metric independent) otherwise.
    let euclid_tol = match space.mode {
        Mode::Euclidean => opts.tol,
        Mode::Lp => (opts.tol * 10.0).max(1e-6),
    };
    let eu = dykstra::project_intersection(atoms, x0.as_slice(), euclid_tol, opts.max_iter);
    if eu.stalled_infeasible {
        return Ok(IntersectionOutcome::Empty {
            residual: eu.residual,
            iterations: eu.cycles,
        });
    }

    if matches!(space.mode, Mode::Euclidean) {
        let diff = space::sub(&eu.x, x0.as_slice());
        let res = NearestPointResult {
            dist: space::norm_slice(space, &diff),
            point: Vector(eu.x),
            iterations: eu.cycles,
            residual: eu.residual,
            converged: eu.converged,
        };
        return Ok(if res.converged {
            IntersectionOutcome::Feasible(res)
        } else {
            IntersectionOutcome::Indeterminate(res)
        });
    }

    let pen = penalty::solve(space, atoms, x0.as_slice(), opts.tol, opts.max_iter, Some(eu.x));
    let res = NearestPointResult {
        point: Vector(pen.x),
        dist: pen.dist,
        iterations: eu.cycles + pen.iterations,
        residual: pen.residual,
        converged: pen.converged,
    };
    Ok(if res.converged {
        IntersectionOutcome::Feasible(res)
    } else if res.residual > 50.0 * opts.tol {
        IntersectionOutcome::Empty { residual: res.residual, iterations: res.iterations }
    } else {
        IntersectionOutcome::Indeterminate(res)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallStatus {
    Intersects,
    Misses,
    Indeterminate,
}

/// Verdict for "does the ball B(center, radius) meet the intersection of
/// sets", decided through dist(center, intersection).
#[derive(Clone, Debug)]
pub struct BallCheck {
    pub status: BallStatus,
    /// A point of the intersection within radius (+tol) of the center, when
    /// the verdict is positive.
    pub witness: Option<Vector>,
    /// Distance from the center to the intersection (infinite when empty).
    pub dist: f64,
    /// dist - radius.
    pub margin: f64,
}

pub fn intersects_ball(
    space: &SpaceSpec,
    sets: &[ConvexSet],
    center: &Vector,
    radius: f64,
    opts: &SolveOptions,
) -> Result<BallCheck, Error> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid(format!(
            "ball radius must be finite and nonnegative, got {radius}"
        )));
    }
    match nearest_point_intersection(space, sets, center, opts)? {
        IntersectionOutcome::Feasible(res) => {
            let margin = res.dist - radius;
            let status = if margin <= opts.tol {
                BallStatus::Intersects
            } else if margin >= 10.0 * opts.tol {
                BallStatus::Misses
            } else {
                BallStatus::Indeterminate
            };
            Ok(BallCheck {
                witness: (status == BallStatus::Intersects).then(|| res.point.clone()),
                dist: res.dist,
                margin,
                status,
            })
        }
        IntersectionOutcome::Empty { .. } => Ok(BallCheck {
            status: BallStatus::Misses,
            witness: None,
            dist: f64::INFINITY,
            margin: f64::INFINITY,
        }),
        IntersectionOutcome::Indeterminate(res) => {
            // A feasible-enough iterate inside the ball still certifies a hit.
            let margin = res.dist - radius;
            if res.residual <= opts.tol && margin <= opts.tol {
                return Ok(BallCheck {
                    status: BallStatus::Intersects,
                    witness: Some(res.point),
                    dist: margin + radius,
                    margin,
                });
            }
            Ok(BallCheck {
                status: BallStatus::Indeterminate,
                witness: None,
                dist: res.dist,
                margin,
            })
        }
    }
}
