//! Flattened constraint atoms shared by the projection solvers. A polytope
//! decomposes into its halfspaces; balls and hulls stay whole.

use crate::space::{self, SpaceSpec, Vector};

use super::wolfe;

pub(crate) enum Atom<'a> {
    Halfspace { a: &'a [f64], b: f64 },
    Ball { center: &'a [f64], radius: f64 },
    Hull { points: &'a [Vector] },
}

impl Atom<'_> {
    /// Euclidean metric projection onto the atom.
    pub fn project_euclid(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Atom::Halfspace { a, b } => {
                let viol = (dot(a, x) - b).max(0.0);
                if viol == 0.0 {
                    return x.to_vec();
                }
                let aa = dot(a, a);
                x.iter().zip(*a).map(|(xi, ai)| xi - viol / aa * ai).collect()
            }
            Atom::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(*center).map(|(a, b)| a - b).collect();
                let n = dot(&diff, &diff).sqrt();
                if n <= *radius {
                    return x.to_vec();
                }
                center
                    .iter()
                    .zip(&diff)
                    .map(|(c, d)| c + radius / n * d)
                    .collect()
            }
            Atom::Hull { points } => {
                let shifted: Vec<Vec<f64>> = points
                    .iter()
                    .map(|p| p.0.iter().zip(x).map(|(a, b)| a - b).collect())
                    .collect();
                let r = wolfe::min_norm_point(&shifted);
                r.point.iter().zip(x).map(|(m, xi)| xi + m).collect()
            }
        }
    }

    /// Euclidean distance from x to the atom.
    pub fn dist_euclid(&self, x: &[f64]) -> f64 {
        match self {
            Atom::Halfspace { a, b } => (dot(a, x) - b).max(0.0) / dot(a, a).sqrt(),
            Atom::Ball { center, radius } => {
                let d2: f64 = x
                    .iter()
                    .zip(*center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2.sqrt() - radius).max(0.0)
            }
            Atom::Hull { points } => {
                let shifted: Vec<Vec<f64>> = points
                    .iter()
                    .map(|p| p.0.iter().zip(x).map(|(a, b)| a - b).collect())
                    .collect();
                wolfe::min_norm_point(&shifted).dist
            }
        }
    }

    /// Feasibility gap in the ambient norm of `space`. For hulls the
    /// Euclidean gap stands in (vanishes exactly on the set, which is all
    /// the feasibility logic needs).
    pub fn dist_ambient(&self, space: &SpaceSpec, x: &[f64]) -> f64 {
        match self {
            Atom::Halfspace { a, b } => {
                (dot(a, x) - b).max(0.0) / space::dual_norm_slice(space, a)
            }
            Atom::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(*center).map(|(a, b)| a - b).collect();
                (space::norm_slice(space, &diff) - radius).max(0.0)
            }
            Atom::Hull { .. } => self.dist_euclid(x),
        }
    }

    /// Subgradient of `dist_ambient` at an infeasible point, plus the current
    /// gap. Returns None at (near-)feasible points.
    pub fn penalty_grad(&self, space: &SpaceSpec, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        match self {
            Atom::Halfspace { a, b } => {
                let gap = dot(a, x) - b;
                if gap <= 0.0 {
                    return None;
                }
                let dn = space::dual_norm_slice(space, a);
                Some((gap / dn, a.iter().map(|ai| ai / dn).collect()))
            }
            Atom::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(*center).map(|(a, b)| a - b).collect();
                let n = space::norm_slice(space, &diff);
                if n <= *radius + 1e-15 {
                    return None;
                }
                Some((n - radius, space::norm_gradient(space, &diff)))
            }
            Atom::Hull { points } => {
                let shifted: Vec<Vec<f64>> = points
                    .iter()
                    .map(|p| p.0.iter().zip(x).map(|(a, b)| a - b).collect())
                    .collect();
                let r = wolfe::min_norm_point(&shifted);
                if r.dist <= 1e-13 {
                    return None;
                }
                // d/dx ||x - P(x)|| along the outward direction.
                Some((r.dist, r.point.iter().map(|m| -m / r.dist).collect()))
            }
        }
    }

    /// Move x exactly onto the atom with the ambient-metric projection where
    /// a closed form exists; hull falls back to the Euclidean projection.
    pub fn project_ambient(&self, space: &SpaceSpec, x: &[f64]) -> Vec<f64> {
        match self {
            Atom::Halfspace { a, b } => {
                let viol = (dot(a, x) - b).max(0.0);
                if viol == 0.0 {
                    return x.to_vec();
                }
                let q = space.dual_exponent();
                let dnq: f64 = a.iter().map(|ai| ai.abs().powf(q)).sum();
                x.iter()
                    .zip(*a)
                    .map(|(xi, ai)| xi - viol / dnq * ai.signum() * ai.abs().powf(q - 1.0))
                    .collect()
            }
            Atom::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(*center).map(|(a, b)| a - b).collect();
                let n = space::norm_slice(space, &diff);
                if n <= *radius {
                    return x.to_vec();
                }
                center
                    .iter()
                    .zip(&diff)
                    .map(|(c, d)| c + radius / n * d)
                    .collect()
            }
            Atom::Hull { .. } => self.project_euclid(x),
        }
    }
}

/// Closed-form emptiness certificate over atom pairs. The alternating
/// scheme can stall without a verdict when infeasibility comes from just
/// two members (opposite halfspaces, separated balls); those cases are
/// decidable outright. Returns the largest certified pairwise gap, or None
/// when no pair certifies. Never certifies a nonempty system.
pub(crate) fn certify_empty_pair(atoms: &[Atom<'_>]) -> Option<f64> {
    // Absolute slack keeps the certificate sound under rounding.
    const MARGIN: f64 = 1e-12;
    let mut best: Option<f64> = None;
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            if let Some(gap) = disjoint_gap(&atoms[i], &atoms[j], MARGIN) {
                best = Some(best.map_or(gap, |b: f64| b.max(gap)));
            }
        }
    }
    best
}

fn disjoint_gap(s: &Atom<'_>, t: &Atom<'_>, margin: f64) -> Option<f64> {
    match (s, t) {
        (Atom::Halfspace { a: a1, b: b1 }, Atom::Halfspace { a: a2, b: b2 }) => {
            // Two halfspaces exclude each other only when the unit normals
            // cancel exactly; the gap is then the slab separation.
            let n1 = dot(a1, a1).sqrt();
            let n2 = dot(a2, a2).sqrt();
            let combo: f64 = a1
                .iter()
                .zip(*a2)
                .map(|(x, y)| {
                    let c = x / n1 + y / n2;
                    c * c
                })
                .sum();
            let sep = -(b1 / n1 + b2 / n2);
            (combo == 0.0 && sep > margin).then_some(sep)
        }
        (Atom::Halfspace { a, b }, Atom::Ball { center, radius })
        | (Atom::Ball { center, radius }, Atom::Halfspace { a, b }) => {
            let gap = (dot(a, center) - b) / dot(a, a).sqrt() - radius;
            (gap > margin).then_some(gap)
        }
        (Atom::Ball { center: c1, radius: r1 }, Atom::Ball { center: c2, radius: r2 }) => {
            let d2: f64 = c1.iter().zip(*c2).map(|(x, y)| (x - y) * (x - y)).sum();
            let gap = d2.sqrt() - r1 - r2;
            (gap > margin).then_some(gap)
        }
        (h @ Atom::Halfspace { .. }, Atom::Hull { points })
        | (Atom::Hull { points }, h @ Atom::Halfspace { .. }) => {
            // Linear gap attains its minimum at a hull generator.
            let gap = points
                .iter()
                .map(|p| h.dist_euclid(p.as_slice()))
                .fold(f64::INFINITY, f64::min);
            (gap > margin).then_some(gap)
        }
        (Atom::Ball { center, radius }, hull @ Atom::Hull { .. })
        | (hull @ Atom::Hull { .. }, Atom::Ball { center, radius }) => {
            let gap = hull.dist_euclid(center) - radius;
            (gap > margin).then_some(gap)
        }
        (Atom::Hull { .. }, Atom::Hull { .. }) => None,
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
