//! Dykstra's alternating projection scheme for intersections of simple sets
//! under the Euclidean metric. Converges to the metric projection onto the
//! intersection when it is nonempty; an infeasible instance shows up as a
//! residual plateau bounded away from zero.

use super::atoms::Atom;

pub(crate) struct DykstraOutcome {
    pub x: Vec<f64>,
    /// Max Euclidean distance from x to any atom.
    pub residual: f64,
    pub cycles: usize,
    pub converged: bool,
    /// True when the residual plateaued well above tolerance.
    pub stalled_infeasible: bool,
}

/// Window (in cycles) over which the residual must improve to keep going.
const STALL_WINDOW: usize = 250;
const STALL_REL: f64 = 1e-10;

pub(crate) fn project_intersection(
    atoms: &[Atom<'_>],
    x0: &[f64],
    tol: f64,
    max_cycles: usize,
) -> DykstraOutcome {
    if atoms.is_empty() {
        return DykstraOutcome {
            x: x0.to_vec(),
            residual: 0.0,
            cycles: 0,
            converged: true,
            stalled_infeasible: false,
        };
    }
    let mut x = x0.to_vec();
    let mut corrections = vec![vec![0.0; x0.len()]; atoms.len()];
    let mut best_residual = f64::INFINITY;
    let mut best_x = x.clone();
    let mut last_mark = f64::INFINITY;
    let mut cycles = 0;

    for cycle in 1..=max_cycles {
        cycles = cycle;
        let prev = x.clone();
        for (atom, corr) in atoms.iter().zip(corrections.iter_mut()) {
            let z: Vec<f64> = x.iter().zip(corr.iter()).map(|(a, b)| a + b).collect();
            let y = atom.project_euclid(&z);
            for i in 0..z.len() {
                corr[i] = z[i] - y[i];
            }
            x = y;
        }
        let residual = max_dist_euclid(atoms, &x);
        // Per-cycle movement: a feasible iterate is not yet the projection
        // while the corrections are still shifting it.
        let moved = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let merit = residual + moved;
        if merit < best_residual {
            best_residual = merit;
            best_x = x.clone();
        }
        if residual <= tol && moved <= 0.1 * tol {
            return DykstraOutcome {
                x,
                residual,
                cycles,
                converged: true,
                stalled_infeasible: false,
            };
        }
        if cycle % STALL_WINDOW == 0 {
            if best_residual > last_mark * (1.0 - STALL_REL) - STALL_REL {
                // No measurable progress over a full window.
                let residual_at_best = max_dist_euclid(atoms, &best_x);
                let infeasible = residual_at_best > 50.0 * tol;
                return DykstraOutcome {
                    x: best_x,
                    residual: residual_at_best,
                    cycles,
                    converged: false,
                    stalled_infeasible: infeasible,
                };
            }
            last_mark = best_residual;
        }
    }
    let residual_at_best = max_dist_euclid(atoms, &best_x);
    DykstraOutcome {
        x: best_x,
        residual: residual_at_best,
        cycles,
        converged: false,
        stalled_infeasible: false,
    }
}

pub(crate) fn max_dist_euclid(atoms: &[Atom<'_>], x: &[f64]) -> f64 {
    atoms
        .iter()
        .map(|a| a.dist_euclid(x))
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_halfspaces_corner() {
        let a1 = vec![-1.0, 0.0];
        let a2 = vec![0.0, -1.0];
        let atoms = vec![
            Atom::Halfspace { a: &a1, b: -1.0 },
            Atom::Halfspace { a: &a2, b: -1.0 },
        ];
        let out = project_intersection(&atoms, &[0.0, 0.0], 1e-10, 10_000);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8);
        assert!((out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn wedge_at_unit_distance() {
        // Constraints <u_i, x> >= 1/2 with 120 degrees between the normals:
        // the corner (1/2, sqrt(3)/2) is the projection of the origin and
        // sits at distance exactly 1.
        let u1 = vec![-1.0, 0.0];
        let ang = 2.0 * std::f64::consts::PI / 3.0;
        let u2 = vec![-ang.cos(), -ang.sin()];
        let atoms = vec![
            Atom::Halfspace { a: &u1, b: -0.5 },
            Atom::Halfspace { a: &u2, b: -0.5 },
        ];
        let out = project_intersection(&atoms, &[0.0, 0.0], 1e-10, 20_000);
        assert!(out.converged);
        let d = (out.x[0] * out.x[0] + out.x[1] * out.x[1]).sqrt();
        assert!((d - 1.0).abs() < 1e-8, "corner distance {d}");
        assert!((out.x[0] - 0.5).abs() < 1e-8);
        assert!((out.x[1] - 0.75f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn sixty_degree_wedge_projection() {
        // Sharper wedge, corner (1/2, 1/(2 sqrt(3))) at distance 1/sqrt(3).
        let u1 = vec![-1.0, 0.0];
        let ang = std::f64::consts::PI / 3.0;
        let u2 = vec![-ang.cos(), -ang.sin()];
        let atoms = vec![
            Atom::Halfspace { a: &u1, b: -0.5 },
            Atom::Halfspace { a: &u2, b: -0.5 },
        ];
        let out = project_intersection(&atoms, &[0.0, 0.0], 1e-10, 20_000);
        assert!(out.converged);
        let d = (out.x[0] * out.x[0] + out.x[1] * out.x[1]).sqrt();
        assert!((d - 1.0 / 3.0f64.sqrt()).abs() < 1e-8, "corner distance {d}");
    }

    #[test]
    fn infeasible_slab_detected() {
        let a1 = vec![1.0];
        let a2 = vec![-1.0];
        let atoms = vec![
            Atom::Halfspace { a: &a1, b: -5.0 },
            Atom::Halfspace { a: &a2, b: -5.0 },
        ];
        let out = project_intersection(&atoms, &[0.0], 1e-8, 50_000);
        assert!(!out.converged);
        assert!(out.stalled_infeasible);
        assert!(out.residual > 4.0);
    }

    #[test]
    fn ball_and_halfspace_cap() {
        // Unit ball cut by {x2 >= 1/2}; from (2, 0) the projection is the
        // cap corner (sqrt(3)/2, 1/2).
        let a = vec![0.0, -1.0];
        let c = vec![0.0, 0.0];
        let atoms = vec![
            Atom::Ball { center: &c, radius: 1.0 },
            Atom::Halfspace { a: &a, b: -0.5 },
        ];
        let out = project_intersection(&atoms, &[2.0, 0.0], 1e-9, 50_000);
        assert!(out.residual < 1e-8);
        assert!((out.x[0] - 0.75f64.sqrt()).abs() < 1e-6);
        assert!((out.x[1] - 0.5).abs() < 1e-6);
    }
}
