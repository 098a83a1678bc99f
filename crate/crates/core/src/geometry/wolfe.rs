//! Wolfe's minimum norm point algorithm for convex hulls of finitely many
//! points (Euclidean metric). Used for hull projections, hull membership,
//! and as the hull penalty inside the lp solver.

/// Result of a minimum norm point computation over conv{points}.
pub(crate) struct MnpResult {
    pub point: Vec<f64>,
    pub dist: f64,
    pub iterations: usize,
    pub converged: bool,
}

const EPS_W: f64 = 1e-12;

/// Minimum norm point of conv{points}. Major/minor cycle structure: grow a
/// corral with the best linear-minimization vertex, solve the affine
/// least-norm problem on the corral, and clip back to the simplex when the
/// affine solution leaves it.
pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> MnpResult {
    assert!(!points.is_empty());
    let m = points.len();
    // Start from the smallest vertex.
    let mut start = 0;
    let mut best = sq_norm(&points[0]);
    for (i, p) in points.iter().enumerate().skip(1) {
        let n = sq_norm(p);
        if n < best {
            best = n;
            start = i;
        }
    }
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();
    let mut iterations = 0;
    let max_major = 8 * m + 64;

    for _ in 0..max_major {
        iterations += 1;
        // Linear minimization step: most improving vertex.
        let xx = sq_norm(&x);
        let mut imin = 0;
        let mut vmin = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            let v = dot(&x, p);
            if v < vmin {
                vmin = v;
                imin = i;
            }
        }
        if vmin >= xx - EPS_W * (1.0 + xx) {
            let dist = best_dist(&x);
            return MnpResult { point: x, dist, iterations, converged: true };
        }
        if !corral.contains(&imin) {
            corral.push(imin);
            weights.push(0.0);
        }

        // Minor cycle: affine minimization, clipping until inside simplex.
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 2 * m + 16 {
                break;
            }
            let Some(lambda) = affine_min(points, &corral) else {
                // Degenerate corral: drop the smallest-weight member.
                if corral.len() <= 1 {
                    break;
                }
                let (drop, _) = weights
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap();
                corral.swap_remove(drop);
                weights.swap_remove(drop);
                continue;
            };
            if lambda.iter().all(|&l| l > EPS_W) {
                weights = lambda;
                break;
            }
            // Step from `weights` toward `lambda` until a weight hits zero.
            let mut theta = 1.0f64;
            for i in 0..corral.len() {
                if lambda[i] <= EPS_W {
                    let denom = weights[i] - lambda[i];
                    if denom > EPS_W {
                        theta = theta.min(weights[i] / denom);
                    }
                }
            }
            let mut next: Vec<f64> = weights
                .iter()
                .zip(&lambda)
                .map(|(w, l)| (1.0 - theta) * w + theta * l)
                .collect();
            // Drop members clipped to zero.
            let mut keep_corral = Vec::new();
            let mut keep_w = Vec::new();
            for (i, &idx) in corral.iter().enumerate() {
                if next[i] > EPS_W {
                    keep_corral.push(idx);
                    keep_w.push(next[i]);
                }
            }
            if keep_corral.is_empty() {
                keep_corral.push(corral[0]);
                keep_w.push(1.0);
            }
            let total: f64 = keep_w.iter().sum();
            for w in &mut keep_w {
                *w /= total;
            }
            corral = keep_corral;
            weights = keep_w;
            next.clear();
        }

        let total: f64 = weights.iter().sum();
        let d = points[0].len();
        let mut nx = vec![0.0; d];
        for (w, &idx) in weights.iter().zip(&corral) {
            for (o, v) in nx.iter_mut().zip(&points[idx]) {
                *o += w / total * v;
            }
        }
        x = nx;
    }
    MnpResult { point: x.clone(), dist: best_dist(&x), iterations, converged: false }
}

fn best_dist(x: &[f64]) -> f64 {
    sq_norm(x).sqrt()
}

/// Affine minimization min ||sum l_i q_i|| with sum l_i = 1 over the corral,
/// via the bordered Gram system; None if numerically singular.
fn affine_min(points: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let m = corral.len();
    let n = m + 1;
    // Rows: [0, 1 .. 1 | 1], [1, G row | 0] with a tiny ridge on G.
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 0.0;
    for j in 0..m {
        a[0][j + 1] = 1.0;
        a[j + 1][0] = 1.0;
    }
    a[0][n] = 1.0;
    for i in 0..m {
        for j in 0..m {
            let g = dot(&points[corral[i]], &points[corral[j]]);
            a[i + 1][j + 1] = g + if i == j { 1e-13 } else { 0.0 };
        }
        a[i + 1][n] = 0.0;
    }
    gauss_solve(&mut a).map(|sol| sol[1..].to_vec())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let mut piv = col;
        let mut mag = a[col][col].abs();
        for row in (col + 1)..n {
            if a[row][col].abs() > mag {
                mag = a[row][col].abs();
                piv = row;
            }
        }
        if mag < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = a[row][n];
        for k in (row + 1)..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn segment_midpoint() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = min_norm_point(&pts);
        assert!(r.converged);
        assert!(r.iterations >= 1);
        assert!((r.point[0] - 0.5).abs() < 1e-9);
        assert!((r.point[1] - 0.5).abs() < 1e-9);
        assert!((r.dist - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn hull_containing_origin() {
        let pts = vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![0.0, -1.0]];
        let r = min_norm_point(&pts);
        assert!(r.dist < 1e-7, "dist = {}", r.dist);
    }

    #[test]
    fn single_point() {
        let pts = vec![vec![3.0, 4.0]];
        let r = min_norm_point(&pts);
        assert!((r.dist - 5.0).abs() < 1e-12);
    }

    #[test]
    fn optimality_certificate_on_random_hulls() {
        let mut rng = crate::seeds::rng(5, &[77]);
        for trial in 0..50 {
            let d = 2 + trial % 4;
            let m = 2 + trial % 7;
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..2.0)).collect())
                .collect();
            let r = min_norm_point(&pts);
            // Variational inequality: <x*, q - x*> >= 0 for every vertex.
            let xx = sq_norm(&r.point);
            for p in &pts {
                assert!(
                    dot(&r.point, p) >= xx - 1e-7 * (1.0 + xx),
                    "optimality violated (trial {trial})"
                );
            }
        }
    }
}
