//! Section-based search internals for the moduli estimators.
//!
//! Every pair (x, y) of unit vectors spans a 2-plane, so optimizing over
//! 2-D sections of the sphere covers the whole constraint set. The planes
//! searched are all coordinate planes plus seeded random rotations; within
//! a plane the unit sphere is the curve (cos t, sin t) e,f renormalized,
//! swept on an angular grid and polished by golden-section refinement.
//! For d > 2 a multi-start projected descent over full-dimensional pairs
//! runs on top, so extremals that sit slightly off the sampled planes are
//! still reachable.

use rand::Rng;

use crate::seeds;
use crate::space::{self, SpaceSpec};

use super::SearchBudget;

/// Stream tags so different estimators draw independent randomness.
pub(super) const TAG_DELTA: u64 = 1;
pub(super) const TAG_ZETA_MINUS: u64 = 2;
pub(super) const TAG_ZETA_PLUS: u64 = 3;
pub(super) const TAG_RHO: u64 = 4;

pub(super) struct Section {
    pub e: Vec<f64>,
    pub f: Vec<f64>,
}

impl Section {
    /// Unit-sphere point of the section at angle t.
    fn point(&self, space: &SpaceSpec, t: f64) -> Vec<f64> {
        let (c, s) = (t.cos(), t.sin());
        let raw: Vec<f64> = self.e.iter().zip(&self.f).map(|(a, b)| c * a + s * b).collect();
        let n = space::norm_slice(space, &raw);
        space::scale(&raw, 1.0 / n)
    }
}

/// Coordinate planes followed by seeded random planes; deterministic for a
/// given budget. For d = 2 the single coordinate plane is the whole space.
pub(super) fn sections(space: &SpaceSpec, budget: &SearchBudget, tag: u64) -> Vec<Section> {
    let d = space.dim;
    let mut out = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut e = vec![0.0; d];
            let mut f = vec![0.0; d];
            e[i] = 1.0;
            f[j] = 1.0;
            out.push(Section { e, f });
        }
    }
    if d > 2 {
        let random = budget.restarts.div_ceil(4).max(4);
        for idx in 0..random {
            let mut rng = seeds::rng(budget.seed, &[tag, idx as u64]);
            loop {
                let g1: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
                let g2: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
                let n1 = space::dot(&g1, &g1).sqrt();
                if n1 < 1e-9 {
                    continue;
                }
                let e: Vec<f64> = space::scale(&g1, 1.0 / n1);
                let proj = space::dot(&e, &g2);
                let f_raw = space::axpy(&g2, -proj, &e);
                let n2 = space::dot(&f_raw, &f_raw).sqrt();
                if n2 < 1e-9 {
                    continue;
                }
                out.push(Section { e, f: space::scale(&f_raw, 1.0 / n2) });
                break;
            }
        }
    }
    out
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Angular grid used for pair sweeps; quadratic cost caps it harder than
/// the linear zeta sweeps.
fn pair_grid(space: &SpaceSpec, budget: &SearchBudget) -> usize {
    let cap = if space.dim == 2 { 1024 } else { 384 };
    budget.grid.min(cap).max(64)
}

// --- delta: sup of ||x + y|| over unit pairs with ||x - y|| >= eps ---

/// One winner per eps: value of ||x+y|| plus the location that achieved it.
#[derive(Clone, Copy)]
struct PairBest {
    value: f64,
    section: usize,
    t1: f64,
    t2: f64,
}

impl PairBest {
    fn empty() -> Self {
        PairBest { value: f64::NEG_INFINITY, section: usize::MAX, t1: 0.0, t2: 0.0 }
    }

    fn merge(&mut self, other: PairBest) {
        if other.value > self.value {
            *self = other;
        }
    }
}

/// Estimates delta on a sorted eps grid in one sweep per section: every
/// sampled pair at distance dist is a candidate for all eps <= dist, so the
/// per-bucket maxima of ||x+y|| are suffix-maxed over the grid.
pub(super) fn delta_on_grid(space: &SpaceSpec, eps: &[f64], budget: &SearchBudget) -> Vec<f64> {
    let secs = sections(space, budget, TAG_DELTA);
    let n = pair_grid(space, budget);
    let per_section: Vec<Vec<PairBest>> = maybe_par_map(&secs, |(si, sec)| {
        sweep_pairs(space, sec, si, eps, n)
    });
    let mut best = vec![PairBest::empty(); eps.len()];
    for sec_best in &per_section {
        for (b, s) in best.iter_mut().zip(sec_best) {
            b.merge(*s);
        }
    }
    // Suffix max: a pair feasible for a larger eps is feasible for smaller.
    for i in (1..best.len()).rev() {
        let hi = best[i];
        best[i - 1].merge(hi);
    }
    eps.iter()
        .zip(&best)
        .map(|(&e, b)| {
            if e <= 0.0 {
                return 0.0;
            }
            let mut sup = b.value;
            if b.section != usize::MAX {
                let refined = refine_delta(space, &secs[b.section], e, b.t1, b.t2);
                sup = sup.max(refined);
            }
            // Antipodal pairs are always feasible for eps <= 2.
            if e <= 2.0 {
                sup = sup.max(0.0);
            }
            (1.0 - 0.5 * sup).clamp(0.0, 1.0)
        })
        .collect()
}

fn sweep_pairs(
    space: &SpaceSpec,
    sec: &Section,
    si: usize,
    eps: &[f64],
    n: usize,
) -> Vec<PairBest> {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|i| sec.point(space, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect();
    let mut best = vec![PairBest::empty(); eps.len()];
    for i in 0..n {
        for j in i..n {
            let x = &pts[i];
            let y = &pts[j];
            let dist = space::norm_slice(space, &space::sub(x, y));
            // Largest eps bucket this pair helps; suffix max spreads it.
            let slot = match eps.partition_point(|&e| e <= dist) {
                0 => continue,
                s => s - 1,
            };
            let sum = space::norm_slice(space, &space::add(x, y));
            best[slot].merge(PairBest {
                value: sum,
                section: si,
                t1: 2.0 * std::f64::consts::PI * i as f64 / n as f64,
                t2: 2.0 * std::f64::consts::PI * j as f64 / n as f64,
            });
        }
    }
    best
}

/// Polishes a delta candidate: the constraint ||x - y|| >= eps is active at
/// the optimum, so walk t1 by golden section while t2 tracks the chord
/// ||v(t1) - v(t2)|| = eps on the same side.
fn refine_delta(space: &SpaceSpec, sec: &Section, eps: f64, t1: f64, t2: f64) -> f64 {
    let h = 0.05;
    let objective = |a: f64, hint: f64| -> Option<(f64, f64)> {
        let x = sec.point(space, a);
        let b = chord_solve(space, sec, &x, eps, hint)?;
        let y = sec.point(space, b);
        Some((space::norm_slice(space, &space::add(&x, &y)), b))
    };
    let mut lo = t1 - h;
    let mut hi = t1 + h;
    let mut hint = t2;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..48 {
        let phi = 0.5 * (3.0 - 5f64.sqrt());
        let m1 = lo + phi * (hi - lo);
        let m2 = hi - phi * (hi - lo);
        let v1 = objective(m1, hint);
        let v2 = objective(m2, hint);
        match (v1, v2) {
            (Some((f1, b1)), Some((f2, b2))) => {
                if f1 >= f2 {
                    hi = m2;
                    hint = b1;
                    best = best.max(f1);
                } else {
                    lo = m1;
                    hint = b2;
                    best = best.max(f2);
                }
            }
            _ => return best,
        }
    }
    best
}

/// Finds t2 near `hint` with ||x - v(t2)|| = eps by bracket expansion plus
/// bisection; returns None if no bracket shows up within a half turn.
fn chord_solve(
    space: &SpaceSpec,
    sec: &Section,
    x: &[f64],
    eps: f64,
    hint: f64,
) -> Option<f64> {
    let g = |t: f64| space::norm_slice(space, &space::sub(x, &sec.point(space, t))) - eps;
    let step = 0.02;
    let g0 = g(hint);
    if g0.abs() < 1e-15 {
        return Some(hint);
    }
    let mut a = hint;
    let mut ga = g0;
    for i in 1..=160 {
        // Expand symmetrically so either side of the hint can bracket.
        let cand = if i % 2 == 0 { hint + step * (i / 2) as f64 } else { hint - step * (i / 2 + 1) as f64 };
        let gc = g(cand);
        if ga * gc <= 0.0 {
            let (mut lo, mut hi) = if a < cand { (a, cand) } else { (cand, a) };
            let (mut glo, _) = if a < cand { (ga, gc) } else { (gc, ga) };
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if glo * gm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        a = cand;
        ga = gc;
    }
    None
}

// --- zeta: inf/sup of ||x + t y|| over unit x with y unit, y quasi-orthogonal to x ---

#[derive(Clone, Copy, PartialEq)]
pub(super) enum Goal {
    Min,
    Max,
}

/// Estimates zeta_minus (Goal::Min) or zeta_plus (Goal::Max) on a grid of
/// t values. Within a section the quasi-orthogonal direction at x is the
/// kernel of the norming functional intersected with the plane, which is a
/// line, so each sphere point contributes exactly two candidates.
pub(super) fn zeta_on_grid(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
    goal: Goal,
) -> Vec<f64> {
    let tag = if goal == Goal::Min { TAG_ZETA_MINUS } else { TAG_ZETA_PLUS };
    let secs = sections(space, budget, tag);
    let n = budget.grid.clamp(256, 8192);
    let sign = if goal == Goal::Min { 1.0 } else { -1.0 };

    struct ZBest {
        value: f64,
        section: usize,
        theta: f64,
        flip: f64,
    }
    let per_section: Vec<Vec<ZBest>> = maybe_par_map(&secs, |(si, sec)| {
        let mut best: Vec<ZBest> = ts
            .iter()
            .map(|_| ZBest { value: f64::INFINITY, section: usize::MAX, theta: 0.0, flip: 1.0 })
            .collect();
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let Some((x, y)) = section_pair(space, sec, theta) else { continue };
            for (k, &t) in ts.iter().enumerate() {
                for flip in [1.0, -1.0] {
                    let v = space::norm_slice(space, &space::axpy(&x, flip * t, &y));
                    if sign * v < best[k].value {
                        best[k] = ZBest { value: sign * v, section: si, theta, flip };
                    }
                }
            }
        }
        best
    });

    let mut merged: Vec<ZBest> = ts
        .iter()
        .map(|_| ZBest { value: f64::INFINITY, section: usize::MAX, theta: 0.0, flip: 1.0 })
        .collect();
    for sec_best in per_section {
        for (m, b) in merged.iter_mut().zip(sec_best) {
            if b.value < m.value {
                *m = b;
            }
        }
    }

    let refined: Vec<f64> = merged
        .iter()
        .zip(ts)
        .map(|(b, &t)| {
            if t == 0.0 || b.section == usize::MAX {
                return if b.value.is_finite() { sign * b.value } else { 1.0 };
            }
            let sec = &secs[b.section];
            let f = |theta: f64| -> f64 {
                match section_pair(space, sec, theta) {
                    Some((x, y)) => {
                        sign * space::norm_slice(space, &space::axpy(&x, b.flip * t, &y))
                    }
                    None => f64::INFINITY,
                }
            };
            let polished = golden_min(f, b.theta - 0.01, b.theta + 0.01, 48).min(b.value);
            sign * polished
        })
        .collect();

    if space.dim > 2 {
        let descended = descent_pass(space, ts, budget, goal, tag);
        refined
            .into_iter()
            .zip(descended)
            .map(|(a, b)| if goal == Goal::Min { a.min(b) } else { a.max(b) })
            .collect()
    } else {
        refined
    }
}

/// Sphere point at `theta` plus the unit quasi-orthogonal direction inside
/// the section. Returns None only in degenerate numerical corners.
fn section_pair(space: &SpaceSpec, sec: &Section, theta: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let x = sec.point(space, theta);
    let j = space::norm_gradient(space, &x);
    let je = space::dot(&j, &sec.e);
    let jf = space::dot(&j, &sec.f);
    let w: Vec<f64> = sec.e.iter().zip(&sec.f).map(|(a, b)| jf * a - je * b).collect();
    let nw = space::norm_slice(space, &w);
    if nw < 1e-12 {
        return None;
    }
    Some((x, space::scale(&w, 1.0 / nw)))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let mut best = f64::INFINITY;
    for _ in 0..iters {
        let m1 = lo + phi * (hi - lo);
        let m2 = hi - phi * (hi - lo);
        let f1 = f(m1);
        let f2 = f(m2);
        best = best.min(f1).min(f2);
        if f1 <= f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best
}

/// Multi-start projected descent over full-dimensional pairs (d > 2).
/// A step moves x and y along the norm gradient of x + t y, then projects
/// back: renormalize x, strip the norming component from y, renormalize y.
fn descent_pass(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
    goal: Goal,
    tag: u64,
) -> Vec<f64> {
    let d = space.dim;
    let restarts = budget.restarts.div_ceil(8).max(2);
    let sign = if goal == Goal::Min { 1.0 } else { -1.0 };
    let per_t: Vec<Vec<f64>> = maybe_par_map_idx(ts.len(), |k| {
        let t = ts[k];
        if t == 0.0 {
            return vec![1.0];
        }
        let mut vals = Vec::with_capacity(restarts);
        for r in 0..restarts {
            let mut rng = seeds::rng(budget.seed, &[tag, 100 + k as u64, r as u64]);
            let mut x: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
            let nx = space::norm_slice(space, &x);
            if nx < 1e-9 {
                continue;
            }
            x = space::scale(&x, 1.0 / nx);
            let z: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
            let Some(mut y) = project_direction(space, &z, &x) else { continue };
            let mut lr = 0.2;
            let mut cur = space::norm_slice(space, &space::axpy(&x, t, &y));
            for _ in 0..budget.iters {
                let g = space::norm_gradient(space, &space::axpy(&x, t, &y));
                let Some(x_try) = normalize(space, &space::axpy(&x, -sign * lr, &g)) else {
                    lr *= 0.5;
                    continue;
                };
                let y_step = space::axpy(&y, -sign * lr * t, &g);
                let Some(y_try) = project_direction(space, &y_step, &x_try) else {
                    lr *= 0.5;
                    continue;
                };
                let val = space::norm_slice(space, &space::axpy(&x_try, t, &y_try));
                if sign * val < sign * cur {
                    x = x_try;
                    y = y_try;
                    cur = val;
                    lr = (lr * 1.3).min(0.5);
                } else {
                    lr *= 0.5;
                    if lr < 1e-9 {
                        break;
                    }
                }
            }
            vals.push(cur);
        }
        vals
    });
    per_t
        .into_iter()
        .map(|vals| {
            vals.into_iter().fold(
                if goal == Goal::Min { f64::INFINITY } else { 1.0 },
                |acc, v| if goal == Goal::Min { acc.min(v) } else { acc.max(v) },
            )
        })
        .collect()
}

fn normalize(space: &SpaceSpec, v: &[f64]) -> Option<Vec<f64>> {
    let n = space::norm_slice(space, v);
    if n < 1e-12 {
        None
    } else {
        Some(space::scale(v, 1.0 / n))
    }
}

/// Unit vector in the kernel of the norming functional of x, obtained by
/// stripping the pairing component from z.
fn project_direction(space: &SpaceSpec, z: &[f64], x: &[f64]) -> Option<Vec<f64>> {
    let y = space::quasi_orthogonalize(space, z, x);
    normalize(space, &y)
}

// --- rho: sup of (||x + y|| + ||x - y||)/2 - 1 over ||x|| = 1, ||y|| = tau ---

pub(super) fn rho_on_grid(space: &SpaceSpec, taus: &[f64], budget: &SearchBudget) -> Vec<f64> {
    let secs = sections(space, budget, TAG_RHO);
    let n = pair_grid(space, budget).min(512);
    struct RBest {
        value: f64,
        section: usize,
        t1: f64,
        t2: f64,
    }
    let per_section: Vec<Vec<RBest>> = maybe_par_map(&secs, |(si, sec)| {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| sec.point(space, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        let mut best: Vec<RBest> = taus
            .iter()
            .map(|_| RBest { value: f64::NEG_INFINITY, section: usize::MAX, t1: 0.0, t2: 0.0 })
            .collect();
        for i in 0..n {
            for j in 0..n {
                for (k, &tau) in taus.iter().enumerate() {
                    let y = space::scale(&pts[j], tau);
                    let v = 0.5
                        * (space::norm_slice(space, &space::add(&pts[i], &y))
                            + space::norm_slice(space, &space::sub(&pts[i], &y)))
                        - 1.0;
                    if v > best[k].value {
                        best[k] = RBest {
                            value: v,
                            section: si,
                            t1: 2.0 * std::f64::consts::PI * i as f64 / n as f64,
                            t2: 2.0 * std::f64::consts::PI * j as f64 / n as f64,
                        };
                    }
                }
            }
        }
        best
    });
    let mut merged: Vec<RBest> = taus
        .iter()
        .map(|_| RBest { value: f64::NEG_INFINITY, section: usize::MAX, t1: 0.0, t2: 0.0 })
        .collect();
    for sec_best in per_section {
        for (m, b) in merged.iter_mut().zip(sec_best) {
            if b.value > m.value {
                *m = b;
            }
        }
    }
    merged
        .iter()
        .zip(taus)
        .map(|(b, &tau)| {
            if tau == 0.0 || b.section == usize::MAX {
                return b.value.max(0.0);
            }
            let sec = &secs[b.section];
            // Alternate golden refis on each angle with the other pinned.
            let eval = |a: f64, c: f64| {
                let x = sec.point(space, a);
                let y = space::scale(&sec.point(space, c), tau);
                0.5 * (space::norm_slice(space, &space::add(&x, &y))
                    + space::norm_slice(space, &space::sub(&x, &y)))
                    - 1.0
            };
            let (mut a, mut c) = (b.t1, b.t2);
            let mut val = b.value;
            for _ in 0..4 {
                let best_a = -golden_min(|u| -eval(u, c), a - 0.02, a + 0.02, 32);
                if best_a > val {
                    val = best_a;
                }
                a = refine_argmax(|u| eval(u, c), a, 0.02);
                let best_c = -golden_min(|u| -eval(a, u), c - 0.02, c + 0.02, 32);
                if best_c > val {
                    val = best_c;
                }
                c = refine_argmax(|u| eval(a, u), c, 0.02);
            }
            val.max(0.0)
        })
        .collect()
}

/// Cheap argmax localization on a small window (golden section variant that
/// returns the point, not the value).
fn refine_argmax(f: impl Fn(f64) -> f64, center: f64, h: f64) -> f64 {
    let phi = 0.5 * (3.0 - 5f64.sqrt());
    let mut lo = center - h;
    let mut hi = center + h;
    for _ in 0..32 {
        let m1 = lo + phi * (hi - lo);
        let m2 = hi - phi * (hi - lo);
        if f(m1) >= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

// --- deterministic parallel helpers ---

/// Maps sections in parallel but merges in index order, so results do not
/// depend on the schedule.
fn maybe_par_map<T: Send>(
    secs: &[Section],
    f: impl Fn((usize, &Section)) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    secs.par_iter().enumerate().map(|(i, s)| f((i, s))).collect()
}

fn maybe_par_map_idx<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}
