//! Moduli of convexity and smoothness, and the hypotenuse moduli that
//! compare a unit vector against quasi-orthogonal perturbations.
//!
//! * `delta(eps)`: modulus of convexity, inf of 1 - ||x+y||/2 over unit
//!   pairs at distance >= eps;
//! * `zeta_minus(t)` / `zeta_plus(t)`: inf / sup of ||x + t y|| over unit x
//!   with unit y quasi-orthogonal to x;
//! * `rho(tau)`: modulus of smoothness, sup of (||x+y|| + ||x-y||)/2 - 1
//!   over unit x and ||y|| = tau.
//!
//! Euclidean mode evaluates closed forms; lp mode runs the section search
//! in [`search`]. Estimates are one-sided (delta and zeta_plus from above,
//! zeta_minus from below is not guaranteed: the search reports the best
//! candidate it saw), so downstream checks carry explicit slack.

mod search;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::sequences::PowerTypeBoundParams;
use crate::space::{Mode, SpaceSpec};
use crate::DEFAULT_SEED;

/// Effort knobs for the randomized estimators. Restarts control how many
/// random sections / descent starts are drawn, `iters` the descent length,
/// `grid` the angular resolution of deterministic sweeps. Everything is
/// derived from `seed`, so equal budgets give equal results.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iters: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { restarts: 64, iters: 200, grid: 4096, seed: DEFAULT_SEED }
    }
}

impl SearchBudget {
    /// Reduced budget for tests and quick scans.
    pub fn quick() -> Self {
        SearchBudget { restarts: 16, iters: 80, grid: 1024, seed: DEFAULT_SEED }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

// --- closed forms (Euclidean) ---

pub fn euclid_delta(eps: f64) -> f64 {
    1.0 - (1.0 - eps * eps / 4.0).max(0.0).sqrt()
}

pub fn euclid_rho(tau: f64) -> f64 {
    (1.0 + tau * tau).sqrt() - 1.0
}

pub use crate::sequences::euclidean_zeta as euclid_zeta;

fn require_uniformly_convex(space: &SpaceSpec) -> Result<(), Error> {
    space.validate()?;
    if !(space.p > 1.0) {
        return Err(Error::BadExponent(space.p, "(1, infinity) for moduli"));
    }
    Ok(())
}

fn check_grid(grid: &[f64], lo: f64, hi: f64, what: &str) -> Result<(), Error> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{what}: empty grid")));
    }
    let mut prev = f64::NEG_INFINITY;
    for &g in grid {
        if !g.is_finite() || g < lo || g > hi {
            return Err(Error::invalid(format!(
                "{what}: grid value {g} outside [{lo}, {hi}]"
            )));
        }
        if g <= prev {
            return Err(Error::invalid(format!("{what}: grid must be strictly increasing")));
        }
        prev = g;
    }
    Ok(())
}

// --- public estimators ---

/// Modulus of convexity on a strictly increasing grid in [0, 2].
pub fn delta_grid(
    space: &SpaceSpec,
    eps: &[f64],
    budget: &SearchBudget,
) -> Result<Vec<f64>, Error> {
    require_uniformly_convex(space)?;
    check_grid(eps, 0.0, 2.0, "delta")?;
    if space.mode == Mode::Euclidean {
        return Ok(eps.iter().map(|&e| euclid_delta(e)).collect());
    }
    Ok(search::delta_on_grid(space, eps, budget))
}

pub fn delta(space: &SpaceSpec, eps: f64, budget: &SearchBudget) -> Result<f64, Error> {
    Ok(delta_grid(space, &[eps], budget)?[0])
}

/// Lower hypotenuse modulus on a strictly increasing grid of t >= 0.
pub fn zeta_minus_grid(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
) -> Result<Vec<f64>, Error> {
    require_uniformly_convex(space)?;
    check_grid(ts, 0.0, f64::INFINITY, "zeta_minus")?;
    if space.mode == Mode::Euclidean {
        return Ok(ts.iter().map(|&t| euclid_zeta(t)).collect());
    }
    Ok(search::zeta_on_grid(space, ts, budget, search::Goal::Min))
}

pub fn zeta_minus(space: &SpaceSpec, t: f64, budget: &SearchBudget) -> Result<f64, Error> {
    Ok(zeta_minus_grid(space, &[t], budget)?[0])
}

/// Upper hypotenuse modulus on a strictly increasing grid of t >= 0.
pub fn zeta_plus_grid(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
) -> Result<Vec<f64>, Error> {
    require_uniformly_convex(space)?;
    check_grid(ts, 0.0, f64::INFINITY, "zeta_plus")?;
    if space.mode == Mode::Euclidean {
        return Ok(ts.iter().map(|&t| euclid_zeta(t)).collect());
    }
    Ok(search::zeta_on_grid(space, ts, budget, search::Goal::Max))
}

pub fn zeta_plus(space: &SpaceSpec, t: f64, budget: &SearchBudget) -> Result<f64, Error> {
    Ok(zeta_plus_grid(space, &[t], budget)?[0])
}

/// Modulus of smoothness on a strictly increasing grid of tau >= 0.
pub fn rho_grid(
    space: &SpaceSpec,
    taus: &[f64],
    budget: &SearchBudget,
) -> Result<Vec<f64>, Error> {
    require_uniformly_convex(space)?;
    check_grid(taus, 0.0, f64::INFINITY, "rho")?;
    if space.mode == Mode::Euclidean {
        return Ok(taus.iter().map(|&t| euclid_rho(t)).collect());
    }
    Ok(search::rho_on_grid(space, taus, budget))
}

pub fn rho(space: &SpaceSpec, tau: f64, budget: &SearchBudget) -> Result<f64, Error> {
    Ok(rho_grid(space, &[tau], budget)?[0])
}

// --- rectified piecewise-linear interpolant for zeta tables ---

/// Monotone piecewise-linear zeta usable as a recursion driver. Built from
/// estimated knots it anchors zeta(0) = 1, projects onto nondecreasing
/// sequences (pool adjacent violators), clamps into the triangle envelope
/// [1, 1 + t], and trims slopes to the 1-Lipschitz bound. Beyond the last
/// knot it extends linearly with slope 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZetaInterpolant {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl ZetaInterpolant {
    pub fn from_knots(ts: &[f64], vs: &[f64]) -> Result<Self, Error> {
        if ts.len() != vs.len() {
            return Err(Error::invalid("interpolant: knot arrays differ in length"));
        }
        check_grid(ts, 0.0, f64::INFINITY, "interpolant")?;
        let mut t = ts.to_vec();
        let mut v = vs.to_vec();
        if t[0] > 0.0 {
            t.insert(0, 0.0);
            v.insert(0, 1.0);
        } else {
            v[0] = 1.0;
        }
        for (vi, ti) in v.iter_mut().zip(&t) {
            *vi = vi.clamp(1.0, 1.0 + *ti);
        }
        let mut v = isotonic(&v);
        v[0] = 1.0;
        for i in 1..v.len() {
            let cap = (v[i - 1] + (t[i] - t[i - 1])).min(1.0 + t[i]);
            v[i] = v[i].clamp(v[i - 1], cap);
        }
        Ok(ZetaInterpolant { ts: t, vs: v })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let n = self.ts.len();
        if t >= self.ts[n - 1] {
            return self.vs[n - 1] + (t - self.ts[n - 1]);
        }
        let hi = self.ts.partition_point(|&x| x < t).max(1);
        let (t0, t1) = (self.ts[hi - 1], self.ts[hi]);
        let (v0, v1) = (self.vs[hi - 1], self.vs[hi]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.ts, &self.vs)
    }
}

/// Least-squares projection onto nondecreasing sequences (PAV).
fn isotonic(v: &[f64]) -> Vec<f64> {
    let mut means: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v {
        means.push((x, 1));
        while means.len() > 1 {
            let (m2, n2) = means[means.len() - 1];
            let (m1, n1) = means[means.len() - 2];
            if m1 <= m2 {
                break;
            }
            means.pop();
            means.pop();
            let n = n1 + n2;
            means.push(((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n));
        }
    }
    let mut out = Vec::with_capacity(v.len());
    for (m, n) in means {
        out.extend(std::iter::repeat(m).take(n));
    }
    out
}

// --- modulus table ---

/// Moduli sampled on a shared eps grid, the unit the CSV export and the
/// recursion drivers consume.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusTable {
    pub space: SpaceSpec,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub zeta_minus: Vec<f64>,
    pub zeta_plus: Vec<f64>,
    pub seed: u64,
}

impl ModulusTable {
    /// Builds all three moduli on `eps_grid` (subset of [0, 2]).
    pub fn build(
        space: &SpaceSpec,
        eps_grid: &[f64],
        budget: &SearchBudget,
    ) -> Result<Self, Error> {
        let delta = delta_grid(space, eps_grid, budget)?;
        let zeta_minus = zeta_minus_grid(space, eps_grid, budget)?;
        let zeta_plus = zeta_plus_grid(space, eps_grid, budget)?;
        let table = ModulusTable {
            space: *space,
            eps: eps_grid.to_vec(),
            delta,
            zeta_minus,
            zeta_plus,
            seed: budget.seed,
        };
        table.check_consistency()?;
        Ok(table)
    }

    /// Structural sanity of the estimates; violations indicate estimator
    /// bugs rather than bad inputs.
    pub fn check_consistency(&self) -> Result<(), Error> {
        const SLACK: f64 = 1e-6;
        for (i, &e) in self.eps.iter().enumerate() {
            let d = self.delta[i];
            let zm = self.zeta_minus[i];
            let zp = self.zeta_plus[i];
            if !(-SLACK..=1.0 + SLACK).contains(&d) {
                return Err(Error::BoundViolation(format!("delta({e}) = {d} outside [0, 1]")));
            }
            if zm < 1.0 - 1e-9 {
                return Err(Error::BoundViolation(format!("zeta_minus({e}) = {zm} < 1")));
            }
            if zp < zm - 2.0 * SLACK {
                return Err(Error::BoundViolation(format!(
                    "zeta_plus({e}) = {zp} < zeta_minus({e}) = {zm}"
                )));
            }
            if zp > 1.0 + e + SLACK {
                return Err(Error::BoundViolation(format!(
                    "zeta_plus({e}) = {zp} above the triangle bound 1 + {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,delta,zeta_minus,zeta_plus\n");
        for i in 0..self.eps.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::fmt_f64(self.eps[i]),
                crate::fmt_f64(self.delta[i]),
                crate::fmt_f64(self.zeta_minus[i]),
                crate::fmt_f64(self.zeta_plus[i]),
            ));
        }
        out
    }

    pub fn zeta_minus_interpolant(&self) -> Result<ZetaInterpolant, Error> {
        ZetaInterpolant::from_knots(&self.eps, &self.zeta_minus)
    }

    pub fn zeta_plus_interpolant(&self) -> Result<ZetaInterpolant, Error> {
        ZetaInterpolant::from_knots(&self.eps, &self.zeta_plus)
    }
}

/// Estimates zeta_plus on its own grid (which may exceed 2, unlike the
/// shared table grid) and rectifies it into an interpolant.
pub fn zeta_plus_interpolant(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
) -> Result<ZetaInterpolant, Error> {
    let vs = zeta_plus_grid(space, ts, budget)?;
    ZetaInterpolant::from_knots(ts, &vs)
}

pub fn zeta_minus_interpolant(
    space: &SpaceSpec,
    ts: &[f64],
    budget: &SearchBudget,
) -> Result<ZetaInterpolant, Error> {
    let vs = zeta_minus_grid(space, ts, budget)?;
    ZetaInterpolant::from_knots(ts, &vs)
}

// --- equivalence checks between the moduli ---

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceEntry {
    pub eps: f64,
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    /// mid - lower and upper - mid; both must clear -slack.
    pub lower_margin: f64,
    pub upper_margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub name: String,
    pub slack: f64,
    pub entries: Vec<EquivalenceEntry>,
    pub violations: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn build_report(
    name: &str,
    grid: &[f64],
    lower: Vec<f64>,
    mid: Vec<f64>,
    upper: Vec<f64>,
    slack: f64,
) -> EquivalenceReport {
    let mut entries = Vec::with_capacity(grid.len());
    let mut violations = 0;
    for i in 0..grid.len() {
        let e = EquivalenceEntry {
            eps: grid[i],
            lower: lower[i],
            mid: mid[i],
            upper: upper[i],
            lower_margin: mid[i] - lower[i],
            upper_margin: upper[i] - mid[i],
        };
        if e.lower_margin < -slack || e.upper_margin < -slack {
            violations += 1;
        }
        entries.push(e);
    }
    EquivalenceReport { name: name.to_string(), slack, entries, violations }
}

/// Sandwich delta(eps/2) <= zeta_minus(eps) - 1 <= delta(2 eps) on a grid
/// inside [0, 1].
pub fn check_convexity_equivalence(
    space: &SpaceSpec,
    grid: &[f64],
    budget: &SearchBudget,
    slack: f64,
) -> Result<EquivalenceReport, Error> {
    check_grid(grid, 0.0, 1.0, "convexity equivalence")?;
    let mut all: Vec<f64> = grid.iter().flat_map(|&e| [0.5 * e, 2.0 * e]).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup();
    let deltas = delta_grid(space, &all, budget)?;
    let at = |x: f64| -> f64 {
        let i = all.iter().position(|&a| a == x).unwrap();
        deltas[i]
    };
    let zm = zeta_minus_grid(space, grid, budget)?;
    let lower: Vec<f64> = grid.iter().map(|&e| at(0.5 * e)).collect();
    let mid: Vec<f64> = zm.iter().map(|z| z - 1.0).collect();
    let upper: Vec<f64> = grid.iter().map(|&e| at(2.0 * e)).collect();
    Ok(build_report("convexity", grid, lower, mid, upper, slack))
}

/// Sandwich rho(eps/4) <= zeta_plus(eps) - 1 <= rho(2 eps) on a grid inside
/// [0, 1/2].
pub fn check_smoothness_equivalence(
    space: &SpaceSpec,
    grid: &[f64],
    budget: &SearchBudget,
    slack: f64,
) -> Result<EquivalenceReport, Error> {
    check_grid(grid, 0.0, 0.5, "smoothness equivalence")?;
    let mut all: Vec<f64> = grid.iter().flat_map(|&e| [0.25 * e, 2.0 * e]).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup();
    let rhos = rho_grid(space, &all, budget)?;
    let at = |x: f64| -> f64 {
        let i = all.iter().position(|&a| a == x).unwrap();
        rhos[i]
    };
    let zp = zeta_plus_grid(space, grid, budget)?;
    let lower: Vec<f64> = grid.iter().map(|&e| at(0.25 * e)).collect();
    let mid: Vec<f64> = zp.iter().map(|z| z - 1.0).collect();
    let upper: Vec<f64> = grid.iter().map(|&e| at(2.0 * e)).collect();
    Ok(build_report("smoothness", grid, lower, mid, upper, slack))
}

// --- power-type fits delta(eps) >= C eps^q ---

fn fit_points(table: &ModulusTable) -> Vec<(f64, f64)> {
    table
        .eps
        .iter()
        .zip(&table.delta)
        .filter(|(e, d)| **e > 0.0 && **e <= 1.0 && **d > 1e-13)
        .map(|(e, d)| (*e, *d))
        .collect()
}

/// Log-space regression of delta against eps^q with q = max(p, 2) fixed:
/// C = geometric mean of delta / eps^q. Positive by construction; errors
/// out when the table has too few usable points.
pub fn fit_power_type_regression(table: &ModulusTable) -> Result<PowerTypeBoundParams, Error> {
    let q = table.space.convexity_power();
    let pts = fit_points(table);
    if pts.len() < 2 {
        return Err(Error::invalid("power-type fit needs at least 2 points with delta > 0"));
    }
    let mean: f64 =
        pts.iter().map(|(e, d)| d.ln() - q * e.ln()).sum::<f64>() / pts.len() as f64;
    PowerTypeBoundParams::new(mean.exp(), q)
}

/// Conservative pointwise floor: C = min delta / eps^q over the grid, the
/// constant to use when a bound must actually hold on the sampled range.
pub fn fit_power_type_floor(table: &ModulusTable) -> Result<PowerTypeBoundParams, Error> {
    let q = table.space.convexity_power();
    let pts = fit_points(table);
    if pts.len() < 2 {
        return Err(Error::invalid("power-type fit needs at least 2 points with delta > 0"));
    }
    let c = pts.iter().map(|(e, d)| d / e.powf(q)).fold(f64::INFINITY, f64::min);
    PowerTypeBoundParams::new(c, q)
}

#[cfg(test)]
mod tests;
