//! Radius sequences generated by the hypotenuse moduli.
//!
//! Two recursions, both solved step by step with bisection:
//!
//! * shrinking radii r_1 = 1, r_{j+1} * zeta_minus(r_{j+1}) = r_j, used by
//!   the Helly-type search engines (the j-th radius bounds how far a greedy
//!   intersection point can be pushed);
//! * growing radii R_1 = 1, R_{j+1} / zeta_plus(1/(R_{j+1} - 1)) = R_j,
//!   which bound the partial sums of the greedy Caratheodory walk.
//!
//! The drivers only assume a monotone zeta with zeta(0) = 1; sources can be
//! the Euclidean closed form sqrt(1 + t^2) or a rectified estimated table.

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    #[serde(rename = "helly_r")]
    HellyR,
    #[serde(rename = "caratheodory_R")]
    CaratheodoryR,
}

/// Where the driving zeta values came from; recorded for provenance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaSource {
    EuclideanClosedForm,
    EstimatedTable,
    Custom,
}

/// A frozen prefix of a radius sequence; `values[j]` is the radius for
/// k = j + 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusSequence {
    pub values: Vec<f64>,
    pub kind: SequenceKind,
    pub zeta_source: ZetaSource,
    pub root_tol: f64,
}

impl RadiusSequence {
    /// Radius for a 1-based index k.
    pub fn value(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        self.values.get(k - 1).copied()
    }

    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    /// CSV export. The bound column is the power-type envelope for the
    /// shrinking sequence; for the growing sequence it is the a priori cap
    /// R_k <= k that follows from zeta_plus(t) <= 1 + t.
    pub fn to_csv(&self, params: Option<&PowerTypeBoundParams>) -> String {
        let (value_col, mut out) = match self.kind {
            SequenceKind::HellyR => ("r_k", String::new()),
            SequenceKind::CaratheodoryR => ("R_k", String::new()),
        };
        out.push_str(&format!("k,{},bound\n", value_col));
        for (j, v) in self.values.iter().enumerate() {
            let k = j + 1;
            let bound = match (self.kind, params) {
                (SequenceKind::HellyR, Some(p)) => p.bound(k),
                (SequenceKind::HellyR, None) => 1.0,
                (SequenceKind::CaratheodoryR, _) => k as f64,
            };
            out.push_str(&format!(
                "{},{},{}\n",
                k,
                crate::fmt_f64(*v),
                crate::fmt_f64(bound)
            ));
        }
        out
    }
}

/// Parameters of a power-type lower bound delta(eps) >= C_X eps^q, together
/// with the envelope constant they induce for the shrinking radii.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PowerTypeBoundParams {
    pub c_x: f64,
    pub q: f64,
}

impl PowerTypeBoundParams {
    pub fn new(c_x: f64, q: f64) -> Result<Self, Error> {
        if !(c_x > 0.0) || !c_x.is_finite() {
            return Err(Error::invalid("power-type constant must be positive"));
        }
        if !(q >= 2.0) || !q.is_finite() {
            return Err(Error::invalid("power-type exponent must be >= 2"));
        }
        Ok(PowerTypeBoundParams { c_x, q })
    }

    /// Euclidean calibration: C_X = sqrt(2) - 1 with q = 2, the constant for
    /// which the envelope becomes 2 (sqrt(2) + 1)^(1/2) < 4.
    pub fn euclidean() -> Self {
        PowerTypeBoundParams { c_x: std::f64::consts::SQRT_2 - 1.0, q: 2.0 }
    }

    /// Envelope constant max(1, 2 (2 / (q C_X))^(1/q)).
    pub fn c_tilde(&self) -> f64 {
        1f64.max(2.0 * (2.0 / (self.q * self.c_x)).powf(1.0 / self.q))
    }

    /// Envelope value C~ * k^(-1/q) for a 1-based k.
    pub fn bound(&self, k: usize) -> f64 {
        self.c_tilde() * (k as f64).powf(-1.0 / self.q)
    }
}

/// Euclidean hypotenuse modulus: both zeta_minus and zeta_plus collapse to
/// sqrt(1 + t^2).
pub fn euclidean_zeta(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

const PROBE_SLACK: f64 = 1e-6;

/// Bisection on [lo, hi] for f with f(lo) <= 0 <= f(hi). Runs to floating
/// point resolution (or width <= tol if that is coarser than resolution).
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, Error> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f = [{flo:.3e}, {fhi:.3e}]"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol * 1e-4 {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Incremental solver for either recursion; values extend lazily.
pub struct RadiusCache<F> {
    zeta: F,
    kind: SequenceKind,
    source: ZetaSource,
    root_tol: f64,
    values: Vec<f64>,
}

impl<F: Fn(f64) -> f64> RadiusCache<F> {
    /// Shrinking sequence driven by zeta_minus. The probe grid checks
    /// zeta(0) = 1 and monotonicity before any root is solved.
    pub fn helly(zeta: F, root_tol: f64, source: ZetaSource) -> Result<Self, Error> {
        check_root_tol(root_tol)?;
        probe_zeta(&zeta, 1.0, false)?;
        Ok(RadiusCache { zeta, kind: SequenceKind::HellyR, source, root_tol, values: vec![1.0] })
    }

    /// Growing sequence driven by zeta_plus; additionally requires the
    /// triangle envelope max(1, t - 1) <= zeta(t) <= 1 + t on the probe
    /// grid, which the recursion's bracketing depends on.
    pub fn caratheodory(zeta: F, root_tol: f64, source: ZetaSource) -> Result<Self, Error> {
        check_root_tol(root_tol)?;
        probe_zeta(&zeta, 4.0, true)?;
        Ok(RadiusCache {
            zeta,
            kind: SequenceKind::CaratheodoryR,
            source,
            root_tol,
            values: vec![1.0],
        })
    }

    /// Radius for 1-based k, solving any missing prefix steps.
    pub fn value(&mut self, k: usize) -> Result<f64, Error> {
        if k == 0 {
            return Err(Error::invalid("radius index k starts at 1"));
        }
        while self.values.len() < k {
            let prev = *self.values.last().unwrap();
            let next = match self.kind {
                SequenceKind::HellyR => self.next_helly(prev)?,
                SequenceKind::CaratheodoryR => self.next_caratheodory(prev)?,
            };
            self.values.push(next);
        }
        Ok(self.values[k - 1])
    }

    fn next_helly(&self, prev: f64) -> Result<f64, Error> {
        // t * zeta(t) - prev changes sign on [0, prev] since zeta >= 1.
        let z = &self.zeta;
        bisect(|t| t * z(t) - prev, 0.0, prev, self.root_tol)
    }

    fn next_caratheodory(&self, prev: f64) -> Result<f64, Error> {
        let z = &self.zeta;
        let g = |r: f64| r / z(1.0 / (r - 1.0)) - prev;
        bisect(g, 1.0 + self.root_tol, prev + 1.0, self.root_tol)
    }

    /// Freezes the first `k_max` values into an exportable sequence.
    pub fn freeze(mut self, k_max: usize) -> Result<RadiusSequence, Error> {
        if k_max == 0 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        self.value(k_max)?;
        self.values.truncate(k_max);
        Ok(RadiusSequence {
            values: self.values,
            kind: self.kind,
            zeta_source: self.source,
            root_tol: self.root_tol,
        })
    }
}

fn check_root_tol(root_tol: f64) -> Result<(), Error> {
    if !(root_tol > 0.0) || root_tol > 1e-3 {
        return Err(Error::invalid("root_tol must lie in (0, 1e-3]"));
    }
    Ok(())
}

/// Rejects zeta functions that cannot drive a recursion: zeta(0) must be 1
/// and zeta nondecreasing on the probe grid; for the growing recursion the
/// envelope max(1, t - 1) <= zeta(t) <= 1 + t is also required.
fn probe_zeta(zeta: &impl Fn(f64) -> f64, t_max: f64, envelope: bool) -> Result<(), Error> {
    let z0 = zeta(0.0);
    if (z0 - 1.0).abs() > PROBE_SLACK {
        return Err(Error::invalid(format!("zeta(0) = {z0}, expected 1")));
    }
    let n = 64;
    let mut prev = z0;
    for i in 1..=n {
        let t = t_max * i as f64 / n as f64;
        let zt = zeta(t);
        if zt < prev - PROBE_SLACK {
            return Err(Error::invalid(format!(
                "zeta must be nondecreasing: zeta({t}) = {zt} < {prev}"
            )));
        }
        if envelope && (zt > 1.0 + t + PROBE_SLACK || zt < 1f64.max(t - 1.0) - PROBE_SLACK) {
            return Err(Error::invalid(format!(
                "zeta_plus({t}) = {zt} escapes the triangle envelope [max(1, t-1), 1+t]"
            )));
        }
        prev = prev.max(zt);
    }
    // Probe the large-argument floor the growing recursion's bracket needs.
    if envelope {
        let big = 1e9;
        if zeta(big) < big - 1.0 - big * PROBE_SLACK {
            return Err(Error::invalid(
                "zeta_plus must dominate t - 1 for large t".to_string(),
            ));
        }
    }
    Ok(())
}

/// Shrinking radii r_1..r_{k_max} for a zeta_minus function.
pub fn helly_radii(
    zeta: impl Fn(f64) -> f64,
    k_max: usize,
    root_tol: f64,
    source: ZetaSource,
) -> Result<RadiusSequence, Error> {
    RadiusCache::helly(zeta, root_tol, source)?.freeze(k_max)
}

/// Growing radii R_1..R_{k_max} for a zeta_plus function.
pub fn caratheodory_radii(
    zeta: impl Fn(f64) -> f64,
    k_max: usize,
    root_tol: f64,
    source: ZetaSource,
) -> Result<RadiusSequence, Error> {
    RadiusCache::caratheodory(zeta, root_tol, source)?.freeze(k_max)
}
