//! Cell-average-preserving scaling limiters.
//!
//! On each element `ṽ = v̄ + θ (v - v̄)` with the largest `θ ∈ [0, 1]` that
//! puts every Gauss–Lobatto node inside the bounds.

use rayon::prelude::*;

use crate::dg::DgField;
use crate::error::{Error, Result};

/// Admissible nodal range `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    /// `[0, 1]`.
    pub const UNIT: Bounds = Bounds { lower: 0.0, upper: 1.0 };
    /// `[0, ∞)`.
    pub const NON_NEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LimiterReport {
    pub thetas: Vec<f64>,
    /// Elements with `θ < 1`.
    pub limited: usize,
    /// Largest distance of a nodal value outside the bounds before limiting.
    pub max_violation: f64,
    /// Elements flattened to their average because `θ` was ill-defined.
    pub flattened: usize,
}

impl LimiterReport {
    pub fn theta_min(&self) -> f64 {
        self.thetas.iter().copied().fold(1.0, f64::min)
    }

    /// Share of elements left untouched.
    pub fn unlimited_fraction(&self) -> f64 {
        if self.thetas.is_empty() {
            return 1.0;
        }
        1.0 - self.limited as f64 / self.thetas.len() as f64
    }
}

const TINY: f64 = 1e-300;

struct ElementOutcome {
    theta: f64,
    violation: f64,
    flattened: bool,
}

fn limit_element(v: &mut [f64], avg: f64, b: Bounds) -> ElementOutcome {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let violation = (b.lower - lo).max(hi - b.upper).max(0.0);
    let mut flattened = false;
    let mut ratio = |outside: bool, num: f64, den: f64| -> f64 {
        if !outside {
            1.0
        } else if den < TINY {
            flattened = true;
            0.0
        } else {
            num / den
        }
    };
    let theta_lo = ratio(lo < b.lower, avg - b.lower, avg - lo);
    let theta_hi = ratio(hi > b.upper, b.upper - avg, hi - avg);
    let theta = theta_lo.min(theta_hi).clamp(0.0, 1.0);
    if theta < 1.0 {
        for x in v.iter_mut() {
            let y = avg + theta * (*x - avg);
            // rounding residue at the bound snaps onto it
            let tol = 4.0 * f64::EPSILON * (avg.abs() + (*x - avg).abs());
            *x = if (y - b.lower).abs() <= tol {
                b.lower
            } else if (y - b.upper).abs() <= tol {
                b.upper
            } else {
                y.clamp(b.lower, b.upper)
            };
        }
    }
    ElementOutcome {
        theta,
        violation,
        flattened,
    }
}

/// Scaling limiter toward `bounds`; cell averages must lie inside
/// (strictly, when `strict` is set).
pub fn scale_limit(field: &DgField, bounds: Bounds, strict: bool) -> Result<(DgField, LimiterReport)> {
    let averages = field.cell_averages();
    for (e, &a) in averages.iter().enumerate() {
        let ok = if strict {
            a > bounds.lower && a < bounds.upper
        } else {
            a >= bounds.lower && a <= bounds.upper
        };
        if !ok || !a.is_finite() {
            return Err(Error::BoundViolation(format!(
                "cell average {a} of element {e} outside [{}, {}]",
                bounds.lower, bounds.upper
            )));
        }
    }
    let mut out = field.clone();
    let n_loc = field.space().local_dofs();
    let outcomes: Vec<ElementOutcome> = out
        .values_mut()
        .par_chunks_mut(n_loc)
        .zip(averages.par_iter())
        .map(|(v, &a)| limit_element(v, a, bounds))
        .collect();
    let report = LimiterReport {
        limited: outcomes.iter().filter(|o| o.theta < 1.0).count(),
        max_violation: outcomes.iter().map(|o| o.violation).fold(0.0, f64::max),
        flattened: outcomes.iter().filter(|o| o.flattened).count(),
        thetas: outcomes.into_iter().map(|o| o.theta).collect(),
    };
    Ok((out, report))
}

/// Enforces `0 ≤ u ≤ 1`; every cell average must lie in `(0, 1)`.
pub fn limit_u(u: &DgField) -> Result<(DgField, LimiterReport)> {
    scale_limit(u, Bounds::UNIT, true)
}

/// Enforces `u ≥ 0` with positive cell averages.
pub fn limit_positive(u: &DgField) -> Result<(DgField, LimiterReport)> {
    scale_limit(u, Bounds::NON_NEGATIVE, true)
}

/// Enforces `c ≥ 0`; cell averages must be non-negative.
pub fn limit_c(c: &DgField) -> Result<(DgField, LimiterReport)> {
    scale_limit(c, Bounds::NON_NEGATIVE, false)
}
