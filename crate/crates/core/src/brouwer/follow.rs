//! Path following: explicit Euler on the displacement field from the top of
//! the descent until the displacement is below tolerance.

use serde::Serialize;

use super::geom::norm;
use super::BrouwerField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FollowOptions {
    /// Arc length per step while `‖g‖` is large.
    pub step: f64,
    /// Stop once `‖f(x) − x‖₂ ≤ tol`.
    pub tol: f64,
    pub budget: u64,
    /// Cap on the Euler multiplier, in units of `h/δ`.
    pub gain: f64,
}

impl FollowOptions {
    pub fn for_field(field: &BrouwerField) -> Self {
        let p = field.params();
        FollowOptions {
            step: p.h / 4.0,
            tol: p.delta / 10.0,
            budget: 1_000_000,
            gain: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathResult {
    pub point: Vec<f64>,
    pub steps: u64,
    pub residual: f64,
}

/// Follow the field from `(0_{3m}, 2·1_m)`.
///
/// Each step moves `min(step/‖g‖, gain·h/δ)·g`, so the walk advances by
/// `step` along the path and contracts geometrically near an attracting
/// fixed point.
pub fn follow_path(field: &BrouwerField, opts: &FollowOptions) -> Result<PathResult> {
    let p = field.params();
    if !(opts.step > 0.0 && opts.step <= p.h / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "step {} must lie in (0, h/4]",
            opts.step
        )));
    }
    let cap = opts.gain * p.h / p.delta;
    let mut x = field.start_point();
    let mut best = (f64::INFINITY, x.clone());
    for steps in 0..=opts.budget {
        let g = field.displacement(&x);
        let r = norm(&g);
        if r < best.0 {
            best = (r, x.clone());
        }
        if r <= opts.tol {
            return Ok(PathResult {
                point: x,
                steps,
                residual: r,
            });
        }
        if steps == opts.budget {
            break;
        }
        let mult = (opts.step / r).min(cap);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi = (*xi + mult * gi).clamp(-1.0, 2.0);
        }
    }
    Err(Error::BudgetExhausted {
        steps: opts.budget as usize,
        residual: best.0,
        best: best.1,
    })
}
