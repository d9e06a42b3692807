//! Primal recovery from an optimal dual multiplier, including the hard case.

use serde::{Deserialize, Serialize};

use crate::error::{Precondition, Result};
use crate::linalg::{congruence, eigh, pinv_apply_with, Mat};
use crate::model::{ext_f64, psd_tol, DualResult, DualStatus, GtrsInstance};

/// Multipliers with `|μ| ≤ EPS_MU` leave the constraint inactive.
pub const EPS_MU: f64 = 1e-10;
pub const FEAS_TOL: f64 = 1e-8;
const GAP_LOWER: f64 = 1e-8;
const GAP_UPPER_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    LowerBound,
    UpperBound,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub x_star: Option<Vec<f64>>,
    /// `f(x*) − dual value`, `+∞` when no point was recovered.
    #[serde(with = "ext_f64")]
    pub gap: f64,
    pub target: Target,
    pub diagnostic: Option<String>,
}

/// Root of `p t² + q t + r = 0` with the smallest `|t|`, positive on ties.
fn smallest_root(p: f64, q: f64, r: f64) -> Option<f64> {
    let scale = p.abs().max(q.abs()).max(r.abs());
    if scale == 0.0 {
        return Some(0.0);
    }
    if p.abs() <= 1e-14 * scale {
        if q.abs() <= 1e-14 * scale {
            return None;
        }
        return Some(-r / q);
    }
    let disc = q * q - 4.0 * p * r;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let roots = if q == 0.0 {
        let t = (-r / p).max(0.0).sqrt();
        [t, -t]
    } else {
        let w = -0.5 * (q + q.signum() * sq);
        [w / p, r / w]
    };
    roots
        .into_iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()).then_with(|| b.total_cmp(a)))
}

/// Recovers `x*` with `f(x*) = g(μ*)` from the complementarity conditions.
pub fn recover(inst: &GtrsInstance, dual: &DualResult) -> Result<Recovery> {
    let (DualStatus::Optimal, Some(mu)) = (dual.status, dual.mu_star) else {
        return Err(Precondition::DualNotOptimal.into());
    };
    let value = dual.value;
    let pencil = inst.f.quad.add_scaled(&inst.h.quad, mu);
    let spec = eigh(&pencil);
    let v: Vec<f64> = inst
        .f
        .lin
        .iter()
        .zip(&inst.h.lin)
        .map(|(a, b)| a + mu * b)
        .collect();
    let x_hat: Vec<f64> = pinv_apply_with(&pencil, &spec, &v)
        .solution
        .iter()
        .map(|s| -s)
        .collect();

    let target = if mu > EPS_MU {
        Target::UpperBound
    } else if mu < -EPS_MU {
        Target::LowerBound
    } else {
        Target::Interior
    };
    let accept = |x: &[f64]| -> Option<f64> {
        let hx = inst.h.eval(x);
        if !(hx >= inst.alpha - FEAS_TOL && hx <= inst.beta + FEAS_TOL) {
            return None;
        }
        let gap = inst.f.eval(x) - value;
        (gap >= -GAP_LOWER && gap <= GAP_UPPER_RTOL * (1.0 + value.abs())).then_some(gap)
    };
    let done = |x: Vec<f64>, gap: f64| Recovery {
        x_star: Some(x),
        gap,
        target,
        diagnostic: None,
    };

    let hx = inst.h.eval(&x_hat);
    let level = match target {
        Target::UpperBound => inst.beta,
        Target::LowerBound => inst.alpha,
        Target::Interior => hx.clamp(inst.alpha, inst.beta),
    };
    let hits = (hx - level).abs() <= FEAS_TOL;
    if hits {
        if let Some(gap) = accept(&x_hat) {
            return Ok(done(x_hat, gap));
        }
    }

    let tol = psd_tol(pencil.norm_inf());
    let null = spec.null_vectors(tol);
    if !null.is_empty() && level.is_finite() {
        // Directions that diagonalize B on the null space of the pencil.
        let z = Mat::from_columns(inst.dim(), &null);
        let rot = eigh(&congruence(&inst.h.quad, &z));
        for k in 0..rot.order() {
            let d = z.mul_vec(&rot.vector(k));
            let (p, q, r) = inst.h.along_line(&x_hat, &d);
            let Some(t) = smallest_root(p, q, r - level) else {
                continue;
            };
            let x: Vec<f64> = x_hat.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if let Some(gap) = accept(&x) {
                return Ok(done(x, gap));
            }
        }
    }

    let diagnostic = if null.is_empty() && target == Target::Interior {
        format!("numerical failure: h(x̂) = {hx} lies outside the band at an inactive multiplier")
    } else if hits {
        format!(
            "duality gap at x̂ exceeds tolerance (f = {}, dual = {value})",
            inst.f.eval(&x_hat)
        )
    } else {
        format!("no null-space correction reaches h = {level} (h(x̂) = {hx})")
    };
    Ok(Recovery {
        x_star: None,
        gap: f64::INFINITY,
        target,
        diagnostic: Some(diagnostic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::maximize_dual;
    use crate::model::{Quadratic, SymMatrix};

    fn q1(m: f64, lin: f64, k: f64) -> Quadratic {
        Quadratic::new(SymMatrix::diag(&[m]), vec![lin], k).unwrap()
    }

    #[test]
    fn root_selection() {
        assert_eq!(smallest_root(1.0, 0.0, -4.0), Some(2.0));
        assert_eq!(smallest_root(1.0, -3.0, 2.0), Some(1.0));
        assert_eq!(smallest_root(0.0, 2.0, -1.0), Some(0.5));
        assert_eq!(smallest_root(0.0, 0.0, 1.0), None);
        assert_eq!(smallest_root(1.0, 0.0, 1.0), None);
    }

    #[test]
    fn e1_hard_case() {
        let inst = GtrsInstance::new(q1(-1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        let dual = maximize_dual(&inst);
        let r = recover(&inst, &dual).unwrap();
        assert_eq!(r.target, Target::UpperBound);
        let x = r.x_star.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-8);
        assert!((inst.f.eval(&x) + 4.0).abs() < 1e-8);
        assert!(r.gap.abs() < 1e-8);
    }

    #[test]
    fn e3_hard_case() {
        let f = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], -1.0).unwrap();
        let h = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, 1.0, 4.0).unwrap();
        let r = recover(&inst, &maximize_dual(&inst)).unwrap();
        assert_eq!(r.target, Target::LowerBound);
        let x = r.x_star.unwrap();
        assert!((inst.h.eval(&x) - 1.0).abs() < 1e-8);
        assert!(inst.f.eval(&x).abs() < 1e-8);
    }

    #[test]
    fn interior_example() {
        let inst = GtrsInstance::new(q1(1.0, -3.0, 9.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        let r = recover(&inst, &maximize_dual(&inst)).unwrap();
        assert_eq!(r.target, Target::UpperBound);
        let x = r.x_star.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!(r.gap.abs() < 1e-12);
    }

    #[test]
    fn inactive_constraint() {
        // f = (x−2)², h = x² ∈ [1, 9]: the unconstrained minimizer is feasible.
        let inst = GtrsInstance::new(q1(1.0, -2.0, 4.0), q1(1.0, 0.0, 0.0), 1.0, 9.0).unwrap();
        let r = recover(&inst, &maximize_dual(&inst)).unwrap();
        assert_eq!(r.target, Target::Interior);
        assert!((r.x_star.unwrap()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn requires_optimal_dual() {
        let inst = GtrsInstance::new(q1(-1.0, 0.0, 0.5), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap();
        assert!(recover(&inst, &maximize_dual(&inst)).is_err());
    }
}
