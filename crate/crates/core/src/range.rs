//! Global range of a quadratic over `ℝⁿ` and the feasibility / Slater /
//! RICQ checks built on it.

use crate::error::{Precondition, Result};
use crate::linalg::{eigh, pinv_apply_with};
use crate::model::{dot, psd_tol, GtrsInstance, QuadRange, Quadratic};

/// Interior clearance for strict inequalities, relative to `beta − alpha`.
const STRICT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct InfResult {
    pub value: f64,
    pub attained: bool,
    pub argmin: Option<Vec<f64>>,
    /// For `value = −∞`: a direction `d` with `q(t·d) → −∞` as `t → +∞`.
    pub direction: Option<Vec<f64>>,
}

/// `inf_x q(x)`: finite exactly when `M ⪰ 0` (within the PSD tolerance) and
/// `m ∈ Range(M)`, in which case it equals `k − mᵀM⁺m` at `x = −M⁺m`.
pub fn quad_inf(q: &Quadratic) -> InfResult {
    let n = q.dim();
    if n == 0 {
        return InfResult {
            value: q.constant,
            attained: true,
            argmin: Some(Vec::new()),
            direction: None,
        };
    }
    let spec = eigh(&q.quad);
    let tol = psd_tol(q.quad.norm_inf());
    if spec.min() < -tol {
        let mut e = spec.vector(0);
        if dot(&e, &q.lin) > 0.0 {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        return InfResult {
            value: f64::NEG_INFINITY,
            attained: false,
            argmin: None,
            direction: Some(e),
        };
    }
    let pinv = pinv_apply_with(&q.quad, &spec, &q.lin);
    if !pinv.in_range {
        // Out-of-range part of m lies (numerically) in the null space.
        let mm = q.quad.mul_vec(&pinv.solution);
        let dir: Vec<f64> = mm.iter().zip(&q.lin).map(|(a, b)| a - b).collect();
        return InfResult {
            value: f64::NEG_INFINITY,
            attained: false,
            argmin: None,
            direction: Some(dir),
        };
    }
    let x: Vec<f64> = pinv.solution.iter().map(|v| -v).collect();
    InfResult {
        value: q.constant - dot(&q.lin, &pinv.solution),
        attained: true,
        argmin: Some(x),
        direction: None,
    }
}

/// `[inf q, sup q]` over `ℝⁿ`.
pub fn quad_range(q: &Quadratic) -> QuadRange {
    let lower = quad_inf(q);
    let upper = quad_inf(&q.negated());
    let (inf, sup) = if q.is_constant() {
        (q.constant, q.constant)
    } else {
        (lower.value, -upper.value)
    };
    QuadRange {
        inf,
        sup,
        inf_attained: lower.attained,
        sup_attained: upper.attained,
        argmin: lower.argmin,
        argmax: upper.argmin,
    }
}

/// A point with `q(x) ≤ target`, walking out along the descent direction
/// when the infimum is not attained.
fn point_below(q: &Quadratic, inf: &InfResult, target: f64) -> Option<Vec<f64>> {
    if let Some(x) = &inf.argmin {
        return (q.eval(x) <= target).then(|| x.clone());
    }
    let d = inf.direction.as_ref()?;
    let mut t = 1.0;
    for _ in 0..1100 {
        let x: Vec<f64> = d.iter().map(|v| t * v).collect();
        if q.eval(&x) <= target {
            return Some(x);
        }
        t *= 2.0;
        if !t.is_finite() {
            break;
        }
    }
    None
}

/// Solves `q(x) = target` on the segment from `lo` (`q ≤ target`) to `hi`
/// (`q ≥ target`).
fn root_on_segment(q: &Quadratic, lo: &[f64], hi: &[f64], target: f64) -> Vec<f64> {
    let d: Vec<f64> = hi.iter().zip(lo).map(|(a, b)| a - b).collect();
    let (p, qq, r) = q.along_line(lo, &d);
    let r = r - target;
    let at = |s: f64| -> Vec<f64> { lo.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
    let g = |s: f64| p * s * s + qq * s + r;
    // Closed form first, then a bisection safeguard.
    let mut candidates = Vec::new();
    if p.abs() > 1e-300 {
        let disc = qq * qq - 4.0 * p * r;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let t = -0.5 * (qq + qq.signum() * sq);
            if t != 0.0 {
                candidates.push(t / p);
                candidates.push(r / t);
            } else {
                candidates.push(0.0);
            }
        }
    } else if qq != 0.0 {
        candidates.push(-r / qq);
    }
    let mut best: Option<f64> = None;
    for s in candidates {
        if (-1e-12..=1.0 + 1e-12).contains(&s) {
            let s = s.clamp(0.0, 1.0);
            if best.is_none_or(|b| g(s).abs() < g(b).abs()) {
                best = Some(s);
            }
        }
    }
    if let Some(s) = best {
        if g(s).abs() <= 1e-12 * (1.0 + target.abs()) {
            return at(s);
        }
    }
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if g(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    at(0.5 * (a + b))
}

/// A point with `q(x) = target` for `target` in the closed range of `q`.
pub fn point_with_value(q: &Quadratic, target: f64) -> Option<Vec<f64>> {
    if q.is_constant() {
        return (q.constant == target).then(|| vec![0.0; q.dim()]);
    }
    let lower = quad_inf(q);
    let neg = q.negated();
    let upper = quad_inf(&neg);
    let lo = point_below(q, &lower, target)?;
    let hi = point_below(&neg, &upper, -target)?;
    Some(root_on_segment(q, &lo, &hi, target))
}

/// Picks a value strictly inside `[lower, upper]`, which may be unbounded.
fn interior_target(lower: f64, upper: f64) -> f64 {
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower + lower.abs().max(1.0),
        (false, true) => upper - upper.abs().max(1.0),
        (false, false) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlaterCheck {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
    /// A finite endpoint of the range of `h` lies within the strictness
    /// margin of `alpha` or `beta`; strict comparisons there are unreliable.
    pub boundary_ambiguous: bool,
}

fn strict_margin(alpha: f64, beta: f64) -> f64 {
    if alpha.is_finite() && beta.is_finite() {
        STRICT_MARGIN * (beta - alpha)
    } else {
        let fin = if alpha.is_finite() {
            alpha
        } else if beta.is_finite() {
            beta
        } else {
            0.0
        };
        STRICT_MARGIN * (1.0 + fin.abs())
    }
}

/// Whether the range endpoints of `h` sit within the strictness band of a
/// bound.
pub fn boundary_ambiguous(range: &QuadRange, alpha: f64, beta: f64) -> bool {
    let margin = strict_margin(alpha, beta);
    [range.inf, range.sup]
        .iter()
        .filter(|e| e.is_finite())
        .any(|&e| {
            [alpha, beta]
                .iter()
                .filter(|b| b.is_finite())
                .any(|&b| (e - b).abs() <= margin)
        })
}

/// Existence of `x̄` with `alpha < h(x̄) < beta`, checked at the witness in
/// evaluated arithmetic.
pub fn check_interval_slater(inst: &GtrsInstance) -> Result<SlaterCheck> {
    if !(inst.alpha < inst.beta) {
        return Err(Precondition::StrictBounds.into());
    }
    let h = &inst.h;
    let (alpha, beta) = (inst.alpha, inst.beta);
    if h.is_constant() {
        let d = h.constant;
        let holds = alpha < d && d < beta;
        let margin = strict_margin(alpha, beta);
        return Ok(SlaterCheck {
            holds,
            witness: holds.then(|| vec![0.0; h.dim()]),
            boundary_ambiguous: (d - alpha).abs() <= margin || (d - beta).abs() <= margin,
        });
    }
    let range = quad_range(h);
    let holds = range.inf < beta && range.sup > alpha;
    let witness = if holds {
        let target = interior_target(alpha.max(range.inf), beta.min(range.sup));
        point_with_value(h, target).filter(|w| {
            let v = h.eval(w);
            alpha < v && v < beta
        })
    } else {
        None
    };
    Ok(SlaterCheck {
        holds: witness.is_some(),
        witness,
        boundary_ambiguous: boundary_ambiguous(&range, alpha, beta),
    })
}

/// Two-sided Slater for `h = level`: `inf h < level < sup h`.
pub fn check_equality_slater(h: &Quadratic, level: f64) -> bool {
    let r = quad_range(h);
    r.inf < level && level < r.sup
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityCheck {
    pub feasible: bool,
    pub point: Option<Vec<f64>>,
}

/// Whether `[alpha, beta]` meets the range of `h`. Finite endpoints of the
/// range of a quadratic are always attained.
pub fn check_feasible(inst: &GtrsInstance) -> FeasibilityCheck {
    let h = &inst.h;
    let (alpha, beta) = (inst.alpha, inst.beta);
    if h.is_constant() {
        let feasible = alpha <= h.constant && h.constant <= beta;
        return FeasibilityCheck {
            feasible,
            point: feasible.then(|| vec![0.0; h.dim()]),
        };
    }
    let range = quad_range(h);
    if !(range.inf <= beta && range.sup >= alpha) {
        return FeasibilityCheck {
            feasible: false,
            point: None,
        };
    }
    let lower = alpha.max(range.inf);
    let upper = beta.min(range.sup);
    let point = if lower == upper {
        if lower == range.inf {
            range.argmin.clone()
        } else if upper == range.sup {
            range.argmax.clone()
        } else {
            point_with_value(h, lower)
        }
    } else {
        point_with_value(h, interior_target(lower, upper))
    };
    FeasibilityCheck {
        feasible: true,
        point,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicqWitness {
    pub holds: bool,
    pub x_hat: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
}

/// Largest dyadic `ε ≤ 1`, down to the least positive double, with
/// `alpha < h(x̂) + ε·trace(B) < beta`,
/// i.e. `X̂ = x̂x̂ᵀ + εI` satisfies the relaxed constraint strictly.
pub fn ricq_epsilon(inst: &GtrsInstance, x_hat: &[f64]) -> Option<f64> {
    let hv = inst.h.eval(x_hat);
    let tr = inst.h.quad.trace();
    std::iter::successors(Some(1.0_f64), |e| Some(e * 0.5))
        .take_while(|e| *e > 0.0)
        .find(|&eps| {
            let lifted = hv + eps * tr;
            inst.alpha < lifted && lifted < inst.beta
        })
}

/// The relative-interior constraint qualification, witnessed through the
/// interval Slater point.
pub fn ricq_witness(inst: &GtrsInstance) -> Result<RicqWitness> {
    let slater = check_interval_slater(inst)?;
    let Some(x_hat) = slater.witness.filter(|_| slater.holds) else {
        return Ok(RicqWitness {
            holds: false,
            x_hat: None,
            epsilon: None,
        });
    };
    let epsilon = ricq_epsilon(inst, &x_hat);
    Ok(RicqWitness {
        holds: epsilon.is_some(),
        x_hat: Some(x_hat),
        epsilon,
    })
}
