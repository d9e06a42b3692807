//! The Lagrangian dual as a univariate concave maximization over the PSD
//! interval of the pencil `A + μB`.
//!
//! Sign convention: positive `μ` prices the upper bound `beta`, negative `μ`
//! the lower bound `alpha`, and
//!
//! ```text
//! g(μ) = c + μd − μ₊β + μ₋α − (a+μb)ᵀ(A+μB)⁺(a+μb)
//! ```
//!
//! whenever `A + μB ⪰ 0` and `a + μb ∈ Range(A + μB)`, `−∞` otherwise.

use crate::linalg::{
    eigh, maximize_concave, maximize_min_eig_affine, min_eig, pinv_apply_with, Mat, MU_CAP,
};
use crate::model::{
    dot, norm_inf_vec, psd_tol, DualResult, DualStatus, GtrsInstance, MuInterval, SymMatrix,
};

/// Final golden-section bracket width, relative to `1 + |μ|`.
const DUAL_MU_TOL: f64 = 1e-12;

/// The PSD interval of a pencil, with the common null space of `A` and `B`
/// that was split off before the endpoint search.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilInterval {
    pub interval: Option<MuInterval>,
    /// Orthonormal vectors `z` with `Az = Bz = 0`.
    pub common_null: Vec<Vec<f64>>,
    /// An endpoint search ran into the `|μ| ≤ 1e12` cap.
    pub capped: bool,
}

fn null_of(m: &SymMatrix) -> Vec<Vec<f64>> {
    eigh(m).null_vectors(psd_tol(m.norm_inf()))
}

/// Orthonormal vectors spanning `null(A) ∩ null(B)`.
pub fn common_null_space(a: &SymMatrix, b: &SymMatrix) -> Vec<Vec<f64>> {
    let za = null_of(a);
    if za.is_empty() {
        return Vec::new();
    }
    let z = Mat::from_columns(a.order(), &za);
    let c = crate::linalg::congruence(b, &z);
    let tol_a = psd_tol(a.norm_inf());
    let tol_b = psd_tol(b.norm_inf());
    null_of(&c)
        .into_iter()
        .map(|w| z.mul_vec(&w))
        .filter(|v| norm_inf_vec(&a.mul_vec(v)) <= tol_a && norm_inf_vec(&b.mul_vec(v)) <= tol_b)
        .collect()
}

/// Orthonormal basis of the orthogonal complement of `span(z)`.
fn complement(n: usize, z: &[Vec<f64>]) -> Mat {
    let proj = SymMatrix::from_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - z.iter().map(|v| v[i] * v[j]).sum::<f64>()
    });
    let spec = eigh(&proj);
    let cols: Vec<Vec<f64>> = (0..n)
        .filter(|&k| spec.eigenvalues[k] > 0.5)
        .map(|k| spec.vector(k))
        .collect();
    Mat::from_columns(n, &cols)
}

/// `{μ : λ_min(A + μB) ≥ −εpsd·(1+‖A+μB‖_∞)}`, with the common null space of
/// the pencil removed first.
pub fn pencil_interval(a: &SymMatrix, b: &SymMatrix) -> PencilInterval {
    let n = a.order();
    let common_null = common_null_space(a, b);
    let (ar, br) = if common_null.is_empty() {
        (a.clone(), b.clone())
    } else {
        let w = complement(n, &common_null);
        (
            crate::linalg::congruence(a, &w),
            crate::linalg::congruence(b, &w),
        )
    };
    if ar.order() == 0 {
        return PencilInterval {
            interval: Some(MuInterval::REAL_LINE),
            common_null,
            capped: false,
        };
    }
    let best = maximize_min_eig_affine(&ar, &br, MuInterval::REAL_LINE);
    let tol_at = |mu: f64| psd_tol(ar.add_scaled(&br, mu).norm_inf());
    if best.min_eig_best < -tol_at(best.mu_best) {
        return PencilInterval {
            interval: None,
            common_null,
            capped: best.capped,
        };
    }
    let center = best.mu_best;
    if best.min_eig_best < 0.0 {
        return PencilInterval {
            interval: Some(MuInterval::new(center, center)),
            common_null,
            capped: best.capped,
        };
    }
    let spec_b = eigh(&br);
    let tol_b = psd_tol(br.norm_inf());
    let feasible = |mu: f64| min_eig(&ar.add_scaled(&br, mu)) >= 0.0;
    let mut capped = false;
    let mut endpoint = |dir: f64, unbounded: bool| -> f64 {
        if unbounded {
            return dir * f64::INFINITY;
        }
        let mut step = 1.0_f64.max(center.abs());
        let mut outer = center + dir * step;
        while feasible(outer) {
            if outer.abs() >= MU_CAP {
                capped = true;
                return dir * f64::INFINITY;
            }
            step *= 2.0;
            outer = center + dir * step;
        }
        let mut inner = center;
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if mid == inner || mid == outer {
                break;
            }
            if feasible(mid) {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        inner
    };
    let lo = endpoint(-1.0, spec_b.max() <= tol_b);
    let hi = endpoint(1.0, spec_b.min() >= -tol_b);
    PencilInterval {
        interval: Some(MuInterval::new(lo, hi)),
        common_null,
        capped,
    }
}

/// PSD interval of `A + μB`; `None` when empty.
pub fn psd_interval(a: &SymMatrix, b: &SymMatrix) -> Option<MuInterval> {
    pencil_interval(a, b).interval
}

/// The multiplier domain allowed by the bounds: `μ ≥ 0` without a lower
/// bound, `μ ≤ 0` without an upper bound.
pub fn multiplier_domain(inst: &GtrsInstance) -> MuInterval {
    MuInterval::new(
        if inst.alpha.is_finite() {
            f64::NEG_INFINITY
        } else {
            0.0
        },
        if inst.beta.is_finite() {
            f64::INFINITY
        } else {
            0.0
        },
    )
}

/// `c + μd − μ₊β + μ₋α`.
pub fn dual_constant(inst: &GtrsInstance, mu: f64) -> f64 {
    let mut k = inst.f.constant + mu * inst.h.constant;
    if mu > 0.0 {
        k -= mu * inst.beta;
    } else if mu < 0.0 {
        k -= mu * inst.alpha;
    }
    k
}

/// The dual function `g(μ)`.
pub fn dual_value(inst: &GtrsInstance, mu: f64) -> f64 {
    let k = dual_constant(inst, mu);
    if k.is_nan() || k == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let pencil = inst.f.quad.add_scaled(&inst.h.quad, mu);
    let spec = eigh(&pencil);
    if spec.min() < -psd_tol(pencil.norm_inf()) {
        return f64::NEG_INFINITY;
    }
    let v: Vec<f64> = inst
        .f
        .lin
        .iter()
        .zip(&inst.h.lin)
        .map(|(a, b)| a + mu * b)
        .collect();
    let sol = pinv_apply_with(&pencil, &spec, &v);
    if !sol.in_range {
        return f64::NEG_INFINITY;
    }
    k - dot(&v, &sol.solution)
}

/// The `(n+1)`-order block matrix `[[A+μB, a+μb], [·, g₀(μ) − level]]` whose
/// PSD-ness at `μ` certifies `inf f ≥ level` over the band.
pub fn lagrangian_matrix(inst: &GtrsInstance, mu: f64, level: f64) -> SymMatrix {
    let n = inst.dim();
    let pencil = inst.f.quad.add_scaled(&inst.h.quad, mu);
    let k = dual_constant(inst, mu) - level;
    SymMatrix::from_fn(n + 1, |i, j| match (i < n, j < n) {
        (true, true) => pencil.get(i, j),
        (true, false) => inst.f.lin[i] + mu * inst.h.lin[i],
        (false, true) => inst.f.lin[j] + mu * inst.h.lin[j],
        (false, false) => k,
    })
}

/// The two affine families `M₀ + μM₊` (`μ ≥ 0`) and `M₀ + μM₋` (`μ ≤ 0`) of
/// the Lagrangian matrix at level `level`.
pub fn lagrangian_branches(inst: &GtrsInstance, level: f64) -> (SymMatrix, SymMatrix, SymMatrix) {
    let m0 = inst.f.shifted(level).homogenized();
    let h = &inst.h;
    let branch = |bound: f64| {
        h.shifted(if bound.is_finite() { bound } else { h.constant })
            .homogenized()
    };
    (m0, branch(inst.beta), branch(inst.alpha))
}

/// Envelope slope `h(x̂(μ)) − bound` at a positive definite pencil, where
/// `bound` is `beta` for `μ > 0` and `alpha` for `μ < 0`.
fn slope(inst: &GtrsInstance, mu: f64) -> Option<f64> {
    let pencil = inst.f.quad.add_scaled(&inst.h.quad, mu);
    let spec = eigh(&pencil);
    if spec.min() <= psd_tol(pencil.norm_inf()) {
        return None;
    }
    let v: Vec<f64> = inst
        .f
        .lin
        .iter()
        .zip(&inst.h.lin)
        .map(|(a, b)| -(a + mu * b))
        .collect();
    let x = spec.pinv_mul(&v, 0.0);
    let bound = if mu > 0.0 { inst.beta } else { inst.alpha };
    Some(inst.h.eval(&x) - bound)
}

/// Polishes a smooth interior maximizer to full precision by bisection on
/// the sign of the slope.
fn refine(inst: &GtrsInstance, dom: MuInterval, arg: f64) -> Option<f64> {
    if arg == 0.0 || !arg.is_finite() {
        return None;
    }
    let side = if arg > 0.0 {
        dom.intersect(&MuInterval::new(0.0, f64::INFINITY))?
    } else {
        dom.intersect(&MuInterval::new(f64::NEG_INFINITY, 0.0))?
    };
    let mut w = 1e-6 * (1.0 + arg.abs());
    for _ in 0..8 {
        let lo = (arg - w).max(side.lo);
        let hi = (arg + w).min(side.hi);
        let (Some(sl), Some(sh)) = (slope(inst, lo), slope(inst, hi)) else {
            w *= 0.1;
            continue;
        };
        if sl < 0.0 || sh > 0.0 {
            w *= 10.0;
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            match slope(inst, m) {
                Some(s) if s > 0.0 => a = m,
                Some(_) => b = m,
                None => return None,
            }
        }
        return Some(0.5 * (a + b));
    }
    None
}

fn singular_at(inst: &GtrsInstance, mu: f64) -> bool {
    let pencil = inst.f.quad.add_scaled(&inst.h.quad, mu);
    let spec = eigh(&pencil);
    let tol = psd_tol(pencil.norm_inf());
    spec.eigenvalues.iter().any(|l| l.abs() <= tol)
}

/// Maximizes `g` over the intersection of the PSD interval with the
/// multiplier domain.
pub fn maximize_dual(inst: &GtrsInstance) -> DualResult {
    let pencil = pencil_interval(&inst.f.quad, &inst.h.quad);
    let Some(psd) = pencil.interval else {
        return DualResult::infeasible(None);
    };
    let Some(dom) = psd.intersect(&multiplier_domain(inst)) else {
        return DualResult::infeasible(Some(psd));
    };
    let g = |mu: f64| dual_value(inst, mu);
    let mut candidates: Vec<(f64, f64, bool)> = Vec::new();
    let mut capped = pencil.capped;

    if !pencil.common_null.is_empty() {
        // a + μb must be orthogonal to the common null space.
        let zb: Vec<f64> = pencil
            .common_null
            .iter()
            .map(|z| dot(z, &inst.h.lin))
            .collect();
        let za: Vec<f64> = pencil
            .common_null
            .iter()
            .map(|z| dot(z, &inst.f.lin))
            .collect();
        let bb = dot(&zb, &zb);
        if bb > 0.0 && norm_inf_vec(&zb) > psd_tol(norm_inf_vec(&inst.h.lin)) {
            let mu0 = -dot(&za, &zb) / bb;
            if dom.contains(mu0) {
                candidates.push((mu0, g(mu0), true));
            }
        }
    }
    let search = maximize_concave(g, dom, DUAL_MU_TOL, &|_, _| false);
    capped |= search.capped;
    candidates.push((search.arg, search.value, false));
    if let Some(mu) = refine(inst, dom, search.arg) {
        candidates.push((mu, g(mu), true));
    }
    for e in [dom.lo, dom.hi] {
        if e.is_finite() {
            candidates.push((e, g(e), true));
        }
    }
    if dom.contains(0.0) {
        candidates.push((0.0, g(0.0), true));
    }

    let mut best: Option<(f64, f64)> = None;
    for (mu, val, exact) in candidates {
        if val == f64::NEG_INFINITY || val.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bv)) => {
                let slack = 1e-13 * (1.0 + bv.abs());
                val > bv + slack || (exact && val >= bv - slack)
            }
        };
        if better {
            best = Some((mu, val));
        }
    }
    let Some((mu_star, value)) = best else {
        return DualResult::infeasible(Some(psd));
    };
    DualResult {
        status: DualStatus::Optimal,
        mu_star: Some(mu_star),
        value,
        psd_interval: Some(psd),
        hard_case: singular_at(inst, mu_star),
        capped: capped || mu_star.abs() >= MU_CAP,
    }
}

/// Dual feasibility: some `μ` of the PSD interval (within the multiplier
/// domain) has `a + μb ∈ Range(A + μB)`.
pub fn dual_feasible(inst: &GtrsInstance) -> bool {
    maximize_dual(inst).status == DualStatus::Optimal
}
