//! Top-level dispatcher: assumption checks, routing to the explicit handlers,
//! the dual route with primal recovery, and certificates for every answer.

use serde::{Deserialize, Serialize};

use crate::degenerate::{
    product_reformulation, solve_b_zero, solve_boundary_collapse, DegenerateSolution,
    DegenerateStatus, Ray,
};
use crate::dual::{common_null_space, maximize_dual, multiplier_domain};
use crate::linalg::{congruence, eigh, maximize_min_eig_affine, nullspace_basis, Mat};
use crate::model::{
    dot, ext_f64, ext_f64_opt, verify_certificate, Certificate, DualResult, DualStatus,
    GtrsInstance, MuInterval, Quadratic,
};
use crate::oracle::oracle_min_gtrs;
use crate::range::{
    boundary_ambiguous, check_equality_slater, check_feasible, check_interval_slater, quad_range,
    ricq_witness,
};
use crate::recovery::recover;
use crate::slemma::{
    build_exception_matrix_eq, build_exception_matrix_interval, count_negative, SearchOptions,
};

/// Relative level relaxations tried when a certificate at the exact
/// optimal value fails verification.
const LEVEL_SLACK: [f64; 5] = [0.0, 1e-9, 1e-8, 1e-7, 1e-6];
const GAP_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    DualPath,
    BZeroPath,
    BoundaryCollapsePath,
    InfeasiblePath,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::DualPath => "DualPath",
            Route::BZeroPath => "BZeroPath",
            Route::BoundaryCollapsePath => "BoundaryCollapsePath",
            Route::InfeasiblePath => "InfeasiblePath",
        }
    }
}

/// Verdicts on the standing assumptions, with witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumptions {
    pub b_nonzero: bool,
    pub feasible: bool,
    /// Relative interior constraint qualification; for `alpha = beta` the
    /// two-sided Slater condition `inf h < alpha < sup h`.
    pub ricq: bool,
    pub bounded_below: bool,
    pub dual_feasible: bool,
    pub boundary_ambiguous: bool,
    pub feasible_point: Option<Vec<f64>>,
    pub slater_witness: Option<Vec<f64>>,
    pub ricq_x_hat: Option<Vec<f64>>,
    pub ricq_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub seed: u64,
    pub assumptions: Assumptions,
    pub route: Route,
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub x_star: Option<Vec<f64>>,
    /// Dual multiplier, pencil convention `A + μB`.
    pub mu_star: Option<f64>,
    pub dual: DualResult,
    /// Every entry passed [`verify_certificate`].
    pub certificates: Vec<Certificate>,
    pub gap_note: Option<String>,
    /// Value of the product reformulation `(h−α)(h−β) ≤ 0` for affine `h`.
    #[serde(with = "ext_f64_opt")]
    pub cross_value: Option<f64>,
    pub numerical_failure: bool,
    pub diagnostics: Vec<String>,
}

struct Outcome {
    value: f64,
    x_star: Option<Vec<f64>>,
    certificates: Vec<Certificate>,
    cross_value: Option<f64>,
    numerical_failure: bool,
    diagnostics: Vec<String>,
}

impl Outcome {
    fn new(value: f64) -> Self {
        Self {
            value,
            x_star: None,
            certificates: Vec::new(),
            cross_value: None,
            numerical_failure: false,
            diagnostics: Vec::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.numerical_failure = true;
        self.diagnostics.push(format!("numerical failure: {msg}"));
    }
}

/// Assumption verdicts that do not depend on the route.
fn structural_assumptions(inst: &GtrsInstance, dual: &DualResult) -> Assumptions {
    let feas = check_feasible(inst);
    let mut a = Assumptions {
        b_nonzero: !inst.h.quad.is_zero(),
        feasible: feas.feasible,
        ricq: false,
        bounded_below: true,
        dual_feasible: dual.status == DualStatus::Optimal,
        boundary_ambiguous: false,
        feasible_point: feas.point,
        slater_witness: None,
        ricq_x_hat: None,
        ricq_epsilon: None,
    };
    if inst.alpha < inst.beta {
        if let Ok(s) = check_interval_slater(inst) {
            a.boundary_ambiguous = s.boundary_ambiguous;
            a.slater_witness = s.witness;
        }
        if let Ok(r) = ricq_witness(inst) {
            a.ricq = r.holds;
            a.ricq_x_hat = r.x_hat;
            a.ricq_epsilon = r.epsilon;
        }
    } else {
        a.ricq = check_equality_slater(&inst.h, inst.alpha);
        a.boundary_ambiguous = boundary_ambiguous(&quad_range(&inst.h), inst.alpha, inst.beta);
    }
    a
}

/// Solves the instance along the route its structure selects.
pub fn solve(inst: &GtrsInstance, opts: &SearchOptions) -> SolveReport {
    let dual = maximize_dual(inst);
    let mut assumptions = structural_assumptions(inst, &dual);
    let route = if !assumptions.feasible {
        Route::InfeasiblePath
    } else if !assumptions.b_nonzero {
        Route::BZeroPath
    } else if !assumptions.ricq {
        Route::BoundaryCollapsePath
    } else {
        Route::DualPath
    };
    let start = assumptions
        .slater_witness
        .clone()
        .or_else(|| assumptions.feasible_point.clone());
    let mut out = match route {
        Route::InfeasiblePath => infeasible_path(inst),
        Route::BZeroPath => b_zero_path(inst, &dual, start.as_deref(), opts),
        Route::BoundaryCollapsePath => collapse_path(inst, &dual, start.as_deref(), opts),
        Route::DualPath => dual_path(inst, &dual, start.as_deref(), opts),
    };
    if dual.capped {
        out.diagnostics
            .push("multiplier search reached the |mu| <= 1e12 cap".to_string());
    }
    assumptions.bounded_below = out.value > f64::NEG_INFINITY;
    let gap_note = gap_note(out.value, &dual);
    debug_assert!(out.certificates.iter().all(|c| verify_certificate(inst, c)));
    SolveReport {
        seed: opts.seed,
        assumptions,
        route,
        value: out.value,
        x_star: out.x_star,
        mu_star: dual.mu_star,
        dual,
        certificates: out.certificates,
        gap_note,
        cross_value: out.cross_value,
        numerical_failure: out.numerical_failure,
        diagnostics: out.diagnostics,
    }
}

fn gap_note(value: f64, dual: &DualResult) -> Option<String> {
    if !value.is_finite() {
        return None;
    }
    match dual.status {
        DualStatus::DualInfeasible => Some("duality gap is +infinity".to_string()),
        DualStatus::Optimal => {
            let gap = value - dual.value;
            (gap > GAP_RTOL * (1.0 + value.abs())).then(|| format!("duality gap is {gap}"))
        }
    }
}

fn infeasible_path(inst: &GtrsInstance) -> Outcome {
    let mut out = Outcome::new(f64::INFINITY);
    let cert = Certificate::InfeasiblePrimal {};
    if verify_certificate(inst, &cert) {
        out.certificates.push(cert);
    } else {
        out.fail("infeasibility could not be certified".to_string());
    }
    out
}

/// A multiplier certificate for `inf ≥ level`, relaxing the level slightly
/// when the exact one is rejected.
fn multiplier_certificate(inst: &GtrsInstance, mu_dual: f64, level: f64) -> Option<Certificate> {
    LEVEL_SLACK.iter().find_map(|k| {
        let cert = Certificate::multiplier_at_level(-mu_dual, level - k * (1.0 + level.abs()));
        verify_certificate(inst, &cert).then_some(cert)
    })
}

fn exception_certificate(inst: &GtrsInstance, level: f64) -> Option<Certificate> {
    let (f, h) = (&inst.f, &inst.h);
    LEVEL_SLACK.iter().find_map(|k| {
        let level = level - k * (1.0 + level.abs());
        let g = f.shifted(level);
        let (nu, lmin) = if inst.alpha == inst.beta {
            let m = build_exception_matrix_eq(&g, &h.shifted(inst.alpha)).ok()?;
            (0.0, crate::linalg::min_eig(&m))
        } else {
            let m0 = build_exception_matrix_interval(&g, h, inst.alpha, inst.beta, 0.0).ok()?;
            let m1 = build_exception_matrix_interval(&g, h, inst.alpha, inst.beta, 1.0)
                .ok()?
                .add_scaled(&m0, -1.0);
            let best = maximize_min_eig_affine(&m0, &m1, MuInterval::new(0.0, f64::INFINITY));
            (best.mu_best, best.min_eig_best)
        };
        let cert = Certificate::ExceptionNu {
            nu,
            matrix_min_eig: lmin,
            level,
        };
        verify_certificate(inst, &cert).then_some(cert)
    })
}

fn push_dual_certificate(inst: &GtrsInstance, dual: &DualResult, out: &mut Outcome) -> bool {
    let (DualStatus::Optimal, Some(mu)) = (dual.status, dual.mu_star) else {
        return false;
    };
    if !dual.value.is_finite() {
        return false;
    }
    match multiplier_certificate(inst, mu, dual.value) {
        Some(cert) => {
            out.certificates.push(cert);
            true
        }
        None => false,
    }
}

fn push_ray(
    inst: &GtrsInstance,
    ray: Option<&Ray>,
    start: Option<&[f64]>,
    opts: &SearchOptions,
    out: &mut Outcome,
) {
    let hinted = ray.and_then(|r| ray_certificate(inst, &r.base, &r.direction));
    match hinted.or_else(|| unbounded_evidence(inst, start, opts)) {
        Some(cert) => out.certificates.push(cert),
        None => out
            .diagnostics
            .push("unboundedness not certified by an explicit ray".to_string()),
    }
}

fn degenerate_outcome(
    inst: &GtrsInstance,
    sol: &DegenerateSolution,
    start: Option<&[f64]>,
    opts: &SearchOptions,
) -> Outcome {
    let mut out = Outcome::new(sol.value);
    match sol.status {
        DegenerateStatus::Optimal => out.x_star = sol.x_star.clone(),
        DegenerateStatus::Unbounded => push_ray(inst, sol.ray.as_ref(), start, opts, &mut out),
        DegenerateStatus::Infeasible => {
            let cert = Certificate::InfeasiblePrimal {};
            if verify_certificate(inst, &cert) {
                out.certificates.push(cert);
            }
        }
    }
    out
}

fn b_zero_path(
    inst: &GtrsInstance,
    dual: &DualResult,
    start: Option<&[f64]>,
    opts: &SearchOptions,
) -> Outcome {
    let sol = match solve_b_zero(inst) {
        Ok(s) => s,
        Err(e) => {
            let mut out = Outcome::new(f64::NAN);
            out.fail(e.to_string());
            return out;
        }
    };
    let mut out = degenerate_outcome(inst, &sol, start, opts);
    let affine = inst.h.lin.iter().any(|v| *v != 0.0);
    if sol.status == DegenerateStatus::Optimal {
        if push_dual_certificate(inst, dual, &mut out) {
        } else if affine && count_negative(&inst.f.quad) == 1 {
            match exception_certificate(inst, sol.value) {
                Some(cert) => out.certificates.push(cert),
                None => out
                    .diagnostics
                    .push("no exception certificate verified at the optimal value".to_string()),
            }
        }
    }
    if affine && inst.alpha.is_finite() && inst.beta.is_finite() {
        match product_reformulation(inst) {
            Ok(p) => out.cross_value = Some(p.value),
            Err(e) => out.diagnostics.push(format!("product reformulation: {e}")),
        }
    }
    out
}

fn collapse_path(
    inst: &GtrsInstance,
    dual: &DualResult,
    start: Option<&[f64]>,
    opts: &SearchOptions,
) -> Outcome {
    let sol = match solve_boundary_collapse(inst) {
        Ok(s) => s,
        Err(e) => {
            let mut out = Outcome::new(f64::NAN);
            out.fail(e.to_string());
            return out;
        }
    };
    let mut out = degenerate_outcome(inst, &sol, start, opts);
    if sol.status == DegenerateStatus::Optimal {
        push_dual_certificate(inst, dual, &mut out);
    }
    out
}

fn dual_path(
    inst: &GtrsInstance,
    dual: &DualResult,
    start: Option<&[f64]>,
    opts: &SearchOptions,
) -> Outcome {
    if dual.status == DualStatus::DualInfeasible {
        let mut out = Outcome::new(f64::NEG_INFINITY);
        push_ray(inst, None, start, opts, &mut out);
        return out;
    }
    let mut out = Outcome::new(dual.value);
    if !dual.value.is_finite() {
        out.fail(format!(
            "dual value {} at an optimal multiplier",
            dual.value
        ));
        return out;
    }
    match recover(inst, dual) {
        Ok(r) => {
            out.x_star = r.x_star;
            if let Some(d) = r.diagnostic {
                out.fail(d);
            }
        }
        Err(e) => out.fail(e.to_string()),
    }
    if !push_dual_certificate(inst, dual, &mut out) {
        out.fail("the optimal multiplier failed verification".to_string());
    }
    out
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

fn ray_certificate(inst: &GtrsInstance, base: &[f64], dir: &[f64]) -> Option<Certificate> {
    let cert = Certificate::UnboundedBelow {
        base: Some(base.to_vec()),
        direction_hint: Some(dir.to_vec()),
    };
    verify_certificate(inst, &cert).then_some(cert)
}

/// Directions along which `f` may decrease without bound inside the band:
/// common null vectors of the pencil, vectors isotropic for `B` in the low
/// eigenspace of `A + μ̂B` at the maximizer of its least eigenvalue, and
/// the negative eigenvectors of `A`.
fn ray_directions(inst: &GtrsInstance) -> Vec<Vec<f64>> {
    let (a, b) = (&inst.f.quad, &inst.h.quad);
    let n = inst.dim();
    let mut dirs = common_null_space(a, b);
    let best = maximize_min_eig_affine(a, b, multiplier_domain(inst));
    let spec = eigh(&a.add_scaled(b, best.mu_best));
    let k = n.min(3);
    let low: Vec<Vec<f64>> = (0..k).map(|i| spec.vector(i)).collect();
    let v = Mat::from_columns(n, &low);
    let c = eigh(&congruence(b, &v));
    for i in 0..k {
        dirs.push(v.mul_vec(&c.vector(i)));
        for j in 0..k {
            let (ci, cj) = (c.eigenvalues[i], c.eigenvalues[j]);
            if ci < 0.0 && cj > 0.0 {
                for s in [1.0, -1.0] {
                    let w: Vec<f64> = c
                        .vector(i)
                        .iter()
                        .zip(c.vector(j))
                        .map(|(p, q)| cj.sqrt() * p + s * (-ci).sqrt() * q)
                        .collect();
                    dirs.push(v.mul_vec(&w));
                }
            }
        }
    }
    let sa = eigh(a);
    dirs.extend(
        (0..n)
            .filter(|i| sa.eigenvalues[*i] < 0.0)
            .map(|i| sa.vector(i)),
    );
    dirs
}

/// Feasible starting points for a ray along `d`: a point of the band where
/// `h` is stationary along `d`, and the given feasible point.
fn ray_bases(inst: &GtrsInstance, d: &[f64], start: Option<&[f64]>) -> Vec<Vec<f64>> {
    let mut bases = Vec::new();
    let g = inst.h.quad.mul_vec(d);
    let gg = dot(&g, &g);
    if gg > 0.0 {
        let xp: Vec<f64> = g.iter().map(|v| -dot(&inst.h.lin, d) / gg * v).collect();
        match nullspace_basis(&g) {
            Ok(w) if w.cols() > 0 => {
                let bx: Vec<f64> = inst
                    .h
                    .quad
                    .mul_vec(&xp)
                    .iter()
                    .zip(&inst.h.lin)
                    .map(|(p, q)| p + q)
                    .collect();
                let restricted = Quadratic::new(
                    congruence(&inst.h.quad, &w),
                    w.tr_mul_vec(&bx),
                    inst.h.eval(&xp),
                );
                let sub = restricted
                    .ok()
                    .and_then(|r| GtrsInstance::new(r.clone(), r, inst.alpha, inst.beta).ok());
                if let Some(point) = sub.and_then(|s| check_feasible(&s).point) {
                    bases.push(axpy(&xp, 1.0, &w.mul_vec(&point)));
                }
            }
            _ => bases.push(xp),
        }
    }
    bases.extend(start.map(|s| s.to_vec()));
    bases
}

/// An `UnboundedBelow` certificate: structural ray candidates first, then
/// a ray found by multistart search.
fn unbounded_evidence(
    inst: &GtrsInstance,
    start: Option<&[f64]>,
    opts: &SearchOptions,
) -> Option<Certificate> {
    for d in ray_directions(inst) {
        if dot(&d, &d) == 0.0 {
            continue;
        }
        for base in ray_bases(inst, &d, start) {
            for s in [1.0, -1.0] {
                let dir: Vec<f64> = d.iter().map(|v| s * v).collect();
                if let Some(cert) = ray_certificate(inst, &base, &dir) {
                    return Some(cert);
                }
            }
        }
    }
    let res = oracle_min_gtrs(inst, opts.seed, opts.budget).ok()?;
    let ray = res.ray?;
    ray_certificate(inst, &ray.base, &ray.direction)
}
