//! Decision procedures, with certificates, for the inequality, equality and
//! interval S-lemmas.
//!
//! Statement S1 is the unsolvability of `f(x) < 0, alpha ≤ h(x) ≤ beta`;
//! S2 the existence of a multiplier making the Lagrangian nonnegative.

use serde::{Deserialize, Serialize};

use crate::degenerate::{solve_b_zero, DegenerateStatus};
use crate::dual::{lagrangian_branches, maximize_dual};
use crate::error::{GtrsError, Precondition, Result};
use crate::linalg::{
    congruence, eigh, maximize_min_eig_affine, min_eig, nullspace_basis, AffineEigMax,
};
use crate::model::{
    dot, psd_tol, verify_certificate, Certificate, DualStatus, GtrsInstance, MuInterval, Quadratic,
    SymMatrix,
};
use crate::oracle::oracle_system_search;
use crate::range::{check_equality_slater, check_interval_slater, quad_inf, quad_range};
use crate::recovery::recover;

/// Threshold below which `f` counts as negative in a counterexample.
pub const STRICT_NEGATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub seed: u64,
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum SlemmaVerdict {
    /// `lambda` is the multiplier in the native form of the system:
    /// `f + λh ≥ 0` for the inequality and equality systems, the dual
    /// multiplier of the pencil `A + λB` for the interval system.
    S2Holds {
        cert: Certificate,
        lambda: f64,
    },
    S1Fails {
        cert: Certificate,
    },
    /// S1 holds while no multiplier exists.
    ExceptionHolds {
        cert: Certificate,
    },
    BothFailExceptionCase {
        cert: Certificate,
    },
}

impl SlemmaVerdict {
    pub fn certificate(&self) -> &Certificate {
        match self {
            SlemmaVerdict::S2Holds { cert, .. }
            | SlemmaVerdict::S1Fails { cert }
            | SlemmaVerdict::ExceptionHolds { cert }
            | SlemmaVerdict::BothFailExceptionCase { cert } => cert,
        }
    }

    /// Whether the verdict asserts that the system `f < 0, h ∈ band` is
    /// unsolvable.
    pub fn s1_holds(&self) -> bool {
        matches!(
            self,
            SlemmaVerdict::S2Holds { .. } | SlemmaVerdict::ExceptionHolds { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlemmaVerdict::S2Holds { .. } => "S2Holds",
            SlemmaVerdict::S1Fails { .. } => "S1Fails",
            SlemmaVerdict::ExceptionHolds { .. } => "ExceptionHolds",
            SlemmaVerdict::BothFailExceptionCase { .. } => "BothFailExceptionCase",
        }
    }
}

fn psd_accepts(best: &AffineEigMax, m0: &SymMatrix, m1: &SymMatrix) -> bool {
    let scale = m0.add_scaled(m1, best.mu_best).norm_inf();
    best.min_eig_best >= -psd_tol(scale)
}

fn walk_ray(inst: &GtrsInstance, base: &[f64], dir: &[f64]) -> Option<Vec<f64>> {
    let mut t = 1.0;
    for _ in 0..80 {
        let x: Vec<f64> = base.iter().zip(dir).map(|(a, b)| a + t * b).collect();
        if is_counterexample(inst, &x) {
            return Some(x);
        }
        t *= 2.0;
    }
    None
}

fn is_counterexample(inst: &GtrsInstance, x: &[f64]) -> bool {
    let hv = inst.h.eval(x);
    inst.f.eval(x) < -STRICT_NEGATIVE && hv >= inst.alpha && hv <= inst.beta
}

/// Moves a point with `f < 0` that sits on or just outside the band into it,
/// along `∓∇h` and then toward the Slater witness.
fn pull_inside(inst: &GtrsInstance, x: Vec<f64>) -> Option<Vec<f64>> {
    if is_counterexample(inst, &x) {
        return Some(x);
    }
    if inst.f.eval(&x) >= -STRICT_NEGATIVE {
        return None;
    }
    let sign = if inst.h.eval(&x) > inst.beta {
        -1.0
    } else {
        1.0
    };
    let mut dirs = vec![inst
        .h
        .gradient(&x)
        .iter()
        .map(|g| sign * g)
        .collect::<Vec<f64>>()];
    if let Some(w) = check_interval_slater(inst).ok().and_then(|s| s.witness) {
        dirs.push(w.iter().zip(&x).map(|(a, b)| a - b).collect());
    }
    for d in dirs {
        let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let dn = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if dn == 0.0 {
            continue;
        }
        let mut t = 1e-14 * scale / dn;
        while t * dn <= scale {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if is_counterexample(inst, &y) {
                return Some(y);
            }
            t *= 2.0;
        }
    }
    None
}

/// A point of `{f < 0, alpha ≤ h ≤ beta}`: from the explicit affine-constraint
/// solver or the dual with primal recovery first, then multistart search.
pub fn find_counterexample(inst: &GtrsInstance, opts: &SearchOptions) -> Option<Vec<f64>> {
    if inst.h.quad.is_zero() {
        if let Ok(sol) = solve_b_zero(inst) {
            match sol.status {
                DegenerateStatus::Optimal => {
                    if let Some(x) = sol.x_star.and_then(|x| pull_inside(inst, x)) {
                        return Some(x);
                    }
                }
                DegenerateStatus::Unbounded => {
                    if let Some(ray) = &sol.ray {
                        if let Some(x) = walk_ray(inst, &ray.base, &ray.direction) {
                            return Some(x);
                        }
                    }
                }
                DegenerateStatus::Infeasible => return None,
            }
        }
    } else {
        let dual = maximize_dual(inst);
        if dual.status == DualStatus::Optimal && dual.value < 0.0 {
            if let Ok(rec) = recover(inst, &dual) {
                if let Some(x) = rec.x_star.and_then(|x| pull_inside(inst, x)) {
                    return Some(x);
                }
            }
        }
    }
    oracle_system_search(
        &inst.f,
        &inst.h,
        inst.alpha,
        inst.beta,
        opts.seed,
        opts.budget,
    )
    .and_then(|x| pull_inside(inst, x))
}

fn counterexample_or_fail(inst: &GtrsInstance, opts: &SearchOptions) -> Result<Certificate> {
    let x = find_counterexample(inst, opts).ok_or_else(|| {
        GtrsError::Numerical("no multiplier certificate and no counterexample found".into())
    })?;
    let cert = Certificate::counterexample(inst, x);
    if verify_certificate(inst, &cert) {
        Ok(cert)
    } else {
        Err(GtrsError::Numerical(
            "counterexample failed verification".into(),
        ))
    }
}

/// Certificate-form multiplier `mu` for an S2 witness, checked against
/// `inst`.
fn verified_multiplier(inst: &GtrsInstance, mu: f64) -> Option<Certificate> {
    let cert = Certificate::multiplier(mu);
    verify_certificate(inst, &cert).then_some(cert)
}

/// Inequality S-lemma for `f < 0, h ≤ 0`, assuming some `h(x̄) < 0`.
pub fn slemma_ineq(f: &Quadratic, h: &Quadratic, opts: &SearchOptions) -> Result<SlemmaVerdict> {
    let inst = GtrsInstance::inequality_system(f.clone(), h.clone())?;
    if !(quad_inf(h).value < 0.0) {
        return Err(Precondition::SlaterInequality.into());
    }
    let m0 = f.homogenized();
    let m1 = h.homogenized();
    let best = maximize_min_eig_affine(&m0, &m1, MuInterval::new(0.0, f64::INFINITY));
    if psd_accepts(&best, &m0, &m1) {
        if let Some(cert) = verified_multiplier(&inst, -best.mu_best) {
            return Ok(SlemmaVerdict::S2Holds {
                cert,
                lambda: best.mu_best,
            });
        }
    }
    Ok(SlemmaVerdict::S1Fails {
        cert: counterexample_or_fail(&inst, opts)?,
    })
}

pub(crate) fn count_negative(m: &SymMatrix) -> usize {
    let tol = psd_tol(m.norm_inf());
    eigh(m).eigenvalues.iter().filter(|l| **l < -tol).count()
}

/// Whether `(f, h)` has the exception signature: `A` with exactly one
/// negative eigenvalue, `B = 0`, `b ≠ 0`.
pub fn exception_signature(f: &Quadratic, h: &Quadratic) -> bool {
    h.quad.is_zero() && h.lin.iter().any(|v| *v != 0.0) && count_negative(&f.quad) == 1
}

/// `[[VᵀAV, Vᵀ(Ax₀+a)], [·, f(x₀)]]` at `x₀ = −d/(2bᵀb)·b`, the restriction
/// of `f` to the hyperplane `h = 0`.
pub fn build_exception_matrix_eq(f: &Quadratic, h: &Quadratic) -> Result<SymMatrix> {
    let b = &h.lin;
    let bb = dot(b, b);
    let x0: Vec<f64> = b.iter().map(|v| -h.constant / (2.0 * bb) * v).collect();
    let v = nullspace_basis(b)?;
    let k = v.cols();
    let vav = congruence(&f.quad, &v);
    let grad: Vec<f64> = f.gradient(&x0).iter().map(|g| 0.5 * g).collect();
    let side = v.tr_mul_vec(&grad);
    let f0 = f.eval(&x0);
    Ok(SymMatrix::from_fn(k + 1, |i, j| match (i < k, j < k) {
        (true, true) => vav.get(i, j),
        (true, false) => side[i],
        (false, true) => side[j],
        (false, false) => f0,
    }))
}

/// Equality S-lemma for `f < 0, h = 0`, assuming the range of `h` straddles
/// zero.
pub fn slemma_eq(f: &Quadratic, h: &Quadratic, opts: &SearchOptions) -> Result<SlemmaVerdict> {
    let inst = GtrsInstance::equality_system(f.clone(), h.clone())?;
    if !check_equality_slater(h, 0.0) {
        return Err(Precondition::SlaterEquality.into());
    }
    if exception_signature(f, h) {
        let m = build_exception_matrix_eq(f, h)?;
        let lmin = min_eig(&m);
        let cert = Certificate::ExceptionNu {
            nu: 0.0,
            matrix_min_eig: lmin,
            level: 0.0,
        };
        if lmin >= -psd_tol(m.norm_inf()) && verify_certificate(&inst, &cert) {
            return Ok(SlemmaVerdict::ExceptionHolds { cert });
        }
        return Ok(SlemmaVerdict::BothFailExceptionCase {
            cert: counterexample_or_fail(&inst, opts)?,
        });
    }
    let m0 = f.homogenized();
    let m1 = h.homogenized();
    let best = maximize_min_eig_affine(&m0, &m1, MuInterval::REAL_LINE);
    if psd_accepts(&best, &m0, &m1) {
        if let Some(cert) = verified_multiplier(&inst, -best.mu_best) {
            return Ok(SlemmaVerdict::S2Holds {
                cert,
                lambda: best.mu_best,
            });
        }
    }
    Ok(SlemmaVerdict::S1Fails {
        cert: counterexample_or_fail(&inst, opts)?,
    })
}

/// The order `n + 1` exception matrix for the band `[alpha, beta]` under an
/// affine constraint, in the coordinates `(y, z, 1)` of
/// `x = z·b/(2bᵀb) + Vy`.
pub fn build_exception_matrix_interval(
    f: &Quadratic,
    h: &Quadratic,
    alpha: f64,
    beta: f64,
    nu: f64,
) -> Result<SymMatrix> {
    if !h.quad.is_zero() {
        return Err(Precondition::ConstraintMatrixZero.into());
    }
    if h.lin.iter().all(|v| *v == 0.0) {
        return Err(Precondition::ConstraintLinearNonzero.into());
    }
    let b = &h.lin;
    let d = h.constant;
    let bb = dot(b, b);
    let v = nullspace_basis(b)?;
    let k = v.cols();
    let vav = congruence(&f.quad, &v);
    let ab = f.quad.mul_vec(b);
    let yz: Vec<f64> = v.tr_mul_vec(&ab).iter().map(|t| t / (2.0 * bb)).collect();
    let y1 = v.tr_mul_vec(&f.lin);
    let zz = dot(b, &ab) / (4.0 * bb * bb) + nu;
    let z1 = dot(&f.lin, b) / (2.0 * bb) - 0.5 * nu * (alpha + beta - 2.0 * d);
    let one = f.constant + nu * (alpha - d) * (beta - d);
    let (zi, oi) = (k, k + 1);
    Ok(SymMatrix::from_fn(k + 2, |i, j| {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        match (i, j) {
            (i, j) if i < k => vav.get(i, j),
            (i, j) if i == zi && j < k => yz[j],
            (i, j) if i == zi && j == zi => zz,
            (i, j) if i == oi && j < k => y1[j],
            (i, j) if i == oi && j == zi => z1,
            _ => one,
        }
    }))
}

/// Interval S-lemma, following the case split on the range of `h`.
pub fn slemma_interval(inst: &GtrsInstance, opts: &SearchOptions) -> Result<SlemmaVerdict> {
    let (alpha, beta) = (inst.alpha, inst.beta);
    if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
        return Err(Precondition::StrictFiniteBounds.into());
    }
    if !check_interval_slater(inst)?.holds {
        return Err(Precondition::IntervalSlater.into());
    }
    let (f, h) = (&inst.f, &inst.h);
    let range = quad_range(h);

    if range.inf >= alpha && range.sup <= beta {
        // The constraint is void: S1 says f ≥ 0 everywhere.
        if let Some(cert) = verified_multiplier(inst, 0.0) {
            return Ok(SlemmaVerdict::S2Holds { cert, lambda: 0.0 });
        }
        return Ok(SlemmaVerdict::S1Fails {
            cert: counterexample_or_fail(inst, opts)?,
        });
    }
    if range.inf >= alpha {
        return one_sided(inst, &h.shifted(beta), -1.0, opts);
    }
    if range.sup <= beta {
        return one_sided(inst, &h.negated().shifted(-alpha), 1.0, opts);
    }

    if !h.quad.is_zero() || count_negative(&f.quad) == 0 {
        let (m0, mp, mm) = lagrangian_branches(inst, 0.0);
        let up = maximize_min_eig_affine(&m0, &mp, MuInterval::new(0.0, f64::INFINITY));
        let down = maximize_min_eig_affine(&m0, &mm, MuInterval::new(f64::NEG_INFINITY, 0.0));
        let mut branches = [(up, &mp), (down, &mm)];
        branches.sort_by(|a, b| b.0.min_eig_best.total_cmp(&a.0.min_eig_best));
        for (best, m1) in branches {
            if psd_accepts(&best, &m0, m1) {
                if let Some(cert) = verified_multiplier(inst, -best.mu_best) {
                    return Ok(SlemmaVerdict::S2Holds {
                        cert,
                        lambda: best.mu_best,
                    });
                }
            }
        }
        return Ok(SlemmaVerdict::S1Fails {
            cert: counterexample_or_fail(inst, opts)?,
        });
    }

    // Affine constraint with an indefinite objective.
    if count_negative(&f.quad) == 1 {
        let m0 = build_exception_matrix_interval(f, h, alpha, beta, 0.0)?;
        let m1 = build_exception_matrix_interval(f, h, alpha, beta, 1.0)?.add_scaled(&m0, -1.0);
        let best = maximize_min_eig_affine(&m0, &m1, MuInterval::new(0.0, f64::INFINITY));
        if psd_accepts(&best, &m0, &m1) {
            let cert = Certificate::ExceptionNu {
                nu: best.mu_best,
                matrix_min_eig: best.min_eig_best,
                level: 0.0,
            };
            if verify_certificate(inst, &cert) {
                return Ok(SlemmaVerdict::ExceptionHolds { cert });
            }
        }
        return Ok(SlemmaVerdict::BothFailExceptionCase {
            cert: counterexample_or_fail(inst, opts)?,
        });
    }
    Ok(SlemmaVerdict::S1Fails {
        cert: counterexample_or_fail(inst, opts)?,
    })
}

/// One active side: `g ≤ 0` with `g = h − beta` (`sign = −1`, multiplier on
/// `beta`) or `g = alpha − h` (`sign = +1`, multiplier on `alpha`).
fn one_sided(
    inst: &GtrsInstance,
    g: &Quadratic,
    sign: f64,
    opts: &SearchOptions,
) -> Result<SlemmaVerdict> {
    match slemma_ineq(&inst.f, g, opts)? {
        SlemmaVerdict::S2Holds { lambda, .. } => {
            let mu = sign * lambda;
            if let Some(cert) = verified_multiplier(inst, mu) {
                return Ok(SlemmaVerdict::S2Holds { cert, lambda: -mu });
            }
            Ok(SlemmaVerdict::S1Fails {
                cert: counterexample_or_fail(inst, opts)?,
            })
        }
        SlemmaVerdict::S1Fails {
            cert: Certificate::Counterexample { x, .. },
        } => {
            let cert = Certificate::counterexample(inst, x);
            if verify_certificate(inst, &cert) {
                Ok(SlemmaVerdict::S1Fails { cert })
            } else {
                Ok(SlemmaVerdict::S1Fails {
                    cert: counterexample_or_fail(inst, opts)?,
                })
            }
        }
        _ => Ok(SlemmaVerdict::S1Fails {
            cert: counterexample_or_fail(inst, opts)?,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q1(m: f64, lin: f64, k: f64) -> Quadratic {
        Quadratic::new(SymMatrix::diag(&[m]), vec![lin], k).unwrap()
    }

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    #[test]
    fn ineq_examples() {
        let v = slemma_ineq(&q1(1.0, 0.0, -1.0), &q1(-1.0, 0.0, 1.0), &opts()).unwrap();
        let SlemmaVerdict::S2Holds { lambda, .. } = v else {
            panic!("{v:?}")
        };
        assert!((lambda - 1.0).abs() < 1e-8);

        let v = slemma_ineq(&q1(1.0, 0.0, 1.0), &q1(1.0, 0.0, -4.0), &opts()).unwrap();
        let SlemmaVerdict::S2Holds { lambda, .. } = v else {
            panic!("{v:?}")
        };
        assert_eq!(lambda, 0.0);

        let v = slemma_ineq(&q1(1.0, 0.0, -1.0), &q1(1.0, 0.0, -4.0), &opts()).unwrap();
        let SlemmaVerdict::S1Fails {
            cert: Certificate::Counterexample {
                f_value, h_value, ..
            },
        } = v
        else {
            panic!("{v:?}")
        };
        assert!(f_value < 0.0 && h_value <= 0.0);

        assert!(slemma_ineq(&q1(1.0, 0.0, 0.0), &q1(1.0, 0.0, 0.0), &opts()).is_err());
    }

    #[test]
    fn eq_examples() {
        let v = slemma_eq(&q1(1.0, 0.0, -1.0), &q1(1.0, 0.0, -1.0), &opts()).unwrap();
        let SlemmaVerdict::S2Holds { lambda, .. } = v else {
            panic!("{v:?}")
        };
        assert!((lambda + 1.0).abs() < 1e-8);

        let v = slemma_eq(&q1(-1.0, 0.0, 1.0), &q1(0.0, 1.0, 0.0), &opts()).unwrap();
        let SlemmaVerdict::ExceptionHolds {
            cert: Certificate::ExceptionNu {
                nu, matrix_min_eig, ..
            },
        } = v
        else {
            panic!("{v:?}")
        };
        assert_eq!((nu, matrix_min_eig), (0.0, 1.0));

        let v = slemma_eq(&q1(-1.0, 0.0, -1.0), &q1(0.0, 1.0, 0.0), &opts()).unwrap();
        let SlemmaVerdict::BothFailExceptionCase {
            cert: Certificate::Counterexample { x, .. },
        } = v
        else {
            panic!("{v:?}")
        };
        assert_eq!(x, vec![0.0]);

        assert!(slemma_eq(&q1(1.0, 0.0, 0.0), &q1(1.0, 0.0, 1.0), &opts()).is_err());
    }

    #[test]
    fn exception_matrix_entries() {
        let f = q1(-1.0, 0.0, 0.5);
        let h = q1(0.0, 1.0, 0.0);
        let m = build_exception_matrix_interval(&f, &h, -1.0, 1.0, 0.25).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0, 0.0], vec![0.0, 0.25]]);
        let m = build_exception_matrix_interval(&f, &h, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.to_rows(), vec![vec![-0.25, 0.0], vec![0.0, 0.5]]);
        let m =
            build_exception_matrix_interval(&q1(-1.0, 0.0, 0.5), &q1(0.0, 1.0, 0.3), 0.0, 1.0, 2.0)
                .unwrap();
        assert!((m.get(0, 1) - (-(2.0 / 2.0) * (0.0 + 1.0 - 0.6))).abs() < 1e-15);
        assert!(build_exception_matrix_interval(&f, &q1(1.0, 1.0, 0.0), -1.0, 1.0, 0.0).is_err());
        assert!(build_exception_matrix_interval(&f, &q1(0.0, 0.0, 0.0), -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exception_matrix_with_null_block() {
        // n = 2: the (y, ·) blocks come from V = b⊥.
        let f = Quadratic::new(SymMatrix::diag(&[1.0, -1.0]), vec![0.2, 0.1], 0.3).unwrap();
        let h = Quadratic::new(SymMatrix::zeros(2), vec![0.0, 1.0], 0.1).unwrap();
        let m = build_exception_matrix_interval(&f, &h, -1.0, 2.0, 0.5).unwrap();
        assert_eq!(m.order(), 3);
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((m.get(1, 1) - (-0.25 + 0.5)).abs() < 1e-15);
        assert!((m.get(2, 0).abs() - 0.2).abs() < 1e-15);
        assert!((m.get(2, 2) - (0.3 + 0.5 * (-1.1) * 1.9)).abs() < 1e-15);
    }

    #[test]
    fn interval_examples() {
        let inst = GtrsInstance::new(q1(-1.0, 0.0, 4.0), q1(1.0, 0.0, 0.0), -5.0, 4.0).unwrap();
        let v = slemma_interval(&inst, &opts()).unwrap();
        let SlemmaVerdict::S2Holds {
            cert: Certificate::Multiplier { mu, .. },
            ..
        } = v
        else {
            panic!("{v:?}")
        };
        assert!((mu + 1.0).abs() < 1e-8);

        let e2 = GtrsInstance::new(q1(-1.0, 0.0, 0.5), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap();
        let v = slemma_interval(&e2, &opts()).unwrap();
        let SlemmaVerdict::ExceptionHolds {
            cert: Certificate::ExceptionNu { nu, .. },
        } = v
        else {
            panic!("{v:?}")
        };
        assert!((0.25 - 1e-8..=0.5 + 1e-8).contains(&nu));

        let inst = GtrsInstance::new(q1(-1.0, 0.0, 0.0), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap();
        let v = slemma_interval(&inst, &opts()).unwrap();
        let SlemmaVerdict::BothFailExceptionCase {
            cert: Certificate::Counterexample {
                f_value, h_value, ..
            },
        } = v
        else {
            panic!("{v:?}")
        };
        assert!(f_value < 0.0 && (-1.0..=1.0).contains(&h_value));
    }

    #[test]
    fn interval_straddling_and_void() {
        // f = x² − 2, h = x² on [1, 4]: f(1) = −1.
        let inst = GtrsInstance::new(q1(1.0, 0.0, -2.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        let v = slemma_interval(&inst, &opts()).unwrap();
        assert!(!v.s1_holds());

        // Straddling: h = 2x ∈ [−1, 1] with f = x² − x + 1 > 0.
        let inst = GtrsInstance::new(q1(1.0, -0.5, 1.0), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap();
        let v = slemma_interval(&inst, &opts()).unwrap();
        assert!(matches!(v, SlemmaVerdict::S2Holds { .. }));

        // Void constraint: h ≡ 0 inside the band.
        let inst =
            GtrsInstance::new(q1(1.0, 0.0, 1.0), Quadratic::constant(1, 0.0), -1.0, 1.0).unwrap();
        let v = slemma_interval(&inst, &opts()).unwrap();
        assert!(matches!(v, SlemmaVerdict::S2Holds { lambda, .. } if lambda == 0.0));
    }

    #[test]
    fn interval_preconditions() {
        let inst = GtrsInstance::new(q1(1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), -3.0, -1.0).unwrap();
        assert!(matches!(
            slemma_interval(&inst, &opts()),
            Err(GtrsError::Precondition(Precondition::IntervalSlater))
        ));
        let inst = GtrsInstance::new(q1(1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), f64::NEG_INFINITY, 1.0)
            .unwrap();
        assert!(slemma_interval(&inst, &opts()).is_err());
    }
}
