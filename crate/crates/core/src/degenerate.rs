//! Explicit solutions for the instances the dual route does not cover: an
//! affine constraint (`B = 0`) and a band that collapses onto a level set of
//! `h`. Also the product reformulation `(h−α)(h−β) ≤ 0` for affine `h`.

use serde::{Deserialize, Serialize};

use crate::error::{Precondition, Result};
use crate::linalg::{
    congruence, eigh, maximize_min_eig_affine, nullspace_basis, pinv_apply, Mat, MU_CAP,
};
use crate::model::{
    dot, ext_f64, norm_inf_vec, psd_tol, GtrsInstance, MuInterval, Quadratic, SymMatrix,
};
use crate::range::{check_feasible, check_interval_slater, quad_inf, quad_range};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// A feasible ray `base + t·direction` along which `f → −∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSolution {
    pub status: DegenerateStatus,
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub x_star: Option<Vec<f64>>,
    pub ray: Option<Ray>,
}

impl DegenerateSolution {
    fn optimal(f: &Quadratic, x: Vec<f64>) -> Self {
        Self {
            status: DegenerateStatus::Optimal,
            value: f.eval(&x),
            x_star: Some(x),
            ray: None,
        }
    }

    fn unbounded(ray: Option<Ray>) -> Self {
        Self {
            status: DegenerateStatus::Unbounded,
            value: f64::NEG_INFINITY,
            x_star: None,
            ray,
        }
    }

    fn infeasible() -> Self {
        Self {
            status: DegenerateStatus::Infeasible,
            value: f64::INFINITY,
            x_star: None,
            ray: None,
        }
    }
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// A feasible value of `z = h − d` in `[zlo, zhi]`.
fn some_point(zlo: f64, zhi: f64) -> f64 {
    0.0_f64.clamp(zlo, zhi)
}

/// `inf f` subject to `alpha ≤ 2bᵀx + d ≤ beta`.
///
/// With `x = z·b/(2bᵀb) + Vy`, `V` a basis of `b⊥`, the constraint becomes
/// `z ∈ [alpha − d, beta − d]` and
/// `f = yᵀPy + 2(zq + Vᵀa)ᵀy + pz² + 2rz + c`. Minimizing out `y` leaves a
/// quadratic in `z`.
pub fn solve_b_zero(inst: &GtrsInstance) -> Result<DegenerateSolution> {
    if !inst.h.quad.is_zero() {
        return Err(Precondition::ConstraintMatrixZero.into());
    }
    let (f, h) = (&inst.f, &inst.h);
    let n = inst.dim();
    if h.lin.iter().all(|v| *v == 0.0) {
        if !(inst.alpha <= h.constant && h.constant <= inst.beta) {
            return Ok(DegenerateSolution::infeasible());
        }
        let r = quad_inf(f);
        return Ok(match r.argmin {
            Some(x) => DegenerateSolution::optimal(f, x),
            None => DegenerateSolution::unbounded(r.direction.map(|d| Ray {
                base: vec![0.0; n],
                direction: d,
            })),
        });
    }
    let zlo = inst.alpha - h.constant;
    let zhi = inst.beta - h.constant;
    if zlo > zhi {
        return Ok(DegenerateSolution::infeasible());
    }
    let b = &h.lin;
    let bb = dot(b, b);
    let u: Vec<f64> = b.iter().map(|v| v / (2.0 * bb)).collect();
    let v = nullspace_basis(b)?;
    let pm = congruence(&f.quad, &v);
    let au = f.quad.mul_vec(&u);
    let q = v.tr_mul_vec(&au);
    let va = v.tr_mul_vec(&f.lin);
    let p = dot(&u, &au);
    let r = dot(&f.lin, &u);
    let lift = |z: f64, y: &[f64]| {
        axpy(
            &u.iter().map(|ui| z * ui).collect::<Vec<_>>(),
            1.0,
            &v.mul_vec(y),
        )
    };
    let w = |z: f64| axpy(&va, z, &q);

    let spec = eigh(&pm);
    let tol = psd_tol(pm.norm_inf());
    if spec.min() < -tol {
        let z0 = some_point(zlo, zhi);
        return Ok(DegenerateSolution::unbounded(Some(Ray {
            base: lift(z0, &vec![0.0; n - 1]),
            direction: v.mul_vec(&spec.vector(0)),
        })));
    }
    let null = spec.null_vectors(tol);
    // The range condition Nᵀw(z) = 0 is affine in z.
    let nq: Vec<f64> = null.iter().map(|c| dot(c, &q)).collect();
    let na: Vec<f64> = null.iter().map(|c| dot(c, &va)).collect();
    let scale_q = 1e-9 * (1.0 + norm_inf_vec(&q));
    let scale_a = 1e-9 * (1.0 + norm_inf_vec(&va));
    let range_ray = |z: f64| -> Ray {
        let wz = w(z);
        let mut dy = vec![0.0; n - 1];
        for c in &null {
            let s = dot(c, &wz);
            dy.iter_mut().zip(c).for_each(|(o, ci)| *o -= s * ci);
        }
        Ray {
            base: lift(z, &vec![0.0; n - 1]),
            direction: v.mul_vec(&dy),
        }
    };
    let y_of =
        |z: f64| -> Vec<f64> { pinv_apply(&pm, &w(z)).solution.iter().map(|s| -s).collect() };
    if norm_inf_vec(&nq) > scale_q {
        // At most one z keeps w(z) in the range of P; anywhere else y is free
        // to descend.
        let z0 = -dot(&nq, &na) / dot(&nq, &nq);
        if zlo == zhi {
            let resid = nq
                .iter()
                .zip(&na)
                .fold(0.0_f64, |m, (a, c)| m.max((zlo * a + c).abs()));
            if resid <= scale_a.max(scale_q) {
                return Ok(DegenerateSolution::optimal(f, lift(zlo, &y_of(zlo))));
            }
            return Ok(DegenerateSolution::unbounded(Some(range_ray(zlo))));
        }
        let z1 = if zhi - z0 >= z0 - zlo {
            zhi.min(z0.max(zlo) + 1.0)
        } else {
            zlo.max(z0.min(zhi) - 1.0)
        };
        return Ok(DegenerateSolution::unbounded(Some(range_ray(z1))));
    }
    if norm_inf_vec(&na) > scale_a {
        return Ok(DegenerateSolution::unbounded(Some(range_ray(some_point(
            zlo, zhi,
        )))));
    }

    // φ(z) = κz² + 2ℓz + const with y*(z) = −P⁺w(z).
    let pq = pinv_apply(&pm, &q).solution;
    let kappa = p - dot(&q, &pq);
    let ell = r - dot(&va, &pq);
    let ktol = psd_tol(f.quad.norm_inf());
    let dir_z = |sign: f64| -> Vec<f64> {
        axpy(&u, -1.0, &v.mul_vec(&pq))
            .iter()
            .map(|x| sign * x)
            .collect()
    };
    let start = some_point(zlo, zhi);
    let ray_toward = |sign: f64| Ray {
        base: lift(start, &y_of(start)),
        direction: dir_z(sign),
    };
    if kappa < -ktol {
        if zhi.is_infinite() {
            return Ok(DegenerateSolution::unbounded(Some(ray_toward(1.0))));
        }
        if zlo.is_infinite() {
            return Ok(DegenerateSolution::unbounded(Some(ray_toward(-1.0))));
        }
    } else if kappa <= ktol {
        let ltol = 1e-9 * (1.0 + r.abs() + norm_inf_vec(&va) * norm_inf_vec(&pq));
        if ell < -ltol && zhi.is_infinite() {
            return Ok(DegenerateSolution::unbounded(Some(ray_toward(1.0))));
        }
        if ell > ltol && zlo.is_infinite() {
            return Ok(DegenerateSolution::unbounded(Some(ray_toward(-1.0))));
        }
    }
    let phi = |z: f64| kappa * z * z + 2.0 * ell * z;
    let mut cands: Vec<f64> = [zlo, zhi].into_iter().filter(|z| z.is_finite()).collect();
    if kappa > ktol {
        let vz = -ell / kappa;
        if vz > zlo && vz < zhi {
            cands.push(vz);
        }
    }
    if cands.is_empty() {
        cands.push(start);
    }
    let z_star = cands
        .into_iter()
        .fold(None::<f64>, |best, z| match best {
            Some(bz) if phi(bz) <= phi(z) => Some(bz),
            _ => Some(z),
        })
        .expect("nonempty");
    Ok(DegenerateSolution::optimal(f, lift(z_star, &y_of(z_star))))
}

/// `inf f` when the band touches the range of `h` only at its extreme
/// value: the feasible set is the affine set `{x : Bx + b = 0}`.
pub fn solve_boundary_collapse(inst: &GtrsInstance) -> Result<DegenerateSolution> {
    if inst.h.quad.is_zero() {
        return Err(Precondition::ConstraintMatrixNonzero.into());
    }
    if inst.alpha < inst.beta && check_interval_slater(inst)?.holds {
        return Err(Precondition::NoBoundaryCollapse.into());
    }
    if !check_feasible(inst).feasible {
        return Err(Precondition::Infeasible.into());
    }
    let range = quad_range(&inst.h);
    let x0 = if range.inf_attained && range.inf >= inst.beta {
        range.argmin
    } else if range.sup_attained && range.sup <= inst.alpha {
        range.argmax
    } else {
        None
    };
    let Some(x0) = x0 else {
        return Err(Precondition::NoBoundaryCollapse.into());
    };
    let spec = eigh(&inst.h.quad);
    let null = spec.null_vectors(psd_tol(inst.h.quad.norm_inf()));
    if null.is_empty() {
        return Ok(DegenerateSolution::optimal(&inst.f, x0));
    }
    let z = Mat::from_columns(inst.dim(), &null);
    let ax = inst
        .f
        .gradient(&x0)
        .iter()
        .map(|g| 0.5 * g)
        .collect::<Vec<_>>();
    let reduced = Quadratic::new(
        congruence(&inst.f.quad, &z),
        z.tr_mul_vec(&ax),
        inst.f.eval(&x0),
    )?;
    let r = quad_inf(&reduced);
    Ok(match r.argmin {
        Some(y) => DegenerateSolution::optimal(&inst.f, axpy(&x0, 1.0, &z.mul_vec(&y))),
        None => DegenerateSolution::unbounded(r.direction.map(|d| Ray {
            base: x0.clone(),
            direction: z.mul_vec(&d),
        })),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductResult {
    /// `(h − alpha)(h − beta)` as a quadratic in `x`.
    pub g: Quadratic,
    pub value: f64,
}

const LEVEL_BISECTIONS: usize = 100;

/// Whether `f ≥ s` on `{g ≤ 0}`, by the classical S-lemma: some `λ ≥ 0`
/// makes `[[A+λG, a+λm], [·, c−s+λk]]` PSD.
fn level_certified(f: &Quadratic, g: &Quadratic, s: f64) -> bool {
    let m0 = f.shifted(s).homogenized();
    let m1 = g.homogenized();
    let best = maximize_min_eig_affine(&m0, &m1, MuInterval::new(0.0, f64::INFINITY));
    best.min_eig_best >= 0.0
}

/// `inf f` subject to `(h − alpha)(h − beta) ≤ 0` for affine `h`, by
/// bisection on the level certified through the single-constraint S-lemma.
pub fn product_reformulation(inst: &GtrsInstance) -> Result<ProductResult> {
    if !inst.h.quad.is_zero() {
        return Err(Precondition::ConstraintMatrixZero.into());
    }
    if inst.h.lin.iter().all(|v| *v == 0.0) {
        return Err(Precondition::ConstraintLinearNonzero.into());
    }
    if !(inst.alpha.is_finite() && inst.beta.is_finite() && inst.alpha <= inst.beta) {
        return Err(Precondition::StrictFiniteBounds.into());
    }
    let h = &inst.h;
    let (alpha, beta, d) = (inst.alpha, inst.beta, h.constant);
    let b = &h.lin;
    let n = inst.dim();
    let g = Quadratic::new(
        SymMatrix::from_fn(n, |i, j| 4.0 * b[i] * b[j]),
        b.iter().map(|v| (2.0 * d - alpha - beta) * v).collect(),
        (d - alpha) * (d - beta),
    )?;
    let f = &inst.f;
    let mid = 0.5 * (alpha + beta) - d;
    let bb = dot(b, b);
    let x_feas: Vec<f64> = b.iter().map(|v| mid / (2.0 * bb) * v).collect();
    let mut hi = f.eval(&x_feas);
    if level_certified(f, &g, hi) && !level_certified(f, &g, hi + 1e-6 * (1.0 + hi.abs())) {
        return Ok(ProductResult { g, value: hi });
    }
    let mut step = 1.0_f64.max(hi.abs());
    let mut lo = hi - step;
    while !level_certified(f, &g, lo) {
        hi = lo;
        step *= 2.0;
        lo -= step;
        if lo < -MU_CAP {
            return Ok(ProductResult {
                g,
                value: f64::NEG_INFINITY,
            });
        }
    }
    for _ in 0..LEVEL_BISECTIONS {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        if level_certified(f, &g, m) {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(ProductResult {
        g,
        value: 0.5 * (lo + hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q1(m: f64, lin: f64, k: f64) -> Quadratic {
        Quadratic::new(SymMatrix::diag(&[m]), vec![lin], k).unwrap()
    }

    fn e2() -> GtrsInstance {
        GtrsInstance::new(q1(-1.0, 0.0, 0.5), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap()
    }

    #[test]
    fn b_zero_examples() {
        let s = solve_b_zero(&e2()).unwrap();
        assert_eq!(s.status, DegenerateStatus::Optimal);
        assert!((s.value - 0.25).abs() < 1e-15);
        assert!((s.x_star.unwrap()[0].abs() - 0.5).abs() < 1e-15);

        let inst =
            GtrsInstance::new(q1(1.0, 0.0, 0.0), Quadratic::constant(1, 0.0), -1.0, 1.0).unwrap();
        let s = solve_b_zero(&inst).unwrap();
        assert_eq!((s.value, s.x_star), (0.0, Some(vec![0.0])));

        let inst = GtrsInstance::new(q1(0.0, 1.0, 0.0), q1(0.0, 1.0, 0.0), 0.0, 2.0).unwrap();
        let s = solve_b_zero(&inst).unwrap();
        assert_eq!((s.value, s.x_star), (0.0, Some(vec![0.0])));
    }

    #[test]
    fn b_zero_infeasible_and_unbounded() {
        let inst =
            GtrsInstance::new(q1(1.0, 0.0, 0.0), Quadratic::constant(1, 3.0), -1.0, 1.0).unwrap();
        assert_eq!(
            solve_b_zero(&inst).unwrap().status,
            DegenerateStatus::Infeasible
        );

        // f = x₁² − x₂², h = 2x₁: x₂ is free with negative curvature.
        let f = Quadratic::new(SymMatrix::diag(&[1.0, -1.0]), vec![0.0; 2], 0.0).unwrap();
        let h = Quadratic::new(SymMatrix::zeros(2), vec![1.0, 0.0], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, -1.0, 1.0).unwrap();
        let s = solve_b_zero(&inst).unwrap();
        assert_eq!(s.status, DegenerateStatus::Unbounded);
        let ray = s.ray.unwrap();
        assert!(ray.direction[0].abs() < 1e-15 && ray.direction[1].abs() > 0.5);

        // f = x₂ − x₁², h = 2x₁ with an open upper side.
        let f = Quadratic::new(SymMatrix::diag(&[-1.0, 0.0]), vec![0.0, 0.5], 0.0).unwrap();
        let h = Quadratic::new(SymMatrix::zeros(2), vec![1.0, 0.0], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, -1.0, 1.0).unwrap();
        assert_eq!(
            solve_b_zero(&inst).unwrap().status,
            DegenerateStatus::Unbounded
        );
    }

    #[test]
    fn b_zero_two_dimensional() {
        // f = ‖x‖² − 2x₁x₂ + x₁ on 1 ≤ 2(x₁ + x₂) ≤ 3: P = 4 on b⊥, φ(z) is
        // exactly quadratic.
        let f = Quadratic::new(
            SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]),
            vec![0.5, 0.0],
            0.0,
        )
        .unwrap();
        let h = Quadratic::new(SymMatrix::zeros(2), vec![1.0, 1.0], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, 1.0, 3.0).unwrap();
        let s = solve_b_zero(&inst).unwrap();
        let x = s.x_star.unwrap();
        assert!((s.value - inst.f.eval(&x)).abs() < 1e-15);
        // Brute force along the segment family.
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            let z = 1.0 + 2.0 * i as f64 / 400.0;
            for j in -400..=400 {
                let y = j as f64 / 100.0;
                let x1 = z / 4.0 + y;
                let x2 = z / 4.0 - y;
                best = best.min(inst.f.eval(&[x1, x2]));
            }
        }
        assert!(s.value <= best + 1e-12 && best - s.value < 1e-3);
    }

    #[test]
    fn boundary_collapse_examples() {
        let inst = GtrsInstance::new(q1(1.0, -1.0, 1.0), q1(1.0, 0.0, 0.0), -2.0, 0.0).unwrap();
        let s = solve_boundary_collapse(&inst).unwrap();
        assert_eq!((s.value, s.x_star), (1.0, Some(vec![0.0])));

        let f = Quadratic::new(SymMatrix::zeros(2), vec![0.0, 0.5], 0.0).unwrap();
        let h = Quadratic::new(SymMatrix::diag(&[1.0, 0.0]), vec![0.0; 2], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, -1.0, 0.0).unwrap();
        let s = solve_boundary_collapse(&inst).unwrap();
        assert_eq!(s.status, DegenerateStatus::Unbounded);
        let ray = s.ray.unwrap();
        assert_eq!(ray.direction[0], 0.0);

        let inst = GtrsInstance::new(q1(1.0, 0.0, 1.0), q1(-1.0, 0.0, 0.0), 0.0, 3.0).unwrap();
        let s = solve_boundary_collapse(&inst).unwrap();
        assert_eq!((s.value, s.x_star), (1.0, Some(vec![0.0])));
    }

    #[test]
    fn boundary_collapse_preconditions() {
        let inst = GtrsInstance::new(q1(1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        assert!(solve_boundary_collapse(&inst).is_err());
        assert!(solve_boundary_collapse(&e2()).is_err());
    }

    #[test]
    fn product_examples() {
        let r = product_reformulation(&e2()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-6);
        assert_eq!(r.g.constant, -1.0);

        let inst = GtrsInstance::new(q1(1.0, 0.0, 0.0), q1(0.0, 1.0, 0.0), 0.0, 2.0).unwrap();
        assert!(product_reformulation(&inst).unwrap().value.abs() < 1e-6);

        let inst =
            GtrsInstance::new(Quadratic::constant(1, 5.0), q1(0.0, 1.0, 0.0), -3.0, 7.0).unwrap();
        assert!((product_reformulation(&inst).unwrap().value - 5.0).abs() < 1e-6);
    }
}
