//! Certificate checking.
//!
//! Everything here is self-contained: quadratic evaluation, the null-space
//! basis (Gram–Schmidt instead of a Householder reflector) and the PSD test
//! (Householder tridiagonalization followed by a Sturm count instead of Jacobi
//! sweeps) are written independently of the producing modules.

use super::{Certificate, GtrsInstance, Quadratic, EPS_PSD};

type Dense = Vec<Vec<f64>>;

const VALUE_RTOL: f64 = 1e-12;
const BAND_TOL: f64 = 1e-10;
const INFEASIBLE_MARGIN: f64 = 1e-8;
const ZERO_COEF: f64 = 1e-10;

/// Returns `true` iff `cert` is a valid witness for `inst`. Never panics on
/// malformed certificates; they simply fail.
pub fn verify_certificate(inst: &GtrsInstance, cert: &Certificate) -> bool {
    match cert {
        Certificate::Multiplier {
            mu,
            mu_plus,
            mu_minus,
            level,
        } => verify_multiplier(inst, *mu, *mu_plus, *mu_minus, *level),
        Certificate::ExceptionNu { nu, level, .. } => verify_exception(inst, *nu, *level),
        Certificate::Counterexample {
            x,
            f_value,
            h_value,
        } => verify_counterexample(inst, x, *f_value, *h_value),
        Certificate::InfeasiblePrimal {} => verify_infeasible(inst),
        Certificate::UnboundedBelow {
            base,
            direction_hint,
        } => match (base, direction_hint) {
            (Some(base), Some(dir)) => verify_ray(inst, base, dir),
            _ => false,
        },
    }
}

fn full(q: &Quadratic) -> Dense {
    let n = q.dim();
    (0..n)
        .map(|i| (0..n).map(|j| q.quad.get(i, j)).collect())
        .collect()
}

fn matvec(m: &Dense, x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn inner(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn value(q: &Quadratic, x: &[f64]) -> f64 {
    let m = full(q);
    inner(x, &matvec(&m, x)) + 2.0 * inner(&q.lin, x) + q.constant
}

fn norm_inf(m: &Dense) -> f64 {
    m.iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reduces a symmetric matrix to tridiagonal form with Householder
/// reflections; returns (diagonal, off-diagonal).
fn tridiagonalize(mut a: Dense) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let alpha = -a[k + 1][k].signum() * alpha_sq.sqrt();
        let mut v = vec![0.0; n];
        v[k + 1] = a[k + 1][k] - alpha;
        for i in k + 2..n {
            v[i] = a[i][k];
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        // A ← H A H with H = I − 2vvᵀ/vᵀv.
        let p: Vec<f64> = (0..n).map(|i| 2.0 * inner(&a[i], &v) / vv).collect();
        let kcoef = inner(&v, &p) / vv;
        let w: Vec<f64> = (0..n).map(|i| p[i] - kcoef * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= v[i] * w[j] + w[i] * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i]).collect();
    let off = (1..n).map(|i| a[i][i - 1]).collect();
    (diag, off)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let scale = diag
        .iter()
        .chain(off)
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(x.abs())
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale * 1e-3;
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn eigen_count_below(m: &Dense, x: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let (d, e) = tridiagonalize(m.clone());
    count_below(&d, &e, x)
}

fn accepts_psd(m: &Dense) -> bool {
    let tol = EPS_PSD * (1.0 + norm_inf(m));
    eigen_count_below(m, -tol) == 0
}

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

fn verify_multiplier(inst: &GtrsInstance, mu: f64, plus: f64, minus: f64, level: f64) -> bool {
    if !finite(&[mu, plus, minus, level]) || plus < 0.0 || minus < 0.0 {
        return false;
    }
    if plus * minus != 0.0 || (mu - (plus - minus)).abs() > 1e-12 * (1.0 + mu.abs()) {
        return false;
    }
    if (inst.alpha == f64::NEG_INFINITY && plus > 0.0)
        || (inst.beta == f64::INFINITY && minus > 0.0)
    {
        return false;
    }
    let n = inst.dim();
    let w = minus - plus;
    let (fa, hb) = (full(&inst.f), full(&inst.h));
    let mut corner = inst.f.constant - level + w * inst.h.constant;
    if minus > 0.0 {
        corner -= minus * inst.beta;
    }
    if plus > 0.0 {
        corner += plus * inst.alpha;
    }
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = fa[i][j] + w * hb[i][j];
        }
        let l = inst.f.lin[i] + w * inst.h.lin[i];
        m[i][n] = l;
        m[n][i] = l;
    }
    m[n][n] = corner;
    accepts_psd(&m)
}

/// Orthonormal basis of `{x : bᵀx = 0}` by Gram–Schmidt on the axes least
/// aligned with `b`.
fn complement_basis(b: &[f64]) -> Vec<Vec<f64>> {
    let n = b.len();
    let nb = inner(b, b).sqrt();
    let unit: Vec<f64> = b.iter().map(|v| v / nb).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| unit[i].abs().total_cmp(&unit[j].abs()));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &i in &order {
        if basis.len() + 1 == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            let c = inner(&v, &unit);
            v.iter_mut().zip(&unit).for_each(|(x, u)| *x -= c * u);
            for q in &basis {
                let c = inner(&v, q);
                v.iter_mut().zip(q).for_each(|(x, u)| *x -= c * u);
            }
        }
        let nv = inner(&v, &v).sqrt();
        if nv > 1e-6 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis
}

fn verify_exception(inst: &GtrsInstance, nu: f64, level: f64) -> bool {
    if !finite(&[nu, level, inst.alpha, inst.beta]) || nu < 0.0 {
        return false;
    }
    if !inst.h.quad.is_zero() || inst.h.lin.iter().all(|&v| v == 0.0) {
        return false;
    }
    let a = full(&inst.f);
    let tol_a = EPS_PSD * (1.0 + norm_inf(&a));
    if eigen_count_below(&a, -tol_a) != 1 {
        return false;
    }
    let b = &inst.h.lin;
    let bb = inner(b, b);
    let v = complement_basis(b);
    let k = v.len();
    let av: Vec<Vec<f64>> = v.iter().map(|col| matvec(&a, col)).collect();
    let c = inst.f.constant - level;
    let d = inst.h.constant;

    if inst.alpha == inst.beta {
        // Fixed-matrix test on the hyperplane h = alpha.
        let shift = d - inst.alpha;
        let x0: Vec<f64> = b.iter().map(|bi| -shift / (2.0 * bb) * bi).collect();
        let grad: Vec<f64> = matvec(&a, &x0)
            .iter()
            .zip(&inst.f.lin)
            .map(|(p, q)| p + q)
            .collect();
        let f0 = inner(&x0, &matvec(&a, &x0)) + 2.0 * inner(&inst.f.lin, &x0) + c;
        let mut m = vec![vec![0.0; k + 1]; k + 1];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = inner(&v[i], &av[j]);
            }
            let t = inner(&v[i], &grad);
            m[i][k] = t;
            m[k][i] = t;
        }
        m[k][k] = f0;
        return accepts_psd(&m);
    }

    let (alpha, beta) = (inst.alpha, inst.beta);
    let ab = matvec(&a, b);
    let mut m = vec![vec![0.0; k + 2]; k + 2];
    let (zi, oi) = (k, k + 1);
    for i in 0..k {
        for j in 0..k {
            m[i][j] = inner(&v[i], &av[j]);
        }
        let yz = inner(&v[i], &ab) / (2.0 * bb);
        m[i][zi] = yz;
        m[zi][i] = yz;
        let y1 = inner(&v[i], &inst.f.lin);
        m[i][oi] = y1;
        m[oi][i] = y1;
    }
    m[zi][zi] = inner(b, &ab) / (4.0 * bb * bb) + nu;
    let z1 = inner(&inst.f.lin, b) / (2.0 * bb) - 0.5 * nu * (alpha + beta - 2.0 * d);
    m[zi][oi] = z1;
    m[oi][zi] = z1;
    m[oi][oi] = c + nu * (alpha - d) * (beta - d);
    accepts_psd(&m)
}

fn verify_counterexample(inst: &GtrsInstance, x: &[f64], f_value: f64, h_value: f64) -> bool {
    if x.len() != inst.dim() || !finite(x) || !finite(&[f_value, h_value]) {
        return false;
    }
    let fv = value(&inst.f, x);
    let hv = value(&inst.h, x);
    let close = |a: f64, b: f64| (a - b).abs() <= VALUE_RTOL * (1.0 + b.abs());
    if !close(fv, f_value) || !close(hv, h_value) {
        return false;
    }
    let tol = BAND_TOL * inst.bound_scale();
    fv < 0.0 && hv >= inst.alpha - tol && hv <= inst.beta + tol
}

fn verify_infeasible(inst: &GtrsInstance) -> bool {
    let n = inst.dim();
    let hb = full(&inst.h);
    let homog = |sign: f64, corner: f64| -> Dense {
        let mut m = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = sign * hb[i][j];
            }
            m[i][n] = sign * inst.h.lin[i];
            m[n][i] = sign * inst.h.lin[i];
        }
        m[n][n] = corner;
        m
    };
    let d = inst.h.constant;
    // h − beta − δ ≥ 0 everywhere, or alpha − δ − h ≥ 0 everywhere.
    let above = inst.beta.is_finite() && {
        let delta = INFEASIBLE_MARGIN * (1.0 + inst.beta.abs());
        accepts_psd(&homog(1.0, d - inst.beta - delta))
    };
    let below = inst.alpha.is_finite() && {
        let delta = INFEASIBLE_MARGIN * (1.0 + inst.alpha.abs());
        accepts_psd(&homog(-1.0, inst.alpha - delta - d))
    };
    above || below
}

/// Extremes of `p t² + q t + r` over `t ≥ 0`, with coefficients below the
/// given thresholds treated as zero.
fn ray_extremes(p: f64, q: f64, r: f64, p_zero: f64, q_zero: f64) -> (f64, f64) {
    let p = if p.abs() <= p_zero { 0.0 } else { p };
    let q = if q.abs() <= q_zero { 0.0 } else { q };
    if p > 0.0 {
        let lo = if q >= 0.0 { r } else { r - q * q / (4.0 * p) };
        (lo, f64::INFINITY)
    } else if p < 0.0 {
        let hi = if q <= 0.0 { r } else { r - q * q / (4.0 * p) };
        (f64::NEG_INFINITY, hi)
    } else if q > 0.0 {
        (r, f64::INFINITY)
    } else if q < 0.0 {
        (f64::NEG_INFINITY, r)
    } else {
        (r, r)
    }
}

fn line_coefficients(q: &Quadratic, x: &[f64], d: &[f64]) -> (f64, f64, f64) {
    let m = full(q);
    let p = inner(d, &matvec(&m, d));
    let g: Vec<f64> = matvec(&m, x)
        .iter()
        .zip(&q.lin)
        .map(|(a, b)| 2.0 * (a + b))
        .collect();
    (p, inner(&g, d), value(q, x))
}

fn verify_ray(inst: &GtrsInstance, base: &[f64], dir: &[f64]) -> bool {
    let n = inst.dim();
    if base.len() != n || dir.len() != n || !finite(base) || !finite(dir) {
        return false;
    }
    let dd = inner(dir, dir);
    if dd == 0.0 {
        return false;
    }
    let thresholds = |q: &Quadratic| {
        let m = full(q);
        let g = line_coefficients(q, base, dir).1;
        let p_zero = ZERO_COEF * (1.0 + norm_inf(&m)) * dd;
        let q_zero = ZERO_COEF * (1.0 + g.abs().max(dd.sqrt()));
        (p_zero, q_zero)
    };
    let (ph, qh, rh) = line_coefficients(&inst.h, base, dir);
    let (pz, qz) = thresholds(&inst.h);
    let (lo, hi) = ray_extremes(ph, qh, rh, pz, qz);
    let tol = BAND_TOL * inst.bound_scale();
    if lo < inst.alpha - tol || hi > inst.beta + tol {
        return false;
    }
    let (pf, qf, _) = line_coefficients(&inst.f, base, dir);
    let (pz, qz) = thresholds(&inst.f);
    pf < -pz || (pf.abs() <= pz && qf < -qz)
}
