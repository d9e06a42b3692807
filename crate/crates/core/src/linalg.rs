//! Dense symmetric eigen machinery and the concave 1-D search used by every
//! LMI feasibility decision.

use crate::error::{GtrsError, Result};
use crate::model::{dot, norm_inf_vec, psd_tol, MuInterval, SymMatrix};

/// Largest `|μ|` explored on an unbounded side.
pub const MU_CAP: f64 = 1e12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;
const RANGE_RTOL: f64 = 1e-9;

/// Row-major dense matrix; used for bases whose columns are vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, c[i]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    /// `self · y`.
    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * y[j]).sum())
            .collect()
    }

    /// `selfᵀ · x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * x[i]).sum())
            .collect()
    }

    /// `selfᵀ · self`, useful for orthonormality checks.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        (0..self.cols)
            .map(|a| {
                (0..self.cols)
                    .map(|b| {
                        (0..self.rows)
                            .map(|i| self.get(i, a) * self.get(i, b))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// `Vᵀ M V` for a basis `V` with orthonormal (or arbitrary) columns.
pub fn congruence(m: &SymMatrix, v: &Mat) -> SymMatrix {
    let cols: Vec<Vec<f64>> = v.columns();
    let mv: Vec<Vec<f64>> = cols.iter().map(|c| m.mul_vec(c)).collect();
    SymMatrix::from_fn(v.cols(), |i, j| dot(&cols[i], &mv[j]))
}

/// Spectral decomposition with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub basis: Mat,
}

impl Spectrum {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.basis.col(k)
    }

    /// Eigenvectors whose eigenvalue magnitude is at most `tol`.
    pub fn null_vectors(&self, tol: f64) -> Vec<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() <= tol)
            .map(|(k, _)| self.vector(k))
            .collect()
    }

    /// `M⁺v`, dropping eigenvalues with `|λ| ≤ rank_tol`.
    pub fn pinv_mul(&self, v: &[f64], rank_tol: f64) -> Vec<f64> {
        let n = self.order();
        let mut out = vec![0.0; n];
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l.abs() <= rank_tol {
                continue;
            }
            let q = self.basis.col(k);
            let c = dot(&q, v) / l;
            out.iter_mut().zip(&q).for_each(|(o, qi)| *o += c * qi);
        }
        out
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// Sweeps run in fixed `(p, q)` order until the off-diagonal Frobenius norm
/// drops to `1e-14·‖M‖_∞`; the result is deterministic. Eigenvector signs are
/// normalized so the largest-magnitude component is positive.
pub fn eigh(m: &SymMatrix) -> Spectrum {
    let n = m.order();
    let mut a: Vec<Vec<f64>> = m.to_rows();
    let mut v = Mat::identity(n);
    let threshold = JACOBI_REL_TOL * m.norm_inf();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let eigenvalues = order.iter().map(|&k| a[k][k]).collect();
    let mut basis = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = v.col(src);
        let lead = col.iter().copied().fold(
            0.0_f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            basis.set(i, dst, sign * col[i]);
        }
    }
    Spectrum { eigenvalues, basis }
}

pub fn min_eig(m: &SymMatrix) -> f64 {
    eigh(m).min()
}

/// Result of [`pinv_apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct PinvSolution {
    pub solution: Vec<f64>,
    pub in_range: bool,
}

/// Rank cutoff shared by every pseudo-inverse: the PSD tolerance of `M`.
pub fn rank_tol(m: &SymMatrix) -> f64 {
    psd_tol(m.norm_inf())
}

/// `M⁺v` together with the range test `‖M(M⁺v) − v‖_∞ ≤ 1e-9·(1+‖v‖_∞)`.
pub fn pinv_apply(m: &SymMatrix, v: &[f64]) -> PinvSolution {
    pinv_apply_with(m, &eigh(m), v)
}

pub fn pinv_apply_with(m: &SymMatrix, spec: &Spectrum, v: &[f64]) -> PinvSolution {
    let solution = spec.pinv_mul(v, rank_tol(m));
    let residual = m
        .mul_vec(&solution)
        .iter()
        .zip(v)
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
    PinvSolution {
        in_range: residual <= RANGE_RTOL * (1.0 + norm_inf_vec(v)),
        solution,
    }
}

/// Orthonormal basis of `{x : bᵀx = 0}` as the columns of an `n×(n−1)`
/// matrix, taken from the Householder reflector mapping `b` onto the axis of
/// its largest-magnitude entry.
pub fn nullspace_basis(b: &[f64]) -> Result<Mat> {
    let n = b.len();
    let nb = dot(b, b).sqrt();
    if nb == 0.0 || !nb.is_finite() {
        return Err(GtrsError::Numerical(
            "null-space basis requested for the zero vector".into(),
        ));
    }
    let k = (0..n)
        .max_by(|&i, &j| b[i].abs().total_cmp(&b[j].abs()))
        .expect("nonempty");
    // u = b + sign(b_k)‖b‖e_k, H = I − 2uuᵀ/uᵀu; H e_j (j ≠ k) span b⊥.
    let mut u = b.to_vec();
    let sign = if b[k] < 0.0 { -1.0 } else { 1.0 };
    u[k] += sign * nb;
    let uu = dot(&u, &u);
    let mut v = Mat::zeros(n, n - 1);
    for (col, j) in (0..n).filter(|&j| j != k).enumerate() {
        for i in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            v.set(i, col, e - 2.0 * u[i] * u[j] / uu);
        }
    }
    Ok(v)
}

/// Output of [`maximize_min_eig_affine`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineEigMax {
    pub mu_best: f64,
    pub min_eig_best: f64,
    /// The search stopped on an unbounded side, either at `MU_CAP` or through
    /// the monotone shortcut; `mu_best` is then not a true maximizer.
    pub capped: bool,
}

/// Maximizes the concave function `μ ↦ λ_min(M₀ + μM₁)` over `domain`.
///
/// Bracketing starts at the point of the domain closest to zero and doubles
/// outward; golden-section then refines to `1e-10` in `μ`. When `M₁ ⪰ 1e-12·I`
/// (resp. `−M₁`) and the domain is unbounded above (below), bracketing stops
/// at the first `μ` with a positive minimum eigenvalue.
pub fn maximize_min_eig_affine(m0: &SymMatrix, m1: &SymMatrix, domain: MuInterval) -> AffineEigMax {
    let s1 = eigh(m1);
    let eps = 1e-12;
    let up_monotone = s1.min() >= eps;
    let down_monotone = s1.max() <= -eps;
    let f = |mu: f64| min_eig(&m0.add_scaled(m1, mu));
    let stop =
        |mu: f64, val: f64| val > 0.0 && ((mu > 0.0 && up_monotone) || (mu < 0.0 && down_monotone));
    let res = maximize_concave(f, domain, 1e-10, &stop);
    AffineEigMax {
        mu_best: res.arg,
        min_eig_best: res.value,
        capped: res.capped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ConcaveMax {
    pub arg: f64,
    pub value: f64,
    pub capped: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 − √5)/2

/// Maximizes a concave extended-valued function over a closed interval.
///
/// `abs_tol` is the final bracket width, relative to `1 + |μ|` at the bracket.
/// `stop(μ, value)` can end the outward expansion early.
pub(crate) fn maximize_concave<F, S>(f: F, domain: MuInterval, abs_tol: f64, stop: &S) -> ConcaveMax
where
    F: Fn(f64) -> f64,
    S: Fn(f64, f64) -> bool,
{
    let lo = domain.lo.max(-MU_CAP);
    let hi = domain.hi.min(MU_CAP);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let note = |x: f64, v: f64, best: &mut (f64, f64)| {
        if v > best.1 || best.0.is_nan() {
            *best = (x, v);
        }
    };

    let p = 0.0_f64.clamp(lo, hi);
    let fp = f(p);
    note(p, fp, &mut best);
    if lo == hi {
        return ConcaveMax {
            arg: p,
            value: fp,
            capped: false,
        };
    }

    let mut capped = false;
    let mut bracket = None;
    for dir in [1.0_f64, -1.0] {
        let limit = if dir > 0.0 { hi } else { lo };
        if (limit - p) * dir <= 0.0 {
            continue;
        }
        let first = if dir > 0.0 {
            (p + 1.0).min(hi)
        } else {
            (p - 1.0).max(lo)
        };
        let f_first = f(first);
        note(first, f_first, &mut best);
        if stop(first, f_first) {
            return ConcaveMax {
                arg: first,
                value: f_first,
                capped: true,
            };
        }
        if f_first <= fp {
            continue;
        }
        let (mut prev, mut cur, mut f_cur) = (p, first, f_first);
        let mut step = (first - p).abs();
        loop {
            if cur == limit {
                capped = limit.abs() == MU_CAP
                    && (if dir > 0.0 { domain.hi } else { -domain.lo }) > MU_CAP;
                bracket = Some((prev.min(cur), prev.max(cur)));
                break;
            }
            step *= 2.0;
            let next = if dir > 0.0 {
                (p + step).min(hi)
            } else {
                (p - step).max(lo)
            };
            let f_next = f(next);
            note(next, f_next, &mut best);
            if stop(next, f_next) {
                return ConcaveMax {
                    arg: next,
                    value: f_next,
                    capped: true,
                };
            }
            if f_next <= f_cur {
                bracket = Some((prev.min(next), prev.max(next)));
                break;
            }
            prev = cur;
            cur = next;
            f_cur = f_next;
        }
        break;
    }
    let (mut a, mut b) = bracket.unwrap_or(((p - 1.0).max(lo), (p + 1.0).min(hi)));

    let fa = f(a);
    note(a, fa, &mut best);
    let fb = f(b);
    note(b, fb, &mut best);
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    note(x1, f1, &mut best);
    note(x2, f2, &mut best);
    for _ in 0..300 {
        if b - a <= abs_tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            if x2 <= x1 {
                break;
            }
            f2 = f(x2);
            note(x2, f2, &mut best);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            if x1 >= x2 {
                break;
            }
            f1 = f(x1);
            note(x1, f1, &mut best);
        }
    }

    // Prefer the point of smallest |μ| among ties (0 when it is a maximizer).
    let (mut arg, mut value) = best;
    if p != arg && fp >= value - 1e-15 * (1.0 + value.abs()) {
        arg = p;
        value = fp;
    }
    ConcaveMax { arg, value, capped }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(spec: &Spectrum) -> SymMatrix {
        let n = spec.order();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| spec.basis.get(i, k) * spec.eigenvalues[k] * spec.basis.get(j, k))
                .sum()
        })
    }

    #[test]
    fn eigh_examples() {
        assert_eq!(
            eigh(&SymMatrix::diag(&[2.0, -1.0])).eigenvalues,
            vec![-1.0, 2.0]
        );
        let s = eigh(&SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert_eq!(eigh(&SymMatrix::diag(&[4.0])).eigenvalues, vec![4.0]);
    }

    #[test]
    fn eigh_reconstructs_dense_matrix() {
        let m = SymMatrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, -3.0, 0.0, 2.0],
            vec![-2.0, 0.0, 1.0, 1.0],
            vec![0.5, 2.0, 1.0, 0.0],
        ]);
        let s = eigh(&m);
        let r = reconstruct(&s);
        for i in 0..4 {
            for j in 0..4 {
                assert!((r.get(i, j) - m.get(i, j)).abs() < 1e-12);
            }
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pinv_examples() {
        let z = SymMatrix::zeros(1);
        let r = pinv_apply(&z, &[0.0]);
        assert_eq!(r.solution, vec![0.0]);
        assert!(r.in_range);
        assert!(!pinv_apply(&z, &[1.0]).in_range);
        let m = SymMatrix::diag(&[2.0, 0.0]);
        let r = pinv_apply(&m, &[4.0, 0.0]);
        assert!((r.solution[0] - 2.0).abs() < 1e-15 && r.solution[1] == 0.0);
        assert!(r.in_range);
        assert!(!pinv_apply(&m, &[4.0, 1e-3]).in_range);
    }

    #[test]
    fn nullspace_examples() {
        let v = nullspace_basis(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!((v.rows(), v.cols()), (3, 2));
        for c in v.columns() {
            assert!(c[2].abs() < 1e-15);
        }
        let g = v.gram();
        assert!((g[0][0] - 1.0).abs() < 1e-15 && g[0][1].abs() < 1e-15);

        let v = nullspace_basis(&[1.0]).unwrap();
        assert_eq!((v.rows(), v.cols()), (1, 0));

        let r = 0.5_f64.sqrt();
        let v = nullspace_basis(&[r, r]).unwrap();
        let c = v.col(0);
        assert!((c[0] * r + c[1] * r).abs() < 1e-15);
        assert!((dot(&c, &c) - 1.0).abs() < 1e-15);

        assert!(nullspace_basis(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn affine_max_examples() {
        let r = maximize_min_eig_affine(
            &SymMatrix::diag(&[0.0, 1.0]),
            &SymMatrix::diag(&[1.0, -1.0]),
            MuInterval::REAL_LINE,
        );
        assert!((r.mu_best - 0.5).abs() < 1e-10);
        assert!((r.min_eig_best - 0.5).abs() < 1e-10);

        let r = maximize_min_eig_affine(
            &SymMatrix::diag(&[-1.0]),
            &SymMatrix::diag(&[1.0]),
            MuInterval::new(0.0, f64::INFINITY),
        );
        assert!(r.mu_best - 1.0 >= 0.0);
        assert!(r.min_eig_best > 0.0);
        assert!(r.capped);

        let r = maximize_min_eig_affine(
            &SymMatrix::diag(&[1.0]),
            &SymMatrix::diag(&[0.0]),
            MuInterval::REAL_LINE,
        );
        assert_eq!(r.mu_best, 0.0);
        assert_eq!(r.min_eig_best, 1.0);
    }

    #[test]
    fn affine_max_respects_bounded_domain() {
        // λ_min = min(μ, 1 − μ) on [2, 5] peaks at the left end.
        let r = maximize_min_eig_affine(
            &SymMatrix::diag(&[0.0, 1.0]),
            &SymMatrix::diag(&[1.0, -1.0]),
            MuInterval::new(2.0, 5.0),
        );
        assert!((r.mu_best - 2.0).abs() < 1e-10);
        assert!((r.min_eig_best + 1.0).abs() < 1e-9);
    }

    #[test]
    fn congruence_matches_explicit_product() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let v = Mat::from_columns(2, &[vec![1.0, 1.0]]);
        assert_eq!(congruence(&m, &v).get(0, 0), 7.0);
    }
}
