#![allow(dead_code)]

pub mod grid;

use gtrs::{GtrsInstance, Quadratic, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym(rng: &mut ChaCha8Rng, n: usize, w: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            m.set(i, j, rng.gen_range(-w..=w));
        }
    }
    m
}

pub fn vec_in(rng: &mut ChaCha8Rng, n: usize, w: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-w..=w)).collect()
}

pub fn quadratic(rng: &mut ChaCha8Rng, n: usize, w: f64) -> Quadratic {
    let m = sym(rng, n, w);
    let lin = vec_in(rng, n, w);
    let k = rng.gen_range(-w..=w);
    Quadratic::new(m, lin, k).unwrap()
}

/// Bounds drawn from `[−w, w]`, sorted.
pub fn bounds(rng: &mut ChaCha8Rng, w: f64) -> (f64, f64) {
    let (p, q): (f64, f64) = (rng.gen_range(-w..=w), rng.gen_range(-w..=w));
    (p.min(q), p.max(q))
}

/// `f`, `h` with entries uniform in `[−3, 3]` and bounds from the same law.
pub fn uniform_instance(rng: &mut ChaCha8Rng, n: usize) -> GtrsInstance {
    let f = quadratic(rng, n, 3.0);
    let h = quadratic(rng, n, 3.0);
    let (alpha, beta) = bounds(rng, 3.0);
    GtrsInstance::new(f, h, alpha, beta).unwrap()
}

pub fn q1(m: f64, lin: f64, k: f64) -> Quadratic {
    Quadratic::new(SymMatrix::diag(&[m]), vec![lin], k).unwrap()
}

/// f = −x², h = x², band [1, 4].
pub fn e1() -> GtrsInstance {
    GtrsInstance::new(q1(-1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap()
}

/// f = −x² + ½, h = 2x, band [−1, 1].
pub fn e2() -> GtrsInstance {
    GtrsInstance::new(q1(-1.0, 0.0, 0.5), q1(0.0, 1.0, 0.0), -1.0, 1.0).unwrap()
}

/// f = ‖x‖² − 1, h = ‖x‖², band [1, 4].
pub fn e3() -> GtrsInstance {
    let f = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], -1.0).unwrap();
    let h = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], 0.0).unwrap();
    GtrsInstance::new(f, h, 1.0, 4.0).unwrap()
}

/// `L Lᵀ + 0.2 I` with `L` uniform in `[−w, w]`.
pub fn spd(rng: &mut ChaCha8Rng, n: usize, w: f64) -> SymMatrix {
    let l: Vec<Vec<f64>> = (0..n).map(|_| vec_in(rng, n, w)).collect();
    SymMatrix::from_fn(n, |i, j| {
        let g: f64 = (0..n).map(|k| l[i][k] * l[j][k]).sum();
        g + if i == j { 0.2 } else { 0.0 }
    })
}

/// `s·((x − c)ᵀP(x − c) − rho)` as a quadratic.
pub fn ellipsoidal(p: &SymMatrix, c: &[f64], rho: f64, s: f64) -> Quadratic {
    let pc = p.mul_vec(c);
    let k = c.iter().zip(&pc).map(|(a, b)| a * b).sum::<f64>() - rho;
    Quadratic::new(p.scaled(s), pc.iter().map(|v| -s * v).collect(), s * k).unwrap()
}

/// Whether `{(x − c)ᵀP(x − c) ≤ rho}` lies in `[−half, half]ⁿ`.
pub fn ellipsoid_in_box(p: &SymMatrix, c: &[f64], rho: f64, half: f64) -> bool {
    if rho <= 0.0 {
        return true;
    }
    // Extent along axis i is sqrt(rho · (P⁻¹)ᵢᵢ); P is at most 2×2 here.
    let n = p.order();
    let inv_diag: Vec<f64> = match n {
        1 => vec![1.0 / p.get(0, 0)],
        2 => {
            let det = p.get(0, 0) * p.get(1, 1) - p.get(1, 0) * p.get(1, 0);
            vec![p.get(1, 1) / det, p.get(0, 0) / det]
        }
        _ => unimplemented!(),
    };
    (0..n).all(|i| c[i].abs() + (rho * inv_diag[i]).sqrt() < half)
}

/// S-lemma instances whose solution set of `f < 0, h ∈ band` can only lie
/// inside `[−half, half]ⁿ`: either `{f ≤ 0}` or the band set is a compact
/// ellipsoid there. The other function is uniform in `[−3, 3]`.
pub fn boxed_system(rng: &mut ChaCha8Rng, n: usize, half: f64) -> GtrsInstance {
    loop {
        let p = spd(rng, n, 2.0);
        let c = vec_in(rng, n, 4.0);
        let inst = if rng.gen_bool(0.5) {
            let rho = rng.gen_range(-1.0..=6.0);
            if !ellipsoid_in_box(&p, &c, rho, half) {
                continue;
            }
            let f = ellipsoidal(&p, &c, rho, 1.0);
            let h = quadratic(rng, n, 3.0);
            let (alpha, beta) = bounds(rng, 3.0);
            GtrsInstance::new(f, h, alpha, beta).unwrap()
        } else {
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let lo: f64 = rng.gen_range(-2.0..=4.0);
            let hi = lo + rng.gen_range(0.2..=4.0);
            if !ellipsoid_in_box(&p, &c, hi.max(0.0), half) {
                continue;
            }
            let h = ellipsoidal(&p, &c, 0.0, s);
            let (alpha, beta) = if s > 0.0 { (lo, hi) } else { (-hi, -lo) };
            let f = quadratic(rng, n, 3.0);
            GtrsInstance::new(f, h, alpha, beta).unwrap()
        };
        return inst;
    }
}

/// Constraint systems with a mix of Slater verdicts: uniform draws, and
/// semidefinite `h` with the band below, touching, or straddling its minimum.
pub fn slater_mix(rng: &mut ChaCha8Rng, n: usize) -> GtrsInstance {
    let f = quadratic(rng, n, 3.0);
    match rng.gen_range(0..4) {
        0 | 1 => uniform_instance(rng, n),
        k => {
            let mut p = spd(rng, n, 2.0);
            if k == 3 && n > 1 {
                // Rank deficient: h is constant along a direction.
                let v = vec_in(rng, n, 1.0);
                p = SymMatrix::from_fn(n, |i, j| v[i] * v[j]);
            }
            let c = vec_in(rng, n, 3.0);
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let h = ellipsoidal(&p, &c, 0.0, s);
            let width = rng.gen_range(0.1..=3.0);
            let (lo, hi) = match rng.gen_range(0..3) {
                0 => (
                    -width - rng.gen_range(0.1..=2.0),
                    -rng.gen_range(0.05..=0.1),
                ),
                1 => (-width, 0.0),
                _ => (-width, rng.gen_range(0.1..=2.0)),
            };
            let (alpha, beta) = if s > 0.0 { (lo, hi) } else { (-hi, -lo) };
            GtrsInstance::new(f, h, alpha, beta).unwrap()
        }
    }
}
