//! Brute-force grid search for `f < 0, alpha ≤ h ≤ beta` over `[−10, 10]ⁿ`,
//! `n ≤ 2`, step `1e-3`.
//!
//! For `n = 2` each grid row is scanned through the exact solution sets of
//! the row quadratics; only grid points near those sets are evaluated.
#![allow(dead_code)]

use gtrs::GtrsInstance;

pub const HALF: f64 = 10.0;
pub const STEP: f64 = 1e-3;
pub const POINTS: i64 = 20_000;

fn coord(k: i64) -> f64 {
    -HALF + k as f64 * STEP
}

fn hit(inst: &GtrsInstance, x: &[f64]) -> bool {
    let hv = inst.h.eval(x);
    inst.f.eval(x) < 0.0 && hv >= inst.alpha && hv <= inst.beta
}

/// `{t : p t² + q t + r ≤ 0}` as closed intervals, slightly widened.
fn sublevel(p: f64, q: f64, r: f64) -> Vec<(f64, f64)> {
    const INF: f64 = f64::INFINITY;
    let pad = 1e-9 * (1.0 + p.abs() + q.abs() + r.abs());
    if p == 0.0 {
        if q == 0.0 {
            return if r <= pad { vec![(-INF, INF)] } else { vec![] };
        }
        let t = -r / q;
        return if q > 0.0 {
            vec![(-INF, t + pad)]
        } else {
            vec![(t - pad, INF)]
        };
    }
    let disc = q * q - 4.0 * p * r;
    if disc < 0.0 {
        return if p < 0.0 { vec![(-INF, INF)] } else { vec![] };
    }
    let sq = disc.sqrt();
    let w = -0.5 * (q + if q >= 0.0 { sq } else { -sq });
    let (t1, t2) = if w == 0.0 { (0.0, 0.0) } else { (w / p, r / w) };
    let (lo, hi) = (t1.min(t2) - pad, t1.max(t2) + pad);
    if p > 0.0 {
        vec![(lo, hi)]
    } else {
        vec![(-INF, lo + 2.0 * pad), (hi - 2.0 * pad, INF)]
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(p, q) in a {
        for &(r, s) in b {
            let (lo, hi) = (p.max(r), q.min(s));
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

fn row_hit(inst: &GtrsInstance, x1: f64) -> bool {
    let (f, h) = (&inst.f, &inst.h);
    let row = |q: &gtrs::Quadratic| {
        let p = q.quad.get(1, 1);
        let lin = 2.0 * (q.quad.get(1, 0) * x1 + q.lin[1]);
        let r = q.quad.get(0, 0) * x1 * x1 + 2.0 * q.lin[0] * x1 + q.constant;
        (p, lin, r)
    };
    let (fp, fq, fr) = row(f);
    let (hp, hq, hr) = row(h);
    let mut set = sublevel(fp, fq, fr);
    if inst.beta.is_finite() {
        set = intersect(&set, &sublevel(hp, hq, hr - inst.beta));
    }
    if inst.alpha.is_finite() {
        set = intersect(&set, &sublevel(-hp, -hq, inst.alpha - hr));
    }
    for (lo, hi) in set {
        let k_lo = (((lo + HALF) / STEP).ceil() as i64 - 1).max(0);
        let k_hi = (((hi + HALF) / STEP).floor() as i64 + 1).min(POINTS);
        if k_lo > k_hi {
            continue;
        }
        let mid = (k_lo + k_hi) / 2;
        let probe = [
            k_lo,
            k_lo + 1,
            k_lo + 2,
            mid - 1,
            mid,
            mid + 1,
            k_hi - 2,
            k_hi - 1,
            k_hi,
        ];
        if probe
            .iter()
            .filter(|k| (k_lo..=k_hi).contains(*k))
            .any(|&k| hit(inst, &[x1, coord(k)]))
        {
            return true;
        }
    }
    false
}

/// A grid point with `f < 0` inside the band, if one exists.
pub fn grid_counterexample(inst: &GtrsInstance) -> bool {
    match inst.dim() {
        1 => (0..=POINTS).any(|k| hit(inst, &[coord(k)])),
        2 => (0..=POINTS).any(|k| row_hit(inst, coord(k))),
        n => panic!("grid search supports n ≤ 2, got {n}"),
    }
}
