//! Brute-force reference minimizer for desk-scale checks.
//!
//! Uses nothing but function values, exact line restrictions of quadratics
//! and scalar root finding; no eigen or pseudo-inverse code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degenerate::Ray;
use crate::error::{GtrsError, Precondition, Result};
use crate::model::{dot, ext_f64, GtrsInstance, Quadratic};

/// Start radii; the descent box is ten times the radius.
pub const RADII: [f64; 3] = [10.0, 100.0, 1000.0];
const BOX_FACTOR: f64 = 10.0;
const MAX_ITERS: usize = 3000;
const STALL_ITERS: usize = 12;
/// Unbounded growth multiplies the drop per radius step by about `10^p`,
/// `p ≥ 1`; a distant minimizer of a bounded instance gives a smaller ratio.
const GROWTH_RATIO: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    #[serde(with = "ext_f64")]
    pub best_value: f64,
    pub best_x: Vec<f64>,
    pub unbounded_suspected: bool,
    /// Best value per radius, `RADII` order.
    pub stage_values: Vec<f64>,
    /// A ray on which `h` stays in the band and `f → −∞`.
    pub ray: Option<Ray>,
}

type Intervals = Vec<(f64, f64)>;

/// `{t : p t² + q t + r ≤ 0}`.
fn sublevel(p: f64, q: f64, r: f64) -> Intervals {
    const INF: f64 = f64::INFINITY;
    if p == 0.0 {
        if q == 0.0 {
            return if r <= 0.0 { vec![(-INF, INF)] } else { vec![] };
        }
        let t = -r / q;
        return if q > 0.0 {
            vec![(-INF, t)]
        } else {
            vec![(t, INF)]
        };
    }
    let disc = q * q - 4.0 * p * r;
    if disc < 0.0 {
        return if p > 0.0 { vec![] } else { vec![(-INF, INF)] };
    }
    let sq = disc.sqrt();
    let w = -0.5 * (q + if q >= 0.0 { sq } else { -sq });
    let (mut t1, mut t2) = if w == 0.0 { (0.0, 0.0) } else { (w / p, r / w) };
    if t1 > t2 {
        std::mem::swap(&mut t1, &mut t2);
    }
    if p > 0.0 {
        vec![(t1, t2)]
    } else {
        vec![(-INF, t1), (t2, INF)]
    }
}

fn intersect(a: &Intervals, b: &Intervals) -> Intervals {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Parameters `t` with `alpha ≤ h(x + t·d) ≤ beta`.
fn band_set(inst: &GtrsInstance, x: &[f64], d: &[f64]) -> Intervals {
    let (p, q, r) = inst.h.along_line(x, d);
    let mut set = vec![(f64::NEG_INFINITY, f64::INFINITY)];
    if inst.beta.is_finite() {
        set = intersect(&set, &sublevel(p, q, r - inst.beta));
    }
    if inst.alpha.is_finite() {
        set = intersect(&set, &sublevel(-p, -q, inst.alpha - r));
    }
    set
}

struct Worker<'a> {
    inst: &'a GtrsInstance,
    half_width: f64,
    tol: f64,
    f_scale: f64,
    ray: Option<Ray>,
}

impl<'a> Worker<'a> {
    fn feasible(&self, x: &[f64]) -> bool {
        let hv = self.inst.h.eval(x);
        hv >= self.inst.alpha - self.tol && hv <= self.inst.beta + self.tol
    }

    /// Parameter range keeping `x + t·d` in the box.
    fn box_range(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (xi, di) in x.iter().zip(d) {
            if *di == 0.0 {
                continue;
            }
            let a = (-self.half_width - xi) / di;
            let b = (self.half_width - xi) / di;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        (lo.min(0.0), hi.max(0.0))
    }

    fn note_ray(&mut self, x: &[f64], d: &[f64], set: &Intervals, pf: f64, qf: f64) {
        if self.ray.is_some() {
            return;
        }
        let dd = dot(d, d);
        let curv = 1e-9 * self.f_scale * dd;
        let slope = 1e-9 * self.f_scale * dd.sqrt();
        for &(lo, hi) in set {
            for (end, dir) in [(hi, 1.0), (lo, -1.0)] {
                if end.is_infinite()
                    && (pf < -curv || (pf.abs() <= curv * 1e-3 && qf * dir < -slope))
                {
                    let start = if dir > 0.0 { lo } else { hi };
                    let start = if start.is_finite() { start } else { 0.0 };
                    self.ray = Some(Ray {
                        base: x.iter().zip(d).map(|(a, b)| a + start * b).collect(),
                        direction: d.iter().map(|v| v * dir).collect(),
                    });
                    return;
                }
            }
        }
    }

    /// Exact minimization of `f` along `x + t·d` over the band and box.
    fn line_min(&mut self, x: &[f64], fx: f64, d: &[f64]) -> Option<(Vec<f64>, f64)> {
        if d.iter().all(|v| *v == 0.0) {
            return None;
        }
        let set = band_set(self.inst, x, d);
        let (pf, qf, _) = self.inst.f.along_line(x, d);
        self.note_ray(x, d, &set, pf, qf);
        let (blo, bhi) = self.box_range(x, d);
        let set = intersect(&set, &vec![(blo, bhi)]);
        let phi = |t: f64| pf * t * t + qf * t;
        let mut best_t = 0.0;
        let mut best = 0.0;
        let mut consider = |t: f64| {
            if t.is_finite() && phi(t) < best {
                best = phi(t);
                best_t = t;
            }
        };
        for &(lo, hi) in &set {
            consider(lo);
            consider(hi);
            if pf > 0.0 {
                let v = -qf / (2.0 * pf);
                if v > lo && v < hi {
                    consider(v);
                }
            }
        }
        if best_t == 0.0 {
            return None;
        }
        let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + best_t * b).collect();
        let fy = self.inst.f.eval(&y);
        (fy < fx && self.feasible(&y)).then_some((y, fy))
    }

    /// Moves `y` back into the band along `∇h(y)`, smallest correction first.
    fn pull_back(&self, y: Vec<f64>) -> Option<Vec<f64>> {
        if self.feasible(&y) {
            return Some(y);
        }
        let g = self.inst.h.gradient(&y);
        let set = band_set(self.inst, &y, &g);
        let t = nearest(&set)?;
        let z: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a + t * b).collect();
        (self.feasible(&z) && z.iter().all(|v| v.abs() <= self.half_width)).then_some(z)
    }

    /// A gradient step tangent to the level set of `h`, then pulled back.
    fn tangent_step(&self, x: &[f64], fx: f64, step: &mut f64) -> Option<(Vec<f64>, f64)> {
        let gf = self.inst.f.gradient(x);
        let gh = self.inst.h.gradient(x);
        let hh = dot(&gh, &gh);
        let c = if hh > 0.0 { dot(&gf, &gh) / hh } else { 0.0 };
        let d: Vec<f64> = gf.iter().zip(&gh).map(|(a, b)| -(a - c * b)).collect();
        let dn = dot(&d, &d).sqrt();
        if dn == 0.0 {
            return None;
        }
        for _ in 0..40 {
            let y: Vec<f64> = x
                .iter()
                .zip(&d)
                .map(|(a, b)| (a + *step * b / dn).clamp(-self.half_width, self.half_width))
                .collect();
            if let Some(z) = self.pull_back(y) {
                let fz = self.inst.f.eval(&z);
                if fz < fx {
                    *step *= 2.0;
                    return Some((z, fz));
                }
            }
            *step *= 0.5;
            if *step < 1e-14 * (1.0 + self.half_width) {
                *step = 1e-14 * (1.0 + self.half_width);
                return None;
            }
        }
        None
    }

    fn descend(&mut self, mut x: Vec<f64>) -> (Vec<f64>, f64) {
        let n = x.len();
        let mut fx = self.inst.f.eval(&x);
        let mut step = 1.0;
        let mut stall = 0;
        let mut prev = x.clone();
        for _ in 0..MAX_ITERS {
            let start = fx;
            let anchor = x.clone();
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                if let Some((y, fy)) = self.line_min(&x, fx, &e) {
                    x = y;
                    fx = fy;
                }
            }
            let g: Vec<f64> = self.inst.f.gradient(&x).iter().map(|v| -v).collect();
            if let Some((y, fy)) = self.line_min(&x, fx, &g) {
                x = y;
                fx = fy;
            }
            if let Some((y, fy)) = self.tangent_step(&x, fx, &mut step) {
                x = y;
                fx = fy;
            }
            let pattern: Vec<f64> = x.iter().zip(&prev).map(|(a, b)| a - b).collect();
            if let Some((y, fy)) = self.line_min(&x, fx, &pattern) {
                x = y;
                fx = fy;
            }
            prev = anchor;
            if start - fx <= 1e-14 * (1.0 + fx.abs()) {
                stall += 1;
                if stall >= STALL_ITERS {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        (x, fx)
    }
}

fn nearest(set: &Intervals) -> Option<f64> {
    set.iter()
        .map(|&(lo, hi)| 0.0_f64.clamp(lo, hi))
        .filter(|t| t.is_finite())
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

/// A feasible point near `x0`, by root finding along `∇h` and then random
/// directions.
fn project_start(w: &Worker, x0: Vec<f64>, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    if w.feasible(&x0) {
        return Some(x0);
    }
    let n = x0.len();
    let mut dirs = vec![w.inst.h.gradient(&x0)];
    for _ in 0..24 {
        dirs.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    for d in dirs {
        if d.iter().all(|v| *v == 0.0) {
            continue;
        }
        let set = band_set(w.inst, &x0, &d);
        let (blo, bhi) = w.box_range(&x0, &d);
        let set = intersect(&set, &vec![(blo, bhi)]);
        // Prefer the middle of the nearest feasible interval.
        let Some(&(lo, hi)) = set.iter().min_by(|a, b| {
            0.0_f64
                .clamp(a.0, a.1)
                .abs()
                .total_cmp(&0.0_f64.clamp(b.0, b.1).abs())
        }) else {
            continue;
        };
        let t = if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            0.0_f64.clamp(lo, hi)
        };
        let x: Vec<f64> = x0.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        if w.feasible(&x) {
            return Some(x);
        }
        let t = 0.0_f64.clamp(lo, hi);
        let x: Vec<f64> = x0.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        if w.feasible(&x) {
            return Some(x);
        }
    }
    None
}

struct StartOutcome {
    x: Option<Vec<f64>>,
    value: f64,
    ray: Option<Ray>,
}

fn f_scale(f: &Quadratic) -> f64 {
    1.0 + f.quad.norm_inf() + f.lin.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn run_start(
    inst: &GtrsInstance,
    seed: u64,
    stage: usize,
    index: usize,
    budget: usize,
) -> StartOutcome {
    let radius = RADII[stage];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stage * budget + index) as u64);
    let n = inst.dim();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
    let mut w = Worker {
        inst,
        half_width: BOX_FACTOR * radius,
        tol: 1e-10 * inst.bound_scale().max(1.0),
        f_scale: f_scale(&inst.f),
        ray: None,
    };
    let Some(x) = project_start(&w, x0, &mut rng) else {
        return StartOutcome {
            x: None,
            value: f64::INFINITY,
            ray: None,
        };
    };
    let (x, value) = w.descend(x);
    StartOutcome {
        x: Some(x),
        value,
        ray: w.ray,
    }
}

/// Multistart projected descent for `inf f` over the band, in the boxes
/// `[−10R, 10R]ⁿ` for `R ∈ {10, 100, 1000}`.
///
/// `unbounded_suspected` is raised by a feasible ray of descent, or when the
/// per-radius optima keep falling: the last drop is material and at least
/// `GROWTH_RATIO` times the one before.
pub fn oracle_min_gtrs(inst: &GtrsInstance, seed: u64, budget: usize) -> Result<OracleResult> {
    let budget = budget.max(1);
    let mut best_value = f64::INFINITY;
    let mut best_x: Option<Vec<f64>> = None;
    let mut stage_values = Vec::with_capacity(RADII.len());
    let mut ray = None;
    for stage in 0..RADII.len() {
        let outcomes: Vec<StartOutcome> = (0..budget)
            .into_par_iter()
            .map(|i| run_start(inst, seed, stage, i, budget))
            .collect();
        let mut stage_best = f64::INFINITY;
        for o in outcomes {
            if ray.is_none() {
                ray = o.ray;
            }
            if let Some(x) = o.x {
                if o.value < stage_best {
                    stage_best = o.value;
                }
                if o.value < best_value {
                    best_value = o.value;
                    best_x = Some(x);
                }
            }
        }
        stage_values.push(stage_best);
    }
    let Some(best_x) = best_x else {
        return Err(GtrsError::Precondition(Precondition::Infeasible));
    };
    let ray_found = ray.is_some();
    let [v0, v1, v2] = [stage_values[0], stage_values[1], stage_values[2]];
    let d1 = v0 - v1;
    let d2 = v1 - v2;
    let growth = d2 > 1e-3 * (1.0 + v1.abs()) && d2 >= GROWTH_RATIO * d1.max(0.0);
    Ok(OracleResult {
        best_value: if ray_found {
            f64::NEG_INFINITY
        } else {
            best_value
        },
        best_x,
        unbounded_suspected: ray_found || growth,
        stage_values,
        ray,
    })
}

/// Searches for `x` with `f(x) < −1e-10` and `h(x)` in the band up to a
/// relative `1e-8`. Absence is not a proof.
pub fn oracle_system_search(
    f: &Quadratic,
    h: &Quadratic,
    alpha: f64,
    beta: f64,
    seed: u64,
    budget: usize,
) -> Option<Vec<f64>> {
    let inst = GtrsInstance::new(f.clone(), h.clone(), alpha, beta).ok()?;
    let res = oracle_min_gtrs(&inst, seed, budget).ok()?;
    let x = res.best_x;
    (f.eval(&x) < -1e-10 && inst.in_band(h.eval(&x), 1e-8 * inst.bound_scale().max(1.0)))
        .then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SymMatrix;

    fn q1(m: f64, lin: f64, k: f64) -> Quadratic {
        Quadratic::new(SymMatrix::diag(&[m]), vec![lin], k).unwrap()
    }

    #[test]
    fn sublevel_sets() {
        assert_eq!(sublevel(1.0, 0.0, -4.0), vec![(-2.0, 2.0)]);
        assert_eq!(sublevel(1.0, 0.0, 1.0), vec![]);
        assert_eq!(
            sublevel(-1.0, 0.0, 1.0),
            vec![(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)]
        );
        assert_eq!(sublevel(0.0, 2.0, -2.0), vec![(f64::NEG_INFINITY, 1.0)]);
        assert_eq!(
            sublevel(0.0, 0.0, 0.0),
            vec![(f64::NEG_INFINITY, f64::INFINITY)]
        );
    }

    #[test]
    fn e1_value() {
        let inst = GtrsInstance::new(q1(-1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        let r = oracle_min_gtrs(&inst, 0, 8).unwrap();
        assert!((r.best_value + 4.0).abs() < 1e-4);
        assert!((r.best_x[0].abs() - 2.0).abs() < 1e-4);
        assert!(!r.unbounded_suspected);
    }

    #[test]
    fn e3_value() {
        let f = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], -1.0).unwrap();
        let h = Quadratic::new(SymMatrix::identity(2), vec![0.0; 2], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, 1.0, 4.0).unwrap();
        let r = oracle_min_gtrs(&inst, 0, 8).unwrap();
        assert!(r.best_value.abs() < 1e-6);
    }

    #[test]
    fn linear_objective_on_annulus() {
        let inst = GtrsInstance::new(q1(0.0, 0.5, 0.0), q1(1.0, 0.0, 0.0), 1.0, 4.0).unwrap();
        let r = oracle_min_gtrs(&inst, 0, 8).unwrap();
        assert!((r.best_value + 2.0).abs() < 1e-8);
        assert!((r.best_x[0] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic() {
        let f = Quadratic::new(
            SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]),
            vec![0.3, -0.2],
            1.0,
        )
        .unwrap();
        let h = Quadratic::new(SymMatrix::diag(&[1.0, 2.0]), vec![0.0, 1.0], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, 1.0, 3.0).unwrap();
        assert_eq!(
            oracle_min_gtrs(&inst, 7, 6).unwrap(),
            oracle_min_gtrs(&inst, 7, 6).unwrap()
        );
    }

    #[test]
    fn detects_unbounded() {
        // f = −x₁², h = x₂: the band is a slab, x₁ is free.
        let f = Quadratic::new(SymMatrix::diag(&[-1.0, 0.0]), vec![0.0; 2], 0.0).unwrap();
        let h = Quadratic::new(SymMatrix::zeros(2), vec![0.0, 0.5], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, -1.0, 1.0).unwrap();
        let r = oracle_min_gtrs(&inst, 0, 4).unwrap();
        assert!(r.unbounded_suspected && r.ray.is_some());

        // f = −x₂ over the parabolic strip 0 ≤ x₁² − x₂ ≤ 1: no ray exists.
        let f = Quadratic::new(SymMatrix::zeros(2), vec![0.0, -0.5], 0.0).unwrap();
        let h = Quadratic::new(SymMatrix::diag(&[1.0, 0.0]), vec![0.0, -0.5], 0.0).unwrap();
        let inst = GtrsInstance::new(f, h, 0.0, 1.0).unwrap();
        let r = oracle_min_gtrs(&inst, 0, 4).unwrap();
        assert!(r.unbounded_suspected && r.ray.is_none());
    }

    #[test]
    fn infeasible_is_reported() {
        let inst = GtrsInstance::new(q1(1.0, 0.0, 0.0), q1(1.0, 0.0, 0.0), -3.0, -1.0).unwrap();
        assert!(oracle_min_gtrs(&inst, 0, 2).is_err());
    }

    #[test]
    fn system_search_examples() {
        let x =
            oracle_system_search(&q1(-1.0, 0.0, 0.0), &q1(0.0, 1.0, 0.0), -1.0, 1.0, 0, 4).unwrap();
        assert!(-x[0] * x[0] < 0.0 && (2.0 * x[0]).abs() <= 1.0);
        assert!(
            oracle_system_search(&q1(1.0, 0.0, 1.0), &q1(0.0, 1.0, 0.0), -1.0, 1.0, 0, 4).is_none()
        );
        assert!(
            oracle_system_search(&q1(-1.0, 0.0, 4.0), &q1(1.0, 0.0, 0.0), 1.0, 4.0, 0, 4).is_none()
        );
    }
}
