//! Problem data and certificate forms shared by every solver module.
//!
//! A quadratic is stored as `q(x) = xᵀMx + 2mᵀx + k`; note the factor two on
//! the linear term, which the instance file format also follows (files store
//! `m`, not `2m`).

mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{GtrsError, Result};

pub use verify::verify_certificate;

/// PSD acceptance threshold: `λ_min ≥ −EPS_PSD·(1 + ‖M‖_∞)`.
pub const EPS_PSD: f64 = 1e-9;

/// Scale-relative PSD tolerance for a matrix with infinity norm `norm_inf`.
pub fn psd_tol(norm_inf: f64) -> f64 {
    EPS_PSD * (1.0 + norm_inf)
}

/// Dense symmetric matrix stored as its row-major lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            lower: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a row-major lower triangle (`n(n+1)/2` entries).
    pub fn from_lower(n: usize, lower: Vec<f64>) -> Result<Self> {
        let expected = n * (n + 1) / 2;
        if lower.len() != expected {
            return Err(GtrsError::DimensionMismatch {
                expected,
                got: lower.len(),
            });
        }
        if lower.iter().any(|v| !v.is_finite()) {
            return Err(GtrsError::NonFinite("matrix"));
        }
        Ok(Self { n, lower })
    }

    /// Builds from full rows, reading only the lower triangle.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_fn(rows.len(), |i, j| rows[i][j])
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Self { n, lower }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[tri_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[tri_index(i, j)] = v;
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            lower: self.lower.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let xi = x[i];
            s += self.get(i, i) * xi * xi;
            for j in 0..i {
                s += 2.0 * self.get(i, j) * xi * x[j];
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm_inf_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `q(x) = xᵀ·quad·x + 2·linᵀx + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub quad: SymMatrix,
    pub lin: Vec<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn new(quad: SymMatrix, lin: Vec<f64>, constant: f64) -> Result<Self> {
        if lin.len() != quad.order() {
            return Err(GtrsError::DimensionMismatch {
                expected: quad.order(),
                got: lin.len(),
            });
        }
        if lin.iter().any(|v| !v.is_finite()) {
            return Err(GtrsError::NonFinite("linear term"));
        }
        if !constant.is_finite() {
            return Err(GtrsError::NonFinite("constant"));
        }
        Ok(Self {
            quad,
            lin,
            constant,
        })
    }

    /// The constant quadratic `q ≡ k` in `n` variables.
    pub fn constant(n: usize, k: f64) -> Self {
        Self {
            quad: SymMatrix::zeros(n),
            lin: vec![0.0; n],
            constant: k,
        }
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(GtrsError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.eval(x))
    }

    /// Unchecked evaluation; `x` must have the right dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        self.quad.quad_form(x) + 2.0 * dot(&self.lin, x) + self.constant
    }

    /// `∇q(x) = 2(Mx + m)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.quad
            .mul_vec(x)
            .iter()
            .zip(&self.lin)
            .map(|(a, b)| 2.0 * (a + b))
            .collect()
    }

    /// Coefficients `(p, q, r)` with `q(x + t·d) = p·t² + q·t + r`.
    pub fn along_line(&self, x: &[f64], d: &[f64]) -> (f64, f64, f64) {
        let p = self.quad.quad_form(d);
        let g = self.gradient(x);
        (p, dot(&g, d), self.eval(x))
    }

    pub fn negated(&self) -> Self {
        Self {
            quad: self.quad.scaled(-1.0),
            lin: self.lin.iter().map(|v| -v).collect(),
            constant: -self.constant,
        }
    }

    /// `q − s`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            constant: self.constant - s,
            ..self.clone()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.quad.is_zero() && self.lin.iter().all(|&v| v == 0.0)
    }

    /// The homogenized `(n+1)×(n+1)` matrix `[[M, m], [mᵀ, k]]`.
    pub fn homogenized(&self) -> SymMatrix {
        let n = self.dim();
        SymMatrix::from_fn(n + 1, |i, j| {
            if i < n && j < n {
                self.quad.get(i, j)
            } else if i == n && j == n {
                self.constant
            } else {
                self.lin[i.min(j)]
            }
        })
    }
}

/// `inf f(x)` subject to `alpha ≤ h(x) ≤ beta`. Bounds may be infinite, which
/// encodes the single-inequality and equality systems.
#[derive(Debug, Clone, PartialEq)]
pub struct GtrsInstance {
    pub f: Quadratic,
    pub h: Quadratic,
    pub alpha: f64,
    pub beta: f64,
}

impl GtrsInstance {
    pub fn new(f: Quadratic, h: Quadratic, alpha: f64, beta: f64) -> Result<Self> {
        if f.dim() != h.dim() {
            return Err(GtrsError::DimensionMismatch {
                expected: f.dim(),
                got: h.dim(),
            });
        }
        if alpha.is_nan() || beta.is_nan() {
            return Err(GtrsError::NonFinite("bounds"));
        }
        if alpha > beta || alpha == f64::INFINITY || beta == f64::NEG_INFINITY {
            return Err(GtrsError::InvalidBounds { alpha, beta });
        }
        Ok(Self { f, h, alpha, beta })
    }

    /// The system `f < 0, h ≤ 0` as an instance with `alpha = −∞, beta = 0`.
    pub fn inequality_system(f: Quadratic, h: Quadratic) -> Result<Self> {
        Self::new(f, h, f64::NEG_INFINITY, 0.0)
    }

    /// The system `f < 0, h = 0` as an instance with `alpha = beta = 0`.
    pub fn equality_system(f: Quadratic, h: Quadratic) -> Result<Self> {
        Self::new(f, h, 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn constraint_is_quadratic(&self) -> bool {
        !self.h.quad.is_zero()
    }

    pub fn in_band(&self, hv: f64, tol: f64) -> bool {
        hv >= self.alpha - tol && hv <= self.beta + tol
    }

    /// Feasibility slack scale used for tolerances on `h`.
    pub fn bound_scale(&self) -> f64 {
        let fin = |v: f64| if v.is_finite() { v.abs() } else { 0.0 };
        1.0 + fin(self.alpha).max(fin(self.beta))
    }
}

/// Machine-checkable witnesses.
///
/// `Multiplier` and `ExceptionNu` certify `inf {f : alpha ≤ h ≤ beta} ≥ level`;
/// for S-lemma decisions `level` is zero. The multiplier uses the sign
/// convention `f − level + mu_minus·(h − beta) + mu_plus·(alpha − h) ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    Multiplier {
        mu: f64,
        mu_plus: f64,
        mu_minus: f64,
        #[serde(default)]
        level: f64,
    },
    ExceptionNu {
        nu: f64,
        matrix_min_eig: f64,
        #[serde(default)]
        level: f64,
    },
    Counterexample {
        x: Vec<f64>,
        f_value: f64,
        h_value: f64,
    },
    InfeasiblePrimal {},
    /// `h(base + t·d) ∈ [alpha, beta]` for all `t ≥ 0` and `f(base + t·d) → −∞`.
    UnboundedBelow {
        #[serde(default)]
        base: Option<Vec<f64>>,
        direction_hint: Option<Vec<f64>>,
    },
}

impl Certificate {
    pub fn multiplier(mu: f64) -> Self {
        Self::multiplier_at_level(mu, 0.0)
    }

    pub fn multiplier_at_level(mu: f64, level: f64) -> Self {
        Certificate::Multiplier {
            mu,
            mu_plus: mu.max(0.0),
            mu_minus: -(mu.min(0.0)),
            level,
        }
    }

    pub fn counterexample(inst: &GtrsInstance, x: Vec<f64>) -> Self {
        let f_value = inst.f.eval(&x);
        let h_value = inst.h.eval(&x);
        Certificate::Counterexample {
            x,
            f_value,
            h_value,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Multiplier { .. } => "Multiplier",
            Certificate::ExceptionNu { .. } => "ExceptionNu",
            Certificate::Counterexample { .. } => "Counterexample",
            Certificate::InfeasiblePrimal {} => "InfeasiblePrimal",
            Certificate::UnboundedBelow { .. } => "UnboundedBelow",
        }
    }
}

/// Infimum and supremum of a quadratic over all of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRange {
    #[serde(with = "ext_f64")]
    pub inf: f64,
    #[serde(with = "ext_f64")]
    pub sup: f64,
    pub inf_attained: bool,
    pub sup_attained: bool,
    pub argmin: Option<Vec<f64>>,
    pub argmax: Option<Vec<f64>>,
}

impl QuadRange {
    pub fn is_constant(&self) -> bool {
        self.inf == self.sup
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualStatus {
    Optimal,
    DualInfeasible,
}

/// Closed multiplier interval; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuInterval {
    #[serde(with = "ext_f64")]
    pub lo: f64,
    #[serde(with = "ext_f64")]
    pub hi: f64,
}

impl MuInterval {
    pub const REAL_LINE: MuInterval = MuInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, mu: f64) -> bool {
        mu >= self.lo && mu <= self.hi
    }

    pub fn intersect(&self, other: &MuInterval) -> Option<MuInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(MuInterval { lo, hi })
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// Solution of the univariate Lagrangian dual.
///
/// The multiplier sign convention here is the dual one: pencil `A + μB`,
/// positive `μ` pairs with the upper bound `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualResult {
    pub status: DualStatus,
    pub mu_star: Option<f64>,
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub psd_interval: Option<MuInterval>,
    pub hard_case: bool,
    /// Set when the search hit the `|μ| ≤ 1e12` cap on an unbounded side.
    #[serde(default)]
    pub capped: bool,
}

impl DualResult {
    pub fn infeasible(psd_interval: Option<MuInterval>) -> Self {
        Self {
            status: DualStatus::DualInfeasible,
            mu_star: None,
            value: f64::NEG_INFINITY,
            psd_interval,
            hard_case: false,
            capped: false,
        }
    }
}

/// Serde adapter writing `±inf` as the strings `"inf"` / `"-inf"`.
pub mod ext_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct ExtVisitor;

    impl<'de> Visitor<'de> for ExtVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

/// `Option<f64>` counterpart of [`ext_f64`].
pub mod ext_f64_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Ext(#[serde(with = "super::ext_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Ext).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Ext>::deserialize(d)?.map(|e| e.0))
    }
}

/// The instance file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    #[serde(rename = "A")]
    a_mat: Vec<f64>,
    a: Vec<f64>,
    c: f64,
    #[serde(rename = "B")]
    b_mat: Vec<f64>,
    b: Vec<f64>,
    d: f64,
    #[serde(with = "ext_f64")]
    alpha: f64,
    #[serde(with = "ext_f64")]
    beta: f64,
}

fn check_len(field: &str, got: usize, expected: usize) -> std::result::Result<(), String> {
    if got != expected {
        Err(format!(
            "field `{field}`: expected {expected} entries, got {got}"
        ))
    } else {
        Ok(())
    }
}

impl TryFrom<InstanceFile> for GtrsInstance {
    type Error = String;

    fn try_from(file: InstanceFile) -> std::result::Result<Self, String> {
        let n = file.n;
        let tri = n * (n + 1) / 2;
        check_len("A", file.a_mat.len(), tri)?;
        check_len("a", file.a.len(), n)?;
        check_len("B", file.b_mat.len(), tri)?;
        check_len("b", file.b.len(), n)?;
        let finite = |field: &str, vals: &[f64]| -> std::result::Result<(), String> {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(format!("field `{field}`: entries must be finite"))
            }
        };
        finite("A", &file.a_mat)?;
        finite("a", &file.a)?;
        finite("c", &[file.c])?;
        finite("B", &file.b_mat)?;
        finite("b", &file.b)?;
        finite("d", &[file.d])?;
        if file.alpha.is_nan() {
            return Err("field `alpha`: must not be nan".into());
        }
        if file.beta.is_nan() {
            return Err("field `beta`: must not be nan".into());
        }
        let f = Quadratic {
            quad: SymMatrix {
                n,
                lower: file.a_mat,
            },
            lin: file.a,
            constant: file.c,
        };
        let h = Quadratic {
            quad: SymMatrix {
                n,
                lower: file.b_mat,
            },
            lin: file.b,
            constant: file.d,
        };
        GtrsInstance::new(f, h, file.alpha, file.beta).map_err(|e| match e {
            GtrsError::InvalidBounds { alpha, beta } => {
                format!("fields `alpha`/`beta`: alpha = {alpha} exceeds beta = {beta}")
            }
            other => other.to_string(),
        })
    }
}

impl From<&GtrsInstance> for InstanceFile {
    fn from(inst: &GtrsInstance) -> Self {
        InstanceFile {
            n: inst.dim(),
            a_mat: inst.f.quad.lower.clone(),
            a: inst.f.lin.clone(),
            c: inst.f.constant,
            b_mat: inst.h.quad.lower.clone(),
            b: inst.h.lin.clone(),
            d: inst.h.constant,
            alpha: inst.alpha,
            beta: inst.beta,
        }
    }
}

impl Serialize for GtrsInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GtrsInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = InstanceFile::deserialize(d)?;
        GtrsInstance::try_from(file).map_err(serde::de::Error::custom)
    }
}
