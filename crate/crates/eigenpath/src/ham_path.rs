//! Parametrized Hermitian families `H(s)`, `s ∈ [0,1]`, with derivative
//! access `Ḣ(s)` and `Ḧ(s)`.
//!
//! Four kinds are supported:
//! - `Linear`: `(1−s)·H₀ + s·H_f`, derivatives exact.
//! - `Tabulated`: entrywise linear interpolation between samples; derivatives
//!   taken through sample nodes (so polynomial families are recovered
//!   exactly rather than differentiating the piecewise-linear interpolant).
//! - `FrustrationFree`: a sum of parametrized PSD terms `Π_k(s)`.
//! - `Analytic`: closures, optionally with closed-form derivatives (not
//!   representable in the JSON document format).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::HermitianMatrix;
use crate::{Error, Result};

/// Closure producing the operator at a given `s`.
pub type MatrixFn = Arc<dyn Fn(f64) -> HermitianMatrix + Send + Sync>;

/// How `eval_dh` / `eval_ddh` are computed for kinds without exact
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum DerivativeScheme {
    /// Use closed-form derivatives where the kind provides them.
    Analytic,
    /// Finite differences with the given steps for first and second
    /// derivatives. The second-derivative step is larger by default: at
    /// 1e-4 the roundoff of a second difference (~ε/h²) would already
    /// exceed the verification tolerances used downstream.
    CentralDifference { step: f64, step_second: f64 },
}

impl DerivativeScheme {
    pub fn central(step: f64) -> Self {
        DerivativeScheme::CentralDifference {
            step,
            step_second: step * 10.0,
        }
    }
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        DerivativeScheme::CentralDifference {
            step: 1e-4,
            step_second: 1e-3,
        }
    }
}

/// One term of a frustration-free family.
#[derive(Clone)]
pub enum FfTerm {
    Constant(HermitianMatrix),
    Samples(Vec<(f64, HermitianMatrix)>),
    Analytic(MatrixFn),
}

impl FfTerm {
    fn eval(&self, s: f64) -> Result<HermitianMatrix> {
        match self {
            FfTerm::Constant(m) => Ok(m.clone()),
            FfTerm::Samples(samples) => interpolate_samples(samples, s),
            FfTerm::Analytic(f) => Ok(f(s)),
        }
    }
}

#[derive(Clone)]
pub enum PathKind {
    Linear {
        h0: HermitianMatrix,
        hf: HermitianMatrix,
    },
    Tabulated {
        samples: Vec<(f64, HermitianMatrix)>,
    },
    FrustrationFree {
        terms: Vec<FfTerm>,
    },
    Analytic {
        eval: MatrixFn,
        deriv: Option<MatrixFn>,
        second: Option<MatrixFn>,
    },
}

/// A parametrized Hermitian family over `s ∈ [0,1]`.
///
/// Immutable after construction; evaluators are pure and safe for
/// concurrent use.
#[derive(Clone)]
pub struct HamiltonianPath {
    dim: usize,
    kind: PathKind,
    scheme: DerivativeScheme,
}

impl HamiltonianPath {
    pub fn linear(h0: HermitianMatrix, hf: HermitianMatrix) -> Result<Self> {
        if h0.dim() != hf.dim() {
            return Err(Error::Config(format!(
                "endpoint dimensions differ: {} vs {}",
                h0.dim(),
                hf.dim()
            )));
        }
        Ok(Self {
            dim: h0.dim(),
            kind: PathKind::Linear { h0, hf },
            scheme: DerivativeScheme::Analytic,
        })
    }

    pub fn tabulated(samples: Vec<(f64, HermitianMatrix)>) -> Result<Self> {
        validate_samples(&samples)?;
        let dim = samples[0].1.dim();
        Ok(Self {
            dim,
            kind: PathKind::Tabulated { samples },
            scheme: DerivativeScheme::default(),
        })
    }

    pub fn frustration_free(terms: Vec<FfTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("frustration-free path needs terms".into()));
        }
        let dim = terms[0].eval(0.0)?.dim();
        for (k, t) in terms.iter().enumerate() {
            if t.eval(0.0)?.dim() != dim {
                return Err(Error::Config(format!("term {k} dimension mismatch")));
            }
            if let FfTerm::Samples(s) = t {
                validate_samples(s)?;
            }
        }
        Ok(Self {
            dim,
            kind: PathKind::FrustrationFree { terms },
            scheme: DerivativeScheme::default(),
        })
    }

    pub fn analytic(dim: usize, eval: MatrixFn) -> Self {
        Self {
            dim,
            kind: PathKind::Analytic {
                eval,
                deriv: None,
                second: None,
            },
            scheme: DerivativeScheme::default(),
        }
    }

    pub fn analytic_with_derivatives(
        dim: usize,
        eval: MatrixFn,
        deriv: MatrixFn,
        second: MatrixFn,
    ) -> Self {
        Self {
            dim,
            kind: PathKind::Analytic {
                eval,
                deriv: Some(deriv),
                second: Some(second),
            },
            scheme: DerivativeScheme::Analytic,
        }
    }

    pub fn with_scheme(mut self, scheme: DerivativeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, PathKind::Linear { .. })
    }

    pub fn is_frustration_free(&self) -> bool {
        matches!(self.kind, PathKind::FrustrationFree { .. })
    }

    /// Frustration-free terms, if this path is of that kind.
    pub fn ff_terms(&self) -> Option<&[FfTerm]> {
        match &self.kind {
            PathKind::FrustrationFree { terms } => Some(terms),
            _ => None,
        }
    }

    /// Evaluate `H(s)`.
    pub fn eval_h(&self, s: f64) -> Result<HermitianMatrix> {
        check_range(s)?;
        match &self.kind {
            PathKind::Linear { h0, hf } => {
                if s == 0.0 {
                    Ok(h0.clone())
                } else if s == 1.0 {
                    Ok(hf.clone())
                } else {
                    HermitianMatrix::linear_combination(&[(1.0 - s, h0), (s, hf)])
                }
            }
            PathKind::Tabulated { samples } => interpolate_samples(samples, s),
            PathKind::FrustrationFree { terms } => {
                let mut acc = HermitianMatrix::zeros(self.dim);
                for t in terms {
                    let m = t.eval(s)?;
                    #[cfg(debug_assertions)]
                    debug_assert!(
                        m.is_psd(1e-10),
                        "frustration-free term not PSD at s={s}"
                    );
                    acc = acc.add(&m)?;
                }
                Ok(acc)
            }
            PathKind::Analytic { eval, .. } => Ok(eval(s)),
        }
    }

    /// Evaluate `Ḣ(s)`.
    pub fn eval_dh(&self, s: f64) -> Result<HermitianMatrix> {
        check_range(s)?;
        match &self.kind {
            PathKind::Linear { h0, hf } => hf.sub(h0),
            PathKind::Analytic {
                deriv: Some(d), ..
            } if self.scheme == DerivativeScheme::Analytic => Ok(d(s)),
            _ => self.fd_matrix(s, 1),
        }
    }

    /// Evaluate `Ḧ(s)`.
    pub fn eval_ddh(&self, s: f64) -> Result<HermitianMatrix> {
        check_range(s)?;
        match &self.kind {
            PathKind::Linear { .. } => Ok(HermitianMatrix::zeros(self.dim)),
            PathKind::Analytic {
                second: Some(d), ..
            } if self.scheme == DerivativeScheme::Analytic => Ok(d(s)),
            _ => self.fd_matrix(s, 2),
        }
    }

    /// Finite-difference node positions around `s` for a derivative of the
    /// given order. Tabulated paths take their sample s-values as nodes
    /// (interpolation is exact there); other kinds use a uniform stencil
    /// clipped to `[0,1]`.
    pub(crate) fn fd_nodes(&self, s: f64, order: usize) -> Vec<f64> {
        let count = if order == 1 { 5 } else { 7 };
        match &self.kind {
            PathKind::Tabulated { samples } => {
                let n = samples.len();
                let take = count.min(n);
                let pos = samples.partition_point(|(x, _)| *x < s);
                let start = pos.saturating_sub(take / 2).min(n - take);
                samples[start..start + take].iter().map(|(x, _)| *x).collect()
            }
            _ => {
                let step = match self.scheme {
                    DerivativeScheme::CentralDifference { step, step_second } => {
                        if order == 1 {
                            step
                        } else {
                            step_second
                        }
                    }
                    DerivativeScheme::Analytic => {
                        if order == 1 {
                            1e-4
                        } else {
                            1e-3
                        }
                    }
                };
                uniform_nodes(s, step, count, order == 2)
            }
        }
    }

    fn fd_matrix(&self, s: f64, order: usize) -> Result<HermitianMatrix> {
        let nodes = self.fd_nodes(s, order);
        let weights = fornberg_weights(&nodes, s, order);
        let mats: Vec<HermitianMatrix> = nodes
            .iter()
            .map(|&x| self.eval_h(x))
            .collect::<Result<_>>()?;
        let parts: Vec<(f64, &HermitianMatrix)> = weights[order]
            .iter()
            .copied()
            .zip(mats.iter())
            .collect();
        HermitianMatrix::linear_combination(&parts)
    }

    /// Scalar derivative of a function of `s` (e.g. the ground energy),
    /// using the same node policy as the matrix derivatives.
    pub fn scalar_derivative(
        &self,
        s: f64,
        order: usize,
        f: &mut dyn FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let nodes = self.fd_nodes(s, order);
        let weights = fornberg_weights(&nodes, s, order);
        let mut acc = 0.0;
        for (&x, &w) in nodes.iter().zip(weights[order].iter()) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

fn check_range(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s={s} outside [0,1]")));
    }
    Ok(())
}

fn validate_samples(samples: &[(f64, HermitianMatrix)]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::Config("tabulated path needs at least 2 samples".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config("sample grid must be strictly increasing".into()));
    }
    let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
    if first.abs() > 1e-12 || (last - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "sample grid must cover [0,1], got [{first}, {last}]"
        )));
    }
    let dim = samples[0].1.dim();
    if samples.iter().any(|(_, m)| m.dim() != dim) {
        return Err(Error::Config("sample dimensions differ".into()));
    }
    Ok(())
}

fn interpolate_samples(samples: &[(f64, HermitianMatrix)], s: f64) -> Result<HermitianMatrix> {
    let last = samples.len() - 1;
    if s <= samples[0].0 {
        return Ok(samples[0].1.clone());
    }
    if s >= samples[last].0 {
        return Ok(samples[last].1.clone());
    }
    let hi = samples.partition_point(|(x, _)| *x <= s);
    let (s0, m0) = &samples[hi - 1];
    let (s1, m1) = &samples[hi];
    let w = (s - s0) / (s1 - s0);
    HermitianMatrix::linear_combination(&[(1.0 - w, m0), (w, m1)])
}

/// Uniform stencil clipped to `[0,1]`. One-sided second-derivative
/// stencils carry large weights, so roundoff `~Σ|w|·ε/h²` would swamp the
/// verification tolerances at the default step; near the boundary the step
/// is widened instead (`widen_at_boundary`).
fn uniform_nodes(s: f64, step: f64, count: usize, widen_at_boundary: bool) -> Vec<f64> {
    let half = step * (count - 1) as f64 / 2.0;
    let step = if widen_at_boundary && (s < half || s > 1.0 - half) {
        step * 4.0
    } else {
        step
    };
    let span = step * (count - 1) as f64;
    let (step, span) = if span > 1.0 {
        (1.0 / (count - 1) as f64, 1.0)
    } else {
        (step, span)
    };
    let start = (s - span / 2.0).clamp(0.0, 1.0 - span);
    (0..count).map(|k| start + step * k as f64).collect()
}

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
///
/// Returns `w[m][j]`: the weight of `nodes[j]` for the `m`-th derivative at
/// `x`, for every `m ≤ max_order`. Exact for polynomials up to degree
/// `nodes.len() - 1`.
pub(crate) fn fornberg_weights(nodes: &[f64], x: f64, max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > max_order, "need more nodes than derivative order");
    let mut w = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x;
    w[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

// ── JSON path documents ─────────────────────────────────────────────────

/// Row-major nested arrays of `[re, im]` entry pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PathSample {
    pub s: f64,
    pub matrix: MatrixRows,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeDoc {
    Analytic,
    CentralDifference {
        step: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step_second: Option<f64>,
    },
}

/// On-disk description of a Hamiltonian path.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PathDocument {
    pub dim: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hf: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<PathSample>>,
    /// Shared s-grid for frustration-free term samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    /// One entry per term: either a single matrix (constant term) or one
    /// matrix per grid point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Vec<MatrixRows>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_scheme: Option<SchemeDoc>,
}

impl HamiltonianPath {
    pub fn from_document(doc: &PathDocument) -> Result<Self> {
        let dim = doc.dim;
        let mut path = match doc.kind.as_str() {
            "linear" => {
                let h0 = doc
                    .h0
                    .as_ref()
                    .ok_or_else(|| Error::Config("linear kind requires h0".into()))?;
                let hf = doc
                    .hf
                    .as_ref()
                    .ok_or_else(|| Error::Config("linear kind requires hf".into()))?;
                Self::linear(
                    HermitianMatrix::from_rows(dim, h0)?,
                    HermitianMatrix::from_rows(dim, hf)?,
                )?
            }
            "tabulated" => {
                let samples = doc
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated kind requires samples".into()))?;
                let parsed: Vec<(f64, HermitianMatrix)> = samples
                    .iter()
                    .map(|p| Ok((p.s, HermitianMatrix::from_rows(dim, &p.matrix)?)))
                    .collect::<Result<_>>()?;
                Self::tabulated(parsed)?
            }
            "frustration_free" => {
                let terms = doc
                    .terms
                    .as_ref()
                    .ok_or_else(|| Error::Config("frustration_free kind requires terms".into()))?;
                let mut parsed = Vec::with_capacity(terms.len());
                for t in terms {
                    if t.len() == 1 {
                        parsed.push(FfTerm::Constant(HermitianMatrix::from_rows(dim, &t[0])?));
                    } else {
                        let grid = doc.grid.as_ref().ok_or_else(|| {
                            Error::Config("sampled terms require a shared grid".into())
                        })?;
                        if grid.len() != t.len() {
                            return Err(Error::Config(format!(
                                "term has {} samples but grid has {} points",
                                t.len(),
                                grid.len()
                            )));
                        }
                        let samples: Vec<(f64, HermitianMatrix)> = grid
                            .iter()
                            .zip(t.iter())
                            .map(|(&s, m)| Ok((s, HermitianMatrix::from_rows(dim, m)?)))
                            .collect::<Result<_>>()?;
                        parsed.push(FfTerm::Samples(samples));
                    }
                }
                Self::frustration_free(parsed)?
            }
            other => {
                return Err(Error::Config(format!("unknown path kind '{other}'")));
            }
        };
        if let Some(scheme) = &doc.derivative_scheme {
            path = path.with_scheme(match scheme {
                SchemeDoc::Analytic => DerivativeScheme::Analytic,
                SchemeDoc::CentralDifference { step, step_second } => {
                    DerivativeScheme::CentralDifference {
                        step: *step,
                        step_second: step_second.unwrap_or(step * 10.0),
                    }
                }
            });
        }
        Ok(path)
    }

    pub fn to_document(&self) -> Result<PathDocument> {
        let scheme = Some(match &self.scheme {
            DerivativeScheme::Analytic => SchemeDoc::Analytic,
            DerivativeScheme::CentralDifference { step, step_second } => {
                SchemeDoc::CentralDifference {
                    step: *step,
                    step_second: Some(*step_second),
                }
            }
        });
        let mut doc = PathDocument {
            dim: self.dim,
            kind: String::new(),
            h0: None,
            hf: None,
            samples: None,
            grid: None,
            terms: None,
            derivative_scheme: scheme,
        };
        match &self.kind {
            PathKind::Linear { h0, hf } => {
                doc.kind = "linear".into();
                doc.h0 = Some(h0.to_rows());
                doc.hf = Some(hf.to_rows());
            }
            PathKind::Tabulated { samples } => {
                doc.kind = "tabulated".into();
                doc.samples = Some(
                    samples
                        .iter()
                        .map(|(s, m)| PathSample {
                            s: *s,
                            matrix: m.to_rows(),
                        })
                        .collect(),
                );
            }
            PathKind::FrustrationFree { terms } => {
                doc.kind = "frustration_free".into();
                let mut out = Vec::with_capacity(terms.len());
                let mut grid: Option<Vec<f64>> = None;
                for t in terms {
                    match t {
                        FfTerm::Constant(m) => out.push(vec![m.to_rows()]),
                        FfTerm::Samples(s) => {
                            grid = Some(s.iter().map(|(x, _)| *x).collect());
                            out.push(s.iter().map(|(_, m)| m.to_rows()).collect());
                        }
                        FfTerm::Analytic(_) => {
                            return Err(Error::Config(
                                "analytic terms cannot be serialized".into(),
                            ))
                        }
                    }
                }
                doc.grid = grid;
                doc.terms = Some(out);
            }
            PathKind::Analytic { .. } => {
                return Err(Error::Config("analytic paths cannot be serialized".into()))
            }
        }
        Ok(doc)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PathDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cplx;

    fn diag(entries: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(entries)
    }

    fn half_i_minus_x() -> HermitianMatrix {
        HermitianMatrix::from_fn(2, |i, j| {
            if i == j {
                Cplx::new(0.5, 0.0)
            } else {
                Cplx::new(-0.5, 0.0)
            }
        })
        .unwrap()
    }

    fn half_i_minus_z() -> HermitianMatrix {
        diag(&[0.0, 1.0])
    }

    fn max_entry_diff(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        (a.matrix() - b.matrix()).camax()
    }

    #[test]
    fn linear_endpoints_exact() {
        let path = HamiltonianPath::linear(diag(&[0.0, 1.0]), diag(&[1.0, 0.0])).unwrap();
        assert_eq!(path.eval_h(0.0).unwrap(), diag(&[0.0, 1.0]));
        assert_eq!(path.eval_h(1.0).unwrap(), diag(&[1.0, 0.0]));
        let mid = path.eval_h(0.5).unwrap();
        assert_eq!(mid, diag(&[0.5, 0.5]));
    }

    #[test]
    fn linear_qubit_midpoint_spectrum() {
        // (I − X/2 − Z/2)/2 has eigenvalues (1 ± 1/√2)/2
        let path = HamiltonianPath::linear(half_i_minus_x(), half_i_minus_z()).unwrap();
        let mid = path.eval_h(0.5).unwrap();
        let vals = mid.eigenvalues();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vals[0] - (1.0 - r) / 2.0).abs() < 1e-12, "{vals:?}");
        assert!((vals[1] - (1.0 + r) / 2.0).abs() < 1e-12, "{vals:?}");
    }

    #[test]
    fn out_of_range_rejected() {
        let path = HamiltonianPath::linear(diag(&[0.0, 1.0]), diag(&[1.0, 0.0])).unwrap();
        assert!(path.eval_h(-0.1).is_err());
        assert!(path.eval_h(1.1).is_err());
    }

    #[test]
    fn linear_derivatives_exact() {
        let path = HamiltonianPath::linear(diag(&[0.0, 1.0]), diag(&[1.0, 0.0])).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(path.eval_dh(s).unwrap(), diag(&[1.0, -1.0]));
            assert_eq!(path.eval_ddh(s).unwrap(), HermitianMatrix::zeros(2));
        }
    }

    #[test]
    fn constant_path_derivatives_vanish() {
        let h = half_i_minus_x();
        let path = HamiltonianPath::linear(h.clone(), h).unwrap();
        assert_eq!(path.eval_dh(0.4).unwrap(), HermitianMatrix::zeros(2));
    }

    #[test]
    fn tabulated_linear_family_derivative() {
        let h0 = half_i_minus_x();
        let hf = half_i_minus_z();
        let samples: Vec<(f64, HermitianMatrix)> = (0..=10)
            .map(|k| {
                let s = k as f64 / 10.0;
                (
                    s,
                    HermitianMatrix::linear_combination(&[(1.0 - s, &h0), (s, &hf)]).unwrap(),
                )
            })
            .collect();
        let path = HamiltonianPath::tabulated(samples).unwrap();
        let expect = hf.sub(&h0).unwrap();
        for s in [0.0, 0.37, 0.5, 1.0] {
            let dh = path.eval_dh(s).unwrap();
            assert!(
                max_entry_diff(&dh, &expect) < 1e-8,
                "dh mismatch at s={s}: {:.3e}",
                max_entry_diff(&dh, &expect)
            );
        }
    }

    #[test]
    fn tabulated_quadratic_second_derivative() {
        // H(s) = s²·A sampled on a grid; Ḧ must come back as 2A.
        let a = HermitianMatrix::from_fn(3, |i, j| Cplx::new((i + 2 * j) as f64, 0.0)).unwrap();
        let samples: Vec<(f64, HermitianMatrix)> = (0..=20)
            .map(|k| {
                let s = k as f64 / 20.0;
                (s, a.scaled(s * s))
            })
            .collect();
        let path = HamiltonianPath::tabulated(samples).unwrap();
        let expect = a.scaled(2.0);
        for s in [0.0, 0.33, 0.9, 1.0] {
            let ddh = path.eval_ddh(s).unwrap();
            assert!(
                max_entry_diff(&ddh, &expect) < 1e-6,
                "ddh mismatch at s={s}"
            );
        }
    }

    #[test]
    fn analytic_quadratic_second_derivative() {
        let a = HermitianMatrix::from_fn(2, |i, j| Cplx::new(1.0 + (i * j) as f64, 0.0)).unwrap();
        let a2 = a.clone();
        let path = HamiltonianPath::analytic(2, Arc::new(move |s| a2.scaled(s * s)));
        let expect = a.scaled(2.0);
        for s in [0.0, 0.25, 0.77, 1.0] {
            let ddh = path.eval_ddh(s).unwrap();
            assert!(
                max_entry_diff(&ddh, &expect) < 1e-8,
                "ddh mismatch at s={s}: {:.3e}",
                max_entry_diff(&ddh, &expect)
            );
        }
    }

    #[test]
    fn fd_consistency_second_order_rate() {
        // ‖dH/ds − (H(s+h) − H(s−h))/(2h)‖ → 0 at O(h²) for a smooth family.
        let a = half_i_minus_x();
        let b = half_i_minus_z();
        let eval = move |s: f64| {
            HermitianMatrix::linear_combination(&[((s * 1.3).cos(), &a), ((s * 0.7).sin(), &b)])
                .unwrap()
        };
        let path = HamiltonianPath::analytic(2, Arc::new(eval.clone()));
        let s = 0.5;
        let dh = path.eval_dh(s).unwrap();
        let mut prev_err = f64::INFINITY;
        for &h in &[1e-2, 5e-3, 2.5e-3] {
            let fd = HermitianMatrix::linear_combination(&[
                (1.0 / (2.0 * h), &eval(s + h)),
                (-1.0 / (2.0 * h), &eval(s - h)),
            ])
            .unwrap();
            let err = max_entry_diff(&dh, &fd);
            assert!(err < prev_err || err < 1e-10, "no decay: {err} vs {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn fornberg_recovers_classic_stencils() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(&nodes, 0.0, 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for k in 0..5 {
            assert!((w[1][k] - d1[k]).abs() < 1e-13, "d1[{k}]: {}", w[1][k]);
            assert!((w[2][k] - d2[k]).abs() < 1e-13, "d2[{k}]: {}", w[2][k]);
        }
    }

    #[test]
    fn json_round_trip_linear() {
        let path = HamiltonianPath::linear(half_i_minus_x(), half_i_minus_z()).unwrap();
        let text = path.to_json().unwrap();
        let back = HamiltonianPath::from_json(&text).unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.eval_h(0.0).unwrap(), half_i_minus_x());
        assert_eq!(back.eval_h(1.0).unwrap(), half_i_minus_z());
    }

    #[test]
    fn json_rejects_unknown_kind() {
        let text = r#"{"dim": 2, "kind": "mystery"}"#;
        assert!(HamiltonianPath::from_json(text).is_err());
    }

    #[test]
    fn tabulated_grid_must_cover_unit_interval() {
        let m = half_i_minus_x();
        let bad = vec![(0.1, m.clone()), (1.0, m.clone())];
        assert!(HamiltonianPath::tabulated(bad).is_err());
        let unordered = vec![(0.0, m.clone()), (0.5, m.clone()), (0.4, m)];
        assert!(HamiltonianPath::tabulated(unordered).is_err());
    }
}
