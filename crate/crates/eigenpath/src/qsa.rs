//! Quantum-simulated-annealing path analysis: coherent Gibbs states over a
//! classical objective, the rate identity tying `‖∂_βψ‖²` to energy
//! fluctuations, the discretization count `q*`, and the cost comparison
//! between the improved and prior annealing bounds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ham_path::{FfTerm, HamiltonianPath};
use crate::matrix::HermitianMatrix;
use crate::{CVector, Cplx, Error, Result};

/// Classical objective over a finite configuration space, shifted so the
/// uniform (β = 0) mean vanishes.
#[derive(Clone, Debug)]
pub struct ObjectiveFunction {
    values: Vec<f64>,
    /// Difference between the two smallest distinct values (0 when the
    /// objective is constant; operations that need it positive fail).
    gamma: f64,
    /// `max |E[σ]|` after the shift.
    e_max: f64,
    /// The subtracted uniform mean.
    shift: f64,
    /// Number of spins when built from an Ising specification (enables the
    /// single-flip Metropolis chain).
    n_spins: Option<usize>,
}

impl ObjectiveFunction {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        Self::with_spins(raw, None)
    }

    fn with_spins(raw: Vec<f64>, n_spins: Option<usize>) -> Result<Self> {
        let d = raw.len();
        if d < 2 {
            return Err(Error::Config("objective needs at least 2 configurations".into()));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("objective values must be finite".into()));
        }
        let shift = raw.iter().sum::<f64>() / d as f64;
        let values: Vec<f64> = raw.iter().map(|v| v - shift).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let lowest = sorted[0];
        let gamma = sorted
            .iter()
            .find(|v| **v > lowest)
            .map_or(0.0, |second| second - lowest);
        let e_max = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Ok(Self {
            values,
            gamma,
            e_max,
            shift,
            n_spins,
        })
    }

    /// Enumerate an Ising objective `E[σ] = Σ J_ij σ_i σ_j + Σ h_i σ_i`
    /// over all `2^n` spin configurations (σ_i ∈ {±1}).
    pub fn ising(n: usize, couplings: &[(usize, usize, f64)], fields: &[f64]) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::Config(format!("spin count {n} outside 1..=20")));
        }
        if fields.len() != n {
            return Err(Error::Config("need one field per spin".into()));
        }
        for &(i, j, _) in couplings {
            if i >= n || j >= n || i == j {
                return Err(Error::Config(format!("bad coupling ({i},{j})")));
            }
        }
        let d = 1usize << n;
        let spin = |cfg: usize, i: usize| if cfg >> i & 1 == 1 { 1.0 } else { -1.0 };
        let raw: Vec<f64> = (0..d)
            .map(|cfg| {
                let mut e = 0.0;
                for &(i, j, jij) in couplings {
                    e += jij * spin(cfg, i) * spin(cfg, j);
                }
                for (i, hi) in fields.iter().enumerate() {
                    e += hi * spin(cfg, i);
                }
                e
            })
            .collect();
        Self::with_spins(raw, Some(n))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

/// One point of the coherent Gibbs path.
#[derive(Clone, Debug)]
pub struct GibbsPathPoint {
    pub beta: f64,
    /// Real nonnegative amplitudes `e^{−βE/2}/√Z`.
    pub amplitudes: Vec<f64>,
    pub mean_energy: f64,
    pub partition: f64,
    pub log_partition: f64,
}

/// Coherent Gibbs state at inverse temperature `β ≥ 0`, computed with a
/// max-shift so large `β·E` cannot overflow.
pub fn coherent_gibbs(obj: &ObjectiveFunction, beta: f64) -> Result<GibbsPathPoint> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!("beta={beta} must be finite and >= 0")));
    }
    let exponents: Vec<f64> = obj.values().iter().map(|e| -beta * e).collect();
    let m = exponents.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
    let weights: Vec<f64> = exponents.iter().map(|&x| (x - m).exp()).collect();
    let total: f64 = weights.iter().sum();
    let log_partition = m + total.ln();
    let mean_energy = obj
        .values()
        .iter()
        .zip(&weights)
        .map(|(e, w)| e * w)
        .sum::<f64>()
        / total;
    let amplitudes: Vec<f64> = weights.iter().map(|w| (w / total).sqrt()).collect();
    Ok(GibbsPathPoint {
        beta,
        amplitudes,
        mean_energy,
        partition: log_partition.exp(),
        log_partition,
    })
}

/// Thermodynamic `⟨E⟩` and `⟨E²⟩ − ⟨E⟩²` at inverse temperature `β`.
pub fn mean_and_variance(obj: &ObjectiveFunction, beta: f64) -> Result<(f64, f64)> {
    let point = coherent_gibbs(obj, beta)?;
    let mut second = 0.0;
    for (e, a) in obj.values().iter().zip(&point.amplitudes) {
        second += e * e * a * a;
    }
    Ok((point.mean_energy, second - point.mean_energy * point.mean_energy))
}

/// Three-way evaluation of the rate identity
/// `‖∂_βψ‖² = (⟨E²⟩−⟨E⟩²)/4 = −∂_β⟨E⟩/4`.
#[derive(Clone, Copy, Debug)]
pub struct RateIdentity {
    /// Finite difference of the state vector.
    pub lhs_fd: f64,
    /// Variance form.
    pub rhs_variance: f64,
    /// Finite difference of the scalar mean energy.
    pub rhs_derivative: f64,
    /// Largest pairwise relative disagreement.
    pub rel_err: f64,
}

pub fn rate_identity_check(obj: &ObjectiveFunction, beta: f64, h: f64) -> Result<RateIdentity> {
    if h <= 0.0 {
        return Err(Error::Domain("step must be positive".into()));
    }
    let state = |b: f64| -> Result<Vec<f64>> { Ok(coherent_gibbs(obj, b)?.amplitudes) };
    let mean = |b: f64| -> Result<f64> { Ok(coherent_gibbs(obj, b)?.mean_energy) };

    // amplitudes are real nonnegative, so no gauge alignment is needed
    let (dpsi, dmean) = if beta >= h {
        let (pp, pm) = (state(beta + h)?, state(beta - h)?);
        let dpsi: Vec<f64> = pp
            .iter()
            .zip(&pm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        (dpsi, (mean(beta + h)? - mean(beta - h)?) / (2.0 * h))
    } else {
        // one-sided second-order stencil at the β = 0 boundary
        let (p0, p1, p2) = (state(beta)?, state(beta + h)?, state(beta + 2.0 * h)?);
        let dpsi: Vec<f64> = (0..p0.len())
            .map(|i| (-3.0 * p0[i] + 4.0 * p1[i] - p2[i]) / (2.0 * h))
            .collect();
        let dmean =
            (-3.0 * mean(beta)? + 4.0 * mean(beta + h)? - mean(beta + 2.0 * h)?) / (2.0 * h);
        (dpsi, dmean)
    };

    let lhs_fd: f64 = dpsi.iter().map(|x| x * x).sum();
    let (_, variance) = mean_and_variance(obj, beta)?;
    let rhs_variance = variance / 4.0;
    let rhs_derivative = -dmean / 4.0;

    let vals = [lhs_fd, rhs_variance, rhs_derivative];
    let hi = vals.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    let lo = vals.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1e-12);
    Ok(RateIdentity {
        lhs_fd,
        rhs_variance,
        rhs_derivative,
        rel_err: (hi - lo) / scale,
    })
}

/// Final inverse temperature `β_q = log(d/ε)/γ`.
pub fn beta_final(obj: &ObjectiveFunction, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Domain(format!("epsilon={epsilon} outside (0,1)")));
    }
    if obj.gamma() <= 0.0 {
        return Err(Error::Domain(
            "objective is constant: no spectral gap to anneal against".into(),
        ));
    }
    Ok((obj.len() as f64 / epsilon).ln() / obj.gamma())
}

/// The discretization count `q*` and its closed-form cap.
#[derive(Clone, Copy, Debug)]
pub struct QStar {
    /// `β_q·(⟨E⟩₀ − ⟨E⟩_{β_q})/(4ε)` evaluated thermodynamically.
    pub exact: f64,
    /// `β_q·E_M/(4ε)`.
    pub cap: f64,
}

pub fn q_star(obj: &ObjectiveFunction, beta_q: f64, epsilon: f64) -> Result<QStar> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Domain(format!("epsilon={epsilon} outside (0,1)")));
    }
    let mean_final = coherent_gibbs(obj, beta_q)?.mean_energy;
    // ⟨E⟩₀ = 0 by the construction-time shift
    Ok(QStar {
        exact: beta_q * (0.0 - mean_final) / (4.0 * epsilon),
        cap: beta_q * obj.e_max() / (4.0 * epsilon),
    })
}

/// The two annealing cost formulas given the worst `1/√Δ(β)`.
pub fn qsa_cost_formulas(
    beta_q: f64,
    e_max: f64,
    epsilon: f64,
    max_inv_sqrt_gap: f64,
    kappa_prime: f64,
) -> (f64, f64) {
    let t_qsa = kappa_prime * beta_q * e_max / (4.0 * epsilon) * max_inv_sqrt_gap;
    let q_old = beta_q * beta_q * e_max * e_max;
    let t_old = q_old * (q_old / epsilon).ln().max(0.0) / epsilon * max_inv_sqrt_gap;
    (t_qsa, t_old)
}

/// Evaluate both cost formulas against a gap profile `β → Δ(β)` sampled on
/// a uniform grid over `[0, β_q]`.
pub fn qsa_costs(
    obj: &ObjectiveFunction,
    epsilon: f64,
    gap_provider: &dyn Fn(f64) -> f64,
    kappa_prime: f64,
    grid: usize,
) -> Result<(f64, f64)> {
    let beta_q = beta_final(obj, epsilon)?;
    let n = grid.max(2);
    let mut max_inv_sqrt_gap = 0.0_f64;
    for k in 0..n {
        let beta = beta_q * k as f64 / (n - 1) as f64;
        let gap = gap_provider(beta);
        if gap <= 0.0 {
            return Err(Error::Domain(format!("gap {gap} at beta={beta} not positive")));
        }
        max_inv_sqrt_gap = max_inv_sqrt_gap.max(1.0 / gap.sqrt());
    }
    Ok(qsa_cost_formulas(
        beta_q,
        obj.e_max(),
        epsilon,
        max_inv_sqrt_gap,
        kappa_prime,
    ))
}

/// Spectral gap of the Metropolis chain at inverse temperature `β`,
/// computed brute-force: single-spin-flip proposals for Ising objectives,
/// uniform proposals over all other configurations otherwise. The chain is
/// reversible for the Gibbs distribution; the gap is `1 − λ₂` of the
/// transition matrix.
pub fn metropolis_gap(obj: &ObjectiveFunction, beta: f64) -> Result<f64> {
    let d = obj.len();
    if d > 1 << 12 {
        return Err(Error::Config(format!(
            "brute-force chain limited to 4096 configurations, got {d}"
        )));
    }
    let values = obj.values();
    let neighbors: Vec<Vec<usize>> = match obj.n_spins {
        Some(n) => (0..d)
            .map(|cfg| (0..n).map(|i| cfg ^ (1 << i)).collect())
            .collect(),
        None => (0..d)
            .map(|cfg| (0..d).filter(|&j| j != cfg).collect())
            .collect(),
    };
    // symmetrized transition matrix S = D^{1/2} P D^{-1/2},
    // S_ij = P_ij·e^{β(E_j − E_i)/2} for the Metropolis acceptance rule
    let mut s = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let prop = 1.0 / neighbors[i].len() as f64;
        let mut stay = 1.0;
        for &j in &neighbors[i] {
            let accept = (-beta * (values[j] - values[i])).exp().min(1.0);
            let p_ij = prop * accept;
            stay -= p_ij;
            s[(i, j)] = p_ij * (beta * (values[j] - values[i]) / 2.0).exp();
        }
        s[(i, i)] = stay;
    }
    let mut eigs: Vec<f64> = nalgebra::SymmetricEigen::new(s)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    Ok(1.0 - eigs[1])
}

/// Synthetic Hamiltonian path whose ground state at `s = β/β_q` is exactly
/// the coherent Gibbs state, with a prescribed gap:
/// `H(β) = Δ_target(β)·(I − |ψ(β)⟩⟨ψ(β)|)`. Frustration-free with a single
/// term, so the frustration-free bound machinery applies directly.
pub fn gibbs_rm_path(
    obj: &ObjectiveFunction,
    beta_q: f64,
    gap_target: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
) -> Result<HamiltonianPath> {
    if beta_q <= 0.0 {
        return Err(Error::Domain("beta_q must be positive".into()));
    }
    let obj = obj.clone();
    let dim = obj.len();
    let term = move |s: f64| {
        let beta = s * beta_q;
        let point = coherent_gibbs(&obj, beta).expect("beta in range by construction");
        let psi = CVector::from_iterator(dim, point.amplitudes.iter().map(|&a| Cplx::new(a, 0.0)));
        let projector = HermitianMatrix::outer(&psi);
        HermitianMatrix::identity(dim)
            .sub(&projector)
            .expect("matching dimensions")
            .scaled(gap_target(beta))
    };
    HamiltonianPath::frustration_free(vec![FfTerm::Analytic(Arc::new(term))])
}

// ── objective JSON documents ────────────────────────────────────────────

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct IsingDocument {
    pub n: usize,
    /// Triples `[i, j, J_ij]`.
    #[serde(default)]
    pub couplings: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub fields: Vec<f64>,
}

/// `{"values": [...]}` or `{"ising": {"n": .., "couplings": [...], "fields": [...]}}`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ObjectiveDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ising: Option<IsingDocument>,
}

impl ObjectiveFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ObjectiveDocument = serde_json::from_str(text)?;
        match (doc.values, doc.ising) {
            (Some(values), None) => Self::new(values),
            (None, Some(ising)) => {
                let fields = if ising.fields.is_empty() {
                    vec![0.0; ising.n]
                } else {
                    ising.fields
                };
                Self::ising(ising.n, &ising.couplings, &fields)
            }
            _ => Err(Error::Config(
                "objective document needs exactly one of 'values' or 'ising'".into(),
            )),
        }
    }
}
