//! Adiabatic and eigenpath-traversal cost formulas used as comparison
//! baselines, plus a piecewise-exponential integrator that checks the
//! adiabatic bound empirically.

use serde::{Deserialize, Serialize};

use crate::ham_path::HamiltonianPath;
use crate::spectral::{self, decompose_path};
use crate::{CMatrix, CVector, Cplx, Error, Result};

/// Side-by-side cost figures for one path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostReport {
    /// Adiabatic bound `κ·max_s[‖Ḧ‖/(εΔ²), ‖Ḣ‖²/(εΔ³)]`.
    pub t_aqc: f64,
    /// Traversal cost `κ′·L^c·log(L/ε)/(ε·minΔ)` with the measured `L`.
    pub t_ept_c1: f64,
    pub t_ept_c2: f64,
    /// Traversal cost with the standard bound in place of `L`.
    pub t_ept_standard: f64,
    /// Closed-form total-cost bound of the randomized method.
    pub rm_bound: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub min_gap: f64,
    pub max_dh_norm: f64,
    pub max_ddh_norm: f64,
    pub length: f64,
    pub length_bound: f64,
}

/// The rigorous adiabatic cost bound, maximized pointwise over the grid.
pub fn t_aqc(path: &HamiltonianPath, epsilon: f64, kappa: f64, grid: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    if kappa <= 0.0 {
        return Err(Error::Domain("kappa must be positive".into()));
    }
    let report = spectral::compute_report(path, grid)?;
    let worst = report.samples.iter().fold(0.0_f64, |acc, p| {
        let first = p.ddh_norm / (epsilon * p.gap * p.gap);
        let second = p.dh_norm * p.dh_norm / (epsilon * p.gap.powi(3));
        acc.max(first.max(second))
    });
    Ok(kappa * worst)
}

/// Eigenpath-traversal cost `κ′·L^c·log(L/ε)/(ε·Δ_min)`, for `c ∈ {1,2}`.
/// Returns 0 at `L = 0`; the logarithm is clamped at 0 so costs stay
/// nonnegative when `L < ε`.
pub fn t_ept(length: f64, delta_min: f64, epsilon: f64, c: u8, kappa_prime: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(c == 1 || c == 2) {
        return Err(Error::Domain(format!("c must be 1 or 2, got {c}")));
    }
    if delta_min <= 0.0 {
        return Err(Error::Domain("gap must be positive".into()));
    }
    if length == 0.0 {
        return Ok(0.0);
    }
    if length < 0.0 {
        return Err(Error::Domain("path length must be nonnegative".into()));
    }
    let log_term = (length / epsilon).ln().max(0.0);
    Ok(kappa_prime * length.powi(c as i32) * log_term / (epsilon * delta_min))
}

/// Traversal cost with the standard bound substituted for the path length:
/// `κ′·max_s ‖Ḣ‖^c/(εΔ^{c+1})·log(‖Ḣ‖/(εΔ))`.
pub fn t_ept_standard(
    path: &HamiltonianPath,
    epsilon: f64,
    c: u8,
    kappa_prime: f64,
    grid: usize,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(c == 1 || c == 2) {
        return Err(Error::Domain(format!("c must be 1 or 2, got {c}")));
    }
    let report = spectral::compute_report(path, grid)?;
    Ok(report.samples.iter().fold(0.0_f64, |acc, p| {
        let log_term = (p.dh_norm / (epsilon * p.gap)).ln().max(0.0);
        let val = kappa_prime * p.dh_norm.powi(c as i32) / (epsilon * p.gap.powi(c as i32 + 1))
            * log_term;
        acc.max(val)
    }))
}

/// Piecewise-constant propagation: `state ← e^{−iH(s_k)·(T/steps)}·state`
/// over `k = 1..steps` with `s_k = k/steps`; returns `|⟨ψ(1)|state⟩|²`.
pub fn simulate_adiabatic(path: &HamiltonianPath, total_time: f64, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Domain("steps must be at least 1".into()));
    }
    if total_time < 0.0 {
        return Err(Error::Domain("total time must be nonnegative".into()));
    }
    let mut state: CVector = decompose_path(path, 0.0)?.ground_state();
    let dt = total_time / steps as f64;
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let h = path.eval_h(s)?;
        let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
        let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Cplx::from_polar(1.0, -l * dt)));
        state = &eig.eigenvectors * (phases * (eig.eigenvectors.adjoint() * state));
    }
    let target = decompose_path(path, 1.0)?.ground_state();
    Ok(target.dotc(&state).norm_sqr())
}

/// One refinement-controlled integration run.
#[derive(Clone, Copy, Debug)]
pub struct AdiabaticRun {
    pub fidelity: f64,
    pub steps: usize,
    /// `|F(steps) − F(steps/2)|` at the accepted resolution.
    pub refinement_delta: f64,
    pub converged: bool,
}

/// Double the step count until the final fidelity moves by less than
/// `tol`, starting from `initial_steps` and giving up at `max_steps`.
pub fn simulate_adiabatic_converged(
    path: &HamiltonianPath,
    total_time: f64,
    tol: f64,
    initial_steps: usize,
    max_steps: usize,
) -> Result<AdiabaticRun> {
    let mut steps = initial_steps.max(2);
    let mut fidelity = simulate_adiabatic(path, total_time, steps)?;
    loop {
        let next = steps * 2;
        let refined = simulate_adiabatic(path, total_time, next)?;
        let delta = (refined - fidelity).abs();
        if delta < tol {
            return Ok(AdiabaticRun {
                fidelity: refined,
                steps: next,
                refinement_delta: delta,
                converged: true,
            });
        }
        if next >= max_steps {
            return Ok(AdiabaticRun {
                fidelity: refined,
                steps: next,
                refinement_delta: delta,
                converged: false,
            });
        }
        steps = next;
        fidelity = refined;
    }
}

/// All baseline costs from one grid sweep.
pub fn cost_report(
    path: &HamiltonianPath,
    epsilon: f64,
    kappa: f64,
    kappa_prime: f64,
    grid: usize,
) -> Result<CostReport> {
    check_epsilon(epsilon)?;
    let report = spectral::compute_report(path, grid)?;
    let min_gap = report
        .samples
        .iter()
        .fold(f64::INFINITY, |a, p| a.min(p.gap));
    let max_dh = report.samples.iter().fold(0.0_f64, |a, p| a.max(p.dh_norm));
    let max_ddh = report.samples.iter().fold(0.0_f64, |a, p| a.max(p.ddh_norm));
    let worst = report.samples.iter().fold(0.0_f64, |acc, p| {
        let first = p.ddh_norm / (epsilon * p.gap * p.gap);
        let second = p.dh_norm * p.dh_norm / (epsilon * p.gap.powi(3));
        acc.max(first.max(second))
    });
    let rm_bound = kappa_prime * (max_ddh + 2.0 * max_dh) / (2.0 * epsilon * min_gap * min_gap);
    Ok(CostReport {
        t_aqc: kappa * worst,
        t_ept_c1: t_ept(report.length, min_gap, epsilon, 1, kappa_prime)?,
        t_ept_c2: t_ept(report.length, min_gap, epsilon, 2, kappa_prime)?,
        t_ept_standard: t_ept_standard(path, epsilon, 2, kappa_prime, grid)?,
        rm_bound,
        epsilon,
        kappa,
        kappa_prime,
        min_gap,
        max_dh_norm: max_dh,
        max_ddh_norm: max_ddh,
        length: report.length,
        length_bound: report.bound_improved,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Domain(format!("epsilon={epsilon} outside (0,1)")));
    }
    Ok(())
}
