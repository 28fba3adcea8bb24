//! The randomization method, end to end: schedule construction from the
//! improved path-length bound, the randomized-evolution dephasing channel
//! (exact and Monte Carlo), per-step fidelity/coherence tracking, and the
//! verification of every step bound.
//!
//! One RM step evolves the state under the fixed Hamiltonian `H(s_j)` for
//! a random time, which in the eigenbasis multiplies each off-diagonal
//! element by the characteristic function of the time distribution at the
//! corresponding eigenvalue difference.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Normal};

use crate::ham_path::HamiltonianPath;
use crate::matrix::HermitianMatrix;
use crate::report::{anchors, BoundCheck, Scoreboard};
use crate::spectral::{
    self, align_phase, decompose_path, rate_norm_sq, simpson, PathLengthReport, SpectralData,
};
use crate::{CMatrix, Cplx, Error, Result};
#[cfg(test)]
use crate::CVector;

// ── random-time distributions ───────────────────────────────────────────

/// Law of the random evolution time of one RM step. Parameters are in
/// units of inverse energy.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeDistribution {
    Gaussian { mean: f64, sigma: f64 },
    OneSidedExponential { tau: f64 },
    /// Normal distribution conditioned on `t ≥ 0`.
    ShiftedTruncatedGaussian { mean: f64, sigma: f64 },
}

impl TimeDistribution {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            TimeDistribution::Gaussian { sigma, .. } => *sigma > 0.0,
            TimeDistribution::OneSidedExponential { tau } => *tau > 0.0,
            TimeDistribution::ShiftedTruncatedGaussian { sigma, .. } => *sigma > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("distribution scale must be positive".into()))
        }
    }

    /// Characteristic factor `φ(ω) = ∫ f(t) e^{−iωt} dt`.
    ///
    /// Gaussian: `e^{−iμω − σ²ω²/2}`; one-sided exponential:
    /// `1/(1 + iωτ)`. The truncated Gaussian has no elementary closed
    /// form; it is evaluated by deterministic quadrature.
    pub fn char_factor(&self, omega: f64) -> Cplx {
        if omega == 0.0 {
            return Cplx::new(1.0, 0.0);
        }
        match self {
            TimeDistribution::Gaussian { mean, sigma } => {
                let mag = (-0.5 * sigma * sigma * omega * omega).exp();
                Cplx::from_polar(mag, -mean * omega)
            }
            TimeDistribution::OneSidedExponential { tau } => {
                let d = 1.0 + omega * tau * omega * tau;
                Cplx::new(1.0 / d, -omega * tau / d)
            }
            TimeDistribution::ShiftedTruncatedGaussian { mean, sigma } => {
                truncated_gaussian_char(*mean, *sigma, omega)
            }
        }
    }

    /// Worst-case coherence reduction `sup_{|ω| ≥ Δ} |φ(ω)|`.
    ///
    /// For the Gaussian and exponential kinds `|φ|` decreases monotonically
    /// in `|ω|`, so the supremum is attained at `ω = Δ`. The truncated
    /// Gaussian is scanned numerically, with an integration-by-parts tail
    /// bound past the scan window.
    pub fn epsilon_prime(&self, delta_lower: f64) -> f64 {
        assert!(delta_lower > 0.0, "gap lower bound must be positive");
        match self {
            TimeDistribution::Gaussian { sigma, .. } => {
                (-0.5 * sigma * sigma * delta_lower * delta_lower).exp()
            }
            TimeDistribution::OneSidedExponential { tau } => {
                1.0 / (1.0 + delta_lower * tau * delta_lower * tau).sqrt()
            }
            TimeDistribution::ShiftedTruncatedGaussian { mean, sigma } => {
                // |φ| need not be monotone here: scan a window, then use
                // |φ(ω)| ≤ (f(0) + TV(f))/ω for the tail.
                let scan_end = delta_lower + 30.0 / sigma;
                let n = 600;
                let mut sup: f64 = 0.0;
                for k in 0..=n {
                    let w = delta_lower + (scan_end - delta_lower) * k as f64 / n as f64;
                    sup = sup.max(self.char_factor(w).norm());
                }
                let norm = 0.5 * libm::erfc(-mean / (sigma * std::f64::consts::SQRT_2));
                let f0 = gaussian_pdf(0.0, *mean, *sigma) / norm;
                let fmax = gaussian_pdf(mean.max(0.0), *mean, *sigma) / norm;
                let tail = (f0 + 2.0 * fmax) / scan_end;
                sup.max(tail).min(1.0)
            }
        }
    }

    /// Expected absolute evolution time `E|t|` of one step.
    pub fn mean_abs_time(&self) -> f64 {
        match self {
            TimeDistribution::Gaussian { mean, sigma } => {
                let m = mean / sigma;
                let sqrt_2_pi = (2.0 / std::f64::consts::PI).sqrt();
                sigma * sqrt_2_pi * (-0.5 * m * m).exp()
                    + mean * libm::erf(m / std::f64::consts::SQRT_2)
            }
            TimeDistribution::OneSidedExponential { tau } => *tau,
            TimeDistribution::ShiftedTruncatedGaussian { mean, sigma } => {
                // mean of a normal conditioned on t ≥ 0
                let m = mean / sigma;
                let phi = (-0.5 * m * m).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let cdf = 0.5 * libm::erfc(-m / std::f64::consts::SQRT_2);
                mean + sigma * phi / cdf
            }
        }
    }

    /// Draw one evolution time.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            TimeDistribution::Gaussian { mean, sigma } => {
                rng.sample(Normal::new(*mean, *sigma).expect("validated parameters"))
            }
            TimeDistribution::OneSidedExponential { tau } => {
                rng.sample(Exp::new(1.0 / tau).expect("validated parameters"))
            }
            TimeDistribution::ShiftedTruncatedGaussian { mean, sigma } => {
                let normal = Normal::new(*mean, *sigma).expect("validated parameters");
                loop {
                    let t = rng.sample(normal);
                    if t >= 0.0 {
                        return t;
                    }
                }
            }
        }
    }
}

fn gaussian_pdf(t: f64, mean: f64, sigma: f64) -> f64 {
    let z = (t - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// `∫₀^∞ f(t) e^{−iωt} dt` for the truncated Gaussian by composite Simpson
/// with oscillation-resolving resolution.
fn truncated_gaussian_char(mean: f64, sigma: f64, omega: f64) -> Cplx {
    let upper = (mean + 12.0 * sigma).max(12.0 * sigma);
    let per_period = 24.0;
    let periods = (upper * omega.abs() / (2.0 * std::f64::consts::PI)).ceil();
    let n = ((periods * per_period) as usize).clamp(2000, 400_000) | 1;
    let h = upper / (n - 1) as f64;
    let norm = 0.5 * libm::erfc(-mean / (sigma * std::f64::consts::SQRT_2));
    let mut acc = Cplx::new(0.0, 0.0);
    for k in 0..n {
        let t = k as f64 * h;
        let w = if k == 0 || k == n - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += Cplx::from_polar(gaussian_pdf(t, mean, sigma), -omega * t) * w;
    }
    acc * h / (3.0 * norm)
}

// ── distribution policies ───────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistKind {
    Gaussian,
    OneSidedExponential,
    ShiftedTruncatedGaussian,
}

/// Maps the per-step gap to distribution parameters: scale parameters are
/// `sigma_scale/Δ` (and `mean_scale/Δ` where a mean applies).
#[derive(Clone, Copy, Debug)]
pub struct DistPolicy {
    pub kind: DistKind,
    pub sigma_scale: f64,
    pub mean_scale: f64,
}

impl DistPolicy {
    /// Zero-mean Gaussian with `σ = √(2 ln 3)/Δ`, giving `ε′ = 1/3`.
    pub fn gaussian_third() -> Self {
        Self {
            kind: DistKind::Gaussian,
            sigma_scale: (2.0 * 3.0f64.ln()).sqrt(),
            mean_scale: 0.0,
        }
    }

    /// One-sided exponential with `τ = √8/Δ`, giving `ε′ = 1/3`.
    pub fn exponential_third() -> Self {
        Self {
            kind: DistKind::OneSidedExponential,
            sigma_scale: 8.0f64.sqrt(),
            mean_scale: 0.0,
        }
    }

    pub fn with_sigma_scale(mut self, scale: f64) -> Self {
        self.sigma_scale = scale;
        self
    }

    pub fn for_gap(&self, gap: f64) -> TimeDistribution {
        let dist = match self.kind {
            DistKind::Gaussian => TimeDistribution::Gaussian {
                mean: self.mean_scale / gap,
                sigma: self.sigma_scale / gap,
            },
            DistKind::OneSidedExponential => TimeDistribution::OneSidedExponential {
                tau: self.sigma_scale / gap,
            },
            DistKind::ShiftedTruncatedGaussian => TimeDistribution::ShiftedTruncatedGaussian {
                mean: self.mean_scale / gap,
                sigma: self.sigma_scale / gap,
            },
        };
        dist.validate().expect("policy scales are positive");
        dist
    }

    /// Per-step cost constant: `E|t|·Δ`, the policy's effective κ′ (for the
    /// default Gaussian policy, `√(2 ln 3)·√(2/π)`).
    pub fn step_cost_constant(&self) -> f64 {
        self.for_gap(1.0).mean_abs_time()
    }
}

// ── schedule ────────────────────────────────────────────────────────────

/// Uniform discretization with `δs = ε/(L*)²` and the last point clamped
/// to 1.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub epsilon: f64,
    pub delta_s: f64,
    pub steps: usize,
    pub points: Vec<f64>,
    pub l_star: f64,
}

pub fn build_schedule(l_star: f64, epsilon: f64) -> Result<Schedule> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Domain(format!("epsilon={epsilon} outside (0,1)")));
    }
    if l_star < 0.0 {
        return Err(Error::Domain("path length bound must be nonnegative".into()));
    }
    let ratio = l_star * l_star / epsilon;
    let steps = if ratio <= 1.0 {
        1
    } else {
        (ratio - 1e-12).ceil() as usize
    };
    let delta_s = epsilon / (l_star * l_star).max(epsilon);
    let mut points: Vec<f64> = (1..=steps).map(|j| (j as f64 * delta_s).min(1.0)).collect();
    *points.last_mut().expect("at least one step") = 1.0;
    Ok(Schedule {
        epsilon,
        delta_s,
        steps,
        points,
        l_star,
    })
}

// ── the randomized-evolution channel ────────────────────────────────────

/// Exact dephasing channel: in the eigenbasis of `H(s_{j+1})` every matrix
/// element is scaled by `φ(λ_a − λ_b)`. Trace-preserving, and positivity-
/// preserving because `φ` is a characteristic function.
pub fn randomized_step_exact(
    rho: &CMatrix,
    spectral: &SpectralData,
    dist: &TimeDistribution,
) -> CMatrix {
    let v = &spectral.eigenvectors;
    let mut in_basis = v.adjoint() * rho * v;
    let d = spectral.eigenvalues.len();
    for a in 0..d {
        for b in 0..d {
            if a != b {
                in_basis[(a, b)] *=
                    dist.char_factor(spectral.eigenvalues[a] - spectral.eigenvalues[b]);
            }
        }
    }
    v * in_basis * v.adjoint()
}

/// Monte Carlo realization of the same channel: averages the conjugation
/// over `n_samples` sampled times, with propagators built from the
/// eigendecomposition of `H`. Deterministic for a fixed seed.
pub fn randomized_step_mc(
    rho: &CMatrix,
    h: &HermitianMatrix,
    dist: &TimeDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<CMatrix> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    dist.validate()?;
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let v = &eig.eigenvectors;
    let in_basis = v.adjoint() * rho * v;
    let d = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Average the per-element phase factors e^{−i(λ_a−λ_b)t} over samples.
    let mut phase_mean = CMatrix::zeros(d, d);
    for _ in 0..n_samples {
        let t = dist.sample(&mut rng);
        for a in 0..d {
            for b in 0..d {
                phase_mean[(a, b)] +=
                    Cplx::from_polar(1.0, -(eig.eigenvalues[a] - eig.eigenvalues[b]) * t);
            }
        }
    }
    phase_mean /= Cplx::new(n_samples as f64, 0.0);
    let averaged = in_basis.component_mul(&phase_mean);
    Ok(v * averaged * v.adjoint())
}

// ── the full method ─────────────────────────────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmMode {
    Exact,
    Mc { n_samples: usize },
}

/// Tunables for [`run_rm`]; the defaults match the experiment setup used
/// throughout.
#[derive(Clone, Copy, Debug)]
pub struct RmOptions {
    /// Grid for the `L*` quadrature that fixes the schedule.
    pub l_star_grid: usize,
    /// Simpson points per step for the angle-bound integrals.
    pub substep_points: usize,
}

impl Default for RmOptions {
    fn default() -> Self {
        Self {
            l_star_grid: 501,
            substep_points: 5,
        }
    }
}

/// Per-step trace of the method.
#[derive(Clone, Debug)]
pub struct RmStepRow {
    pub j: usize,
    pub s: f64,
    pub gap: f64,
    pub alpha: f64,
    /// Angle bound rhs: `(s_j − s_{j−1})·∫‖ψ̇‖²` over the step.
    pub sin2_bound: f64,
    /// Arc bound: `∫‖ψ̇‖` over the step (upper bound on `sin α_j`).
    pub arc_bound: f64,
    pub pr: f64,
    pub coherence: f64,
    /// Geometric recursion rhs for `c_j`.
    pub coherence_bound: f64,
    pub eps_prime: f64,
    pub step_cost: f64,
    pub cum_cost: f64,
}

/// Outcome of one full RM run.
#[derive(Clone, Debug)]
pub struct RmReport {
    pub rows: Vec<RmStepRow>,
    pub epsilon: f64,
    pub l_star: f64,
    pub delta_s: f64,
    pub final_fidelity: f64,
    /// `1 − ε − 2εε′/((1−ε)(1−ε′))` with the worst per-step `ε′`.
    pub fidelity_bound: f64,
    pub sum_sin2: f64,
    pub total_cost: f64,
    /// `(L*)²/(ε·min Δ)`.
    pub cost_lstar_form: f64,
    /// Closed-form total-cost bound `κ′·(max‖Ḧ‖+2max‖Ḣ‖)/(2ε·minΔ²)`,
    /// evaluated with the policy's per-step cost constant as κ′.
    pub cost_closed_form: f64,
    pub kappa_prime: f64,
    pub min_gap: f64,
}

/// Run the RM with the schedule derived from the improved bound.
pub fn run_rm(
    path: &HamiltonianPath,
    epsilon: f64,
    policy: &DistPolicy,
    mode: RmMode,
    seed: u64,
) -> Result<RmReport> {
    run_rm_with(path, epsilon, policy, mode, seed, RmOptions::default())
}

pub fn run_rm_with(
    path: &HamiltonianPath,
    epsilon: f64,
    policy: &DistPolicy,
    mode: RmMode,
    seed: u64,
    options: RmOptions,
) -> Result<RmReport> {
    let grid_report = spectral::compute_report(path, options.l_star_grid)?;
    let schedule = build_schedule(grid_report.bound_improved, epsilon)?;
    run_rm_schedule(path, &schedule, &grid_report, policy, mode, seed, options)
}

/// Run the RM on an explicit schedule (used both by [`run_rm`] and by
/// tests that inject deliberately coarse discretizations).
pub fn run_rm_schedule(
    path: &HamiltonianPath,
    schedule: &Schedule,
    grid_report: &PathLengthReport,
    policy: &DistPolicy,
    mode: RmMode,
    seed: u64,
    options: RmOptions,
) -> Result<RmReport> {
    let substeps = options.substep_points.max(3) | 1;

    let sd0 = decompose_path(path, 0.0)?;
    let mut prev_state = sd0.ground_state();
    let mut prev_s = 0.0;
    let mut prev_rate_sq = {
        let dh = path.eval_dh(0.0)?;
        rate_norm_sq(&sd0, &dh)
    };
    let mut rho = &prev_state * prev_state.adjoint();

    let mut rows = Vec::with_capacity(schedule.steps);
    let mut recursion = 0.0_f64;
    let mut cum_cost = 0.0;
    let mut sum_sin2 = 0.0;
    let mut min_gap = f64::INFINITY;

    for (idx, &s_j) in schedule.points.iter().enumerate() {
        let sd = decompose_path(path, s_j)?;
        min_gap = min_gap.min(sd.gap);
        let psi = align_phase(&prev_state, &sd.ground_state());

        let cos_alpha = prev_state.dotc(&psi).norm().min(1.0);
        let sin2 = (1.0 - cos_alpha * cos_alpha).max(0.0);
        let alpha = cos_alpha.acos();

        // Angle-bound integrals over [s_{j−1}, s_j].
        let width = s_j - prev_s;
        let mut rate_sq = Vec::with_capacity(substeps);
        rate_sq.push(prev_rate_sq);
        for k in 1..substeps {
            let x = prev_s + width * k as f64 / (substeps - 1) as f64;
            let sdx = if k == substeps - 1 {
                sd.clone()
            } else {
                decompose_path(path, x)?
            };
            let dh = path.eval_dh(x)?;
            rate_sq.push(rate_norm_sq(&sdx, &dh));
        }
        let int_rate_sq = simpson(&rate_sq, prev_s, s_j);
        let rates: Vec<f64> = rate_sq.iter().map(|r| r.sqrt()).collect();
        let arc_bound = simpson(&rates, prev_s, s_j);
        let sin2_bound = width * int_rate_sq;

        let dist = policy.for_gap(sd.gap);
        let eps_prime = dist.epsilon_prime(sd.gap);
        rho = match mode {
            RmMode::Exact => randomized_step_exact(&rho, &sd, &dist),
            RmMode::Mc { n_samples } => {
                let h = path.eval_h(s_j)?;
                randomized_step_mc(&rho, &h, &dist, n_samples, derive_seed(seed, idx as u64))?
            }
        };

        let rho_psi = &rho * &psi;
        let pr = psi.dotc(&rho_psi).re;
        let xi = &rho_psi - &psi * Cplx::new(pr, 0.0);
        let coherence = xi.norm();

        let sin_alpha = sin2.sqrt();
        recursion = eps_prime * (sin_alpha + recursion);
        let coherence_bound = recursion / (1.0 - schedule.epsilon);

        let step_cost = dist.mean_abs_time();
        cum_cost += step_cost;
        sum_sin2 += sin2;

        rows.push(RmStepRow {
            j: idx + 1,
            s: s_j,
            gap: sd.gap,
            alpha,
            sin2_bound,
            arc_bound,
            pr,
            coherence,
            coherence_bound,
            eps_prime,
            step_cost,
            cum_cost,
        });

        prev_rate_sq = *rate_sq.last().expect("non-empty");
        prev_state = psi;
        prev_s = s_j;
    }

    let final_fidelity = rows.last().map_or(1.0, |r| r.pr);
    let eps = schedule.epsilon;
    let worst_eps_prime = rows.iter().fold(0.0_f64, |a, r| a.max(r.eps_prime));
    let fidelity_bound =
        1.0 - eps - 2.0 * eps * worst_eps_prime / ((1.0 - eps) * (1.0 - worst_eps_prime));

    let kappa_prime = policy.step_cost_constant();
    let report_min_gap = grid_report
        .samples
        .iter()
        .fold(f64::INFINITY, |a, p| a.min(p.gap));
    let max_dh = grid_report.samples.iter().fold(0.0_f64, |a, p| a.max(p.dh_norm));
    let max_ddh = grid_report.samples.iter().fold(0.0_f64, |a, p| a.max(p.ddh_norm));
    let cost_lstar_form = schedule.l_star * schedule.l_star / (eps * report_min_gap);
    let cost_closed_form =
        kappa_prime * (max_ddh + 2.0 * max_dh) / (2.0 * eps * report_min_gap * report_min_gap);

    Ok(RmReport {
        rows,
        epsilon: eps,
        l_star: schedule.l_star,
        delta_s: schedule.delta_s,
        final_fidelity,
        fidelity_bound,
        sum_sin2,
        total_cost: cum_cost,
        cost_lstar_form,
        cost_closed_form,
        kappa_prime,
        min_gap,
    })
}

fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 of (master, index)
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Both forms of the total-cost bound without running the method.
pub fn total_cost_bound(
    path: &HamiltonianPath,
    epsilon: f64,
    grid: usize,
    policy: &DistPolicy,
) -> Result<(f64, f64)> {
    let report = spectral::compute_report(path, grid)?;
    let min_gap = report.samples.iter().fold(f64::INFINITY, |a, p| a.min(p.gap));
    let max_dh = report.samples.iter().fold(0.0_f64, |a, p| a.max(p.dh_norm));
    let max_ddh = report.samples.iter().fold(0.0_f64, |a, p| a.max(p.ddh_norm));
    let lstar_form = report.bound_improved.powi(2) / (epsilon * min_gap);
    let closed = policy.step_cost_constant() * (max_ddh + 2.0 * max_dh)
        / (2.0 * epsilon * min_gap * min_gap);
    Ok((lstar_form, closed))
}

/// Evaluate every step inequality of a finished run. Violations are
/// reported, not thrown.
pub fn verify_step_bounds(report: &RmReport) -> Vec<BoundCheck> {
    let rel = 1e-6;
    let abs = 1e-12;
    let mut checks = Vec::new();
    let mut prev_pr = 1.0;
    let mut prev_coherence = 0.0;
    for row in &report.rows {
        let sin2 = (1.0 - row.alpha.cos().powi(2)).max(0.0);
        let sin_alpha = sin2.sqrt();
        checks.push(BoundCheck::new(
            anchors::STEP_ANGLE_BOUND,
            sin2,
            row.sin2_bound,
            sin2 <= row.sin2_bound * (1.0 + rel) + abs,
        ));
        checks.push(BoundCheck::new(
            anchors::STEP_ANGLE_BOUND,
            sin_alpha,
            row.arc_bound,
            sin_alpha <= row.arc_bound * (1.0 + rel) + abs,
        ));
        checks.push(BoundCheck::new(
            anchors::COHERENCE_RECURSION,
            row.coherence,
            row.coherence_bound,
            row.coherence <= row.coherence_bound * (1.0 + rel) + abs,
        ));
        // one-step fidelity recursion with the worst-case cross term
        let recursion_rhs = row.alpha.cos().powi(2) * prev_pr - 2.0 * sin_alpha * prev_coherence;
        checks.push(BoundCheck::new(
            anchors::FINAL_FIDELITY,
            recursion_rhs,
            row.pr,
            row.pr >= recursion_rhs - 1e-9,
        ));
        prev_pr = row.pr;
        prev_coherence = row.coherence;
    }
    checks.push(BoundCheck::new(
        anchors::SCHEDULE_INFIDELITY,
        report.sum_sin2,
        report.epsilon,
        report.sum_sin2 <= report.epsilon * (1.0 + rel),
    ));
    checks.push(BoundCheck::new(
        anchors::FINAL_FIDELITY,
        report.fidelity_bound,
        report.final_fidelity,
        report.final_fidelity >= report.fidelity_bound - 1e-9,
    ));
    checks.push(BoundCheck::new(
        anchors::RM_TOTAL_COST,
        report.total_cost,
        report.cost_closed_form,
        report.total_cost <= report.cost_closed_form * (1.0 + rel),
    ));
    checks
}

/// Fold a run's checks into a scoreboard.
pub fn record_run(scoreboard: &mut Scoreboard, report: &RmReport) {
    for check in verify_step_bounds(report) {
        scoreboard.record_check(check.name, &check);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{constant_path, qubit_x_to_z};
    use crate::matrix::HermitianMatrix;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn schedule_arithmetic() {
        let s = build_schedule(2.0, 0.1).unwrap();
        assert_eq!(s.steps, 40);
        assert!((s.delta_s - 0.025).abs() < 1e-15);
        assert_eq!(*s.points.last().unwrap(), 1.0);

        let s = build_schedule(1.0, 0.5).unwrap();
        assert_eq!(s.steps, 2);

        let s = build_schedule(FRAC_PI_4, 0.05).unwrap();
        assert_eq!(s.steps, 13);
    }

    #[test]
    fn schedule_degenerate_cases() {
        let s = build_schedule(0.0, 0.1).unwrap();
        assert_eq!(s.steps, 1);
        assert_eq!(s.points, vec![1.0]);
        assert!(build_schedule(1.0, 0.0).is_err());
        assert!(build_schedule(1.0, 1.0).is_err());
    }

    #[test]
    fn char_factor_at_zero_is_one() {
        let dists = [
            TimeDistribution::Gaussian { mean: 0.3, sigma: 1.2 },
            TimeDistribution::OneSidedExponential { tau: 2.0 },
            TimeDistribution::ShiftedTruncatedGaussian { mean: 1.0, sigma: 0.5 },
        ];
        for d in dists {
            assert_eq!(d.char_factor(0.0), Cplx::new(1.0, 0.0));
        }
    }

    #[test]
    fn gaussian_char_magnitude() {
        let d = TimeDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
        let phi = d.char_factor(1.0);
        assert!((phi.norm() - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn exponential_char_magnitude() {
        let d = TimeDistribution::OneSidedExponential { tau: 1.0 };
        let phi = d.char_factor(1.0);
        assert!((phi.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn epsilon_prime_values() {
        let delta = 0.7;
        let g = DistPolicy::gaussian_third().for_gap(delta);
        assert!((g.epsilon_prime(delta) - 1.0 / 3.0).abs() < 1e-12);
        let wide = TimeDistribution::Gaussian { mean: 0.0, sigma: 1e6 };
        assert!(wide.epsilon_prime(1.0) < 1e-12);
        let e = TimeDistribution::OneSidedExponential { tau: 1.0 / delta };
        assert!((e.epsilon_prime(delta) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn exponential_policy_third() {
        let p = DistPolicy::exponential_third();
        let d = p.for_gap(2.5);
        assert!((d.epsilon_prime(2.5) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_gaussian_char_matches_half_gaussian_limit() {
        // For mean ≫ σ the truncation is irrelevant: φ ≈ Gaussian φ.
        let d = TimeDistribution::ShiftedTruncatedGaussian { mean: 9.0, sigma: 1.0 };
        let g = TimeDistribution::Gaussian { mean: 9.0, sigma: 1.0 };
        for &w in &[0.3, 1.0, 2.0] {
            let a = d.char_factor(w);
            let b = g.char_factor(w);
            assert!((a - b).norm() < 1e-9, "omega={w}: {a} vs {b}");
        }
    }

    fn plus_state_density() -> CMatrix {
        let v = CVector::from_vec(vec![
            Cplx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Cplx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        &v * v.adjoint()
    }

    #[test]
    fn exact_step_scales_off_diagonals() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1.0]);
        let sd = spectral::decompose(&h, 1e-12).unwrap();
        let dist = TimeDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
        let rho = plus_state_density();
        let out = randomized_step_exact(&rho, &sd, &dist);
        let factor = (-0.5f64).exp();
        assert!((out[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((out[(1, 1)].re - 0.5).abs() < 1e-14);
        assert!((out[(0, 1)].norm() - 0.5 * factor).abs() < 1e-12);
        let trace = (out[(0, 0)] + out[(1, 1)]).re;
        assert!((trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_step_fixes_populations() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 0.8]);
        let sd = spectral::decompose(&h, 1e-12).unwrap();
        let dist = TimeDistribution::OneSidedExponential { tau: 3.0 };
        let rho = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Cplx::new(0.25, 0.0),
            Cplx::new(0.75, 0.0),
        ]));
        let out = randomized_step_exact(&rho, &sd, &dist);
        assert!((&out - &rho).norm() < 1e-14, "diagonal state must be invariant");
    }

    #[test]
    fn mc_step_is_deterministic_and_near_identity_for_tiny_sigma() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1.0]);
        let dist = TimeDistribution::Gaussian { mean: 0.0, sigma: 1e-12 };
        let rho = plus_state_density();
        let a = randomized_step_mc(&rho, &h, &dist, 1, 42).unwrap();
        let b = randomized_step_mc(&rho, &h, &dist, 1, 42).unwrap();
        assert_eq!(a, b, "same seed must reproduce bitwise");
        assert!((&a - &rho).norm() < 1e-10, "t→0 leaves the state unchanged");
    }

    #[test]
    fn mc_step_approaches_exact() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1.3]);
        let sd = spectral::decompose(&h, 1e-12).unwrap();
        let dist = TimeDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
        let rho = plus_state_density();
        let exact = randomized_step_exact(&rho, &sd, &dist);
        let mc = randomized_step_mc(&rho, &h, &dist, 20_000, 7).unwrap();
        let err = (&mc - &exact).norm();
        assert!(err < 3.0 / (20_000f64).sqrt(), "mc error {err:.3e}");
    }

    #[test]
    fn qubit_run_meets_fidelity_bound() {
        let path = qubit_x_to_z();
        let report = run_rm(&path, 0.1, &DistPolicy::gaussian_third(), RmMode::Exact, 1).unwrap();
        // ε=0.1, ε′=1/3: bound = 1 − 0.1 − 2·0.1·(1/3)/(0.9·(2/3)) = 0.78889
        assert!((report.fidelity_bound - (1.0 - 0.1 - 2.0 * 0.1 / 3.0 / (0.9 * (2.0 / 3.0))))
            .abs()
            < 1e-12);
        assert!(
            report.final_fidelity >= report.fidelity_bound,
            "fidelity {} below bound {}",
            report.final_fidelity,
            report.fidelity_bound
        );
        assert!(report.sum_sin2 <= 0.1 * (1.0 + 1e-6));
        let checks = verify_step_bounds(&report);
        for c in &checks {
            assert!(c.holds, "{}: lhs={} rhs={}", c.name, c.lhs, c.rhs);
        }
        // measured cost within the closed-form total-cost bound
        assert!(report.total_cost <= report.cost_closed_form);
    }

    #[test]
    fn commuting_diagonal_path_keeps_unit_fidelity() {
        let h0 = HermitianMatrix::from_diagonal(&[0.0, 1.0]);
        let hf = HermitianMatrix::from_diagonal(&[0.0, 2.0]);
        let path = crate::ham_path::HamiltonianPath::linear(h0, hf).unwrap();
        let report = run_rm(&path, 0.2, &DistPolicy::gaussian_third(), RmMode::Exact, 3).unwrap();
        assert!(
            (report.final_fidelity - 1.0).abs() < 1e-10,
            "fidelity {}",
            report.final_fidelity
        );
        for row in &report.rows {
            assert!(row.alpha.abs() < 1e-7, "angle {} at s={}", row.alpha, row.s);
        }
    }

    #[test]
    fn constant_path_cost_is_single_step() {
        let path = constant_path(crate::families::qubit_projector_hamiltonian(0.2));
        let report = run_rm(&path, 0.1, &DistPolicy::gaussian_third(), RmMode::Exact, 9).unwrap();
        assert_eq!(report.rows.len(), 1, "L*=0 must collapse to one step");
        assert!((report.final_fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_schedule_flagged() {
        let path = qubit_x_to_z();
        let grid_report = spectral::compute_report(&path, 501).unwrap();
        let proper = build_schedule(grid_report.bound_improved, 0.05).unwrap();
        // a schedule 10× too coarse for the same target ε
        let coarse = Schedule {
            epsilon: proper.epsilon,
            delta_s: proper.delta_s * 10.0,
            steps: proper.steps.div_ceil(10),
            points: (1..=proper.steps.div_ceil(10))
                .map(|j| (j as f64 * proper.delta_s * 10.0).min(1.0))
                .collect::<Vec<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, p)| if i + 1 == proper.steps.div_ceil(10) { 1.0 } else { p })
                .collect(),
            l_star: proper.l_star,
        };
        let report = run_rm_schedule(
            &path,
            &coarse,
            &grid_report,
            &DistPolicy::gaussian_third(),
            RmMode::Exact,
            5,
            RmOptions::default(),
        )
        .unwrap();
        let checks = verify_step_bounds(&report);
        let infidelity_check = checks
            .iter()
            .find(|c| c.name == anchors::SCHEDULE_INFIDELITY)
            .unwrap();
        assert!(
            !infidelity_check.holds,
            "coarse schedule should violate the infidelity budget: {} vs {}",
            infidelity_check.lhs, infidelity_check.rhs
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn char_magnitude_never_exceeds_one(
            omega in -30.0f64..30.0,
            sigma in 0.05f64..5.0,
            mean in -2.0f64..2.0,
        ) {
            let dists = [
                TimeDistribution::Gaussian { mean, sigma },
                TimeDistribution::OneSidedExponential { tau: sigma },
                TimeDistribution::ShiftedTruncatedGaussian { mean, sigma },
            ];
            for d in dists {
                prop_assert!(d.char_factor(omega).norm() <= 1.0 + 1e-9);
            }
        }

        #[test]
        fn exact_channel_preserves_density_matrix(seed in 0u64..500) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dim = 3;
            let h = crate::families::random_hermitian(dim, &mut rng);
            // random density matrix: normalized Gram matrix
            let g = crate::families::random_hermitian(dim, &mut rng);
            let gram = HermitianMatrix::new(g.matrix() * g.matrix().adjoint()).unwrap();
            let trace: f64 = (0..dim).map(|i| gram.entry(i, i).re).sum();
            let rho = gram.matrix().scale(1.0 / trace);
            let sd = spectral::decompose(&h, 1e-13);
            prop_assume!(sd.is_ok());
            let dist = TimeDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
            let out = randomized_step_exact(&rho, &sd.unwrap(), &dist);
            let tr: f64 = (0..dim).map(|i| out[(i, i)].re).sum();
            prop_assert!((tr - 1.0).abs() < 1e-10);
            let out_h = HermitianMatrix::new(out).unwrap();
            prop_assert!(out_h.min_eigenvalue() >= -1e-9);
        }
    }
}
