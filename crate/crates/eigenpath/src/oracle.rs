//! Independent brute-force validators. These deliberately avoid the code
//! paths they check: state derivatives come from gauge-aligned finite
//! differences of eigensolves, path lengths from polygonal chord sums,
//! channel outputs from dense sampled propagators, characteristic factors
//! from quadrature, and partition sums from sorted compensated summation.

use rayon::prelude::*;

use crate::ham_path::HamiltonianPath;
use crate::matrix::HermitianMatrix;
use crate::rm_engine::{randomized_step_exact, TimeDistribution};
use crate::spectral::{self, align_phase, decompose_path};
use crate::{CMatrix, CVector, Cplx, Error, Result};

/// Outcome of one oracle comparison. Pass means the error does not exceed
/// the tolerance, with the error taken relative to `max(|reference|, 1)`.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        let abs_err = (computed - reference).abs();
        let scale = reference.abs().max(1.0);
        let rel_err = abs_err / scale;
        Self {
            name: name.into(),
            computed,
            reference,
            abs_err,
            rel_err,
            tolerance,
            pass: rel_err <= tolerance,
        }
    }
}

/// Gauge-aligned finite-difference ground-state derivative (4th-order
/// stencils, one-sided at the endpoints). Each sampled state is phase-
/// aligned against the state at `s`, which realizes the `⟨ψ|ψ̇⟩ = 0` gauge
/// to the stencil's order.
pub fn fd_state_derivative(path: &HamiltonianPath, s: f64, h: f64) -> Result<CVector> {
    if h <= 0.0 {
        return Err(Error::Domain("step must be positive".into()));
    }
    let reference = decompose_path(path, s)?.ground_state();
    let aligned = |x: f64| -> Result<CVector> {
        Ok(align_phase(&reference, &decompose_path(path, x)?.ground_state()))
    };
    let (offsets, weights): (&[f64], &[f64]) = if s >= 2.0 * h && s + 2.0 * h <= 1.0 {
        (&[-2.0, -1.0, 1.0, 2.0], &[1.0, -8.0, 8.0, -1.0])
    } else if s < 2.0 * h {
        (
            &[0.0, 1.0, 2.0, 3.0, 4.0],
            &[-25.0, 48.0, -36.0, 16.0, -3.0],
        )
    } else {
        (
            &[0.0, -1.0, -2.0, -3.0, -4.0],
            &[25.0, -48.0, 36.0, -16.0, 3.0],
        )
    };
    let mut out = CVector::zeros(path.dim());
    for (&k, &w) in offsets.iter().zip(weights.iter()) {
        out += aligned(s + k * h)? * Cplx::new(w / (12.0 * h), 0.0);
    }
    Ok(out)
}

/// Monte Carlo channel built from dense sampled propagators
/// `U(t) = V·e^{−iλt}·V†` applied by full matrix products, compared to the
/// exact dephasing channel. The statistical envelope is `1/√n`.
pub fn mc_channel_check(
    rho: &CMatrix,
    h: &HermitianMatrix,
    dist: &TimeDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    use rand::SeedableRng;
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let dim = h.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut acc = CMatrix::zeros(dim, dim);
    for _ in 0..n_samples {
        let t = dist.sample(&mut rng);
        let phases =
            CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Cplx::from_polar(1.0, -l * t)));
        let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        acc += &u * rho * u.adjoint();
    }
    acc /= Cplx::new(n_samples as f64, 0.0);

    let tol = spectral::default_degeneracy_tol(h).max(1e-14);
    let sd = spectral::decompose_at(h, 0.0, tol).or_else(|_| {
        // degenerate spectra are fine for the channel itself
        Ok::<_, Error>(spectral_unchecked(h))
    })?;
    let exact = randomized_step_exact(rho, &sd, dist);
    let distance = (&acc - &exact).norm();
    let envelope = 1.0 / (n_samples as f64).sqrt();
    let mut report = OracleReport::new("mc_channel_vs_exact", distance, 0.0, 0.0);
    report.tolerance = 3.0 * envelope;
    report.pass = distance <= 3.0 * envelope;
    Ok(report)
}

fn spectral_unchecked(h: &HermitianMatrix) -> spectral::SpectralData {
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    spectral::SpectralData {
        s: 0.0,
        ground_energy: eigenvalues[0],
        gap: eigenvalues[1] - eigenvalues[0],
        eigenvalues,
        eigenvectors,
    }
}

/// Polygonal (chord-sum) path length on a dense grid: the chord between
/// neighbouring ground states is the gauge-free `√(2 − 2|⟨ψ_i|ψ_{i+1}⟩|)`.
pub fn dense_grid_length(path: &HamiltonianPath, points: usize) -> Result<f64> {
    let n = points.max(2);
    let states: Vec<CVector> = (0..n)
        .into_par_iter()
        .map(|i| Ok(decompose_path(path, i as f64 / (n - 1) as f64)?.ground_state()))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for w in states.windows(2) {
        let overlap = w[0].dotc(&w[1]).norm().min(1.0);
        total += (2.0 - 2.0 * overlap).max(0.0).sqrt();
    }
    Ok(total)
}

/// Characteristic factor by direct quadrature of `∫ f(t) e^{−iωt} dt`
/// (supports the two closed-form kinds; the truncated Gaussian already is
/// quadrature-based in the main path).
pub fn quadrature_char_factor(dist: &TimeDistribution, omega: f64) -> Cplx {
    let (lo, hi, density): (f64, f64, Box<dyn Fn(f64) -> f64>) = match dist {
        TimeDistribution::Gaussian { mean, sigma } => {
            let (m, s) = (*mean, *sigma);
            (
                m - 12.0 * s,
                m + 12.0 * s,
                Box::new(move |t: f64| {
                    let z = (t - m) / s;
                    (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
                }),
            )
        }
        TimeDistribution::OneSidedExponential { tau } => {
            let tau = *tau;
            (
                0.0,
                50.0 * tau,
                Box::new(move |t: f64| (-t / tau).exp() / tau),
            )
        }
        TimeDistribution::ShiftedTruncatedGaussian { mean, sigma } => {
            let (m, s) = (*mean, *sigma);
            let norm = 0.5 * libm::erfc(-m / (s * std::f64::consts::SQRT_2));
            (
                0.0,
                (m + 12.0 * s).max(12.0 * s),
                Box::new(move |t: f64| {
                    let z = (t - m) / s;
                    (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt() * norm)
                }),
            )
        }
    };
    let periods = ((hi - lo) * omega.abs() / (2.0 * std::f64::consts::PI)).ceil();
    let n = (((periods * 32.0) as usize).max(20_001)) | 1;
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = Cplx::new(0.0, 0.0);
    for k in 0..n {
        let t = lo + k as f64 * h;
        let w = if k == 0 || k == n - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += Cplx::from_polar(density(t), -omega * t) * w;
    }
    acc * h / 3.0
}

/// Partition quantities `(Z, ⟨E⟩, ⟨E²⟩)` by sorted compensated summation
/// of the raw Boltzmann weights.
pub fn brute_partition(values: &[f64], beta: f64) -> (f64, f64, f64) {
    let m = values.iter().fold(f64::NEG_INFINITY, |a, &e| a.max(-beta * e));
    let mut weighted: Vec<(f64, f64)> = values
        .iter()
        .map(|&e| ((-beta * e - m).exp(), e))
        .collect();
    weighted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let z_shifted = kahan_sum(weighted.iter().map(|(w, _)| *w));
    let e_sum = kahan_sum(weighted.iter().map(|(w, e)| w * e));
    let e2_sum = kahan_sum(weighted.iter().map(|(w, e)| w * e * e));
    let z = z_shifted * m.exp();
    (z, e_sum / z_shifted, e2_sum / z_shifted)
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Run every oracle comparison at qubit scale and return the table.
pub fn run_oracle_suite(seed: u64) -> Result<Vec<OracleReport>> {
    use rand::{Rng, SeedableRng};
    let mut reports = Vec::new();
    let qubit = crate::families::qubit_x_to_z();

    // resolvent-formula state derivative vs gauge-aligned finite differences
    for &s in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let resolvent = spectral::state_derivative(&qubit, s)?;
        let fd = fd_state_derivative(&qubit, s, 1e-4)?;
        let err = (&resolvent - &fd).norm() / resolvent.norm().max(1e-12);
        reports.push(OracleReport::new(
            format!("state_derivative_qubit_s{s}"),
            err,
            0.0,
            1e-6,
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let random_path = crate::families::random_linear_path(6, rng.gen());
    for &s in &[0.1, 0.35, 0.6, 0.85, 1.0] {
        let resolvent = spectral::state_derivative(&random_path, s)?;
        let fd = fd_state_derivative(&random_path, s, 1e-4)?;
        let err = (&resolvent - &fd).norm() / resolvent.norm().max(1e-12);
        reports.push(OracleReport::new(
            format!("state_derivative_random6_s{s}"),
            err,
            0.0,
            1e-6,
        ));
    }

    // chord-sum length vs the closed form and vs Simpson integration
    let dense = dense_grid_length(&qubit, 100_001)?;
    reports.push(OracleReport::new(
        "dense_length_qubit_vs_quarter_pi",
        dense,
        std::f64::consts::FRAC_PI_4,
        1e-8,
    ));
    let simpson_l = spectral::path_length(&qubit, 1001)?;
    reports.push(OracleReport::new(
        "dense_length_vs_simpson",
        dense,
        simpson_l,
        1e-6,
    ));
    let constant = crate::families::constant_path(crate::families::qubit_projector_hamiltonian(0.9));
    reports.push(OracleReport::new(
        "dense_length_constant",
        dense_grid_length(&constant, 2001)?,
        0.0,
        1e-10,
    ));

    // characteristic factors vs quadrature
    let gauss = TimeDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
    let quad = quadrature_char_factor(&gauss, 1.0).norm();
    reports.push(OracleReport::new(
        "char_gaussian_vs_quadrature",
        gauss.char_factor(1.0).norm(),
        quad,
        1e-9,
    ));
    let exp = TimeDistribution::OneSidedExponential { tau: 1.0 };
    let quad = quadrature_char_factor(&exp, 1.0).norm();
    reports.push(OracleReport::new(
        "char_exponential_vs_quadrature",
        exp.char_factor(1.0).norm(),
        quad,
        1e-9,
    ));
    let trunc = TimeDistribution::ShiftedTruncatedGaussian { mean: 0.5, sigma: 1.0 };
    let quad = quadrature_char_factor(&trunc, 1.3).norm();
    reports.push(OracleReport::new(
        "char_truncated_vs_quadrature",
        trunc.char_factor(1.3).norm(),
        quad,
        1e-7,
    ));

    // Monte Carlo channel vs the exact channel on a seeded qubit instance
    let h = crate::families::random_hermitian(2, &mut rng);
    let v = crate::families::random_unit_vector(2, &mut rng);
    let rho = &v * v.adjoint();
    let check = mc_channel_check(&rho, &h, &gauss, 100_000, rng.gen())?;
    reports.push(check);

    // partition quantities vs the closed two-level form
    let (_, mean, _) = brute_partition(&[-0.5, 0.5], 2.0);
    reports.push(OracleReport::new(
        "brute_partition_single_spin_mean",
        mean,
        -(1.0f64).tanh() / 2.0,
        1e-12,
    ));
    let (z, _, _) = brute_partition(&[0.0, 0.0, 0.0], 1.7);
    reports.push(OracleReport::new("brute_partition_constant_z", z, 3.0, 1e-12));

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{constant_path, qubit_x_to_z};

    #[test]
    fn fd_matches_resolvent_on_qubit() {
        let path = qubit_x_to_z();
        let fd = fd_state_derivative(&path, 0.5, 1e-4).unwrap();
        let resolvent = spectral::state_derivative(&path, 0.5).unwrap();
        let rel = (&fd - &resolvent).norm() / resolvent.norm();
        assert!(rel < 1e-6, "relative error {rel:.3e}");
    }

    #[test]
    fn fd_constant_path_is_zero() {
        let path = constant_path(crate::families::qubit_projector_hamiltonian(0.7));
        let fd = fd_state_derivative(&path, 0.5, 1e-4).unwrap();
        assert!(fd.norm() < 1e-9, "norm {}", fd.norm());
    }

    #[test]
    fn chord_length_recovers_quarter_pi() {
        let path = qubit_x_to_z();
        let l = dense_grid_length(&path, 100_001).unwrap();
        assert!(
            (l - std::f64::consts::FRAC_PI_4).abs() < 1e-8,
            "dense length {l}"
        );
    }

    #[test]
    fn brute_partition_two_level() {
        let (z, mean, second) = brute_partition(&[-0.5, 0.5], 2.0);
        let e = std::f64::consts::E;
        assert!((z - (e + 1.0 / e)).abs() < 1e-12);
        assert!((mean + (1.0f64).tanh() / 2.0).abs() < 1e-14, "mean {mean}");
        assert!((second - 0.25).abs() < 1e-14);
    }

    #[test]
    fn brute_partition_matches_gibbs_module() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let raw: Vec<f64> = (0..1 << 12).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let obj = crate::qsa::ObjectiveFunction::new(raw).unwrap();
        let beta = 1.0;
        let (_, mean_oracle, second_oracle) = brute_partition(obj.values(), beta);
        let (mean, var) = crate::qsa::mean_and_variance(&obj, beta).unwrap();
        assert!(
            (mean - mean_oracle).abs() <= 1e-12 * mean_oracle.abs().max(1.0),
            "mean {mean} vs {mean_oracle}"
        );
        let var_oracle = second_oracle - mean_oracle * mean_oracle;
        assert!(
            (var - var_oracle).abs() <= 1e-12 * var_oracle.abs().max(1.0),
            "var {var} vs {var_oracle}"
        );
    }

    #[test]
    fn oracle_suite_passes() {
        let reports = run_oracle_suite(2024).unwrap();
        for r in &reports {
            assert!(
                r.pass,
                "{}: computed {} vs {} (rel {:.3e}, tol {:.3e})",
                r.name, r.computed, r.reference, r.rel_err, r.tolerance
            );
        }
        assert!(reports.len() >= 12);
    }
}
