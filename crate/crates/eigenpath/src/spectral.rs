//! Eigendecomposition, gauge-fixed ground states, the exact eigenpath
//! length `L = ∫‖ψ̇‖ ds`, and the family of path-length bounds.
//!
//! The improved bound integrates `⟨ψ|Ḧ−Ë|ψ⟩/(2Δ)` and takes a square
//! root; it applies to ground-state paths only. `Ë` is obtained by finite
//! differences of the scalar ground energy rather than by differentiating
//! eigenvectors.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::ham_path::{fornberg_weights, HamiltonianPath, PathKind};
use crate::matrix::HermitianMatrix;
use crate::{CMatrix, CVector, Cplx, Error, Result};

/// Full eigensystem of a Hermitian matrix at one path point.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Path parameter this decomposition was taken at (0 when the matrix
    /// was decomposed standalone).
    pub s: f64,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// Lowest eigenvalue.
    pub ground_energy: f64,
    /// Gap between the two lowest eigenvalues.
    pub gap: f64,
}

impl SpectralData {
    /// Ground-state column.
    pub fn ground_state(&self) -> CVector {
        self.eigenvectors.column(0).into_owned()
    }

    /// Reconstruction residual `‖V·diag(λ)·V† − H‖_F`.
    pub fn reconstruction_error(&self, h: &HermitianMatrix) -> f64 {
        let diag = CMatrix::from_diagonal(
            &CVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|&l| Cplx::new(l, 0.0))),
        );
        (&self.eigenvectors * diag * self.eigenvectors.adjoint() - h.matrix()).norm()
    }
}

/// Default degeneracy tolerance: `1e-10·‖H‖`.
pub fn default_degeneracy_tol(h: &HermitianMatrix) -> f64 {
    1e-10 * h.spectral_norm()
}

/// Full eigendecomposition with a non-degenerate ground state.
pub fn decompose(h: &HermitianMatrix, degeneracy_tol: f64) -> Result<SpectralData> {
    decompose_at(h, 0.0, degeneracy_tol)
}

/// As [`decompose`], labelling the result with its path parameter.
pub fn decompose_at(h: &HermitianMatrix, s: f64, degeneracy_tol: f64) -> Result<SpectralData> {
    let dim = h.dim();
    if dim < 2 {
        return Err(Error::Config("spectral analysis needs dimension >= 2".into()));
    }
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    let gap = eigenvalues[1] - eigenvalues[0];
    if gap <= degeneracy_tol {
        return Err(Error::DegenerateGroundState {
            s,
            gap,
            tol: degeneracy_tol,
        });
    }
    Ok(SpectralData {
        s,
        eigenvalues: eigenvalues.clone(),
        eigenvectors,
        ground_energy: eigenvalues[0],
        gap,
    })
}

/// Decompose `H(s)` with the default degeneracy tolerance.
pub fn decompose_path(path: &HamiltonianPath, s: f64) -> Result<SpectralData> {
    let h = path.eval_h(s)?;
    let tol = default_degeneracy_tol(&h);
    decompose_at(&h, s, tol)
}

/// Rotate `state` by a global phase so that `⟨reference|state⟩` is real and
/// nonnegative. Leaves the state untouched when the overlap vanishes.
pub fn align_phase(reference: &CVector, state: &CVector) -> CVector {
    let ov = reference.dotc(state);
    let mag = ov.norm();
    if mag < 1e-300 {
        state.clone()
    } else {
        state * (ov.conj() / mag)
    }
}

/// A unit state with the discrete gauge convention applied.
#[derive(Clone, Debug)]
pub struct GaugedState {
    pub s: f64,
    pub amplitudes: CVector,
}

impl GaugedState {
    /// Gauge the ground state at `s` against a previous state (alignment
    /// makes the mutual overlap real nonnegative, the discrete counterpart
    /// of `⟨ψ|ψ̇⟩ = 0`).
    pub fn ground(path: &HamiltonianPath, s: f64, previous: Option<&CVector>) -> Result<Self> {
        let sd = decompose_path(path, s)?;
        let raw = sd.ground_state();
        let amplitudes = match previous {
            Some(prev) => align_phase(prev, &raw),
            None => raw,
        };
        Ok(Self { s, amplitudes })
    }
}

/// Ground-state derivative `|ψ̇⟩ = Σ_{k>0} |k⟩⟨k|Ḣ|ψ⟩/(E−λ_k)` via the
/// reduced resolvent. The result is orthogonal to `|ψ⟩` (gauge
/// `⟨ψ|ψ̇⟩ = 0`).
pub fn state_derivative(path: &HamiltonianPath, s: f64) -> Result<CVector> {
    let sd = decompose_path(path, s)?;
    let dh = path.eval_dh(s)?;
    Ok(state_derivative_from(&sd, &dh))
}

/// As [`state_derivative`] but reusing an existing decomposition.
pub fn state_derivative_from(sd: &SpectralData, dh: &HermitianMatrix) -> CVector {
    let dim = sd.eigenvalues.len();
    let psi = sd.ground_state();
    let w = dh.apply(&psi);
    let mut out = CVector::zeros(dim);
    for k in 1..dim {
        let vk = sd.eigenvectors.column(k);
        let coeff = vk.dotc(&w) / Cplx::new(sd.ground_energy - sd.eigenvalues[k], 0.0);
        out += vk.into_owned() * coeff;
    }
    out
}

/// `‖ψ̇‖²` without materializing the derivative vector.
pub fn rate_norm_sq(sd: &SpectralData, dh: &HermitianMatrix) -> f64 {
    let psi = sd.ground_state();
    let w = dh.apply(&psi);
    let mut acc = 0.0;
    for k in 1..sd.eigenvalues.len() {
        let coeff = sd.eigenvectors.column(k).dotc(&w).norm_sqr();
        let denom = sd.ground_energy - sd.eigenvalues[k];
        acc += coeff / (denom * denom);
    }
    acc
}

// ── scalar energy derivatives ───────────────────────────────────────────

/// Ground energy at `s` (values-only eigensolve, no degeneracy check: the
/// lowest eigenvalue is well defined through crossings).
fn ground_energy(path: &HamiltonianPath, s: f64) -> Result<f64> {
    Ok(path.eval_h(s)?.eigenvalues()[0])
}

/// Nodes for the scalar second-derivative stencil. Tabulated paths reuse
/// their sample nodes; other kinds snap a uniform 7-node window to
/// multiples of the step so evaluations can be shared across a grid.
fn energy_stencil_nodes(path: &HamiltonianPath, s: f64) -> Vec<f64> {
    match path.kind() {
        PathKind::Tabulated { .. } => path.fd_nodes(s, 2),
        _ => {
            // widen near the boundary: one-sided weights are large and the
            // roundoff term ~Σ|w|·ε/h² must stay below the rate-bound slack
            let h = if s < 3e-3 || s > 1.0 - 3e-3 { 4e-3 } else { 1e-3 };
            let span = 6.0 * h;
            let snapped = (s / h).round() * h;
            let start = (snapped - 3.0 * h).clamp(0.0, 1.0 - span);
            (0..7).map(|k| start + h * k as f64).collect()
        }
    }
}

/// `Ë(s)` by finite differences of the scalar ground energy.
pub fn energy_second_derivative(path: &HamiltonianPath, s: f64) -> Result<f64> {
    let nodes = energy_stencil_nodes(path, s);
    let weights = fornberg_weights(&nodes, s, 2);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights[2].iter()) {
        acc += w * ground_energy(path, x)?;
    }
    Ok(acc)
}

// ── grid reports ────────────────────────────────────────────────────────

/// Per-grid-point spectral quantities feeding the bounds and the CSV
/// output of the `bounds` subcommand.
#[derive(Clone, Debug)]
pub struct GridSample {
    pub s: f64,
    pub energy: f64,
    pub gap: f64,
    pub dh_norm: f64,
    pub ddh_norm: f64,
    /// `‖ψ̇‖` from the reduced resolvent.
    pub rate_norm: f64,
    /// `⟨ψ|Ḧ−Ë|ψ⟩/(2Δ)`, the integrand of the improved bound (before
    /// clipping).
    pub integrand: f64,
}

/// Exact path length plus every bound, on one grid sweep.
#[derive(Clone, Debug)]
pub struct PathLengthReport {
    pub grid_size: usize,
    /// Simpson value of `∫‖ψ̇‖ ds` on the full grid.
    pub length: f64,
    /// Same integral on every second grid point (refinement check).
    pub length_coarse: f64,
    /// Improved bound `L*`.
    pub bound_improved: f64,
    /// `max_s ‖Ḣ‖/Δ`.
    pub bound_standard: f64,
    /// `√((max‖Ḧ‖ + 2·max‖Ḣ‖)/(2·min Δ))`.
    pub bound_general: f64,
    /// `√(max‖Ḣ‖/min Δ)`, linear paths only.
    pub bound_linear: Option<f64>,
    /// `max_s √(‖Ḧ‖/(2Δ))`, frustration-free paths only.
    pub bound_ff: Option<f64>,
    pub samples: Vec<GridSample>,
    /// Grid points where the improved-bound integrand dipped below `-1e-8`
    /// (signals a non-ground state or inaccurate derivatives).
    pub negative_integrand_points: usize,
}

/// Normalize a requested grid size: at least 5 points and congruent to
/// 1 mod 4 so both the full and half grids admit Simpson's rule.
pub fn normalize_grid(grid_size: usize) -> usize {
    let g = grid_size.max(5);
    g + (4 - (g - 1) % 4) % 4
}

/// Composite Simpson integral of uniformly spaced samples over [a, b].
pub fn simpson(values: &[f64], a: f64, b: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd sample count >= 3");
    let h = (b - a) / (n - 1) as f64;
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(n - 2) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// One grid sweep computing everything [`PathLengthReport`] needs.
///
/// Grid points are processed in parallel; scalar-energy stencil nodes are
/// solved once and shared.
pub fn compute_report(path: &HamiltonianPath, grid_size: usize) -> Result<PathLengthReport> {
    let g = normalize_grid(grid_size);
    let ss: Vec<f64> = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();

    // Shared scalar-energy evaluations for the Ë stencils.
    let mut node_set: Vec<f64> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &s in &ss {
        for x in energy_stencil_nodes(path, s) {
            if seen.insert(x.to_bits()) {
                node_set.push(x);
            }
        }
    }
    let energies: HashMap<u64, f64> = node_set
        .par_iter()
        .map(|&x| Ok((x.to_bits(), ground_energy(path, x)?)))
        .collect::<Result<_>>()?;

    let linear_dh = match path.kind() {
        PathKind::Linear { .. } => Some(path.eval_dh(0.0)?),
        _ => None,
    };
    let linear_dh_norm = linear_dh.as_ref().map(|m| m.spectral_norm());

    let samples: Vec<GridSample> = ss
        .par_iter()
        .map(|&s| -> Result<GridSample> {
            let sd = decompose_path(path, s)?;
            let dh = match &linear_dh {
                Some(m) => m.clone(),
                None => path.eval_dh(s)?,
            };
            let dh_norm = linear_dh_norm.unwrap_or_else(|| dh.spectral_norm());
            let (ddh_norm, ddh_expect) = if path.is_linear() {
                (0.0, 0.0)
            } else {
                let ddh = path.eval_ddh(s)?;
                (ddh.spectral_norm(), ddh.expectation(&sd.ground_state()))
            };
            let nodes = energy_stencil_nodes(path, s);
            let weights = fornberg_weights(&nodes, s, 2);
            let dde: f64 = nodes
                .iter()
                .zip(weights[2].iter())
                .map(|(x, w)| w * energies[&x.to_bits()])
                .sum();
            let rate = rate_norm_sq(&sd, &dh).sqrt();
            let integrand = (ddh_expect - dde) / (2.0 * sd.gap);
            Ok(GridSample {
                s,
                energy: sd.ground_energy,
                gap: sd.gap,
                dh_norm,
                ddh_norm,
                rate_norm: rate,
                integrand,
            })
        })
        .collect::<Result<_>>()?;

    let rates: Vec<f64> = samples.iter().map(|p| p.rate_norm).collect();
    let length = simpson(&rates, 0.0, 1.0);
    let coarse: Vec<f64> = rates.iter().copied().step_by(2).collect();
    let length_coarse = simpson(&coarse, 0.0, 1.0);

    let negative_integrand_points = samples.iter().filter(|p| p.integrand < -1e-8).count();
    let clipped: Vec<f64> = samples.iter().map(|p| p.integrand.max(0.0)).collect();
    let bound_improved = simpson(&clipped, 0.0, 1.0).max(0.0).sqrt();

    let max_dh = samples.iter().fold(0.0f64, |a, p| a.max(p.dh_norm));
    let max_ddh = samples.iter().fold(0.0f64, |a, p| a.max(p.ddh_norm));
    let min_gap = samples.iter().fold(f64::INFINITY, |a, p| a.min(p.gap));
    let bound_standard = samples
        .iter()
        .fold(0.0f64, |a, p| a.max(p.dh_norm / p.gap));
    let bound_general = ((max_ddh + 2.0 * max_dh) / (2.0 * min_gap)).sqrt();
    let bound_linear = path
        .is_linear()
        .then(|| (max_dh / min_gap).sqrt());
    let bound_ff = if path.is_frustration_free() {
        check_zero_ground_energy(&samples)?;
        Some(
            samples
                .iter()
                .fold(0.0f64, |a, p| a.max((p.ddh_norm / (2.0 * p.gap)).sqrt())),
        )
    } else {
        None
    };

    Ok(PathLengthReport {
        grid_size: g,
        length,
        length_coarse,
        bound_improved,
        bound_standard,
        bound_general,
        bound_linear,
        bound_ff,
        samples,
        negative_integrand_points,
    })
}

fn check_zero_ground_energy(samples: &[GridSample]) -> Result<()> {
    for p in samples {
        if p.energy.abs() > 1e-8 {
            return Err(Error::NotFrustrationFree {
                s: p.s,
                energy: p.energy,
            });
        }
    }
    Ok(())
}

/// Exact numerical path length `∫₀¹ ‖ψ̇‖ ds` (composite Simpson).
pub fn path_length(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    Ok(compute_report(path, grid_size)?.length)
}

/// The improved bound `L* = (∫ ⟨ψ|Ḧ−Ë|ψ⟩/(2Δ) ds)^{1/2}`.
pub fn path_length_bound_improved(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    Ok(compute_report(path, grid_size)?.bound_improved)
}

/// The standard bound `max_s ‖Ḣ‖/Δ`.
pub fn bound_standard(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    Ok(compute_report(path, grid_size)?.bound_standard)
}

/// The general-interpolation closed form `√((‖Ḧ‖+2‖Ḣ‖)/(2Δ))`, composed
/// conservatively from grid extrema (each quantity at its own worst point,
/// which is what the chain of inequalities actually licenses).
pub fn bound_general(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    Ok(compute_report(path, grid_size)?.bound_general)
}

/// The linear-interpolation closed form `√(‖Ḣ‖/Δ)`.
pub fn bound_linear(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    if !path.is_linear() {
        return Err(Error::NotLinearKind);
    }
    Ok(compute_report(path, grid_size)?
        .bound_linear
        .expect("linear path"))
}

/// The frustration-free closed form `max_s √(‖Ḧ‖/(2Δ))`.
pub fn bound_ff(path: &HamiltonianPath, grid_size: usize) -> Result<f64> {
    if !path.is_frustration_free() {
        return Err(Error::Config(
            "frustration-free bound requires a frustration-free path".into(),
        ));
    }
    Ok(compute_report(path, grid_size)?
        .bound_ff
        .expect("frustration-free path"))
}

/// Both sides of the local rate bound `‖ψ̇‖² ≤ ⟨ψ|Ḧ−Ë|ψ⟩/(2Δ)`.
#[derive(Clone, Copy, Debug)]
pub struct RateBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_local_rate_bound(path: &HamiltonianPath, s: f64) -> Result<RateBoundCheck> {
    let sd = decompose_path(path, s)?;
    let dh = path.eval_dh(s)?;
    let lhs = rate_norm_sq(&sd, &dh);
    let ddh_expect = if path.is_linear() {
        0.0
    } else {
        path.eval_ddh(s)?.expectation(&sd.ground_state())
    };
    let dde = energy_second_derivative(path, s)?;
    let rhs = (ddh_expect - dde) / (2.0 * sd.gap);
    Ok(RateBoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{constant_path, qubit_x_to_z, random_linear_path};
    use crate::matrix::HermitianMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, FRAC_1_SQRT_2};

    #[test]
    fn decompose_diagonal() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 2.0]);
        let sd = decompose(&h, 1e-12).unwrap();
        assert_eq!(sd.eigenvalues, vec![0.0, 2.0]);
        assert_eq!(sd.gap, 2.0);
        assert_eq!(sd.ground_energy, 0.0);
    }

    #[test]
    fn decompose_x_projector_ground_is_plus() {
        let h = crate::families::qubit_projector_hamiltonian(0.0); // (I−X)/2
        let sd = decompose(&h, 1e-12).unwrap();
        assert!(sd.eigenvalues[0].abs() < 1e-14);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-14);
        let g = sd.ground_state();
        let overlap = (g[0] + g[1]).norm() * FRAC_1_SQRT_2;
        assert!((overlap - 1.0).abs() < 1e-12, "ground state is not |+>: {overlap}");
    }

    #[test]
    fn decompose_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = crate::families::random_hermitian(8, &mut rng);
        let sd = decompose(&h, default_degeneracy_tol(&h)).unwrap();
        let err = sd.reconstruction_error(&h);
        assert!(err <= 1e-10 * h.spectral_norm().max(1.0), "residual {err:.3e}");
    }

    #[test]
    fn degenerate_ground_state_rejected() {
        let h = HermitianMatrix::identity(3);
        match decompose(&h, 1e-10) {
            Err(Error::DegenerateGroundState { .. }) => {}
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn constant_path_has_zero_derivative_and_length() {
        let path = constant_path(crate::families::qubit_projector_hamiltonian(0.0));
        let d = state_derivative(&path, 0.5).unwrap();
        assert!(d.norm() < 1e-12);
        let report = compute_report(&path, 101).unwrap();
        assert!(report.length < 1e-12);
        assert!(report.bound_improved < 1e-6);
        assert!(report.bound_standard < 1e-12);
        assert!(report.bound_general < 1e-6);
    }

    #[test]
    fn qubit_rate_at_endpoints() {
        // ‖ψ̇(0)‖ = |dθ/ds|/2 = 1/2 for θ(s) = atan2(1−s, s)
        let path = qubit_x_to_z();
        let d = state_derivative(&path, 0.0).unwrap();
        assert!((d.norm() - 0.5).abs() < 1e-10, "rate {}", d.norm());
    }

    #[test]
    fn state_derivative_is_orthogonal_to_state() {
        let path = qubit_x_to_z();
        for s in [0.0, 0.33, 0.71, 1.0] {
            let sd = decompose_path(&path, s).unwrap();
            let psi = sd.ground_state();
            let d = state_derivative(&path, s).unwrap();
            assert!(psi.dotc(&d).norm() < 1e-10, "gauge violated at s={s}");
        }
    }

    #[test]
    fn qubit_path_length_is_quarter_pi() {
        let path = qubit_x_to_z();
        let l = path_length(&path, 1001).unwrap();
        assert!((l - FRAC_PI_4).abs() < 1e-8, "L = {l}");
    }

    #[test]
    fn qubit_bound_chain() {
        let path = qubit_x_to_z();
        let report = compute_report(&path, 1001).unwrap();
        assert!((report.bound_standard - 1.0).abs() < 1e-10);
        assert!((report.bound_general - 1.0).abs() < 1e-10);
        assert!((report.bound_linear.unwrap() - 1.0).abs() < 1e-10);
        // L ≤ L* ≤ closed forms; L* for this path is √(1/4 + π/8)
        let expect_star = (0.25 + std::f64::consts::PI / 8.0).sqrt();
        assert!((report.bound_improved - expect_star).abs() < 1e-6);
        assert!(report.length <= report.bound_improved + 1e-6);
        assert!(report.bound_improved <= report.bound_linear.unwrap() + 1e-6);
    }

    #[test]
    fn diagonal_linear_path_standard_bound() {
        let h0 = HermitianMatrix::from_diagonal(&[0.0, 1.0]);
        let hf = HermitianMatrix::from_diagonal(&[0.0, 2.0]);
        let path = crate::ham_path::HamiltonianPath::linear(h0, hf).unwrap();
        let b = bound_standard(&path, 101).unwrap();
        assert!((b - 1.0).abs() < 1e-10, "bound {b}");
    }

    #[test]
    fn random_linear_paths_satisfy_length_chain() {
        for seed in 0..20 {
            let path = random_linear_path(4, seed);
            let report = match compute_report(&path, 201) {
                Ok(r) => r,
                Err(Error::DegenerateGroundState { .. }) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            };
            assert!(
                report.length <= report.bound_improved + 1e-6,
                "seed {seed}: L={} L*={}",
                report.length,
                report.bound_improved
            );
            assert!(
                report.bound_improved <= report.bound_linear.unwrap() + 1e-6,
                "seed {seed}: L*={} linear bound={}",
                report.bound_improved,
                report.bound_linear.unwrap()
            );
        }
    }

    #[test]
    fn local_rate_bound_on_qubit() {
        // At the gap minimum the bound is tight: ‖ψ̇‖² = −Ë/(2Δ) = 1.
        let path = qubit_x_to_z();
        let check = check_local_rate_bound(&path, 0.5).unwrap();
        assert!(check.holds, "lhs={} rhs={}", check.lhs, check.rhs);
        assert!((check.lhs - 1.0).abs() < 1e-10, "lhs {}", check.lhs);
        assert!((check.rhs - check.lhs).abs() < 1e-7, "rhs {}", check.rhs);
    }

    #[test]
    fn local_rate_bound_on_constant_path() {
        let path = constant_path(crate::families::qubit_projector_hamiltonian(0.3));
        let check = check_local_rate_bound(&path, 0.25).unwrap();
        assert!(check.lhs < 1e-14);
        assert!(check.rhs.abs() < 1e-6);
        assert!(check.holds);
    }

    #[test]
    fn grid_refinement_converges() {
        let path = qubit_x_to_z();
        let r1 = compute_report(&path, 101).unwrap();
        let r2 = compute_report(&path, 401).unwrap();
        let c1 = (r1.length - r1.length_coarse).abs();
        let c2 = (r2.length - r2.length_coarse).abs();
        assert!(c2 <= c1, "refinement did not tighten: {c1:.3e} -> {c2:.3e}");
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
        let vals: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        assert!((simpson(&vals, 0.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalize_grid_rounds_up() {
        assert_eq!(normalize_grid(3), 5);
        assert_eq!(normalize_grid(5), 5);
        assert_eq!(normalize_grid(100), 101);
        assert_eq!(normalize_grid(1001), 1001);
    }
}
