//! Standard path families used by experiments and tests: the single-qubit
//! rotation, the Grover-style search interpolation, random dense linear
//! paths, and rotating-projector frustration-free families.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ham_path::{FfTerm, HamiltonianPath};
use crate::matrix::HermitianMatrix;
use crate::{CMatrix, CVector, Cplx, Result};

/// `(I − n̂·σ)/2` for a Bloch vector in the x–z plane at the given angle
/// from the x axis.
pub fn qubit_projector_hamiltonian(angle: f64) -> HermitianMatrix {
    // n̂ = (cos a, 0, sin a); H = (I − cos a · X − sin a · Z)/2
    let (c, s) = (angle.cos(), angle.sin());
    HermitianMatrix::from_fn(2, |i, j| {
        if i == j {
            let sign = if i == 0 { 1.0 } else { -1.0 };
            Cplx::new(0.5 - 0.5 * s * sign, 0.0)
        } else {
            Cplx::new(-0.5 * c, 0.0)
        }
    })
    .expect("2x2 construction cannot fail")
}

/// The workhorse single-qubit path `(I−X)/2 → (I−Z)/2`. Exact values:
/// path length `π/4`, minimum gap `1/√2`.
pub fn qubit_x_to_z() -> HamiltonianPath {
    HamiltonianPath::linear(
        qubit_projector_hamiltonian(0.0),
        qubit_projector_hamiltonian(std::f64::consts::FRAC_PI_2),
    )
    .expect("matching dimensions")
}

/// Linear qubit path whose endpoints' Bloch vectors subtend `angle`;
/// the minimum gap is `cos(angle/2)`, so the gap closes as angle → π.
pub fn qubit_angle_path(angle: f64) -> HamiltonianPath {
    HamiltonianPath::linear(
        qubit_projector_hamiltonian(0.0),
        qubit_projector_hamiltonian(angle),
    )
    .expect("matching dimensions")
}

/// Constant path at a fixed Hamiltonian.
pub fn constant_path(h: HermitianMatrix) -> HamiltonianPath {
    HamiltonianPath::linear(h.clone(), h).expect("matching dimensions")
}

/// Grover-style search family on `n` qubits: `H₀ = I − |+⟩⟨+|^⊗n`,
/// `H_f = I − |m⟩⟨m|`, linear interpolation. Minimum gap `2^{−n/2}`.
pub fn grover_path(n: usize, marked: usize) -> Result<HamiltonianPath> {
    let dim = 1usize << n;
    let marked = marked % dim;
    let amp = 1.0 / dim as f64;
    let h0 = HermitianMatrix::from_fn(dim, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Cplx::new(id - amp, 0.0)
    })?;
    let hf = HermitianMatrix::from_fn(dim, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        let mark = if i == marked && j == marked { 1.0 } else { 0.0 };
        Cplx::new(id - mark, 0.0)
    })?;
    HamiltonianPath::linear(h0, hf)
}

/// Random complex Hermitian matrix with entries of unit scale.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        Cplx::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    HermitianMatrix::new(raw).expect("square by construction")
}

/// Random linear path between two dense Hermitian endpoints.
pub fn random_linear_path(dim: usize, seed: u64) -> HamiltonianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = random_hermitian(dim, &mut rng);
    let hf = random_hermitian(dim, &mut rng);
    HamiltonianPath::linear(h0, hf).expect("matching dimensions")
}

/// Random unit vector with complex Gaussian entries.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    use rand_distr::StandardNormal;
    let mut v = CVector::from_fn(dim, |_, _| {
        Cplx::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v /= Cplx::new(norm, 0.0);
    v
}

/// Unitary family `U(s) = e^{−isK}` from a fixed Hermitian generator,
/// returned as a closure backed by the eigendecomposition of `K`.
pub fn rotation_family(generator: &HermitianMatrix) -> Arc<dyn Fn(f64) -> CMatrix + Send + Sync> {
    let eig = nalgebra::SymmetricEigen::new(generator.matrix().clone());
    let vectors = eig.eigenvectors;
    let values = eig.eigenvalues;
    let adjoint = vectors.adjoint();
    Arc::new(move |s: f64| {
        let phases = DMatrix::from_diagonal(&values.map(|l| Cplx::from_polar(1.0, -s * l)));
        &vectors * phases * &adjoint
    })
}

/// Frustration-free path with a single rotating projector term
/// `Π(s) = |v(θ(s))⟩⟨v(θ(s))|` on a qubit, where `θ` is supplied as a
/// closure. The ground state rotates at rate `|θ̇|` and the gap is 1.
pub fn rotating_projector_path(theta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> HamiltonianPath {
    let term = move |s: f64| {
        let t = theta(s);
        let v = CVector::from_vec(vec![Cplx::new(t.cos(), 0.0), Cplx::new(t.sin(), 0.0)]);
        HermitianMatrix::outer(&v)
    };
    HamiltonianPath::frustration_free(vec![FfTerm::Analytic(Arc::new(term))])
        .expect("single-term construction")
}

/// Rank-deficient three-level frustration-free family with tunable gap:
/// `Π(s) = U(s)·diag(0, gap, 1)·U(s)†`. The summed Hamiltonian has ground
/// energy 0, spectral gap `gap`, and term norm 1, so the amplified gap is
/// exactly `√gap`.
pub fn scaled_ff_path(gap: f64, seed: u64) -> HamiltonianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generator = random_hermitian(3, &mut rng);
    let rotate = rotation_family(&generator);
    let base = HermitianMatrix::from_diagonal(&[0.0, gap, 1.0]);
    let term = move |s: f64| {
        let u = rotate(s);
        HermitianMatrix::new(&u * base.matrix() * u.adjoint()).expect("square")
    };
    HamiltonianPath::frustration_free(vec![FfTerm::Analytic(Arc::new(term))])
        .expect("single-term construction")
}

/// Random frustration-free path: terms from a random frustration-free set,
/// conjugated by a rotation family `U(s) = e^{−isK}`.
pub fn random_ff_path(dim: usize, n_terms: usize, seed: u64) -> Result<HamiltonianPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = crate::ff_amplify::generate_ff_ensemble(dim, n_terms, rng.gen())?;
    let generator = random_hermitian(dim, &mut rng);
    let rotate = rotation_family(&generator);
    let terms: Vec<FfTerm> = set
        .terms
        .iter()
        .map(|t| {
            let rotate = rotate.clone();
            let base = t.clone();
            FfTerm::Analytic(Arc::new(move |s: f64| {
                let u = rotate(s);
                HermitianMatrix::new(&u * base.matrix() * u.adjoint()).expect("square")
            }))
        })
        .collect();
    HamiltonianPath::frustration_free(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_endpoints_are_projector_complements() {
        let path = qubit_x_to_z();
        let h0 = path.eval_h(0.0).unwrap();
        // (I−X)/2: eigenvalues {0, 1}
        let vals = h0.eigenvalues();
        assert!(vals[0].abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grover_minimum_gap_scaling() {
        for n in 2..=4 {
            let path = grover_path(n, 1).unwrap();
            let mid = path.eval_h(0.5).unwrap();
            let vals = mid.eigenvalues();
            let gap = vals[1] - vals[0];
            let expect = 0.5f64.powf(n as f64 / 2.0);
            assert!(
                (gap - expect).abs() < 1e-12,
                "n={n}: gap {gap} vs {expect}"
            );
        }
    }

    #[test]
    fn rotation_family_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = random_hermitian(4, &mut rng);
        let rot = rotation_family(&k);
        let u = rot(0.7);
        let defect = (&u * u.adjoint() - CMatrix::identity(4, 4)).norm();
        assert!(defect < 1e-12, "unitarity defect {defect:.3e}");
    }

    #[test]
    fn rotating_projector_annihilates_orthogonal_state() {
        let path = rotating_projector_path(|s| s * std::f64::consts::FRAC_PI_2);
        let h = path.eval_h(0.3).unwrap();
        let vals = h.eigenvalues();
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }
}
