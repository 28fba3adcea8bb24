//! Numerical laboratory for eigenpath traversal.

pub mod aqc_costs;
pub mod cli;
pub mod error;
pub mod families;
pub mod ff_amplify;
pub mod ham_path;
pub mod matrix;
pub mod oracle;
pub mod qsa;
pub mod report;
pub mod rm_engine;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Entry point used by the `eigenpath` binary. Returns the process exit code.
pub fn run() -> i32 {
    cli::run(std::env::args_os())
}

/// Scalar type used throughout: all spectral quantities are real f64.
pub type Real = f64;
/// Complex amplitude type.
pub type Cplx = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Cplx>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<Cplx>;

#[cfg(test)]
mod probe {
    use super::*;

    #[test]
    fn timing_probe_128() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 128;
        let a = CMatrix::from_fn(n, n, |_, _| {
            Cplx::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let h = (&a + a.adjoint()) * Cplx::new(0.5, 0.0);
        let t0 = std::time::Instant::now();
        let mut reps = 0;
        while t0.elapsed().as_millis() < 300 {
            let eig = nalgebra::SymmetricEigen::new(h.clone());
            assert!(eig.eigenvalues.len() == n);
            reps += 1;
        }
        eprintln!("128x128 hermitian eigensolve: {:?}/solve", t0.elapsed() / reps);
    }

    #[test]
    fn nalgebra_hermitian_eigen_probe() {
        // (I - X)/2 has eigenvalues {0, 1}
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Cplx::new(0.5, 0.0),
                Cplx::new(-0.5, 0.0),
                Cplx::new(-0.5, 0.0),
                Cplx::new(0.5, 0.0),
            ],
        );
        let eig = nalgebra::SymmetricEigen::new(h.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 0.0).abs() < 1e-12, "got {vals:?}");
        assert!((vals[1] - 1.0).abs() < 1e-12, "got {vals:?}");
        // reconstruction
        let recon = &eig.eigenvectors
            * CMatrix::from_diagonal(&eig.eigenvalues.map(|v| Cplx::new(v, 0.0)))
            * eig.eigenvectors.adjoint();
        assert!((recon - h).norm() < 1e-12);
    }
}
