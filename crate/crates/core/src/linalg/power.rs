use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `‖E‖₂` by power iteration on `EᵀE`. Stops after `max_iter` steps or once
/// the relative change of the estimate falls below `rel_tol`. The start
/// vector is seeded, so the result is reproducible.
pub fn spectral_norm(e: &DenseMatrix, max_iter: usize, rel_tol: f64) -> SpectralEstimate {
    let n = e.cols();
    if n == 0 || e.rows() == 0 || e.max_abs() == 0.0 {
        return SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut x);
    let mut est = 0.0;
    for it in 1..=max_iter {
        let y = e.matvec(&x).expect("dimensions checked");
        let mut z = e.matvec_transpose(&y).expect("dimensions checked");
        let lambda = dot(&x, &z);
        let new_est = lambda.max(0.0).sqrt();
        let nz = normalize(&mut z);
        if nz == 0.0 {
            return SpectralEstimate {
                value: new_est,
                iterations: it,
                converged: true,
            };
        }
        x = z;
        if it > 1 && (new_est - est).abs() <= rel_tol * new_est {
            return SpectralEstimate {
                value: new_est,
                iterations: it,
                converged: true,
            };
        }
        est = new_est;
    }
    SpectralEstimate {
        value: est,
        iterations: max_iter,
        converged: false,
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}
