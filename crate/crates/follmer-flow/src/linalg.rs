//! Spectral helpers for small dense matrices.

use nalgebra::DMatrix;

/// Dimension threshold below which extreme eigenvalues come from a full
/// symmetric eigendecomposition; above it, shifted power iteration is used.
pub const DIRECT_EIGEN_MAX_DIM: usize = 64;

/// Extreme eigenvalues `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn symmetric_eigen_bounds(m: &DMatrix<f64>) -> (f64, f64) {
    debug_assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 1 {
        return (m[(0, 0)], m[(0, 0)]);
    }
    if m.nrows() <= DIRECT_EIGEN_MAX_DIM {
        let eig = m.clone().symmetric_eigen();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &l in eig.eigenvalues.iter() {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        (lo, hi)
    } else {
        // Gershgorin bound makes both shifted iterations converge to the
        // extreme eigenvalues.
        let shift = gershgorin_radius(m);
        let hi = block_power_extreme(m, shift) - shift;
        let lo = -(block_power_extreme(&(-m), shift) - shift);
        (lo, hi)
    }
}

/// Operator norm (largest singular value) of a general square matrix,
/// computed as sqrt(lambda_max(M^T M)).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let (_, hi) = symmetric_eigen_bounds(&gram);
    hi.max(0.0).sqrt()
}

fn gershgorin_radius(m: &DMatrix<f64>) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.nrows() {
        let mut row = 0.0;
        for j in 0..m.ncols() {
            row += m[(i, j)].abs();
        }
        r = r.max(row);
    }
    r
}

/// Largest eigenvalue of the PSD matrix `m + shift I` by blocked power
/// iteration with Rayleigh-Ritz extraction and a deterministic start block.
/// The block absorbs clustered top eigenvalues that stall a single vector.
fn block_power_extreme(m: &DMatrix<f64>, shift: f64) -> f64 {
    let n = m.nrows();
    let b = 8.min(n);
    let mut v = DMatrix::from_fn(n, b, |i, j| {
        1.0 + ((i * 31 + j * 7 + i * i % 13) as f64) * 1e-2
    });
    orthonormalize(&mut v);
    let mut top = f64::NEG_INFINITY;
    for it in 0..4000 {
        let mut w = m * &v;
        w += shift * &v;
        orthonormalize(&mut w);
        v = w;
        if it % 8 == 7 {
            // Ritz values of the projected block.
            let proj = v.transpose() * (m * &v);
            let sym = 0.5 * (&proj + proj.transpose());
            let eig = sym.symmetric_eigen();
            let new_top = eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                + shift;
            if (new_top - top).abs() <= 1e-13 * new_top.abs().max(1.0) {
                return new_top;
            }
            top = new_top;
        }
    }
    top
}

/// In-place thin QR orthonormalization of the columns of `v`.
fn orthonormalize(v: &mut DMatrix<f64>) {
    let qr = v.clone().qr();
    *v = qr.q();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{standard_normal_vector, substream};
    use nalgebra::DVector;

    fn random_symmetric(dim: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = substream(seed, 0);
        let a = DMatrix::from_fn(dim, dim, |_, _| standard_normal_vector(&mut rng, 1)[0]);
        0.5 * (&a + a.transpose())
    }

    #[test]
    fn diagonal_matrix_bounds() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 0.5]));
        let (lo, hi) = symmetric_eigen_bounds(&m);
        assert!((lo + 1.0).abs() < 1e-12);
        assert!((hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_direct_path() {
        // Same matrix, both code paths.
        let m = random_symmetric(80, 11);
        let eig = m.clone().symmetric_eigen();
        let exact_hi = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let exact_lo = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let (lo, hi) = symmetric_eigen_bounds(&m);
        assert!((hi - exact_hi).abs() < 1e-7, "hi {hi} vs {exact_hi}");
        assert!((lo - exact_lo).abs() < 1e-7, "lo {lo} vs {exact_lo}");
    }

    #[test]
    fn operator_norm_of_rotation_is_one() {
        let theta: f64 = 0.7;
        let m =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        assert!((operator_norm(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_of_scaling() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -2.0]));
        assert!((operator_norm(&m) - 2.0).abs() < 1e-12);
    }
}
