//! Small dense symmetric positive-definite kernels.
//!
//! Matrices are row-major `n * n` slices. Only the lower triangle is read by
//! the factorization.

use libm::{log, sqrt};

/// Relative pivot threshold below which a factorization is declared singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// In-place Cholesky factorization `A = L L^T`, writing `L` into the lower
/// triangle and zeroing the strict upper triangle.
///
/// Returns `None` when some pivot falls below `PIVOT_TOLERANCE` times the
/// largest diagonal entry of `A` (or is not finite).
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max(a[i * n + i].abs());
    }
    let floor = PIVOT_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    for j in 0..n {
        let (_, tail) = a.split_at_mut(j * n);
        let (row_j, below) = tail.split_at_mut(n);
        let mut pivot = row_j[j];
        for &l in &row_j[..j] {
            pivot -= l * l;
        }
        if !(pivot > floor) || !pivot.is_finite() {
            return None;
        }
        let diag = sqrt(pivot);
        row_j[j] = diag;
        for x in row_j[j + 1..].iter_mut() {
            *x = 0.0;
        }
        for row_i in below.chunks_exact_mut(n) {
            let mut s = row_i[j];
            for (x, y) in row_i[..j].iter().zip(&row_j[..j]) {
                s -= x * y;
            }
            row_i[j] = s / diag;
        }
    }
    Some(())
}

/// Log determinant of `A` from its Cholesky factor.
pub fn log_det_from_cholesky(l: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        acc += log(l[i * n + i]);
    }
    2.0 * acc
}

/// Computes `A^{-1}` from the Cholesky factor `l`, writing the full symmetric
/// inverse into `out`. `scratch` must hold `n * n` values.
pub fn inverse_from_cholesky(l: &[f64], n: usize, scratch: &mut [f64], out: &mut [f64]) {
    // scratch <- L^{-1}, lower triangular.
    let linv = scratch;
    for x in linv.iter_mut() {
        *x = 0.0;
    }
    for i in 0..n {
        linv[i * n + i] = 1.0 / l[i * n + i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * n + k] * linv[k * n + j];
            }
            linv[i * n + j] = s / l[i * n + i];
        }
    }
    // out <- L^{-T} L^{-1}; (i, j) = sum_{k >= max(i,j)} linv[k,i] linv[k,j].
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..n {
                s += linv[k * n + i] * linv[k * n + j];
            }
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
}

/// Solves `L^T x = b` in place for a lower-triangular Cholesky factor.
pub fn solve_upper_transposed(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn factor_and_invert_small_spd() {
        let a = vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let mut l = a.clone();
        cholesky_in_place(&mut l, 3).unwrap();
        // det by cofactor expansion
        let det = 4.0 * (5.0 * 3.0 - 1.0) - 2.0 * (2.0 * 3.0 - 0.6) + 0.6 * (2.0 * 1.0 - 5.0 * 0.6);
        assert!((log_det_from_cholesky(&l, 3) - log(det)).abs() < 1e-13);
        let mut scratch = vec![0.0; 9];
        let mut inv = vec![0.0; 9];
        inverse_from_cholesky(&l, 3, &mut scratch, &mut inv);
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = vec![1.0, 1.0, 1.0, 1.0];
        assert!(cholesky_in_place(&mut a, 2).is_none());
        let mut z = vec![0.0];
        assert!(cholesky_in_place(&mut z, 1).is_none());
    }

    #[test]
    fn empty_matrix_has_zero_log_det() {
        let mut a: [f64; 0] = [];
        assert!(cholesky_in_place(&mut a, 0).is_some());
        assert_eq!(log_det_from_cholesky(&a, 0), 0.0);
    }
}
